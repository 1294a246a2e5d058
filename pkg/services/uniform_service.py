"""
Uniform Constructions, the Second-Order to Modal Translation and Unravelling

A uniform construction sends a one-step structure (X, alpha) to a star
structure (X_*, alpha_*) with a map h: X_* -> X such that T h(alpha_*) = alpha.
Formulas of SO1 evaluated on star structures induce modal liftings, which
translate second-order automata into modal ones; unravelling builds the tree
models on which the two agree.
"""

import logging
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from config.settings import current_caps
from models.automaton import Automaton, state_vars
from models.errors import CapExceeded, DomainError, InstabilityError
from models.functor import (
    BAG, MON, MONSTAR, POWERSET, Bag, Const, Coproduct, Exp, Id, MonNbhd, MonNbhdStar,
    Powerset, Product, TObject, in_upset, label, make_bag, minimize_family, sort_labels
)
from models.lifting import Lifting, LiftingSet
from models.one_step import Forall, FreshVar, Lift, Sub, Top, Var, is_syntactically_monotone
from models.tmodel import OneStepModel, TModel, TreeModel
from services.functor_service import (
    apply_map, check_value, map_value, random_map, random_tobject, subsets
)
from services.lifting_service import builtin_liftings
from services.one_step_service import eval_one_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StarModel:
    """(X_*, alpha_*) together with h: X_* -> X"""
    carrier: frozenset
    alpha: TObject
    h: dict

    def pull_back(self, valuation):
        """V_[h]: each variable's preimage under h"""
        return {v: frozenset(x for x in self.carrier if self.h[x] in z) for v, z in valuation.items()}


def _truncates(spec):
    if isinstance(spec, (Powerset, MonNbhdStar)):
        return True
    if isinstance(spec, Product):
        return _truncates(spec.left) or _truncates(spec.right)
    if isinstance(spec, Coproduct):
        return any(_truncates(p) for p in spec.parts)
    if isinstance(spec, Exp):
        return _truncates(spec.body)
    return False


def _polynomial(spec):
    """Exponential polynomial functors: Id and Const closed under products, coproducts and exponents"""
    if isinstance(spec, (Id, Const)):
        return True
    if isinstance(spec, Product):
        return _polynomial(spec.left) and _polynomial(spec.right)
    if isinstance(spec, Coproduct):
        return all(_polynomial(p) for p in spec.parts)
    if isinstance(spec, Exp):
        return _polynomial(spec.body)
    return False


class UniformConstruction:
    """Compositional star construction with omega truncated to m copies"""

    name = 'uniform'

    def __init__(self, spec, m=2, k=1):
        if m < 1:
            raise DomainError("Truncation m must be at least 1")
        if k < 0:
            raise DomainError("Quantifier depth k must be nonnegative")
        self.spec = spec
        self.m = m
        self.k = k
        self._check_spec(spec)

    def _check_spec(self, spec):
        if isinstance(spec, MonNbhd):
            raise DomainError("The monotone neighbourhood functor has no adequate uniform construction; use M*")

    @property
    def truncated(self):
        return _truncates(self.spec)

    def with_truncation(self, m):
        return type(self)(self.spec, m=m, k=self.k)

    def star(self, alpha):
        """Star structure of alpha, checking T h(alpha_*) = alpha"""
        if alpha.spec != self.spec:
            raise DomainError(f"Construction {self.name} is for {self.spec.name}, not {alpha.spec.name}")
        points, value, h = self.build(self.spec, alpha.carrier, alpha.value)
        carrier = frozenset(points)
        check_value(self.spec, carrier, value)
        star = StarModel(carrier, TObject(self.spec, carrier, value), h)
        if map_value(self.spec, h, value) != alpha.value:
            raise RuntimeError(f"Construction {self.name} broke T h(alpha_*) = alpha at {alpha.text}")
        return star

    def build(self, spec, carrier, value):
        """Return (X_*, raw alpha_*, h) for a raw value of `spec`"""
        if isinstance(spec, Const):
            return set(), value, {}
        if isinstance(spec, Id):
            return {(value,)}, (value,), {(value,): value}
        if isinstance(spec, Product):
            left = self._tagged(spec.left, carrier, value[0], 'l')
            right = self._tagged(spec.right, carrier, value[1], 'r')
            return left[0] | right[0], (left[1], right[1]), {**left[2], **right[2]}
        if isinstance(spec, Coproduct):
            index, inner = value
            points, star, h = self._tagged(spec.parts[index], carrier, inner, f'i{index}')
            return points, (index, star), h
        if isinstance(spec, Exp):
            points, values, h = set(), [], {}
            for c, inner in sorted(value, key=label):
                part = self._tagged(spec.body, carrier, inner, label(c))
                points |= part[0]
                values.append((c, part[1]))
                h.update(part[2])
            return points, frozenset(values), h
        if isinstance(spec, Powerset):
            points = {(x, i) for x in value for i in range(self.m)}
            return points, frozenset(points), {p: p[0] for p in points}
        if isinstance(spec, Bag):
            points = {(x, i) for x, n in value for i in range(n)}
            return points, make_bag({p: 1 for p in points}), {p: p[0] for p in points}
        if isinstance(spec, MonNbhdStar):
            return self._monstar(value)
        raise DomainError(f"No uniform construction for functor {spec.name}")

    def _tagged(self, spec, carrier, value, tag):
        points, star, h = self.build(spec, carrier, value)
        rename = {p: (tag,) + p for p in points}
        return set(rename.values()), map_value(spec, rename, star), {rename[p]: h[p] for p in points}

    def _monstar(self, value):
        antichain, support = value
        copies = 2 ** self.k
        points = {(u, i, z, j) for z in subsets(support) for u in z for i in range(copies) for j in range(self.m)}

        def basic(y, j):
            return frozenset((u, i, y, j) for u in y for i in range(copies))

        members = minimize_family(basic(y, j) for y in subsets(support) if in_upset(antichain, y)
                                  for j in range(self.m))
        return points, (members, frozenset(points)), {p: p[0] for p in points}


class PowersetConstruction(UniformConstruction):
    name = 'powerset'

    def __init__(self, spec=POWERSET, m=2, k=1):
        super().__init__(spec, m, k)


class BagConstruction(UniformConstruction):
    name = 'bag'

    def __init__(self, spec=BAG, m=1, k=1):
        super().__init__(spec, m, k)


class MonStarConstruction(UniformConstruction):
    name = 'monstar'

    def __init__(self, spec=MONSTAR, m=2, k=1):
        super().__init__(spec, m, k)


class PolynomialConstruction(UniformConstruction):
    name = 'polynomial'

    def _check_spec(self, spec):
        if not _polynomial(spec):
            raise DomainError(f"{spec.name} is not an exponential polynomial functor")


class NaiveMonConstruction(UniformConstruction):
    """One copy of each point per minimal neighbourhood; fails adequacy"""

    name = 'naive-mon'

    def __init__(self, spec=MON, m=1, k=1):
        self.spec = spec
        self.m = m
        self.k = k
        if not isinstance(spec, MonNbhd):
            raise DomainError("The naive construction is only defined for the monotone neighbourhood functor")

    @property
    def truncated(self):
        return False

    def build(self, spec, carrier, value):
        points = {(u, z) for z in value for u in z}
        members = minimize_family(frozenset((u, z) for u in z) for z in value)
        return points, members, {p: p[0] for p in points}


CONSTRUCTIONS = {
    'powerset': PowersetConstruction,
    'bag': BagConstruction,
    'monstar': MonStarConstruction,
    'polynomial': PolynomialConstruction,
    'naive-mon': NaiveMonConstruction
}


def get_construction(name, spec=None, m=2, k=1):
    """Instantiate a registered construction"""
    if name not in CONSTRUCTIONS:
        raise DomainError(f"Unknown construction {name}; choose from {', '.join(sorted(CONSTRUCTIONS))}")
    cls = CONSTRUCTIONS[name]
    if spec is None:
        if name == 'polynomial':
            raise DomainError("The polynomial construction needs an explicit functor")
        return cls(m=m, k=k)
    return cls(spec, m=m, k=k)


def construct_star(construction, alpha):
    return construction.star(alpha)


@dataclass
class StarCache:
    """Star structures already built in one evaluation session"""
    entries: dict = field(default_factory=dict)
    hits: int = 0

    def star(self, construction, alpha):
        key = (construction.name, construction.spec, construction.m, construction.k, alpha.carrier, alpha.value)
        if key in self.entries:
            self.hits += 1
        else:
            self.entries[key] = construction.star(alpha)
        return self.entries[key]


class StarLifting:
    """The modal lifting phi*: alpha in phi*(V) iff (X_*, alpha_*, V_[h]) satisfies phi"""

    def __init__(self, formula, variables, construction, liftings=None, caps=None, cache=None):
        if formula.quantifier_depth > construction.k:
            raise DomainError(f"Formula of quantifier depth {formula.quantifier_depth} exceeds k={construction.k}")
        if not is_syntactically_monotone(formula):
            raise DomainError("Only monotone formulas induce modal liftings")
        extra = formula.free_vars - set(variables)
        if extra:
            raise DomainError(f"Formula leaves {sort_labels(extra)} unbound")
        self.formula = formula
        self.variables = tuple(variables)
        self.construction = construction
        self.liftings = liftings or builtin_liftings(construction.spec)
        self.caps = caps or current_caps()
        self.cache = cache if cache is not None else StarCache()

    @property
    def arity(self):
        return len(self.variables)

    def _holds_at(self, construction, alpha, valuation):
        star = self.cache.star(construction, alpha)
        model = OneStepModel(star.carrier, star.alpha, star.pull_back(valuation))
        return eval_one_step(self.formula, model, self.liftings, self.caps)

    def member(self, alpha, args):
        valuation = dict(zip(self.variables, (frozenset(a) for a in args)))
        construction = self.construction
        answer = self._holds_at(construction, alpha, valuation)
        if not construction.truncated:
            return answer
        # at least one doubling, then keep doubling until two answers agree or m passes the limit
        limit = max(construction.m, 2 ** construction.k * self.caps.stabilize_factor)
        m = construction.m
        while True:
            m *= 2
            following = self._holds_at(construction.with_truncation(m), alpha, valuation)
            if following == answer:
                return answer
            answer = following
            if m >= limit:
                raise InstabilityError(f"Star truth of the formula at {alpha.text} did not stabilise up to m={m}")


def so_to_ml_lifting(formula, variables, construction, liftings=None, caps=None, cache=None, name='star'):
    """Lifting object for phi*, usable wherever a modal lifting is"""
    star = StarLifting(formula, variables, construction, liftings, caps, cache)
    return Lifting(name, star.arity, construction.spec, star.member)


def translate_automaton(automaton, construction, caps=None):
    """Modal automaton with the same states and priorities, transitions replaced by their star liftings"""
    if not automaton.monotone:
        raise DomainError(f"Automaton {automaton.name} is not monotone")
    cache = StarCache()
    liftings = LiftingSet(construction.spec)
    names = {}

    def transition(state, color):
        formula = automaton.transition(state, color)
        if isinstance(formula, Top):
            return formula
        if formula not in names:
            variables = tuple(sort_labels(state_vars(formula)))
            name = f'star{len(names)}'
            lifting = so_to_ml_lifting(formula, variables, construction, automaton.liftings, caps, cache, name)
            liftings.register(lifting)
            names[formula] = (name, variables)
        name, variables = names[formula]
        return Lift(name, tuple(Var(v) for v in variables))

    return Automaton(
        initial=automaton.initial,
        chromatic=automaton.chromatic,
        flavor='ml1',
        liftings=liftings,
        transition_fn=transition,
        priority_fn=automaton.priority,
        monotone=True,
        name=f'{automaton.name}*'
    )


# Unravelling

def leaf_value(spec):
    """Structure with empty support, used at the depth cut"""
    if isinstance(spec, Powerset):
        return frozenset()
    if isinstance(spec, Bag):
        return make_bag({})
    if isinstance(spec, MonNbhdStar):
        return (frozenset(), frozenset())
    raise DomainError(f"Functor {spec.name} has no canonical leaf structure for the depth cut")


@dataclass(frozen=True, eq=False)
class Unravelling:
    """Tree model built from a pointed model with its homomorphism gamma back to the source"""
    source: TModel
    point: object
    depth: int
    tree: TreeModel
    gamma: dict
    frontier: frozenset

    def homomorphism_failures(self):
        """Inner nodes v with T gamma(sigma(v)) != sigma(gamma(v))"""
        failures = []
        for v in sort_labels(self.tree.carrier - self.frontier):
            image = apply_map(self.source.spec, self.gamma, self.tree.model.sigma[v], self.source.carrier)
            if image.value != self.source.sigma[self.gamma[v]].value:
                failures.append(v)
        return failures

    def image(self):
        return frozenset(self.gamma.values())


def unravel(model, point, construction, depth, max_nodes=20000):
    """Tree of sequences of star points, cut at `depth`"""
    if depth < 1:
        raise DomainError("Unravelling depth must be at least 1")
    if point not in model.carrier:
        raise DomainError(f"{label(point)} is not a state of the model")
    if construction.spec != model.spec:
        raise DomainError(f"Construction {construction.name} does not apply to {model.spec.name}")

    root = (point,)
    gamma = {root: point}
    stars = {}
    layer = [root]
    frame = {}
    frontier = set()
    for level in range(depth + 1):
        following = []
        for v in layer:
            if level == depth:
                frontier.add(v)
                continue
            s = gamma[v]
            if s not in stars:
                stars[s] = construction.star(model.sigma[s])
            star = stars[s]
            children = []
            for w in sort_labels(star.carrier):
                child = v + (w,)
                gamma[child] = star.h[w]
                children.append(child)
            frame[v] = frozenset(children)
            following.extend(children)
            if len(gamma) > max_nodes:
                raise CapExceeded(f"Unravelling exceeds {max_nodes} nodes")
        layer = following

    carrier = frozenset(gamma)
    leaf = leaf_value(model.spec) if frontier else None
    sigma = {}
    for v in carrier:
        if v in frontier:
            sigma[v] = TObject(model.spec, carrier, leaf)
        else:
            star = stars[gamma[v]]
            step = {w: v + (w,) for w in star.carrier}
            sigma[v] = TObject(model.spec, carrier, map_value(model.spec, step, star.alpha.value))
    valuation = {p: frozenset(v for v in carrier if gamma[v] in points) for p, points in model.valuation.items()}
    tree = TreeModel(TModel(model.spec, carrier, sigma, valuation), frame, root)
    logger.debug(f"Unravelled {label(point)} to {len(carrier)} nodes, {len(frontier)} on the frontier")
    return Unravelling(model, point, depth, tree, gamma, frozenset(frontier))


# Adequacy

def empty_extension(var='a'):
    """forall Z (var <= Z): the extension of var is empty"""
    z = FreshVar(0)
    return Forall(z, Sub(var, z))


def default_corpus(spec, k):
    """Small formulas over variables a, b of depth at most k"""
    liftings = builtin_liftings(spec)
    corpus = [(Top(), ())]
    for name in ('box', 'dia', 'E', 'ge1', 'ge2', 'next'):
        if name in liftings and liftings.resolve(name).arity == 1:
            corpus.append((Lift(name, (Var('a'),)), ('a',)))
    if k >= 1:
        corpus.append((empty_extension('a'), ('a',)))
        z = FreshVar(0)
        corpus.append((Forall(z, Sub(z, 'a')), ('a',)))
    return corpus


def star_truth(construction, alpha, valuation, formula, caps=None):
    star = construction.star(alpha)
    model = OneStepModel(star.carrier, star.alpha, star.pull_back(valuation))
    return eval_one_step(formula, model, builtin_liftings(construction.spec), caps)


def adequacy_violation(construction, alpha, f, codomain, valuation, formula, caps=None):
    """Compare (X_*, alpha_*, V_[f.h]) with (Y_*, beta_*, V_[h]) for beta = T f(alpha)"""
    beta = apply_map(construction.spec, f, alpha, codomain)
    pulled = {v: frozenset(x for x in alpha.carrier if f[x] in z) for v, z in valuation.items()}
    source = star_truth(construction, alpha, pulled, formula, caps)
    target = star_truth(construction, beta, valuation, formula, caps)
    if source == target:
        return None
    return {
        'alpha': alpha.text,
        'beta': beta.text,
        'map': {label(x): label(y) for x, y in sorted(f.items(), key=lambda kv: label(kv[0]))},
        'valuation': {v: sort_labels(z) for v, z in valuation.items()},
        'source_truth': source,
        'target_truth': target
    }


def find_strong_adequacy_bijection(construction, alpha, f, codomain):
    """Bijection g: X_* -> Y_* with T g(alpha_*) = beta_* and f.h_alpha = h_beta.g, or None"""
    beta = apply_map(construction.spec, f, alpha, codomain)
    source = construction.star(alpha)
    target = construction.star(beta)
    if len(source.carrier) != len(target.carrier):
        return None
    points = sort_labels(source.carrier)
    options = {x: [y for y in sort_labels(target.carrier) if target.h[y] == f[source.h[x]]] for x in points}
    g = {}
    used = set()

    def extend(i):
        if i == len(points):
            image = map_value(construction.spec, g, source.alpha.value)
            return image == target.alpha.value
        x = points[i]
        for y in options[x]:
            if y in used:
                continue
            g[x] = y
            used.add(y)
            if extend(i + 1):
                return True
            used.discard(y)
            del g[x]
        return False

    return dict(g) if extend(0) else None


def check_adequacy(construction, k=None, sample_budget=30, seed=42, corpus=None, samples=None,
                   strong=False, max_size=3, caps=None):
    """
    Search for violations of adequacy by sampling maps f: X -> Y and values alpha.

    `samples` lists explicit (alpha, f, codomain, valuation, formula) cases,
    checked before the random ones.
    """
    k = construction.k if k is None else k
    corpus = corpus or default_corpus(construction.spec, k)
    corpus = [(phi, vs) for phi, vs in corpus if phi.quantifier_depth <= k]
    rng = np.random.default_rng(seed)
    report = {'construction': construction.name, 'checked': 0, 'skipped': 0, 'violations': [],
              'strong_checked': 0, 'strong_failures': []}

    cases = list(samples or ())
    for _ in range(sample_budget):
        domain = frozenset(f'x{i}' for i in range(int(rng.integers(1, max_size + 1))))
        codomain = frozenset(f'y{i}' for i in range(int(rng.integers(1, max_size + 1))))
        f = random_map(domain, codomain, rng)
        alpha = random_tobject(construction.spec, domain, rng, current_caps().bag_count)
        formula, variables = corpus[int(rng.integers(len(corpus)))]
        valuation = {v: frozenset(y for y in sort_labels(codomain) if rng.random() < 0.5) for v in variables}
        cases.append((alpha, f, codomain, valuation, formula))

    for alpha, f, codomain, valuation, formula in cases:
        try:
            found = adequacy_violation(construction, alpha, f, frozenset(codomain), valuation, formula, caps)
        except CapExceeded as e:
            report['skipped'] += 1
            logger.debug(f"Skipped adequacy sample: {str(e)}")
            continue
        report['checked'] += 1
        if found:
            report['violations'].append(found)
        if strong:
            report['strong_checked'] += 1
            if find_strong_adequacy_bijection(construction, alpha, f, frozenset(codomain)) is None:
                report['strong_failures'].append({'alpha': alpha.text, 'map': {label(x): label(y) for x, y in f.items()}})

    report['adequate'] = not report['violations']
    if report['violations']:
        logger.warning(f"Construction {construction.name} violates adequacy on {len(report['violations'])} samples")
    return report


def naive_mon_counterexample():
    """The data refuting adequacy for plain monotone neighbourhoods"""
    alpha = TObject(MON, frozenset({'u*', 'v*', 'w*'}),
                    minimize_family([{'u*', 'v*'}, {'u*', 'w*'}, {'u*', 'v*', 'w*'}]))
    f = {'u*': 'u', 'v*': 'v', 'w*': 'u'}
    return alpha, f, frozenset({'u', 'v'}), {'a': frozenset({'v'})}, empty_extension('a')


def exhaustive_maps(domain, codomain):
    """Every map domain -> codomain, in label order"""
    points = sort_labels(domain)
    for targets in product(sort_labels(codomain), repeat=len(points)):
        yield dict(zip(points, targets))
