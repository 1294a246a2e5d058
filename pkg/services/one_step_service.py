"""
One-Step Semantics Service

Evaluation of ML1 and SO1 one-step formulas, Boolean duals, bounded
monotonicity and special-basic checks, and the Ehrenfeucht-Fraisse
equivalence oracle for one-step models.
"""

import logging
from functools import reduce
from itertools import combinations, product

from config.settings import current_caps
from models.errors import CapExceeded, DomainError
from models.functor import Bag, label, sort_labels
from models.lifting import dual_name
from models.one_step import (
    And, Bot, Disjoint, Dual, Empty, Exists, Forall, Lift, Not, Or, Sub, Top,
    UnionEq, conjuncts, dual_term, term_value
)
from models.tmodel import OneStepModel
from services.functor_service import enumerate_tobjects, subsets

logger = logging.getLogger(__name__)


def _check_bound(formula, valuation):
    missing = formula.free_vars - set(valuation)
    if missing:
        raise DomainError(f"Unbound one-step variables: {sort_labels(missing)}")


def eval_ml1(formula, model, liftings):
    """Truth of a modal one-step formula in (X, alpha, V)"""
    if not formula.is_ml:
        raise DomainError("Formula is not in the modal one-step language")
    _check_bound(formula, model.valuation)
    return _ml(formula, model.alpha, model.valuation, liftings)


def _ml(node, alpha, valuation, liftings):
    if isinstance(node, Top):
        return True
    if isinstance(node, Bot):
        return False
    if isinstance(node, Lift):
        args = [term_value(t, valuation) for t in node.args]
        return liftings.resolve(node.name).member(alpha, args)
    if isinstance(node, Or):
        return _ml(node.left, alpha, valuation, liftings) or _ml(node.right, alpha, valuation, liftings)
    if isinstance(node, And):
        return _ml(node.left, alpha, valuation, liftings) and _ml(node.right, alpha, valuation, liftings)
    raise DomainError(f"Unexpected node {type(node).__name__} in a modal one-step formula")


class _SoEvaluator:
    """Evaluator for one carrier, structure and lifting set"""

    def __init__(self, alpha, liftings, caps):
        self.alpha = alpha
        self.carrier = alpha.carrier
        self.liftings = liftings
        self.caps = caps
        self._all = None

    def all_subsets(self):
        if self._all is None:
            if len(self.carrier) > self.caps.quantifier:
                raise CapExceeded(
                    f"Quantifying over {len(self.carrier)} points exceeds cap {self.caps.quantifier}")
            self._all = subsets(self.carrier)
        return self._all

    def holds(self, node, valuation):
        if isinstance(node, Top):
            return True
        if isinstance(node, Bot):
            return False
        if isinstance(node, Lift):
            args = [term_value(t, valuation) for t in node.args]
            return self.liftings.resolve(node.name).member(self.alpha, args)
        if isinstance(node, Sub):
            return valuation[node.left] <= valuation[node.right]
        if isinstance(node, Or):
            return self.holds(node.left, valuation) or self.holds(node.right, valuation)
        if isinstance(node, And):
            return self.holds(node.left, valuation) and self.holds(node.right, valuation)
        if isinstance(node, Not):
            return not self.holds(node.body, valuation)
        if isinstance(node, Dual):
            flipped = dict(valuation)
            for v in node.body.free_vars:
                flipped[v] = self.carrier - valuation[v]
            return not self.holds(node.body, flipped)
        if isinstance(node, Empty):
            return not valuation[node.var]
        if isinstance(node, Disjoint):
            names = list(dict.fromkeys(node.vars))
            return all(not (valuation[a] & valuation[b]) for a, b in combinations(names, 2))
        if isinstance(node, UnionEq):
            union = frozenset().union(*(valuation[p] for p in node.parts))
            return valuation[node.var] == union
        if isinstance(node, Forall):
            for z in self.all_subsets():
                if not self.holds(node.body, {**valuation, node.var: z}):
                    return False
            return True
        if isinstance(node, Exists):
            block = []
            body = node
            while isinstance(body, Exists):
                block.append(body.var)
                body = body.body
            return self.solve_block(block, conjuncts(body), valuation)
        raise DomainError(f"Unknown one-step node {type(node).__name__}")

    def solve_block(self, block, parts, valuation):
        """Search witnesses for an existential block over a conjunction"""
        remaining = list(dict.fromkeys(block))
        ready = [c for c in parts if not (c.free_vars & set(remaining))]
        pending = [c for c in parts if c.free_vars & set(remaining)]
        inner = dict(valuation)
        for v in remaining:
            inner.pop(v, None)
        if not all(self.holds(c, inner) for c in ready):
            return False
        return self._assign(remaining, pending, inner)

    def _assign(self, remaining, pending, valuation):
        if not remaining:
            return all(self.holds(c, valuation) for c in pending)
        var, candidates = self._next_variable(remaining, pending, valuation)
        rest = [v for v in remaining if v != var]
        left = set(rest)
        ready = [c for c in pending if not (c.free_vars & left)]
        waiting = [c for c in pending if c.free_vars & left]
        for z in candidates:
            trial = {**valuation, var: z}
            if all(self.holds(c, trial) for c in ready) and self._assign(rest, waiting, trial):
                return True
        return False

    def _next_variable(self, remaining, pending, valuation):
        open_vars = set(remaining)
        for v in remaining:
            if not any(v in c.free_vars for c in pending):
                return v, [frozenset()]
        for c in pending:
            if isinstance(c, UnionEq) and c.var in open_vars and not (set(c.parts) & open_vars):
                forced = frozenset().union(*(valuation[p] for p in c.parts))
                return c.var, [forced]
        bounds = {}
        for c in pending:
            if isinstance(c, Sub) and c.left in open_vars and c.right not in open_vars and c.left != c.right:
                bounds.setdefault(c.left, []).append(valuation[c.right])
        if bounds:
            var = min(bounds, key=lambda v: (len(reduce(frozenset.__and__, bounds[v])), label(v)))
            limit = reduce(frozenset.__and__, bounds[var])
            if len(limit) > self.caps.quantifier:
                raise CapExceeded(f"Quantifying over {len(limit)} points exceeds cap {self.caps.quantifier}")
            return var, subsets(limit)
        return remaining[0], self.all_subsets()


def eval_so1(formula, model, liftings, caps=None):
    """Truth of a second-order one-step formula in (X, alpha, V)"""
    _check_bound(formula, model.valuation)
    evaluator = _SoEvaluator(model.alpha, liftings, caps or current_caps())
    return evaluator.holds(formula, dict(model.valuation))


def eval_one_step(formula, model, liftings, caps=None):
    """Dispatch on the flavor of the formula"""
    if formula.is_ml:
        return eval_ml1(formula, model, liftings)
    return eval_so1(formula, model, liftings, caps)


def dual_formula(formula, liftings=None):
    """Boolean dual: structural for ML1, a Dual wrapper for SO1"""
    if formula.is_ml:
        return _ml_dual(formula, liftings)
    if isinstance(formula, Dual):
        return formula.body
    return Dual(formula)


def _ml_dual(node, liftings):
    if isinstance(node, Top):
        return Bot()
    if isinstance(node, Bot):
        return Top()
    if isinstance(node, Or):
        return And(_ml_dual(node.left, liftings), _ml_dual(node.right, liftings))
    if isinstance(node, And):
        return Or(_ml_dual(node.left, liftings), _ml_dual(node.right, liftings))
    if isinstance(node, Lift):
        name = liftings.dual_of(node.name) if liftings is not None else dual_name(node.name)
        return Lift(name, tuple(dual_term(t) for t in node.args))
    raise DomainError(f"Unexpected node {type(node).__name__} in a modal one-step formula")


class GeneralizedLifting:
    """The generalized lifting X, V -> {alpha | (X, alpha, V) satisfies formula}"""

    def __init__(self, formula, variables, spec, liftings, name=None, caps=None):
        self.formula = formula
        self.variables = tuple(variables)
        self.spec = spec
        self.liftings = liftings
        self.name = name or 'generalized'
        self.caps = caps
        extra = formula.free_vars - set(self.variables)
        if extra:
            raise DomainError(f"Generalized lifting leaves {sort_labels(extra)} unbound")

    @property
    def arity(self):
        return len(self.variables)

    def member(self, alpha, args):
        valuation = dict(zip(self.variables, (frozenset(a) for a in args)))
        return eval_one_step(self.formula, OneStepModel(alpha.carrier, alpha, valuation), self.liftings, self.caps)


def _carriers(cap):
    return [frozenset(f'x{i}' for i in range(n)) for n in range(cap + 1)]


def _valuations(variables, carrier):
    for values in product(subsets(carrier), repeat=len(variables)):
        yield dict(zip(variables, values))


def is_monotone_bruteforce(formula, spec, liftings, carrier_cap=3, variables=None, count_bound=1, caps=None):
    """(monotone, witness): enlarging one variable by one point never falsifies the formula"""
    caps = caps or current_caps()
    if carrier_cap > caps.monotone_carrier:
        raise CapExceeded(f"Monotonicity check above {caps.monotone_carrier} points")
    free = sort_labels(formula.free_vars)
    tested = free if variables is None else [v for v in free if v in set(variables)]
    for carrier in _carriers(carrier_cap):
        for alpha in enumerate_tobjects(spec, carrier, count_bound):
            for valuation in _valuations(free, carrier):
                model = OneStepModel(carrier, alpha, valuation)
                if not eval_one_step(formula, model, liftings, caps):
                    continue
                for v in tested:
                    for x in sort_labels(carrier - valuation[v]):
                        larger = model.with_valuation({**valuation, v: valuation[v] | {x}})
                        if not eval_one_step(formula, larger, liftings, caps):
                            return False, _witness(model, v, x)
    return True, None


def _witness(model, var, point):
    report = model.to_dict()
    report['variable'] = label(var)
    report['added'] = label(point)
    return report


def disjoint_shrinkings(valuation, variables):
    """Valuations V* below V with pairwise disjoint values"""
    points = sort_labels(frozenset().union(*(valuation[v] for v in variables)) if variables else ())
    options = [[None] + [v for v in variables if x in valuation[v]] for x in points]
    for choice in product(*options):
        shrunk = {v: set() for v in variables}
        for x, v in zip(points, choice):
            if v is not None:
                shrunk[v].add(x)
        yield {v: frozenset(s) for v, s in shrunk.items()}


def is_special_basic_bruteforce(formula, spec, liftings, carrier_cap=2, count_bound=1, caps=None):
    """(special_basic, witness): every satisfying valuation shrinks to a disjoint satisfying one"""
    caps = caps or current_caps()
    if carrier_cap > caps.special_basic_carrier:
        raise CapExceeded(f"Special-basic check above {caps.special_basic_carrier} points")
    free = sort_labels(formula.free_vars)
    for carrier in _carriers(carrier_cap):
        for alpha in enumerate_tobjects(spec, carrier, count_bound):
            for valuation in _valuations(free, carrier):
                model = OneStepModel(carrier, alpha, valuation)
                if not eval_one_step(formula, model, liftings, caps):
                    continue
                if not any(eval_one_step(formula, model.with_valuation(v), liftings, caps)
                           for v in disjoint_shrinkings(valuation, free)):
                    return False, model.to_dict()
    return True, None


def default_atoms(liftings, *alphas):
    """Registered liftings, or for bags every threshold ge1..geN up to the heaviest structure"""
    names = liftings.names()
    if names:
        return names
    if isinstance(liftings.spec, Bag):
        heaviest = max((sum(n for _, n in alpha.value) for alpha in alphas), default=0)
        return [f'ge{n}' for n in range(1, max(heaviest, 1) + 1)]
    raise DomainError(f"Liftings of {liftings.spec.name} have no default atom list; pass the names to compare")


def ef_equiv(m1, m2, k, liftings, atoms=None, caps=None):
    """Agreement on every SO1 sentence of quantifier depth at most k, by back-and-forth"""
    caps = caps or current_caps()
    if max(len(m1.carrier), len(m2.carrier)) > caps.ef_carrier:
        raise CapExceeded(f"EF check above {caps.ef_carrier} points")
    if k > caps.ef_depth:
        raise CapExceeded(f"EF depth {k} exceeds cap {caps.ef_depth}")
    if set(m1.valuation) != set(m2.valuation):
        raise DomainError("EF check needs the same interpreted variables on both sides")
    atoms = default_atoms(liftings, m1.alpha, m2.alpha) if atoms is None else list(atoms)
    lifts = [liftings.resolve(name) for name in atoms]
    base = sort_labels(m1.valuation)
    memo = {}
    subsets1 = subsets(m1.carrier)
    subsets2 = subsets(m2.carrier)

    def agree(values1, values2):
        for i, j in product(range(len(values1)), repeat=2):
            if (values1[i] <= values1[j]) != (values2[i] <= values2[j]):
                return False
        for lifting in lifts:
            for idx in product(range(len(values1)), repeat=lifting.arity):
                left = lifting.member(m1.alpha, [values1[i] for i in idx])
                right = lifting.member(m2.alpha, [values2[i] for i in idx])
                if left != right:
                    return False
        return True

    def game(values1, values2, rounds):
        key = (values1, values2, rounds)
        if key in memo:
            return memo[key]
        result = agree(values1, values2)
        if result and rounds > 0:
            result = (
                all(any(game(values1 + (z1,), values2 + (z2,), rounds - 1) for z2 in subsets2) for z1 in subsets1)
                and all(any(game(values1 + (z1,), values2 + (z2,), rounds - 1) for z1 in subsets1) for z2 in subsets2)
            )
        memo[key] = result
        return result

    start1 = tuple(m1.valuation[v] for v in base)
    start2 = tuple(m2.valuation[v] for v in base)
    verdict = game(start1, start2, k)
    logger.debug(f"EF check at depth {k}: {verdict} ({len(memo)} positions)")
    return verdict

