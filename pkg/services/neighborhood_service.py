"""
Monotone Neighbourhood Models: bisimulations, the global M* adapter,
MMSO, signatures of star models and the failed-adequacy replay
"""

import logging
from collections import Counter
from dataclasses import dataclass

from config.settings import current_caps
from models import logic as L
from models.errors import CapExceeded, DomainError
from models.functor import MON, MONSTAR, MonNbhd, MonNbhdStar, TObject, in_upset, label, sort_labels
from models.one_step import Lift, Sub, Var
from models.tmodel import OneStepModel, TModel
from services.functor_service import apply_map, minimal_supports, restrict_to_support, subsets
from services.lifting_service import builtin_liftings
from services.logic_service import MsoEvaluator, eval_mu
from services.one_step_service import eval_one_step
from services.parser_service import parse_mso, print_one_step
from services.uniform_service import (
    MonStarConstruction, NaiveMonConstruction, adequacy_violation, naive_mon_counterexample
)

logger = logging.getLogger(__name__)


# Bisimulations

@dataclass(frozen=True)
class NbhdBisim:
    """Largest neighbourhood bisimulation; `holds` is False when a global one does not exist"""
    relation: frozenset
    is_global: bool
    holds: bool

    def related(self, s1, s2):
        return (s1, s2) in self.relation

    def to_dict(self):
        return {
            'global': self.is_global,
            'holds': self.holds,
            'relation': [[label(a), label(b)] for a, b in sorted(self.relation, key=label)]
        }


def _require_mon(model):
    if not isinstance(model.spec, MonNbhd):
        raise DomainError(f"Expected a monotone neighbourhood model, got functor {model.spec.name}")


def _variables(m1, m2):
    return set(m1.valuation) | set(m2.valuation)


def _zig(family, other, relation, forward):
    """Every member of `family` is matched by a member of `other` whose points all have a partner"""
    for z1 in family:
        matched = False
        for z2 in other:
            if forward:
                ok = all(any((t1, t2) in relation for t1 in z1) for t2 in z2)
            else:
                ok = all(any((t1, t2) in relation for t2 in z1) for t1 in z2)
            if ok:
                matched = True
                break
        if not matched:
            return False
    return True


def _pair_ok(m1, m2, s1, s2, relation):
    n1 = m1.sigma[s1].value
    n2 = m2.sigma[s2].value
    return _zig(n1, n2, relation, True) and _zig(n2, n1, relation, False)


def largest_nbhd_bisim(m1, m2, is_global=False):
    """Greatest fixpoint of the bisimulation clauses, starting from all colour-respecting pairs"""
    _require_mon(m1)
    _require_mon(m2)
    variables = _variables(m1, m2)
    relation = {(s1, s2) for s1 in m1.carrier for s2 in m2.carrier
                if m1.colors(s1, variables) == m2.colors(s2, variables)}
    rounds = 0
    while True:
        rounds += 1
        kept = {(s1, s2) for s1, s2 in relation if _pair_ok(m1, m2, s1, s2, relation)}
        if kept == relation:
            break
        relation = kept
    logger.debug(f"Bisimulation refinement stable after {rounds} rounds with {len(relation)} pairs")
    holds = True
    if is_global:
        forth = all(any((u, v) in relation for v in m2.carrier) for u in m1.carrier)
        back = all(any((u, v) in relation for u in m1.carrier) for v in m2.carrier)
        holds = forth and back
    return NbhdBisim(frozenset(relation), is_global, holds)


def verify_nbhd_bisim(m1, m2, relation, is_global=False):
    """Pairs of `relation` violating a clause, plus totality failures for global bisimulations"""
    variables = _variables(m1, m2)
    relation = set(relation)
    failures = []
    for s1, s2 in sorted(relation, key=label):
        if m1.colors(s1, variables) != m2.colors(s2, variables):
            failures.append({'pair': [label(s1), label(s2)], 'clause': 'colours'})
        elif not _zig(m1.sigma[s1].value, m2.sigma[s2].value, relation, True):
            failures.append({'pair': [label(s1), label(s2)], 'clause': 'forth'})
        elif not _zig(m2.sigma[s2].value, m1.sigma[s1].value, relation, False):
            failures.append({'pair': [label(s1), label(s2)], 'clause': 'back'})
    if is_global:
        for u in sort_labels(m1.carrier):
            if not any((u, v) in relation for v in m2.carrier):
                failures.append({'state': label(u), 'clause': 'total'})
        for v in sort_labels(m2.carrier):
            if not any((u, v) in relation for u in m1.carrier):
                failures.append({'state': label(v), 'clause': 'surjective'})
    return failures


# Global adapter

def to_global_mstar(model):
    """sigma^G(s) = (sigma(s), S)"""
    _require_mon(model)
    sigma = {s: TObject(MONSTAR, model.carrier, (alpha.value, model.carrier)) for s, alpha in model.sigma.items()}
    return TModel(MONSTAR, model.carrier, sigma, model.valuation)


def underlying_m(model):
    """Forget the support component of an M* model"""
    if not isinstance(model.spec, MonNbhdStar):
        raise DomainError(f"Expected an M* model, got functor {model.spec.name}")
    sigma = {s: TObject(MON, model.carrier, alpha.value[0]) for s, alpha in model.sigma.items()}
    return TModel(MON, model.carrier, sigma, model.valuation)


def globalize(formula):
    """[some] becomes E and [all] becomes its dual Ed"""
    if isinstance(formula, L.MuGlobal):
        name = 'E' if formula.kind == 'some' else 'Ed'
        return L.MuModal(name, (globalize(formula.body),))
    return _rebuild(formula, globalize)


def deglobalize(formula):
    """Inverse of globalize: E and Ed back to the global modalities"""
    if isinstance(formula, L.MuModal) and formula.name in ('E', 'Ed') and len(formula.args) == 1:
        kind = 'some' if formula.name == 'E' else 'all'
        return L.MuGlobal(kind, deglobalize(formula.args[0]))
    return _rebuild(formula, deglobalize)


def _rebuild(formula, walk):
    if isinstance(formula, (L.MuVar, L.MuNegVar, L.MuBot, L.MuTop)):
        return formula
    if isinstance(formula, (L.MuOr, L.MuAnd)):
        return type(formula)(walk(formula.left), walk(formula.right))
    if isinstance(formula, L.MuModal):
        return L.MuModal(formula.name, tuple(walk(a) for a in formula.args))
    if isinstance(formula, L.MuGlobal):
        return L.MuGlobal(formula.kind, walk(formula.body))
    if isinstance(formula, L.MuFix):
        return L.MuFix(formula.kind, formula.var, walk(formula.body))
    raise DomainError(f"Unknown mu-calculus node {type(formula).__name__}")


def eval_mu_global(formula, model, point, liftings=None):
    """Monotone mu-calculus with global modalities on an M model"""
    _require_mon(model)
    return eval_mu(formula, model, point, liftings)


# MMSO

def parse_mmso(text):
    """MSO text restricted to sr, inclusion and the neighbourhood box"""
    formula = parse_mso(text)
    for node in L.mu_subformulas(formula):
        if isinstance(node, L.MsoLift):
            raise DomainError(f"MMSO has no lifting atom {node.name}; use box(p, q)")
    return formula


def mmso_to_mso(formula):
    """Replace every neighbourhood box by the box lifting atom"""
    if isinstance(formula, L.NbhdBox):
        return formula.expand()
    if isinstance(formula, (L.MsoOr, L.MsoAnd)):
        return type(formula)(mmso_to_mso(formula.left), mmso_to_mso(formula.right))
    if isinstance(formula, L.MsoNot):
        return L.MsoNot(mmso_to_mso(formula.body))
    if isinstance(formula, (L.MsoExists, L.MsoForall)):
        return type(formula)(formula.var, mmso_to_mso(formula.body))
    return formula


class MmsoEvaluator(MsoEvaluator):
    """Reads box(p, q) as: every point of p has a neighbourhood inside q"""

    def holds(self, node, v):
        if isinstance(node, L.NbhdBox):
            return all(any(z <= v[node.target] for z in self.model.sigma[s].value) for s in v[node.point])
        return super().holds(node, v)


def eval_mmso(formula, model, point, caps=None):
    _require_mon(model)
    for node in L.mu_subformulas(formula):
        if isinstance(node, L.MsoLift):
            raise DomainError(f"MMSO has no lifting atom {node.name}")
    caps = caps or current_caps()
    if point not in model.carrier:
        raise DomainError(f"{label(point)} is not a state of the model")
    missing = formula.free_vars - set(model.valuation)
    if missing:
        raise DomainError(f"Unbound second-order variables: {sorted(missing)}")
    quantified = any(isinstance(n, (L.MsoExists, L.MsoForall)) for n in L.mu_subformulas(formula))
    if quantified and len(model.carrier) > caps.quantifier:
        raise CapExceeded(f"Quantifying over {len(model.carrier)} states exceeds cap {caps.quantifier}")
    return MmsoEvaluator(model, point, None).holds(formula, dict(model.valuation))


# Signatures of M* star models

@dataclass(frozen=True, eq=False)
class PointedStar:
    """Star structure with a valuation on its points and the truncation it was built with"""
    star: object
    valuation: dict
    m: int


def pointed_star(construction, alpha, valuation):
    """(X_*, alpha_*, V_[h]) for a valuation V on alpha's carrier"""
    if not isinstance(construction.spec, MonNbhdStar):
        raise DomainError("Signatures are defined for M* star models")
    star = construction.star(alpha)
    return PointedStar(star, star.pull_back(valuation), construction.m)


def basic_members(pointed):
    """Basic members (Y, j) -> their point sets"""
    antichain = pointed.star.alpha.value[0]
    blocks = {}
    for point in pointed.star.carrier:
        _, _, y, j = point
        blocks.setdefault((y, j), set()).add(point)
    members = {key: frozenset(points) for key, points in blocks.items() if in_upset(antichain, frozenset(points))}
    if frozenset() in antichain:
        for j in range(pointed.m):
            members[(frozenset(), j)] = frozenset()
    return members


def m_signature(pointed, basic, m, variables=None):
    """Counts of each propositional type inside a basic member, capped at m"""
    if basic not in basic_members(pointed).values():
        raise DomainError("Not a basic member of the star model")
    variables = sort_labels(variables if variables is not None else pointed.valuation)
    counts = Counter(frozenset(v for v in variables if x in pointed.valuation.get(v, ())) for x in basic)
    return {t: min(counts.get(t, 0), m) for t in subsets(variables)}


def _signature_key(signature):
    return tuple(sorted((label(t), n) for t, n in signature.items()))


def models_match(left, right, n, cap=None, variables=None):
    """Per n-signature, equal counts of basic members, counts of `cap` or more being infinite"""
    if left.m != right.m:
        raise DomainError(f"Star models truncated differently (m={left.m} and m={right.m})")
    cap = cap or left.m
    if variables is None:
        variables = set(left.valuation) | set(right.valuation)

    def profile(pointed):
        found = Counter()
        for basic in basic_members(pointed).values():
            found[_signature_key(m_signature(pointed, basic, n, variables))] += 1
        return {key: min(count, cap) for key, count in found.items()}

    return profile(left) == profile(right)


# Failed adequacy for plain neighbourhoods

def counterexample_demo(candidate=None, k=1, m=2):
    """Replay the checkable steps showing plain neighbourhoods lack an adequate construction"""
    alpha, f, y, valuation, formula = naive_mon_counterexample()
    report = {'steps': []}

    beta = apply_map(MON, f, alpha, y)
    report['steps'].append({
        'step': 'image',
        'beta': beta.text,
        'holds': beta.value == frozenset({frozenset({'u'})})
    })

    restricted = restrict_to_support(beta, {'u'})
    report['steps'].append({'step': 'small-support', 'support': ['u'], 'restricted': restricted.text, 'holds': True})

    supports = minimal_supports(alpha)
    report['steps'].append({
        'step': 'supports-contain-v*',
        'minimal_supports': [sort_labels(s) for s in supports],
        'holds': all('v*' in s for s in supports)
    })

    candidate = candidate or NaiveMonConstruction()
    violation = adequacy_violation(candidate, alpha, f, y, valuation, formula)
    report['steps'].append({
        'step': 'adequacy',
        'construction': candidate.name,
        'violation': violation,
        'holds': violation is not None
    })

    construction = MonStarConstruction(m=m, k=k)
    alpha_star = TObject(MONSTAR, alpha.carrier, (alpha.value, alpha.carrier))
    beta_star = apply_map(MONSTAR, f, alpha_star, y)
    pulled = {v: frozenset(x for x in alpha.carrier if f[x] in z) for v, z in valuation.items()}
    left = pointed_star(construction, alpha_star, pulled)
    right = pointed_star(construction, beta_star, valuation)
    report['steps'].append({
        'step': 'global-variant-matches',
        'k': k,
        'm': m,
        'holds': models_match(left, right, 2 ** k, cap=m)
    })

    report['success'] = all(step['holds'] for step in report['steps'])
    logger.info(f"Counterexample replay finished with {len(report['steps'])} steps")
    return report


def atomic_formulas(variables=('a', 'b')):
    """Inclusions between the variables and every built-in M* modality applied to each"""
    found = [Sub(x, y) for x in variables for y in variables if x != y]
    for name in ('box', 'dia', 'E', 'Ed'):
        found.extend(Lift(name, (Var(x),)) for x in variables)
    return found


def atomic_profile(pointed, variables=('a', 'b')):
    """Truth of every atomic one-step formula in the pointed star model"""
    model = OneStepModel(pointed.star.carrier, pointed.star.alpha, pointed.valuation)
    liftings = builtin_liftings(MONSTAR)
    return {print_one_step(phi): eval_one_step(phi, model, liftings) for phi in atomic_formulas(variables)}
