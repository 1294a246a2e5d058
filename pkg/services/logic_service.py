"""
Direct semantics of mu-calculus and MSO formulas on finite T-models,
the translation of mu-calculus into MSO, and syntactic normal forms
"""

import logging
from itertools import count

from config.settings import current_caps
from models import logic as L
from models.errors import CapExceeded, DomainError
from models.functor import label
from models.lifting import dual_name
from services.functor_service import subsets
from services.lifting_service import builtin_liftings

logger = logging.getLogger(__name__)


def _liftings_for(model, liftings):
    return liftings if liftings is not None else builtin_liftings(model.spec)


# Mu-calculus

def eval_mu(formula, model, point, liftings=None):
    """Truth of a mu-calculus formula at a point"""
    if point not in model.carrier:
        raise DomainError(f"{label(point)} is not a state of the model")
    return point in mu_truth_set(formula, model, liftings)


def mu_truth_set(formula, model, liftings=None, env=None):
    """Set of states satisfying the formula, by Knaster-Tarski iteration"""
    bad = L.fixpoint_violations(formula)
    if bad:
        raise DomainError(f"Fixpoint variable {bad[0].var} occurs under a negation")
    return _truth(formula, model, _liftings_for(model, liftings), dict(env or {}))


def _value_of(name, model, env):
    if name in env:
        return env[name]
    return model.valuation.get(name, frozenset())


def _truth(node, model, liftings, env):
    carrier = model.carrier
    if isinstance(node, L.MuVar):
        return _value_of(node.name, model, env)
    if isinstance(node, L.MuNegVar):
        return carrier - _value_of(node.name, model, env)
    if isinstance(node, L.MuBot):
        return frozenset()
    if isinstance(node, L.MuTop):
        return carrier
    if isinstance(node, L.MuOr):
        return _truth(node.left, model, liftings, env) | _truth(node.right, model, liftings, env)
    if isinstance(node, L.MuAnd):
        return _truth(node.left, model, liftings, env) & _truth(node.right, model, liftings, env)
    if isinstance(node, L.MuModal):
        lifting = liftings.resolve(node.name)
        args = [_truth(a, model, liftings, env) for a in node.args]
        return frozenset(s for s in carrier if lifting.member(model.sigma[s], args))
    if isinstance(node, L.MuGlobal):
        inner = _truth(node.body, model, liftings, env)
        if node.kind == 'all':
            return carrier if inner == carrier else frozenset()
        return carrier if inner else frozenset()
    if isinstance(node, L.MuFix):
        current = frozenset() if node.is_least else carrier
        for _ in range(len(carrier) + 2):
            updated = _truth(node.body, model, liftings, {**env, node.var: current})
            if updated == current:
                return current
            current = updated
        raise DomainError(f"Fixpoint iteration for {node.var} did not stabilise; the body is not monotone")
    raise DomainError(f"Unknown mu-calculus node {type(node).__name__}")


def mu_negation(formula, liftings=None, bound=frozenset()):
    """Negation normal form of not-formula, dualising liftings and fixpoints"""
    if isinstance(formula, L.MuVar):
        return formula if formula.name in bound else L.MuNegVar(formula.name)
    if isinstance(formula, L.MuNegVar):
        return L.MuVar(formula.name)
    if isinstance(formula, L.MuBot):
        return L.MuTop()
    if isinstance(formula, L.MuTop):
        return L.MuBot()
    if isinstance(formula, L.MuOr):
        return L.MuAnd(mu_negation(formula.left, liftings, bound), mu_negation(formula.right, liftings, bound))
    if isinstance(formula, L.MuAnd):
        return L.MuOr(mu_negation(formula.left, liftings, bound), mu_negation(formula.right, liftings, bound))
    if isinstance(formula, L.MuModal):
        name = liftings.dual_of(formula.name) if liftings is not None else dual_name(formula.name)
        return L.MuModal(name, tuple(mu_negation(a, liftings, bound) for a in formula.args))
    if isinstance(formula, L.MuGlobal):
        kind = 'some' if formula.kind == 'all' else 'all'
        return L.MuGlobal(kind, mu_negation(formula.body, liftings, bound))
    if isinstance(formula, L.MuFix):
        kind = 'nu' if formula.is_least else 'mu'
        return L.MuFix(kind, formula.var, mu_negation(formula.body, liftings, bound | {formula.var}))
    raise DomainError(f"Unknown mu-calculus node {type(formula).__name__}")


def substitute_mu(formula, var, replacement):
    """Replace free occurrences of `var` (binders are assumed distinct from replacement's free variables)"""
    if isinstance(formula, L.MuVar):
        return replacement if formula.name == var else formula
    if isinstance(formula, (L.MuNegVar, L.MuBot, L.MuTop)):
        return formula
    if isinstance(formula, L.MuOr):
        return L.MuOr(substitute_mu(formula.left, var, replacement), substitute_mu(formula.right, var, replacement))
    if isinstance(formula, L.MuAnd):
        return L.MuAnd(substitute_mu(formula.left, var, replacement), substitute_mu(formula.right, var, replacement))
    if isinstance(formula, L.MuModal):
        return L.MuModal(formula.name, tuple(substitute_mu(a, var, replacement) for a in formula.args))
    if isinstance(formula, L.MuGlobal):
        return L.MuGlobal(formula.kind, substitute_mu(formula.body, var, replacement))
    if isinstance(formula, L.MuFix):
        if formula.var == var:
            return formula
        return L.MuFix(formula.kind, formula.var, substitute_mu(formula.body, var, replacement))
    raise DomainError(f"Unknown mu-calculus node {type(formula).__name__}")


def rename_bound(formula):
    """Give every binder a distinct name not free in the formula"""
    used = set(formula.free_vars)
    for node in L.mu_subformulas(formula):
        if isinstance(node, (L.MuVar, L.MuNegVar)):
            used.add(node.name)

    def walk(node, mapping):
        if isinstance(node, L.MuVar):
            return L.MuVar(mapping.get(node.name, node.name))
        if isinstance(node, L.MuNegVar):
            return L.MuNegVar(mapping.get(node.name, node.name))
        if isinstance(node, (L.MuBot, L.MuTop)):
            return node
        if isinstance(node, (L.MuOr, L.MuAnd)):
            return type(node)(walk(node.left, mapping), walk(node.right, mapping))
        if isinstance(node, L.MuModal):
            return L.MuModal(node.name, tuple(walk(a, mapping) for a in node.args))
        if isinstance(node, L.MuGlobal):
            return L.MuGlobal(node.kind, walk(node.body, mapping))
        fresh = node.var if node.var not in taken else L.fresh_name(used | taken, node.var + '_')
        taken.add(fresh)
        return L.MuFix(node.kind, fresh, walk(node.body, {**mapping, node.var: fresh}))

    taken = set(formula.free_vars)
    return walk(formula, {})


def unguarded_vars(formula):
    """Variables with an occurrence not below a modal operator"""
    if isinstance(formula, (L.MuVar, L.MuNegVar)):
        return frozenset([formula.name])
    if isinstance(formula, L.MuModal):
        return frozenset()
    if isinstance(formula, L.MuFix):
        return unguarded_vars(formula.body) - {formula.var}
    return frozenset().union(*(unguarded_vars(c) for c in formula.children))


def guarded_form(formula):
    """Equivalent formula in which every bound variable is guarded in its binder"""
    if any(isinstance(n, L.MuGlobal) for n in L.mu_subformulas(formula)):
        raise DomainError("Global modalities must be translated before building automata")
    return rename_bound(_guard(rename_bound(formula)))


def _guard(node):
    if isinstance(node, (L.MuVar, L.MuNegVar, L.MuBot, L.MuTop)):
        return node
    if isinstance(node, (L.MuOr, L.MuAnd)):
        return type(node)(_guard(node.left), _guard(node.right))
    if isinstance(node, L.MuModal):
        return L.MuModal(node.name, tuple(_guard(a) for a in node.args))
    body = _unfold_unguarded(_guard(node.body), node.var)
    constant = L.MuBot() if node.is_least else L.MuTop()
    return L.MuFix(node.kind, node.var, _replace_unguarded(body, node.var, constant))


def _unfold_unguarded(node, var):
    """Unfold inner fixpoints that contain an unguarded occurrence of `var`"""
    if isinstance(node, (L.MuVar, L.MuNegVar, L.MuBot, L.MuTop, L.MuModal)):
        return node
    if isinstance(node, (L.MuOr, L.MuAnd)):
        return type(node)(_unfold_unguarded(node.left, var), _unfold_unguarded(node.right, var))
    if var in unguarded_vars(node):
        return _unfold_unguarded(substitute_mu(node.body, node.var, node), var)
    return node


def _replace_unguarded(node, var, constant):
    if isinstance(node, L.MuVar):
        return constant if node.name == var else node
    if isinstance(node, (L.MuNegVar, L.MuBot, L.MuTop, L.MuModal, L.MuFix)):
        return node
    return type(node)(_replace_unguarded(node.left, var, constant), _replace_unguarded(node.right, var, constant))


def binders(formula):
    """Bound variable -> its fixpoint subformula (binders must be distinct)"""
    found = {}
    for node in L.mu_subformulas(formula):
        if isinstance(node, L.MuFix):
            if node.var in found and found[node.var] != node:
                raise DomainError(f"Variable {node.var} is bound twice")
            found[node.var] = node
    return found


# Monadic second-order logic

def eval_mso(formula, model, point, liftings=None, caps=None):
    """Truth of an MSO formula at a point, enumerating every subset per quantifier"""
    caps = caps or current_caps()
    if point not in model.carrier:
        raise DomainError(f"{label(point)} is not a state of the model")
    missing = formula.free_vars - set(model.valuation)
    if missing:
        raise DomainError(f"Unbound second-order variables: {sorted(missing)}")
    quantified = any(isinstance(n, (L.MsoExists, L.MsoForall))
                     for n in L.mu_subformulas(formula))
    if quantified and len(model.carrier) > caps.quantifier:
        raise CapExceeded(f"Quantifying over {len(model.carrier)} states exceeds cap {caps.quantifier}")
    evaluator = MsoEvaluator(model, point, _liftings_for(model, liftings))
    return evaluator.holds(formula, dict(model.valuation))


class MsoEvaluator:
    """Direct MSO semantics; subclasses may refine single clauses"""

    def __init__(self, model, point, liftings):
        self.model = model
        self.point = point
        self.liftings = liftings
        self.all = subsets(model.carrier)

    def holds(self, node, v):
        if isinstance(node, L.MsoBot):
            return False
        if isinstance(node, L.MsoTop):
            return True
        if isinstance(node, L.Sr):
            return v[node.var] == frozenset([self.point])
        if isinstance(node, L.Incl):
            return v[node.left] <= v[node.right]
        if isinstance(node, L.MsoEq):
            return v[node.left] == v[node.right]
        if isinstance(node, L.MsoEm):
            return not v[node.var]
        if isinstance(node, L.MsoSing):
            return len(v[node.var]) == 1
        if isinstance(node, L.MsoLift):
            lifting = self.liftings.resolve(node.name)
            args = [v[q] for q in node.args]
            return all(lifting.member(self.model.sigma[s], args) for s in v[node.point])
        if isinstance(node, L.NbhdBox):
            lifting = self.liftings.resolve('box')
            return all(lifting.member(self.model.sigma[s], [v[node.target]]) for s in v[node.point])
        if isinstance(node, L.MsoOr):
            return self.holds(node.left, v) or self.holds(node.right, v)
        if isinstance(node, L.MsoAnd):
            return self.holds(node.left, v) and self.holds(node.right, v)
        if isinstance(node, L.MsoNot):
            return not self.holds(node.body, v)
        if isinstance(node, L.MsoExists):
            return any(self.holds(node.body, {**v, node.var: z}) for z in self.all)
        if isinstance(node, L.MsoForall):
            return all(self.holds(node.body, {**v, node.var: z}) for z in self.all)
        raise DomainError(f"Unknown MSO node {type(node).__name__}")


def expand_mso(formula):
    """Rewrite derived MSO nodes into bot, sr, sub, lift, or, not and exists"""
    if isinstance(formula, L.MSO_DERIVED):
        return expand_mso(formula.expand())
    if isinstance(formula, L.MsoOr):
        return L.MsoOr(expand_mso(formula.left), expand_mso(formula.right))
    if isinstance(formula, L.MsoNot):
        return L.MsoNot(expand_mso(formula.body))
    if isinstance(formula, L.MsoExists):
        return L.MsoExists(formula.var, expand_mso(formula.body))
    return formula


def mu_to_mso(formula):
    """Equivalent MSO formula: there is a root singleton x with tr(formula, x)"""
    avoid = set(formula.free_vars)
    for node in L.mu_subformulas(formula):
        if isinstance(node, (L.MuVar, L.MuNegVar)):
            avoid.add(node.name)
        elif isinstance(node, L.MuFix):
            avoid.add(node.var)
    counter = count()

    def fresh(prefix):
        while True:
            name = f'{prefix}{next(counter)}'
            if name not in avoid:
                avoid.add(name)
                return name

    def for_all_points(y, body):
        return L.MsoForall(y, L.mso_implies(L.MsoSing(y), body))

    def tr(node, x, env):
        if isinstance(node, L.MuVar):
            return L.Incl(x, env.get(node.name, node.name))
        if isinstance(node, L.MuNegVar):
            return L.MsoNot(L.Incl(x, env.get(node.name, node.name)))
        if isinstance(node, L.MuBot):
            return L.MsoBot()
        if isinstance(node, L.MuTop):
            return L.MsoTop()
        if isinstance(node, L.MuOr):
            return L.MsoOr(tr(node.left, x, env), tr(node.right, x, env))
        if isinstance(node, L.MuAnd):
            return L.MsoAnd(tr(node.left, x, env), tr(node.right, x, env))
        if isinstance(node, L.MuModal):
            witnesses = [fresh('_q') for _ in node.args]
            parts = []
            for q, arg in zip(witnesses, node.args):
                y = fresh('_y')
                parts.append(for_all_points(y, L.mso_implies(L.Incl(y, q), tr(arg, y, env))))
            parts.append(L.MsoLift(node.name, x, tuple(witnesses)))
            body = L.mso_conjunction(parts)
            for q in reversed(witnesses):
                body = L.MsoExists(q, body)
            return body
        if isinstance(node, L.MuGlobal):
            y = fresh('_y')
            if node.kind == 'all':
                return for_all_points(y, tr(node.body, y, env))
            return L.MsoExists(y, L.MsoAnd(L.MsoSing(y), tr(node.body, y, env)))
        if isinstance(node, L.MuFix):
            p = fresh('_p')
            inner = {**env, node.var: p}
            y = fresh('_y')
            if node.is_least:
                closed = for_all_points(y, L.mso_implies(tr(node.body, y, inner), L.Incl(y, p)))
                return L.MsoForall(p, L.mso_implies(closed, L.Incl(x, p)))
            dense = for_all_points(y, L.mso_implies(L.Incl(y, p), tr(node.body, y, inner)))
            return L.MsoExists(p, L.MsoAnd(L.Incl(x, p), dense))
        raise DomainError(f"Unknown mu-calculus node {type(node).__name__}")

    x = fresh('_x')
    return L.MsoExists(x, L.MsoAnd(L.Sr(x), tr(formula, x, {})))
