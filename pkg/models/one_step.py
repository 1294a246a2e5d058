"""
Abstract syntax of the one-step languages ML1 and SO1

ML1 uses Bot, Top, Lift over lattice terms, Or and And.  SO1 adds Sub, Not,
Exists and the Dual wrapper.  Forall, Empty, Disjoint and UnionEq are derived
forms: each has an exact `expand()` into the core grammar and is evaluated
directly.
"""

from dataclasses import dataclass
from functools import cached_property


@dataclass(frozen=True, order=True)
class FreshVar:
    """Bound one-step variable that never clashes with automaton states"""
    index: int

    @property
    def label(self):
        return f'_z{self.index}'


def fresh_vars(avoid, count):
    """`count` fresh variables not occurring in `avoid`"""
    used = [v.index for v in avoid if isinstance(v, FreshVar)]
    start = max(used) + 1 if used else 0
    return [FreshVar(start + i) for i in range(count)]


# Lattice terms

@dataclass(frozen=True)
class Var:
    name: object

    @cached_property
    def free_vars(self):
        return frozenset([self.name])


@dataclass(frozen=True)
class Join:
    left: object
    right: object

    @cached_property
    def free_vars(self):
        return self.left.free_vars | self.right.free_vars


@dataclass(frozen=True)
class Meet:
    left: object
    right: object

    @cached_property
    def free_vars(self):
        return self.left.free_vars | self.right.free_vars


def term_value(term, valuation):
    """Value of a lattice term as a subset"""
    if isinstance(term, Var):
        return valuation[term.name]
    if isinstance(term, Join):
        return term_value(term.left, valuation) | term_value(term.right, valuation)
    return term_value(term.left, valuation) & term_value(term.right, valuation)


def dual_term(term):
    if isinstance(term, Var):
        return term
    if isinstance(term, Join):
        return Meet(dual_term(term.left), dual_term(term.right))
    return Join(dual_term(term.left), dual_term(term.right))


class Formula:
    """Shared behaviour of one-step formula nodes"""

    children = ()

    @cached_property
    def free_vars(self):
        return frozenset().union(*(c.free_vars for c in self.children))

    @cached_property
    def quantifier_depth(self):
        return max((c.quantifier_depth for c in self.children), default=0)

    @cached_property
    def is_ml(self):
        return all(c.is_ml for c in self.children)

    def expand(self):
        return self


@dataclass(frozen=True)
class Bot(Formula):
    is_ml = True


@dataclass(frozen=True)
class Top(Formula):
    is_ml = True


@dataclass(frozen=True)
class Lift(Formula):
    name: str
    args: tuple

    is_ml = True

    @cached_property
    def free_vars(self):
        return frozenset().union(*(t.free_vars for t in self.args))


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Sub(Formula):
    left: object
    right: object

    is_ml = False

    @cached_property
    def free_vars(self):
        return frozenset([self.left, self.right])


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    is_ml = False

    @property
    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Exists(Formula):
    var: object
    body: Formula

    is_ml = False

    @property
    def children(self):
        return (self.body,)

    @cached_property
    def free_vars(self):
        return self.body.free_vars - {self.var}

    @cached_property
    def quantifier_depth(self):
        return self.body.quantifier_depth + 1


@dataclass(frozen=True)
class Forall(Formula):
    var: object
    body: Formula

    is_ml = False

    @property
    def children(self):
        return (self.body,)

    @cached_property
    def free_vars(self):
        return self.body.free_vars - {self.var}

    @cached_property
    def quantifier_depth(self):
        return self.body.quantifier_depth + 1

    def expand(self):
        return Not(Exists(self.var, Not(self.body)))


@dataclass(frozen=True)
class Dual(Formula):
    """Boolean dual: true at V iff the body is false at the complemented valuation"""
    body: Formula

    is_ml = False

    @property
    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Empty(Formula):
    var: object

    is_ml = False

    @cached_property
    def free_vars(self):
        return frozenset([self.var])

    quantifier_depth = 1

    def expand(self):
        (q,) = fresh_vars(self.free_vars, 1)
        return Forall(q, implies(Sub(q, self.var), Sub(self.var, q)))


@dataclass(frozen=True)
class Disjoint(Formula):
    """Values of distinct variables are pairwise disjoint"""
    vars: tuple

    is_ml = False

    @cached_property
    def free_vars(self):
        return frozenset(self.vars)

    @cached_property
    def quantifier_depth(self):
        return 2 if len(self.vars) > 1 else 0

    def expand(self):
        parts = []
        (x,) = fresh_vars(self.free_vars, 1)
        for i, a in enumerate(self.vars):
            for b in self.vars[i + 1:]:
                parts.append(Forall(x, implies(And(Sub(x, a), Sub(x, b)), Empty(x))))
        return conjunction(parts)


@dataclass(frozen=True)
class UnionEq(Formula):
    """`var` equals the union of `parts`"""
    var: object
    parts: tuple

    is_ml = False

    @cached_property
    def free_vars(self):
        return frozenset((self.var,) + tuple(self.parts))

    @cached_property
    def quantifier_depth(self):
        return 1

    def expand(self):
        if not self.parts:
            return Empty(self.var)
        (y,) = fresh_vars(self.free_vars, 1)
        contains = [Sub(p, self.var) for p in self.parts]
        least = Forall(y, implies(conjunction([Sub(p, y) for p in self.parts]), Sub(self.var, y)))
        return conjunction(contains + [least])


def implies(left, right):
    return Or(Not(left), right)


def conjunction(parts):
    """Right-nested conjunction; Top for no parts"""
    parts = list(parts)
    if not parts:
        return Top()
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = And(part, result)
    return result


def disjunction(parts):
    parts = list(parts)
    if not parts:
        return Bot()
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = Or(part, result)
    return result


def exists_block(variables, body):
    for v in reversed(list(variables)):
        body = Exists(v, body)
    return body


def conjuncts(formula):
    """Flatten nested And nodes"""
    if isinstance(formula, And):
        return conjuncts(formula.left) + conjuncts(formula.right)
    return [formula]


def expand_all(formula):
    """Rewrite every derived node into the core SO1 grammar"""
    if isinstance(formula, (Forall, Empty, Disjoint, UnionEq)):
        return expand_all(formula.expand())
    if isinstance(formula, (Or, And)):
        return type(formula)(expand_all(formula.left), expand_all(formula.right))
    if isinstance(formula, (Not, Dual)):
        return type(formula)(expand_all(formula.body))
    if isinstance(formula, Exists):
        return Exists(formula.var, expand_all(formula.body))
    return formula


def rename_free(formula, mapping):
    """Capture-avoiding renaming of free variables (targets never clash with binders)"""
    if not mapping:
        return formula
    if isinstance(formula, (Bot, Top)):
        return formula
    if isinstance(formula, Lift):
        return Lift(formula.name, tuple(_rename_term(t, mapping) for t in formula.args))
    if isinstance(formula, Sub):
        return Sub(mapping.get(formula.left, formula.left), mapping.get(formula.right, formula.right))
    if isinstance(formula, (Or, And)):
        return type(formula)(rename_free(formula.left, mapping), rename_free(formula.right, mapping))
    if isinstance(formula, (Not, Dual)):
        return type(formula)(rename_free(formula.body, mapping))
    if isinstance(formula, (Exists, Forall)):
        inner = {k: v for k, v in mapping.items() if k != formula.var}
        return type(formula)(formula.var, rename_free(formula.body, inner))
    if isinstance(formula, Empty):
        return Empty(mapping.get(formula.var, formula.var))
    if isinstance(formula, Disjoint):
        return Disjoint(tuple(mapping.get(v, v) for v in formula.vars))
    if isinstance(formula, UnionEq):
        return UnionEq(mapping.get(formula.var, formula.var),
                       tuple(mapping.get(v, v) for v in formula.parts))
    raise TypeError(f"Unknown one-step node {type(formula).__name__}")


def _rename_term(term, mapping):
    if isinstance(term, Var):
        return Var(mapping.get(term.name, term.name))
    return type(term)(_rename_term(term.left, mapping), _rename_term(term.right, mapping))


def all_vars(formula):
    """Free and bound variables"""
    found = set(formula.free_vars)
    stack = [formula]
    while stack:
        node = stack.pop()
        if isinstance(node, (Exists, Forall)):
            found.add(node.var)
        stack.extend(getattr(node, 'children', ()))
    return found


def is_syntactically_monotone(formula, bound=frozenset()):
    """Every free occurrence is positive; bound variables are unrestricted"""
    return _mono(formula, True, frozenset(bound))


def _mono(node, positive, bound):
    if isinstance(node, (Bot, Top)):
        return True
    if isinstance(node, Lift):
        free = node.free_vars - bound
        return positive or not free
    if isinstance(node, Sub):
        left_free = node.left not in bound
        right_free = node.right not in bound
        if positive:
            return not left_free
        return not right_free
    if isinstance(node, (Or, And)):
        return _mono(node.left, positive, bound) and _mono(node.right, positive, bound)
    if isinstance(node, Not):
        return _mono(node.body, not positive, bound)
    if isinstance(node, Dual):
        return _mono(node.body, positive, bound)
    if isinstance(node, (Exists, Forall)):
        return _mono(node.body, positive, bound | {node.var})
    if isinstance(node, Empty):
        return not positive or node.var in bound
    if isinstance(node, Disjoint):
        return not positive or all(v in bound for v in node.vars)
    if isinstance(node, UnionEq):
        return all(v in bound for v in node.free_vars)
    return False

