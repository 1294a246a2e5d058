"""
Abstract syntax of the coalgebraic mu-calculus and of monadic second-order logic
"""

from dataclasses import dataclass
from functools import cached_property


def fresh_name(avoid, prefix='_q'):
    """First `prefix<n>` not in `avoid`"""
    n = 0
    while f'{prefix}{n}' in avoid:
        n += 1
    return f'{prefix}{n}'


class Node:
    """Shared behaviour of formula nodes"""

    children = ()

    @cached_property
    def free_vars(self):
        return frozenset().union(*(c.free_vars for c in self.children))

    @cached_property
    def size(self):
        return 1 + sum(c.size for c in self.children)

    def expand(self):
        return self


# mu-calculus

@dataclass(frozen=True)
class MuVar(Node):
    name: str

    @cached_property
    def free_vars(self):
        return frozenset([self.name])


@dataclass(frozen=True)
class MuNegVar(Node):
    name: str

    @cached_property
    def free_vars(self):
        return frozenset([self.name])


@dataclass(frozen=True)
class MuBot(Node):
    pass


@dataclass(frozen=True)
class MuTop(Node):
    pass


@dataclass(frozen=True)
class MuModal(Node):
    """lambda(phi_1, ..., phi_n)"""
    name: str
    args: tuple

    @property
    def children(self):
        return self.args


@dataclass(frozen=True)
class MuOr(Node):
    left: Node
    right: Node

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class MuAnd(Node):
    left: Node
    right: Node

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class MuFix(Node):
    """Least (`mu`) or greatest (`nu`) fixpoint binding `var`"""
    kind: str
    var: str
    body: Node

    @property
    def children(self):
        return (self.body,)

    @cached_property
    def free_vars(self):
        return self.body.free_vars - {self.var}

    @property
    def is_least(self):
        return self.kind == 'mu'


@dataclass(frozen=True)
class MuGlobal(Node):
    """Global modality: `all` holds if the body holds everywhere, `some` if somewhere"""
    kind: str
    body: Node

    @property
    def children(self):
        return (self.body,)


def fixpoint_violations(formula):
    """Binders whose variable occurs free under a negation in their body"""
    found = []
    for node in mu_subformulas(formula):
        if isinstance(node, MuFix) and node.var in _free_negated(node.body):
            found.append(node)
    return found


def _free_negated(formula):
    if isinstance(formula, MuNegVar):
        return frozenset([formula.name])
    if isinstance(formula, MuFix):
        return _free_negated(formula.body) - {formula.var}
    return frozenset().union(*(_free_negated(c) for c in formula.children))


def mu_subformulas(formula):
    """Pre-order list of subformula occurrences"""
    result = []
    stack = [formula]
    while stack:
        node = stack.pop()
        result.append(node)
        stack.extend(reversed(node.children))
    return result


# Monadic second-order logic

@dataclass(frozen=True)
class MsoBot(Node):
    pass


@dataclass(frozen=True)
class MsoTop(Node):
    def expand(self):
        return MsoNot(MsoBot())


@dataclass(frozen=True)
class Sr(Node):
    """V(var) is exactly the evaluation point"""
    var: str

    @cached_property
    def free_vars(self):
        return frozenset([self.var])


@dataclass(frozen=True)
class Incl(Node):
    left: str
    right: str

    @cached_property
    def free_vars(self):
        return frozenset([self.left, self.right])


@dataclass(frozen=True)
class MsoLift(Node):
    """Every point of V(point) has its structure in lambda(V(args))"""
    name: str
    point: str
    args: tuple

    @cached_property
    def free_vars(self):
        return frozenset((self.point,) + tuple(self.args))


@dataclass(frozen=True)
class NbhdBox(Node):
    """Neighbourhood box of MMSO: each point of V(point) has a neighbourhood inside V(target)"""
    point: str
    target: str

    @cached_property
    def free_vars(self):
        return frozenset([self.point, self.target])

    def expand(self):
        return MsoLift('box', self.point, (self.target,))


@dataclass(frozen=True)
class MsoOr(Node):
    left: Node
    right: Node

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class MsoAnd(Node):
    left: Node
    right: Node

    @property
    def children(self):
        return (self.left, self.right)

    def expand(self):
        return MsoNot(MsoOr(MsoNot(self.left), MsoNot(self.right)))


@dataclass(frozen=True)
class MsoNot(Node):
    body: Node

    @property
    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class MsoExists(Node):
    var: str
    body: Node

    @property
    def children(self):
        return (self.body,)

    @cached_property
    def free_vars(self):
        return self.body.free_vars - {self.var}


@dataclass(frozen=True)
class MsoForall(Node):
    var: str
    body: Node

    @property
    def children(self):
        return (self.body,)

    @cached_property
    def free_vars(self):
        return self.body.free_vars - {self.var}

    def expand(self):
        return MsoNot(MsoExists(self.var, MsoNot(self.body)))


@dataclass(frozen=True)
class MsoEq(Node):
    left: str
    right: str

    @cached_property
    def free_vars(self):
        return frozenset([self.left, self.right])

    def expand(self):
        return MsoAnd(Incl(self.left, self.right), Incl(self.right, self.left))


@dataclass(frozen=True)
class MsoEm(Node):
    """V(var) is empty"""
    var: str

    @cached_property
    def free_vars(self):
        return frozenset([self.var])

    def expand(self):
        q = fresh_name(self.free_vars)
        return MsoForall(q, mso_implies(Incl(q, self.var), MsoEq(q, self.var)))


@dataclass(frozen=True)
class MsoSing(Node):
    """V(var) is a singleton"""
    var: str

    @cached_property
    def free_vars(self):
        return frozenset([self.var])

    def expand(self):
        q = fresh_name(self.free_vars)
        return MsoAnd(
            MsoNot(MsoEm(self.var)),
            MsoForall(q, mso_implies(Incl(q, self.var), MsoOr(MsoEm(q), MsoEq(q, self.var))))
        )


MSO_DERIVED = (MsoTop, MsoAnd, MsoForall, MsoEq, MsoEm, MsoSing, NbhdBox)


def mso_implies(left, right):
    return MsoOr(MsoNot(left), right)


def mso_conjunction(parts):
    parts = list(parts)
    if not parts:
        return MsoTop()
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = MsoAnd(part, result)
    return result
