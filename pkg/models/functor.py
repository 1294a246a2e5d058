"""
Functor descriptions and values of T X over finite carriers
"""

from dataclasses import dataclass
from functools import cached_property

from models.errors import DomainError


def label(x):
    """Deterministic text label for atoms, tuples and sets"""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return 'true' if x else 'false'
    if isinstance(x, int):
        return str(x)
    if isinstance(x, (frozenset, set)):
        return '{' + ','.join(sorted(label(e) for e in x)) + '}'
    if isinstance(x, tuple):
        return '(' + ','.join(label(e) for e in x) + ')'
    if hasattr(x, 'label'):
        return x.label
    return str(x)


def sort_labels(items):
    """Sort arbitrary hashables by their label"""
    return sorted(items, key=label)


@dataclass(frozen=True)
class Const:
    values: frozenset

    def __post_init__(self):
        if not self.values:
            raise DomainError("Constant functor needs a nonempty value set")

    @property
    def name(self):
        return 'const'


@dataclass(frozen=True)
class Id:
    @property
    def name(self):
        return 'id'


@dataclass(frozen=True)
class Product:
    left: object
    right: object

    @property
    def name(self):
        return 'product'


@dataclass(frozen=True)
class Coproduct:
    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise DomainError("Coproduct needs at least one summand")

    @property
    def name(self):
        return 'coproduct'


@dataclass(frozen=True)
class Exp:
    body: object
    exponent: frozenset

    def __post_init__(self):
        if not self.exponent:
            raise DomainError("Exponent set must be finite and nonempty")

    @property
    def name(self):
        return 'exp'


@dataclass(frozen=True)
class Powerset:
    @property
    def name(self):
        return 'powerset'


@dataclass(frozen=True)
class Bag:
    @property
    def name(self):
        return 'bag'


@dataclass(frozen=True)
class MonNbhd:
    @property
    def name(self):
        return 'mon'


@dataclass(frozen=True)
class MonNbhdStar:
    @property
    def name(self):
        return 'monstar'


POWERSET = Powerset()
BAG = Bag()
MON = MonNbhd()
MONSTAR = MonNbhdStar()
IDENTITY = Id()


def minimize_family(sets):
    """Minimal antichain of a family of subsets"""
    sets = set(frozenset(s) for s in sets)
    return frozenset(s for s in sets if not any(t < s for t in sets))


def in_upset(antichain, z):
    """Membership of z in the up-closure of an antichain"""
    return any(m <= z for m in antichain)


def bag_counts(value):
    """Bag value (frozenset of (element, count) pairs) as a dict"""
    return dict(value)


def make_bag(counts):
    """Canonical bag value from a mapping, dropping zero counts"""
    for x, n in counts.items():
        if n < 0:
            raise DomainError(f"Negative multiplicity for {label(x)}")
    return frozenset((x, n) for x, n in counts.items() if n > 0)


@dataclass(frozen=True)
class TObject:
    """A value of T X; `value` is the raw shape for `spec`, `carrier` is X"""
    spec: object
    carrier: frozenset
    value: object

    @cached_property
    def text(self):
        return label(self.value)

    def to_dict(self):
        return {
            'functor': self.spec.name,
            'carrier': sort_labels(self.carrier),
            'value': self.text
        }

    def __repr__(self):
        return f'<TObject {self.spec.name} {self.text}>'

