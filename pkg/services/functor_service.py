"""
Functorial action, supports and enumeration of T X values
"""

import logging
from itertools import chain, combinations, product

from config.settings import current_caps
from models.errors import CapExceeded, DomainError
from models.functor import (
    Bag, Const, Coproduct, Exp, Id, MonNbhd, MonNbhdStar, Powerset, Product, TObject,
    bag_counts, label, make_bag, minimize_family, sort_labels
)

logger = logging.getLogger(__name__)

MAX_COUNT = 2 ** 63 - 1


def subsets(items):
    """All subsets of `items` by increasing size, in label order"""
    items = sort_labels(items)
    return [frozenset(c) for c in chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))]


def check_value(spec, carrier, value):
    """Raise DomainError unless `value` is a well-formed raw value of spec over carrier"""
    if isinstance(spec, Const):
        if value not in spec.values:
            raise DomainError(f"{label(value)} is not a constant of {label(spec.values)}")
    elif isinstance(spec, Id):
        if value not in carrier:
            raise DomainError(f"{label(value)} is not in the carrier")
    elif isinstance(spec, Product):
        if not isinstance(value, tuple) or len(value) != 2:
            raise DomainError("Product value must be a pair")
        check_value(spec.left, carrier, value[0])
        check_value(spec.right, carrier, value[1])
    elif isinstance(spec, Coproduct):
        index, inner = value
        if not 0 <= index < len(spec.parts):
            raise DomainError(f"Coproduct index {index} out of range")
        check_value(spec.parts[index], carrier, inner)
    elif isinstance(spec, Exp):
        mapping = dict(value)
        if set(mapping) != set(spec.exponent):
            raise DomainError("Exponential value must be total on the exponent")
        for inner in mapping.values():
            check_value(spec.body, carrier, inner)
    elif isinstance(spec, Powerset):
        if not frozenset(value) <= carrier:
            raise DomainError("Subset leaves the carrier")
    elif isinstance(spec, Bag):
        counts = bag_counts(value)
        if not set(counts) <= carrier:
            raise DomainError("Bag support leaves the carrier")
        if any(n <= 0 or n > MAX_COUNT for n in counts.values()):
            raise DomainError("Bag counts must be positive machine integers")
    elif isinstance(spec, MonNbhd):
        _check_antichain(value, carrier)
    elif isinstance(spec, MonNbhdStar):
        antichain, support = value
        _check_antichain(antichain, carrier)
        if not support <= carrier:
            raise DomainError("Support component leaves the carrier")
        if any(not m <= support for m in antichain):
            raise DomainError("Support component does not support the neighbourhood family")
    else:
        raise DomainError(f"Unknown functor {spec!r}")


def _check_antichain(antichain, carrier):
    if minimize_family(antichain) != antichain:
        raise DomainError("Neighbourhood family must be stored as its minimal antichain")
    if any(not m <= carrier for m in antichain):
        raise DomainError("Neighbourhood leaves the carrier")


def make_tobject(spec, carrier, value):
    carrier = frozenset(carrier)
    check_value(spec, carrier, value)
    return TObject(spec, carrier, value)


def map_value(spec, f, value):
    """Raw value of T f"""
    if isinstance(spec, Const):
        return value
    if isinstance(spec, Id):
        return f[value]
    if isinstance(spec, Product):
        return (map_value(spec.left, f, value[0]), map_value(spec.right, f, value[1]))
    if isinstance(spec, Coproduct):
        index, inner = value
        return (index, map_value(spec.parts[index], f, inner))
    if isinstance(spec, Exp):
        return frozenset((c, map_value(spec.body, f, v)) for c, v in value)
    if isinstance(spec, Powerset):
        return frozenset(f[x] for x in value)
    if isinstance(spec, Bag):
        counts = {}
        for x, n in value:
            counts[f[x]] = counts.get(f[x], 0) + n
            if counts[f[x]] > MAX_COUNT:
                raise DomainError("Bag count overflow")
        return make_bag(counts)
    if isinstance(spec, MonNbhd):
        return minimize_family(frozenset(f[x] for x in m) for m in value)
    if isinstance(spec, MonNbhdStar):
        antichain, support = value
        return (minimize_family(frozenset(f[x] for x in m) for m in antichain),
                frozenset(f[x] for x in support))
    raise DomainError(f"Unknown functor {spec!r}")


def apply_map(spec, f, t, codomain=None):
    """T f applied to t; `f` is a dict total on t's carrier"""
    if spec != t.spec:
        raise DomainError(f"Value has functor {t.spec.name}, expected {spec.name}")
    if set(f) != set(t.carrier):
        raise DomainError("Map domain does not match the carrier of the value")
    codomain = frozenset(f.values()) if codomain is None else frozenset(codomain)
    if not set(f.values()) <= codomain:
        raise DomainError("Map leaves its codomain")
    return TObject(spec, codomain, map_value(spec, f, t.value))


def supports(spec, value, subset):
    """Whether the raw value lives over `subset`"""
    if isinstance(spec, Const):
        return True
    if isinstance(spec, Id):
        return value in subset
    if isinstance(spec, Product):
        return supports(spec.left, value[0], subset) and supports(spec.right, value[1], subset)
    if isinstance(spec, Coproduct):
        return supports(spec.parts[value[0]], value[1], subset)
    if isinstance(spec, Exp):
        return all(supports(spec.body, v, subset) for _, v in value)
    if isinstance(spec, Powerset):
        return value <= subset
    if isinstance(spec, Bag):
        return all(x in subset for x, _ in value)
    if isinstance(spec, MonNbhd):
        # W in N iff W & subset in N, checked on the minimal antichain
        return all(m <= subset for m in value)
    if isinstance(spec, MonNbhdStar):
        return value[1] <= subset
    raise DomainError(f"Unknown functor {spec!r}")


def restrict_to_support(t, subset):
    """The unique value over `subset` whose inclusion image is t"""
    subset = frozenset(subset)
    if not subset <= t.carrier:
        raise DomainError("Restriction target is not a subset of the carrier")
    if not supports(t.spec, t.value, subset):
        raise DomainError(f"{label(subset)} is not a support of {t.text}")
    return TObject(t.spec, subset, t.value)


def minimal_supports(t, caps=None):
    """All inclusion-minimal supports, by brute force over subsets"""
    caps = caps or current_caps()
    if len(t.carrier) > caps.support:
        raise CapExceeded(f"Support search over {len(t.carrier)} points exceeds cap {caps.support}")
    found = []
    for candidate in subsets(t.carrier):
        if any(s <= candidate for s in found):
            continue
        if supports(t.spec, t.value, candidate):
            found.append(candidate)
    return found


def antichains(items):
    """All antichains of subsets of `items` (minimal antichains of upsets)"""
    sets = subsets(items)
    result = []

    def extend(start, chosen):
        result.append(frozenset(chosen))
        for i in range(start, len(sets)):
            s = sets[i]
            if any(c <= s or s <= c for c in chosen):
                continue
            extend(i + 1, chosen + [s])

    extend(0, [])
    return result


def enumerate_values(spec, carrier, count_bound=2):
    """Every raw value of T carrier (bag counts up to `count_bound`)"""
    carrier = frozenset(carrier)
    if isinstance(spec, Const):
        return sort_labels(spec.values)
    if isinstance(spec, Id):
        return sort_labels(carrier)
    if isinstance(spec, Product):
        return [(a, b) for a in enumerate_values(spec.left, carrier, count_bound)
                for b in enumerate_values(spec.right, carrier, count_bound)]
    if isinstance(spec, Coproduct):
        return [(i, v) for i, part in enumerate(spec.parts)
                for v in enumerate_values(part, carrier, count_bound)]
    if isinstance(spec, Exp):
        keys = sort_labels(spec.exponent)
        inner = enumerate_values(spec.body, carrier, count_bound)
        return [frozenset(zip(keys, choice)) for choice in product(inner, repeat=len(keys))]
    if isinstance(spec, Powerset):
        return subsets(carrier)
    if isinstance(spec, Bag):
        points = sort_labels(carrier)
        return [make_bag(dict(zip(points, counts)))
                for counts in product(range(count_bound + 1), repeat=len(points))]
    if isinstance(spec, MonNbhd):
        return antichains(carrier)
    if isinstance(spec, MonNbhdStar):
        return [(a, s) for s in subsets(carrier) for a in antichains(s)]
    raise DomainError(f"Unknown functor {spec!r}")


def enumerate_tobjects(spec, carrier, count_bound=2):
    carrier = frozenset(carrier)
    return [TObject(spec, carrier, v) for v in enumerate_values(spec, carrier, count_bound)]


def random_value(spec, carrier, rng, count_bound=2):
    points = sort_labels(carrier)
    if isinstance(spec, Const):
        values = sort_labels(spec.values)
        return values[rng.integers(len(values))]
    if isinstance(spec, Id):
        if not points:
            raise DomainError("Identity functor has no values over the empty carrier")
        return points[rng.integers(len(points))]
    if isinstance(spec, Product):
        return (random_value(spec.left, carrier, rng, count_bound),
                random_value(spec.right, carrier, rng, count_bound))
    if isinstance(spec, Coproduct):
        index = int(rng.integers(len(spec.parts)))
        return (index, random_value(spec.parts[index], carrier, rng, count_bound))
    if isinstance(spec, Exp):
        return frozenset((c, random_value(spec.body, carrier, rng, count_bound))
                         for c in sort_labels(spec.exponent))
    if isinstance(spec, Powerset):
        return _random_subset(points, rng)
    if isinstance(spec, Bag):
        return make_bag({x: int(rng.integers(count_bound + 1)) for x in points})
    if isinstance(spec, MonNbhd):
        return _random_antichain(points, rng)
    if isinstance(spec, MonNbhdStar):
        support = _random_subset(points, rng)
        return (_random_antichain(sort_labels(support), rng), support)
    raise DomainError(f"Unknown functor {spec!r}")


def _random_subset(points, rng):
    return frozenset(x for x in points if rng.random() < 0.5)


def _random_antichain(points, rng):
    count = int(rng.integers(0, 3))
    return minimize_family(_random_subset(points, rng) for _ in range(count))


def random_tobject(spec, carrier, rng, count_bound=2):
    carrier = frozenset(carrier)
    return TObject(spec, carrier, random_value(spec, carrier, rng, count_bound))


def random_map(domain, codomain, rng):
    targets = sort_labels(codomain)
    return {x: targets[rng.integers(len(targets))] for x in sort_labels(domain)}


def inclusion(subset):
    return {x: x for x in subset}


def characteristic_map(carrier, args):
    """x -> tuple of memberships in each argument, the map into 2^n"""
    return {x: tuple(x in z for z in args) for x in carrier}


def boolean_cube(n):
    return frozenset(product((False, True), repeat=n))
