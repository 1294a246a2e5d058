"""
Built-in predicate liftings, Yoneda tables and lifting property checks
"""

import logging
import re
from itertools import product

import numpy as np

from models.errors import DomainError
from models.functor import (
    Bag, Const, Coproduct, Exp, Id, MonNbhd, MonNbhdStar, Powerset, Product, TObject,
    in_upset, label, sort_labels
)
from models.lifting import Lifting, LiftingSet
from services.functor_service import (
    apply_map, boolean_cube, characteristic_map, enumerate_tobjects, map_value,
    random_map, random_tobject, subsets
)

logger = logging.getLogger(__name__)

GRADED = re.compile(r'^ge(\d+)$')


def _powerset_box(alpha, args):
    return alpha.value <= args[0]


def _powerset_dia(alpha, args):
    return bool(alpha.value & args[0])


def _mon_box(alpha, args):
    return in_upset(alpha.value, args[0])


def _mon_dia(alpha, args):
    return not in_upset(alpha.value, alpha.carrier - args[0])


def _monstar_box(alpha, args):
    return in_upset(alpha.value[0], args[0])


def _monstar_dia(alpha, args):
    return not in_upset(alpha.value[0], alpha.carrier - args[0])


def _monstar_exists(alpha, args):
    return bool(args[0] & alpha.value[1])


def _monstar_exists_dual(alpha, args):
    return alpha.value[1] <= args[0]


def _graded(threshold):
    def evaluate(alpha, args):
        return sum(n for x, n in alpha.value if x in args[0]) >= threshold
    return evaluate


def builtin_liftings(spec):
    """Fresh LiftingSet of the built-in liftings for `spec`"""
    liftings = LiftingSet(spec)
    if isinstance(spec, Powerset):
        liftings.register(Lifting('box', 1, spec, _powerset_box), dual_of='dia')
        liftings.register(Lifting('dia', 1, spec, _powerset_dia), dual_of='box')
    elif isinstance(spec, MonNbhd):
        liftings.register(Lifting('box', 1, spec, _mon_box), dual_of='dia')
        liftings.register(Lifting('dia', 1, spec, _mon_dia), dual_of='box')
    elif isinstance(spec, MonNbhdStar):
        liftings.register(Lifting('box', 1, spec, _monstar_box), dual_of='dia')
        liftings.register(Lifting('dia', 1, spec, _monstar_dia), dual_of='box')
        liftings.register(Lifting('E', 1, spec, _monstar_exists), dual_of='Ed')
        liftings.register(Lifting('Ed', 1, spec, _monstar_exists_dual), dual_of='E')
    elif isinstance(spec, Bag):
        liftings.factory = lambda name: _graded_lifting(spec, name)
    else:
        liftings.factory = lambda name: _composite_lifting(spec, name)
    return liftings


def _graded_lifting(spec, name):
    match = GRADED.match(name)
    if not match or int(match.group(1)) < 1:
        return None
    return Lifting(name, 1, spec, _graded(int(match.group(1))))


def _composite_lifting(spec, name):
    """Liftings of polynomial functors: `next`, `is_c`, and `component.inner` for parts"""
    if isinstance(spec, Id):
        if name == 'next':
            return Lifting(name, 1, spec, lambda alpha, args: alpha.value in args[0])
        return None
    if isinstance(spec, Const):
        if name.startswith('is_'):
            wanted = name[3:]
            return Lifting(name, 0, spec, lambda alpha, args: label(alpha.value) == wanted)
        return None
    if '.' not in name:
        return None
    head, inner = name.split('.', 1)

    if isinstance(spec, Product):
        if head not in ('l', 'r'):
            return None
        part_spec = spec.left if head == 'l' else spec.right
    elif isinstance(spec, Coproduct):
        if not re.match(r'^i\d+$', head) or int(head[1:]) >= len(spec.parts):
            return None
        part_spec = spec.parts[int(head[1:])]
    elif isinstance(spec, Exp):
        if head not in {label(c) for c in spec.exponent}:
            return None
        part_spec = spec.body
    else:
        return None

    inner_lifting = builtin_liftings(part_spec).resolve(inner)

    def part(alpha):
        if isinstance(spec, Product):
            return TObject(part_spec, alpha.carrier, alpha.value[0 if head == 'l' else 1])
        if isinstance(spec, Coproduct):
            if alpha.value[0] != int(head[1:]):
                return None
            return TObject(part_spec, alpha.carrier, alpha.value[1])
        values = {label(c): v for c, v in alpha.value}
        return TObject(part_spec, alpha.carrier, values[head])

    def evaluate(alpha, args):
        component = part(alpha)
        if component is None:
            return False
        return inner_lifting.member(component, args)

    return Lifting(name, inner_lifting.arity, spec, evaluate)


def has_finite_values(spec):
    if isinstance(spec, Bag):
        return False
    if isinstance(spec, Product):
        return has_finite_values(spec.left) and has_finite_values(spec.right)
    if isinstance(spec, Coproduct):
        return all(has_finite_values(p) for p in spec.parts)
    if isinstance(spec, Exp):
        return has_finite_values(spec.body)
    return True


def yoneda_lifting(spec, n, table, name='yoneda'):
    """Natural lifting with lambda_X(Z) = (T chi_Z)^-1[table], where table is a set of raw values over 2^n"""
    if not has_finite_values(spec):
        raise DomainError(f"T(2^{n}) is infinite for functor {spec.name}")
    table = frozenset(table)

    def evaluate(alpha, args):
        chi = characteristic_map(alpha.carrier, args)
        return map_value(spec, chi, alpha.value) in table

    lifting = Lifting(name, n, spec, evaluate, table=table)
    report = check_monotone(lifting, carrier_cap=min(3, 2 ** n + 1))
    if not report['monotone']:
        logger.warning(f"Yoneda lifting {name} is not monotone")
    return lifting


def yoneda_table(lifting, count_bound=2):
    """The table of a lifting over 2^n, read off from its values at the generic arguments"""
    cube = boolean_cube(lifting.arity)
    generic = tuple(frozenset(v for v in cube if v[i]) for i in range(lifting.arity))
    return frozenset(t.value for t in enumerate_tobjects(lifting.spec, cube, count_bound)
                     if lifting.member(t, generic))


def _points(n):
    return frozenset(f'x{i}' for i in range(n))


def check_monotone(lifting, carrier_cap=3, count_bound=2):
    """Brute-force monotonicity report over carriers up to `carrier_cap` points"""
    checked = 0
    for size in range(carrier_cap + 1):
        carrier = _points(size)
        for alpha in enumerate_tobjects(lifting.spec, carrier, count_bound):
            for args in product(subsets(carrier), repeat=lifting.arity):
                if not lifting.member(alpha, args):
                    continue
                for i, arg in enumerate(args):
                    for x in sort_labels(carrier - arg):
                        larger = args[:i] + (arg | {x},) + args[i + 1:]
                        checked += 1
                        if not lifting.member(alpha, larger):
                            return {
                                'monotone': False,
                                'checked': checked,
                                'witness': {
                                    'alpha': alpha.text,
                                    'args': [label(a) for a in args],
                                    'enlarged': label(larger[i]),
                                    'position': i
                                }
                            }
    return {'monotone': True, 'checked': checked, 'witness': None}


def check_naturality(lifting, sample_budget=30, seed=42, squares=None, max_size=4, count_bound=2):
    """Search for a square alpha in lambda_X(f^-1 V) <-/-> T f(alpha) in lambda_Y(V)"""
    def violated(alpha, f, codomain, args):
        pulled = tuple(frozenset(x for x in alpha.carrier if f[x] in a) for a in args)
        image = apply_map(lifting.spec, f, alpha, codomain)
        left = lifting.member(alpha, pulled)
        right = lifting.member(image, args)
        if left == right:
            return None
        return {
            'alpha': alpha.text,
            'map': {label(k): label(v) for k, v in sorted(f.items(), key=lambda kv: label(kv[0]))},
            'args': [label(a) for a in args],
            'source_member': left,
            'image_member': right
        }

    checked = 0
    for alpha, f, codomain, args in squares or ():
        checked += 1
        found = violated(alpha, f, frozenset(codomain), tuple(frozenset(a) for a in args))
        if found:
            return {'natural': False, 'checked': checked, 'violation': found}

    rng = np.random.default_rng(seed)
    for _ in range(sample_budget):
        domain = _points(int(rng.integers(1, max_size + 1)))
        codomain = frozenset(f'y{i}' for i in range(int(rng.integers(1, max_size + 1))))
        f = random_map(domain, codomain, rng)
        alpha = random_tobject(lifting.spec, domain, rng, count_bound)
        args = tuple(frozenset(y for y in sort_labels(codomain) if rng.random() < 0.5)
                     for _ in range(lifting.arity))
        checked += 1
        found = violated(alpha, f, codomain, args)
        if found:
            return {'natural': False, 'checked': checked, 'violation': found}

    logger.info(f"No naturality violation for {lifting.name} in {checked} squares")
    return {'natural': True, 'checked': checked, 'violation': None}
