"""
JSON file formats for functors, models, tree models and automata
"""

import hashlib
import json
import logging

from models.automaton import Automaton, state_vars
from models.errors import DomainError
from models.functor import (
    BAG, IDENTITY, MON, MONSTAR, POWERSET, Bag, Const, Coproduct, Exp, Id, MonNbhd, MonNbhdStar,
    Powerset, Product, label, make_bag, minimize_family, sort_labels
)
from models.one_step import Lift
from models.tmodel import TModel, TreeModel
from services.functor_service import make_tobject
from services.lifting_service import builtin_liftings
from services.parser_service import parse_one_step, print_one_step

logger = logging.getLogger(__name__)

NAMED_FUNCTORS = {'powerset': POWERSET, 'bag': BAG, 'mon': MON, 'monstar': MONSTAR, 'id': IDENTITY}


def read_json(path):
    try:
        with open(path) as handle:
            return json.load(handle)
    except json.JSONDecodeError as e:
        raise DomainError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}")
    except OSError as e:
        raise DomainError(f"{path}: {e.strerror}")


def dumps(data):
    """Canonical JSON text"""
    return json.dumps(data, sort_keys=True, indent=2)


def write_json(path, data):
    with open(path, 'w') as handle:
        handle.write(dumps(data) + '\n')
    logger.info(f"Wrote {path}")


def sha256_of(path):
    digest = hashlib.sha256()
    try:
        with open(path, 'rb') as handle:
            for chunk in iter(lambda: handle.read(65536), b''):
                digest.update(chunk)
    except OSError as e:
        raise DomainError(f"{path}: {e.strerror}")
    return digest.hexdigest()


# Functor descriptions

def spec_from_json(data):
    """'powerset' | 'bag' | 'mon' | 'monstar' | 'id' | {'const': [...]} | {'product': [F, G]}
    | {'coproduct': [F, ...]} | {'exp': F, 'exponent': [...]}"""
    if isinstance(data, str):
        if data not in NAMED_FUNCTORS:
            raise DomainError(f"Unknown functor name: {data}")
        return NAMED_FUNCTORS[data]
    if not isinstance(data, dict):
        raise DomainError(f"Malformed functor description: {data!r}")
    if 'const' in data:
        return Const(frozenset(data['const']))
    if 'product' in data:
        left, right = data['product']
        return Product(spec_from_json(left), spec_from_json(right))
    if 'coproduct' in data:
        return Coproduct(tuple(spec_from_json(p) for p in data['coproduct']))
    if 'exp' in data:
        return Exp(spec_from_json(data['exp']), frozenset(data.get('exponent', ())))
    raise DomainError(f"Malformed functor description: {sorted(data)}")


def spec_to_json(spec):
    if isinstance(spec, (Powerset, Bag, MonNbhd, MonNbhdStar, Id)):
        return spec.name
    if isinstance(spec, Const):
        return {'const': sort_labels(spec.values)}
    if isinstance(spec, Product):
        return {'product': [spec_to_json(spec.left), spec_to_json(spec.right)]}
    if isinstance(spec, Coproduct):
        return {'coproduct': [spec_to_json(p) for p in spec.parts]}
    if isinstance(spec, Exp):
        return {'exp': spec_to_json(spec.body), 'exponent': sort_labels(spec.exponent)}
    raise DomainError(f"Unknown functor {spec!r}")


# Values

def value_from_json(spec, data):
    """Raw value of T X from its literal"""
    if isinstance(spec, (Const, Id)):
        return data
    if isinstance(spec, Product):
        return (value_from_json(spec.left, data[0]), value_from_json(spec.right, data[1]))
    if isinstance(spec, Coproduct):
        return (int(data['in']), value_from_json(spec.parts[int(data['in'])], data['value']))
    if isinstance(spec, Exp):
        return frozenset((c, value_from_json(spec.body, v)) for c, v in data.items())
    if isinstance(spec, Powerset):
        return frozenset(data)
    if isinstance(spec, Bag):
        return make_bag({x: int(n) for x, n in data.items()})
    if isinstance(spec, MonNbhd):
        return minimize_family(data)
    if isinstance(spec, MonNbhdStar):
        return (minimize_family(data['nbhd']), frozenset(data['support']))
    raise DomainError(f"Unknown functor {spec!r}")


def value_to_json(spec, value):
    if isinstance(spec, (Const, Id)):
        return value
    if isinstance(spec, Product):
        return [value_to_json(spec.left, value[0]), value_to_json(spec.right, value[1])]
    if isinstance(spec, Coproduct):
        index, inner = value
        return {'in': index, 'value': value_to_json(spec.parts[index], inner)}
    if isinstance(spec, Exp):
        return {c: value_to_json(spec.body, v) for c, v in value}
    if isinstance(spec, Powerset):
        return sort_labels(value)
    if isinstance(spec, Bag):
        return {x: n for x, n in value}
    if isinstance(spec, MonNbhd):
        return sorted(sort_labels(m) for m in value)
    if isinstance(spec, MonNbhdStar):
        antichain, support = value
        return {'nbhd': sorted(sort_labels(m) for m in antichain), 'support': sort_labels(support)}
    raise DomainError(f"Unknown functor {spec!r}")


# Models

def model_from_json(data):
    """TModel, plus a TreeModel when the document names a root and a frame"""
    for key in ('functor', 'carrier', 'sigma'):
        if key not in data:
            raise DomainError(f"Model document is missing '{key}'")
    spec = spec_from_json(data['functor'])
    carrier = frozenset(data['carrier'])
    sigma = {}
    for s, literal in data['sigma'].items():
        if s not in carrier:
            raise DomainError(f"Structure given for {s}, which is not in the carrier")
        sigma[s] = make_tobject(spec, carrier, value_from_json(spec, literal))
    model = TModel(spec, carrier, sigma, data.get('valuation', {}))
    tree = None
    if 'frame' in data:
        tree = TreeModel(model, data['frame'], data.get('root'))
    return model, tree


def model_to_json(model, tree=None, root=None):
    data = {
        'functor': spec_to_json(model.spec),
        'carrier': sort_labels(model.carrier),
        'sigma': {label(s): value_to_json(model.spec, model.sigma[s].value) for s in sort_labels(model.carrier)},
        'valuation': {v: sort_labels(p) for v, p in sorted(model.valuation.items())}
    }
    if tree is not None:
        data['frame'] = {label(s): sort_labels(tree.frame[s]) for s in sort_labels(model.carrier)}
        root = tree.root
    if root is not None:
        data['root'] = root
    return data


def read_model(path):
    return model_from_json(read_json(path))


# Automata

def color_key(color):
    """Colour as the comma-joined sorted variable list; '' is the empty colour"""
    return ','.join(sort_labels(color))


def _color_from_key(key):
    return frozenset(v for v in key.split(',') if v)


def automaton_from_json(data, liftings=None):
    for key in ('states', 'initial', 'priority', 'delta'):
        if key not in data:
            raise DomainError(f"Automaton document is missing '{key}'")
    flavor = data.get('flavor', 'so1')
    if liftings is None:
        liftings = builtin_liftings(spec_from_json(data.get('functor', 'powerset')))
    for name in data.get('liftings', ()):
        liftings.resolve(name)
    chromatic = frozenset(data.get('chromatic', ()))
    delta = {}
    for state, row in data['delta'].items():
        delta[state] = {}
        for key, text in row.items():
            color = _color_from_key(key)
            if not color <= chromatic:
                raise DomainError(f"Colour '{key}' of state {state} uses non-chromatic variables")
            delta[state][color] = parse_one_step(text)
    priority = {a: int(p) for a, p in data['priority'].items()}
    return Automaton.from_table(
        states=data['states'],
        initial=data['initial'],
        priority=priority,
        chromatic=chromatic,
        flavor=flavor,
        liftings=liftings,
        delta=delta,
        special_basic=bool(data.get('special_basic', False)),
        name=data.get('name', 'automaton')
    )


def automaton_to_json(automaton):
    """Explicit tables with states renamed s0, s1, ... (the initial state is s0)"""
    others = [a for a in automaton.states if a != automaton.initial]
    rename = {a: f's{i}' for i, a in enumerate([automaton.initial] + others)}

    def names(v):
        return rename.get(v, label(v))

    delta = {}
    lifting_names = set()
    for a, new in rename.items():
        delta[new] = {}
        for color in automaton.colors():
            formula = automaton.transition(a, color)
            delta[new][color_key(color)] = print_one_step(formula, names)
            lifting_names |= _lift_names(formula)
            unknown = state_vars(formula) - set(rename)
            if unknown:
                raise DomainError(f"Transition of {label(a)} leaves the explored states")
    data = {
        'name': automaton.name,
        'states': list(rename.values()),
        'initial': 's0',
        'priority': {rename[a]: automaton.priority(a) for a in rename},
        'chromatic': sort_labels(automaton.chromatic),
        'flavor': automaton.flavor,
        'liftings': sorted(lifting_names),
        'delta': delta,
        'special_basic': automaton.special_basic
    }
    spec = getattr(automaton.liftings, 'spec', None)
    if spec is not None:
        data['functor'] = spec_to_json(spec)
    return data


def _lift_names(formula):
    found = set()
    stack = [formula]
    while stack:
        node = stack.pop()
        if isinstance(node, Lift):
            found.add(node.name)
        stack.extend(getattr(node, 'children', ()))
    return found


def read_automaton(path, liftings=None):
    return automaton_from_json(read_json(path), liftings)
