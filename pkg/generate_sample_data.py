"""
Sample Data Generator for the Coalgebraic Automata Kit
Random and enumerated models, tree models, parity games, lasso words and
formula corpora, used by the self-checks, the tests and the sample files
"""

import os
import sys
from itertools import product

import numpy as np

from models.automaton import EXISTS, FORALL, ParityGame
from models.functor import BAG, MON, POWERSET, TObject, make_bag, sort_labels
from models.tmodel import TModel, TreeModel
from services.functor_service import enumerate_values, random_value, subsets

MU_CORPUS = [
    'p',
    'not p',
    'lift box(p)',
    'lift dia(p)',
    'lift dia(lift box(p))',
    'lift box(p) or lift dia(not p)',
    'mu x . p or lift dia(x)',
    'mu x . p or lift box(x)',
    'nu x . p and lift box(x)',
    'nu x . lift dia(x)',
    'mu x . lift box(x)',
    'nu x . lift dia(top) and lift box(x)',
    'nu x . (p and lift dia(x)) or lift box(bot)',
    'nu x . mu y . (p and lift dia(x)) or lift dia(y)',
    'mu x . nu y . (p and lift box(x)) or (not p and lift box(y))',
    'nu x . lift dia(mu y . p or lift dia(y)) and lift box(x)',
]

MSO_CORPUS = [
    'exists x . sr(x) and x sub p',
    'exists x . sr(x) and lift box(x, p)',
    'exists x . sr(x) and lift dia(x, p)',
    'forall x . sr(x) -> lift dia(x, p)',
    'not exists x . sr(x) and lift box(x, p)',
    'em(p)',
    'p sub p',
    'exists q . q sub p and (exists x . sr(x) and lift dia(x, q))',
    'exists q . (exists x . sr(x) and x sub q) and q sub p and lift box(q, q)',
    'not (exists q . (exists x . sr(x) and x sub q) and lift box(q, q) and not exists y . y sub q and y sub p and not em(y))',
    'exists q . not em(q) and q sub p and lift dia(q, q)',
    'exists q . sing(q) and q sub p and not (exists x . sr(x) and x sub q)',
    'exists x . sr(x) and (lift box(x, p) or not lift dia(x, p))',
]


MMSO_CORPUS = [
    'box(p, p)',
    'exists x . sr(x) and box(x, p)',
    'not exists x . sr(x) and box(x, p)',
    'exists q . q sub p and (exists x . sr(x) and box(x, q))',
    'exists q . (exists x . sr(x) and x sub q) and box(q, q) and q sub p',
    'forall q . box(q, q) -> em(q) or not em(p) or q sub q',
    'exists q . sing(q) and box(q, p) and not (exists x . sr(x) and x sub q)',
    'forall x . sr(x) -> (box(x, p) or x sub p)',
    'exists q . box(q, q) and not em(q)',
    'forall q . (exists x . sr(x) and x sub q) -> not box(q, p) or p sub q',
]

# Two-state monotone second-order automata over powerset trees, coloured by p
SO_AUTOMATA = [
    {'name': 'so-1', 'states': ['a', 'b'], 'initial': 'a', 'priority': {'a': 1, 'b': 2},
     'chromatic': ['p'], 'flavor': 'so1',
     'delta': {'a': {'': 'lift dia(a | b)', 'p': 'top'},
               'b': {'': 'lift box(b)', 'p': 'lift dia(a) and lift dia(b)'}}},
    {'name': 'so-2', 'states': ['a', 'b'], 'initial': 'a', 'priority': {'a': 2, 'b': 1},
     'chromatic': ['p'], 'flavor': 'so1',
     'delta': {'a': {'': 'exists z . z sub b and lift box(z) and lift dia(a)', 'p': 'lift box(a)'},
               'b': {'': 'lift dia(b)', 'p': 'top'}}},
    {'name': 'so-3', 'states': ['a', 'b'], 'initial': 'a', 'priority': {'a': 0, 'b': 1},
     'chromatic': ['p'], 'flavor': 'so1',
     'delta': {'a': {'': 'lift dia(b) and lift box(a | b)', 'p': 'lift dia(a)'},
               'b': {'': 'lift dia(b)', 'p': 'lift box(a)'}}},
    {'name': 'so-4', 'states': ['a', 'b'], 'initial': 'a', 'priority': {'a': 3, 'b': 2},
     'chromatic': ['p'], 'flavor': 'so1',
     'delta': {'a': {'': 'lift dia(a & b)', 'p': 'lift box(b)'},
               'b': {'': 'lift box(a) and lift dia(b)', 'p': 'top'}}},
    {'name': 'so-5', 'states': ['a', 'b'], 'initial': 'a', 'priority': {'a': 2, 'b': 3},
     'chromatic': ['p'], 'flavor': 'so1',
     'delta': {'a': {'': 'exists z . z sub a and lift dia(z) and lift box(a | b)', 'p': 'lift dia(b)'},
               'b': {'': 'lift box(b)', 'p': 'lift dia(a) or lift box(b)'}}},
]

# Monotone automata over bags, coloured by p
BAG_AUTOMATA = [
    {'name': 'bag-1', 'functor': 'bag', 'states': ['a'], 'initial': 'a', 'priority': {'a': 1},
     'chromatic': ['p'], 'flavor': 'so1',
     'delta': {'a': {'': 'lift ge1(a)', 'p': 'top'}}},
    {'name': 'bag-2', 'functor': 'bag', 'states': ['a', 'b'], 'initial': 'a', 'priority': {'a': 2, 'b': 1},
     'chromatic': ['p'], 'flavor': 'so1',
     'delta': {'a': {'': 'exists z . z sub b and lift ge2(z)', 'p': 'lift ge1_d(a)'},
               'b': {'': 'lift ge1(a | b)', 'p': 'top'}}},
    {'name': 'bag-3', 'functor': 'bag', 'states': ['a', 'b'], 'initial': 'a', 'priority': {'a': 0, 'b': 1},
     'chromatic': ['p'], 'flavor': 'so1',
     'delta': {'a': {'': 'lift ge2(a | b) and lift ge1_d(a)', 'p': 'lift ge1(b)'},
               'b': {'': 'lift ge1(b)', 'p': 'top'}}},
]


# Trees

def shape_size(shape):
    return 1 + sum(shape_size(c) for c in shape)


def tree_shapes(max_nodes, depth):
    """Unordered rooted trees with at most `max_nodes` nodes and height at most `depth`"""
    if max_nodes < 1:
        return []
    if depth == 0:
        return [()]
    subtrees = tree_shapes(max_nodes - 1, depth - 1)
    sizes = [shape_size(s) for s in subtrees]
    found = set()

    def extend(chosen, start, used):
        found.add(tuple(chosen))
        for i in range(start, len(subtrees)):
            if used + sizes[i] <= max_nodes - 1:
                extend(chosen + [subtrees[i]], i, used + sizes[i])

    extend([], 0, 0)
    return sorted(found, key=repr)


def shape_frame(shape, name='n'):
    """Frame of a shape with nodes named by their path from the root 'n'"""
    frame = {name: []}
    for i, child in enumerate(shape):
        child_name = f'{name}{i}'
        frame[name].append(child_name)
        frame.update(shape_frame(child, child_name))
    return frame


def kripke_tree(frame, colors, root='n', variables=None):
    """Powerset tree model whose structure map is the frame itself"""
    carrier = frozenset(frame)
    sigma = {s: TObject(POWERSET, carrier, frozenset(frame[s])) for s in carrier}
    if variables is None:
        variables = set().union(*colors.values()) if colors else set()
    valuation = {v: frozenset(s for s in carrier if v in colors[s]) for v in variables}
    return TreeModel(TModel(POWERSET, carrier, sigma, valuation), frame, root)


def enumerate_powerset_trees(max_nodes, depth, variables=('p',)):
    """Every powerset tree model up to the size and height bounds, under every valuation"""
    trees = []
    for shape in tree_shapes(max_nodes, depth):
        frame = shape_frame(shape)
        nodes = sort_labels(frame)
        for choice in product(subsets(variables), repeat=len(nodes)):
            trees.append(kripke_tree(frame, dict(zip(nodes, choice)), variables=variables))
    return trees


def random_tree_model(spec, rng, max_nodes=6, depth=3, variables=('p',), count_bound=2):
    """Random T-tree model; each structure is drawn over the children of its node"""
    frame = {'n': []}
    levels = {'n': 0}
    frontier = ['n']
    while frontier and len(frame) < max_nodes:
        node = frontier.pop(0)
        if levels[node] >= depth:
            continue
        for i in range(int(rng.integers(0, 3))):
            if len(frame) >= max_nodes:
                break
            child = f'{node}{i}'
            frame[node].append(child)
            frame[child] = []
            levels[child] = levels[node] + 1
            frontier.append(child)
    carrier = frozenset(frame)
    sigma = {s: TObject(spec, carrier, random_value(spec, frozenset(frame[s]), rng, count_bound)) for s in carrier}
    valuation = {v: frozenset(s for s in sort_labels(carrier) if rng.random() < 0.5) for v in variables}
    return TreeModel(TModel(spec, carrier, sigma, valuation), frame, 'n')


# Models

def random_model(spec, rng, size=3, variables=('p',), count_bound=2):
    carrier = frozenset(f's{i}' for i in range(size))
    sigma = {s: TObject(spec, carrier, random_value(spec, carrier, rng, count_bound)) for s in sort_labels(carrier)}
    valuation = {v: frozenset(s for s in sort_labels(carrier) if rng.random() < 0.5) for v in variables}
    return TModel(spec, carrier, sigma, valuation)


def random_acyclic_model(spec, rng, size=3, variables=('p',), count_bound=2):
    """Random model where s{i} only reaches states s{j} with j > i"""
    states = [f's{i}' for i in range(size)]
    carrier = frozenset(states)
    sigma = {s: TObject(spec, carrier, random_value(spec, frozenset(states[i + 1:]), rng, count_bound))
             for i, s in enumerate(states)}
    valuation = {v: frozenset(s for s in states if rng.random() < 0.5) for v in variables}
    return TModel(spec, carrier, sigma, valuation)


def enumerate_models(spec, size, variables=('p',), values=None):
    """Every model over carrier s0..s{size-1} under every valuation"""
    carrier = frozenset(f's{i}' for i in range(size))
    states = sort_labels(carrier)
    values = values if values is not None else enumerate_values(spec, carrier)
    for structure in product(values, repeat=size):
        sigma = {s: TObject(spec, carrier, v) for s, v in zip(states, structure)}
        for extension in product(subsets(states), repeat=len(variables)):
            yield TModel(spec, carrier, sigma, dict(zip(variables, extension)))


# Games and words

def random_game(rng, size=8, max_priority=4):
    """Random parity game where every position has one to three moves"""
    nodes = list(range(size))
    owners = {v: EXISTS if rng.random() < 0.5 else FORALL for v in nodes}
    priorities = {v: int(rng.integers(0, max_priority + 1)) for v in nodes}
    edges = set()
    for v in nodes:
        for _ in range(int(rng.integers(1, 4))):
            edges.add((v, int(rng.integers(size))))
    return ParityGame.from_edges(owners, priorities, sorted(edges), start=0)


def random_relation(states, rng):
    """Nonempty random binary relation over `states`"""
    states = sort_labels(states)
    pairs = frozenset((a, b) for a in states for b in states if rng.random() < 0.4)
    if not pairs:
        pairs = frozenset([(states[int(rng.integers(len(states)))], states[int(rng.integers(len(states)))])])
    return pairs


def lasso_words(alphabet, max_length):
    """Every (prefix, cycle) with a nonempty cycle and total length at most `max_length`"""
    for total in range(1, max_length + 1):
        for cycle_length in range(1, total + 1):
            for word in product(alphabet, repeat=total):
                yield list(word[:total - cycle_length]), list(word[total - cycle_length:])


def random_lasso(alphabet, rng, max_length=6):
    total = int(rng.integers(1, max_length + 1))
    cycle_length = int(rng.integers(1, total + 1))
    word = [alphabet[int(rng.integers(len(alphabet)))] for _ in range(total)]
    return word[:total - cycle_length], word[total - cycle_length:]


# Sample files

def generate_sample_files(directory='samples', seed=42):
    """Write a handful of model and automaton files for the command line"""
    from services.construction_service import compile_mu
    from services.io_service import automaton_to_json, model_to_json, write_json
    from services.lifting_service import builtin_liftings
    from services.parser_service import parse_mu

    rng = np.random.default_rng(seed)
    os.makedirs(directory, exist_ok=True)

    written = []
    for name, spec in (('powerset', POWERSET), ('mon', MON), ('bag', BAG)):
        model = random_model(spec, rng, size=3)
        path = os.path.join(directory, f'{name}_model.json')
        write_json(path, model_to_json(model, root='s0'))
        written.append(path)

    tree = random_tree_model(POWERSET, rng, max_nodes=6)
    path = os.path.join(directory, 'powerset_tree.json')
    write_json(path, model_to_json(tree.model, tree))
    written.append(path)

    bag_tree = TreeModel(
        TModel(BAG, frozenset({'r', 'a', 'b'}), {
            'r': TObject(BAG, frozenset({'r', 'a', 'b'}), make_bag({'a': 2, 'b': 1})),
            'a': TObject(BAG, frozenset({'r', 'a', 'b'}), make_bag({})),
            'b': TObject(BAG, frozenset({'r', 'a', 'b'}), make_bag({}))
        }, {'p': {'a'}}),
        {'r': ['a', 'b']}, 'r'
    )
    path = os.path.join(directory, 'bag_tree.json')
    write_json(path, model_to_json(bag_tree.model, bag_tree))
    written.append(path)

    automaton = compile_mu(parse_mu(MU_CORPUS[6]), builtin_liftings(POWERSET), name='eventually-p')
    path = os.path.join(directory, 'eventually_p.json')
    write_json(path, automaton_to_json(automaton))
    written.append(path)

    return written


def main():
    print("Generating sample files for the coalgebraic automata kit...")
    directory = sys.argv[1] if len(sys.argv) > 1 else 'samples'
    written = generate_sample_files(directory)
    for path in written:
        print(f"  {path}")
    print(f"Created {len(written)} sample files")
    print(f"Example: python app.py accept --automaton {written[-1]} --model {written[3]} --point n")


if __name__ == '__main__':
    main()
