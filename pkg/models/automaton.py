"""
Parity automata, parity games and stream automata
"""

import logging
from dataclasses import dataclass, field
from itertools import chain, combinations

import networkx as nx

from models.errors import CapExceeded, DomainError
from models.functor import label, sort_labels
from models.one_step import FreshVar, is_syntactically_monotone

logger = logging.getLogger(__name__)

FLAVORS = ('ml1', 'so1')
EXISTS = 'E'
FORALL = 'A'


def all_colors(chromatic):
    """Every subset of the chromatic variables"""
    items = sort_labels(chromatic)
    return [frozenset(c) for c in chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))]


def state_vars(formula):
    """Automaton states occurring free in a one-step formula"""
    return frozenset(v for v in formula.free_vars if not isinstance(v, FreshVar))


class Automaton:
    """P-chromatic parity automaton (A, Delta, Omega, a_I) with lazily computed transitions"""

    def __init__(self, initial, chromatic, flavor, liftings, transition_fn, priority_fn,
                 special_basic=False, monotone=False, name='automaton', max_states=20000):
        if flavor not in FLAVORS:
            raise DomainError(f"Unknown automaton flavor: {flavor}")
        self.initial = initial
        self.chromatic = frozenset(chromatic)
        self.flavor = flavor
        self.liftings = liftings
        self.special_basic = special_basic
        self.monotone = monotone
        self.name = name
        self.max_states = max_states
        self._transition_fn = transition_fn
        self._priority_fn = priority_fn
        self._transitions = {}
        self._priorities = {}
        self._states = None

    @classmethod
    def from_table(cls, states, initial, priority, chromatic, flavor, liftings, delta,
                   special_basic=False, monotone=None, name='automaton'):
        """Automaton given by explicit tables; `delta[state][color]` is a one-step formula"""
        states = list(states)
        chromatic = frozenset(chromatic)
        if initial not in states:
            raise DomainError(f"Initial state {label(initial)} is not a state")
        for a in states:
            if a not in priority:
                raise DomainError(f"No priority for state {label(a)}")
            for color in all_colors(chromatic):
                if color not in delta.get(a, {}):
                    raise DomainError(f"Transition missing for state {label(a)} and color {label(color)}")
                extra = state_vars(delta[a][color]) - set(states)
                if extra:
                    raise DomainError(f"Transition of {label(a)} mentions non-states {sort_labels(extra)}")
                if flavor == 'ml1' and not delta[a][color].is_ml:
                    raise DomainError(f"Transition of {label(a)} is not in the modal one-step language")
        if monotone is None:
            monotone = all(is_syntactically_monotone(f) for row in delta.values() for f in row.values())

        automaton = cls(
            initial=initial,
            chromatic=chromatic,
            flavor=flavor,
            liftings=liftings,
            transition_fn=lambda a, c: delta[a][c],
            priority_fn=lambda a: priority[a],
            special_basic=special_basic,
            monotone=monotone,
            name=name
        )
        automaton._states = sort_labels(states)
        return automaton

    @property
    def is_ml(self):
        return self.flavor == 'ml1'

    def transition(self, state, color):
        color = frozenset(color) & self.chromatic
        key = (state, color)
        if key not in self._transitions:
            self._transitions[key] = self._transition_fn(state, color)
        return self._transitions[key]

    def priority(self, state):
        if state not in self._priorities:
            self._priorities[state] = self._priority_fn(state)
        return self._priorities[state]

    def colors(self):
        return all_colors(self.chromatic)

    def successors(self, state):
        """States free in some transition of `state`"""
        found = set()
        for color in self.colors():
            found |= state_vars(self.transition(state, color))
        return found

    @property
    def states(self):
        """Reachable states, materialised on first use"""
        if self._states is None:
            seen = {self.initial}
            frontier = [self.initial]
            while frontier:
                state = frontier.pop()
                for nxt in self.successors(state):
                    if nxt not in seen:
                        seen.add(nxt)
                        frontier.append(nxt)
                        if len(seen) > self.max_states:
                            raise CapExceeded(f"Automaton {self.name} has more than {self.max_states} reachable states")
            self._states = sort_labels(seen)
            logger.debug(f"Materialised {len(seen)} states of {self.name}")
        return self._states

    def max_priority(self):
        return max((self.priority(a) for a in self.states), default=0)

    def to_dict(self):
        return {
            'name': self.name,
            'states': len(self.states),
            'initial': label(self.initial),
            'chromatic': sort_labels(self.chromatic),
            'flavor': self.flavor,
            'special_basic': self.special_basic,
            'monotone': self.monotone
        }

    def __repr__(self):
        return f'<Automaton {self.name} {self.flavor} initial={label(self.initial)}>'


class ParityGame:
    """Two-player max-parity game on a networkx DiGraph with `owner` and `priority` node attributes"""

    def __init__(self, graph, start=None):
        self.graph = graph
        self.start = start

    @classmethod
    def from_edges(cls, owners, priorities, edges, start=None):
        graph = nx.DiGraph()
        for node, owner in owners.items():
            if owner not in (EXISTS, FORALL):
                raise DomainError(f"Unknown owner {owner}")
            graph.add_node(node, owner=owner, priority=int(priorities[node]))
        for source, target in edges:
            if source not in graph or target not in graph:
                raise DomainError("Move between unknown positions")
            graph.add_edge(source, target)
        return cls(graph, start)

    @property
    def positions(self):
        return list(self.graph.nodes)

    def owner(self, position):
        return self.graph.nodes[position]['owner']

    def priority(self, position):
        return self.graph.nodes[position]['priority']

    def moves(self, position):
        return list(self.graph.successors(position))

    def __len__(self):
        return self.graph.number_of_nodes()

    def __repr__(self):
        return f'<ParityGame positions={len(self)} moves={self.graph.number_of_edges()}>'


@dataclass
class SolveResult:
    """Winning regions and positional strategies of both players"""
    winning: dict = field(default_factory=lambda: {EXISTS: set(), FORALL: set()})
    strategy: dict = field(default_factory=lambda: {EXISTS: {}, FORALL: {}})

    def winner(self, position):
        return EXISTS if position in self.winning[EXISTS] else FORALL

    def to_dict(self):
        return {
            'exists_wins': len(self.winning[EXISTS]),
            'forall_wins': len(self.winning[FORALL])
        }


@dataclass(frozen=True)
class MacroState:
    """Binary relation over automaton states"""
    pairs: frozenset

    @property
    def range(self):
        return frozenset(b for _, b in self.pairs)

    @property
    def label(self):
        return '[' + ','.join(f'{label(a)}>{label(b)}' for a, b in sorted(self.pairs, key=label)) + ']'


class StreamAutomaton:
    """Deterministic parity automaton on streams, stepped lazily"""

    def __init__(self, initial, step_fn, priority_fn, name='stream'):
        self.initial = initial
        self.name = name
        self._step_fn = step_fn
        self._priority_fn = priority_fn
        self._steps = {}

    def step(self, state, letter):
        key = (state, frozenset(letter))
        if key not in self._steps:
            self._steps[key] = self._step_fn(state, key[1])
        return self._steps[key]

    def priority(self, state):
        return self._priority_fn(state)

    def accepts_lasso(self, prefix, cycle):
        """Run on prefix . cycle^omega; max parity over the eventual loop"""
        if not cycle:
            raise DomainError("Lasso cycle must be nonempty")
        state = self.initial
        for letter in prefix:
            state = self.step(state, letter)
        seen = {}
        trail = []
        while state not in seen:
            seen[state] = len(trail)
            for letter in cycle:
                state = self.step(state, letter)
                trail.append(self.priority(state))
        loop = trail[seen[state]:]
        return max(loop) % 2 == 0
