
"""
Bad-Trace Detection on Streams of Macro-States

A trace through a stream of relations B1 B2 ... is a sequence a1 a2 ...
with a1 in the range of B1 and (a_{j-1}, a_j) in B_j. A trace is bad when
the largest priority it visits infinitely often is odd. This module builds
a nondeterministic Buchi automaton guessing a bad trace and determinizes it
into a parity automaton.

Determinization uses Safra trees in Piterman's compact form: after every
step the node names are renumbered 1..k by age, and the step emits the
priority 2*f for the oldest marked node f or 2*e - 1 for the oldest removed
node e. The parity condition therefore comes straight out of the tree
naming, with no index appearance record (IAR) on top of a Rabin condition.
The result is a deterministic max-parity stream automaton accepting
exactly the streams without bad traces.
"""

import logging

import networkx as nx

from models.automaton import EXISTS, StreamAutomaton
from models.errors import DomainError
from models.functor import label
from services.game_service import odd_cycle_positions

logger = logging.getLogger(__name__)

INIT = ('init',)


class BadTraceGuesser:
    """Buchi automaton over relations accepting the streams with a bad trace"""

    def __init__(self, priority_fn, max_priority):
        self.priority = priority_fn
        top = max_priority if max_priority % 2 else max_priority - 1
        self.odd = tuple(range(1, top + 1, 2))

    def _arrive(self, target):
        yield ('t', target)
        for p in self.odd:
            if p >= self.priority(target):
                yield ('c', target, p)

    def post(self, state, letter):
        found = set()
        if state == INIT:
            for _, b in letter:
                found.update(self._arrive(b))
        elif state[0] == 't':
            for a, b in letter:
                if a == state[1]:
                    found.update(self._arrive(b))
        else:
            _, current, p = state
            for a, b in letter:
                if a == current and self.priority(b) <= p:
                    found.add(('c', b, p))
        return found

    def accepting(self, state):
        return state[0] == 'c' and self.priority(state[1]) == state[2]


def _children(nodes, name):
    return sorted(n for n, (_, parent) in nodes.items() if parent == name)


def _descendants(nodes, name):
    found = []
    stack = _children(nodes, name)
    while stack:
        n = stack.pop()
        found.append(n)
        stack.extend(_children(nodes, n))
    return found


def safra_step(tree, letter, guesser):
    """
    One Safra step on a tree of (name, parent, label) triples.

    Returns the next tree with names compacted to 1..k and the smallest
    event priority of the step: 2*f for the smallest marked name f,
    2*e - 1 for the smallest removed name e, or None when neither occurs.
    """
    nodes = {name: (set(states), parent) for name, parent, states in tree}
    old_names = set(nodes)
    fresh = max(old_names) + 1

    for name in sorted(old_names):
        accepting = {q for q in nodes[name][0] if guesser.accepting(q)}
        if accepting:
            nodes[fresh] = (accepting, name)
            fresh += 1

    for name, (states, parent) in list(nodes.items()):
        moved = set()
        for q in states:
            moved |= guesser.post(q, letter)
        nodes[name] = (moved, parent)

    def merge(name, claimed):
        states, parent = nodes[name]
        states -= claimed
        taken = set(claimed)
        for child in _children(nodes, name):
            merge(child, taken)
            taken |= nodes[child][0]

    merge(1, set())

    removed = set()
    for name in sorted(nodes):
        if name != 1 and name in nodes and not nodes[name][0]:
            for n in [name] + _descendants(nodes, name):
                removed.add(n)
                del nodes[n]

    marked = set()
    for name in sorted(nodes):
        if name not in nodes:
            continue
        children = _children(nodes, name)
        if not children:
            continue
        covered = set().union(*(nodes[c][0] for c in children))
        if covered == nodes[name][0]:
            marked.add(name)
            for n in _descendants(nodes, name):
                removed.add(n)
                del nodes[n]

    events = [2 * f for f in marked]
    events += [2 * e - 1 for e in removed if e in old_names]
    rename = {name: i for i, name in enumerate(sorted(nodes), start=1)}
    compact = tuple(sorted(
        (rename[name], rename.get(parent), frozenset(states))
        for name, (states, parent) in nodes.items()
    ))
    return compact, (min(events) if events else None)


def bad_trace_automaton(priority_fn, max_priority, state_bound):
    """
    Deterministic max-parity automaton over relations on automaton states,
    accepting a stream iff no trace through it is bad.

    `state_bound` bounds the number of automaton states the traces can
    visit; it fixes the neutral priority of steps without events.
    """
    guesser = BadTraceGuesser(priority_fn, max_priority)
    guessed_states = 1 + state_bound * (1 + len(guesser.odd))
    neutral = 2 * guessed_states + 3

    def step(state, letter):
        tree, _ = state
        next_tree, event = safra_step(tree, letter, guesser)
        return (next_tree, neutral if event is None else event)

    def priority(state):
        if state[1] is None:
            return 0
        return neutral - state[1]

    initial = (((1, None, frozenset({INIT})),), None)
    return StreamAutomaton(initial, step, priority, name='bad-trace')


def lasso_graph(prefix, cycle, priority_fn):
    """Graph of trace positions through prefix . cycle^omega"""
    if not cycle:
        raise DomainError("Lasso cycle must be nonempty")
    word = [frozenset(letter) for letter in list(prefix) + list(cycle)]
    loop = len(prefix)
    graph = nx.DiGraph()
    for i, letter in enumerate(word):
        following = word[i + 1] if i + 1 < len(word) else word[loop]
        j = i + 1 if i + 1 < len(word) else loop
        for _, a in letter:
            graph.add_node((i, a), owner=EXISTS, priority=priority_fn(a))
            for x, b in following:
                if x == a:
                    graph.add_node((j, b), owner=EXISTS, priority=priority_fn(b))
                    graph.add_edge((i, a), (j, b))
    starts = {(0, b) for _, b in word[0]}
    return graph, starts


def lasso_has_bad_trace(prefix, cycle, priority_fn):
    """Reference oracle: search the lasso graph for a reachable odd cycle"""
    graph, starts = lasso_graph(prefix, cycle, priority_fn)
    reachable = set(starts)
    for v in starts:
        reachable |= nx.descendants(graph, v)
    bad = odd_cycle_positions(graph.subgraph(reachable), exists_stuck_loses=False)
    if bad:
        logger.debug(f"Bad trace through {label(min(bad, key=label))}")
    return bool(bad)
