"""
Acceptance Games and Parity Game Solving
"""

import logging
from collections import deque
from itertools import combinations, product

import networkx as nx

from config.settings import current_caps
from models.automaton import EXISTS, FORALL, ParityGame, SolveResult, state_vars
from models.errors import CapExceeded, DomainError
from models.functor import label, sort_labels
from models.tmodel import OneStepModel, TreeModel
from services.functor_service import restrict_to_support, subsets
from services.one_step_service import eval_one_step

logger = logging.getLogger(__name__)

MODES = ('full', 'tree')


def exists_position(state, point):
    return (EXISTS, state, point)


def forall_position(point, valuation):
    return (FORALL, point, frozenset((v, z) for v, z in valuation.items() if z))


def disjoint_valuations(variables, points):
    """Lazily yields pairwise disjoint valuations, fewer covered points first"""
    for size in range(len(points) + 1):
        for chosen in combinations(points, size):
            for owners in product(variables, repeat=size):
                valuation = {v: set() for v in variables}
                for x, v in zip(chosen, owners):
                    valuation[v].add(x)
                yield {v: frozenset(z) for v, z in valuation.items()}


class AcceptanceGameBuilder:
    """Builds the acceptance game of an automaton on a pointed model"""

    def __init__(self, automaton, model, mode='tree', caps=None, prune=True):
        if mode not in MODES:
            raise DomainError(f"Unknown game mode: {mode}")
        if mode == 'full' and not automaton.is_ml:
            raise DomainError("The full-carrier game is only defined for modal one-step automata")
        if mode == 'tree' and not isinstance(model, TreeModel):
            raise DomainError("Tree mode needs a model with a supporting frame")
        self.automaton = automaton
        self.tree = model if isinstance(model, TreeModel) else None
        self.model = model.model if isinstance(model, TreeModel) else model
        self.mode = mode
        self.caps = caps or current_caps()
        self.prune = prune
        self.enumerated = 0
        self._windows = {}

    def window(self, point):
        """Carrier and structure of the one-step model at a point"""
        if point not in self._windows:
            alpha = self.model.sigma[point]
            if self.mode == 'tree':
                try:
                    alpha = restrict_to_support(alpha, self.tree.successors(point))
                except DomainError as e:
                    raise DomainError(f"Frame at {label(point)} is not a support: {e}")
            self._windows[point] = alpha
        return self._windows[point]

    def candidates(self, variables, carrier):
        """Valuations of `variables` over `carrier` in order of total size"""
        variables = sort_labels(variables)
        if self.automaton.special_basic:
            points = sort_labels(carrier)
            total = (len(variables) + 1) ** len(points)
            if total > self.caps.moves:
                raise CapExceeded(f"{total} disjoint valuations exceed the move cap {self.caps.moves}")
            return disjoint_valuations(variables, points)
        options = subsets(carrier)
        total = len(options) ** len(variables)
        if total > self.caps.moves:
            raise CapExceeded(f"{total} candidate valuations exceed the move cap {self.caps.moves}")
        result = [dict(zip(variables, values)) for values in product(options, repeat=len(variables))]
        result.sort(key=lambda val: sum(len(z) for z in val.values()))
        return result

    def admissible(self, state, point):
        """Exists-moves at (state, point)"""
        color = self.model.colors(point, self.automaton.chromatic)
        formula = self.automaton.transition(state, color)
        alpha = self.window(point)
        variables = state_vars(formula)
        found = []
        for valuation in self.candidates(variables, alpha.carrier):
            self.enumerated += 1
            if self.enumerated > self.caps.moves:
                raise CapExceeded(f"Valuation moves exceed the cap {self.caps.moves}")
            if self.prune and any(all(old[v] <= valuation[v] for v in variables) for old in found):
                continue
            window = OneStepModel(alpha.carrier, alpha, valuation)
            if eval_one_step(formula, window, self.automaton.liftings, self.caps):
                found.append(valuation)
        return found

    def build(self, start):
        if start not in self.model.carrier:
            raise DomainError(f"{label(start)} is not a state of the model")
        graph = nx.DiGraph()
        root = exists_position(self.automaton.initial, start)
        graph.add_node(root, owner=EXISTS, priority=self.automaton.priority(self.automaton.initial))
        queue = deque([root])
        while queue:
            position = queue.popleft()
            if position[0] == EXISTS:
                _, state, point = position
                targets = [forall_position(point, v) for v in self.admissible(state, point)]
                for target in targets:
                    if target not in graph:
                        graph.add_node(target, owner=FORALL, priority=0)
                        queue.append(target)
                    graph.add_edge(position, target)
            else:
                _, point, valuation = position
                for state, points in valuation:
                    for t in points:
                        target = exists_position(state, t)
                        if target not in graph:
                            graph.add_node(target, owner=EXISTS, priority=self.automaton.priority(state))
                            queue.append(target)
                        graph.add_edge(position, target)
        logger.debug(f"Acceptance game with {graph.number_of_nodes()} positions, {self.enumerated} valuations tried")
        return ParityGame(graph, root)


def build_acceptance_game(automaton, model, start, mode='tree', caps=None, prune=True):
    """Acceptance game of `automaton` on (model, start)"""
    return AcceptanceGameBuilder(automaton, model, mode, caps, prune).build(start)


# Solving

SINK_EXISTS_LOSES = ('sink', 'exists-stuck')
SINK_FORALL_LOSES = ('sink', 'forall-stuck')


def _with_sinks(game):
    """Copy of the graph where stuck players move to a sink that makes them lose"""
    graph = game.graph.copy()
    graph.add_node(SINK_EXISTS_LOSES, owner=FORALL, priority=1)
    graph.add_edge(SINK_EXISTS_LOSES, SINK_EXISTS_LOSES)
    graph.add_node(SINK_FORALL_LOSES, owner=EXISTS, priority=0)
    graph.add_edge(SINK_FORALL_LOSES, SINK_FORALL_LOSES)
    for node in list(game.graph.nodes):
        if game.graph.out_degree(node) == 0:
            owner = game.graph.nodes[node]['owner']
            graph.add_edge(node, SINK_EXISTS_LOSES if owner == EXISTS else SINK_FORALL_LOSES)
    return graph


def _opponent(player):
    return FORALL if player == EXISTS else EXISTS


def attractor(graph, nodes, target, player):
    """Positions in `nodes` from which `player` forces a visit to `target`, with the forcing moves"""
    region = set(target)
    strategy = {}
    remaining = {}
    queue = deque(region)
    for v in nodes:
        if v not in region:
            remaining[v] = sum(1 for w in graph.successors(v) if w in nodes)
    while queue:
        w = queue.popleft()
        for v in graph.predecessors(w):
            if v not in nodes or v in region:
                continue
            if graph.nodes[v]['owner'] == player:
                region.add(v)
                strategy[v] = w
                queue.append(v)
            else:
                remaining[v] -= 1
                if remaining[v] == 0:
                    region.add(v)
                    queue.append(v)
    return region, strategy


def _zielonka(graph, nodes):
    winning = {EXISTS: set(), FORALL: set()}
    strategy = {EXISTS: {}, FORALL: {}}
    if not nodes:
        return winning, strategy
    top = max(graph.nodes[v]['priority'] for v in nodes)
    player = EXISTS if top % 2 == 0 else FORALL
    other = _opponent(player)
    maximal = {v for v in nodes if graph.nodes[v]['priority'] == top}
    attracted, forcing = attractor(graph, nodes, maximal, player)
    sub_winning, sub_strategy = _zielonka(graph, nodes - attracted)

    if not sub_winning[other]:
        winning[player] = set(nodes)
        strategy[player].update(sub_strategy[player])
        strategy[player].update(forcing)
        for v in maximal:
            if graph.nodes[v]['owner'] == player:
                strategy[player][v] = next(w for w in sorted(graph.successors(v), key=label) if w in nodes)
        return winning, strategy

    lost, escape = attractor(graph, nodes, sub_winning[other], other)
    rest_winning, rest_strategy = _zielonka(graph, nodes - lost)
    winning[player] = rest_winning[player]
    winning[other] = rest_winning[other] | lost
    strategy[player].update(rest_strategy[player])
    strategy[other].update(rest_strategy[other])
    strategy[other].update({v: w for v, w in sub_strategy[other].items() if v in sub_winning[other]})
    strategy[other].update(escape)
    return winning, strategy


def solve_parity(game):
    """Winning regions and positional strategies by Zielonka's recursion (max-parity)"""
    graph = _with_sinks(game)
    winning, strategy = _zielonka(graph, set(graph.nodes))
    sinks = {SINK_EXISTS_LOSES, SINK_FORALL_LOSES}
    result = SolveResult()
    for player in (EXISTS, FORALL):
        result.winning[player] = set(winning[player]) - sinks
        result.strategy[player] = {v: w for v, w in strategy[player].items()
                                   if v not in sinks and w not in sinks and v in result.winning[player]}
    overlap = result.winning[EXISTS] & result.winning[FORALL]
    if overlap or len(result.winning[EXISTS]) + len(result.winning[FORALL]) != len(game):
        raise RuntimeError("Winning regions do not partition the game")
    return result


def odd_cycle_positions(graph, exists_stuck_loses=True):
    """Positions on a cycle whose maximal priority is odd, plus stuck Exists positions"""
    bad = set()
    if exists_stuck_loses:
        bad |= {v for v in graph.nodes if graph.out_degree(v) == 0 and graph.nodes[v]['owner'] == EXISTS}
    priorities = sorted({graph.nodes[v]['priority'] for v in graph.nodes})
    for p in priorities:
        if p % 2 == 0:
            continue
        sub = graph.subgraph([v for v in graph.nodes if graph.nodes[v]['priority'] <= p])
        for component in nx.strongly_connected_components(sub):
            if len(component) == 1:
                (v,) = component
                if not sub.has_edge(v, v):
                    continue
            if any(graph.nodes[v]['priority'] == p for v in component):
                bad |= component
    return bad


def _forall_reach(graph, targets):
    reached = set(targets)
    for v in targets:
        reached |= nx.ancestors(graph, v)
    return reached


def _restricted(graph, choice):
    restricted = nx.DiGraph()
    restricted.add_nodes_from(graph.nodes(data=True))
    for v in graph.nodes:
        if v in choice:
            restricted.add_edge(v, choice[v])
        else:
            restricted.add_edges_from((v, w) for w in graph.successors(v))
    return restricted


def solve_parity_bruteforce(game):
    """Winning regions by enumerating every positional Exists strategy"""
    graph = game.graph
    choosers = [v for v in sorted(graph.nodes, key=label)
                if graph.nodes[v]['owner'] == EXISTS and graph.out_degree(v) > 0]
    options = [sorted(graph.successors(v), key=label) for v in choosers]
    result = SolveResult()
    for picks in product(*options):
        choice = dict(zip(choosers, picks))
        restricted = _restricted(graph, choice)
        losing = _forall_reach(restricted, odd_cycle_positions(restricted))
        for v in set(graph.nodes) - losing:
            if v not in result.winning[EXISTS]:
                result.winning[EXISTS].add(v)
                if v in choice:
                    result.strategy[EXISTS][v] = choice[v]
    result.winning[FORALL] = set(graph.nodes) - result.winning[EXISTS]
    return result


def strategy_is_sound(game, result):
    """Following Exists' strategy inside her region, every play is won by Exists"""
    graph = game.graph
    region = result.winning[EXISTS]
    strategy = result.strategy[EXISTS]
    restricted = nx.DiGraph()
    for v in region:
        restricted.add_node(v, **graph.nodes[v])
    for v in region:
        if graph.nodes[v]['owner'] == EXISTS:
            if graph.out_degree(v) == 0 or v not in strategy or strategy[v] not in region:
                return False
            restricted.add_edge(v, strategy[v])
        else:
            for w in graph.successors(v):
                if w not in region:
                    return False
                restricted.add_edge(v, w)
    return not odd_cycle_positions(restricted)


def accepts(automaton, model, start, mode='tree', caps=None, prune=True):
    """Whether Exists wins the acceptance game from (initial state, start)"""
    game = build_acceptance_game(automaton, model, start, mode, caps, prune)
    result = solve_parity(game)
    return game.start in result.winning[EXISTS]


def game_to_dot(game, result=None):
    """DOT text with nodes in sorted label order"""
    names = {v: f'n{i}' for i, v in enumerate(sorted(game.graph.nodes, key=label))}
    lines = ['digraph game {']
    for v in sorted(game.graph.nodes, key=label):
        shape = 'box' if game.owner(v) == EXISTS else 'diamond'
        text = label(v).replace('"', "'")
        extra = ''
        if result is not None:
            extra = f', winner="{result.winner(v)}"'
        start = ', peripheries=2' if v == game.start else ''
        lines.append(f'  {names[v]} [label="{text} / {game.priority(v)}", shape={shape}{start}{extra}];')
    for v, w in sorted(game.graph.edges, key=lambda e: (names[e[0]], names[e[1]])):
        lines.append(f'  {names[v]} -> {names[w]};')
    lines.append('}')
    return '\n'.join(lines) + '\n'


def scattered_report(game, result):
    """Tree nodes visited with several automaton states under Exists' winning strategy"""
    if game.start not in result.winning[EXISTS]:
        return {'applicable': False, 'scattered': None, 'clashes': {}}
    seen = {game.start}
    queue = deque([game.start])
    visits = {}
    while queue:
        v = queue.popleft()
        if v[0] == EXISTS:
            visits.setdefault(v[2], set()).add(v[1])
            nxt = [result.strategy[EXISTS][v]] if v in result.strategy[EXISTS] else []
        else:
            nxt = list(game.graph.successors(v))
        for w in nxt:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    clashes = {label(s): sort_labels(a) for s, a in visits.items() if len(a) > 1}
    return {'applicable': True, 'scattered': not clashes, 'clashes': {k: [label(x) for x in v] for k, v in clashes.items()}}
