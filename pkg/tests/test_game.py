"""
Tests for parity game solving and acceptance games
"""

from itertools import islice

import numpy as np
import pytest

from config.settings import Caps
from generate_sample_data import enumerate_powerset_trees, kripke_tree, random_game
from models.automaton import EXISTS, FORALL, Automaton, ParityGame
from models.errors import CapExceeded, DomainError
from models.functor import POWERSET
from services.construction_service import compile_mso, compile_mu, complement_aut, monotonize
from services.game_service import (
    accepts, attractor, build_acceptance_game, disjoint_valuations, game_to_dot, scattered_report, solve_parity,
    solve_parity_bruteforce, strategy_is_sound
)
from services.lifting_service import builtin_liftings
from services.logic_service import eval_mso, eval_mu
from services.parser_service import parse_mso, parse_mu, parse_one_step


@pytest.fixture
def liftings():
    """Powerset box and diamond"""
    return builtin_liftings(POWERSET)


@pytest.fixture
def tree():
    """n -> n0, n1 and n0 -> n00, with p only at n00"""
    frame = {'n': ['n0', 'n1'], 'n0': ['n00'], 'n1': [], 'n00': []}
    colors = {'n': set(), 'n0': set(), 'n1': set(), 'n00': {'p'}}
    return kripke_tree(frame, colors, variables=('p',))


def loop(owner, priority):
    return ParityGame.from_edges({0: owner}, {0: priority}, [(0, 0)], start=0)


class TestParitySolver:
    """Test cases for Zielonka's recursion"""

    def test_even_loop(self):
        """An even self-loop is won by Exists"""
        assert solve_parity(loop(FORALL, 2)).winner(0) == EXISTS

    def test_odd_loop(self):
        """An odd self-loop is won by Forall"""
        assert solve_parity(loop(EXISTS, 3)).winner(0) == FORALL

    def test_stuck_players_lose(self):
        """A player without moves loses"""
        game = ParityGame.from_edges({0: EXISTS, 1: FORALL}, {0: 0, 1: 0}, [], start=0)
        result = solve_parity(game)
        assert result.winner(0) == FORALL
        assert result.winner(1) == EXISTS

    def test_choice_of_cycle(self):
        """Exists picks the even cycle"""
        owners = {0: EXISTS, 1: FORALL, 2: FORALL}
        priorities = {0: 0, 1: 1, 2: 2}
        game = ParityGame.from_edges(owners, priorities, [(0, 1), (0, 2), (1, 0), (2, 0)], start=0)
        result = solve_parity(game)
        assert result.winning[EXISTS] == {0, 1, 2}
        assert result.strategy[EXISTS][0] == 2

    def test_unknown_owner(self):
        """Owners are Exists or Forall"""
        with pytest.raises(DomainError):
            ParityGame.from_edges({0: 'X'}, {0: 0}, [])

    def test_attractor(self):
        """Forall positions join once every move leads in"""
        owners = {0: FORALL, 1: FORALL, 2: EXISTS}
        game = ParityGame.from_edges(owners, {0: 0, 1: 0, 2: 0}, [(0, 2), (1, 2), (1, 0)])
        region, strategy = attractor(game.graph, set(game.graph.nodes), {2}, EXISTS)
        assert region == {0, 1, 2}
        assert strategy == {}

    @pytest.mark.parametrize('seed', range(12))
    def test_agrees_with_bruteforce(self, seed):
        """Zielonka and strategy enumeration find the same regions"""
        game = random_game(np.random.default_rng(seed), size=6, max_priority=3)
        result = solve_parity(game)
        reference = solve_parity_bruteforce(game)
        assert result.winning[EXISTS] == reference.winning[EXISTS]
        assert strategy_is_sound(game, result)


class TestAcceptanceGame:
    """Test cases for automaton acceptance"""

    @pytest.mark.parametrize('text', [
        'mu x . p or lift dia(x)',
        'nu x . not p and lift box(x)',
        'lift dia(top) and lift box(lift box(bot))',
        'mu x . lift box(x)'
    ])
    def test_full_mode_matches_semantics(self, tree, liftings, text):
        """Acceptance in the full-carrier game agrees with evaluation"""
        formula = parse_mu(text)
        automaton = compile_mu(formula, liftings)
        for s in tree.carrier:
            assert accepts(automaton, tree.model, s, mode='full') == eval_mu(formula, tree.model, s)

    def test_tree_mode_matches_full_mode(self, tree, liftings):
        """On a tree the support-restricted game gives the same verdict"""
        automaton = compile_mu(parse_mu('mu x . p or lift dia(x)'), liftings)
        assert accepts(automaton, tree, 'n', mode='tree')
        assert accepts(automaton, tree.model, 'n', mode='full')

    def test_second_order_automaton(self, tree, liftings):
        """MSO automata run in tree mode"""
        formula = parse_mso('exists x . sr(x) and lift dia(x, p)')
        automaton = compile_mso(formula, liftings)
        assert accepts(automaton, tree, 'n0', mode='tree') == eval_mso(formula, tree.model, 'n0')

    @pytest.mark.parametrize('text', [
        'exists x . sr(x) and lift dia(x, p)',
        'forall x . sr(x) -> lift box(x, p)',
        'exists q . q sub p and (exists x . sr(x) and lift dia(x, q))',
        'p sub p'
    ])
    def test_complement_of_mso_automaton(self, liftings, text):
        """The complement of a compiled MSO automaton accepts exactly where the formula fails"""
        formula = parse_mso(text)
        complement = complement_aut(monotonize(compile_mso(formula, liftings)))
        assert complement.flavor == 'so1'
        for tree in enumerate_powerset_trees(3, 2):
            assert accepts(complement, tree, tree.root) != eval_mso(formula, tree.model, tree.root)

    def test_full_mode_needs_modal_automaton(self, tree, liftings):
        """Second-order automata have no full-carrier game"""
        automaton = compile_mso(parse_mso('p sub p'), liftings)
        with pytest.raises(DomainError):
            accepts(automaton, tree.model, 'n', mode='full')

    def test_tree_mode_needs_frame(self, tree, liftings):
        """Tree mode refuses plain models"""
        automaton = compile_mu(parse_mu('p'), liftings)
        with pytest.raises(DomainError):
            accepts(automaton, tree.model, 'n', mode='tree')

    def test_unknown_mode(self, tree, liftings):
        """Only full and tree modes exist"""
        with pytest.raises(DomainError):
            accepts(compile_mu(parse_mu('p'), liftings), tree, 'n', mode='partial')

    def test_move_cap(self, tree, liftings):
        """Too many candidate valuations raise CapExceeded"""
        automaton = compile_mu(parse_mu('lift dia(p)'), liftings)
        with pytest.raises(CapExceeded):
            accepts(automaton, tree.model, 'n', mode='full', caps=Caps(moves=1))

    def test_disjoint_candidates_respect_move_cap(self, liftings):
        """Special basic enumeration stops at the cap before building any valuation"""
        states = ['a', 'b', 'c', 'd', 'e', 'f']
        body = parse_one_step(' or '.join(f'lift dia({s})' for s in states))
        automaton = Automaton.from_table(
            states, 'a', {s: 0 for s in states}, (), 'ml1', liftings,
            {s: {frozenset(): body} for s in states}, special_basic=True
        )
        frame = {'n': ['n0', 'n1', 'n2', 'n3'], 'n0': [], 'n1': [], 'n2': [], 'n3': []}
        wide = kripke_tree(frame, {x: set() for x in frame}, variables=())
        with pytest.raises(CapExceeded):
            accepts(automaton, wide, 'n', caps=Caps(moves=1000))
        assert accepts(automaton, wide, 'n', caps=Caps(moves=5000)) is False

    def test_disjoint_valuations_are_lazy(self):
        """Large windows yield their first valuations without enumerating the rest"""
        variables = [f'v{i}' for i in range(40)]
        points = [f'x{i}' for i in range(6)]
        first = list(islice(disjoint_valuations(variables, points), 41))
        assert all(not z for z in first[0].values())
        assert all(sum(len(z) for z in v.values()) == 1 for v in first[1:])
        small = list(disjoint_valuations(['a', 'b'], ['x', 'y']))
        assert len(small) == 9
        assert all(not (v['a'] & v['b']) for v in small)

    def test_pruning_keeps_verdict(self, tree, liftings):
        """Dropping non-minimal valuations does not change acceptance"""
        automaton = compile_mu(parse_mu('nu x . lift box(x) and (p or lift dia(top) or lift box(bot))'), liftings)
        for s in tree.carrier:
            assert accepts(automaton, tree.model, s, 'full', prune=True) == \
                accepts(automaton, tree.model, s, 'full', prune=False)


class TestGameOutput:
    """Test cases for game export"""

    def test_dot_is_deterministic(self, tree, liftings):
        """DOT text is stable and marks the start position"""
        automaton = compile_mu(parse_mu('mu x . p or lift dia(x)'), liftings)
        game = build_acceptance_game(automaton, tree, 'n')
        result = solve_parity(game)
        text = game_to_dot(game, result)
        assert text.startswith('digraph game {')
        assert text.count('peripheries=2') == 1
        assert text == game_to_dot(game, result)

    def test_scattered_report(self, tree, liftings):
        """Winning plays of a mu automaton on a tree are reported"""
        automaton = compile_mu(parse_mu('lift dia(p) or lift dia(lift dia(p))'), liftings)
        game = build_acceptance_game(automaton, tree, 'n')
        report = scattered_report(game, solve_parity(game))
        assert report['applicable']
        assert isinstance(report['scattered'], bool)


if __name__ == '__main__':
    pytest.main([__file__])
