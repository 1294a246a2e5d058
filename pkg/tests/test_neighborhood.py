"""
Tests for monotone neighbourhood models: bisimulations, the global adapter, MMSO and star signatures
"""

import pytest

from config.settings import Caps
from models import logic as L
from models.errors import CapExceeded, DomainError
from models.functor import MON, MONSTAR, POWERSET, minimize_family
from models.one_step import Lift, Var
from models.tmodel import TModel
from services.functor_service import make_tobject
from services.logic_service import eval_mso, eval_mu
from services.neighborhood_service import (
    atomic_profile, basic_members, counterexample_demo, deglobalize, eval_mmso, eval_mu_global, globalize,
    largest_nbhd_bisim, m_signature, mmso_to_mso, models_match, parse_mmso, pointed_star, to_global_mstar,
    underlying_m, verify_nbhd_bisim
)
from services.parser_service import parse_mu, print_one_step
from services.uniform_service import MonStarConstruction, PowersetConstruction


def nbhd_model(families, **valuation):
    """Monotone neighbourhood model from a table of neighbourhood families"""
    carrier = frozenset(families)
    sigma = {s: make_tobject(MON, carrier, minimize_family(family)) for s, family in families.items()}
    return TModel(MON, carrier, sigma, valuation)


@pytest.fixture
def swap():
    """a and b each have the other as their only neighbourhood"""
    return nbhd_model({'a': [{'b'}], 'b': [{'a'}]})


@pytest.fixture
def single():
    """One state that is its own neighbourhood"""
    return nbhd_model({'c': [{'c'}]})


@pytest.fixture
def nb():
    """s0 has neighbourhoods {s1} and {s2}, s1 has the empty one, s2 has none; p holds at s1"""
    return nbhd_model({'s0': [{'s1'}, {'s2'}], 's1': [set()], 's2': []}, p={'s1'})


@pytest.fixture
def star_alpha():
    """M* value over {x, y} with the single neighbourhood {x}"""
    carrier = frozenset({'x', 'y'})
    return make_tobject(MONSTAR, carrier, (frozenset({frozenset({'x'})}), carrier))


class TestBisimulation:
    """Test cases for neighbourhood bisimulations"""

    def test_largest_bisimulation(self, swap, single):
        """Both states of the swap relate to the single loop"""
        bisim = largest_nbhd_bisim(swap, single)
        assert bisim.relation == frozenset({('a', 'c'), ('b', 'c')})
        assert bisim.related('a', 'c')
        assert verify_nbhd_bisim(swap, single, bisim.relation) == []

    def test_global_bisimulation(self, swap, single):
        """Total and surjective relations are global"""
        assert largest_nbhd_bisim(swap, single, is_global=True).holds

    def test_empty_neighbourhood_breaks_back_clause(self, swap):
        """A state with the empty neighbourhood matches nothing here"""
        dead = nbhd_model({'d': [set()]})
        bisim = largest_nbhd_bisim(swap, dead, is_global=True)
        assert bisim.relation == frozenset()
        assert not bisim.holds
        failures = verify_nbhd_bisim(swap, dead, {('a', 'd')})
        assert failures == [{'pair': ['a', 'd'], 'clause': 'back'}]

    def test_totality_failures(self, swap, single):
        """Global checks report unrelated states"""
        failures = verify_nbhd_bisim(swap, single, {('a', 'c')}, is_global=True)
        clauses = {f['clause'] for f in failures}
        assert 'forth' in clauses
        assert {'state': 'b', 'clause': 'total'} in failures

    def test_colours_must_agree(self, single):
        """Related states carry the same colours"""
        coloured = nbhd_model({'c': [{'c'}]}, p={'c'})
        assert largest_nbhd_bisim(single, coloured).relation == frozenset()

    def test_bisimilar_states_agree(self, swap, single):
        """Bisimilar states satisfy the same formulas"""
        for text in ('nu x . lift box(x)', 'mu x . lift dia(x)', 'lift box(lift dia(top))'):
            formula = parse_mu(text)
            assert eval_mu(formula, swap, 'a') == eval_mu(formula, single, 'c')

    def test_needs_neighbourhood_models(self, single):
        """Powerset models are refused"""
        carrier = frozenset({'s'})
        kripke = TModel(POWERSET, carrier, {'s': make_tobject(POWERSET, carrier, frozenset())})
        with pytest.raises(DomainError):
            largest_nbhd_bisim(kripke, single)


class TestGlobalAdapter:
    """Test cases for the M* view of neighbourhood models"""

    def test_round_trip(self, nb):
        """Forgetting the support gives the model back"""
        mstar = to_global_mstar(nb)
        assert mstar.spec == MONSTAR
        assert all(alpha.value[1] == nb.carrier for alpha in mstar.sigma.values())
        back = underlying_m(mstar)
        assert all(back.sigma[s].value == nb.sigma[s].value for s in nb.carrier)

    def test_underlying_needs_mstar(self, nb):
        """Only M* models have an underlying M model"""
        with pytest.raises(DomainError):
            underlying_m(nb)

    def test_globalize(self):
        """Global modalities become E and its dual"""
        formula = parse_mu('[some] p and [all] lift box(p)')
        globalized = globalize(formula)
        assert L.MuModal('E', (L.MuVar('p'),)) in L.mu_subformulas(globalized)
        assert not any(isinstance(n, L.MuGlobal) for n in L.mu_subformulas(globalized))
        assert deglobalize(globalized) == formula

    @pytest.mark.parametrize('text', [
        '[some] p',
        '[all] (p or lift dia(p))',
        'lift box(p) and [some] lift box(bot)',
        'nu x . [all] lift dia(top) and x'
    ])
    def test_global_semantics_agree(self, nb, text):
        """Global modalities on M match E on the adapted M* model"""
        formula = parse_mu(text)
        mstar = to_global_mstar(nb)
        for s in nb.carrier:
            assert eval_mu_global(formula, nb, s) == eval_mu(globalize(formula), mstar, s)


class TestMmso:
    """Test cases for monadic second-order logic on neighbourhood models"""

    def test_box_atom(self, nb):
        """box(x, p) asks for a neighbourhood inside p"""
        formula = parse_mmso('exists x . sr(x) and box(x, p)')
        assert eval_mmso(formula, nb, 's0')
        assert eval_mmso(formula, nb, 's1')
        assert not eval_mmso(formula, nb, 's2')

    @pytest.mark.parametrize('text', [
        'exists x . sr(x) and box(x, p)',
        'forall x . sr(x) -> exists y . box(x, y) and y sub p',
        'exists x . box(x, p) and not em(x)'
    ])
    def test_translation_agrees(self, nb, text):
        """MMSO and its MSO translation hold at the same states"""
        formula = parse_mmso(text)
        translated = mmso_to_mso(formula)
        assert not any(isinstance(n, L.NbhdBox) for n in L.mu_subformulas(translated))
        for s in nb.carrier:
            assert eval_mmso(formula, nb, s) == eval_mso(translated, nb, s)

    def test_lifting_atoms_rejected(self, nb):
        """Only the neighbourhood box is available"""
        with pytest.raises(DomainError):
            parse_mmso('exists x . lift box(x, p)')
        with pytest.raises(DomainError):
            eval_mmso(L.MsoLift('dia', 'p', ('p',)), nb, 's0')

    def test_unbound_variable(self, nb):
        """Free variables must be interpreted"""
        with pytest.raises(DomainError):
            eval_mmso(parse_mmso('q sub p'), nb, 's0')

    def test_quantifier_cap(self, nb):
        """Quantifying over too many states is refused"""
        with pytest.raises(CapExceeded):
            eval_mmso(parse_mmso('exists x . sr(x)'), nb, 's0', caps=Caps(quantifier=2))


class TestSignatures:
    """Test cases for signatures of M* star models"""

    def test_basic_members(self, star_alpha):
        """One basic member per neighbourhood inside the support and per copy"""
        pointed = pointed_star(MonStarConstruction(m=1, k=1), star_alpha, {'a': {'x'}})
        assert len(basic_members(pointed)) == 2
        pointed = pointed_star(MonStarConstruction(m=2, k=1), star_alpha, {'a': {'x'}})
        assert len(basic_members(pointed)) == 4

    def test_signature_counts(self, star_alpha):
        """Counts per propositional type are capped"""
        pointed = pointed_star(MonStarConstruction(m=1, k=1), star_alpha, {'a': {'x'}})
        basic = basic_members(pointed)[(frozenset({'x'}), 0)]
        assert m_signature(pointed, basic, 3) == {frozenset(): 0, frozenset({'a'}): 2}
        assert m_signature(pointed, basic, 1) == {frozenset(): 0, frozenset({'a'}): 1}

    def test_signature_of_non_member(self, star_alpha):
        """Only basic members have signatures"""
        pointed = pointed_star(MonStarConstruction(m=1, k=1), star_alpha, {'a': {'x'}})
        with pytest.raises(DomainError):
            m_signature(pointed, frozenset({'junk'}), 2)

    def test_matching(self, star_alpha):
        """A star model matches itself but not a recoloured copy"""
        construction = MonStarConstruction(m=2, k=1)
        left = pointed_star(construction, star_alpha, {'a': {'x'}})
        same = pointed_star(construction, star_alpha, {'a': {'x'}})
        other = pointed_star(construction, star_alpha, {'a': {'y'}})
        assert models_match(left, same, 2)
        assert not models_match(left, other, 2)

    def test_matching_needs_equal_truncation(self, star_alpha):
        """Star models built with different m are not compared"""
        left = pointed_star(MonStarConstruction(m=1, k=1), star_alpha, {'a': {'x'}})
        right = pointed_star(MonStarConstruction(m=2, k=1), star_alpha, {'a': {'x'}})
        with pytest.raises(DomainError):
            models_match(left, right, 2)

    def test_needs_monstar_construction(self):
        """Signatures live on M* star models"""
        alpha = make_tobject(POWERSET, frozenset({'x'}), frozenset({'x'}))
        with pytest.raises(DomainError):
            pointed_star(PowersetConstruction(), alpha, {})

    def test_atomic_profile(self, star_alpha):
        """Atomic formulas are read off the star model"""
        pointed = pointed_star(MonStarConstruction(m=1, k=1), star_alpha, {'a': {'x'}, 'b': {'y'}})
        profile = atomic_profile(pointed)
        assert len(profile) == 10
        assert profile[print_one_step(Lift('box', (Var('a'),)))]
        assert not profile[print_one_step(Lift('box', (Var('b'),)))]
        assert profile[print_one_step(Lift('E', (Var('b'),)))]


class TestCounterexample:
    """Test cases for the failed-adequacy replay"""

    def test_replay_succeeds(self):
        """Every checkable step holds"""
        report = counterexample_demo()
        assert report['success'], report['steps']
        assert [s['step'] for s in report['steps']] == [
            'image', 'small-support', 'supports-contain-v*', 'adequacy', 'global-variant-matches'
        ]

    def test_violation_is_reported(self):
        """The adequacy step carries the distinguishing formula's verdicts"""
        report = counterexample_demo()
        violation = report['steps'][3]['violation']
        assert violation['source_truth'] != violation['target_truth']


if __name__ == '__main__':
    pytest.main([__file__])
