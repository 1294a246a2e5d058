"""
Tests for uniform constructions, star liftings, adequacy and unravelling
"""

import pytest

from generate_sample_data import BAG_AUTOMATA, SO_AUTOMATA
from models.errors import CapExceeded, DomainError
from models.functor import BAG, MON, MONSTAR, POWERSET, Const, Exp, Id, Product, TObject, make_bag
from models.tmodel import TModel
from services.functor_service import apply_map, enumerate_tobjects, make_tobject, map_value, subsets
from services.game_service import accepts
from services.io_service import automaton_from_json
from services.lifting_service import builtin_liftings
from services.parser_service import parse_one_step
from services.uniform_service import (
    BagConstruction, MonStarConstruction, NaiveMonConstruction, PolynomialConstruction, PowersetConstruction,
    StarCache, StarLifting, UniformConstruction, adequacy_violation, check_adequacy, construct_star, exhaustive_maps,
    find_strong_adequacy_bijection, get_construction, leaf_value, naive_mon_counterexample, so_to_ml_lifting,
    translate_automaton, unravel
)


@pytest.fixture
def carrier():
    """Two point carrier"""
    return frozenset({'x', 'y'})


@pytest.fixture
def bag_model():
    """s0 -> 2 s1 + s2, s1 -> s2, s2 a leaf; p holds at s2"""
    carrier = frozenset({'s0', 's1', 's2'})
    sigma = {
        's0': TObject(BAG, carrier, make_bag({'s1': 2, 's2': 1})),
        's1': TObject(BAG, carrier, make_bag({'s2': 1})),
        's2': TObject(BAG, carrier, make_bag({}))
    }
    return TModel(BAG, carrier, sigma, {'p': {'s2'}})


class TestStarConstructions:
    """Test cases for building star structures"""

    @pytest.mark.parametrize('construction', [
        PowersetConstruction(), BagConstruction(), MonStarConstruction(),
        PolynomialConstruction(Product(Id(), Const(frozenset({'0', '1'})))),
        PolynomialConstruction(Exp(Id(), frozenset({'l', 'r'})))
    ])
    def test_star_law(self, carrier, construction):
        """T h maps the star structure back onto alpha"""
        for alpha in enumerate_tobjects(construction.spec, carrier):
            star = construct_star(construction, alpha)
            assert map_value(construction.spec, star.h, star.alpha.value) == alpha.value

    def test_powerset_copies(self, carrier):
        """Each successor gets m copies"""
        alpha = make_tobject(POWERSET, carrier, frozenset({'x'}))
        assert len(PowersetConstruction(m=3).star(alpha).carrier) == 3

    def test_bag_unfolds_counts(self, carrier):
        """Each unit of multiplicity becomes its own point"""
        alpha = make_tobject(BAG, carrier, make_bag({'x': 2, 'y': 1}))
        star = BagConstruction().star(alpha)
        assert len(star.carrier) == 3
        assert all(n == 1 for _, n in star.alpha.value)

    def test_monstar_keeps_support(self):
        """Points outside every neighbourhood still appear in the star carrier"""
        carrier = frozenset({'x', 'y'})
        alpha = make_tobject(MONSTAR, carrier, (frozenset({frozenset({'x'})}), carrier))
        star = MonStarConstruction(m=1, k=0).star(alpha)
        assert {star.h[p] for p in star.carrier} == carrier

    def test_plain_neighbourhoods_rejected(self):
        """M has no adequate uniform construction"""
        with pytest.raises(DomainError):
            UniformConstruction(MON)

    def test_polynomial_construction_needs_polynomial_functor(self):
        """Powerset is not exponential polynomial"""
        with pytest.raises(DomainError):
            PolynomialConstruction(POWERSET)

    def test_registry(self):
        """Constructions are looked up by name"""
        assert get_construction('bag').spec == BAG
        with pytest.raises(DomainError):
            get_construction('tree')
        with pytest.raises(DomainError):
            get_construction('polynomial')
        with pytest.raises(DomainError):
            get_construction('powerset', m=0)

    def test_wrong_functor(self, carrier):
        """A construction only accepts values of its functor"""
        with pytest.raises(DomainError):
            BagConstruction().star(make_tobject(POWERSET, carrier, frozenset()))

    def test_cache_hits(self, carrier):
        """Repeated stars come from the cache"""
        cache = StarCache()
        alpha = make_tobject(POWERSET, carrier, frozenset({'x'}))
        construction = PowersetConstruction()
        assert cache.star(construction, alpha) is cache.star(construction, alpha)
        assert cache.hits == 1


class TestStarLiftings:
    """Test cases for liftings induced on star structures"""

    def test_existential_diamond_is_diamond(self, carrier):
        """exists z <= a with dia(z) induces the diamond"""
        formula = parse_one_step('exists z . z sub a and lift dia(z)')
        lifting = so_to_ml_lifting(formula, ('a',), PowersetConstruction())
        dia = builtin_liftings(POWERSET).resolve('dia')
        for alpha in enumerate_tobjects(POWERSET, carrier):
            for a in subsets(carrier):
                assert lifting.member(alpha, [a]) == dia.member(alpha, [a])

    def test_counting_on_stars(self, carrier):
        """Two disjoint witnesses exist on the star of any nonempty set"""
        formula = parse_one_step('exists c . exists d . disjoint(c, d) and c sub a and d sub a'
                                 ' and lift dia(c) and lift dia(d)')
        lifting = StarLifting(formula, ('a',), PowersetConstruction(m=2, k=4))
        alpha = make_tobject(POWERSET, carrier, frozenset({'x'}))
        assert lifting.member(alpha, [{'x'}])
        assert not lifting.member(alpha, [{'y'}])

    def test_large_truncation_is_stable(self, carrier):
        """A truncation already above the stabilisation bound still answers"""
        lifting = so_to_ml_lifting(parse_one_step('lift box(a)'), ('a',), PowersetConstruction(m=8, k=1))
        alpha = make_tobject(POWERSET, carrier, frozenset({'x'}))
        assert lifting.member(alpha, [{'x'}])
        assert not lifting.member(alpha, [{'y'}])

    def test_truncation_grows_until_stable(self, carrier):
        """Too few copies are doubled until two witnesses fit"""
        formula = parse_one_step('exists c . exists d . disjoint(c, d) and c sub a and d sub a'
                                 ' and lift dia(c) and lift dia(d)')
        lifting = StarLifting(formula, ('a',), PowersetConstruction(m=1, k=2))
        alpha = make_tobject(POWERSET, carrier, frozenset({'x'}))
        assert lifting.member(alpha, [{'x'}])

    def test_depth_above_k(self):
        """Formulas deeper than k are refused"""
        formula = parse_one_step('exists c . exists d . c sub d and lift dia(c)')
        with pytest.raises(DomainError):
            StarLifting(formula, (), PowersetConstruction(k=1))

    def test_non_monotone_formula(self):
        """Only monotone formulas induce liftings"""
        with pytest.raises(DomainError):
            StarLifting(parse_one_step('not lift dia(a)'), ('a',), PowersetConstruction())

    def test_unbound_variable(self):
        """All free variables must be arguments"""
        with pytest.raises(DomainError):
            StarLifting(parse_one_step('lift dia(a)'), (), PowersetConstruction())


class TestAdequacy:
    """Test cases for adequacy searches"""

    def test_bag_is_strongly_adequate(self):
        """No violation and a bijection for every sample"""
        report = check_adequacy(BagConstruction(), sample_budget=15, seed=3, strong=True)
        assert report['adequate']
        assert report['strong_checked'] == report['checked']
        assert not report['strong_failures']

    @pytest.mark.parametrize('construction', [PowersetConstruction(), MonStarConstruction(m=1, k=1)],
                             ids=lambda c: c.name)
    def test_adequate_constructions(self, construction):
        """Sampled maps show no violation"""
        report = check_adequacy(construction, sample_budget=15, seed=5, max_size=2)
        assert report['adequate'], report['violations']

    def test_naive_neighbourhood_construction_fails(self):
        """The naive construction breaks adequacy on the known data"""
        alpha, f, codomain, valuation, formula = naive_mon_counterexample()
        found = adequacy_violation(NaiveMonConstruction(), alpha, f, codomain, valuation, formula)
        assert found is not None
        assert found['source_truth'] != found['target_truth']

    def test_powerset_has_no_strong_bijection_when_collapsing(self):
        """Identifying points shrinks the powerset star"""
        alpha = make_tobject(POWERSET, frozenset({'x', 'z'}), frozenset({'x', 'z'}))
        f = {'x': 'u', 'z': 'u'}
        assert find_strong_adequacy_bijection(PowersetConstruction(), alpha, f, frozenset({'u'})) is None

    def test_bag_bijection(self):
        """Bag stars along a map are in bijection"""
        alpha = make_tobject(BAG, frozenset({'x', 'z'}), make_bag({'x': 1, 'z': 2}))
        f = {'x': 'u', 'z': 'u'}
        g = find_strong_adequacy_bijection(BagConstruction(), alpha, f, frozenset({'u'}))
        assert g is not None
        beta = apply_map(BAG, f, alpha, frozenset({'u'}))
        assert beta.value == make_bag({'u': 3})

    def test_exhaustive_maps(self):
        """Every map is listed once"""
        maps = list(exhaustive_maps({'a', 'b', 'c'}, {'0', '1'}))
        assert len(maps) == 8
        assert len({tuple(sorted(m.items())) for m in maps}) == 8


class TestTranslation:
    """Test cases for translating second-order automata into modal ones"""

    def test_translated_automaton_is_modal(self):
        """States and priorities survive, transitions become star liftings"""
        automaton = automaton_from_json(SO_AUTOMATA[0])
        translated = translate_automaton(automaton, PowersetConstruction())
        assert translated.is_ml
        assert translated.priority('a') == automaton.priority('a')

    def test_non_monotone_automaton(self):
        """Translation needs monotone transitions"""
        automaton = automaton_from_json({
            'states': ['a'], 'initial': 'a', 'priority': {'a': 0}, 'chromatic': [],
            'delta': {'a': {'': 'not lift dia(a)'}}
        })
        with pytest.raises(DomainError):
            translate_automaton(automaton, PowersetConstruction())

    @pytest.mark.parametrize('data', BAG_AUTOMATA, ids=lambda d: d['name'])
    def test_unravelled_acceptance(self, bag_model, data):
        """The automaton on the unravelling agrees with its translation on the model"""
        automaton = automaton_from_json(data)
        translated = translate_automaton(automaton, BagConstruction())
        for point in ('s0', 's1', 's2'):
            unravelled = unravel(bag_model, point, BagConstruction(), depth=4)
            tree = unravelled.tree
            assert accepts(automaton, tree, tree.root) == accepts(translated, bag_model, point, mode='full')


class TestUnravelling:
    """Test cases for tree unravellings"""

    def test_homomorphism(self, bag_model):
        """gamma is a homomorphism on inner nodes"""
        unravelled = unravel(bag_model, 's0', BagConstruction(), depth=4)
        assert not unravelled.frontier
        assert unravelled.homomorphism_failures() == []
        assert unravelled.tree.is_tree()
        assert unravelled.image() == bag_model.carrier

    def test_node_count(self, bag_model):
        """Children are the star points, one per unit of multiplicity"""
        unravelled = unravel(bag_model, 's0', BagConstruction(), depth=4)
        assert len(unravelled.tree.carrier) == 6

    def test_valuation_pulled_back(self, bag_model):
        """Nodes carry the colours of their images"""
        tree = unravel(bag_model, 's0', BagConstruction(), depth=4).tree
        assert all(node[-1][0] == 's2' for node in tree.model.valuation['p'])

    def test_depth_cut(self):
        """Cyclic models are cut at the depth bound with leaf structures"""
        carrier = frozenset({'s'})
        model = TModel(POWERSET, carrier, {'s': TObject(POWERSET, carrier, frozenset({'s'}))})
        unravelled = unravel(model, 's', PowersetConstruction(m=1), depth=3)
        assert len(unravelled.frontier) == 1
        (leaf,) = unravelled.frontier
        assert unravelled.tree.model.sigma[leaf].value == leaf_value(POWERSET)

    def test_node_cap(self):
        """Too many nodes raise CapExceeded"""
        carrier = frozenset({'s'})
        model = TModel(POWERSET, carrier, {'s': TObject(POWERSET, carrier, frozenset({'s'}))})
        with pytest.raises(CapExceeded):
            unravel(model, 's', PowersetConstruction(m=2), depth=10, max_nodes=100)

    def test_invalid_requests(self, bag_model):
        """Depth, point and functor are validated"""
        with pytest.raises(DomainError):
            unravel(bag_model, 's0', BagConstruction(), depth=0)
        with pytest.raises(DomainError):
            unravel(bag_model, 'nowhere', BagConstruction(), depth=2)
        with pytest.raises(DomainError):
            unravel(bag_model, 's0', PowersetConstruction(), depth=2)

    def test_no_leaf_for_plain_neighbourhoods(self):
        """Leaf structures exist only for functors with an empty-support value"""
        with pytest.raises(DomainError):
            leaf_value(MON)


if __name__ == '__main__':
    pytest.main([__file__])
