"""
Tests for functor descriptions, functorial action and supports
"""

import numpy as np
import pytest

from config.settings import Caps
from models.errors import CapExceeded, DomainError
from models.functor import (
    BAG, MON, MONSTAR, POWERSET, Const, Coproduct, Exp, Id, Product, TObject, in_upset, label,
    make_bag, minimize_family
)
from services.functor_service import (
    antichains, apply_map, enumerate_tobjects, enumerate_values, make_tobject, map_value, minimal_supports,
    random_tobject, restrict_to_support, subsets, supports
)


@pytest.fixture
def carrier():
    """Three point carrier"""
    return frozenset({'x', 'y', 'z'})


@pytest.fixture
def collapse():
    """Map identifying x and z"""
    return {'x': 'u', 'y': 'v', 'z': 'u'}


class TestLabels:
    """Test cases for deterministic labels"""

    def test_set_label_is_sorted(self):
        """Sets print sorted whatever their construction order"""
        assert label(frozenset({'b', 'a'})) == '{a,b}'

    def test_nested_tuple_label(self):
        """Tuples print in order and recurse"""
        assert label(('x', 1, frozenset())) == '(x,1,{})'


class TestValues:
    """Test cases for value validation"""

    def test_powerset_value_outside_carrier(self, carrier):
        """Subsets must stay inside the carrier"""
        with pytest.raises(DomainError):
            make_tobject(POWERSET, carrier, frozenset({'w'}))

    def test_neighbourhood_value_must_be_minimal(self, carrier):
        """Monotone neighbourhoods are stored as their minimal antichain"""
        with pytest.raises(DomainError):
            make_tobject(MON, carrier, frozenset({frozenset({'x'}), frozenset({'x', 'y'})}))

    def test_monstar_support_must_cover_family(self, carrier):
        """The support component contains every minimal neighbourhood"""
        with pytest.raises(DomainError):
            make_tobject(MONSTAR, carrier, (frozenset({frozenset({'x'})}), frozenset({'y'})))

    def test_bag_counts_positive(self):
        """Zero counts are dropped and negative ones rejected"""
        assert make_bag({'x': 0, 'y': 2}) == frozenset({('y', 2)})
        with pytest.raises(DomainError):
            make_bag({'x': -1})

    def test_empty_constant_functor(self):
        """A constant functor needs at least one value"""
        with pytest.raises(DomainError):
            Const(frozenset())


class TestFunctorialAction:
    """Test cases for T f"""

    def test_powerset_image(self, carrier, collapse):
        """Direct image of a subset"""
        t = make_tobject(POWERSET, carrier, frozenset({'x', 'z'}))
        assert apply_map(POWERSET, collapse, t).value == frozenset({'u'})

    def test_bag_adds_counts(self, carrier, collapse):
        """Bag counts of identified points add up"""
        t = make_tobject(BAG, carrier, make_bag({'x': 1, 'z': 2}))
        assert apply_map(BAG, collapse, t).value == make_bag({'u': 3})

    def test_neighbourhood_image_is_minimized(self, collapse):
        """Images of minimal neighbourhoods are minimized again"""
        carrier = frozenset({'x', 'y', 'z'})
        t = make_tobject(MON, carrier, frozenset({frozenset({'x', 'y'}), frozenset({'x', 'z'})}))
        assert apply_map(MON, collapse, t).value == frozenset({frozenset({'u'})})

    def test_monstar_maps_support(self, collapse):
        """The support component is mapped pointwise"""
        carrier = frozenset({'x', 'y', 'z'})
        t = make_tobject(MONSTAR, carrier, (frozenset({frozenset({'x'})}), frozenset({'x', 'y'})))
        assert apply_map(MONSTAR, collapse, t).value == (frozenset({frozenset({'u'})}), frozenset({'u', 'v'}))

    def test_polynomial_value(self, collapse):
        """Products, coproducts and exponents act componentwise"""
        spec = Coproduct((Const(frozenset({'stop'})), Product(Id(), Exp(Id(), frozenset({'l', 'r'})))))
        value = (1, ('x', frozenset({('l', 'y'), ('r', 'z')})))
        assert map_value(spec, collapse, value) == (1, ('u', frozenset({('l', 'v'), ('r', 'u')})))

    def test_map_must_cover_carrier(self, carrier):
        """f has to be total on the carrier of the value"""
        t = make_tobject(POWERSET, carrier, frozenset())
        with pytest.raises(DomainError):
            apply_map(POWERSET, {'x': 'u'}, t)

    def test_composition(self, carrier, collapse):
        """T (g . f) = T g . T f on every value"""
        g = {'u': 0, 'v': 0}
        composed = {x: g[collapse[x]] for x in carrier}
        for t in enumerate_tobjects(MONSTAR, carrier):
            step = apply_map(MONSTAR, collapse, t)
            assert apply_map(MONSTAR, g, step).value == apply_map(MONSTAR, composed, t).value


class TestSupports:
    """Test cases for supports and restriction"""

    def test_powerset_minimal_support(self, carrier):
        """The only minimal support of a set is the set itself"""
        t = make_tobject(POWERSET, carrier, frozenset({'x', 'y'}))
        assert minimal_supports(t) == [frozenset({'x', 'y'})]

    def test_neighbourhood_support_needs_every_member(self):
        """Each minimal neighbourhood lies inside a support"""
        carrier = frozenset({'u*', 'v*', 'w*'})
        t = make_tobject(MON, carrier, frozenset({frozenset({'u*', 'v*'}), frozenset({'u*', 'w*'})}))
        assert minimal_supports(t) == [carrier]

    def test_restriction_changes_carrier_only(self, carrier):
        """Restriction keeps the value over the smaller carrier"""
        t = make_tobject(BAG, carrier, make_bag({'x': 2}))
        restricted = restrict_to_support(t, {'x'})
        assert restricted.carrier == frozenset({'x'})
        assert restricted.value == t.value

    def test_restriction_to_non_support(self, carrier):
        """Restricting to a non-support is a domain error"""
        t = make_tobject(POWERSET, carrier, frozenset({'x', 'y'}))
        with pytest.raises(DomainError):
            restrict_to_support(t, {'x'})

    def test_support_cap(self):
        """The brute-force search respects the support cap"""
        carrier = frozenset(range(4))
        t = TObject(POWERSET, carrier, frozenset())
        with pytest.raises(CapExceeded):
            minimal_supports(t, Caps(support=3))

    def test_monstar_support_component(self, carrier):
        """M* values are supported exactly by supersets of their support component"""
        value = (frozenset({frozenset({'x'})}), frozenset({'x', 'y'}))
        assert supports(MONSTAR, value, frozenset({'x', 'y'}))
        assert not supports(MONSTAR, value, frozenset({'x'}))


class TestEnumeration:
    """Test cases for enumeration and sampling"""

    def test_subsets_order(self):
        """Subsets come by increasing size"""
        assert subsets({'b', 'a'}) == [frozenset(), frozenset({'a'}), frozenset({'b'}), frozenset({'a', 'b'})]

    def test_antichain_count(self):
        """Two points carry six monotone neighbourhood structures"""
        assert len(antichains({'a', 'b'})) == 6

    def test_bag_enumeration_bound(self):
        """Bag counts range up to the bound"""
        assert len(enumerate_values(BAG, {'a', 'b'}, count_bound=2)) == 9

    def test_random_values_are_valid(self, carrier):
        """Seeded samples pass validation"""
        rng = np.random.default_rng(7)
        for spec in (POWERSET, BAG, MON, MONSTAR):
            t = random_tobject(spec, carrier, rng)
            make_tobject(spec, carrier, t.value)

    def test_upset_membership(self):
        """Membership in the upset of an antichain"""
        antichain = minimize_family([{'a'}, {'b', 'c'}])
        assert in_upset(antichain, frozenset({'a', 'c'}))
        assert not in_upset(antichain, frozenset({'c'}))


if __name__ == '__main__':
    pytest.main([__file__])
