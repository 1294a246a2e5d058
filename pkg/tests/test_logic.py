"""
Tests for formula syntax and the direct mu-calculus and MSO semantics
"""

import pytest

from config.settings import Caps
from models import logic as L
from models import one_step as O
from models.errors import CapExceeded, DomainError, FormulaSyntaxError
from models.functor import POWERSET
from models.tmodel import TModel
from services.functor_service import make_tobject
from services.logic_service import (
    eval_mso, eval_mu, expand_mso, guarded_form, mu_negation, mu_to_mso, mu_truth_set, unguarded_vars
)
from services.parser_service import parse_mso, parse_mu, parse_one_step, print_mso, print_mu


def kripke(edges, **valuation):
    """Powerset model from a successor table"""
    carrier = frozenset(edges)
    sigma = {s: make_tobject(POWERSET, carrier, frozenset(succ)) for s, succ in edges.items()}
    return TModel(POWERSET, carrier, sigma, valuation)


@pytest.fixture
def chain():
    """s0 -> s1 -> s2 -> s2, with a dead end s3 and p true at s2"""
    return kripke({'s0': ['s1'], 's1': ['s2'], 's2': ['s2'], 's3': []}, p={'s2'})


@pytest.fixture
def small():
    """s0 -> s1 -> s1 and a dead end s2, with p true at s1"""
    return kripke({'s0': ['s1'], 's1': ['s1'], 's2': []}, p={'s1'})


class TestParser:
    """Test cases for the text syntax"""

    def test_precedence(self):
        """and binds tighter than or"""
        formula = parse_mu('p or q and r')
        assert isinstance(formula, L.MuOr)
        assert isinstance(formula.right, L.MuAnd)

    def test_fixpoint_scope_extends_right(self):
        """A binder takes the rest of the formula"""
        formula = parse_mu('mu x . p or lift dia(x)')
        assert isinstance(formula, L.MuFix)
        assert formula.free_vars == frozenset({'p'})

    def test_printed_formula_reparses(self):
        """Printing is stable under reparsing"""
        for text in ('nu x . p and lift box(x)', '[all] (p or not q)', 'lift ge2(mu y . lift dia(y) or p)'):
            formula = parse_mu(text)
            assert parse_mu(print_mu(formula)) == formula
        mso = parse_mso('forall x . sr(x) -> exists y . lift dia(x, y) and y sub p')
        assert parse_mso(print_mso(mso)) == mso

    def test_error_position(self):
        """Syntax errors carry line and column"""
        with pytest.raises(FormulaSyntaxError) as info:
            parse_mu('p and\n  or q')
        assert info.value.line == 2
        assert info.value.column == 3

    def test_unexpected_character(self):
        """Unknown characters are reported"""
        with pytest.raises(FormulaSyntaxError):
            parse_one_step('lift box(a) ; top')

    def test_trailing_input(self):
        """The whole input must be consumed"""
        with pytest.raises(FormulaSyntaxError):
            parse_mso('p sub q q')

    def test_unknown_global_modality(self):
        """Only [all] and [some] are global modalities"""
        with pytest.raises(FormulaSyntaxError):
            parse_mu('[most] p')

    def test_syntax_error_is_domain_error(self):
        """Syntax errors map to the domain exit code"""
        with pytest.raises(DomainError):
            parse_one_step('exists . top')

    def test_unexpected_end(self):
        """Truncated input is reported at its end"""
        with pytest.raises(FormulaSyntaxError) as info:
            parse_mso('exists x .\n sr(x) and')
        assert info.value.line == 2
        assert info.value.column == 11

    def test_keywords_are_reserved(self):
        """Connectives cannot name variables"""
        with pytest.raises(FormulaSyntaxError):
            parse_mso('exists and . top')

    def test_box_lifting_in_mso(self):
        """After lift, box names a lifting rather than the neighbourhood atom"""
        formula = parse_mso('exists x . lift box(x, p) and box(x, p)')
        assert formula.body.left == L.MsoLift('box', 'x', ('p',))
        assert formula.body.right == L.NbhdBox('x', 'p')

    def test_component_lifting_names(self):
        """Liftings of polynomial parts use dotted names"""
        assert parse_mu('lift l.next(p)') == L.MuModal('l.next', (L.MuVar('p'),))
        step = parse_one_step('lift i0.is_a()')
        assert step.name == 'i0.is_a'
        assert step.args == ()

    def test_binder_scope_is_greedy(self):
        """Quantifiers under not and and extend to the end"""
        formula = parse_one_step('not exists z . z sub a and lift dia(z)')
        assert isinstance(formula, O.Not)
        assert isinstance(formula.body.body, O.And)
        implication = parse_mso('p sub q -> q sub r -> r sub p')
        assert implication == L.mso_implies(L.Incl('p', 'q'), L.mso_implies(L.Incl('q', 'r'), L.Incl('r', 'p')))


class TestMuSemantics:
    """Test cases for mu-calculus evaluation"""

    def test_reachability(self, chain):
        """mu x . p or dia x holds where p is reachable"""
        assert mu_truth_set(parse_mu('mu x . p or lift dia(x)'), chain) == frozenset({'s0', 's1', 's2'})

    def test_invariance(self, chain):
        """nu x . p and box x holds where p holds forever"""
        assert mu_truth_set(parse_mu('nu x . p and lift box(x)'), chain) == frozenset({'s2'})

    def test_well_foundedness(self, chain):
        """mu x . box x holds where every path ends"""
        assert mu_truth_set(parse_mu('mu x . lift box(x)'), chain) == frozenset({'s3'})
        assert mu_truth_set(parse_mu('nu x . lift dia(x)'), chain) == frozenset({'s0', 's1', 's2'})

    def test_dead_end(self, chain):
        """box bot marks states without successors"""
        assert eval_mu(parse_mu('lift box(bot)'), chain, 's3')
        assert not eval_mu(parse_mu('lift box(bot)'), chain, 's2')

    def test_global_modalities(self, chain):
        """[some] and [all] ignore the evaluation point"""
        assert eval_mu(parse_mu('[some] p'), chain, 's3')
        assert not eval_mu(parse_mu('[all] p'), chain, 's2')
        assert eval_mu(parse_mu('[all] (p or not p)'), chain, 's0')

    def test_unknown_point(self, chain):
        """The point must be a state"""
        with pytest.raises(DomainError):
            eval_mu(parse_mu('p'), chain, 'nowhere')

    def test_negated_fixpoint_variable(self, chain):
        """Fixpoint variables may not occur negated"""
        with pytest.raises(DomainError):
            mu_truth_set(parse_mu('mu x . not x'), chain)

    def test_unbound_proposition_is_empty(self, chain):
        """Variables outside the valuation denote the empty set"""
        assert mu_truth_set(parse_mu('q'), chain) == frozenset()

    def test_negation_is_complement(self, chain):
        """The negation normal form denotes the complement"""
        for text in ('mu x . p or lift dia(x)', 'nu x . p and lift box(x)', 'lift dia(top) and not p'):
            formula = parse_mu(text)
            assert mu_truth_set(mu_negation(formula), chain) == chain.carrier - mu_truth_set(formula, chain)


class TestGuardedForm:
    """Test cases for guarded normal forms"""

    def test_unguarded_variable_removed(self, chain):
        """Unguarded occurrences disappear without changing the meaning"""
        for text in ('mu x . x or p or lift dia(x)', 'nu x . p and (mu y . x or lift dia(y))',
                     'nu x . x and lift box(x)'):
            formula = parse_mu(text)
            guarded = guarded_form(formula)
            for node in L.mu_subformulas(guarded):
                if isinstance(node, L.MuFix):
                    assert node.var not in unguarded_vars(node.body)
            assert mu_truth_set(guarded, chain) == mu_truth_set(formula, chain)

    def test_binders_become_distinct(self):
        """Reused binder names are renamed apart"""
        guarded = guarded_form(parse_mu('(mu x . lift dia(x)) or (nu x . lift box(x))'))
        names = [n.var for n in L.mu_subformulas(guarded) if isinstance(n, L.MuFix)]
        assert len(names) == len(set(names))

    def test_global_modality_rejected(self):
        """Global modalities are not part of the automaton fragment"""
        with pytest.raises(DomainError):
            guarded_form(parse_mu('[all] p'))


class TestMsoSemantics:
    """Test cases for MSO evaluation"""

    def test_root_and_successor(self, small):
        """The root has a successor set inside p"""
        formula = parse_mso('forall x . sr(x) -> exists y . lift dia(x, y) and y sub p')
        assert eval_mso(formula, small, 's0')
        assert not eval_mso(formula, small, 's2')

    def test_derived_nodes(self, small):
        """Expanded formulas keep their truth value"""
        texts = (
            'exists x . sing(x) and x sub p',
            'forall x . em(x) or not x sub p or x = p',
            'exists x . sr(x) and lift box(x, p)'
        )
        for text in texts:
            formula = parse_mso(text)
            for s in small.carrier:
                assert eval_mso(expand_mso(formula), small, s) == eval_mso(formula, small, s)

    def test_unbound_variable(self, small):
        """Free variables must be interpreted"""
        with pytest.raises(DomainError):
            eval_mso(parse_mso('q sub p'), small, 's0')

    def test_quantifier_cap(self):
        """Quantifiers over large carriers exceed the cap"""
        model = kripke({f's{i}': [] for i in range(4)})
        with pytest.raises(CapExceeded):
            eval_mso(parse_mso('exists x . sr(x)'), model, 's0', caps=Caps(quantifier=3))


class TestMuToMso:
    """Test cases for the translation of mu-calculus into MSO"""

    @pytest.mark.parametrize('text', [
        'p',
        'lift dia(p)',
        'mu x . p or lift dia(x)',
        'nu x . p and lift box(x)',
        'mu x . lift box(x)'
    ])
    def test_translation_agrees(self, small, text):
        """The MSO translation holds at exactly the same states"""
        formula = parse_mu(text)
        translated = mu_to_mso(formula)
        assert translated.free_vars <= frozenset({'p'})
        for s in small.carrier:
            assert eval_mso(translated, small, s) == eval_mu(formula, small, s)

    def test_global_translation(self, small):
        """Global modalities quantify over all singletons"""
        formula = parse_mu('[some] (p and lift box(bot))')
        translated = mu_to_mso(formula)
        assert not eval_mso(translated, small, 's0')
        assert eval_mu(formula, small, 's0') is False


if __name__ == '__main__':
    pytest.main([__file__])
