"""
Tests for the self-check suite settings and its shared corpora
"""

import time

import pytest

from config.settings import Caps, Config
from generate_sample_data import SO_AUTOMATA, enumerate_powerset_trees
from models.functor import MON, POWERSET
import startup
from startup import (
    _complement_failures, _projection_failures, check_mu_automata, closure_corpus, corpus_automaton, level_settings,
    model_corpus
)


class TestLevelSettings:
    """Test cases for self-check budgets"""

    def test_full_level_reads_configuration(self, monkeypatch):
        """Model corpus sizes of the full level come from the configuration"""
        monkeypatch.setattr(Config, 'MU_MODEL_SIZE', 1)
        monkeypatch.setattr(Config, 'MON_MODEL_SIZE', 1)
        settings = level_settings('full')
        assert settings['mu_size'] == 1
        assert settings['mon_size'] == 1
        assert settings['games'] == 200

    def test_quick_level_is_fixed(self, monkeypatch):
        """The quick level ignores the corpus size settings"""
        monkeypatch.setattr(Config, 'MU_MODEL_SIZE', 5)
        assert level_settings('quick')['mu_size'] == 2

    def test_unknown_level(self):
        """Only quick and full exist"""
        with pytest.raises(ValueError):
            level_settings('exhaustive')


class TestMuAutomataCheck:
    """Test cases for the shared model corpus"""

    def test_corpus_counts(self):
        """One-state powerset models: two structures under two valuations"""
        assert len(model_corpus(POWERSET, 1)) == 4
        assert all(len(m.carrier) == 1 for m in model_corpus(MON, 1))

    def test_monotone_size_capped(self, monkeypatch):
        """Neighbourhood models never exceed the monotone carrier cap"""
        monkeypatch.setattr(startup, 'current_caps', lambda: Caps(monotone_carrier=1))
        outcome = check_mu_automata({'mu_size': 1, 'mon_size': 3}, seed=0, jobs=1)
        assert outcome['sizes'] == {POWERSET.name: 1, MON.name: 1}

    def test_small_corpus_passes_quickly(self):
        """One-state corpora check every formula well within a minute"""
        started = time.monotonic()
        outcome = check_mu_automata({'mu_size': 1, 'mon_size': 1}, seed=0, jobs=1)
        assert outcome['passed'], outcome
        assert outcome['mismatches'] == 0
        assert time.monotonic() - started < 60


class TestClosureCorpus:
    """Test cases for the automata behind the closure check"""

    def test_mixes_chromatic_and_plain_automata(self):
        """The corpus holds automata with and without chromatic variables"""
        automata = [corpus_automaton(source) for source in closure_corpus()]
        assert any(a.chromatic for a in automata)
        assert any(not a.chromatic for a in automata)
        assert {a.flavor for a in automata} == {'ml1', 'so1'}

    def test_second_order_complement(self):
        """Complementing a seeded second-order automaton flips every verdict"""
        trees = enumerate_powerset_trees(3, 2)
        assert _complement_failures(('so', SO_AUTOMATA[0]), trees) == 0

    def test_projection_of_compiled_formula(self):
        """Projecting q out of a compiled MSO formula guesses the colouring"""
        trees = enumerate_powerset_trees(3, 2)
        assert _projection_failures(('mso', 'p sub q and not q sub p'), 'q', trees) == 0


if __name__ == '__main__':
    pytest.main([__file__])
