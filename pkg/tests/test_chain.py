"""Chain validation and the forward-vector word-probability engine."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markab import (
    Alphabet,
    LabeledMarkovChain,
    extend_prefix,
    initial_forward,
    validate_chain,
    word_probability,
)

from helpers import all_words, brute_force_word_probability, random_chain

AB = Alphabet(("0", "1"))


def two_state(p00=0.5, p11=0.5, mu0=0.5):
    return LabeledMarkovChain(
        alphabet=AB,
        transition=np.array([[p00, 1 - p00], [1 - p11, p11]]),
        initial=np.array([mu0, 1 - mu0]),
        labels=np.array([0, 1]),
    )


@st.composite
def chains(draw, max_states=4, n_symbols=2):
    """Random valid chains from raw positive floats, rows normalized."""
    n = draw(st.integers(min_value=1, max_value=max_states))
    positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
    rows = np.array([draw(st.lists(positive, min_size=n, max_size=n)) for _ in range(n)])
    mu = np.array(draw(st.lists(positive, min_size=n, max_size=n)))
    labels = np.array([draw(st.integers(0, n_symbols - 1)) for _ in range(n)], dtype=np.intp)
    return LabeledMarkovChain(
        alphabet=Alphabet(tuple(str(i) for i in range(n_symbols))),
        transition=rows / rows.sum(axis=1, keepdims=True),
        initial=mu / mu.sum(),
        labels=labels,
    )


class TestValidateChain:
    def test_one_state_chain_is_valid(self):
        chain = LabeledMarkovChain(
            alphabet=Alphabet(("0",)),
            transition=np.array([[1.0]]),
            initial=np.array([1.0]),
            labels=np.array([0]),
        )
        assert validate_chain(chain) == []

    def test_deficient_row_is_named_with_residual(self):
        chain = LabeledMarkovChain(
            alphabet=AB,
            transition=np.array([[0.5, 0.4], [0.5, 0.5]]),
            initial=np.array([0.5, 0.5]),
            labels=np.array([0, 1]),
        )
        report = validate_chain(chain)
        assert len(report) == 1
        assert "row 0" in report[0]
        assert "residual -0.09999999999999998" in report[0]

    def test_negative_initial_entry_is_reported(self):
        chain = LabeledMarkovChain(
            alphabet=AB,
            transition=np.array([[0.5, 0.5], [0.5, 0.5]]),
            initial=np.array([1.1, -0.1]),
            labels=np.array([0, 1]),
        )
        report = validate_chain(chain)
        assert any("initial" in line for line in report)

    def test_shape_errors_raise_at_construction(self):
        with pytest.raises(ValueError):
            LabeledMarkovChain(
                alphabet=AB,
                transition=np.ones((2, 3)),
                initial=np.array([1.0, 0.0]),
                labels=np.array([0, 1]),
            )
        with pytest.raises(ValueError):
            LabeledMarkovChain(
                alphabet=AB,
                transition=np.eye(2),
                initial=np.array([1.0, 0.0]),
                labels=np.array([0, 7]),
            )

    @given(chains())
    def test_generated_chains_pass_validation(self, chain):
        assert validate_chain(chain) == []


class TestForward:
    def test_initial_forward_restricts_mu(self):
        chain = two_state()
        fs0 = initial_forward(chain, 0)
        np.testing.assert_array_equal(fs0.alpha, [0.5, 0.0])
        assert fs0.prefix_prob == 0.5
        fs1 = initial_forward(chain, 1)
        np.testing.assert_array_equal(fs1.alpha, [0.0, 0.5])
        assert fs1.prefix_prob == 0.5

    def test_empty_label_class_gives_zero_mass(self):
        chain = LabeledMarkovChain(
            alphabet=AB,
            transition=np.array([[1.0]]),
            initial=np.array([1.0]),
            labels=np.array([0]),
        )
        fs = initial_forward(chain, 1)
        assert fs.prefix_prob == 0.0
        assert not fs.alpha.any()

    def test_extend_prefix_identity_dynamics(self):
        chain = two_state(p00=1.0, p11=1.0)
        fs = initial_forward(chain, 0)
        assert extend_prefix(chain, fs, 0).prefix_prob == 0.5
        assert extend_prefix(chain, fs, 1).prefix_prob == 0.0

    def test_extend_prefix_absorbs_zero(self):
        chain = two_state()
        dead = extend_prefix(chain, initial_forward(chain, 0), 0)
        for _ in range(3):
            dead = extend_prefix(chain, dead, 0)
        follow = extend_prefix(chain, dead, 1)
        assert follow.alpha.shape == (2,)
        assert np.all(follow.alpha >= 0.0)

    def test_invalid_symbol_rejected(self):
        chain = two_state()
        with pytest.raises(ValueError):
            initial_forward(chain, 2)
        with pytest.raises(ValueError):
            extend_prefix(chain, initial_forward(chain, 0), -1)

    @given(chains(), st.lists(st.integers(0, 1), min_size=1, max_size=6))
    def test_prefix_mass_never_increases(self, chain, word):
        fs = initial_forward(chain, word[0])
        masses = [fs.prefix_prob]
        for a in word[1:]:
            fs = extend_prefix(chain, fs, a)
            masses.append(fs.prefix_prob)
        for earlier, later in zip(masses, masses[1:]):
            assert later <= earlier + 1e-15
        assert abs(fs.prefix_prob - fs.alpha.sum()) <= 1e-12


class TestWordProbability:
    def test_empty_word_rejected(self):
        with pytest.raises(ValueError):
            word_probability(two_state(), ())

    def test_single_symbols_total_one(self):
        chain = two_state(mu0=0.3)
        total = word_probability(chain, (0,)) + word_probability(chain, (1,))
        assert abs(total - 1.0) <= 1e-12

    def test_fig2_left_two_words_are_uniform(self, fig2):
        left, _ = fig2
        for w in all_words(2, 2):
            assert word_probability(left, w) == 0.25

    def test_random_two_state_chain_matches_path_sum(self):
        rng = np.random.default_rng(7)
        chain = random_chain(rng, 2, 2)
        for w in all_words(2, 4):
            expected = brute_force_word_probability(chain, w)
            assert abs(word_probability(chain, w) - expected) <= 1e-10

    def test_three_state_triple_sum(self):
        rng = np.random.default_rng(11)
        chain = random_chain(rng, 3, 2)
        for w in all_words(2, 3):
            expected = brute_force_word_probability(chain, w)
            assert abs(word_probability(chain, w) - expected) <= 1e-10

    @given(chains(), st.integers(1, 4))
    @settings(max_examples=40, deadline=None)
    def test_law_of_total_probability(self, chain, n):
        """Summing the one-symbol extensions of any word recovers the word."""
        for w in all_words(2, n):
            parent = word_probability(chain, w)
            children = sum(word_probability(chain, w + (a,)) for a in (0, 1))
            assert abs(children - parent) <= 1e-10

    @given(chains(max_states=4), st.integers(1, 5))
    @settings(max_examples=25, deadline=None)
    def test_forward_equals_brute_force(self, chain, n):
        for w in all_words(2, n):
            expected = brute_force_word_probability(chain, w)
            assert abs(word_probability(chain, w) - expected) <= 1e-10

    def test_word_masses_sum_to_one(self):
        rng = np.random.default_rng(3)
        chain = random_chain(rng, 4, 2)
        for n in range(1, 7):
            total = sum(word_probability(chain, w) for w in all_words(2, n))
            assert abs(total - 1.0) <= n * chain.n_states * 1e-12
