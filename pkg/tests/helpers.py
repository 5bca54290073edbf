"""Shared generators and independent reference implementations.

Everything here deliberately avoids the package's own fast paths: word
probabilities are exhaustive path sums and transport values come from
scipy's LP solver, so agreement with the library is evidence, not
circularity.
"""

import itertools

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from markab import Alphabet, LabeledMarkovChain, WordDistribution, cantor_cost_matrix


def random_chain(
    rng: np.random.Generator,
    n_states: int,
    n_symbols: int,
    zero_fraction: float = 0.0,
) -> LabeledMarkovChain:
    """Dirichlet rows and initial measure; labels cover every symbol when
    there are enough states.  ``zero_fraction`` sparsifies rows (each row
    keeps at least its largest entry) to exercise pruning paths."""
    transition = rng.dirichlet(np.ones(n_states), size=n_states)
    if zero_fraction > 0.0:
        drop = rng.random(transition.shape) < zero_fraction
        drop[np.arange(n_states), transition.argmax(axis=1)] = False
        transition = np.where(drop, 0.0, transition)
        transition /= transition.sum(axis=1, keepdims=True)
    labels = rng.permutation(np.arange(n_states, dtype=np.intp) % n_symbols)
    return LabeledMarkovChain(
        alphabet=Alphabet(tuple(str(i) for i in range(n_symbols))),
        transition=transition,
        initial=rng.dirichlet(np.ones(n_states)),
        labels=labels,
    )


def random_chain_pair(
    rng: np.random.Generator,
    max_states: int = 4,
    max_symbols: int = 3,
    zero_fraction: float = 0.0,
):
    """Two independent chains over one shared alphabet, sizes drawn per pair."""
    n_symbols = int(rng.integers(2, max_symbols + 1))
    n1 = int(rng.integers(1, max_states + 1))
    n2 = int(rng.integers(1, max_states + 1))
    return (
        random_chain(rng, n1, n_symbols, zero_fraction),
        random_chain(rng, n2, n_symbols, zero_fraction),
    )


def brute_force_word_probability(chain: LabeledMarkovChain, word) -> float:
    """Sum over every state path whose labels spell the word.  O(|S|^n)."""
    total = 0.0
    for path in itertools.product(range(chain.n_states), repeat=len(word)):
        if any(chain.labels[s] != a for s, a in zip(path, word)):
            continue
        mass = float(chain.initial[path[0]])
        for s, t in zip(path, path[1:]):
            mass *= float(chain.transition[s, t])
        total += mass
    return total


def all_words(n_symbols: int, n: int):
    return itertools.product(range(n_symbols), repeat=n)


def linprog_kantorovich(p: WordDistribution, q: WordDistribution) -> float:
    """Transport value by scipy's HiGHS solver on the explicit LP."""
    n = p.probs.size
    cost = cantor_cost_matrix(p.alphabet, p.horizon).reshape(-1)
    cols = np.arange(n * n)
    row_marginals = sparse.csr_matrix(
        (np.ones(n * n), (np.repeat(np.arange(n), n), cols)), shape=(n, n * n)
    )
    col_marginals = sparse.csr_matrix(
        (np.ones(n * n), (np.tile(np.arange(n), n), cols)), shape=(n, n * n)
    )
    a_eq = sparse.vstack([row_marginals, col_marginals])
    b_eq = np.concatenate([p.probs, q.probs])
    result = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert result.status == 0, result.message
    return float(result.fun)
