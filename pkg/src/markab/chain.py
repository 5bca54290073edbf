"""Labeled Markov chains and the forward-vector engine for word probabilities.

A labeled Markov chain is a finite-state chain with a row-stochastic
transition matrix, an initial measure, and one output symbol per state.  It
induces a probability distribution over the length-n output words: the mass
of a word is the total probability of all state paths whose labels spell it.

Word probabilities are computed incrementally.  A forward state holds, for
each chain state s, the joint probability of having emitted the current
prefix and sitting in s; extending the prefix by one symbol costs one
vector-matrix product, O(|S|^2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# A word is a tuple of symbol indices into an Alphabet.  The empty tuple is
# the empty word and acts as the concatenation identity.
Word = tuple[int, ...]

EMPTY_WORD: Word = ()


@dataclass(frozen=True)
class Alphabet:
    """An ordered set of distinct output symbol names.

    The index of a symbol in ``symbols`` is its stable integer id; chains,
    words, and partitions all store indices, never names.
    """

    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "symbols", tuple(str(s) for s in self.symbols))
        if len(self.symbols) == 0:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError(f"alphabet symbols must be distinct: {self.symbols}")

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(str(symbol))
        except ValueError:
            raise ValueError(f"unknown symbol {symbol!r}; alphabet is {self.symbols}") from None

    def encode(self, names: Iterable[str] | str) -> Word:
        """Turn a sequence of symbol names (or a bare string of 1-char names)
        into a word of symbol indices."""
        if isinstance(names, str) and all(len(s) == 1 for s in self.symbols):
            names = tuple(names)
        return tuple(self.index(s) for s in names)

    def decode(self, word: Word) -> tuple[str, ...]:
        return tuple(self.symbols[a] for a in word)

    def format_word(self, word: Word) -> str:
        """Render a word for reports: symbols joined bare when unambiguous."""
        names = self.decode(word)
        if all(len(s) == 1 for s in self.symbols):
            return "".join(names) if names else "<empty>"
        return ".".join(names) if names else "<empty>"


@dataclass(frozen=True)
class LabeledMarkovChain:
    """A finite-state Markov chain whose states emit symbols of ``alphabet``.

    ``transition`` is |S| x |S| row-stochastic, ``initial`` the initial
    measure, ``labels[s]`` the symbol index emitted by state s.  Instances
    are immutable after construction and safe to share across threads.

    Construction only enforces shapes and label ranges so that
    :func:`validate_chain` can report numeric violations instead of raising.
    """

    alphabet: Alphabet
    transition: np.ndarray
    initial: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.transition, dtype=np.float64)
        mu = np.array(self.initial, dtype=np.float64)
        lab = np.array(self.labels, dtype=np.intp)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError(f"transition must be square, got shape {t.shape}")
        n = t.shape[0]
        if n == 0:
            raise ValueError("chain must have at least one state")
        if mu.shape != (n,):
            raise ValueError(f"initial must have shape ({n},), got {mu.shape}")
        if lab.shape != (n,):
            raise ValueError(f"labels must have shape ({n},), got {lab.shape}")
        if np.any(lab < 0) or np.any(lab >= len(self.alphabet)):
            raise ValueError("labels contain an index outside the alphabet")
        for arr in (t, mu, lab):
            arr.flags.writeable = False
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "initial", mu)
        object.__setattr__(self, "labels", lab)

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]


@dataclass(frozen=True)
class ForwardState:
    """Per-state joint probability of the emitted prefix and the current state.

    ``alpha[s]`` is the probability of having emitted the prefix so far and
    being in state s; ``prefix_prob`` is the total mass of the prefix.
    """

    alpha: np.ndarray
    prefix_prob: float

    def __post_init__(self) -> None:
        a = np.asarray(self.alpha, dtype=np.float64)
        a.flags.writeable = False
        object.__setattr__(self, "alpha", a)


STOCHASTIC_TOL = 1e-9


def validate_chain(chain: LabeledMarkovChain, tol: float = STOCHASTIC_TOL) -> list[str]:
    """Check chain invariants; return a report of violations (empty = valid).

    Each entry names the offending row or field together with the residual.
    """
    report: list[str] = []
    t, mu = chain.transition, chain.initial
    if np.any(t < 0):
        for i, j in zip(*np.nonzero(t < 0)):
            report.append(f"transition[{i},{j}] is negative: {t[i, j]}")
    row_sums = t.sum(axis=1)
    for i, s in enumerate(map(float, row_sums)):
        if abs(s - 1.0) > tol:
            report.append(f"transition row {i} sums to {s!r}, residual {s - 1.0!r}")
    if np.any(mu < 0):
        for (i,) in zip(*np.nonzero(mu < 0)):
            report.append(f"initial[{i}] is negative: {float(mu[i])!r}")
    total = float(mu.sum())
    if abs(total - 1.0) > tol:
        report.append(f"initial measure sums to {total!r}, residual {total - 1.0!r}")
    return report


def _check_symbol(chain: LabeledMarkovChain, a: int) -> None:
    if not 0 <= a < len(chain.alphabet):
        raise ValueError(
            f"symbol index {a} out of range for alphabet of size {len(chain.alphabet)}"
        )


def initial_forward(chain: LabeledMarkovChain, a: int) -> ForwardState:
    """Forward state for the single-symbol prefix (a): the initial measure
    restricted to states labeled a."""
    _check_symbol(chain, a)
    alpha = np.where(chain.labels == a, chain.initial, 0.0)
    return ForwardState(alpha=alpha, prefix_prob=float(alpha.sum()))


def extend_prefix(chain: LabeledMarkovChain, fs: ForwardState, a: int) -> ForwardState:
    """Extend a forward state by one output symbol.

    One |S|^2 vector-matrix product followed by masking to the states
    labeled ``a``; the prefix mass never increases.
    """
    _check_symbol(chain, a)
    pushed = fs.alpha @ chain.transition
    alpha = np.where(chain.labels == a, pushed, 0.0)
    return ForwardState(alpha=alpha, prefix_prob=float(alpha.sum()))


def word_probability(chain: LabeledMarkovChain, w: Sequence[int]) -> float:
    """Probability that the chain emits the word ``w``.

    The empty word is rejected: callers that need the mass of the empty
    prefix treat it as 1 explicitly.
    """
    w = tuple(w)
    if len(w) == 0:
        raise ValueError("word must be nonempty; the empty prefix carries mass 1 by convention")
    fs = initial_forward(chain, w[0])
    for a in w[1:]:
        fs = extend_prefix(chain, fs, a)
    return fs.prefix_prob
