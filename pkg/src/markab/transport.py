"""Exact Kantorovich computation by explicit optimal transport.

This module exists to falsify or confirm the fast prefix-tree recursion in
:mod:`markab.kantorovich`: it enumerates the two word distributions as dense
vectors and solves the balanced min-cost transport problem over the full
|A|^n x |A|^n Cantor cost matrix with successive shortest augmenting paths
(Dijkstra with Johnson potentials on the bipartite residual graph).  Nothing
here reuses the recursion, so agreement between the two routes is evidence,
not tautology.

Problem sizes are guarded: the module is test-and-validation plumbing by
contract, and the exponential enumeration is acceptable only because of
those guards.  Zero-mass words are kept in the enumeration so indices stay
lexicographic and couplings can be cross-referenced against recursion
traces.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .chain import Alphabet, LabeledMarkovChain, Word, initial_forward, extend_prefix
from .errors import GuardError, ValidationError
from .kantorovich import CantorParams, DEFAULT_PARAMS

# Largest |A|^n for which a dense word-distribution vector is enumerated.
ENUMERATION_LIMIT = 100_000
# Largest |A|^n for which the dense coupling matrix is solved; beyond this
# the transport oracle refuses and callers must rely on the recursion.
COUPLING_LIMIT = 250

MARGINAL_TOL = 1e-8


@dataclass(frozen=True)
class WordDistribution:
    """A dense distribution over all length-``horizon`` words, indexed
    lexicographically (symbol 0 varies slowest)."""

    alphabet: Alphabet
    horizon: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=np.float64)
        expected = len(self.alphabet) ** self.horizon
        if p.shape != (expected,):
            raise ValueError(f"expected {expected} word probabilities, got shape {p.shape}")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def word_at(self, index: int) -> Word:
        """The word at a lexicographic index (base-|A| digits of the index)."""
        size = len(self.alphabet)
        digits = []
        for _ in range(self.horizon):
            index, d = divmod(index, size)
            digits.append(d)
        return tuple(reversed(digits))


@dataclass(frozen=True)
class Coupling:
    """A joint distribution over word pairs with the two inputs as marginals."""

    matrix: np.ndarray
    p: WordDistribution
    q: WordDistribution

    @property
    def horizon(self) -> int:
        return self.p.horizon


def enumerate_distribution(chain: LabeledMarkovChain, n: int) -> WordDistribution:
    """All length-n word probabilities as one dense lexicographic vector.

    Guarded to |A|^n <= ENUMERATION_LIMIT; larger horizons must use the
    prefix-tree recursion, which never materializes the distribution.
    """
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    size = len(chain.alphabet)
    total = size**n
    if total > ENUMERATION_LIMIT:
        raise GuardError(
            f"|A|^n = {total} exceeds the enumeration guard ({ENUMERATION_LIMIT}); "
            "use kant_metric instead of the exhaustive oracle"
        )
    # Forward vectors for every prefix of length k, extended level by level.
    alphas = np.stack([initial_forward(chain, a).alpha for a in range(size)])
    for _ in range(n - 1):
        pushed = alphas @ chain.transition  # (k, S)
        masks = (chain.labels[None, :] == np.arange(size)[:, None]).astype(np.float64)
        # (k, A, S): prefix i extended by symbol a, then flattened in lex order.
        alphas = pushed[:, None, :] * masks[None, :, :]
        alphas = alphas.reshape(-1, chain.n_states)
    return WordDistribution(chain.alphabet, n, alphas.sum(axis=1))


def cantor_cost_matrix(alphabet: Alphabet, n: int, params: CantorParams = DEFAULT_PARAMS) -> np.ndarray:
    """Dense matrix of Cantor distances between all pairs of length-n words."""
    size = len(alphabet)
    total = size**n
    idx = np.arange(total)
    digits = np.empty((total, n), dtype=np.intp)
    rem = idx
    for k in range(n - 1, -1, -1):
        rem, digits[:, k] = np.divmod(rem, size)
    cost = np.zeros((total, total))
    undecided = np.ones((total, total), dtype=bool)
    for k in range(n):
        differ = digits[:, k][:, None] != digits[:, k][None, :]
        hit = undecided & differ
        cost[hit] = params.base ** (k + 1)
        undecided &= ~differ
    return cost


def _shortest_augmenting_path(
    cost: np.ndarray,
    flow: np.ndarray,
    potential: np.ndarray,
    excess: np.ndarray,
    deficit: np.ndarray,
    tol: float,
) -> tuple[np.ndarray, np.ndarray, int] | None:
    """One Dijkstra pass over the bipartite residual graph.

    Nodes 0..N-1 are supply words, N..2N-1 demand words.  Starts from every
    node with remaining excess, stops at the first settled node with
    remaining deficit.  Returns (dist, parent, sink) or None when no deficit
    node is reachable.
    """
    n = cost.shape[0]
    dist = np.full(2 * n, np.inf)
    parent = np.full(2 * n, -1, dtype=np.intp)
    settled = np.zeros(2 * n, dtype=bool)
    heap: list[tuple[float, int]] = []
    for i in np.nonzero(excess > tol)[0]:
        dist[i] = 0.0
        heapq.heappush(heap, (0.0, int(i)))
    while heap:
        d, u = heapq.heappop(heap)
        if settled[u] or d > dist[u]:
            continue
        settled[u] = True
        if u >= n and deficit[u - n] > tol:
            return dist, parent, u - n
        if u < n:
            # Forward transport arcs u -> every demand word.
            reduced = cost[u, :] + potential[u] - potential[n:]
            np.maximum(reduced, 0.0, out=reduced)
            cand = d + reduced
            better = cand < dist[n:]
            if better.any():
                dist[n:][better] = cand[better]
                parent[n:][better] = u
                for j in np.nonzero(better)[0]:
                    heapq.heappush(heap, (float(cand[j]), int(n + j)))
        else:
            # Backward arcs along positive flow.
            j = u - n
            rows = np.nonzero(flow[:, j] > 0.0)[0]
            if rows.size:
                reduced = -cost[rows, j] + potential[u] - potential[rows]
                np.maximum(reduced, 0.0, out=reduced)
                cand = d + reduced
                better = cand < dist[rows]
                for r, c in zip(rows[better], cand[better]):
                    dist[r] = c
                    parent[r] = u
                    heapq.heappush(heap, (float(c), int(r)))
    return None


def _solve_transport(
    supply: np.ndarray, demand: np.ndarray, cost: np.ndarray, tol: float = 1e-12
) -> np.ndarray:
    """Balanced min-cost transport by successive shortest augmenting paths."""
    n = cost.shape[0]
    flow = np.zeros((n, n))
    potential = np.zeros(2 * n)
    excess = supply.astype(np.float64).copy()
    deficit = demand.astype(np.float64).copy()
    while excess.sum() > tol and deficit.sum() > tol:
        found = _shortest_augmenting_path(cost, flow, potential, excess, deficit, tol)
        if found is None:
            break
        dist, parent, sink = found
        # Standard potential update keeps all reduced costs nonnegative.
        d_sink = dist[n + sink]
        potential += np.minimum(dist, d_sink)
        # Walk the alternating path back to its source, find the bottleneck.
        path: list[tuple[int, int]] = []  # (supply node, demand node) per forward arc
        v = n + sink
        amount = deficit[sink]
        while True:
            u = parent[v]
            if v >= n:
                path.append((int(u), int(v - n)))
                v = u
            else:
                amount = min(amount, flow[v, u - n])
                path.append((int(v), int(u - n)))
                v = u
            if parent[v] == -1:
                break
        source = v
        amount = min(amount, excess[source])
        # Apply: forward arcs gain, the arcs traversed backward lose.
        sign = 1.0
        for i, j in path:
            flow[i, j] += sign * amount
            sign = -sign
        flow[flow < 0.0] = 0.0
        excess[source] -= amount
        deficit[sink] -= amount
    return flow


def exact_kantorovich(
    p: WordDistribution, q: WordDistribution, params: CantorParams = DEFAULT_PARAMS
) -> tuple[float, Coupling]:
    """Minimum expected Cantor distance over couplings of p and q.

    Solved exactly (up to float arithmetic) as a dense balanced transport
    problem; returns the optimal value and a feasible optimal coupling.
    """
    if p.alphabet != q.alphabet or p.horizon != q.horizon:
        raise ValidationError("distributions must share alphabet and horizon")
    total = len(p.probs)
    if total > COUPLING_LIMIT:
        raise GuardError(
            f"|A|^n = {total} exceeds the transport guard ({COUPLING_LIMIT}); "
            "the dense coupling matrix would be infeasible"
        )
    if abs(p.probs.sum() - q.probs.sum()) > MARGINAL_TOL:
        raise ValidationError(
            f"marginal masses differ by {abs(p.probs.sum() - q.probs.sum())!r} (> {MARGINAL_TOL})"
        )
    cost = cantor_cost_matrix(p.alphabet, p.horizon, params)
    flow = _solve_transport(p.probs, q.probs, cost)
    value = float((flow * cost).sum())
    return value, Coupling(matrix=flow, p=p, q=q)


def coupling_feasibility(coupling: Coupling, tol: float = MARGINAL_TOL) -> list[str]:
    """Report violations of the coupling constraints (marginals, sign)."""
    report: list[str] = []
    m = coupling.matrix
    if np.any(m < 0):
        report.append(f"{int((m < 0).sum())} negative coupling entries")
    row_err = np.abs(m.sum(axis=1) - coupling.p.probs)
    col_err = np.abs(m.sum(axis=0) - coupling.q.probs)
    for i in np.nonzero(row_err > tol)[0]:
        report.append(f"row marginal {i} off by {row_err[i]!r}")
    for j in np.nonzero(col_err > tol)[0]:
        report.append(f"column marginal {j} off by {col_err[j]!r}")
    return report


def check_lemma_diagonal(coupling: Coupling, tol: float = MARGINAL_TOL) -> list[str]:
    """Check that the coupling keeps every word in place up to the pointwise
    minimum of the marginals: diagonal mass pi(w, w) = min(p(w), q(w)).

    Meaningful only for couplings produced by :func:`exact_kantorovich`;
    the property characterizes optimal couplings under the Cantor cost.
    """
    report: list[str] = []
    diag = np.diag(coupling.matrix)
    expect = np.minimum(coupling.p.probs, coupling.q.probs)
    for i in np.nonzero(np.abs(diag - expect) > tol)[0]:
        word = coupling.p.word_at(int(i))
        report.append(
            f"diagonal mass at {coupling.p.alphabet.format_word(word)}: "
            f"{diag[i]!r} vs min(marginals) {expect[i]!r}"
        )
    return report


def check_lemma_blockflow(
    coupling: Coupling,
    p_n: WordDistribution,
    q_n: WordDistribution,
    tol: float = MARGINAL_TOL,
) -> list[str]:
    """Check the one-sided cross-block flow structure of an optimal coupling
    at horizon n+1 against the length-n marginalizations.

    Words are grouped by their length-n prefix.  A prefix with surplus on
    the p side (p_n > q_n) must ship exactly the surplus out of its block
    and receive nothing; symmetrically on the q side; balanced prefixes
    exchange nothing across blocks.
    """
    report: list[str] = []
    size = len(coupling.p.alphabet)
    if coupling.horizon != p_n.horizon + 1 or p_n.horizon != q_n.horizon:
        raise ValidationError(
            f"horizon mismatch: coupling at {coupling.horizon}, "
            f"marginalizations at {p_n.horizon} and {q_n.horizon}"
        )
    blocks = len(p_n.probs)
    # Consistency of the provided marginalizations with the coupling's own
    # marginals under summing out the last symbol.
    p_fold = coupling.p.probs.reshape(blocks, size).sum(axis=1)
    q_fold = coupling.q.probs.reshape(blocks, size).sum(axis=1)
    if np.max(np.abs(p_fold - p_n.probs)) > tol or np.max(np.abs(q_fold - q_n.probs)) > tol:
        raise ValidationError("length-n distributions are not marginalizations of the coupling")
    block = coupling.matrix.reshape(blocks, size, blocks, size).sum(axis=(1, 3))
    outgoing = block.sum(axis=1) - np.diag(block)
    incoming = block.sum(axis=0) - np.diag(block)
    surplus = p_n.probs - q_n.probs
    for w in range(blocks):
        name = p_n.alphabet.format_word(p_n.word_at(w))
        if surplus[w] > 0:
            if abs(outgoing[w] - surplus[w]) > tol:
                report.append(
                    f"block {name}: outgoing cross mass {outgoing[w]!r}, surplus {surplus[w]!r}"
                )
            if incoming[w] > tol:
                report.append(f"block {name}: unexpected incoming cross mass {incoming[w]!r}")
        else:
            if abs(incoming[w] + surplus[w]) > tol:
                report.append(
                    f"block {name}: incoming cross mass {incoming[w]!r}, deficit {-surplus[w]!r}"
                )
            if outgoing[w] > tol:
                report.append(f"block {name}: unexpected outgoing cross mass {outgoing[w]!r}")
    return report
