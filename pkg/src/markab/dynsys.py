"""Piecewise-affine dynamical systems on boxes and their Markov abstractions.

A system here is deterministic: a box state space, a piecewise-affine step
map F dispatched over rectangular regions, and a region-constant output
symbol H.  Word equivalence classes [w] collect the points whose next |w|
outputs spell w; an adaptive partition is a prefix-free word set whose
classes tile the box; the induced abstraction is the Markov chain whose
states are the partition words, with measures given by normalized Lebesgue
volume and transitions by volume ratios.

Two measure oracles are provided.  The exact one does interval bookkeeping
with `fractions.Fraction` endpoints (regions are half-open, lower-closed,
with the global upper face closed, and every cell carries per-dimension
closure flags so preimages under axis-flattening maps stay exact).  The
sampled one estimates volumes as hit counts over one seeded point pool that
can be shared across systems for paired comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Protocol, Sequence, runtime_checkable

import numpy as np

from .chain import Alphabet, LabeledMarkovChain, Word, validate_chain
from .errors import CoveringError, ValidationError


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with positive volume."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower and upper must be nonempty and of equal length")
        for d, (a, b) in enumerate(zip(lo, hi)):
            if not a < b:
                raise ValueError(f"dimension {d}: lower {a!r} must be < upper {b!r}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        v = 1.0
        for a, b in zip(self.lower, self.upper):
            v *= b - a
        return v

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(count, self.dimension))


@dataclass(frozen=True)
class AffineMap:
    """x ↦ M x + b with row-major matrix M."""

    matrix: tuple[tuple[float, ...], ...]
    offset: tuple[float, ...]

    def __post_init__(self) -> None:
        m = tuple(tuple(float(v) for v in row) for row in self.matrix)
        b = tuple(float(v) for v in self.offset)
        if len(m) != len(b) or any(len(row) != len(b) for row in m):
            raise ValueError("matrix must be square and match the offset length")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", b)

    @classmethod
    def identity(cls, dimension: int) -> "AffineMap":
        rows = tuple(
            tuple(1.0 if i == j else 0.0 for j in range(dimension)) for i in range(dimension)
        )
        return cls(rows, (0.0,) * dimension)

    @classmethod
    def diagonal(cls, scale: Sequence[float], offset: Sequence[float]) -> "AffineMap":
        d = len(scale)
        rows = tuple(
            tuple(float(scale[i]) if i == j else 0.0 for j in range(d)) for i in range(d)
        )
        return cls(rows, tuple(offset))

    @property
    def dimension(self) -> int:
        return len(self.offset)

    @property
    def is_diagonal(self) -> bool:
        return all(
            v == 0.0 for i, row in enumerate(self.matrix) for j, v in enumerate(row) if i != j
        )

    def apply_many(self, points: np.ndarray) -> np.ndarray:
        return points @ np.asarray(self.matrix).T + np.asarray(self.offset)

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """The map x ↦ self(inner(x))."""
        m_outer = np.asarray(self.matrix)
        m_inner = np.asarray(inner.matrix)
        matrix = m_outer @ m_inner
        offset = m_outer @ np.asarray(inner.offset) + np.asarray(self.offset)
        return AffineMap(tuple(map(tuple, matrix)), tuple(offset))


@dataclass(frozen=True)
class Region:
    """A rectangular piece: output label and affine step map on a sub-box."""

    name: str
    box: Box
    label: int
    map: AffineMap | None = None

    def __post_init__(self) -> None:
        if self.map is None:
            object.__setattr__(self, "map", AffineMap.identity(self.box.dimension))
        elif self.map.dimension != self.box.dimension:
            raise ValueError(f"region {self.name}: map dimension does not match box")


class DynamicalSystem:
    """Deterministic discrete-time system with symbol-valued outputs.

    Subclasses provide vectorized ``step_many`` / ``output_many`` over
    (N, d) point arrays; everything downstream (classes, partitions,
    oracles) is written against this interface.
    """

    space: Box
    alphabet: Alphabet

    def step_many(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def output_many(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def step(self, x: Sequence[float]) -> np.ndarray:
        return self.step_many(np.asarray(x, dtype=np.float64).reshape(1, -1))[0]

    def output(self, x: Sequence[float]) -> int:
        return int(self.output_many(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])

    def output_trajectory(self, points: np.ndarray, n: int) -> np.ndarray:
        """Outputs of the first n steps for each point, shape (n, N)."""
        outs = np.empty((n, points.shape[0]), dtype=np.intp)
        current = points
        for k in range(n):
            outs[k] = self.output_many(current)
            if k + 1 < n:
                current = self.step_many(current)
        return outs


class PiecewiseAffineSystem(DynamicalSystem):
    """System whose step map is affine on each region of a rectangular tiling.

    Region membership is half-open (lower edge in, upper edge out) except at
    the global upper face of the space, which belongs to the touching
    regions; the convention makes membership total and single-valued while
    moving only measure-zero sets.
    """

    def __init__(
        self,
        space: Box,
        alphabet: Alphabet,
        regions: Sequence[Region],
        validate: bool = True,
    ) -> None:
        if not regions:
            raise ValidationError("a system needs at least one region")
        self.space = space
        self.alphabet = alphabet
        self.regions = tuple(regions)
        for r in self.regions:
            if r.box.dimension != space.dimension:
                raise ValidationError(f"region {r.name}: dimension mismatch with the space")
            if not 0 <= r.label < len(alphabet):
                raise ValidationError(f"region {r.name}: label {r.label} not in the alphabet")
        self._lowers = np.array([r.box.lower for r in self.regions])
        self._uppers = np.array([r.box.upper for r in self.regions])
        self._matrices = np.array([r.map.matrix for r in self.regions])
        self._offsets = np.array([r.map.offset for r in self.regions])
        self._labels = np.array([r.label for r in self.regions], dtype=np.intp)
        self._space_hi = np.asarray(space.upper)
        if validate:
            report = validate_system(self)
            if report:
                raise ValidationError("; ".join(report))

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def region_index_many(self, points: np.ndarray) -> np.ndarray:
        idx = np.full(points.shape[0], -1, dtype=np.intp)
        for r in range(len(self.regions)):
            below = (points < self._uppers[r]) | (
                (self._uppers[r] == self._space_hi) & (points == self._uppers[r])
            )
            member = ((points >= self._lowers[r]) & below).all(axis=1)
            member &= idx < 0
            idx[member] = r
        if (idx < 0).any():
            bad = points[int(np.argmax(idx < 0))]
            raise CoveringError(f"point {tuple(bad)} is not contained in any region")
        return idx

    def step_many(self, points: np.ndarray) -> np.ndarray:
        idx = self.region_index_many(points)
        out = np.einsum("nij,nj->ni", self._matrices[idx], points) + self._offsets[idx]
        return out

    def output_many(self, points: np.ndarray) -> np.ndarray:
        return self._labels[self.region_index_many(points)]


def validate_system(sys: PiecewiseAffineSystem) -> list[str]:
    """Structural report: regions inside the space, pairwise disjoint
    (up to boundaries), and exactly tiling it by volume.

    All arithmetic is exact (`Fraction` on the binary float values), so a
    passing report certifies the tiling for the system as represented.
    """
    report: list[str] = []
    space = sys.space
    lo_s = [Fraction(v) for v in space.lower]
    hi_s = [Fraction(v) for v in space.upper]
    total = Fraction(0)
    boxes = []
    for r in sys.regions:
        lo = [Fraction(v) for v in r.box.lower]
        hi = [Fraction(v) for v in r.box.upper]
        boxes.append((r.name, lo, hi))
        if any(a < b for a, b in zip(lo, lo_s)) or any(a > b for a, b in zip(hi, hi_s)):
            report.append(f"region {r.name} is not contained in the space")
        vol = Fraction(1)
        for a, b in zip(lo, hi):
            vol *= b - a
        total += vol
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            name_i, lo_i, hi_i = boxes[i]
            name_j, lo_j, hi_j = boxes[j]
            if all(max(a, c) < min(b, d) for a, b, c, d in zip(lo_i, hi_i, lo_j, hi_j)):
                report.append(f"regions {name_i} and {name_j} overlap")
    space_vol = Fraction(1)
    for a, b in zip(lo_s, hi_s):
        space_vol *= b - a
    if total != space_vol:
        report.append(
            f"regions cover volume {float(total)!r} of the space's {float(space_vol)!r}"
        )
    return report


def check_closure(sys: DynamicalSystem, samples: int = 1_000_000, seed: int = 0) -> list[str]:
    """Report escapes of the step map from the state space.

    For piecewise-affine systems the corners of every region are checked
    exactly (the affine image of a box is the hull of its corner images, so
    corner containment certifies the whole region); a uniform sample audit
    runs regardless, which also exercises membership totality.
    """
    report: list[str] = []
    space = sys.space
    lo = np.asarray(space.lower)
    hi = np.asarray(space.upper)
    if isinstance(sys, PiecewiseAffineSystem):
        for r in sys.regions:
            corners = np.array(
                [
                    [r.box.lower[d] if (mask >> d) & 1 == 0 else r.box.upper[d]
                     for d in range(space.dimension)]
                    for mask in range(2 ** space.dimension)
                ]
            )
            images = r.map.apply_many(corners)
            if (images < lo - 1e-12).any() or (images > hi + 1e-12).any():
                report.append(f"region {r.name}: corner image escapes the space")
    rng = np.random.default_rng(seed)
    points = space.sample(rng, samples)
    stepped = sys.step_many(points)
    escapes = int(((stepped < lo) | (stepped > hi)).any(axis=1).sum())
    if escapes:
        report.append(f"{escapes} of {samples} sampled steps escape the space")
    return report


# --------------------------------------------------------------------------
# Word equivalence classes and measure oracles


def class_membership(sys: DynamicalSystem, x: Sequence[float], w: Word) -> bool:
    """Whether the next |w| outputs of the trajectory from x spell w."""
    word = tuple(int(a) for a in w)
    if not word:
        return True
    point = np.asarray(x, dtype=np.float64).reshape(1, -1)
    outs = sys.output_trajectory(point, len(word))
    return tuple(int(v) for v in outs[:, 0]) == word


@runtime_checkable
class RegionMeasureOracle(Protocol):
    """Queryable normalized volume of word classes, exact or Monte Carlo."""

    is_exact: bool

    def measure(self, word: Word) -> float: ...

    def measure_fraction(self, word: Word) -> Fraction: ...

    def for_system(self, sys: DynamicalSystem) -> "RegionMeasureOracle": ...


# A rational cell: per-dimension (lo, hi, upper_closed); lower edges are
# always closed.  Cells with lo == hi survive only when upper_closed — they
# have zero volume but positive-volume preimages under axis-flattening maps.
_Interval = tuple[Fraction, Fraction, bool]
_Cell = tuple[_Interval, ...]


def _interval_intersect(a: _Interval, b: _Interval) -> _Interval | None:
    lo = max(a[0], b[0])
    if a[1] < b[1]:
        hi, closed = a[1], a[2]
    elif b[1] < a[1]:
        hi, closed = b[1], b[2]
    else:
        hi, closed = a[1], a[2] and b[2]
    if lo < hi or (lo == hi and closed):
        return (lo, hi, closed)
    return None


def _cell_intersect(a: _Cell, b: _Cell) -> _Cell | None:
    out = []
    for ia, ib in zip(a, b):
        hit = _interval_intersect(ia, ib)
        if hit is None:
            return None
        out.append(hit)
    return tuple(out)


def _cell_volume(cell: _Cell) -> Fraction:
    v = Fraction(1)
    for lo, hi, _ in cell:
        v *= hi - lo
    return v


class ExactRegionOracle:
    """Closed-form class volumes for piecewise-affine systems whose maps are
    diagonal with nonnegative scales (preimages of boxes are then boxes).

    Classes are maintained as disjoint unions of rational cells via the
    prepend recursion: the class of a·v is, over the regions labeled a, the
    region intersected with the preimage of the class of v under the
    region's map.  Volumes are exact `Fraction`s of the binary values the
    system actually computes with.
    """

    is_exact = True

    def __init__(self, sys: PiecewiseAffineSystem) -> None:
        if not isinstance(sys, PiecewiseAffineSystem):
            raise ValidationError("the exact oracle requires a piecewise-affine system")
        self.sys = sys
        d = sys.dimension
        hi_space = [Fraction(v) for v in sys.space.upper]
        self._space_cell: _Cell = tuple(
            (Fraction(lo), hi, True)
            for lo, hi in zip(sys.space.lower, hi_space)
        )
        self._volume = _cell_volume(self._space_cell)
        self._regions: list[tuple[int, _Cell, list[Fraction], list[Fraction]]] = []
        for r in sys.regions:
            if not r.map.is_diagonal:
                raise ValidationError(
                    f"region {r.name}: exact volumes need a diagonal map; use the sampled oracle"
                )
            scale = [Fraction(r.map.matrix[i][i]) for i in range(d)]
            if any(s < 0 for s in scale):
                raise ValidationError(
                    f"region {r.name}: exact volumes need nonnegative scales"
                )
            cell: _Cell = tuple(
                (Fraction(lo), Fraction(hi), Fraction(hi) == hi_space[k])
                for k, (lo, hi) in enumerate(zip(r.box.lower, r.box.upper))
            )
            offset = [Fraction(v) for v in r.map.offset]
            self._regions.append((r.label, cell, scale, offset))
        self._cells: dict[Word, tuple[_Cell, ...]] = {(): (self._space_cell,)}

    def _preimage(self, cell: _Cell, scale: list[Fraction], offset: list[Fraction],
                  region_cell: _Cell) -> _Cell | None:
        """Region ∩ map⁻¹(cell), or None when empty."""
        out = []
        for (lo, hi, closed), s, b, reg in zip(cell, scale, offset, region_cell):
            if s > 0:
                pre: _Interval = ((lo - b) / s, (hi - b) / s, closed)
            else:
                # Constant coordinate: all of the region's extent or nothing.
                if lo <= b and (b < hi or (b == hi and closed)):
                    pre = reg
                else:
                    return None
            hit = _interval_intersect(pre, reg)
            if hit is None:
                return None
            out.append(hit)
        return tuple(out)

    def cells(self, word: Word) -> tuple[_Cell, ...]:
        word = tuple(int(a) for a in word)
        known = self._cells.get(word)
        if known is not None:
            return known
        tail = self.cells(word[1:])
        found = []
        for label, region_cell, scale, offset in self._regions:
            if label != word[0]:
                continue
            for cell in tail:
                hit = self._preimage(cell, scale, offset, region_cell)
                if hit is not None:
                    found.append(hit)
        result = tuple(found)
        self._cells[word] = result
        return result

    def measure_exact(self, word: Word) -> Fraction:
        return sum((_cell_volume(c) for c in self.cells(word)), Fraction(0)) / self._volume

    measure_fraction = measure_exact

    def measure(self, word: Word) -> float:
        return float(self.measure_exact(word))

    def for_system(self, sys: DynamicalSystem) -> "ExactRegionOracle":
        return ExactRegionOracle(sys)


class SampledRegionOracle:
    """Monte Carlo class volumes from one seeded pool of uniform points.

    Output symbols along the pool's trajectories are cached per depth and
    class masks per word, so measure queries cost one vectorized comparison.
    `for_system` reuses the identical pool on another system over the same
    space — paired estimates for comparing dynamics under actuation.
    """

    is_exact = False

    def __init__(
        self,
        sys: DynamicalSystem,
        samples: int = 1_000_000,
        seed: int = 0,
        _pool: np.ndarray | None = None,
    ) -> None:
        self.sys = sys
        self.samples = int(samples)
        self.seed = int(seed)
        if self.samples < 1:
            raise ValidationError("sample count must be positive")
        if _pool is None:
            rng = np.random.default_rng(self.seed)
            _pool = sys.space.sample(rng, self.samples)
        self._pool = _pool
        self._frontier = _pool
        self._outputs: list[np.ndarray] = []
        self._masks: dict[Word, np.ndarray] = {}

    def _output_at_depth(self, k: int) -> np.ndarray:
        while len(self._outputs) <= k:
            if self._outputs:
                self._frontier = self.sys.step_many(self._frontier)
            self._outputs.append(self.sys.output_many(self._frontier).astype(np.int16))
        return self._outputs[k]

    def mask(self, word: Word) -> np.ndarray:
        word = tuple(int(a) for a in word)
        if not word:
            return np.ones(self.samples, dtype=bool)
        cached = self._masks.get(word)
        if cached is None:
            cached = self.mask(word[:-1]) & (self._output_at_depth(len(word) - 1) == word[-1])
            self._masks[word] = cached
        return cached

    def count(self, word: Word) -> int:
        return int(self.mask(word).sum())

    def measure_fraction(self, word: Word) -> Fraction:
        return Fraction(self.count(word), self.samples)

    def measure(self, word: Word) -> float:
        return self.count(word) / self.samples

    def for_system(self, sys: DynamicalSystem) -> "SampledRegionOracle":
        if sys.space != self.sys.space:
            raise ValidationError("shared-pool oracles need systems over the same space")
        return SampledRegionOracle(sys, self.samples, self.seed, _pool=self._pool)


# --------------------------------------------------------------------------
# Adaptive partitions and abstractions


@dataclass(frozen=True)
class AdaptivePartition:
    """Prefix-free set of words whose classes tile the state space."""

    words: tuple[Word, ...]

    def __post_init__(self) -> None:
        words = tuple(sorted(tuple(int(a) for a in w) for w in self.words))
        if not words:
            raise ValidationError("a partition needs at least one word")
        for w in words:
            if not w:
                raise ValidationError("the empty word cannot be a partition element")
        for u, v in zip(words, words[1:]):
            if u == v:
                raise ValidationError(f"duplicate word {u}")
            if v[: len(u)] == u:
                raise ValidationError(f"{u} is a prefix of {v}; the set is not prefix-free")
        object.__setattr__(self, "words", words)

    @classmethod
    def initial(cls, alphabet: Alphabet) -> "AdaptivePartition":
        return cls(tuple((a,) for a in range(len(alphabet))))

    def __len__(self) -> int:
        return len(self.words)

    @property
    def max_length(self) -> int:
        return max(len(w) for w in self.words)

    def replace(self, word: Word, replacements: Iterable[Word]) -> "AdaptivePartition":
        word = tuple(int(a) for a in word)
        if word not in self.words:
            raise ValidationError(f"word {word} is not in the partition")
        rest = [w for w in self.words if w != word]
        return AdaptivePartition(tuple(rest) + tuple(replacements))

    def split(self, word: Word, alphabet: Alphabet) -> "AdaptivePartition":
        word = tuple(int(a) for a in word)
        return self.replace(word, tuple(word + (a,) for a in range(len(alphabet))))

    def _lookup(self, sys: DynamicalSystem, points: np.ndarray) -> np.ndarray:
        outs = sys.output_trajectory(points, self.max_length)
        idx = np.full(points.shape[0], -1, dtype=np.intp)
        for i, w in enumerate(self.words):
            member = np.ones(points.shape[0], dtype=bool)
            for k, a in enumerate(w):
                member &= outs[k] == a
            idx[member] = i
        return idx

    def lookup_many(self, sys: DynamicalSystem, points: np.ndarray) -> np.ndarray:
        """Index of the partition word containing each point."""
        idx = self._lookup(sys, points)
        if (idx < 0).any():
            bad = points[int(np.argmax(idx < 0))]
            raise CoveringError(f"point {tuple(bad)} is in no partition class")
        return idx


def check_covering(
    partition: AdaptivePartition,
    sys: DynamicalSystem,
    samples: int = 1_000_000,
    seed: int = 0,
) -> list[str]:
    """Statistical audit that every sampled point lies in exactly one class.

    Uniqueness is structural (prefix-freeness); the sampled check covers
    existence, which depends on the dynamics.
    """
    rng = np.random.default_rng(seed)
    points = sys.space.sample(rng, samples)
    idx = partition._lookup(sys, points)
    missing = int((idx < 0).sum())
    if missing:
        return [f"{missing} of {samples} sampled points fall in no class"]
    return []


@dataclass(frozen=True)
class Provenance:
    """How an abstraction's measures were obtained."""

    kind: str  # "exact" | "sampled"
    samples: int | None = None
    seed: int | None = None

    def __str__(self) -> str:
        if self.kind == "exact":
            return "exact"
        return f"sampled(count={self.samples}, seed={self.seed})"


@dataclass(frozen=True)
class Abstraction:
    """A partition together with its induced Markov chain."""

    partition: AdaptivePartition
    chain: LabeledMarkovChain
    provenance: Provenance

    @property
    def words(self) -> tuple[Word, ...]:
        return self.partition.words


def _compatible(w1: Word, w2: Word) -> bool:
    k = min(len(w1) - 1, len(w2))
    return w1[1 : 1 + k] == w2[:k]


def build_abstraction(
    sys: DynamicalSystem,
    partition: AdaptivePartition,
    measures: RegionMeasureOracle,
) -> Abstraction:
    """The Markov chain induced by a partition: state w has measure
    λ([w]), label w₁, and row entries λ([w₁·w₂])/λ([w₁]) over the words w₂
    whose prefix is compatible with the shift of w₁.

    Words of zero measure are dropped before the chain is built (their rows
    would be all-zero); every surviving row must be stochastic within 1e-6
    (exact oracle) or 5e-2 (sampled), else the partition and the oracle
    disagree about the dynamics and the named word is reported.  Rows and
    the initial measure are then normalized by their exact rational totals,
    which is the identity whenever the totals are exactly 1 (every exact
    benchmark case) and otherwise absorbs estimator slack into a
    well-formed chain.
    """
    bound_sys = getattr(measures, "sys", sys)
    if bound_sys is not sys:
        raise ValidationError("the measure oracle was built for a different system")
    lam: dict[Word, Fraction] = {w: measures.measure_fraction(w) for w in partition.words}
    keep = [w for w in partition.words if lam[w] > 0]
    if not keep:
        raise ValidationError("every partition word has zero measure")
    pruned = AdaptivePartition(tuple(keep))
    tol = 1e-6 if measures.is_exact else 5e-2
    n = len(keep)
    transition = np.zeros((n, n))
    for i, w1 in enumerate(keep):
        row = [Fraction(0)] * n
        for j, w2 in enumerate(keep):
            if _compatible(w1, w2):
                row[j] = measures.measure_fraction((w1[0],) + w2) / lam[w1]
        total = sum(row)
        if abs(float(total) - 1.0) > tol:
            raise ValidationError(
                f"transition row for word {w1} sums to {float(total)!r}, not 1"
            )
        transition[i] = [float(v / total) for v in row]
    mass = sum((lam[w] for w in keep), Fraction(0))
    initial = np.array([float(lam[w] / mass) for w in keep])
    labels = np.array([w[0] for w in keep], dtype=np.intp)
    chain = LabeledMarkovChain(
        alphabet=sys.alphabet, transition=transition, initial=initial, labels=labels
    )
    report = validate_chain(chain)
    if report:
        raise ValidationError("abstraction chain is malformed: " + "; ".join(report))
    if measures.is_exact:
        provenance = Provenance("exact")
    else:
        provenance = Provenance("sampled", measures.samples, measures.seed)  # type: ignore[attr-defined]
    return Abstraction(partition=pruned, chain=chain, provenance=provenance)


def benchmark_system() -> tuple[PiecewiseAffineSystem, ExactRegionOracle]:
    """The five-region system used throughout the tests and the CLI.

    X = [0,2] × [0,1]; the right half is an absorbing fixed-output block and
    the left half funnels mass through a shift → stretch → pause → escape
    cycle into it:

        P1 = [1,2] × [0,1]      label 0, F = id          (absorbing)
        P2 = [0,1] × [3/4,1]    label 1, x₂ ↦ x₂ − 1/4   (onto P3)
        P3 = [0,1] × [1/2,3/4]  label 1, x₂ ↦ 2x₂ − 1    (halves → P4, P5)
        P4 = [0,1] × [0,1/4]    label 1, F = id          (absorbing)
        P5 = [0,1] × [1/4,1/2]  label 1, (x₁,x₂) ↦ (x₁+1, 4x₂−1)  (onto P1)
    """
    alphabet = Alphabet(("0", "1"))
    space = Box((0.0, 0.0), (2.0, 1.0))
    eye = AffineMap.identity(2)
    regions = (
        Region("P1", Box((1.0, 0.0), (2.0, 1.0)), 0, eye),
        Region("P2", Box((0.0, 0.75), (1.0, 1.0)), 1, AffineMap.diagonal((1.0, 1.0), (0.0, -0.25))),
        Region("P3", Box((0.0, 0.5), (1.0, 0.75)), 1, AffineMap.diagonal((1.0, 2.0), (0.0, -1.0))),
        Region("P4", Box((0.0, 0.0), (1.0, 0.25)), 1, eye),
        Region("P5", Box((0.0, 0.25), (1.0, 0.5)), 1, AffineMap.diagonal((1.0, 4.0), (1.0, -1.0))),
    )
    sys = PiecewiseAffineSystem(space, alphabet, regions)
    return sys, ExactRegionOracle(sys)
