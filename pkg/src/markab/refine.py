"""Greedy adaptive refinement of partitions, with full tracing.

Starting from the single-symbol partition, each iteration splits every
current word into its one-symbol extensions, builds the candidate
abstraction, scores it by the approximate Kantorovich metric against the
current abstraction, and adopts the highest-scoring split (ties go to the
lexicographically first word).  The loop stops when the abstraction's
transition matrix is (within tolerance) zero-one — at which point the
abstraction generates exactly the words the concrete system does — or when
the iteration budget runs out.

Vacuous splits, where all of a word's mass lands in one child, produce an
abstraction isomorphic to the current one and score zero; they are
evaluated rather than pre-filtered, so the trace shows them explicitly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .chain import Alphabet, Word
from .dynsys import (
    Abstraction,
    AdaptivePartition,
    DynamicalSystem,
    ExactRegionOracle,
    PiecewiseAffineSystem,
    Provenance,
    RegionMeasureOracle,
    SampledRegionOracle,
    build_abstraction,
)
from .errors import ValidationError
from .kantorovich import chain_metric

DETERMINISM_TOL = 1e-9


@dataclass(frozen=True)
class RefinementConfig:
    """Knobs of the refinement loop.

    ``max_iterations=None`` means unbounded: run until the deterministic
    stopping rule fires (which the loop cannot promise on arbitrary
    systems — only that if it stops without a budget, the rule held).
    """

    epsilon: float = 1e-3
    max_iterations: int | None = None
    mode: str = "exact"
    samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon!r}")
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative or None")
        if self.samples < 1:
            raise ValueError("samples must be positive")


@dataclass(frozen=True)
class CandidateRecord:
    """One evaluated split: the word, its metric gain, and the state count
    of the abstraction it would produce."""

    word: Word
    distance: float
    states_after: int


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    partition: tuple[Word, ...]
    candidates: tuple[CandidateRecord, ...]
    chosen: int
    chosen_word: Word
    result: tuple[Word, ...]


@dataclass(frozen=True)
class RefinementTrace:
    """Complete record of a refinement run, one entry per adopted split."""

    alphabet: Alphabet
    records: tuple[IterationRecord, ...]
    final_partition: tuple[Word, ...]
    stop_reason: str  # "deterministic" | "budget-exhausted"
    deterministic: bool
    epsilon: float
    provenance: Provenance
    notes: tuple[str, ...] = ()

    @property
    def iterations(self) -> int:
        return len(self.records)

    def partition_sequence(self) -> tuple[tuple[Word, ...], ...]:
        return tuple(r.partition for r in self.records) + (self.final_partition,)

    def _fmt(self, words: tuple[Word, ...]) -> str:
        return "{" + ", ".join(self.alphabet.format_word(w) for w in words) + "}"

    def table(self) -> str:
        lines = [f"{'iter':>4}  {'states':>6}  {'split':>6}  {'distance':>12}  partition"]
        for r in self.records:
            d = r.candidates[r.chosen].distance
            lines.append(
                f"{r.iteration:>4}  {len(r.partition):>6}  "
                f"{self.alphabet.format_word(r.chosen_word):>6}  {d:>12.6f}  "
                f"{self._fmt(r.partition)}"
            )
        flag = "deterministic" if self.deterministic else "not deterministic"
        lines.append(
            f"{self.iterations:>4}  {len(self.final_partition):>6}  "
            f"{'-':>6}  {'-':>12}  {self._fmt(self.final_partition)}"
        )
        lines.append(f"stop: {self.stop_reason} ({flag})")
        lines.extend(self.notes)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        fmt = self.alphabet.format_word
        return {
            "epsilon": self.epsilon,
            "provenance": str(self.provenance),
            "stop_reason": self.stop_reason,
            "deterministic": self.deterministic,
            "iterations": self.iterations,
            "records": [
                {
                    "iteration": r.iteration,
                    "partition": [fmt(w) for w in r.partition],
                    "candidates": [
                        {
                            "word": fmt(c.word),
                            "distance": c.distance,
                            "states_after": c.states_after,
                        }
                        for c in r.candidates
                    ],
                    "chosen": r.chosen,
                    "chosen_word": fmt(r.chosen_word),
                    "result": [fmt(w) for w in r.result],
                }
                for r in self.records
            ],
            "final_partition": [fmt(w) for w in self.final_partition],
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def is_deterministic(abstraction: Abstraction) -> bool:
    """Whether every transition entry is 0 or 1 up to the mode's tolerance.

    Exact abstractions use an absolute 1e-9 band.  Sampled ones use a
    three-standard-error binomial band per entry, with the per-row sample
    count recovered from the state's measure and the recorded pool size.
    """
    p = abstraction.chain.transition
    deviation = np.minimum(p, 1.0 - p)
    if abstraction.provenance.kind == "exact":
        return bool((deviation <= DETERMINISM_TOL).all())
    pool = abstraction.provenance.samples or 1
    counts = np.maximum(np.rint(abstraction.chain.initial * pool), 1.0)
    band = 3.0 * np.sqrt(np.maximum(p * (1.0 - p), 0.0) / counts[:, None])
    return bool((deviation <= band).all())


def _default_oracle(sys: DynamicalSystem, config: RefinementConfig) -> RegionMeasureOracle:
    if config.mode == "exact":
        if not isinstance(sys, PiecewiseAffineSystem):
            raise ValidationError("exact mode needs a piecewise-affine system")
        return ExactRegionOracle(sys)
    return SampledRegionOracle(sys, config.samples, config.seed)


def refine(
    sys: DynamicalSystem,
    config: RefinementConfig = RefinementConfig(),
    measures: RegionMeasureOracle | None = None,
) -> tuple[Abstraction, RefinementTrace]:
    """Run the greedy refinement loop; returns the final abstraction and the
    per-iteration trace.

    Each iteration evaluates one candidate per current word (splitting that
    word into its one-symbol extensions, empty children dropped), scores
    candidates with ``chain_metric`` at the configured accuracy against the
    current abstraction, and adopts the argmax, lowest index on ties.
    """
    oracle = measures if measures is not None else _default_oracle(sys, config)
    try:
        current = build_abstraction(sys, AdaptivePartition.initial(sys.alphabet), oracle)
    except ValidationError as err:
        raise ValidationError(f"initial abstraction: {err}") from err
    records: list[IterationRecord] = []
    iteration = 0
    while True:
        if is_deterministic(current):
            stop = "deterministic"
            break
        if config.max_iterations is not None and iteration >= config.max_iterations:
            stop = "budget-exhausted"
            break
        candidates: list[CandidateRecord] = []
        built: list[Abstraction] = []
        for word in current.partition.words:
            split = current.partition.split(word, sys.alphabet)
            try:
                candidate = build_abstraction(sys, split, oracle)
            except ValidationError as err:
                raise ValidationError(
                    f"iteration {iteration}, splitting {sys.alphabet.format_word(word)}: {err}"
                ) from err
            distance = chain_metric(current.chain, candidate.chain, config.epsilon).value
            candidates.append(CandidateRecord(word, distance, len(candidate.words)))
            built.append(candidate)
        best = 0
        for k in range(1, len(candidates)):
            if candidates[k].distance > candidates[best].distance:
                best = k
        records.append(
            IterationRecord(
                iteration=iteration,
                partition=current.partition.words,
                candidates=tuple(candidates),
                chosen=best,
                chosen_word=candidates[best].word,
                result=built[best].partition.words,
            )
        )
        current = built[best]
        iteration += 1
    notes: tuple[str, ...] = ()
    if current.provenance.kind == "sampled":
        notes = (
            f"determinism tested with a 3-standard-error band over "
            f"{current.provenance.samples} samples (seed {current.provenance.seed})",
        )
    trace = RefinementTrace(
        alphabet=sys.alphabet,
        records=tuple(records),
        final_partition=current.partition.words,
        stop_reason=stop,
        deterministic=stop == "deterministic",
        epsilon=config.epsilon,
        provenance=current.provenance,
        notes=notes,
    )
    return current, trace


def behavior_equivalence_check(
    sys: DynamicalSystem,
    abstraction: Abstraction,
    horizon: int,
    samples: int,
    seed: int = 0,
) -> list[str]:
    """Two-sided finite-horizon audit of a deterministic abstraction.

    Simulates ``samples`` uniform initial points for ``horizon`` output
    symbols and compares the set of observed words with the abstraction's
    positive-probability words of that length.  Both inclusions are
    reported: observed-but-impossible words and supported-but-unseen words
    (the latter is meaningful when samples vastly exceed the support size).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not is_deterministic(abstraction):
        raise ValidationError("behavior equivalence is only claimed for deterministic abstractions")
    rng = np.random.default_rng(seed)
    points = sys.space.sample(rng, samples)
    outs = sys.output_trajectory(points, horizon)
    observed = {tuple(int(v) for v in row) for row in np.unique(outs.T, axis=0)}
    chain = abstraction.chain
    supported = set()
    for s in range(chain.n_states):
        if chain.initial[s] <= 1e-12:
            continue
        word = []
        state = s
        for _ in range(horizon):
            word.append(int(chain.labels[state]))
            state = int(np.argmax(chain.transition[state]))
        supported.add(tuple(word))
    fmt = sys.alphabet.format_word
    report = [
        f"observed word {fmt(w)} has zero probability under the abstraction"
        for w in sorted(observed - supported)
    ]
    report.extend(
        f"abstraction word {fmt(w)} has positive probability but was never observed"
        for w in sorted(supported - observed)
    )
    return report
