"""Controller synthesis on abstractions: actuated systems, per-action
abstraction MDPs, value iteration, and closed-loop Monte Carlo evaluation.

The controlled model adds a finite set of nonnegative input values that
shift the state along one axis before the step map runs, clamped at the
space's upper face.  For each action the actuated dynamics is itself a
piecewise-affine system (the clamp splits the space into a shifted band and
a flattened band, composed with the base pieces), so the same abstraction
machinery applies per action.  Rewards are 1 on states whose output symbol
is index 0 and the objective is expected discounted reward.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import json

import numpy as np

from .chain import Alphabet, Word
from .dynsys import (
    AdaptivePartition,
    AffineMap,
    Box,
    PiecewiseAffineSystem,
    Region,
    RegionMeasureOracle,
    benchmark_system,
)
from .errors import ValidationError

VALUE_ITERATION_TOL = 1e-8
REWARD_SYMBOL = 0


def _box_intersection(a: Box, b: Box) -> Box | None:
    lo = tuple(max(x, y) for x, y in zip(a.lower, b.lower))
    hi = tuple(min(x, y) for x, y in zip(a.upper, b.upper))
    if all(x < y for x, y in zip(lo, hi)):
        return Box(lo, hi)
    return None


@dataclass(frozen=True)
class ControlledSystem:
    """A base system plus additive inputs along one axis, clamped into X."""

    base: PiecewiseAffineSystem
    actions: tuple[float, ...]
    axis: int = 1

    def __post_init__(self) -> None:
        actions = tuple(float(u) for u in self.actions)
        if not actions:
            raise ValidationError("at least one action is required")
        if len(set(actions)) != len(actions):
            raise ValidationError("actions must be distinct")
        if not 0 <= self.axis < self.base.dimension:
            raise ValidationError(f"axis {self.axis} out of range")
        width = self.base.space.upper[self.axis] - self.base.space.lower[self.axis]
        for u in actions:
            if not 0.0 <= u <= width:
                raise ValidationError(
                    f"action {u!r} must lie in [0, {width!r}] (upward shifts only)"
                )
        object.__setattr__(self, "actions", actions)

    def actuate_many(self, points: np.ndarray, u: float | np.ndarray) -> np.ndarray:
        """Apply the clamped shift; ``u`` may be a scalar or one value per point."""
        out = points.copy()
        hi = self.base.space.upper[self.axis]
        out[:, self.axis] = np.minimum(points[:, self.axis] + u, hi)
        return out

    def step_many(self, points: np.ndarray, u: float) -> np.ndarray:
        return self.base.step_many(self.actuate_many(points, u))

    def actuated(self, u: float) -> PiecewiseAffineSystem:
        """The autonomous system x ↦ F(x + u·e_axis clamped), same outputs.

        Outputs come from the region containing x itself, maps from the
        region the actuated point lands in; pieces are the intersections of
        the two tilings.  ``u = 0`` returns the base system unchanged.
        """
        u = float(u)
        if u == 0.0:
            return self.base
        base = self.base
        j = self.axis
        lo_x = base.space.lower[j]
        hi_x = base.space.upper[j]
        d = base.dimension
        shift = AffineMap.diagonal((1.0,) * d, tuple(u if k == j else 0.0 for k in range(d)))
        flatten = AffineMap.diagonal(
            tuple(0.0 if k == j else 1.0 for k in range(d)),
            tuple(hi_x if k == j else 0.0 for k in range(d)),
        )
        pieces: list[Region] = []
        for r in base.regions:
            # Band that shifts into r: x + u·e_j ∈ r.box, below the clamp.
            s_lo = max(r.box.lower[j] - u, lo_x)
            s_hi = min(r.box.upper[j] - u, hi_x - u)
            if s_lo < s_hi:
                lower = tuple(s_lo if k == j else r.box.lower[k] for k in range(d))
                upper = tuple(s_hi if k == j else r.box.upper[k] for k in range(d))
                self._emit(pieces, Box(lower, upper), r.map.compose(shift), f"{r.name}~shift")
            # Band that clamps onto the upper face and lands in r.
            if r.box.upper[j] == hi_x:
                lower = tuple(hi_x - u if k == j else r.box.lower[k] for k in range(d))
                upper = tuple(hi_x if k == j else r.box.upper[k] for k in range(d))
                self._emit(pieces, Box(lower, upper), r.map.compose(flatten), f"{r.name}~clamp")
        return PiecewiseAffineSystem(base.space, base.alphabet, pieces)

    def _emit(self, pieces: list[Region], band: Box, map_: AffineMap, name: str) -> None:
        # Split the band over the base regions so each piece keeps the
        # output symbol of the region the *un-actuated* point lies in.
        for q in self.base.regions:
            overlap = _box_intersection(band, q.box)
            if overlap is not None:
                pieces.append(Region(f"{name}|{q.name}", overlap, q.label, map_))


def benchmark_controlled_system() -> ControlledSystem:
    """The benchmark with inputs {0, 1/4, 1/2} acting upward on x₂."""
    sys, _ = benchmark_system()
    return ControlledSystem(sys, (0.0, 0.25, 0.5), axis=1)


@dataclass(frozen=True)
class AbstractMdp:
    """Per-action abstraction chains over one shared partition."""

    alphabet: Alphabet
    words: tuple[Word, ...]
    actions: tuple[float, ...]
    transitions: np.ndarray  # (n_actions, n_states, n_states)
    rewards: np.ndarray  # (n_states,)
    gamma: float

    def __post_init__(self) -> None:
        t = np.asarray(self.transitions, dtype=np.float64)
        r = np.asarray(self.rewards, dtype=np.float64)
        n = len(self.words)
        if t.shape != (len(self.actions), n, n):
            raise ValidationError(f"transition stack has shape {t.shape}")
        if r.shape != (n,):
            raise ValidationError(f"reward vector has shape {r.shape}")
        if (t < 0).any() or np.abs(t.sum(axis=2) - 1.0).max() > 1e-6:
            raise ValidationError("per-action transition matrices must be row-stochastic")
        if not 0.0 <= self.gamma < 1.0:
            raise ValidationError(f"discount must be in [0, 1), got {self.gamma!r}")
        t.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "transitions", t)
        object.__setattr__(self, "rewards", r)

    @property
    def n_states(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class Policy:
    """Total map from partition words to action values."""

    words: tuple[Word, ...]
    choices: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.words) != len(self.choices):
            raise ValidationError("one action per word is required")

    def action_for(self, word: Word) -> float:
        word = tuple(int(a) for a in word)
        for w, u in zip(self.words, self.choices):
            if w == word:
                return u
        raise ValidationError(f"word {word} is not covered by the policy")

    def as_dict(self, alphabet: Alphabet) -> dict[str, float]:
        return {alphabet.format_word(w): u for w, u in zip(self.words, self.choices)}


def build_mdp(
    csys: ControlledSystem,
    partition: AdaptivePartition,
    measures: RegionMeasureOracle,
    gamma: float,
) -> AbstractMdp:
    """One abstraction chain per action over the shared partition words.

    ``measures`` must be bound to the base system; per-action oracles are
    derived from it (the sampled oracle reuses its pool, pairing the
    estimates).  A word can have zero measure under some action's dynamics;
    its row becomes a self-loop, which is sound only because such states
    must also receive no mass under that action — violations are errors.
    """
    words = partition.words
    n = len(words)
    stacks = []
    for u in csys.actions:
        actuated = csys.actuated(u)
        oracle = measures if actuated is csys.base else measures.for_system(actuated)
        lam = {w: oracle.measure_fraction(w) for w in words}
        zero_tol = 1e-9 if oracle.is_exact else 5e-2
        matrix = np.zeros((n, n))
        for i, w1 in enumerate(words):
            if lam[w1] == 0:
                matrix[i, i] = 1.0
                continue
            row = [Fraction(0)] * n
            for j, w2 in enumerate(words):
                k = min(len(w1) - 1, len(w2))
                if w1[1 : 1 + k] != w2[:k]:
                    continue
                value = oracle.measure_fraction((w1[0],) + w2) / lam[w1]
                if lam[w2] == 0:
                    if float(value) > zero_tol:
                        raise ValidationError(
                            f"action {u}: word {w2} has zero measure but receives "
                            f"{float(value)!r} from {w1}"
                        )
                    continue
                row[j] = value
            total = sum(row)
            if abs(float(total) - 1.0) > (1e-6 if oracle.is_exact else 5e-2):
                raise ValidationError(
                    f"action {u}: transition row for {w1} sums to {float(total)!r}"
                )
            matrix[i] = [float(v / total) for v in row]
        stacks.append(matrix)
    rewards = np.array([1.0 if w[0] == REWARD_SYMBOL else 0.0 for w in words])
    return AbstractMdp(
        alphabet=csys.base.alphabet,
        words=words,
        actions=csys.actions,
        transitions=np.stack(stacks),
        rewards=rewards,
        gamma=float(gamma),
    )


def value_iteration(
    mdp: AbstractMdp, tol: float = VALUE_ITERATION_TOL
) -> tuple[np.ndarray, Policy]:
    """Bellman backups to a sup-norm fixed point; greedy policy extraction
    with ties broken toward the lowest action index."""
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    if np.abs(mdp.transitions.sum(axis=2) - 1.0).max() > 1e-6:
        raise ValidationError("transition matrices are not row-stochastic")
    values = np.zeros(mdp.n_states)
    while True:
        q = mdp.rewards[None, :] + mdp.gamma * np.einsum("aij,j->ai", mdp.transitions, values)
        updated = q.max(axis=0)
        if np.abs(updated - values).max() < tol:
            values = updated
            break
        values = updated
    greedy = np.argmax(q, axis=0)
    policy = Policy(words=mdp.words, choices=tuple(mdp.actions[k] for k in greedy))
    return values, policy


REWARD_CONVENTION = "sum over k = 1..length of gamma^k * r(x_k), x_1 uniform on X"


@dataclass(frozen=True)
class RewardEstimate:
    """Monte Carlo estimate of expected discounted reward."""

    value: float
    standard_error: float
    trajectories: int
    length: int
    gamma: float
    convention: str = REWARD_CONVENTION


def evaluate_policy(
    csys: ControlledSystem,
    partition: AdaptivePartition,
    policy: Policy,
    gamma: float,
    trajectories: int = 5000,
    length: int = 1000,
    seed: int = 0,
) -> RewardEstimate:
    """Closed-loop rollout: at each step the current point's partition word
    (under the base dynamics) selects the action, the actuated step runs,
    and the discounted reward accumulates.

    The reward of a point is 1 exactly when its output symbol is index 0;
    since a class's first symbol is its output, rewards are read off the
    word lookup.  Identical seeds give bit-identical estimates.
    """
    if trajectories < 2:
        raise ValidationError("need at least two trajectories for a standard error")
    if length < 1:
        raise ValidationError("trajectory length must be positive")
    actions = np.array([policy.action_for(w) for w in partition.words])
    rewards = np.array([1.0 if w[0] == REWARD_SYMBOL else 0.0 for w in partition.words])
    base = csys.base
    rng = np.random.default_rng(seed)
    points = base.space.sample(rng, trajectories)
    totals = np.zeros(trajectories)
    discount = float(gamma)
    for _ in range(length):
        if discount == 0.0:
            break
        idx = partition.lookup_many(base, points)
        totals += discount * rewards[idx]
        points = base.step_many(csys.actuate_many(points, actions[idx]))
        discount *= gamma
    mean = float(totals.mean())
    se = float(totals.std(ddof=1) / np.sqrt(trajectories))
    return RewardEstimate(
        value=mean,
        standard_error=se,
        trajectories=trajectories,
        length=int(length),
        gamma=float(gamma),
    )


@dataclass(frozen=True)
class ControlRow:
    """One refinement stage: its partition size, policy, and reward."""

    iteration: int
    partition: tuple[Word, ...]
    policy: Policy
    values: np.ndarray
    reward: RewardEstimate


@dataclass(frozen=True)
class ControlReport:
    alphabet: Alphabet
    rows: tuple[ControlRow, ...]
    gamma: float
    monotone_band: float = 2.0

    def non_decreasing(self) -> bool:
        """Rewards never drop by more than ``monotone_band`` pooled standard
        errors between consecutive refinement stages."""
        for a, b in zip(self.rows, self.rows[1:]):
            pooled = np.hypot(a.reward.standard_error, b.reward.standard_error)
            if b.reward.value < a.reward.value - self.monotone_band * pooled:
                return False
        return True

    def table(self) -> str:
        lines = [f"{'iter':>4}  {'states':>6}  {'reward':>10}  {'stderr':>8}  policy"]
        for row in self.rows:
            policy = " ".join(
                f"{self.alphabet.format_word(w)}:{u:g}"
                for w, u in zip(row.policy.words, row.policy.choices)
            )
            lines.append(
                f"{row.iteration:>4}  {len(row.partition):>6}  "
                f"{row.reward.value:>10.4f}  {row.reward.standard_error:>8.4f}  {policy}"
            )
        verdict = "yes" if self.non_decreasing() else "no"
        lines.append(f"non-decreasing within {self.monotone_band:g} pooled standard errors: {verdict}")
        lines.append(f"reward convention: {REWARD_CONVENTION}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        fmt = self.alphabet.format_word
        return {
            "gamma": self.gamma,
            "rows": [
                {
                    "iteration": row.iteration,
                    "partition": [fmt(w) for w in row.partition],
                    "policy": {fmt(w): u for w, u in zip(row.policy.words, row.policy.choices)},
                    "values": [float(v) for v in row.values],
                    "reward": row.reward.value,
                    "standard_error": row.reward.standard_error,
                    "trajectories": row.reward.trajectories,
                    "length": row.reward.length,
                }
                for row in self.rows
            ],
            "non_decreasing": self.non_decreasing(),
            "band": self.monotone_band,
            "convention": REWARD_CONVENTION,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def control_pipeline(
    csys: ControlledSystem,
    refine_config: "RefinementConfig | None" = None,
    gamma: float = 0.95,
    trajectories: int = 5000,
    length: int = 1000,
    seed: int = 0,
    measures: RegionMeasureOracle | None = None,
) -> tuple[ControlReport, "RefinementTrace"]:
    """Refine the base system, then solve and evaluate a policy at every
    refinement stage (the four-row report of the benchmark run).

    All stages are evaluated with the same rollout seed, so their initial
    points are paired and reward differences are not drowned in sampling
    noise from fresh draws.
    """
    from .refine import RefinementConfig, refine, _default_oracle

    config = refine_config if refine_config is not None else RefinementConfig()
    oracle = measures if measures is not None else _default_oracle(csys.base, config)
    _, trace = refine(csys.base, config, measures=oracle)
    rows = []
    for i, words in enumerate(trace.partition_sequence()):
        partition = AdaptivePartition(words)
        mdp = build_mdp(csys, partition, oracle, gamma)
        values, policy = value_iteration(mdp)
        estimate = evaluate_policy(csys, partition, policy, gamma, trajectories, length, seed)
        rows.append(ControlRow(i, partition.words, policy, values, estimate))
    report = ControlReport(alphabet=csys.base.alphabet, rows=tuple(rows), gamma=float(gamma))
    return report, trace

