"""The greedy refinement loop on the benchmark system.

The benchmark's refinement path is fully predictable from its exact class
measures — three splits along the 1-branch, then a deterministic chain —
so these tests pin the entire trace, not just the endpoint.
"""

import numpy as np
import pytest

from markab import (
    Abstraction,
    AdaptivePartition,
    AffineMap,
    Alphabet,
    Box,
    LabeledMarkovChain,
    PiecewiseAffineSystem,
    Provenance,
    RefinementConfig,
    Region,
    SampledRegionOracle,
    ValidationError,
    behavior_equivalence_check,
    build_abstraction,
    is_deterministic,
    refine,
)

FINAL_WORDS = ((0,), (1, 0), (1, 1, 0), (1, 1, 1, 0), (1, 1, 1, 1))


@pytest.fixture(scope="module")
def exact_run(benchmark):
    sys, _ = benchmark
    return refine(sys, RefinementConfig(epsilon=1e-3, mode="exact"))


class TestRefinementConfig:
    def test_defaults(self):
        config = RefinementConfig()
        assert config.epsilon == 1e-3
        assert config.max_iterations is None
        assert config.mode == "exact"
        assert config.samples == 1_000_000 and config.seed == 0

    @pytest.mark.parametrize("epsilon", [0.0, 1.0, -0.1, 2.0])
    def test_epsilon_range(self, epsilon):
        with pytest.raises(ValueError, match="epsilon"):
            RefinementConfig(epsilon=epsilon)

    def test_mode_names(self):
        with pytest.raises(ValueError, match="mode"):
            RefinementConfig(mode="monte-carlo")

    def test_budget_and_samples(self):
        with pytest.raises(ValueError, match="max_iterations"):
            RefinementConfig(max_iterations=-1)
        with pytest.raises(ValueError, match="samples"):
            RefinementConfig(samples=0)


class TestBenchmarkRefinement:
    def test_full_partition_sequence(self, exact_run):
        _, trace = exact_run
        assert trace.partition_sequence() == (
            ((0,), (1,)),
            ((0,), (1, 0), (1, 1)),
            ((0,), (1, 0), (1, 1, 0), (1, 1, 1)),
            FINAL_WORDS,
        )
        assert trace.final_partition == FINAL_WORDS
        assert trace.iterations == 3

    def test_stops_by_the_deterministic_rule(self, exact_run):
        abstraction, trace = exact_run
        assert trace.stop_reason == "deterministic"
        assert trace.deterministic is True
        assert is_deterministic(abstraction)
        assert str(trace.provenance) == "exact"
        assert trace.notes == ()

    def test_splits_walk_down_the_one_branch(self, exact_run):
        _, trace = exact_run
        assert [r.chosen_word for r in trace.records] == [(1,), (1, 1), (1, 1, 1)]

    def test_chosen_split_is_the_first_argmax(self, exact_run):
        _, trace = exact_run
        for record in trace.records:
            distances = [c.distance for c in record.candidates]
            best = max(distances)
            assert distances[record.chosen] == best
            assert record.chosen == distances.index(best)
            assert best > 1e-4

    def test_splitting_the_absorbing_block_gains_nothing(self, exact_run):
        """Splitting 0 only renames the absorbing state, so its candidate
        distance is zero at every iteration and it is never adopted."""
        _, trace = exact_run
        for record in trace.records:
            zero_candidates = [c for c in record.candidates if c.word[0] == 0]
            assert zero_candidates and all(c.distance <= 1e-9 for c in zero_candidates)

    def test_state_counts_grow_by_one(self, exact_run):
        _, trace = exact_run
        for k, record in enumerate(trace.records):
            assert record.iteration == k
            assert len(record.partition) == k + 2
        assert len(trace.final_partition) == 5

    def test_budget_of_one_stops_after_the_first_split(self, benchmark):
        sys, _ = benchmark
        abstraction, trace = refine(sys, RefinementConfig(max_iterations=1))
        assert trace.stop_reason == "budget-exhausted"
        assert trace.deterministic is False
        assert trace.final_partition == ((0,), (1, 0), (1, 1))
        assert abstraction.words == trace.final_partition

    def test_zero_budget_returns_the_initial_partition(self, benchmark):
        sys, _ = benchmark
        _, trace = refine(sys, RefinementConfig(max_iterations=0))
        assert trace.records == ()
        assert trace.final_partition == ((0,), (1,))
        assert trace.stop_reason == "budget-exhausted"

    def test_table_and_dict_render_the_run(self, exact_run):
        _, trace = exact_run
        table = trace.table()
        assert "stop: deterministic (deterministic)" in table
        assert "{0, 10, 110, 1110, 1111}" in table
        doc = trace.to_dict()
        assert doc["stop_reason"] == "deterministic"
        assert doc["final_partition"] == ["0", "10", "110", "1110", "1111"]
        assert doc["records"][0]["chosen_word"] == "1"
        assert doc["records"][2]["partition"] == ["0", "10", "110", "111"]


class TestTrivialSystems:
    def test_one_effective_class_is_deterministic_at_once(self):
        box = Box((0.0, 0.0), (1.0, 1.0))
        sys = PiecewiseAffineSystem(box, Alphabet(("a", "b")), (Region("all", box, 0),))
        abstraction, trace = refine(sys)
        assert trace.records == ()
        assert trace.stop_reason == "deterministic"
        assert abstraction.words == ((0,),)
        assert np.array_equal(abstraction.chain.transition, [[1.0]])

    def test_exact_mode_needs_a_tractable_system(self):
        box = Box((0.0, 0.0), (1.0, 1.0))
        swap = AffineMap(((0.0, 1.0), (1.0, 0.0)), (0.0, 0.0))
        rotate = PiecewiseAffineSystem(
            box, Alphabet(("a", "b")), (Region("all", box, 0, swap),)
        )
        with pytest.raises(ValidationError, match="diagonal"):
            refine(rotate, RefinementConfig(mode="exact"))


class TestIsDeterministic:
    def test_benchmark_endpoints(self, benchmark):
        sys, oracle = benchmark
        initial = build_abstraction(sys, AdaptivePartition.initial(sys.alphabet), oracle)
        final = build_abstraction(sys, AdaptivePartition(FINAL_WORDS), oracle)
        assert not is_deterministic(initial)
        assert is_deterministic(final)

    def test_sampled_band_scales_with_the_pool(self):
        """A 0.999 row passes the three-sigma band for a small pool but is
        resolved as genuinely non-deterministic once the pool is large."""
        alphabet = Alphabet(("0", "1"))
        chain = LabeledMarkovChain(
            alphabet=alphabet,
            transition=np.array([[0.999, 0.001], [0.001, 0.999]]),
            initial=np.array([0.5, 0.5]),
            labels=np.array([0, 1]),
        )
        part = AdaptivePartition(((0,), (1,)))
        small = Abstraction(part, chain, Provenance("sampled", samples=1_000, seed=0))
        large = Abstraction(part, chain, Provenance("sampled", samples=1_000_000, seed=0))
        assert is_deterministic(small)
        assert not is_deterministic(large)


class TestSampledMode:
    def test_sampled_run_matches_the_exact_trace(self, benchmark):
        sys, _ = benchmark
        config = RefinementConfig(mode="sampled", samples=200_000, seed=1)
        abstraction, trace = refine(sys, config)
        assert trace.final_partition == FINAL_WORDS
        assert trace.stop_reason == "deterministic"
        assert [r.chosen_word for r in trace.records] == [(1,), (1, 1), (1, 1, 1)]
        assert str(trace.provenance) == "sampled(count=200000, seed=1)"
        assert any("3-standard-error" in note for note in trace.notes)

    def test_same_seed_gives_identical_traces(self, benchmark):
        sys, _ = benchmark
        config = RefinementConfig(mode="sampled", samples=100_000, seed=7)
        _, first = refine(sys, config)
        _, second = refine(sys, config)
        assert first.to_json() == second.to_json()


class TestBehaviorEquivalence:
    def test_final_abstraction_passes(self, benchmark, exact_run):
        sys, _ = benchmark
        abstraction, _ = exact_run
        assert behavior_equivalence_check(sys, abstraction, horizon=8, samples=50_000) == []

    def test_horizon_one_is_trivially_equivalent(self, benchmark, exact_run):
        sys, _ = benchmark
        abstraction, _ = exact_run
        assert behavior_equivalence_check(sys, abstraction, horizon=1, samples=5_000) == []

    def test_rewired_abstraction_is_caught(self, benchmark, exact_run):
        sys, _ = benchmark
        abstraction, _ = exact_run
        chain = abstraction.chain
        rewired = np.array(chain.transition)
        rewired[0] = 0.0
        rewired[0, 1] = 1.0  # the absorbing block now claims to alternate labels
        bad_chain = LabeledMarkovChain(
            alphabet=chain.alphabet,
            transition=rewired,
            initial=chain.initial,
            labels=chain.labels,
        )
        bad = Abstraction(abstraction.partition, bad_chain, abstraction.provenance)
        report = behavior_equivalence_check(sys, bad, horizon=5, samples=20_000)
        assert any("zero probability" in line for line in report)
        assert any("never observed" in line for line in report)

    def test_preconditions(self, benchmark, exact_run):
        sys, oracle = benchmark
        abstraction, _ = exact_run
        with pytest.raises(ValueError, match="horizon"):
            behavior_equivalence_check(sys, abstraction, horizon=0, samples=10)
        coarse = build_abstraction(sys, AdaptivePartition.initial(sys.alphabet), oracle)
        with pytest.raises(ValidationError, match="deterministic"):
            behavior_equivalence_check(sys, coarse, horizon=3, samples=10)
