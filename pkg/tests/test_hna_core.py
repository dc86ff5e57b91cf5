"""Tests for distributions, the Hardy witness and the local-hidden-variable bound."""
import itertools
from fractions import Fraction

import numpy as np
import pytest

from src.hna_core import (
    ALL_STRATEGIES,
    FORBIDDEN_EVENTS,
    OUTCOME_PAIRS,
    SETTING_PAIRS,
    AllZeroCounts,
    Constraint,
    ConstraintSet,
    InvalidCounts,
    InvalidDistribution,
    JointDistribution,
    MissingSetting,
    Outcome,
    SettingPair,
    Strategy,
    Verdict,
    admissible_strategies,
    all_constraint_sets,
    build_distribution,
    hardy_q,
    is_no_signaling,
    lhv_max_q,
    mixture_max_q,
    pure_max_q,
    target_strategies,
)

P, M = Outcome.PLUS, Outcome.MINUS


def uniform_counts():
    return {pair: [1, 1, 1, 1] for pair in (SettingPair(i, j) for i in (1, 2) for j in (1, 2))}


class TestBuildDistribution:
    """Normalizing raw counts."""

    def test_sequence_counts_normalize_per_setting(self, hardy_distribution):
        assert hardy_distribution.prob(SettingPair(2, 2), P, P) == pytest.approx(0.1)
        assert hardy_distribution.prob(SettingPair(1, 1), P, M) == pytest.approx(0.3)
        for pair in hardy_distribution.table:
            assert sum(hardy_distribution.table[pair].values()) == pytest.approx(1.0, abs=1e-12)

    def test_mapping_counts(self):
        counts = uniform_counts()
        counts[SettingPair(1, 1)] = {(1, 1): 2, (-1, -1): 2}
        dist = build_distribution(counts)
        assert dist.prob(SettingPair(1, 1), P, P) == 0.5
        assert dist.prob(SettingPair(1, 1), P, M) == 0.0

    def test_all_zero_setting_rejected(self):
        counts = uniform_counts()
        counts[SettingPair(2, 1)] = [0, 0, 0, 0]
        with pytest.raises(AllZeroCounts) as excinfo:
            build_distribution(counts)
        assert "(2,1)" in str(excinfo.value)

    def test_missing_setting_rejected(self):
        counts = uniform_counts()
        del counts[SettingPair(1, 2)]
        with pytest.raises(MissingSetting):
            build_distribution(counts)

    def test_negative_count_rejected(self):
        counts = uniform_counts()
        counts[SettingPair(1, 1)] = [1, -1, 1, 1]
        with pytest.raises(InvalidCounts):
            build_distribution(counts)

    def test_published_sales_counts(self):
        counts = uniform_counts()
        counts[SettingPair(1, 1)] = {(P, M): 5186, (M, P): 110592}
        counts[SettingPair(1, 2)] = {(P, M): 5186, (M, M): 110592}
        counts[SettingPair(2, 1)] = {(P, P): 1}
        counts[SettingPair(2, 2)] = [50373989, 0, 0, 1273102156]
        w = hardy_q(build_distribution(counts))
        assert w.q == pytest.approx(0.038062, abs=5e-7)
        assert (w.p1, w.p2, w.p3) == (0.0, 0.0, 0.0)
        assert w.verdict is Verdict.NON_CLASSICAL

    def test_single_outcome_normalizes_to_one(self):
        counts = uniform_counts()
        counts[SettingPair(2, 2)] = [1, 0, 0, 0]
        assert build_distribution(counts).prob(SettingPair(2, 2), P, P) == 1.0

    def test_wrong_shape_rejected(self):
        counts = uniform_counts()
        counts[SettingPair(1, 1)] = [1, 2, 3]
        with pytest.raises(InvalidCounts):
            build_distribution(counts)


class TestJointDistribution:
    """Validation of probability tables."""

    def test_rejects_unnormalized_row(self):
        table = {pair: {(P, P): 0.25, (P, M): 0.25, (M, P): 0.25, (M, M): 0.25}
                 for pair in (SettingPair(i, j) for i in (1, 2) for j in (1, 2))}
        table[SettingPair(2, 2)] = {(P, P): 0.5, (M, M): 0.6}
        with pytest.raises(InvalidDistribution) as excinfo:
            JointDistribution(table)
        assert "sum to" in str(excinfo.value)

    def test_rejects_out_of_range(self):
        table = {pair: {(P, P): 1.0} for pair in (SettingPair(i, j) for i in (1, 2) for j in (1, 2))}
        table[SettingPair(1, 1)] = {(P, P): 1.5, (M, M): -0.5}
        with pytest.raises(InvalidDistribution):
            JointDistribution(table)

    def test_table_is_read_only(self, hardy_distribution):
        with pytest.raises(TypeError):
            hardy_distribution.table[SettingPair(1, 1)] = {}

    def test_setting_pair_range(self):
        with pytest.raises(ValueError):
            SettingPair(0, 1)


class TestHardyWitness:
    """Verdict assignment."""

    def test_non_classical(self, hardy_distribution):
        w = hardy_q(hardy_distribution)
        assert (w.p1, w.p2, w.p3) == (0.0, 0.0, 0.0)
        assert w.q == pytest.approx(0.1)
        assert w.verdict is Verdict.NON_CLASSICAL

    def test_local_realism_consistent(self, hardy_counts):
        hardy_counts[SettingPair(2, 2)] = [0, 4, 3, 3]
        w = hardy_q(build_distribution(hardy_counts))
        assert w.q == 0.0
        assert w.verdict is Verdict.LOCAL_REALISM_CONSISTENT

    def test_constraint_violated(self):
        w = hardy_q(build_distribution(uniform_counts()))
        assert w.p1 == 0.25
        assert w.verdict is Verdict.CONSTRAINTS_VIOLATED
        assert w.to_dict()["verdict"] == "ConstraintsViolated"

    def test_tolerance_absorbs_noise(self, hardy_counts):
        hardy_counts[SettingPair(1, 1)] = [1, 3 * 10**6, 4 * 10**6, 3 * 10**6]
        dist = build_distribution(hardy_counts)
        assert hardy_q(dist, tol=1e-9).verdict is Verdict.CONSTRAINTS_VIOLATED
        assert hardy_q(dist, tol=1e-6).verdict is Verdict.NON_CLASSICAL

    @pytest.mark.parametrize("tol", [0.0, -1e-9])
    def test_tolerance_must_be_positive(self, hardy_distribution, tol):
        with pytest.raises(ValueError):
            hardy_q(hardy_distribution, tol=tol)


FORBIDDEN_CELLS = {SettingPair(1, 1): 0, SettingPair(1, 2): 2, SettingPair(2, 1): 1}


def random_counts(rng, zero_forbidden):
    counts = {}
    for pair in SETTING_PAIRS:
        row = [int(n) for n in rng.integers(0, 6, size=4)]
        row[3] += 1
        if zero_forbidden and pair in FORBIDDEN_CELLS:
            row[FORBIDDEN_CELLS[pair]] = 0
        counts[pair] = row
    return counts


def reordered(counts, order):
    """Same counts with the outcome pairs inserted in the given order."""
    return {
        pair: {OUTCOME_PAIRS[k]: row[k] for k in order}
        for pair, row in counts.items()
    }


class TestWitnessProperties:
    """Seeded properties over random count tables."""

    @pytest.fixture(scope="class")
    def tables(self):
        rng = np.random.default_rng(2016)
        return [random_counts(rng, zero_forbidden=i % 2 == 0) for i in range(300)]

    def test_storage_order_does_not_matter(self, tables):
        for counts in tables[:40]:
            expected = hardy_q(build_distribution(counts))
            for order in itertools.permutations(range(4)):
                mapped = reordered(counts, order)
                assert hardy_q(build_distribution(mapped)) == expected

                probs = {
                    pair: {outcomes: n / sum(row.values()) for outcomes, n in row.items()}
                    for pair, row in mapped.items()
                }
                assert hardy_q(JointDistribution(probs)) == expected

    @pytest.mark.parametrize("tol", [1e-9, 0.05, 0.2])
    def test_exactly_one_verdict(self, tables, tol):
        seen = set()
        for counts in tables:
            w = hardy_q(build_distribution(counts), tol=tol)
            assert 0.0 <= w.q <= 1.0
            violated = w.max_constraint > tol
            non_classical = not violated and w.q > tol
            consistent = not violated and w.q <= tol
            assert violated + non_classical + consistent == 1
            expected = (
                Verdict.CONSTRAINTS_VIOLATED if violated
                else Verdict.NON_CLASSICAL if non_classical
                else Verdict.LOCAL_REALISM_CONSISTENT
            )
            assert w.verdict is expected
            seen.add(w.verdict)
        assert seen == set(Verdict)


class TestNoSignaling:
    """Marginal independence check."""

    def test_uniform_is_no_signaling(self):
        ok, dev = is_no_signaling(build_distribution(uniform_counts()))
        assert ok is True
        assert dev == 0.0

    def test_signaling_detected(self):
        counts = uniform_counts()
        counts[SettingPair(1, 2)] = [3, 1, 0, 0]
        ok, dev = is_no_signaling(build_distribution(counts))
        assert ok is False
        assert dev == pytest.approx(0.5)


class TestLocalHiddenVariables:
    """Exact classical bound by enumeration."""

    def test_sixteen_strategies(self):
        assert len(ALL_STRATEGIES) == 16
        assert len(set(ALL_STRATEGIES)) == 16

    def test_strategy_hits_forbidden_event(self):
        s = Strategy(P, M, P, M)
        assert s.hits(FORBIDDEN_EVENTS[Constraint.C1])
        assert not s.hits(FORBIDDEN_EVENTS[Constraint.C2])
        assert not s.target

    def test_full_constraints_bound_is_zero(self):
        bound = lhv_max_q()
        assert bound == 0
        assert isinstance(bound, Fraction)
        assert target_strategies() == []

    def test_admissible_strategies_under_all_constraints(self):
        admissible = admissible_strategies()
        assert len(admissible) == 5
        assert all(not (s.a2 == P and s.b2 == P) for s in admissible)

    @pytest.mark.parametrize("dropped", [(1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)])
    def test_dropping_any_constraint_allows_q_one(self, dropped):
        constraints = ConstraintSet.without(*dropped)
        assert lhv_max_q(constraints) == 1
        assert target_strategies(constraints)

    @pytest.mark.parametrize("constraints", all_constraint_sets(), ids=lambda c: "+".join(c.labels()) or "none")
    def test_mixture_equals_pure(self, constraints):
        assert mixture_max_q(constraints) == pure_max_q(constraints)

    def test_eight_constraint_sets(self):
        sets = all_constraint_sets()
        assert len(sets) == 8
        assert len({c.active for c in sets}) == 8

    def test_without_rejects_unknown_constraint(self):
        with pytest.raises(ValueError):
            ConstraintSet.without(4)
