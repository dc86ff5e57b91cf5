"""
Hardy probability framework: joint-outcome distributions, the Hardy witness
over the four Hardy conditions, and the exact local-hidden-variable bound.

The four conditions, with a_i measured on Alice's side and b_j on Bob's:
    C1: Pr(a1 = +1, b1 = +1) = 0
    C2: Pr(a1 = -1, b2 = +1) = 0
    C3: Pr(a2 = +1, b1 = -1) = 0
    q  = Pr(a2 = +1, b2 = +1)
"""
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Sequence

from src.config import DEFAULT_TOL, NORMALIZATION_TOL


class AllZeroCounts(ValueError):
    """A setting pair has no observations at all."""


class MissingSetting(ValueError):
    """Fewer than the four setting pairs were supplied."""


class InvalidCounts(ValueError):
    """Counts are negative or not keyed by outcome pairs."""


class InvalidDistribution(ValueError):
    """Probabilities are out of range or do not sum to 1."""


class LHVBoundMismatch(RuntimeError):
    """Mixture optimum and pure-strategy optimum disagree."""


class Outcome(IntEnum):
    PLUS = 1
    MINUS = -1

    @property
    def symbol(self) -> str:
        return "+" if self is Outcome.PLUS else "-"


@dataclass(frozen=True, order=True)
class SettingPair:
    alice_setting: int
    bob_setting: int

    def __post_init__(self):
        if self.alice_setting not in (1, 2) or self.bob_setting not in (1, 2):
            raise ValueError(f"Setting indices must be 1 or 2, got ({self.alice_setting}, {self.bob_setting})")

    def __str__(self) -> str:
        return f"({self.alice_setting},{self.bob_setting})"


SETTING_PAIRS = tuple(SettingPair(i, j) for i in (1, 2) for j in (1, 2))

# Canonical storage order: ++, +-, -+, --
OUTCOME_PAIRS = tuple(itertools.product((Outcome.PLUS, Outcome.MINUS), repeat=2))


@dataclass(frozen=True)
class JointDistribution:
    """Pr(a_i = x, b_j = y) for every setting pair (i, j) and outcome pair (x, y)."""
    table: Mapping[SettingPair, Mapping[tuple[Outcome, Outcome], float]]

    def __post_init__(self):
        missing = [p for p in SETTING_PAIRS if p not in self.table]
        if missing:
            raise MissingSetting(f"Missing setting pairs: {', '.join(str(p) for p in missing)}")

        frozen = {}
        for pair in SETTING_PAIRS:
            row = self.table[pair]
            probs = {}
            for outcomes in OUTCOME_PAIRS:
                p = float(row.get(outcomes, 0.0))
                if not (0.0 <= p <= 1.0) or math.isnan(p):
                    raise InvalidDistribution(f"Pr{_label(outcomes)} at {pair} is {p}, outside [0, 1]")
                probs[outcomes] = p
            total = math.fsum(probs.values())
            if abs(total - 1.0) > NORMALIZATION_TOL:
                raise InvalidDistribution(f"Probabilities at {pair} sum to {total!r}, not 1")
            frozen[pair] = MappingProxyType(probs)
        object.__setattr__(self, "table", MappingProxyType(frozen))

    def prob(self, pair: SettingPair, a: Outcome, b: Outcome) -> float:
        return self.table[pair][(Outcome(a), Outcome(b))]

    def alice_marginal(self, pair: SettingPair, a: Outcome = Outcome.PLUS) -> float:
        return sum(self.prob(pair, a, b) for b in Outcome)

    def bob_marginal(self, pair: SettingPair, b: Outcome = Outcome.PLUS) -> float:
        return sum(self.prob(pair, a, b) for a in Outcome)

    def to_dict(self) -> dict:
        return {
            str(pair): {_label(outcomes): self.table[pair][outcomes] for outcomes in OUTCOME_PAIRS}
            for pair in SETTING_PAIRS
        }


def _label(outcomes: tuple[Outcome, Outcome]) -> str:
    return outcomes[0].symbol + outcomes[1].symbol


class Verdict(str, Enum):
    LOCAL_REALISM_CONSISTENT = "LocalRealismConsistent"
    NON_CLASSICAL = "NonClassical"
    CONSTRAINTS_VIOLATED = "ConstraintsViolated"


@dataclass(frozen=True)
class HardyWitness:
    p1: float
    p2: float
    p3: float
    q: float
    tol: float
    verdict: Verdict

    @property
    def max_constraint(self) -> float:
        return max(self.p1, self.p2, self.p3)

    def to_dict(self) -> dict:
        return {
            "p1": self.p1,
            "p2": self.p2,
            "p3": self.p3,
            "q": self.q,
            "tol": self.tol,
            "verdict": self.verdict.value,
        }


class Constraint(Enum):
    C1 = 1
    C2 = 2
    C3 = 3


# Forbidden event per constraint: (alice setting, alice outcome, bob setting, bob outcome)
FORBIDDEN_EVENTS = {
    Constraint.C1: (1, Outcome.PLUS, 1, Outcome.PLUS),
    Constraint.C2: (1, Outcome.MINUS, 2, Outcome.PLUS),
    Constraint.C3: (2, Outcome.PLUS, 1, Outcome.MINUS),
}


@dataclass(frozen=True)
class ConstraintSet:
    active: frozenset = field(default_factory=lambda: frozenset(Constraint))

    def __post_init__(self):
        object.__setattr__(self, "active", frozenset(Constraint(c) for c in self.active))

    @classmethod
    def without(cls, *dropped: int) -> "ConstraintSet":
        """Full constraint set minus the given constraint numbers (1, 2, 3)."""
        drop = {Constraint(d) for d in dropped}
        return cls(frozenset(Constraint) - drop)

    def labels(self) -> list[str]:
        return sorted(c.name for c in self.active)


def all_constraint_sets() -> list[ConstraintSet]:
    """All 8 subsets of {C1, C2, C3}."""
    members = list(Constraint)
    return [
        ConstraintSet(frozenset(subset))
        for r in range(len(members) + 1)
        for subset in itertools.combinations(members, r)
    ]


# === DISTRIBUTIONS ===

def build_distribution(counts: Mapping[SettingPair, object]) -> JointDistribution:
    """
    Normalize per-setting outcome counts into a JointDistribution.

    Args:
        counts: SettingPair -> either a mapping (Outcome, Outcome) -> count,
            or a 4-sequence in the order ++, +-, -+, --

    Returns:
        JointDistribution with each setting pair normalized separately
    """
    missing = [p for p in SETTING_PAIRS if p not in counts]
    if missing:
        raise MissingSetting(f"Counts missing for setting pairs: {', '.join(str(p) for p in missing)}")

    table = {}
    for pair in SETTING_PAIRS:
        row = _count_row(pair, counts[pair])
        total = sum(row.values())
        if total <= 0:
            raise AllZeroCounts(f"All counts are zero at setting pair {pair}")
        table[pair] = {outcomes: n / total for outcomes, n in row.items()}
    return JointDistribution(table)


def _count_row(pair: SettingPair, raw) -> dict:
    if isinstance(raw, Mapping):
        row = {}
        for key, n in raw.items():
            outcomes = (Outcome(key[0]), Outcome(key[1]))
            row[outcomes] = row.get(outcomes, 0) + n
    elif isinstance(raw, Sequence) and len(raw) == 4:
        row = dict(zip(OUTCOME_PAIRS, raw))
    else:
        raise InvalidCounts(f"Counts at {pair} must be a mapping or 4 values (++, +-, -+, --)")

    for outcomes, n in row.items():
        if n < 0:
            raise InvalidCounts(f"Negative count {n} for {_label(outcomes)} at {pair}")
    return {outcomes: row.get(outcomes, 0) for outcomes in OUTCOME_PAIRS}


def hardy_q(dist: JointDistribution, tol: float = DEFAULT_TOL) -> HardyWitness:
    """Evaluate the three Hardy constraints and q, and assign the verdict."""
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")

    p1 = dist.prob(SettingPair(1, 1), Outcome.PLUS, Outcome.PLUS)
    p2 = dist.prob(SettingPair(1, 2), Outcome.MINUS, Outcome.PLUS)
    p3 = dist.prob(SettingPair(2, 1), Outcome.PLUS, Outcome.MINUS)
    q = dist.prob(SettingPair(2, 2), Outcome.PLUS, Outcome.PLUS)

    if max(p1, p2, p3) > tol:
        verdict = Verdict.CONSTRAINTS_VIOLATED
    elif q > tol:
        verdict = Verdict.NON_CLASSICAL
    else:
        verdict = Verdict.LOCAL_REALISM_CONSISTENT

    return HardyWitness(p1=p1, p2=p2, p3=p3, q=q, tol=tol, verdict=verdict)


def is_no_signaling(dist: JointDistribution, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """
    Check that each side's marginals do not depend on the other side's setting.

    Returns:
        (no_signaling, max marginal deviation)
    """
    deviations = []
    for i in (1, 2):
        deviations.append(abs(
            dist.alice_marginal(SettingPair(i, 1)) - dist.alice_marginal(SettingPair(i, 2))
        ))
    for j in (1, 2):
        deviations.append(abs(
            dist.bob_marginal(SettingPair(1, j)) - dist.bob_marginal(SettingPair(2, j))
        ))
    max_dev = max(deviations)
    return max_dev <= tol, max_dev


# === LOCAL HIDDEN VARIABLES ===

@dataclass(frozen=True)
class Strategy:
    """Deterministic local assignment of +/-1 to all four events."""
    a1: Outcome
    a2: Outcome
    b1: Outcome
    b2: Outcome

    def alice(self, setting: int) -> Outcome:
        return self.a1 if setting == 1 else self.a2

    def bob(self, setting: int) -> Outcome:
        return self.b1 if setting == 1 else self.b2

    def hits(self, event: tuple[int, Outcome, int, Outcome]) -> bool:
        alice_setting, alice_outcome, bob_setting, bob_outcome = event
        return self.alice(alice_setting) == alice_outcome and self.bob(bob_setting) == bob_outcome

    @property
    def target(self) -> bool:
        return self.a2 == Outcome.PLUS and self.b2 == Outcome.PLUS

    def to_dict(self) -> dict:
        return {"a1": int(self.a1), "a2": int(self.a2), "b1": int(self.b1), "b2": int(self.b2)}


ALL_STRATEGIES = tuple(Strategy(*values) for values in itertools.product(Outcome, repeat=4))


def admissible_strategies(constraints: ConstraintSet = ConstraintSet()) -> list[Strategy]:
    return [
        s for s in ALL_STRATEGIES
        if not any(s.hits(FORBIDDEN_EVENTS[c]) for c in constraints.active)
    ]


def target_strategies(constraints: ConstraintSet = ConstraintSet()) -> list[Strategy]:
    """Admissible strategies that also produce a2 = +1 and b2 = +1."""
    return [s for s in admissible_strategies(constraints) if s.target]


def pure_max_q(constraints: ConstraintSet = ConstraintSet()) -> Fraction:
    return max((Fraction(int(s.target)) for s in admissible_strategies(constraints)), default=Fraction(0))


def mixture_max_q(constraints: ConstraintSet = ConstraintSet()) -> Fraction:
    """
    Maximize q over mixtures of all 16 strategies by exact vertex enumeration.

    Feasible weights satisfy w >= 0, sum(w) = 1 and zero total weight on every
    forbidden event. Every vertex is a basic feasible solution, so each
    column subset of size rank(A) is solved exactly and kept when w_B >= 0.
    """
    rows = [[Fraction(1)] * len(ALL_STRATEGIES)]
    rhs = [Fraction(1)]
    for c in sorted(constraints.active, key=lambda c: c.value):
        rows.append([Fraction(int(s.hits(FORBIDDEN_EVENTS[c]))) for s in ALL_STRATEGIES])
        rhs.append(Fraction(0))
    rows, rhs = _independent_rows(rows, rhs)
    objective = [Fraction(int(s.target)) for s in ALL_STRATEGIES]

    best = None
    for basis in itertools.combinations(range(len(ALL_STRATEGIES)), len(rows)):
        sub = [[row[k] for k in basis] for row in rows]
        weights = _solve_exact(sub, rhs)
        if weights is None or any(w < 0 for w in weights):
            continue
        value = sum(objective[k] * w for k, w in zip(basis, weights))
        if best is None or value > best:
            best = value
    if best is None:
        raise LHVBoundMismatch("Mixture polytope has no vertex")
    return best


def lhv_max_q(constraints: ConstraintSet = ConstraintSet()) -> Fraction:
    """
    Exact maximum of q over local-hidden-variable models.

    Enumerates the 16 deterministic strategies and cross-checks the result
    against the mixture problem over all 16 weights.
    """
    pure = pure_max_q(constraints)
    mixed = mixture_max_q(constraints)
    if pure != mixed:
        raise LHVBoundMismatch(
            f"Pure-strategy optimum {pure} differs from mixture optimum {mixed} for {constraints.labels()}"
        )
    return pure


def _independent_rows(rows, rhs):
    """Drop rows that are linear combinations of earlier ones."""
    kept, kept_rhs, echelon = [], [], []
    for row, b in zip(rows, rhs):
        reduced = list(row) + [b]
        for pivot_col, pivot_row in echelon:
            factor = reduced[pivot_col]
            if factor:
                reduced = [x - factor * y for x, y in zip(reduced, pivot_row)]
        pivot_col = next((k for k, x in enumerate(reduced[:-1]) if x), None)
        if pivot_col is None:
            if reduced[-1]:
                raise LHVBoundMismatch("Inconsistent constraint system")
            continue
        pivot = reduced[pivot_col]
        echelon.append((pivot_col, [x / pivot for x in reduced]))
        kept.append(row)
        kept_rhs.append(b)
    return kept, kept_rhs


def _solve_exact(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gauss-Jordan elimination over the rationals; None if singular."""
    n = len(matrix)
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        lead = aug[col][col]
        aug[col] = [x / lead for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]
