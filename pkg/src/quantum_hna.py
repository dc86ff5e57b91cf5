"""
Two-qubit quantum mechanics for Hardy configurations.

States are four complex amplitudes over |00>, |01>, |10>, |11>. A measurement
setting is the +/-1 projective measurement along a Bloch vector given by its
polar and azimuth angles. The optimizer maximizes q subject to the three Hardy
zero constraints with a quadratic penalty and multi-restart coordinate descent.

Search family: cos(theta)|00> + sin(theta)|11> with four polar angles and all
azimuths fixed at 0. A real optimum of q exists inside this family, so the
search stays 5-dimensional.
"""
import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from src.config import (
    DEFAULT_SEED,
    NORMALIZATION_TOL,
    OPT_CONSTRAINT_TOL,
    OPT_INITIAL_STEP,
    OPT_MAX_ITERATIONS,
    OPT_PENALTY_GROWTH,
    OPT_PENALTY_INITIAL,
    OPT_PENALTY_STAGES,
    OPT_RESTARTS,
    OPT_STEP_TOL,
)
from src.hna_core import JointDistribution, Outcome, SettingPair

TWO_PI = 2 * math.pi


class UnnormalizedState(ValueError):
    """State amplitudes do not have unit norm."""


class InvalidSetting(ValueError):
    """Measurement angles are outside their canonical ranges."""


class NoFeasiblePoint(RuntimeError):
    """No restart reached the constraint tolerance."""


@dataclass(frozen=True)
class TwoQubitState:
    """Amplitudes in basis order |00>, |01>, |10>, |11>."""
    amplitudes: tuple[complex, complex, complex, complex]

    def __post_init__(self):
        amps = tuple(complex(a) for a in self.amplitudes)
        if len(amps) != 4:
            raise ValueError(f"A two-qubit state needs 4 amplitudes, got {len(amps)}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes)

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm_squared - 1.0) <= NORMALIZATION_TOL

    def normalized(self) -> "TwoQubitState":
        norm = math.sqrt(self.norm_squared)
        if norm == 0:
            raise UnnormalizedState("Cannot normalize the zero vector")
        return TwoQubitState(tuple(a / norm for a in self.amplitudes))

    def phase_rotated(self, phi: float) -> "TwoQubitState":
        """Apply diag(1, e^{i phi}) on both qubits."""
        c00, c01, c10, c11 = self.amplitudes
        w = cmath.exp(1j * phi)
        return TwoQubitState((c00, c01 * w, c10 * w, c11 * w * w))


@dataclass(frozen=True)
class MeasurementSetting:
    polar: float
    azimuth: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.polar <= math.pi):
            raise InvalidSetting(f"polar angle {self.polar} outside [0, pi]")
        if not (0.0 <= self.azimuth < TWO_PI):
            raise InvalidSetting(f"azimuth {self.azimuth} outside [0, 2pi)")

    @classmethod
    def from_angles(cls, polar: float, azimuth: float = 0.0) -> "MeasurementSetting":
        """Canonicalize arbitrary angles to the same Bloch direction."""
        polar = math.remainder(polar, TWO_PI)
        if polar < 0:
            polar, azimuth = -polar, azimuth + math.pi
        azimuth = azimuth % TWO_PI
        if azimuth >= TWO_PI:
            azimuth = 0.0
        return cls(polar=min(polar, math.pi), azimuth=azimuth)

    @property
    def bloch_vector(self) -> tuple[float, float, float]:
        s = math.sin(self.polar)
        return (s * math.cos(self.azimuth), s * math.sin(self.azimuth), math.cos(self.polar))

    def eigenvector(self, outcome: Outcome) -> tuple[complex, complex]:
        half = self.polar / 2
        phase = cmath.exp(1j * self.azimuth)
        if outcome == Outcome.PLUS:
            return (complex(math.cos(half)), phase * math.sin(half))
        return (complex(math.sin(half)), -phase * math.cos(half))

    def to_dict(self) -> dict:
        return {"polar": self.polar, "azimuth": self.azimuth}


@dataclass(frozen=True)
class HardyConfiguration:
    state: TwoQubitState
    alice: tuple[MeasurementSetting, MeasurementSetting]
    bob: tuple[MeasurementSetting, MeasurementSetting]

    def setting_for(self, pair: SettingPair) -> tuple[MeasurementSetting, MeasurementSetting]:
        return self.alice[pair.alice_setting - 1], self.bob[pair.bob_setting - 1]

    def rotated(self, phi: float) -> "HardyConfiguration":
        """Shift every azimuth by phi and counter-rotate the state phases."""
        def turn(m: MeasurementSetting) -> MeasurementSetting:
            return MeasurementSetting.from_angles(m.polar, m.azimuth + phi)

        return HardyConfiguration(
            state=self.state.phase_rotated(phi),
            alice=(turn(self.alice[0]), turn(self.alice[1])),
            bob=(turn(self.bob[0]), turn(self.bob[1])),
        )

    def to_dict(self) -> dict:
        return {
            "state": [[a.real, a.imag] for a in self.state.amplitudes],
            "a1": self.alice[0].to_dict(),
            "a2": self.alice[1].to_dict(),
            "b1": self.bob[0].to_dict(),
            "b2": self.bob[1].to_dict(),
        }


class HardyValues(NamedTuple):
    p1: float
    p2: float
    p3: float
    q: float


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = OPT_RESTARTS
    max_iterations: int = OPT_MAX_ITERATIONS
    penalty_initial: float = OPT_PENALTY_INITIAL
    penalty_growth: float = OPT_PENALTY_GROWTH
    penalty_stages: int = OPT_PENALTY_STAGES
    constraint_tol: float = OPT_CONSTRAINT_TOL
    step_tol: float = OPT_STEP_TOL
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        problems = []
        for name in ("restarts", "max_iterations", "penalty_stages"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        for name in ("penalty_initial", "constraint_tol", "step_tol"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be > 0")
        if not self.penalty_growth > 1:
            problems.append("penalty_growth must be > 1")
        if not (0 <= self.seed < 2 ** 64):
            problems.append("seed must be a 64-bit unsigned integer")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass
class OptimizationResult:
    config: HardyConfiguration
    q: float
    residuals: tuple[float, float, float]
    theta: float
    polar_angles: tuple[float, float, float, float]
    restart_index: int
    feasible_restarts: int
    restart_q: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.residuals)

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "residuals": {"p1": self.residuals[0], "p2": self.residuals[1], "p3": self.residuals[2]},
            "theta": self.theta,
            "angles": dict(zip(("a1", "a2", "b1", "b2"), self.polar_angles)),
            "configuration": self.config.to_dict(),
            "restart_index": self.restart_index,
            "feasible_restarts": self.feasible_restarts,
            "restart_q": self.restart_q,
        }


# === BORN RULE ===

def schmidt_state(theta: float) -> TwoQubitState:
    """cos(theta)|00> + sin(theta)|11>."""
    return TwoQubitState((math.cos(theta), 0.0, 0.0, math.sin(theta)))


def born_joint(state: TwoQubitState, a: MeasurementSetting, b: MeasurementSetting) -> dict:
    """
    Joint outcome probabilities for measuring a on qubit A and b on qubit B.

    Returns:
        {(Outcome, Outcome): probability} over the four outcome pairs
    """
    if not state.is_normalized:
        raise UnnormalizedState(f"State norm^2 is {state.norm_squared!r}, expected 1")

    c00, c01, c10, c11 = state.amplitudes
    probs = {}
    for x in (Outcome.PLUS, Outcome.MINUS):
        u0, u1 = a.eigenvector(x)
        u0, u1 = u0.conjugate(), u1.conjugate()
        for y in (Outcome.PLUS, Outcome.MINUS):
            v0, v1 = b.eigenvector(y)
            v0, v1 = v0.conjugate(), v1.conjugate()
            amp = u0 * (v0 * c00 + v1 * c01) + u1 * (v0 * c10 + v1 * c11)
            probs[(x, y)] = amp.real * amp.real + amp.imag * amp.imag
    return probs


def hardy_values(config: HardyConfiguration) -> HardyValues:
    a1, a2 = config.alice
    b1, b2 = config.bob
    return HardyValues(
        p1=born_joint(config.state, a1, b1)[(Outcome.PLUS, Outcome.PLUS)],
        p2=born_joint(config.state, a1, b2)[(Outcome.MINUS, Outcome.PLUS)],
        p3=born_joint(config.state, a2, b1)[(Outcome.PLUS, Outcome.MINUS)],
        q=born_joint(config.state, a2, b2)[(Outcome.PLUS, Outcome.PLUS)],
    )


def config_to_distribution(config: HardyConfiguration) -> JointDistribution:
    table = {}
    for pair in (SettingPair(i, j) for i in (1, 2) for j in (1, 2)):
        a, b = config.setting_for(pair)
        table[pair] = born_joint(config.state, a, b)
    return JointDistribution(table)


def random_state(rng: np.random.Generator) -> TwoQubitState:
    """Haar-random pure two-qubit state."""
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    return TwoQubitState(tuple(complex(c) for c in z)).normalized()


def random_setting(rng: np.random.Generator) -> MeasurementSetting:
    """Uniformly random direction on the Bloch sphere."""
    polar = math.acos(rng.uniform(-1.0, 1.0))
    azimuth = rng.uniform(0.0, TWO_PI)
    return MeasurementSetting.from_angles(polar, azimuth)


def random_configuration(rng: np.random.Generator) -> HardyConfiguration:
    return HardyConfiguration(
        state=random_state(rng),
        alice=(random_setting(rng), random_setting(rng)),
        bob=(random_setting(rng), random_setting(rng)),
    )


# === OPTIMIZER ===

def _real_hardy(x: list[float]) -> tuple[float, float, float, float]:
    """
    (p1, p2, p3, q) for the real family.

    x = [theta, a1, a2, b1, b2] with polar angles; eigenvectors are
    (cos h, sin h) for +1 and (sin h, -cos h) for -1 with h = polar / 2.
    """
    theta, a1, a2, b1, b2 = x
    c, s = math.cos(theta), math.sin(theta)
    ca1, sa1 = math.cos(a1 / 2), math.sin(a1 / 2)
    ca2, sa2 = math.cos(a2 / 2), math.sin(a2 / 2)
    cb1, sb1 = math.cos(b1 / 2), math.sin(b1 / 2)
    cb2, sb2 = math.cos(b2 / 2), math.sin(b2 / 2)

    amp1 = c * ca1 * cb1 + s * sa1 * sb1
    amp2 = c * sa1 * cb2 - s * ca1 * sb2
    amp3 = c * ca2 * sb1 - s * sa2 * cb1
    amp_q = c * ca2 * cb2 + s * sa2 * sb2
    return amp1 * amp1, amp2 * amp2, amp3 * amp3, amp_q * amp_q


def _coordinate_descent(
    objective: Callable[[list[float]], float],
    x: list[float],
    free: list[int],
    bounds: dict[int, tuple[float, float]],
    step_tol: float,
    max_sweeps: int,
) -> list[float]:
    """Pattern search along coordinate axes; step halves when no move improves."""
    best = objective(x)
    step = OPT_INITIAL_STEP
    sweeps = 0
    while step >= step_tol and sweeps < max_sweeps:
        sweeps += 1
        improved = False
        for k in free:
            for sign in (1.0, -1.0):
                cand = list(x)
                cand[k] += sign * step
                if k in bounds:
                    lo, hi = bounds[k]
                    cand[k] = min(max(cand[k], lo), hi)
                value = objective(cand)
                if value < best:
                    x, best = cand, value
                    improved = True
        if not improved:
            step /= 2
    return x


def _run_restart(opt: OptimizerConfig, index: int, fix_theta: float | None) -> tuple[list[float], HardyValues]:
    seed_seq = np.random.SeedSequence(opt.seed).spawn(opt.restarts)[index]
    rng = np.random.default_rng(seed_seq)

    start_theta = rng.uniform(0.0, math.pi / 2)
    x = [fix_theta if fix_theta is not None else start_theta] + list(rng.uniform(0.0, math.pi, size=4))
    free = [1, 2, 3, 4] if fix_theta is not None else [0, 1, 2, 3, 4]
    bounds = {0: (0.0, math.pi / 2)}

    penalty = opt.penalty_initial
    for _ in range(opt.penalty_stages):
        def objective(point, weight=penalty):
            p1, p2, p3, q = _real_hardy(point)
            return -q + weight * (p1 + p2 + p3)

        x = _coordinate_descent(objective, x, free, bounds, opt.step_tol, opt.max_iterations)
        penalty *= opt.penalty_growth

    return x, HardyValues(*_real_hardy(x))


def _to_configuration(x: list[float]) -> HardyConfiguration:
    theta, a1, a2, b1, b2 = x
    setting = MeasurementSetting.from_angles
    return HardyConfiguration(
        state=schmidt_state(theta),
        alice=(setting(a1), setting(a2)),
        bob=(setting(b1), setting(b2)),
    )


def maximize_q(
    opt: OptimizerConfig = OptimizerConfig(),
    fix_theta: float | None = None,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> OptimizationResult:
    """
    Maximize q subject to p1 = p2 = p3 = 0 over the real Schmidt family.

    Each restart draws its starting angles from its own seed substream and
    runs coordinate descent on -q + mu_k (p1 + p2 + p3) with
    mu_k = penalty_initial * penalty_growth^k. The best restart whose
    residuals are within constraint_tol wins; ties go to the lowest index.

    Args:
        opt: Optimizer settings
        fix_theta: Pin the Schmidt angle (None searches it in [0, pi/2])
        workers: Process-pool size for restarts (1 runs them in order)
        progress: Called with (restarts done, total restarts)

    Returns:
        OptimizationResult for the best feasible restart
    """
    if fix_theta is not None and not (0.0 <= fix_theta <= math.pi / 2):
        raise ValueError(f"fix_theta must lie in [0, pi/2], got {fix_theta}")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_run_restart, opt, i, fix_theta) for i in range(opt.restarts)]
            outcomes = []
            for f in futures:
                outcomes.append(f.result())
                if progress:
                    progress(len(outcomes), opt.restarts)
    else:
        outcomes = []
        for i in range(opt.restarts):
            outcomes.append(_run_restart(opt, i, fix_theta))
            if progress:
                progress(len(outcomes), opt.restarts)

    best_index = None
    feasible = 0
    restart_q = []
    for i, (x, values) in enumerate(outcomes):
        restart_q.append(values.q)
        if max(values.p1, values.p2, values.p3) > opt.constraint_tol:
            continue
        feasible += 1
        if best_index is None or values.q > outcomes[best_index][1].q:
            best_index = i

    if best_index is None:
        raise NoFeasiblePoint(
            f"None of {opt.restarts} restarts reached constraint residuals <= {opt.constraint_tol}"
        )

    x, _ = outcomes[best_index]
    config = _to_configuration(x)
    values = hardy_values(config)
    return OptimizationResult(
        config=config,
        q=values.q,
        residuals=(values.p1, values.p2, values.p3),
        theta=x[0],
        polar_angles=tuple(m.polar for m in (*config.alice, *config.bob)),
        restart_index=best_index,
        feasible_restarts=feasible,
        restart_q=restart_q,
    )


def theta_scan(thetas, opt: OptimizerConfig = OptimizerConfig()) -> list[tuple[float, float]]:
    """Best q for each fixed Schmidt angle."""
    return [(theta, maximize_q(opt, fix_theta=theta).q) for theta in thetas]
