from dataclasses import fields
from enum import IntEnum
from pathlib import Path

from dotenv import dotenv_values

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = PROJECT_ROOT / "data"
TABLE1_PATH = DATA_DIR / "table1.csv"
DEFAULT_SIM_CONFIG_PATH = DATA_DIR / "callcenter.env"

# Tolerances
DEFAULT_TOL = 1e-9
NORMALIZATION_TOL = 1e-12
NO_SIGNALING_TOL = 1e-10

# Optimizer defaults
OPT_RESTARTS = 16
OPT_MAX_ITERATIONS = 5000
OPT_PENALTY_STAGES = 11
OPT_PENALTY_INITIAL = 10.0
OPT_PENALTY_GROWTH = 10.0
OPT_CONSTRAINT_TOL = 1e-8
OPT_STEP_TOL = 1e-10
OPT_INITIAL_STEP = 0.1

# Empirics
BOOTSTRAP_LEVEL = 0.95
BOOTSTRAP_MIN_RESAMPLES = 100
REPORT_DECIMALS = 6
SIM_CALENDAR_START = "2016-08-22"

DEFAULT_SEED = 0


class ExitStatus(IntEnum):
    SUCCESS = 0
    USAGE_ERROR = 1
    DATA_ERROR = 2
    NUMERICAL_FAILURE = 3


class InvalidConfig(ValueError):
    """Simulator configuration is unreadable or violates its invariants."""


def load_sim_config(path: str | Path, **overrides):
    """
    Load a flat KEY=value simulator config file.

    Keys must match SimConfig field names exactly; values are coerced to the
    field's type. Nothing is exported into the process environment.

    Args:
        path: Config file path
        **overrides: Field values that take precedence over the file

    Returns:
        Validated SimConfig
    """
    from src.callcenter_sim import SimConfig

    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Config file not found: {path}")

    raw = dotenv_values(path)
    known = {f.name: f for f in fields(SimConfig)}

    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise InvalidConfig(f"Unknown config keys in {path.name}: {', '.join(unknown)}")

    values = {}
    for key, text in raw.items():
        if text is None or text.strip() == "":
            raise InvalidConfig(f"Config key '{key}' has no value")
        values[key] = _coerce(key, text.strip(), known[key].type)
    values.update({k: v for k, v in overrides.items() if v is not None})

    config = SimConfig(**values)
    validate_sim_config(config)
    return config


def _coerce(key: str, text: str, annotation) -> int | float:
    kind = annotation if isinstance(annotation, type) else {"int": int, "float": float}.get(str(annotation))
    try:
        if kind is int:
            return int(text)
        return float(text)
    except ValueError:
        raise InvalidConfig(f"Config key '{key}' expects {getattr(kind, '__name__', kind)}, got {text!r}") from None


def validate_sim_config(config) -> None:
    """Raise InvalidConfig if the simulator configuration breaks an invariant."""
    problems = []

    for f in fields(config):
        value = getattr(config, f.name)
        if value < 0:
            problems.append(f"{f.name} must be non-negative (got {value})")

    if config.days < 1:
        problems.append("days must be >= 1")
    if config.shift_end <= config.shift_start:
        problems.append("shift_end must be after shift_start")
    if config.shift_end + config.late_shift_offset_minutes > 24 * 60:
        problems.append("late shift must end by midnight")
    if config.holiday_index > 6:
        problems.append("holiday_index must be a weekday index 0-6")
    if config.service_count < 2:
        problems.append("service_count must be >= 2")
    if config.patience_mean_minutes <= 0 or config.talk_time_mean_minutes <= 0:
        problems.append("patience and talk time means must be positive")

    for name in ("p_buy_immediate", "p_defer", "p_buy_on_callback", "p_new_service_on_callback"):
        if getattr(config, name) > 1:
            problems.append(f"{name} must be a probability")
    if config.p_buy_immediate + config.p_defer > 1:
        problems.append("p_buy_immediate + p_defer must not exceed 1")
    if config.p_buy_on_callback + config.p_new_service_on_callback > 1:
        problems.append("p_buy_on_callback + p_new_service_on_callback must not exceed 1")
    if config.sale_amount_mean < 1:
        problems.append("sale_amount_mean must be at least 1 Toman")

    if problems:
        raise InvalidConfig("; ".join(problems))
