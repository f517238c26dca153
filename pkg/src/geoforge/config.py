"""Resource caps, overridable through the environment."""
import os

DEFAULT_DEGREE_CAP = 100_000
DEFAULT_FLAG_BUDGET = 10_000_000
# explicit incidence beyond this many edges stays orbit-defined (lazy)
DEFAULT_EDGE_BUDGET = 30_000_000


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(float(raw))
    except ValueError:
        return default


def degree_cap() -> int:
    return _env_int("GEOFORGE_DEGREE_CAP", DEFAULT_DEGREE_CAP)


def flag_budget() -> int:
    return _env_int("GEOFORGE_FLAG_BUDGET", DEFAULT_FLAG_BUDGET)


def edge_budget() -> int:
    return _env_int("GEOFORGE_EDGE_BUDGET", DEFAULT_EDGE_BUDGET)
