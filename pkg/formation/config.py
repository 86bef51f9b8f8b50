"""Runtime settings, read once from the environment (and a local .env)."""
import os, logging, pathlib
from dotenv import load_dotenv

load_dotenv()


def _float(name: str, default: float) -> float:
    raw = os.getenv(name)
    return float(raw) if raw not in (None, "") else default


def _int(name: str, default: int) -> int:
    raw = os.getenv(name)
    return int(raw) if raw not in (None, "") else default


# geometry tolerances (length units, or scale-free where noted)
EPS_DIST = _float("FORMATION_EPS_DIST", 1e-9)
EPS_COLLINEAR = _float("FORMATION_EPS_COLLINEAR", 1e-9)  # normalized triangle area
UNIT_TOL = 1e-9
WITNESS_TOL = 1e-6
ASSEMBLY_TOL = 1e-12
RESIDUAL_TOL = 1e-10
SINGULAR_TOL = 1e-10  # smallest eigenvalue of a projection sum

# published targets are rounded to 3 decimals; anything within this gets renormalised
TARGET_NORM_TOL = _float("FORMATION_TARGET_NORM_TOL", 1e-3)
MATCH_TOL = _float("FORMATION_MATCH_TOL", 1e-6)

# integrator defaults
GAIN = _float("FORMATION_GAIN", 1.0)
STEP = _float("FORMATION_STEP", 0.01)
T_MAX = _float("FORMATION_T_MAX", 50.0)
TOL = _float("FORMATION_TOL", 1e-3)
DIVERGENCE_RADIUS = _float("FORMATION_DIVERGENCE_RADIUS", 1e6)

WORKERS = _int("FORMATION_WORKERS", 1)
LOG_LEVEL = os.getenv("FORMATION_LOG_LEVEL", "WARNING")
OUT_DIR = pathlib.Path(os.getenv("FORMATION_OUT_DIR", "data/runs"))


def configure_logging(level: str = None) -> None:
    logging.basicConfig(
        level=(level or LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
