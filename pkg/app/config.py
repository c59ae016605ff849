import logging
import os
from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv("FEJER_LOG_LEVEL", "WARNING")
MAX_WORKERS = int(os.getenv("FEJER_MAX_WORKERS", "4"))
PORT = int(os.getenv("PORT", "7860"))

# Unitarity checks
UNITARY_TOL = 1e-10          # dense ||U*U - I||_max
SAMPLED_UNITARY_TOL = 1e-8   # randomized round trip
UNITARY_SAMPLES = 8

# Expression evaluation
POLE_EVAL_EPS = 1e-14
POLE_MIN_MODULUS = 1e-6
POLE_GRID_M = 4096

# Power orbit drift, relative to ||v||
DRIFT_WARN = 1e-9
DRIFT_FAIL = 1e-6

# Spectral oracle
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60
SPECTRAL_RESIDUAL_TOL = 1e-8
MAX_RETRIES = 8

# Grids
MIN_COEFF_GRID = 256
MIN_SUP_GRID = 1024

# Self-check of the `functional` command
PATH_AGREEMENT_TOL = 1e-9


def configure_logging(level: str = LOG_LEVEL) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
