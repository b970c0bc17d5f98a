"""Application wide configuration constants."""

import os


def _float_env(name: str, default: float) -> float:
    try:
        return float(os.getenv(name, default))
    except (TypeError, ValueError):
        return float(default)


def _int_env(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, default))
    except (TypeError, ValueError):
        return int(default)


BLOWUP_LOG = os.getenv("BLOWUP_LOG", "WARNING")
BLOWUP_OUTPUT_DIR = os.getenv("BLOWUP_OUTPUT_DIR", "./output_certificates")

# integrador (tempo tau)
TAYLOR_ORDER = _int_env("BLOWUP_TAYLOR_ORDER", 12)
INTEGRATOR_TOL = _float_env("BLOWUP_TOL", 1e-11)
STEP_H0 = _float_env("BLOWUP_H0", 0.05)
STEP_H_MIN = _float_env("BLOWUP_H_MIN", 1e-12)
STEP_H_MAX = _float_env("BLOWUP_H_MAX", 1.0)
TAU_MAX = _float_env("BLOWUP_TAU_MAX", 2000.0)

# certificação de Lyapunov
RADIUS0 = _float_env("BLOWUP_RADIUS0", 0.1)
RADIUS_STEPS = _int_env("BLOWUP_RADIUS_STEPS", 41)
RADIUS_REFINE = _int_env("BLOWUP_RADIUS_REFINE", 6)
COND_MAX = _float_env("BLOWUP_COND_MAX", 1e8)

KRAWCZYK_ROUNDS = _int_env("BLOWUP_KRAWCZYK_ROUNDS", 50)
KAPPA_REL_WIDTH = 1e-14
SHOOT_TAU = _float_env("BLOWUP_SHOOT_TAU", 2000.0)

CERTIFICATE_SCHEMA = 1
DECIMAL_DIGITS = 17

CHART_LABELS = {
    "para": "quasi-parabolic",
    "dir": "directional",
}
