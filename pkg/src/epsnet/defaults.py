"""Single versioned block of numerical defaults, echoed into every report."""

DEFAULTS_VERSION = "1"

DEFAULTS = {
    "version": DEFAULTS_VERSION,
    "grid": {"base": 2.0, "k_min": 6, "k_max": 20},
    "pairing_k_max": 14,
    "slope_tol": 0.25,
    "abs_floor": 1e-13,
    "m_max": 12,
    "N_max": 40,
    "assoc_tol": 1e-4,
    "assoc_rate": 0.5,
    "scales": [0.5, 2.0, 3.0],
    "homogeneity_m": 8,
    "moments": 4,
    "pierced_delta": 2.0 ** -20,
    "quad_tol": 1e-10,
    "samples_1d": 257,
    "samples_2d": 65,
    "local_halfwidth": 8.0,
    "vandermonde_cond_max": 1e8,
    "rho_ladder": [0.5, 1.0, 2.0, 4.0],
    "zerodiv_budget": 12,
}

SLOPE_TOL = DEFAULTS["slope_tol"]
ABS_FLOOR = DEFAULTS["abs_floor"]
M_MAX = DEFAULTS["m_max"]
N_MAX = DEFAULTS["N_max"]
ASSOC_TOL = DEFAULTS["assoc_tol"]
ASSOC_RATE = DEFAULTS["assoc_rate"]
SCALES = tuple(DEFAULTS["scales"])
HOMOG_M = DEFAULTS["homogeneity_m"]
PIERCED_DELTA = DEFAULTS["pierced_delta"]
PAIRING_K_MAX = DEFAULTS["pairing_k_max"]
