import os
from dotenv import load_dotenv

load_dotenv()

NUMERICS_CONFIG = {
    "estimator_tol": float(os.getenv("SPECTRUM_ESTIMATOR_TOL", "1e-4")),
    "eig_grid_n": int(os.getenv("SPECTRUM_EIG_GRID_N", "256")),
    "richardson_n1": int(os.getenv("SPECTRUM_RICHARDSON_N1", "256")),
    "richardson_n2": int(os.getenv("SPECTRUM_RICHARDSON_N2", "512")),
    "interval_grid_n": int(os.getenv("SPECTRUM_INTERVAL_GRID_N", "128")),
    "horizon": float(os.getenv("SPECTRUM_HORIZON", "100.0")),
    "windows": int(os.getenv("SPECTRUM_WINDOWS", "8")),
    "burn_in_fraction": float(os.getenv("SPECTRUM_BURN_IN_FRACTION", "0.2")),
    "steps_per_period": int(os.getenv("SPECTRUM_STEPS_PER_PERIOD", "100")),
    "autonomous_dt": float(os.getenv("SPECTRUM_AUTONOMOUS_DT", "0.5")),
    "bracket_lo": float(os.getenv("SPECTRUM_BRACKET_LO", "1e-2")),
    "bracket_expansions": int(os.getenv("SPECTRUM_BRACKET_EXPANSIONS", "6")),
    "placements": int(os.getenv("SPECTRUM_PLACEMENTS", "64")),
    "oracle_quad_n": int(os.getenv("ORACLE_QUAD_N", "64")),
    "oracle_budget": int(float(os.getenv("ORACLE_LATTICE_BUDGET", "1e7"))),
    "oracle_tail": float(os.getenv("ORACLE_TAIL", "1e-12")),
    "diagnostic_scale": float(os.getenv("DIAGNOSTIC_TOL_SCALE", "10.0")),
}
