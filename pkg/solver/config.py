import os
from dotenv import load_dotenv

load_dotenv()

SOLVER_CONFIG = {
    "clamp_floor": float(os.getenv("SOLVER_CLAMP_FLOOR", "1e-12")),
    "blowup_cap": float(os.getenv("SOLVER_BLOWUP_CAP", "1e3")),
    "cfl": float(os.getenv("SOLVER_CFL", "0.5")),
    "reaction_fraction": float(os.getenv("SOLVER_REACTION_FRACTION", "0.1")),
    "front_tol": float(os.getenv("SOLVER_FRONT_TOL", "1e-8")),
    "compat_tol": float(os.getenv("SOLVER_COMPAT_TOL", "1e-2")),
    "bound_tol": float(os.getenv("SOLVER_BOUND_TOL", "1e-3")),
    "persistence_tol": float(os.getenv("SOLVER_PERSISTENCE_TOL", "0.02")),
    "boundary_layer": float(os.getenv("SOLVER_BOUNDARY_LAYER", "0.1")),
    "h_inf_tol": float(os.getenv("SOLVER_H_INF_TOL", "0.05")),
    "min_grid_n": int(os.getenv("SOLVER_MIN_GRID_N", "32")),
    "beta_small": float(os.getenv("SOLVER_BETA_SMALL", "1e-2")),
    "ode_tol": float(os.getenv("LOGISTIC_ODE_TOL", "1e-10")),
    "ode_max_iter": int(os.getenv("LOGISTIC_ODE_MAX_ITER", "500")),
    "ode_damping": float(os.getenv("LOGISTIC_ODE_DAMPING", "0.9")),
}
