import os
from dotenv import load_dotenv

load_dotenv()

MODEL_CONFIG = {
    "coeff_sample_points": int(os.getenv("COEFF_SAMPLE_POINTS", "10000")),
    "coeff_window_hi": float(os.getenv("COEFF_WINDOW_HI", "50.0")),
    "bound_rel_tol": float(os.getenv("COEFF_BOUND_REL_TOL", "1e-12")),
}
