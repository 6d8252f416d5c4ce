import logging
import math

import numpy as np

from solver.series import Outcome, RunSeries, Verdict

logger = logging.getLogger(__name__)


def _front_columns(series: RunSeries):
    h = series.column("h")
    h_prime = series.column("h_prime")
    if series.has("g"):
        g = series.column("g")
        g_prime = series.column("g_prime")
        return np.minimum(-g, h), np.maximum(h_prime, -g_prime), float(h[-1] - g[-1])
    return h, h_prime, float(h[-1])


def classify(series: RunSeries, l_star: float, thresholds, h_max: float = math.inf) -> Outcome:
    """Finite-time verdict from the trailing window of a front run.

    Vanishing: sup_u < eps_v and front speed < eps_h over the window.
    Spreading: the front reached h_max and the probe-window infimum stayed >= delta_s.
    Double-front series are judged on the nearer front to the origin and the faster of the two.
    """
    if len(series) == 0:
        return Outcome(verdict=Verdict.UNDETERMINED, h_infinity_estimate=math.nan, final_sup_u=math.nan, l_star=l_star)
    t = series.column("t")
    start = t[-1] - thresholds.window_fraction * (t[-1] - t[0])
    mask = t >= start - 1e-12
    sup_u = series.column("sup_u")
    inf_window = series.column("inf_u_window")
    reach, speed, h_final = _front_columns(series)
    final_sup = float(sup_u[-1])

    if sup_u[mask].max() < thresholds.eps_v and speed[mask].max() < thresholds.eps_h:
        return Outcome(verdict=Verdict.VANISHING, h_infinity_estimate=h_final, final_sup_u=final_sup, l_star=l_star)
    if reach[-1] >= h_max and inf_window[mask].min() >= thresholds.delta_s:
        return Outcome(verdict=Verdict.SPREADING, h_infinity_estimate=math.inf, final_sup_u=final_sup, l_star=l_star)
    return Outcome(verdict=Verdict.UNDETERMINED, h_infinity_estimate=h_final, final_sup_u=final_sup, l_star=l_star)
