import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from harness.config import RunConfig, SweepSpec, config_from_mapping
from harness.io import save_run
from harness.runner import execute
from harness.sweep import run_sweep
from model.coefficients import CoefficientField
from model.params import ModelParams, check_hypotheses
from numerics.elliptic import check_combo_bound, check_gradient_bound, solve_pair
from numerics.spectrum import DirichletDirichlet, MixedNeumannDirichlet, find_l_star, find_l_star_star, richardson_eigenvalue
from solver.fixed import logistic_entire_solution
from solver.series import RunSeries, Verdict
from utils.helper import error, success

logger = logging.getLogger(__name__)

PERSISTENCE_MODEL = {"chi1": 0.2, "chi2": 0.3}
PERIODIC_A = {
    "kind": "time_only",
    "a": {"kind": "sin_periodic", "offset": 1.0, "amplitude": 0.5, "period": 1.0},
    "b": {"kind": "constant", "value": 1.0},
    "period": 1.0,
    "a_inf": 0.5,
    "a_sup": 1.5,
    "b_inf": 1.0,
    "b_sup": 1.0,
}


def constant_coefficients(a: float = 1.0, b: float = 1.0) -> dict:
    return {"kind": "constant", "a": {"kind": "constant", "value": a}, "b": {"kind": "constant", "value": b}}


def single_front(h0: float, amp: float = 0.1, t_end: float = 30.0, h_max: Optional[float] = 10.0, **sections) -> dict:
    data = {
        "geometry": {"kind": "single", "h0": h0},
        "initial": {"kind": "cosine", "amp": amp},
        "time": {"t_end": t_end, "h_max": h_max},
    }
    data.update(sections)
    return data


def check(name: str, ok: bool, **data) -> dict:
    """One assertion of a preset as a result envelope."""
    payload = {"assertion": name, **data}
    if ok:
        return success(payload)
    logger.warning(f"Assertion {name} failed: {data}")
    return error(f"assertion {name} failed", payload)


@dataclass
class PresetRun:
    name: str
    out: Path
    overrides: list[str] = field(default_factory=list)
    jobs: int = 1
    allow_h1_violation: bool = False
    results: list[dict] = field(default_factory=list)

    def config(self, data: dict, label: str) -> RunConfig:
        config = config_from_mapping(data, self.overrides, source=f"{self.name}:{label}")
        output = config.output.model_copy(update={"label": label})
        return config.model_copy(update={"output": output})

    def run(self, data: dict, label: str, allow_h1_violation: Optional[bool] = None) -> RunSeries:
        config = self.config(data, label)
        allow = self.allow_h1_violation if allow_h1_violation is None else allow_h1_violation
        series = execute(config, allow)
        save_run(series, config, self.out)
        return series

    def sweep(self, base: dict, axes: list[dict], label: str, metrics=None):
        spec = SweepSpec(base=self.config(base, label), axes=axes, jobs=self.jobs)
        return run_sweep(spec, self.out / label, allow_h1_violation=self.allow_h1_violation, metrics=metrics)

    def expect(self, name: str, ok: bool, **data):
        self.results.append(check(name, bool(ok), **data))


def _interior_gap(series: RunSeries, target: float, reach: float = 1.0) -> float:
    state = series.final_state
    mask = np.abs(state.x) <= reach + 1e-12
    return float(np.abs(state.u[mask] - target).max() / target)


def _bound_checks(run: PresetRun, series: RunSeries, p: ModelParams, prefix: str, **data):
    """Decrease above M0, the eventual bound and both potential diagnostics on the final state."""
    report = series.manifest["hypotheses"]
    M0 = report["M0"]
    sup = series.column("sup_u")
    above = sup[:-1] > M0 + 1e-3
    increments = np.diff(sup)[above]
    run.expect(f"{prefix}decreasing-above-M0", increments.size == 0 or increments.max() <= 1e-3, M0=M0, **data)
    tail = sup[-max(1, len(sup) // 10):]
    run.expect(f"{prefix}eventual-bound", tail.max() <= M0 + 1e-3, M0=M0, tail_max=float(tail.max()), **data)
    state = series.final_state
    pair = solve_pair(state.u, p, state.h)
    combo = check_combo_bound(pair, state.u, p, report["M"])
    gradient = check_gradient_bound(pair, state.u, p)
    run.expect(f"{prefix}combo-bound", combo["ok"], residual=combo["residual"], **data)
    run.expect(f"{prefix}gradient-bound", gradient["ok"], residual=gradient["residual"], **data)


def bounds_check(run: PresetRun, randomized: int = 20):
    """Uniform bound, decay above M0 and the potential diagnostics on (H1) configs."""
    base = single_front(
        2.0,
        amp=1.5,
        t_end=30.0,
        h_max=15.0,
        model=PERSISTENCE_MODEL,
        checks={"bounds": True, "diagnostics": True, "eventual_bound": True},
    )
    series = run.run(base, "bounds-check")
    _bound_checks(run, series, ModelParams(**PERSISTENCE_MODEL), "")
    run.expect("front-nondecreasing", np.all(np.diff(series.column("h")) >= 0))

    rng = np.random.default_rng(0)
    accepted = 0
    while accepted < randomized:
        model = {"chi1": float(rng.uniform(0.0, 0.3)), "chi2": float(rng.uniform(0.0, 0.3))}
        a = float(rng.uniform(0.8, 2.0))
        b = float(rng.uniform(1.0, 2.0))
        p = ModelParams(**model)
        if not check_hypotheses(p, CoefficientField.constant(a, b)).h1_holds:
            continue
        data = single_front(
            float(rng.uniform(1.0, 3.0)),
            amp=float(rng.uniform(0.2, 1.5)),
            t_end=15.0,
            h_max=None,
            model=model,
            coefficients=constant_coefficients(a, b),
        )
        cell = run.run(data, f"bounds-check-random-{accepted}")
        _bound_checks(run, cell, p, f"random-{accepted}-", **model, a=a, b=b)
        accepted += 1


def dichotomy_sweep(run: PresetRun):
    """h0 sweep at a = b = 1 without chemotaxis; verdicts must switch once from Vanishing to Spreading."""
    h0_values = [0.3, 0.4, 0.6, 1.0, 1.5, 2.0, 3.0]
    table = run.sweep(
        single_front(1.0, amp=0.1, t_end=40.0),
        [{"path": "geometry.h0", "values": h0_values}],
        "dichotomy-sweep",
    )
    l_star = math.pi / 2
    verdicts = table["verdict"].tolist()
    spreading = [h for h, v in zip(h0_values, verdicts) if v == Verdict.SPREADING.value]
    vanishing = [h for h, v in zip(h0_values, verdicts) if v == Verdict.VANISHING.value]
    run.expect("monotone-boundary", not spreading or not vanishing or max(vanishing) < min(spreading), verdicts=verdicts)
    h_inf = table.loc[table["verdict"] == Verdict.VANISHING.value, "h_infinity_estimate"]
    run.expect("vanishing-below-l-star", bool((h_inf <= l_star + 0.05).all()), h_infinity=h_inf.tolist())
    run.expect("calibration-vanishing", verdicts[1] == Verdict.VANISHING.value, verdict=verdicts[1])
    run.expect("calibration-spreading", verdicts[5] == Verdict.SPREADING.value, verdict=verdicts[5])


def persistence(run: PresetRun):
    """Half-line run under (H2) from u0 = 0.5, interior kept inside [m0, M0 + 1]."""
    data = {
        "model": PERSISTENCE_MODEL,
        "geometry": {"kind": "halfline", "L": 32.0},
        "initial": {"kind": "constant", "value": 0.5},
        "time": {"t_end": 20.0, "transient": 5.0},
        "checks": {"persistence": True},
    }
    series = run.run(data, "persistence")
    report = series.manifest["hypotheses"]
    run.expect("h2-holds", report["h2_holds"], margin=report["margin_h2"])
    t = series.column("t")
    late = t >= 5.0
    lo = float(series.column("inf_u_interior")[late].min())
    hi = float(series.column("sup_u_interior")[late].max())
    m0, M0 = report["m0"], report["M0"]
    run.expect("interior-band", m0 - 0.02 <= lo and hi <= M0 + 1.02, inf=lo, sup=hi, m0=m0, M0=M0)

    front = run.run(
        single_front(2.0, amp=0.5, t_end=40.0, h_max=10.0, model=PERSISTENCE_MODEL), "persistence-front"
    )
    if front.outcome.verdict == Verdict.SPREADING:
        t = front.column("t")
        window = t >= t[-1] - 0.2 * (t[-1] - t[0])
        inf_w = float(front.column("inf_u_window")[window].min())
        run.expect("local-persistence", inf_w >= m0 - 0.02, inf_window=inf_w, m0=m0)
    else:
        run.expect("local-persistence", False, verdict=front.outcome.verdict.value)


def ode_limit(run: PresetRun):
    """Spreading runs settle near the origin on the logistic equilibrium or periodic orbit."""
    constant = run.run(
        single_front(2.0, amp=0.5, t_end=40.0, h_max=15.0, coefficients=constant_coefficients(2.0, 1.0)),
        "ode-limit-constant",
    )
    gap = _interior_gap(constant, 2.0)
    run.expect("constant-limit", constant.outcome.verdict == Verdict.SPREADING and gap <= 0.01, gap=gap)

    periodic = run.run(
        single_front(2.0, amp=0.5, t_end=60.0, h_max=15.0, coefficients=PERIODIC_A), "ode-limit-periodic"
    )
    orbit = logistic_entire_solution(CoefficientField.model_validate(PERIODIC_A).a, 1.0, 1.0)
    t = periodic.column("t")
    last = t >= t[-1] - 1.0
    target = orbit(t[last])
    gap = float(np.abs(periodic.column("u_origin")[last] - target).max() / target.max())
    run.expect("periodic-limit", gap <= 0.02, gap=gap)
    residual = float(orbit.residual(np.linspace(0.0, 1.0, 201)).max())
    run.expect("orbit-residual", residual < 1e-8, residual=residual)


def double_dichotomy(run: PresetRun):
    """Symmetric two-front runs: width 1.2 vanishes below l**, width 4 spreads."""
    base = {
        "initial": {"kind": "cosine", "amp": 0.5},
        "time": {"t_end": 40.0, "h_max": 10.0},
    }
    narrow = run.run({**base, "geometry": {"kind": "double", "g0": -0.6, "h0": 0.6}}, "double-narrow")
    asym = float(np.abs(narrow.column("g") + narrow.column("h")).max())
    run.expect("symmetric-fronts", asym <= 1e-8, asymmetry=asym)
    width = narrow.last("width")
    run.expect(
        "narrow-vanishes",
        narrow.outcome.verdict == Verdict.VANISHING and width <= math.pi + 0.05,
        verdict=narrow.outcome.verdict.value,
        width=width,
    )
    wide = run.run({**base, "geometry": {"kind": "double", "g0": -2.0, "h0": 2.0}}, "double-wide")
    gap = _interior_gap(wide, 1.0)
    run.expect("wide-spreads", wide.outcome.verdict == Verdict.SPREADING and gap <= 0.01, gap=gap)


def spectrum_report_preset(run: PresetRun):
    """Critical lengths against closed forms, and the periodic interval around its time mean."""
    constant = CoefficientField.constant(1.0, 1.0)
    l_star = find_l_star(constant)
    l_star_star = find_l_star_star(constant)
    run.expect("l-star", abs(l_star - math.pi / 2) <= 1e-3, value=l_star)
    run.expect("l-star-star", abs(l_star_star - math.pi) <= 1e-3, value=l_star_star)
    scaled = find_l_star(CoefficientField.constant(4.0, 1.0))
    run.expect("l-star-scaling", abs(scaled - l_star / 2) <= 1e-3, value=scaled)
    lam = richardson_eigenvalue(1.0, MixedNeumannDirichlet(l=2.0))
    run.expect("mixed-closed-form", abs(lam - (1 - math.pi**2 / 16)) <= 1e-6, value=lam)
    lam = richardson_eigenvalue(1.0, DirichletDirichlet(l_minus=0.0, l_plus=4.0))
    run.expect("dirichlet-closed-form", abs(lam - (1 - math.pi**2 / 16)) <= 1e-6, value=lam)
    periodic = CoefficientField.model_validate(PERIODIC_A)
    l_periodic = find_l_star(periodic, 1e-3)
    run.expect("periodic-l-star", abs(l_periodic - math.pi / 2) <= 1e-2, value=l_periodic)


def convergence_order(run: PresetRun):
    """Observed spatial and temporal orders of the final (h, sup_u) at t = 1."""
    def final(n: int, dt: float) -> np.ndarray:
        data = single_front(2.0, amp=0.5, t_end=1.0, h_max=None)
        data["grid"] = {"n": n}
        data["time"] = {"t_end": 1.0, "dt_fixed": dt, "sample_dt": 0.25}
        data["classification"] = {"critical_length": math.pi / 2}
        series = run.run(data, f"convergence-n{n}-dt{dt:g}")
        return np.array([series.last("h"), series.last("sup_u")])

    def order(q: list[np.ndarray]) -> float:
        return float(np.log2(np.abs(q[0] - q[1]).max() / np.abs(q[1] - q[2]).max()))

    spatial = order([final(n, 1e-4) for n in (33, 65, 129)])
    temporal = order([final(129, dt) for dt in (4e-3, 2e-3, 1e-3)])
    run.expect("spatial-order", spatial >= 1.8, order=spatial)
    run.expect("temporal-order", temporal >= 0.9, order=temporal)


def chi_threshold_sweep(run: PresetRun):
    """(chi1, chi2) grid at h0 = 2; reports how far the interior sits from a/b."""
    run.allow_h1_violation = True
    table = run.sweep(
        single_front(2.0, amp=0.5, t_end=40.0, h_max=10.0),
        [{"path": "model.chi1", "values": [0.0, 0.2, 0.4]}, {"path": "model.chi2", "values": [0.0, 0.3, 0.6]}],
        "chi-threshold-sweep",
        metrics=lambda series: {"interior_gap": _interior_gap(series, 1.0)},
    )
    errors = table.loc[table["verdict"] == "Error"]
    run.expect("cells-finished", errors.empty, failed=errors["message"].tolist())
    converged = table.loc[table["interior_gap"] <= 0.01, ["model.chi1", "model.chi2"]]
    run.expect("chemotaxis-free-converges", ((converged["model.chi1"] == 0) & (converged["model.chi2"] == 0)).any())


def fixed_domain_verdicts(run: PresetRun):
    """Persistence or decay on fixed domains agrees with the sign of the principal eigenvalue."""
    cases = [
        ("mixed-3", {"bc": "mixed", "l_plus": 3.0}, MixedNeumannDirichlet(l=3.0)),
        ("mixed-1", {"bc": "mixed", "l_plus": 1.0}, MixedNeumannDirichlet(l=1.0)),
        ("dirichlet-4", {"bc": "dirichlet", "l_plus": 4.0}, DirichletDirichlet(l_minus=0.0, l_plus=4.0)),
        ("dirichlet-2", {"bc": "dirichlet", "l_plus": 2.0}, DirichletDirichlet(l_minus=0.0, l_plus=2.0)),
    ]
    for label, geometry, bc in cases:
        data = {
            "geometry": {"kind": "fixed", **geometry},
            "initial": {"kind": "cosine", "amp": 0.5},
            "grid": {"n": 65},
            "time": {"t_end": 20.0},
        }
        series = run.run(data, f"fixed-{label}")
        lam = richardson_eigenvalue(1.0, bc)
        expected = Verdict.PERSISTS if lam > 0 else Verdict.DECAYS
        run.expect(label, series.outcome.verdict == expected, verdict=series.outcome.verdict.value, eigenvalue=lam)


PRESETS: dict[str, Callable[[PresetRun], None]] = {
    "bounds-check": bounds_check,
    "dichotomy-sweep": dichotomy_sweep,
    "persistence": persistence,
    "ode-limit": ode_limit,
    "double-dichotomy": double_dichotomy,
    "spectrum-report": spectrum_report_preset,
    "convergence-order": convergence_order,
    "chi-threshold-sweep": chi_threshold_sweep,
    "fixed-domain-verdicts": fixed_domain_verdicts,
}
