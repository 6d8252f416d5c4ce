import logging

from harness.config import RunConfig
from solver.double import run_double
from solver.fixed import run_fixed_dirichlet, run_fixed_mixed, run_halfline
from solver.front import run
from solver.series import RunSeries

logger = logging.getLogger(__name__)


def execute(config: RunConfig, allow_h1_violation: bool = False) -> RunSeries:
    """Dispatch on the geometry kind; every branch returns a RunSeries with its outcome set."""
    geometry = config.geometry
    logger.info(f"Dispatching {geometry.kind} run {config.digest()[:12]}")
    if geometry.kind == "single":
        series, _ = run(config, allow_h1_violation)
    elif geometry.kind == "double":
        series, _ = run_double(config, allow_h1_violation)
    elif geometry.kind == "halfline":
        series = run_halfline(config, allow_h1_violation)
    elif geometry.bc == "mixed":
        series = run_fixed_mixed(geometry.beta, config.coefficients, geometry.l_plus, config.initial, config)
    else:
        c = config.coefficients
        series = run_fixed_dirichlet(
            geometry.beta, c.a.value, c.b.value, geometry.l_minus, geometry.l_plus, config.initial, config
        )
    return series
