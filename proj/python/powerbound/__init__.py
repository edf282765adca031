"""Work and power bounds for autonomous quantum machines.

The heavy lifting lives in the compiled ``_powerbound`` extension; this
package re-exports its entry points. Reports come back as dicts or JSON
text matching the ``powerbound-report/1`` schema used by the CLI.
"""

from ._powerbound import (
    OUTPUT_DIR_ENV,
    REPORT_SCHEMA,
    bound_commutator,
    bound_fluctuation,
    clock_momentum_moments,
    detectability_timescale,
    list_scenarios,
    operator_norm,
    optimal_wavefunction,
    run_config,
    run_scenario,
    sweep_config,
    trace_norm,
    variational_minimize,
    verify_model,
)

__version__ = "0.1.0"

__all__ = [
    "OUTPUT_DIR_ENV",
    "REPORT_SCHEMA",
    "bound_commutator",
    "bound_fluctuation",
    "clock_momentum_moments",
    "detectability_timescale",
    "list_scenarios",
    "operator_norm",
    "optimal_wavefunction",
    "run_config",
    "run_scenario",
    "sweep_config",
    "trace_norm",
    "variational_minimize",
    "verify_model",
]
