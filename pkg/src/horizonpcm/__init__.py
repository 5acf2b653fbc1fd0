"""Rolling-horizon production cost modelling with unit commitment and storage."""

__version__ = "0.1.0"

from .system import (LDES, SDES, Line, ReserveProduct, StorageUnit, SynthParams, SystemSpec,
                     ThermalUnit, TimeSeriesFrame, VreUnit, Zone, net_load, synth_system,
                     validate_system)
from .formulation import (CostConfig, FormulationOptions, InitialConditions, MilpProblem,
                          build_window, fix_binaries, perturb_storage_costs)
from .solver import (SolveResult, SolveSettings, enumerate_binaries_oracle, solve_lp,
                     solve_milp)
from .horizon import HorizonPolicy, SimulationLedger, propagate_state, run_simulation
from .pricing import PriceSeries, compute_lmps, price_stats
from .metrics import (MetricReport, cumulative_tpc_delta, curtailment, equivalent_cycles,
                      metric_report, soc_delta, storage_revenue, total_production_cost)
from .degeneracy import (ComparisonReport, build_degenerate_instance,
                         detect_alternate_optima, twin_run)
from .io import load_system, read_ledger, write_ledger, write_system
