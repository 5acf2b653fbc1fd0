"""
Horizon myopia with long-duration storage
=========================================

A cheap day followed by an expensive one is the classic case where a short
look-ahead leaves the long-duration battery empty when it matters. Extending
the window from 48 h to 96 h while committing 24 h at a time lets the
optimizer see the expensive day and pre-charge for it.
"""

from horizonpcm import HorizonPolicy, run_simulation, total_production_cost
from horizonpcm.degeneracy import MYOPIA, build_degenerate_instance, myopia_certified_gap, \
    unperturbed_costs
from horizonpcm.metrics import cumulative_tpc_delta, soc_delta
from horizonpcm.system import LDES

spec, series = build_degenerate_instance(MYOPIA)
costs = unperturbed_costs(spec)

traditional = run_simulation(spec, series, HorizonPolicy.traditional(), costs=costs)
extended = run_simulation(spec, series, HorizonPolicy(96, 24, "extended"), costs=costs)

t = total_production_cost(traditional).total
e = total_production_cost(extended).total
print(f"48/24 total cost:  {t:12.2f}")
print(f"96/24 total cost:  {e:12.2f}")
print(f"gap:               {t - e:12.2f}")
print(f"certified gap:     {myopia_certified_gap(spec, costs):12.2f}")

###############################################################################
# Day by day the cost difference and the LDES state of charge gap, as a
# percentage of fleet energy capacity.

print("cumulative TPC delta:", cumulative_tpc_delta(traditional, extended).round(2))
print("LDES SOC delta (% cap), end of each day:",
      soc_delta(traditional, extended, LDES)[23::24].round(1))
