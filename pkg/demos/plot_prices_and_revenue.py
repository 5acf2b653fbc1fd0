"""
Locational prices and storage revenue
=====================================

Prices come from the linear program obtained by fixing each window's
commitment decisions; the dual of each zonal balance row is the price for
that zone and hour. Storage revenue is discharge minus charge, valued at
those prices.
"""

import numpy as np

from horizonpcm import (HorizonPolicy, SynthParams, compute_lmps, price_stats, run_simulation,
                        storage_revenue, synth_system)
from horizonpcm.system import LDES, SDES

spec, series = synth_system(SynthParams(zones=3, hours=168), seed=1)
ledger = run_simulation(spec, series, HorizonPolicy.traditional())
prices = compute_lmps(spec, series, ledger)

###############################################################################
# Price statistics per zone. Zones only separate when a line is congested.

for k, z in enumerate(prices.zone_ids):
    s = price_stats(prices.lmp[:, [k]])
    print(f"{z}: mean {s['mean']:8.2f}  stdev {s['stdev']:8.2f}  "
          f"max {prices.lmp[:, k].max():8.2f}")
load = series.load_matrix(spec.zone_ids)
print("load-weighted system mean:", round(price_stats(prices, load)["mean"], 2))

###############################################################################
# Storage revenue by technology.

for tech in (SDES, LDES):
    if spec.storage(tech):
        rev = storage_revenue(ledger, prices, tech)
        print(f"{tech}: total {rev['total']:12.2f}  per MW-year {rev['per_mw_year']:10.2f}")

print("hours with a scarcity price:", int(np.sum(prices.lmp >= 1e4 - 1e-6)))
