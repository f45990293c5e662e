"""How much an imperfectly prepared exciton still transfers.

Starts from r|X><X| + (1-r)|Y><Y| and scans r. The averaged transfer
<rho_YY - rho_YY(0)> and the averaged negative part of Q both shrink as the
linear entropy S_L = 2r(1-r) grows.

    python demos/purity_scan.py
"""

from vibheom import load_scenario, sweep_purity
from vibheom.output import sweep_text
from vibheom.sweeps import scenario_sweep

table = sweep_purity(load_scenario("fig-mixed"), scenario_sweep("fig-mixed")["values"])
print(sweep_text(table))
