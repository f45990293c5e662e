"""Weak, intermediate and strong bath coupling side by side.

The coherent regime is expected while sqrt(lambda * Omega_c) stays below
2 g |V| / dE; the script prints that comparison next to the time averages
over the first half picosecond. The lambda = 110 point runs the deepest
hierarchy and takes the longest (about 15 s on one core).

    python demos/bath_regimes.py [out_dir]
"""

import sys

from vibheom import coherent_boundary, load_scenario, simulate
from vibheom.output import write_run

out_dir = sys.argv[1] if len(sys.argv) > 1 else None

print(f"{'lambda':>7} {'sqrt(l*Wc)':>11} {'<rho_YY>':>10} {'<Q Th[-Q]>':>11} {'<|coh|>':>9} {'ADOs':>6} {'time':>7}")
for name in ("fig2a-c", "fig2d-f", "fig2g-i"):
    cfg = load_scenario(name)
    res = simulate(cfg)
    s = res.summary()
    b = coherent_boundary(cfg)
    print(f"{cfg.bath.reorganization:7g} {b['coupling_scale']:11.1f} {s['avg_rho_YY']:10.4f} "
          f"{s['avg_neg_Q']:11.5f} {s['avg_abs_coh']:9.4f} {res.n_ados:6d} {res.wall_time:6.1f}s")
    if out_dir:
        write_run(res, out_dir)

b = coherent_boundary(load_scenario("fig2d-f"))
print(f"\ncoherent while sqrt(lambda Omega_c) <= {b['threshold']:.1f} cm^-1, "
      f"i.e. lambda <= {b['boundary_lambda']:.1f} cm^-1")
