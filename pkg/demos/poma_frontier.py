"""Trade-off between missed actuations and information freshness.

For a range of mean-AoI bounds, solve the PoMA problem in closed form and
check it against the constrained lattice search. Also writes the mean-AoA
surface of setup 2 to a CSV for external plotting.

Run: python3 demos/poma_frontier.py [output.csv]
"""

import csv
import sys

from swipt_aoa.cli import sweep_rows
from swipt_aoa.metrics import INFINITE
from swipt_aoa.opt import grid_oracle, minimize_poma_subject_to_aoi, poma_switch_delta
from swipt_aoa.reproduce import printed_probs
from swipt_aoa.scenario import bundled_scenario


def main(path="mean_aoa_setup2.csv"):
    for name in ("setup1", "setup2"):
        succ = printed_probs(name)
        print(f"{name}: regime switch at delta_hat = {poma_switch_delta(succ):.4f}")
        print(f"  {'delta':>6}{'q1*':>9}{'q2*':>9}{'PoMA':>10}{'grid PoMA':>11}  case")
        for delta in (1.5, 2, 3, 4, 5, 7, 10, 20):
            res = minimize_poma_subject_to_aoi(succ, delta)
            grid = grid_oracle("poma", succ, INFINITE, step=0.01,
                               constraint=("mean_aoi", delta))
            print(f"  {delta:>6g}{res.q1_star:>9.4f}{res.q2_star:>9.4f}{res.value:>10.5f}"
                  f"{grid.value:>11.5f}  {res.case_label}")
        print()

    rows = sweep_rows(bundled_scenario("setup2"), "mean_aoa", 0.01)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["q1", "q2", "value", "energy_limited"])
        w.writerows(rows)
    best = min(rows, key=lambda r: r[2])
    print(f"wrote {len(rows)} lattice points to {path}; lattice minimum at "
          f"({best[0]:.2f}, {best[1]:.2f}) with mean AoA {best[2]:.4f}")


if __name__ == "__main__":
    main(*sys.argv[1:])
