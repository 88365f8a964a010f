"""Monotone coupling on a wired binary tree and on a random regular graph.

Top (all open) and bottom (all closed) heat-bath chains share one random
stream; the script reports coupling times against tree size and then runs
the burn-in plus local-ball check on a random 3-regular graph.
Run: ``python3 demos/coupled_chains.py``.
"""
import math

import numpy as np

from fkdyn.dynamics import coupling_time_profile
from fkdyn.labcli import rrg_pipeline_seed
from fkdyn.oracle import RCParams
from fkdyn.topology import TreeSpec


def main():
    params = RCParams(0.85, 3.0)
    family = [TreeSpec("d-ary", 3, h) for h in range(4, 9)]
    for r in coupling_time_profile(family, params, "wired", replicas=16, seed=0):
        n = r["n"]
        print(f"h={r['height']} n={n:4d} median={r['median']:9.0f} "
              f"median/(n log^2 n)={r['median'] / (n * math.log(n) ** 2):.3f}")

    q = 8.0
    p = 1.05 * q / (3 + q - 2)
    for C in (4.0, 1.0):
        burn, balls = rrg_pipeline_seed(2000, 3, RCParams(p, q), seed=5, n_balls=30, radius=2,
                                        burn_in_constant=C, local_factor=200)
        agree = np.mean([b["agree"] for b in balls])
        print(f"burn-in C={C}: {burn['top_bottom_diff']} edges differ after burn-in, "
              f"center-edge agreement after local phase {agree:.2f}")


if __name__ == "__main__":
    main()
