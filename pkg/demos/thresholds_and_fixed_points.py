"""Where the tree recursion has one, two or three fixed points.

For each (q, Delta) the script prints the uniqueness threshold p_u, the
closed-form p_s, and the fixed points of g = Phi^d at a few p values on
either side.  Run: ``python3 demos/thresholds_and_fixed_points.py``.
"""
import numpy as np

from fkdyn.oracle import RCParams
from fkdyn.recursion import fixed_points, thresholds


def main():
    for delta in (3, 5):
        for q in (1.5, 3.0, 10.0):
            p_s, p_u, _ = thresholds(q, delta)
            print(f"Delta={delta} q={q:<4g} p_u={p_u:.6f} p_s={p_s:.6f}")
            probes = sorted({0.5 * p_u, 0.5 * (p_u + p_s), 0.5 * (p_s + 1.0)})
            for p in probes:
                rep = fixed_points(RCParams(p, q), delta - 1, p_u=p_u)
                pts = ", ".join(f"{y:.4g}" for y in rep.fixed_points)
                beta = "" if rep.beta_star is None else f"  beta*={rep.beta_star:.4f}"
                print(f"    p={p:.4f} {rep.regime:<10} [{pts}]{beta}")

    # beta* shrinks as p grows past p_s
    q, delta = 3.0, 3
    p_s = thresholds(q, delta)[0]
    grid = np.linspace(p_s, 0.99, 6)
    betas = [fixed_points(RCParams(p, q), delta - 1).beta_star for p in grid]
    print("\nbeta* along p in [p_s, 0.99] for q=3, Delta=3:")
    print("    " + "  ".join(f"{b:.3f}" for b in betas))


if __name__ == "__main__":
    main()
