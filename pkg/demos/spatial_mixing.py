"""Decay of the root connection gap on binary trees.

Compares the exact gap between all-wired leaves and randomly wired leaves
(each leaf wired with probability theta) against beta* = g'(y*).
Run: ``python3 demos/spatial_mixing.py``.
"""
from fkdyn.oracle import RCParams
from fkdyn.recursion import fixed_points, wsm_decay_profile


def main(p=0.85, q=3.0, theta=0.3):
    params = RCParams(p, q)
    rows, rate = wsm_decay_profile(2, params, theta, range(4, 15), replicas=32, seed=1)
    for r in rows:
        print(f"depth {r['depth']:2d}  mean gap {r['mean_gap']:.3e}  "
              f"range [{r['min_gap']:.2e}, {r['max_gap']:.2e}]")
    beta = fixed_points(params, 2).beta_star
    print(f"fitted per-level rate {rate:.4f}, beta* {beta:.4f}")


if __name__ == "__main__":
    main()
