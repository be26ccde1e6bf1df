#!/usr/bin/env python3
"""Compare the busy-period theta formula with the embedded chain's quasi-stationary law.

For each stable Erlang cell this prints theta from the Laplace-transform
root, the state-1 mass and decay factor of the truncated chain's
quasi-stationary distribution, and 1 - p*theta, which should sit above the
decay if p*theta is a valid floor for the failure rate.
"""

import argparse
import time

from geombound.markov import quasi_stationary_dist
from geombound.queueing import MG1System, busy_period_chain, erlang, kyprianou_theta
from geombound.tables import ERLANG_GRID


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--level", type=int, default=400, help="truncation level of the embedded chain")
    args = ap.parse_args()
    start = time.perf_counter()
    print("k,lambda,beta,theta,qsd_state1,abs_gap,decay,one_minus_p_theta")
    worst = 0.0
    for k in ERLANG_GRID["k"]:
        for lam in ERLANG_GRID["lambda"]:
            for beta in ERLANG_GRID["beta"]:
                if k * lam >= beta:
                    continue
                sys = MG1System(lam, erlang(k, float(beta)))
                theta = kyprianou_theta(sys)
                qsd = quasi_stationary_dist(busy_period_chain(sys, args.level))
                gap = abs(qsd.dist[0] - theta)
                worst = max(worst, gap)
                p = sys.service.laplace(lam)
                print(f"{k},{lam},{beta},{theta:.6f},{qsd.dist[0]:.6f},{gap:.2e},{qsd.decay:.6f},{1 - p * theta:.6f}")
    print(f"# worst gap {worst:.3g}, {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
