"""Finite-length rate deficits of sampled instances as n grows.

For each n, reports the median gaps |R_Z - R_Z^des| and |R_Q - R_Q^des| over
seeded instances, plus the mean of dim Ker B / n.

    python scripts/rate_trend.py --triple 4,6,10 --ns 100 200 500 1000 --samples 200
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import numpy as np

from nestedcss.construct import build_instance, rate_report
from nestedcss.ensemble import BalancedTriple, SamplerConfig


@dataclass
class TrendConfig:
    triple: BalancedTriple = BalancedTriple(4, 6, 10)
    ns: list[int] = field(default_factory=lambda: [100, 200, 500, 1000])
    samples: int = 200
    seed: int = 0


def run(cfg: TrendConfig) -> list[dict]:
    rows = []
    for n in cfg.ns:
        gz, gq, kb = [], [], []
        for i in range(cfg.samples):
            rr = rate_report(build_instance(cfg.triple.profile(n), SamplerConfig(seed=cfg.seed), i))
            gz.append(abs(float(rr.R_Z - rr.R_Z_des)))
            gq.append(abs(float(rr.R_Q - rr.R_Q_des)))
            kb.append((n - rr.rank_B) / n)
        rows.append({"n": n, "median_gap_R_Z": float(np.median(gz)), "median_gap_R_Q": float(np.median(gq)),
                     "mean_dimKerB_over_n": float(np.mean(kb))})
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--triple", type=BalancedTriple.parse, default=TrendConfig.triple)
    ap.add_argument("--ns", type=int, nargs="+", default=[100, 200, 500, 1000])
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    rows = run(TrendConfig(a.triple, a.ns, a.samples, a.seed))
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
