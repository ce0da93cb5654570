"""Monte Carlo check of the exact stacked support probabilities.

    python scripts/mc_oracle.py --triple 2,4,4 --n 4 --samples 1000000 --seed 1
"""

from __future__ import annotations

import argparse
import csv
import itertools
import sys
from dataclasses import dataclass

from nestedcss.enumerators import mc_support_prob, support_probability
from nestedcss.ensemble import BalancedTriple, row_counts


@dataclass
class OracleConfig:
    triple: BalancedTriple = BalancedTriple(2, 4, 4)
    n: int = 4
    samples: int = 10**6
    seed: int = 0
    syndrome: str = "even"


def run(cfg: OracleConfig) -> list[dict]:
    m_Z, m_D, _ = row_counts(cfg.triple.profile(cfg.n))
    rows = []
    for i, (t1, td, w) in enumerate(itertools.product(range(m_Z + 1), range(m_D + 1), range(cfg.n + 1))):
        if t1 + td + w == 0:
            continue
        exact = float(support_probability(cfg.triple, cfg.n, t1, td, w, cfg.syndrome))
        est, se = mc_support_prob(cfg.triple, cfg.n, t1, td, w, cfg.samples, cfg.seed + i, syndrome=cfg.syndrome)
        z = abs(est - exact) / se if se > 0 else (0.0 if est == exact else float("inf"))
        rows.append({"t1": t1, "tD": td, "w": w, "exact": exact, "mc": est, "se": se, "z": z})
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--triple", type=BalancedTriple.parse, default=OracleConfig.triple)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--samples", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--syndrome", choices=["even", "ones"], default="even")
    a = ap.parse_args()
    rows = run(OracleConfig(a.triple, a.n, a.samples, a.seed, a.syndrome))
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    print(f"# max z = {max(r['z'] for r in rows):.2f} over {len(rows)} queries", file=sys.stderr)


if __name__ == "__main__":
    main()
