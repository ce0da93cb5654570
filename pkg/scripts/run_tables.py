"""Reproduce the three certification tables as CSV files.

    python scripts/run_tables.py --out results/ [--no-timestamp]
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass
from pathlib import Path

from nestedcss.scan import emit_tables, read_csv


@dataclass
class TablesConfig:
    out: Path = Path("results")
    tables: tuple[str, ...] = ("D", "E", "F")
    timestamp: bool = True


def run(cfg: TablesConfig) -> dict[str, int]:
    cfg.out.mkdir(parents=True, exist_ok=True)
    failures = {}
    for which in cfg.tables:
        t0 = time.perf_counter()
        text = emit_tables(which, cfg.timestamp)
        (cfg.out / f"table_{which}.csv").write_text(text)
        _, rows = read_csv(text)
        flags = [k for k in rows[0] if k.startswith("pass_")]
        bad = sum(any(r[f] != "1" for f in flags) for r in rows)
        failures[which] = bad
        print(f"table {which}: {len(rows)} rows, {bad} not passing, {time.perf_counter() - t0:.1f}s")
    return failures


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=TablesConfig.out)
    ap.add_argument("--tables", default="DEF")
    ap.add_argument("--no-timestamp", dest="timestamp", action="store_false")
    a = ap.parse_args()
    failures = run(TablesConfig(a.out, tuple(a.tables.upper()), a.timestamp))
    raise SystemExit(1 if any(failures.values()) else 0)


if __name__ == "__main__":
    main()
