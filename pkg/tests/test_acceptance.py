"""The twelve acceptance criteria, each at its stated tolerance.

Every criterion prints one ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line straight to the terminal, also when output capture is on.  Run alone with
``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.

Criterion 12 reruns 1-11 (the window scan with two worker processes) and
compares the deterministic artifacts byte for byte.
"""

from __future__ import annotations

import json
import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pytest

from nestedcss import certify as cz
from nestedcss import enumerators as en
from nestedcss import exponents as ex
from nestedcss import scan
from nestedcss.construct import (
    affine_equivalence,
    build_instance,
    compressed_pair,
    cz_generator,
    rate_report,
    verify_css,
)
from nestedcss.ensemble import BalancedTriple, DegreeProfile, SamplerConfig, row_counts, sample_square
from nestedcss.gf2 import rank
from nestedcss.tables import boundary_rows, ha_rows, mn_rows

SEED = 20240611
EX21 = DegreeProfile(3, 8, 2, 8, 2, 40)


@dataclass
class Outcome:
    ok: bool
    detail: str
    artifact: str = ""  # deterministic output compared by criterion 12


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=str)


# 1. HA table (D)

def crit1() -> Outcome:
    t0 = time.perf_counter()
    bad, certs = [], []
    for r in ha_rows():
        lam = round(ex.lambda_Z(r.beta_Z, r.triple.k), 9)
        c = cz.ha_certify(r.triple, r.beta_Z, r.delta_bar)
        certs.append(c.to_json())
        if abs(lam - r.lambda_Z) > 5e-13 or not c.certified or c.margin < 0.9 * r.eps_Z:
            bad.append(str(r.triple))
    dt = time.perf_counter() - t0
    ok = not bad and len(certs) == 56 and dt <= 600
    worst = min(c["margin"] / r.eps_Z for c, r in zip(certs, ha_rows()))
    return Outcome(ok, f"56 rows, failures={bad}, min margin/eps_Z={worst:.3g}, {dt:.1f}s",
                   scan.emit_tables("D", timestamp=False) + _dump(certs))


# 2. MN table (E)

def crit2() -> Outcome:
    bad, certs = [], []
    for r in mn_rows():
        c = cz.mn_certify(r.triple, r.beta_X)
        certs.append(c.to_json())
        BX = float(f"{c.constants['B_X']:.5g}")
        if BX != r.B_X or not c.certified or c.margin < 0.9 * r.eps_X:
            bad.append(str(r.triple))
    corners = {}
    for t in ((5, 9, 14), (5, 17, 22)):
        r = next(r for r in mn_rows() if r.triple == BalancedTriple(*t))
        corners[t] = ex.certified_constants(r.triple, math.nan, math.nan, r.beta_X).odd_corner
    corner_ok = (abs(corners[(5, 9, 14)] + 1.01033) <= 1e-4 and abs(corners[(5, 17, 22)] + 1.21158) <= 1e-4)
    ok = not bad and len(certs) == 56 and corner_ok
    worst = min(c["margin"] / r.eps_X for c, r in zip(certs, mn_rows()))
    return Outcome(ok, f"56 rows, failures={bad}, min margin/eps_X={worst:.3g}, "
                       f"odd corners {corners[(5, 9, 14)]:.5f}, {corners[(5, 17, 22)]:.5f}",
                   scan.emit_tables("E", timestamp=False) + _dump(certs))


# 3. boundary table (F)

def crit3() -> Outcome:
    bad, certs, corners = [], [], []
    for ha_r, mn_r in boundary_rows():
        t = ha_r.triple
        ha, mn = cz.boundary_certify(t.j_Z)
        certs += [ha.to_json(), mn.to_json()]
        lam = round(ex.lambda_Z(ha_r.beta_Z, t.k), 9)
        BX = float(f"{mn.constants['B_X']:.5g}")
        if not (ha.certified and mn.certified) or abs(lam - ha_r.lambda_Z) > 5e-13 or BX != mn_r.B_X:
            bad.append(str(t))
        if t.j_Z % 2:
            corners.append(mn.constants["odd_corner"])
    ha3, mn3 = cz.boundary_certify(3)
    small_ok = mn3.status == "Failed" and mn3.constants["B_X_upper"] >= 1 and not ha3.certified
    worst = max(corners)
    ok = not bad and len(certs) == 24 and small_ok and abs(worst + 0.79268) <= 1e-4
    return Outcome(ok, f"12 rows, failures={bad}, (3,3,6) MN {mn3.status} B_X={mn3.constants['B_X']:.4g}, "
                       f"worst odd corner {worst:.6f}",
                   scan.emit_tables("F", timestamp=False) + _dump(certs + [ha3.to_json(), mn3.to_json()]))


# 4. window scan

def crit4(threads: int = 1) -> Outcome:
    t0 = time.perf_counter()
    recs = scan.scan_window(threads)
    dt = time.perf_counter() - t0
    certified = {r.key for r in recs if r.category == "CertifiedGV"}
    expected = {r.key for r in recs if r.triple.k % 2 == 0 and r.triple.j_Z >= 4}
    low = [r for r in recs if r.triple.j_Z in (1, 2)]
    near = next(r for r in recs if r.triple == BalancedTriple(3, 4, 7))
    ok = (certified == expected and len(certified) == 56 and all(r.category == "ZeroProxy" for r in low)
          and near.category == "NearGV" and dt <= 1800)
    s = scan.summary(recs)
    art = (scan.emit_scan(recs, timestamp=False) + scan.emit_figure_data(recs, timestamp=False)
           + _dump([r.to_json() for r in recs]))
    return Outcome(ok, f"{len(recs)} triples, categories={s['categories']}, (3,4,7)={near.category}, "
                       f"threads={threads}, {dt:.0f}s", art)


# 5. exact enumerator identities

def crit5() -> Outcome:
    rows_ok = all(sum(en.transition_kernel(n, k, s, l) for l in range(n + 1)) == 1
                  for n, k in ((8, 2), (8, 4), (12, 4), (10, 6)) for s in range(n + 1))
    sym_ok = all(en.outer_enum(n, j, k, s) == en.outer_enum(n, j, k, n - s)
                 for n, j, k in ((8, 2, 4), (12, 3, 4), (12, 2, 6), (10, 4, 10), (16, 5, 8))
                 for s in range(n + 1))
    fold_ok, checked = True, 0
    t = BalancedTriple(2, 4, 4)  # (j_Z, j_Delta, k) = (2, 2, 4)
    for n in (2, 4, 6, 8):
        m_Z, m_D, _ = row_counts(t.profile(n))
        for t1 in range(m_Z + 1):
            for td in range(m_D + 1):
                for w in range(n + 1):
                    v = en.stacked_mean(t, n, t1, td, w)
                    fold_ok &= v == en.stacked_mean(t, n, m_Z - t1, td, w)
                    fold_ok &= v == en.stacked_mean(t, n, t1, m_D - td, w)
                    checked += 1
    ok = rows_ok and sym_ok and fold_ok
    return Outcome(ok, f"row sums {rows_ok}, N_o symmetry {sym_ok}, fold {fold_ok} ({checked} points)",
                   _dump([rows_ok, sym_ok, fold_ok, checked]))


# 6. oracle agreement

QUERIES = ((1, 0, 1), (1, 1, 2), (2, 1, 1), (0, 1, 2), (1, 2, 3), (2, 2, 2))


def crit6() -> Outcome:
    t = BalancedTriple(2, 4, 4)
    res = []
    for i, q in enumerate(QUERIES):
        exact = float(en.support_probability(t, 4, *q))
        est, se = en.mc_support_prob(t, 4, *q, samples=10**6, seed=SEED + i)
        z = abs(est - exact) / se if se > 0 else (0.0 if est == exact else math.inf)
        res.append((q, exact, est, se, z))
    mc_ok = len(res) >= 5 and all(r[4] <= 3 for r in res)
    No = (en.outer_enum(4, 2, 4, 1), en.outer_enum(4, 2, 4, 2))
    oracle = (en.socket_count_outer(4, 2, 4, 1), en.socket_count_outer(4, 2, 4, 2))
    no_ok = No == (Fraction(12, 7), Fraction(114, 35)) == oracle
    return Outcome(mc_ok and no_ok, f"{len(res)} queries, max z={max(r[4] for r in res):.2f}, "
                                    f"N_o(1), N_o(2) = {No[0]}, {No[1]} (oracle {oracle[0]}, {oracle[1]})",
                   _dump(res))


# 7. instance algebra

def crit7() -> Outcome:
    fails, rates = [], []
    for i in range(100):
        inst = build_instance(EX21, SamplerConfig(seed=SEED), i)
        pair = compressed_pair(inst)
        rr = rate_report(inst)
        ok = (bool(verify_css(inst, pair)) and rr.L_X <= rr.L_Z
              and rr.dim_CZ == rank(cz_generator(inst)) and rr.dim_CX == inst.n - rank(pair.H_X)
              and rr.R_Q == rr.R_X + rr.R_Z - 1
              and (rr.R_Z_des, rr.R_X_des, rr.R_Q_des) == (Fraction(5, 8), Fraction(5, 8), Fraction(1, 4)))
        if not ok:
            fails.append(i)
        rates.append(rr.to_json())
    exh = [affine_equivalence(build_instance(DegreeProfile(3, 8, 2, 8, 2, 16), SamplerConfig(seed=SEED), i),
                              SEED + i, trials=4) for i in range(8)]
    spot = [affine_equivalence(build_instance(EX21, SamplerConfig(seed=SEED), i), SEED + i, trials=16)
            for i in range(4)]
    thm_ok = all(e["exhaustive"] and e["ok"] for e in exh) and all(not s["exhaustive"] and s["ok"] for s in spot)
    return Outcome(not fails and thm_ok,
                   f"100 instances, failures={fails}, affine equivalence exhaustive n=16 x8 and spot n=40 x4: {thm_ok}",
                   _dump([rates, exh, spot]))


# 8. first-moment domination

def crit8() -> Outcome:
    p = BalancedTriple(2, 2, 4).profile(8)
    N = 10**4
    tables = np.array([en.brute_weight_enum(build_instance(p, SamplerConfig(seed=SEED), i), "C_Z")
                       for i in range(N)], dtype=float)
    mean = tables.mean(axis=0)
    se = tables.std(axis=0, ddof=1) / math.sqrt(N)
    ub = np.array([float(en.ha_mean_bound(8, 2, 4, l)) for l in range(9)])
    ok = bool(np.all(mean <= ub + 3 * se))
    slack = ub + 3 * se - mean
    return Outcome(ok, f"{N} instances, min slack {slack.min():.3g} at l={int(slack.argmin())}",
                   _dump([mean.tolist(), se.tolist()]))


# 9. rate-convergence trend

def _median_gaps(n: int, samples: int) -> tuple[float, float]:
    t = BalancedTriple(4, 6, 10)
    gz, gq = [], []
    for i in range(samples):
        rr = rate_report(build_instance(t.profile(n), SamplerConfig(seed=SEED), i))
        gz.append(abs(float(rr.R_Z) - 0.6))
        gq.append(abs(float(rr.R_Q) - 0.2))
    return float(np.median(gz)), float(np.median(gq))


def _kerB_fraction(n: int, samples: int) -> float:
    vals = [(n - rank(sample_square(4, n, SamplerConfig(seed=SEED), (9, i)))) / n for i in range(samples)]
    return float(np.mean(vals))


def crit9() -> Outcome:
    z100, q100 = _median_gaps(100, 200)
    z1000, q1000 = _median_gaps(1000, 200)
    k100, k2000 = _kerB_fraction(100, 50), _kerB_fraction(2000, 50)
    rz_ok, rq_ok, kb_ok = z1000 < z100, q1000 < q100, k2000 < k100
    # rz_ok is expected False: R_Z = 1 - alpha_Z exactly for even j_Z, k (see the decisions ledger)
    detail = (f"median|R_Z-0.6| {z100:.4g}->{z1000:.4g} ({'ok' if rz_ok else 'not strictly decreasing'}), "
              f"median|R_Q-0.2| {q100:.4g}->{q1000:.4g}, dimKerB/n {k100:.4g}->{k2000:.4g}")
    return Outcome(rz_ok and rq_ok and kb_ok, detail, _dump([z100, q100, z1000, q1000, k100, k2000]))


# 10. Psi_k

def crit10() -> Outcome:
    certs = [cz.psi_certify(k) for k in range(3, 31)]
    bad = [c.constants["k"] for c in certs if not c.certified]
    ends = all(ex.psi(0.0, k) == 0.0 and ex.psi(1.0, k) == 0.0 for k in range(3, 31))
    worst = max(c.certified_sup_bound for c in certs)
    return Outcome(not bad and ends, f"k=3..30, failures={bad}, endpoints zero={ends}, max bound {worst:.3g}",
                   _dump([c.to_json() for c in certs]))


# 11. proxy fidelity

def crit11() -> Outcome:
    d = ex.rightmost_zero("min", BalancedTriple(4, 6, 10))
    target = ex.h2inv(0.4)
    rel = abs(d - target) / target
    ok = rel <= 0.02 and target < 0.07938261
    return Outcome(ok, f"proxy {d:.8f} vs h2inv(0.4) {target:.8f} (rel {rel:.2e}), below delta_bar 0.07938261",
                   _dump([d, target]))


CRITERIA = {1: crit1, 2: crit2, 3: crit3, 4: crit4, 5: crit5, 6: crit6, 7: crit7, 8: crit8, 9: crit9,
            10: crit10, 11: crit11}
_RESULTS: dict[int, Outcome] = {}


def _result(n: int) -> Outcome:
    if n not in _RESULTS:
        _RESULTS[n] = CRITERIA[n]()
    return _RESULTS[n]


def _report(n: int, out: Outcome, capsys=None) -> None:
    line = f"{'PASS' if out.ok else 'FAIL'} criterion {n}: {out.detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line, flush=True)
    else:
        print(line, flush=True)


def crit12() -> Outcome:
    diffs = []
    for n, fn in CRITERIA.items():
        first = _result(n)
        again = fn(threads=2) if n == 4 else fn()
        if again.artifact != first.artifact:
            diffs.append(n)
    return Outcome(not diffs, f"reran criteria 1-11 (scan with 2 workers), differing artifacts: {diffs}")


@pytest.mark.parametrize("n", list(CRITERIA))
def test_criterion(n, capsys):
    out = _result(n)
    _report(n, out, capsys)
    assert out.ok, out.detail


def test_criterion_12(capsys):
    out = crit12()
    _report(12, out, capsys)
    assert out.ok, out.detail


if __name__ == "__main__":
    results = {n: _result(n) for n in CRITERIA}
    for n, out in results.items():
        _report(n, out)
    r12 = crit12()
    _report(12, r12)
    sys.exit(0 if all(o.ok for o in results.values()) and r12.ok else 1)
