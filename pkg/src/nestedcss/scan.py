"""Window scan, classification and CSV emission for the certification tables and figure data."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from . import exponents as ex
from .certify import (
    BETA_X_CHOICES,
    BETA_Z_CHOICES,
    Certificate,
    boundary_certify,
    ha_certify,
    mn_certify,
)
from .ensemble import BalancedTriple
from .interval import h2_point
from .tables import boundary_rows, ha_rows, lookup, mn_rows

K_MAX = 30
JZ_MAX = 10
NEAR_GV_TOL = 0.10
GV_CURVE_STEP = 0.005
CATEGORIES = ("CertifiedGV", "NearGV", "PositiveNonGV", "ZeroProxy")


def in_window(t: BalancedTriple) -> bool:
    return t.k <= K_MAX and t.j_Z <= JZ_MAX and 2 * t.j_Z < t.k and t.j_X == t.k - t.j_Z


@dataclass
class ScanRecord:
    triple: BalancedTriple
    in_window: bool
    k_even: bool
    j_Z_even: bool
    R_Q_des: float
    gv_classical: float
    gv_css: float
    proxy_Z: float = math.nan
    proxy_X: float = math.nan
    proxy_min: float = math.nan
    category: str = ""
    certificates: list[Certificate] = field(default_factory=list)

    @property
    def key(self) -> tuple[int, int]:
        return (self.triple.k, self.triple.j_Z)

    def to_json(self) -> dict:
        t = self.triple
        return {
            "triple": [t.j_Z, t.j_X, t.k], "in_window": self.in_window, "k_even": self.k_even,
            "j_Z_even": self.j_Z_even, "R_Q_des": self.R_Q_des, "gv_classical": self.gv_classical,
            "gv_css": self.gv_css, "proxy_Z": self.proxy_Z, "proxy_X": self.proxy_X,
            "proxy_min": self.proxy_min, "category": self.category,
            "certificates": [c.to_json() for c in self.certificates],
        }


def base_record(t: BalancedTriple) -> ScanRecord:
    # balanced: R_Z^des = R_X^des = 1 - j_Z/k, so both GV targets are h2^-1(j_Z/k)
    r_des = 1 - t.j_Z / t.k
    return ScanRecord(
        triple=t, in_window=in_window(t), k_even=t.k % 2 == 0, j_Z_even=t.j_Z % 2 == 0,
        R_Q_des=1 - 2 * t.j_Z / t.k, gv_classical=ex.h2inv(1 - r_des), gv_css=ex.h2inv(t.j_Z / t.k),
    )


def enumerate_window() -> list[ScanRecord]:
    out = []
    for k in range(3, K_MAX + 1):
        for jz in range(1, JZ_MAX + 1):
            if 2 * jz < k:
                out.append(base_record(BalancedTriple(jz, k - jz, k)))
    return out


def _delta_bar_for(t: BalancedTriple) -> float:
    """Published-style delta_bar: GV point rounded up at the 8th decimal, nudged until h2 exceeds alpha_Z."""
    d = math.ceil(ex.h2inv(t.alpha_Z) * 1e8) / 1e8
    while h2_point(d).lo <= t.alpha_Z:
        d += 1e-8
    return d


def auto_certify(t: BalancedTriple) -> tuple[Certificate, Certificate]:
    """Retry the beta grids; first Certified choice per side, else the last attempt."""
    db = _delta_bar_for(t)
    ha = None
    for bz in sorted(BETA_Z_CHOICES, reverse=True):
        if bz * t.k / math.e >= 1:
            continue
        ha = ha_certify(t, bz, db)
        if ha.certified or ha.status == "Refused":
            break
    if ha is None:
        ha = ha_certify(t, min(BETA_Z_CHOICES), db)
    mn = None
    for bx in BETA_X_CHOICES:
        mn = mn_certify(t, bx, refuse_small=not t.boundary)
        if mn.certified or mn.status == "Refused":
            break
    return ha, mn


def certify_triple(t: BalancedTriple, auto: bool = True) -> tuple[Certificate, Certificate]:
    if t.boundary:
        return boundary_certify(t.j_Z)
    ha_row, mn_row = lookup(t)
    ha = ha_certify(t, ha_row.beta_Z, ha_row.delta_bar) if ha_row else None
    mn = mn_certify(t, mn_row.beta_X) if mn_row else None
    if auto and (ha is None or mn is None or not (ha.certified and mn.certified)):
        a_ha, a_mn = auto_certify(t)
        ha = ha if ha is not None and ha.certified else a_ha
        mn = mn if mn is not None and mn.certified else a_mn
    return ha, mn


def classify(t: BalancedTriple, auto: bool = True, tol: float = NEAR_GV_TOL) -> ScanRecord:
    rec = base_record(t)
    ha, mn = certify_triple(t, auto)
    rec.certificates = [ha, mn]
    rec.proxy_Z = ex.rightmost_zero("Z", t)
    rec.proxy_X = ex.rightmost_zero("X", t)
    rec.proxy_min = min(rec.proxy_Z, rec.proxy_X)
    if ha.certified and mn.certified:
        rec.category = "CertifiedGV"
    elif rec.proxy_min == 0:
        rec.category = "ZeroProxy"
    elif abs(rec.proxy_min - rec.gv_classical) <= tol * rec.gv_classical:
        rec.category = "NearGV"
    else:
        rec.category = "PositiveNonGV"
    return rec


def _classify_key(key: tuple[int, int, int]) -> ScanRecord:
    return classify(BalancedTriple(*key))


def scan_window(threads: int = 1) -> list[ScanRecord]:
    keys = [(r.triple.j_Z, r.triple.j_X, r.triple.k) for r in enumerate_window()]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            recs = list(pool.map(_classify_key, keys, chunksize=1))
    else:
        recs = [_classify_key(k) for k in keys]
    return sorted(recs, key=lambda r: r.key)


# CSV emission

def metadata_line(extra: dict | None = None, timestamp: bool = True) -> str:
    meta = {
        "toolkit": f"nestedcss {__version__}",
        "seeds": "none",
        "tau_grid": ex.ENVELOPE_TAU_GRID,
        "ab_grid": ex.ENVELOPE_AB_GRID,
        "scan_step": ex.SCAN_STEP,
        "bisect_tol": ex.BISECT_TOL,
        "near_gv_tol": NEAR_GV_TOL,
        "z_mode": "infimum",
    }
    meta.update(extra or {})
    if timestamp:
        meta["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return "# " + "; ".join(f"{k}={v}" for k, v in meta.items())


def _csv(header: list[str], rows: list[list], meta: str) -> str:
    buf = io.StringIO()
    buf.write(meta + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def read_csv(text: str) -> tuple[str, list[dict]]:
    """Inverse of the emitters: (metadata line, rows as dicts of strings)."""
    lines = text.splitlines()
    meta = lines[0] if lines and lines[0].startswith("#") else ""
    body = lines[1:] if meta else lines
    return meta, list(csv.DictReader(body))


def _g(x: float, digits: int = 10) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.{digits}g}"


def _ha_cols(t, bz, db, eps_pub, cert: Certificate) -> list:
    lam = ex.lambda_Z(bz, t.k)
    ok = cert.certified and cert.margin >= 0.9 * eps_pub
    return [bz, f"{db:.8f}", f"{lam:.9f}", _g(eps_pub, 5), _g(cert.margin), cert.status, int(ok)]


def _mn_cols(t, bx, BX_pub, eps_pub, cert: Certificate) -> list:
    BX = cert.constants.get("B_X", math.nan)
    ok = cert.certified and cert.margin >= 0.9 * eps_pub
    return [bx, f"{BX:.5g}", _g(BX_pub, 5), _g(eps_pub, 5), _g(cert.margin), cert.status, int(ok)]


HA_HEADER = ["beta_Z", "delta_bar", "lambda_Z", "eps_Z_published", "eps_Z_certified", "status_Z", "pass_Z"]
MN_HEADER = ["beta_X", "B_X", "B_X_published", "eps_X_published", "eps_X_certified", "status_X", "pass_X"]


def emit_tables(which: str, timestamp: bool = True) -> str:
    which = which.upper()
    rows = []
    if which == "D":
        for r in ha_rows():
            t = r.triple
            c = ha_certify(t, r.beta_Z, r.delta_bar)
            rows.append([t.j_Z, t.j_X, t.k, *_ha_cols(t, r.beta_Z, r.delta_bar, r.eps_Z, c)])
        header = ["j_Z", "j_X", "k", *HA_HEADER]
    elif which == "E":
        for r in mn_rows():
            t = r.triple
            c = mn_certify(t, r.beta_X)
            rows.append([t.j_Z, t.j_X, t.k, *_mn_cols(t, r.beta_X, r.B_X, r.eps_X, c)])
        header = ["j_Z", "j_X", "k", *MN_HEADER]
    elif which == "F":
        for ha_r, mn_r in boundary_rows():
            t = ha_r.triple
            hc, mc = boundary_certify(t.j_Z)
            rows.append([t.j_Z, t.j_X, t.k, *_ha_cols(t, ha_r.beta_Z, ha_r.delta_bar, ha_r.eps_Z, hc),
                         *_mn_cols(t, mn_r.beta_X, mn_r.B_X, mn_r.eps_X, mc)])
        header = ["j_Z", "j_X", "k", *HA_HEADER, *MN_HEADER]
    else:
        raise ValueError(f"unknown table {which!r}")
    rows.sort(key=lambda r: (r[2], r[0]))
    return _csv(header, rows, metadata_line({"table": which, "pass_rule": "margin>=0.9*published"}, timestamp))


FIGURE_HEADER = ["j_Z", "j_X", "k", "R_Q_des", "proxy_min", "gv_curve_value", "category"]


def gv_curve(step: float = GV_CURVE_STEP) -> list[tuple[float, float]]:
    n = int(round(1 / step))
    out = []
    for i in range(n + 1):
        rq = i / n
        out.append((rq, ex.h2inv((1 - rq) / 2)))
    return out


def emit_figure_data(records: list[ScanRecord], timestamp: bool = True) -> str:
    rows = []
    for r in sorted(records, key=lambda r: r.key):
        if r.category == "ZeroProxy":
            continue
        t = r.triple
        rows.append([t.j_Z, t.j_X, t.k, _g(r.R_Q_des), _g(r.proxy_min), _g(ex.h2inv((1 - r.R_Q_des) / 2)),
                     r.category])
    for rq, d in gv_curve():
        rows.append(["", "", "", _g(rq), "", _g(d), "GVCurve"])
    return _csv(FIGURE_HEADER, rows, metadata_line({"gv_curve_step": GV_CURVE_STEP}, timestamp))


def emit_scan(records: list[ScanRecord], timestamp: bool = True) -> str:
    header = ["j_Z", "j_X", "k", "in_window", "R_Q_des", "gv_classical", "gv_css", "proxy_Z", "proxy_X",
              "proxy_min", "category", "status_HA", "status_MN"]
    rows = []
    for r in sorted(records, key=lambda r: r.key):
        t = r.triple
        ha, mn = (r.certificates + [None, None])[:2]
        rows.append([t.j_Z, t.j_X, t.k, int(r.in_window), _g(r.R_Q_des), _g(r.gv_classical), _g(r.gv_css),
                     _g(r.proxy_Z), _g(r.proxy_X), _g(r.proxy_min), r.category,
                     ha.status if ha else "", mn.status if mn else ""])
    return _csv(header, rows, metadata_line(None, timestamp))


def summary(records: list[ScanRecord]) -> dict:
    counts = {c: 0 for c in CATEGORIES}
    for r in records:
        counts[r.category] += 1
    return {"count": len(records), "categories": counts,
            "certified": [str(r.triple) for r in records if r.category == "CertifiedGV"],
            "near_gv": [str(r.triple) for r in records if r.category == "NearGV"]}


__all__ = [
    "ScanRecord", "enumerate_window", "classify", "scan_window", "emit_tables", "emit_figure_data",
    "emit_scan", "read_csv", "gv_curve", "in_window", "auto_certify", "summary",
]
