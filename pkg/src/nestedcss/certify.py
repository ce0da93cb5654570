"""Rigorous supremum certification by adaptive subdivision.

Enclosures come from ``interval``; the search is best-first on the boxwise
upper bound, so the certified bound is the maximum upper bound over the final
partition and does not depend on scheduling.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from . import exponents as ex
from .ensemble import BalancedTriple
from .interval import (
    INV_LN2_DN,
    INV_LN2_UP,
    Interval,
    add_dn,
    add_up,
    div_dn,
    div_up,
    exp_dn,
    exp_up,
    h2_point,
    ih2,
    ikl,
    ilog,
    iexp,
    ienclose,
    ilog2,
    log2_dn,
    log2_up,
    mul_dn,
    mul_up,
    pow_dn,
    pow_up,
    register,
    sub_dn,
    sub_up,
)
from .tables import lookup

TAU_BD = 0.49
TAIL_U = 0.02
PSI_EDGE = 2.0**-20
DEFAULT_MIN_WIDTH = 1e-9
DEFAULT_MAX_BOXES = 10**7
DEFAULT_REL_TOL = 1e-2
DEFAULT_ABS_TOL = 1e-12
SIGN_THRESHOLD = -1e-12  # "sup <= 0 - eps" with a negligible eps

Box = tuple[Interval, ...]


@dataclass
class Certificate:
    triple: tuple[int, int, int] | None
    side: str
    region: str
    threshold: float
    certified_sup_bound: float
    margin: float
    boxes_processed: int
    max_depth: int
    status: str  # Certified | Failed | Refused
    reason: str = ""
    constants: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == "Certified"

    def to_json(self) -> dict:
        d = asdict(self)
        d["triple"] = list(self.triple) if self.triple else None
        for key in ("certified_sup_bound", "margin"):
            v = d[key]
            if isinstance(v, float) and not math.isfinite(v):
                d[key] = None
        return d


def _refused(triple, side, reason) -> Certificate:
    return Certificate(triple, side, "", 0.0, math.nan, math.nan, 0, 0, "Refused", reason)


# enclosures of the certified functions

def _alpha(j: int, k: int) -> Interval:
    return Interval.ratio(j, k)


def enclose_G(box: Box, triple: BalancedTriple, delta: float, clamp: bool = True) -> Interval:
    """G_{Z,delta}(tau) = h2(tau) - a + a log2(1+T) - D(delta || q), q = (1-T)/2, on a tau box in (0, 1/2].

    With ``clamp`` the divergence is taken against max(q, delta), i.e. the sup of
    -D(omega || q) over omega <= delta; this equals the plain form wherever q >= delta.
    """
    (t,) = box
    if t.lo <= 0 or t.hi > 0.5:
        raise ValueError("G enclosure needs 0 < tau <= 1/2")
    k = triple.k
    u = Interval(sub_dn(1.0, 2.0 * t.hi), sub_up(1.0, 2.0 * t.lo))
    T = u**k
    a = _alpha(triple.j_Z, k)
    L = ilog2(1.0 + T)
    q = Interval(sub_dn(1.0, T.hi) / 2.0, sub_up(1.0, T.lo) / 2.0)
    if clamp:
        q = Interval(max(q.lo, delta), max(q.hi, delta))
    D = ikl(delta, q)
    return ih2(t) - a + a * L - D


def _phi_parts(triple: BalancedTriple, boundary: bool):
    k, jz = triple.k, triple.j_Z
    jd = 0 if boundary else triple.j_Delta
    return k, jz, jd, _alpha(jz, k), (_alpha(jd, k) if jd else Interval(0.0, 0.0))


def _one_minus_2(x: float, upward: bool) -> float:
    return sub_up(1.0, 2.0 * x) if upward else sub_dn(1.0, 2.0 * x)


def phi_plus_corner_bounds(box: Box, triple: BalancedTriple, boundary: bool = False) -> Interval:
    """Monotone box bound for Phi_+ on a box inside [0, 1/2]^3 (a, b, omega) or [0, 1/2]^2 (a, omega).

    Upper: entropies at the upper corner, product at the lower corner; lower: the reverse.
    """
    k, jz, jd, aZ, aD = _phi_parts(triple, boundary)
    if jd:
        a, b, w = box
    else:
        a, w = box
        b = Interval(0.0, 0.0)
    for iv in (a, b, w):
        if iv.lo < 0 or iv.hi > 0.5:
            raise ValueError("monotone bound needs the box inside [0, 1/2]^d")
    # upper
    ent_hi = add_up(mul_up(aZ.hi, h2_point(a.hi).hi), mul_up(aD.hi, h2_point(b.hi).hi) if jd else 0.0)
    ent_hi = add_up(ent_hi, h2_point(w.hi).hi)
    prod_hi = mul_up(pow_up(_one_minus_2(w.lo, True), k), pow_up(_one_minus_2(a.lo, True), jz))
    if jd:
        prod_hi = mul_up(prod_hi, pow_up(_one_minus_2(b.lo, True), jd))
    hi = add_up(sub_up(ent_hi, 1.0), log2_up(add_up(1.0, prod_hi)))
    # lower
    ent_lo = add_dn(mul_dn(aZ.lo, h2_point(a.lo).lo), mul_dn(aD.lo, h2_point(b.lo).lo) if jd else 0.0)
    ent_lo = add_dn(ent_lo, h2_point(w.lo).lo)
    prod_lo = mul_dn(pow_dn(_one_minus_2(w.hi, False), k), pow_dn(_one_minus_2(a.hi, False), jz))
    if jd:
        prod_lo = mul_dn(prod_lo, pow_dn(_one_minus_2(b.hi, False), jd))
    lo = add_dn(sub_dn(ent_lo, 1.0), log2_dn(add_dn(1.0, max(prod_lo, 0.0))))
    return Interval(lo, max(lo, hi))


def phi_minus_bounds(box: Box, triple: BalancedTriple, boundary: bool = False) -> Interval:
    """Phi_- is increasing in each of a, b, omega on [0, 1/2]^3; evaluate at the two corners."""
    k, jz, jd, aZ, aD = _phi_parts(triple, boundary)
    if jd:
        a, b, w = box
    else:
        a, w = box
        b = Interval(0.0, 0.0)

    def corner(ap, bp, wp, upward):
        if upward:
            ent = add_up(add_up(mul_up(aZ.hi, h2_point(ap).hi), mul_up(aD.hi, h2_point(bp).hi) if jd else 0.0),
                         h2_point(wp).hi)
            prod = mul_dn(pow_dn(_one_minus_2(wp, False), k), pow_dn(_one_minus_2(ap, False), jz))
            if jd:
                prod = mul_dn(prod, pow_dn(_one_minus_2(bp, False), jd))
            return add_up(sub_up(ent, 1.0), log2_up(sub_up(1.0, max(prod, 0.0))))
        ent = add_dn(add_dn(mul_dn(aZ.lo, h2_point(ap).lo), mul_dn(aD.lo, h2_point(bp).lo) if jd else 0.0),
                     h2_point(wp).lo)
        prod = mul_up(pow_up(_one_minus_2(wp, True), k), pow_up(_one_minus_2(ap, True), jz))
        if jd:
            prod = mul_up(prod, pow_up(_one_minus_2(bp, True), jd))
        return add_dn(sub_dn(ent, 1.0), log2_dn(sub_dn(1.0, prod)))

    return Interval(corner(a.lo, b.lo, w.lo, False), corner(a.hi, b.hi, w.hi, True))


@lru_cache(maxsize=64)
def psi_numerator_factor(k: int) -> tuple[int, ...]:
    """Integer coefficients of Q with P(y) = y^k (1-y)^2 Q(y).

    P(y) = 2(1+y^k)^(k-1) - (1+y^(k-1))^k - (1-y^(k-1))^k.
    """
    deg = k * (k - 1)
    P = [0] * (deg + 1)
    for i in range(k):
        P[k * i] += 2 * math.comb(k - 1, i)
    for i in range(0, k + 1, 2):
        P[(k - 1) * i] -= 2 * math.comb(k, i)
    if any(P[:k]):
        raise ArithmeticError("unexpected low-order terms")
    R = P[k:]
    for _ in range(2):  # divide by (1 - y) = -(y - 1): synthetic division at y = 1
        n = len(R) - 1
        q = [0] * n
        acc = 0
        for i in range(n, 0, -1):
            acc = R[i] + acc
            q[i - 1] = acc
        if R[0] + acc != 0:
            raise ArithmeticError("(1-y) does not divide the numerator")
        R = [-c for c in q]
    return tuple(R)


@lru_cache(maxsize=64)
def _psi_coeff_intervals(k: int) -> tuple[tuple[float, float], ...]:
    out = []
    for c in psi_numerator_factor(k):
        iv = Interval.of(Fraction(c))
        out.append((iv.lo, iv.hi))
    return tuple(out)


def _horner(coeffs, y: Interval) -> Interval:
    acc = Interval(0.0, 0.0)
    for lo, hi in reversed(coeffs):
        acc = acc * y + Interval(lo, hi)
    return acc


def enclose_psi(box: Box, k: int) -> Interval:
    """Psi_k on a y box in (0, 1): Psi = log2(1 - P/D) <= -P/(D ln 2), D = 2(1+y^k)^(k-1)."""
    (y,) = box
    if y.lo <= 0 or y.hi >= 1:
        raise ValueError("Psi enclosure needs 0 < y < 1")
    Q = _horner(_psi_coeff_intervals(k), y)
    one_m_y = Interval(sub_dn(1.0, y.hi), sub_up(1.0, y.lo))
    P = (y**k) * (one_m_y**2) * Q
    D = 2.0 * (1.0 + y**k) ** (k - 1)
    R = P / D
    upper = -mul_dn(R.lo, INV_LN2_DN) if R.lo > 0 else log2_up(sub_up(1.0, R.lo))
    lower = log2_dn(sub_dn(1.0, R.hi)) if R.hi < 1 else -math.inf
    return Interval(lower, max(lower, upper))


@register("G_Z")
def _reg_G(box, params):
    return enclose_G(tuple(box), params["triple"], params["delta"], params.get("clamp", True))


@register("Phi_plus")
def _reg_phi_plus(box, params):
    return phi_plus_corner_bounds(tuple(box), params["triple"], params.get("boundary", False))


@register("Phi_minus")
def _reg_phi_minus(box, params):
    return phi_minus_bounds(tuple(box), params["triple"], params.get("boundary", False))


@register("Psi_k")
def _reg_psi(box, params):
    return enclose_psi(tuple(box), params["k"])


# subdivision

@dataclass
class SupResult:
    status: str
    reason: str
    bound: float
    best_lower: float
    boxes: int
    max_depth: int


def _split(box: Box, scales: Sequence[float] | None) -> tuple[Box, Box]:
    widths = [(iv.hi - iv.lo) / (scales[i] if scales else 1.0) for i, iv in enumerate(box)]
    d = max(range(len(box)), key=lambda i: (widths[i], -i))
    iv = box[d]
    m = iv.lo + 0.5 * (iv.hi - iv.lo)
    left = box[:d] + (Interval(iv.lo, m),) + box[d + 1:]
    right = box[:d] + (Interval(m, iv.hi),) + box[d + 1:]
    return left, right


def sup_certify(enclose: Callable[[Box], Interval] | str, region: Sequence[Box], threshold: float,
                min_width: float = DEFAULT_MIN_WIDTH, max_boxes: int = DEFAULT_MAX_BOXES,
                rel_tol: float = DEFAULT_REL_TOL, abs_tol: float = DEFAULT_ABS_TOL,
                scales: Sequence[float] | None = None, params: dict | None = None) -> SupResult:
    """Best-first subdivision bounding sup of a function over a union of boxes.

    Certified when every box's upper bound is <= threshold; refinement continues
    until the largest upper bound is within max(abs_tol, rel_tol*|best point
    value|) of the best rigorous point lower bound.
    """
    if isinstance(enclose, str):
        fn_id = enclose

        def enclose(box: Box) -> Interval:
            return ienclose(fn_id, box, params)

    heap: list = []
    counter = itertools.count()
    best_lo = -math.inf
    boxes = 0
    max_depth = 0
    settled = -math.inf  # upper bounds of boxes too small to split

    def push(box: Box, depth: int) -> None:
        nonlocal best_lo, boxes, max_depth
        v = enclose(box)
        boxes += 1
        max_depth = max(max_depth, depth)
        mid = tuple(Interval.point(iv.lo + 0.5 * (iv.hi - iv.lo)) for iv in box)
        best_lo = max(best_lo, enclose(mid).lo)
        heapq.heappush(heap, (-v.hi, next(counter), box, depth))

    for box in region:
        push(tuple(box), 0)
    while heap:
        top = max(-heap[0][0], settled)
        if best_lo > threshold:
            return SupResult("Failed", "a point value exceeds the threshold", top, best_lo, boxes, max_depth)
        if top <= threshold and top - best_lo <= max(abs_tol, rel_tol * abs(best_lo)):
            break
        if boxes >= max_boxes:
            if top <= threshold:
                break
            return SupResult("Failed", f"box budget {max_boxes} exhausted", top, best_lo, boxes, max_depth)
        negU, _, box, depth = heapq.heappop(heap)
        if max(iv.hi - iv.lo for iv in box) < min_width:
            if -negU > threshold:
                return SupResult("Failed", f"box width below {min_width} with bound above threshold",
                                 -negU, best_lo, boxes, max_depth)
            settled = max(settled, -negU)
            continue
        for child in _split(box, scales):
            push(child, depth + 1)
    bound = max(-heap[0][0] if heap else -math.inf, settled)
    if bound <= threshold:
        return SupResult("Certified", "", bound, best_lo, boxes, max_depth)
    return SupResult("Failed", "bound above threshold", bound, best_lo, boxes, max_depth)


def _budget(min_width, max_boxes, rel_tol) -> dict:
    return {"min_width": min_width, "max_boxes": max_boxes, "rel_tol": rel_tol}


# HA side

def _lt(a: Interval, b: Interval) -> bool:
    return a.hi < b.lo


def ha_certify(triple: BalancedTriple, beta_Z: float, delta_bar: float, *, side: str | None = None,
               min_width: float = DEFAULT_MIN_WIDTH, max_boxes: int = DEFAULT_MAX_BOXES,
               rel_tol: float = DEFAULT_REL_TOL) -> Certificate:
    side = side or ("Boundary-HA" if triple.boundary else "HA")
    trip = (triple.j_Z, triple.j_X, triple.k)
    if triple.k % 2:
        return _refused(trip, side, "odd k: complement symmetry unavailable")
    if triple.j_Z < 4:
        return _refused(trip, side, "j_Z<4")
    k = triple.k
    aZ = _alpha(triple.j_Z, k)
    checks = {}
    checks["h2_delta_gt_alpha"] = _lt(aZ, h2_point(delta_bar))
    tau_lo = beta_Z / k
    u = Interval(sub_dn(1.0, 2.0 * tau_lo), sub_up(1.0, 2.0 * tau_lo))
    qv = (1.0 - u**k) / 2.0
    checks["q_start_gt_delta"] = qv.lo > delta_bar
    e_iv = iexp(Interval(1.0, 1.0))
    lam = Interval.of(beta_Z) * float(k) / e_iv
    checks["lambda_lt_1"] = lam.hi < 1.0
    tail = (1.0 + aZ) * Interval(TAIL_U, TAIL_U) ** (k - 2)
    checks["tail"] = tail.hi <= 0.5
    consts = {"beta_Z": beta_Z, "delta_bar": delta_bar, "lambda_Z": ex.lambda_Z(beta_Z, k),
              "tau_bd": TAU_BD, "tail_u": TAIL_U}
    region = f"tau in [{tau_lo!r}, {TAU_BD}]"
    budget = _budget(min_width, max_boxes, rel_tol)
    # q_start_gt_delta is informational: the clamped G covers tau with q(tau) < delta_bar
    failed = [name for name in ("h2_delta_gt_alpha", "lambda_lt_1") if not checks[name]]
    if failed:
        return Certificate(trip, side, region, SIGN_THRESHOLD, math.nan, math.nan, 0, 0, "Failed",
                           "precondition failed: " + ",".join(failed), consts, checks, budget)
    res = sup_certify(lambda b: enclose_G(b, triple, delta_bar), [(Interval(tau_lo, TAU_BD),)],
                      SIGN_THRESHOLD, min_width, max_boxes, rel_tol)
    checks["sup_G"] = res.status == "Certified"
    status, reason = res.status, res.reason
    if status == "Certified" and not checks["tail"]:
        status, reason = "Failed", "tail check (1+alpha_Z)(0.02)^(k-2) <= 1/2 failed"
    return Certificate(trip, side, region, SIGN_THRESHOLD, res.bound, -res.bound, res.boxes, res.max_depth,
                       status, reason, consts, checks, budget)


# MN side

@dataclass(frozen=True)
class MNConstantsIv:
    omega_star: float  # rounded up, region edge
    B_X: Interval
    eta_X: Interval
    odd_corner_hi: float
    mu_at_star: Interval


def _mu(w: float, k: int) -> Interval:
    return Interval(sub_dn(1.0, 2.0 * w), sub_up(1.0, 2.0 * w)) ** k


def omega_star_region(triple: BalancedTriple) -> float:
    """Smallest float step above omega_* with rigorous (1 - 2w)^k <= alpha_X/2."""
    target = (_alpha(triple.j_X, triple.k) / 2.0).lo
    if triple.boundary:
        target = 0.25
    w = ex.omega_star(triple)
    step = math.ulp(w)
    while _mu(w, triple.k).hi > target:
        w += step
        step *= 2.0
    return w


def mn_constants_interval(triple: BalancedTriple, beta_X: float) -> MNConstantsIv:
    """Outward-rounded B_X, eta_X and odd-corner bound, with omega_* widened upward."""
    k, jz, jd = triple.k, triple.j_Z, triple.j_Delta
    boundary = triple.boundary
    aX = _alpha(triple.j_X, k)
    ws_f = ex.omega_star(triple)
    ws_up = omega_star_region(triple)
    ws = Interval(math.nextafter(ws_f, 0.0), ws_up)
    B = Interval.of(beta_X)
    rho = B / float(jz)
    rho = Interval(max(rho.lo, ws.lo), max(rho.hi, ws.hi))
    if jd:
        r2 = B / float(jd)
        rho = Interval(max(rho.lo, r2.lo), max(rho.hi, r2.hi))
    C0 = (1.0 + rho) / ((1.0 - rho) ** 2)
    blocks = 1 if boundary or jd == 0 else 2
    c0 = B * float(blocks) / float(k) + ws
    e_iv = iexp(Interval(1.0, 1.0))
    sqrt2 = Interval(math.nextafter(math.sqrt(2.0), 0.0), math.nextafter(math.sqrt(2.0), 2.0))
    base = C0 * float(k) * c0 / e_iv
    if k % 2:
        powk2 = iexp(ilog(base) * (k / 2.0))
    else:
        powk2 = base ** (k // 2)
    BX = sqrt2 * e_iv * (1.0 + aX) / c0 * powk2
    eta = (1.0 - 2.0 * B / float(jz)) ** jz
    if jd:
        eta = eta * (1.0 - 2.0 * B / float(jd)) ** jd
    mu_star = _mu(ws_up, k)
    # odd corner: a h2(b/jz) + aD h2(b/jd) + h2(ws) - 1 + log2(1 - (1-2ws)^k eta)
    t1 = _alpha(jz, k) * ih2(B / float(jz))
    t2 = _alpha(jd, k) * ih2(B / float(jd)) if jd else Interval(0.0, 0.0)
    corner = t1 + t2 + ih2(ws) - 1.0 + ilog2(1.0 - mu_star * eta)
    return MNConstantsIv(ws_up, BX, eta, corner.hi, mu_star)


def mn_certify(triple: BalancedTriple, beta_X: float, *, side: str | None = None,
               min_width: float = DEFAULT_MIN_WIDTH, max_boxes: int = DEFAULT_MAX_BOXES,
               rel_tol: float = DEFAULT_REL_TOL, refuse_small: bool = True) -> Certificate:
    """MN-side certificate: B_X < 1, linear-regime preconditions, Phi_+ sup on the L-region, odd corner."""
    side = side or ("Boundary-MN" if triple.boundary else "MN")
    trip = (triple.j_Z, triple.j_X, triple.k)
    if triple.k % 2:
        return _refused(trip, side, "odd k: complement symmetry unavailable")
    if refuse_small and triple.j_Z < 4:
        return _refused(trip, side, "j_Z<4")
    k = triple.k
    boundary = triple.boundary
    civ = mn_constants_interval(triple, beta_X)
    fc = ex.certified_constants(triple, math.nan, math.nan, beta_X, boundary)
    consts = fc.to_json()
    consts.update({"omega_star_region": civ.omega_star, "B_X_upper": civ.B_X.hi,
                   "odd_corner_upper": civ.odd_corner_hi})
    checks = {"B_X_lt_1": civ.B_X.hi < 1.0}
    aX = _alpha(triple.j_X, k)
    checks["j_X_ge_2"] = triple.j_X >= 2
    half = 0.25 if boundary else (aX / 2.0).lo
    checks["mu_le_alpha_X_half"] = civ.mu_at_star.hi <= half
    bk = beta_X / k
    ws = civ.omega_star
    if boundary:
        region = [(Interval(bk, 0.5), Interval(0.0, ws))]
        rdesc = f"a in [{bk!r}, 1/2], omega in [0, {ws!r}]"
    else:
        region = [
            (Interval(bk, 0.5), Interval(0.0, 0.5), Interval(0.0, ws)),
            (Interval(0.0, bk), Interval(bk, 0.5), Interval(0.0, ws)),
        ]
        rdesc = f"([{bk!r},1/2]x[0,1/2] U [0,{bk!r}]x[{bk!r},1/2]) x [0,{ws!r}]"
    budget = _budget(min_width, max_boxes, rel_tol)
    if not checks["B_X_lt_1"]:
        return Certificate(trip, side, rdesc, SIGN_THRESHOLD, math.nan, math.nan, 0, 0, "Failed",
                           "B_X >= 1", consts, checks, budget)
    if not (checks["j_X_ge_2"] and checks["mu_le_alpha_X_half"]):
        return Certificate(trip, side, rdesc, SIGN_THRESHOLD, math.nan, math.nan, 0, 0, "Failed",
                           "linear-regime precondition failed", consts, checks, budget)
    res = sup_certify(lambda b: phi_plus_corner_bounds(b, triple, boundary), region, SIGN_THRESHOLD,
                      min_width, max_boxes, rel_tol)
    checks["sup_Phi_plus"] = res.status == "Certified"
    status, reason = res.status, res.reason
    if triple.j_Z % 2:
        checks["odd_corner_negative"] = civ.odd_corner_hi < 0
        if status == "Certified" and not checks["odd_corner_negative"]:
            status, reason = "Failed", "odd-corner bound is not negative"
    return Certificate(trip, side, rdesc, SIGN_THRESHOLD, res.bound, -res.bound, res.boxes, res.max_depth,
                       status, reason, consts, checks, budget)


BETA_X_CHOICES = (0.10, 0.12, 0.15, 0.20)
BETA_Z_CHOICES = (0.08, 0.10, 0.12, 0.15, 0.20, 0.25)


def boundary_certify(j: int, **kw) -> tuple[Certificate, Certificate]:
    """Both sides for the boundary triple (j, j, 2j) with the published constants.

    Without a published row (j = 3) the MN side tries every beta_X choice and
    reports the smallest B_X.
    """
    if not 3 <= j <= 15:
        raise ValueError("boundary index j must lie in [3, 15]")
    t = BalancedTriple(j, j, 2 * j)
    ha_row, mn_row = lookup(t)
    if ha_row is not None:
        ha = ha_certify(t, ha_row.beta_Z, ha_row.delta_bar, **kw)
    else:
        ha = ha_certify(t, 0.25, 0.11002787, **kw)
    if mn_row is not None:
        mn = mn_certify(t, mn_row.beta_X, refuse_small=False, **kw)
    else:
        tries = [mn_certify(t, b, refuse_small=False, **kw) for b in BETA_X_CHOICES]
        certified = [c for c in tries if c.certified]
        mn = certified[0] if certified else min(tries, key=lambda c: c.constants["B_X_upper"])
    return ha, mn


def psi_certify(k: int, min_width: float = 1e-12, max_boxes: int = DEFAULT_MAX_BOXES) -> Certificate:
    if k < 3:
        return _refused(None, "Psi", "k >= 3 required")
    ends = {"psi_0": ex.psi(0.0, k), "psi_1": ex.psi(1.0, k)}
    region = [(Interval(PSI_EDGE, 1.0 - PSI_EDGE),)]
    res = sup_certify(lambda b: enclose_psi(b, k), region, 0.0, min_width, max_boxes,
                      rel_tol=1.0, abs_tol=0.0)
    checks = {"endpoints_zero": ends["psi_0"] == 0.0 and ends["psi_1"] == 0.0,
              "interior_negative": res.status == "Certified" and res.bound < 0}
    status = "Certified" if all(checks.values()) else "Failed"
    reason = "" if status == "Certified" else (res.reason or "endpoint or sign check failed")
    return Certificate(None, "Psi", f"y in [2^-20, 1-2^-20], k={k}", 0.0, res.bound, -res.bound,
                       res.boxes, res.max_depth, status, reason, {"k": k, **ends}, checks,
                       _budget(min_width, max_boxes, 1.0))
