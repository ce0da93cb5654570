"""Floating-point exponent functions, certified constants and proxy envelopes.

Fast, deterministic double-precision evaluation.  Rigorous enclosures of the
same functions live in ``interval`` / ``certify``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .ensemble import BalancedTriple
from .interval import DomainViolation

LOG2E = 1.0 / math.log(2.0)
E = math.e

ENVELOPE_TAU_GRID = 4096
ENVELOPE_AB_GRID = 512
SCAN_STEP = 1e-4
BISECT_TOL = 1e-7


class LogDomain(DomainViolation):
    pass


def _check_unit(name: str, x: float) -> None:
    if not (0.0 <= x <= 1.0):
        raise DomainViolation(f"{name}={x} outside [0, 1]")


def _xlog2x(x: float) -> float:
    return 0.0 if x <= 0.0 else x * math.log2(x)


def h2(x: float) -> float:
    """Binary entropy in bits."""
    _check_unit("x", x)
    return -_xlog2x(x) - _xlog2x(1.0 - x)


binary_entropy = h2


def h2_vec(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -x * np.log2(x) - (1 - x) * np.log2(1 - x)
    return np.where((x <= 0) | (x >= 1), 0.0, out)


def h2inv(y: float, tol: float = 1e-12) -> float:
    """Inverse of h2 on [0, 1/2] by bisection."""
    _check_unit("y", y)
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h2(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


binary_entropy_inv = h2inv


def kl(p: float, q: float) -> float:
    """D(p || q) between Bernoulli laws, base 2, 0 log 0 = 0."""
    _check_unit("p", p)
    if not (0.0 < q < 1.0):
        raise DomainViolation(f"q={q} outside (0, 1)")
    out = 0.0
    if p > 0:
        out += p * math.log2(p / q)
    if p < 1:
        out += (1 - p) * math.log2((1 - p) / (1 - q))
    return out


kl_bernoulli = kl


# outer (Z) exponents

def _T(tau, k: int):
    return (1.0 - 2.0 * tau) ** k


def outer_trial(tau: float, j_Z: int, k: int) -> float:
    _check_unit("tau", tau)
    a = j_Z / k
    return a * math.log2(1.0 + _T(tau, k)) + h2(tau) - a


@lru_cache(maxsize=64)
def _even_log_binoms(k: int) -> tuple[np.ndarray, np.ndarray]:
    i = np.arange(0, k + 1, 2)
    lb = np.array([math.lgamma(k + 1) - math.lgamma(t + 1) - math.lgamma(k - t + 1) for t in i])
    return i.astype(float), lb


def _log_fplus(logx: np.ndarray, k: int) -> np.ndarray:
    """ln(((1+x)^k + (1-x)^k)/2) = ln sum_{i even} C(k,i) x^i, stable for any x > 0."""
    i, lb = _even_log_binoms(k)
    z = lb[None, :] + np.multiply.outer(logx, i).reshape(-1, i.size)
    m = z.max(axis=1)
    return (m + np.log(np.exp(z - m[:, None]).sum(axis=1))).reshape(np.shape(logx))


def outer_infimum_vec(tau: np.ndarray, j_Z: int, k: int, iters: int = 200) -> np.ndarray:
    """alpha * inf_x log2(f_+(x)/x^(tau k)) - (j_Z - 1) h2(tau), ternary search on ln x in [-40, 40]."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    lo = np.full(tau.shape, -40.0)
    hi = np.full(tau.shape, 40.0)
    tk = tau * k

    def obj(t):
        return _log_fplus(t, k) - tk * t

    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        left = obj(m1) <= obj(m2)
        hi = np.where(left, m2, hi)
        lo = np.where(left, lo, m1)
    best = obj(0.5 * (lo + hi)) * LOG2E
    return (j_Z / k) * best - (j_Z - 1) * h2_vec(tau)


def outer_infimum_moment_vec(tau: np.ndarray, j_Z: int, k: int, iters: int = 64) -> np.ndarray:
    """Same infimum as ``outer_infimum_vec``, located by bisection on the first-order condition.

    d/dt ln f_+(e^t) is the mean of i under weights C(k,i) e^(i t), increasing
    in t; the minimizer on [-40, 40] solves mean = tau k (or sits at an end).
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    i, lb = _even_log_binoms(k)
    tk = tau * k
    lo = np.full(tau.shape, -40.0)
    hi = np.full(tau.shape, 40.0)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        z = lb[None, :] + mid[:, None] * i[None, :]
        w = np.exp(z - z.max(axis=1, keepdims=True))
        mean = (w * i).sum(axis=1) / w.sum(axis=1)
        below = mean < tk
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    t = 0.5 * (lo + hi)
    best = (_log_fplus(t, k) - tk * t) * LOG2E
    return (j_Z / k) * best - (j_Z - 1) * h2_vec(tau)


def outer_infimum(tau: float, j_Z: int, k: int) -> float:
    _check_unit("tau", tau)
    return float(outer_infimum_vec(np.array([tau]), j_Z, k)[0])


def outer_exponent(tau: float, j_Z: int, k: int, mode: str = "trial") -> float:
    if mode == "trial":
        return outer_trial(tau, j_Z, k)
    if mode == "infimum":
        return outer_infimum(tau, j_Z, k)
    raise ValueError(f"unknown mode {mode!r}")


def _pair_terms(omega, T):
    """omega log2((1-T)/2) + (1-omega) log2((1+T)/2) with 0 log 0 = 0."""
    omega = np.asarray(omega, dtype=float)
    T = np.asarray(T, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(omega > 0, omega * np.log2((1 - T) / 2), 0.0)
        b = np.where(omega < 1, (1 - omega) * np.log2((1 + T) / 2), 0.0)
    return a + b


def ha_F(tau: float, omega: float, triple: BalancedTriple, mode: str = "trial") -> float:
    _check_unit("tau", tau)
    _check_unit("omega", omega)
    k = triple.k
    return float(outer_exponent(tau, triple.j_Z, k, mode) + _pair_terms(omega, _T(tau, k)))


class ZEnvelope:
    """W_Z^ub(omega) = h2(omega) + max over the admissible tau band of F_Z(tau, omega).

    The W_o values on the tau grid are computed once per triple.
    """

    def __init__(self, triple: BalancedTriple, mode: str = "trial", grid: int = ENVELOPE_TAU_GRID):
        self.triple = triple
        self.mode = mode
        k, j = triple.k, triple.j_Z
        self.tau = np.linspace(0.0, 1.0, grid)
        self.T = _T(self.tau, k)
        if mode == "trial":
            self.W = triple.alpha_Z * np.log2(1 + self.T) + h2_vec(self.tau) - triple.alpha_Z
        elif mode == "infimum":
            self.W = outer_infimum_vec(self.tau, j, k)
        else:
            raise ValueError(f"unknown mode {mode!r}")

    def W_vec(self, tau: np.ndarray) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if self.mode == "trial":
            a = self.triple.alpha_Z
            return a * np.log2(1 + _T(tau, self.triple.k)) + h2_vec(tau) - a
        return outer_infimum_moment_vec(tau, self.triple.j_Z, self.triple.k)

    def F_vec(self, tau: np.ndarray, omega: float) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return self.W_vec(tau) + _pair_terms(omega, _T(tau, self.triple.k))

    def grid_values(self, omega: float) -> np.ndarray:
        k = self.triple.k
        lo, hi = omega / k, 1 - omega / k
        vals = self.W + _pair_terms(omega, self.T)
        vals = np.where((self.tau >= lo) & (self.tau <= hi), vals, -np.inf)
        return vals

    def __call__(self, omega: float, refine: int = 3) -> float:
        _check_unit("omega", omega)
        k = self.triple.k
        lo, hi = omega / k, 1 - omega / k
        vals = self.grid_values(omega)
        # band endpoints are admissible too
        best = max(float(vals.max()), float(self.F_vec(np.array([lo, hi]), omega).max()))
        if refine:
            order = [i for i in np.argsort(-vals, kind="stable")[:refine] if np.isfinite(vals[i])]
            h = self.tau[1] - self.tau[0]
            a = np.array([max(lo, self.tau[i] - h) for i in order])
            b = np.array([min(hi, self.tau[i] + h) for i in order])
            if a.size:
                best = max(best, float(_golden_max_vec(lambda t: self.F_vec(t, omega), a, b, 40).max()))
        return h2(omega) + best


def _golden_max_vec(f, a: np.ndarray, b: np.ndarray, iters: int = 40) -> np.ndarray:
    """Golden-section maximization on several brackets at once; returns the maxima."""
    g = (math.sqrt(5) - 1) / 2
    a, b = a.astype(float).copy(), b.astype(float).copy()
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        nb = np.where(left, d, b)
        na = np.where(left, a, c)
        nc = np.where(left, nb - g * (nb - na), d)
        nd = np.where(left, c, na + g * (nb - na))
        newx = np.where(left, nc, nd)
        fnew = f(newx)
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
        a, b, c, d = na, nb, nc, nd
    x = np.concatenate([0.5 * (a + b), a, b])
    return f(x)


def ha_envelope(omega: float, triple: BalancedTriple, mode: str = "trial") -> float:
    return _z_env(triple, mode)(omega)


@lru_cache(maxsize=64)
def _z_env(triple: BalancedTriple, mode: str) -> ZEnvelope:
    return ZEnvelope(triple, mode)


def ha_G(tau: float, delta: float, triple: BalancedTriple) -> float:
    """G_{Z,delta}(tau) = h2(tau) - a + a log2(1+T) - D(delta || (1-T)/2)."""
    if not (0.0 <= tau <= 0.5):
        raise DomainViolation(f"tau={tau} outside [0, 1/2]")
    if not (0.0 < delta < 0.5):
        raise DomainViolation(f"delta={delta} outside (0, 1/2)")
    a, T = triple.alpha_Z, _T(tau, triple.k)
    return h2(tau) - a + a * math.log2(1 + T) - kl(delta, (1 - T) / 2)


# MN (X) exponents

def mn_trial(a: float, b: float, omega: float, triple: BalancedTriple, sign: str = "plus",
             boundary: bool = False) -> float:
    """Phi_+/- (a, b, omega); boundary drops the b / alpha_Delta terms."""
    for name, v in (("a", a), ("b", b), ("omega", omega)):
        _check_unit(name, v)
    jz, k = triple.j_Z, triple.k
    jd = 0 if boundary else triple.j_Delta
    aZ, aD = jz / k, jd / k
    mu = abs(1 - 2 * omega) ** k
    prod = mu * abs(1 - 2 * a) ** jz * (abs(1 - 2 * b) ** jd if jd else 1.0)
    base = aZ * h2(a) + (aD * h2(b) if jd else 0.0) + h2(omega) - 1
    if sign == "plus":
        return base + math.log2(1 + prod)
    if sign == "minus":
        if prod >= 1:
            raise LogDomain("mu * y1^jZ * yD^jD >= 1")
        return base + math.log2(1 - prod)
    raise ValueError(f"unknown sign {sign!r}")


def master_q(tau: float, triple: BalancedTriple) -> float:
    aX = triple.alpha_X
    if not (0 < tau <= aX):
        raise DomainViolation(f"tau={tau} outside (0, alpha_X]")
    return tau * math.log2(E * aX / tau) - triple.k * tau * LOG2E


def master_q_prime(tau: float, triple: BalancedTriple) -> float:
    return math.log2(triple.alpha_X / tau) - triple.k * LOG2E


def psi(y: float, k: int) -> float:
    """Psi_k(y) via t = y^(k-1): log2(((1+t)^k + (1-t)^k) / (2 (1+y^k)^(k-1)))."""
    _check_unit("y", y)
    if k < 3:
        raise DomainViolation("k >= 3 required")
    t = y ** (k - 1)
    return math.log2(((1 + t) ** k + (1 - t) ** k) / (2 * (1 + y**k) ** (k - 1)))


# certified constants

@dataclass(frozen=True)
class CertConstants:
    triple: tuple[int, int, int]
    boundary: bool
    beta_Z: float
    delta_bar: float
    lambda_Z: float
    beta_X: float
    B_X: float
    omega_star: float
    tau_0: float
    rho_0: float
    C_0: float
    c_0: float
    eta_X: float
    odd_corner: float

    def to_json(self) -> dict:
        d = asdict(self)
        d["triple"] = list(self.triple)
        return d


def omega_star(triple: BalancedTriple) -> float:
    """(1 - (alpha_X/2)^(1/k))/2; on the boundary alpha_X = 1/2 so this is (1 - 4^(-1/k))/2."""
    if triple.boundary:
        return (1 - 4.0 ** (-1.0 / triple.k)) / 2
    return (1 - (triple.alpha_X / 2) ** (1.0 / triple.k)) / 2


def lambda_Z(beta_Z: float, k: int) -> float:
    return beta_Z * k / E


def certified_constants(triple: BalancedTriple, beta_Z: float, delta_bar: float, beta_X: float,
                        boundary: bool | None = None) -> CertConstants:
    if boundary is None:
        boundary = triple.boundary
    if boundary and not triple.boundary:
        raise DomainViolation(f"{triple} is not a boundary triple")
    k, jz, jd = triple.k, triple.j_Z, triple.j_Delta
    ws = omega_star(triple)
    aX = triple.alpha_X
    tau0 = 2 * E * aX * math.exp(-k)
    rho_terms = [beta_X / jz, ws] + ([beta_X / jd] if jd else [])
    rho0 = max(rho_terms)
    C0 = (1 + rho0) / (1 - rho0) ** 2
    blocks = 1 if boundary or jd == 0 else 2
    c0 = blocks * beta_X / k + ws
    BX = math.sqrt(2) * E * (1 + aX) / c0 * (C0 * k * c0 / E) ** (k / 2)
    eta = (1 - 2 * beta_X / jz) ** jz * ((1 - 2 * beta_X / jd) ** jd if jd else 1.0)
    corner = (
        triple.alpha_Z * h2(beta_X / jz)
        + (triple.alpha_Delta * h2(beta_X / jd) if jd else 0.0)
        + h2(ws)
        - 1
        + math.log2(1 - (1 - 2 * ws) ** k * eta)
    )
    return CertConstants(
        (triple.j_Z, triple.j_X, triple.k), boundary, beta_Z, delta_bar, lambda_Z(beta_Z, k),
        beta_X, BX, ws, tau0, rho0, C0, c0, eta, corner,
    )


# X envelope

class XEnvelope:
    """max over (a, b) in [0, 1/2]^2 of Phi_+(a, b, omega).

    The 512^2 grid is reduced to its Pareto front in (entropy part, y-product):
    for fixed omega the objective is increasing in both, so dominated grid
    points never attain the maximum.
    """

    def __init__(self, triple: BalancedTriple, grid: int = ENVELOPE_AB_GRID):
        self.triple = triple
        k, jz, jd = triple.k, triple.j_Z, triple.j_Delta
        self.aZ, self.aD = jz / k, jd / k
        g = np.linspace(0.0, 0.5, grid)
        self.step = g[1] - g[0]
        if jd:
            A, Bm = np.meshgrid(g, g, indexing="ij")
            A, Bm = A.ravel(), Bm.ravel()
        else:
            A, Bm = g, np.zeros_like(g)
        Ent = self.aZ * h2_vec(A) + self.aD * h2_vec(Bm)
        Y = (1 - 2 * A) ** jz * ((1 - 2 * Bm) ** jd if jd else 1.0)
        order = np.lexsort((-Y, -Ent))
        Ent, Y, A, Bm = Ent[order], Y[order], A[order], Bm[order]
        keep = Y > np.concatenate(([-1.0], np.maximum.accumulate(Y)[:-1]))
        self.Ent, self.Y, self.A, self.B = Ent[keep], Y[keep], A[keep], Bm[keep]

    def phi(self, a: float, b: float, omega: float) -> float:
        jz, jd, k = self.triple.j_Z, self.triple.j_Delta, self.triple.k
        mu = abs(1 - 2 * omega) ** k
        y = abs(1 - 2 * a) ** jz * (abs(1 - 2 * b) ** jd if jd else 1.0)
        ent = self.aZ * h2(a) + (self.aD * h2(b) if jd else 0.0)
        return ent + h2(omega) - 1 + math.log2(1 + mu * y)

    def grid_max(self, omega: float) -> tuple[float, int]:
        mu = abs(1 - 2 * omega) ** self.triple.k
        vals = self.Ent + np.log2(1 + mu * self.Y)
        i = int(np.argmax(vals))
        return float(vals[i]) + h2(omega) - 1, i

    def __call__(self, omega: float, refine: bool = True) -> float:
        best, i = self.grid_max(omega)
        if not refine:
            return best
        a, b = float(self.A[i]), float(self.B[i])
        h = self.step
        jd = self.triple.j_Delta
        # local pattern search around the best grid point
        for _ in range(40):
            moved = False
            for da, db in ((h, 0), (-h, 0), (0, h), (0, -h)) if jd else ((h, 0), (-h, 0)):
                na, nb = min(0.5, max(0.0, a + da)), min(0.5, max(0.0, b + db))
                v = self.phi(na, nb, omega)
                if v > best:
                    best, a, b, moved = v, na, nb, True
            if not moved:
                h *= 0.5
                if h < 1e-10:
                    break
        return best


@lru_cache(maxsize=64)
def _x_env(triple: BalancedTriple) -> XEnvelope:
    return XEnvelope(triple)


def x_envelope(omega: float, triple: BalancedTriple) -> float:
    _check_unit("omega", omega)
    return _x_env(triple)(omega)


def _rightmost_zero(env, top: float, step: float = SCAN_STEP, tol: float = BISECT_TOL,
                    coarse=None) -> float:
    """Largest zero of env on (0, top] with env <= 0 on its immediate left; 0 if none.

    ``coarse`` (vectorized, cheap) screens the 1e-4 grid; the final bracket is
    bisected with the full ``env``.
    """
    nsteps = int(round(top / step))
    grid = np.array([top - i * step for i in range(nsteps)] + [0.0])
    grid = grid[grid > 0]
    vals = coarse(grid) if coarse is not None else np.array([env(w) for w in grid])
    last = len(grid) - 1
    i = 1
    while i < last:
        if not (vals[i] <= 0 and vals[i + 1] <= 0 and vals[i - 1] > 0):
            i += 1
            continue
        # the coarse screen is a lower bound; walk down with the refined envelope
        j = i
        while j < last and env(grid[j]) > 0:
            j += 1
        if j >= last:
            return 0.0
        if env(grid[j + 1]) > 0:
            i = j + 1
            continue
        lo, hi = grid[j], grid[j - 1]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if env(mid) <= 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    return 0.0


def rightmost_zero(side: str, triple: BalancedTriple, z_mode: str = "infimum") -> float:
    """Proxy delta-hat: rightmost zero of the Z envelope, X envelope, or their minimum."""
    if side == "min":
        return min(rightmost_zero("Z", triple, z_mode), rightmost_zero("X", triple, z_mode))
    if side == "Z":
        env = _z_env(triple, z_mode)

        def coarse(ws):
            return np.array([h2(w) + env.grid_values(w).max() for w in ws])

        return _rightmost_zero(env, 0.5, coarse=coarse)
    if side == "X":
        xe = _x_env(triple)

        def coarse(ws):
            return np.array([xe.grid_max(w)[0] for w in ws])

        return _rightmost_zero(xe, 0.5, coarse=coarse)
    raise ValueError(f"unknown side {side!r}")
