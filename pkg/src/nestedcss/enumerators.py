"""Exact ensemble-average weight enumerators and their independent oracles.

All values are ``fractions.Fraction``.  Coefficients of powers of the one-column
generating function are extracted through the binomial expansion

    g^n = 2^-n sum_i C(n,i) P^i Q^(n-i),  P = (1+u)^a (1+v)^b (1+r)^c,  Q = P(-u,-v,-r),

which factors per variable.  ``IntPoly`` with truncated repeated squaring is
kept as an independent cross-check of that extraction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from .ensemble import (
    BalancedTriple,
    DegreeProfile,
    batch_edge_parity,
    rng_for,
    row_counts,
)


class DomainError(ValueError):
    pass


@lru_cache(maxsize=None)
def binom(N: int, q: int) -> int:
    if q < 0 or q > N or N < 0:
        return 0
    return math.comb(N, q)


# IntPoly: sparse multivariate integer polynomials

@dataclass(frozen=True)
class IntPoly:
    """Integer polynomial in ``nvars`` variables, coefficients keyed by exponent tuples."""

    nvars: int
    coeffs: tuple[tuple[tuple[int, ...], int], ...]

    @classmethod
    def from_dict(cls, nvars: int, d: dict) -> "IntPoly":
        items = tuple(sorted((tuple(e), int(c)) for e, c in d.items() if c != 0))
        return cls(nvars, items)

    @classmethod
    def one(cls, nvars: int) -> "IntPoly":
        return cls(nvars, (((0,) * nvars, 1),))

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def coeff(self, exps: tuple[int, ...]) -> int:
        return self.as_dict().get(tuple(exps), 0)

    def mul(self, other: "IntPoly", cap: tuple[int, ...] | None = None) -> "IntPoly":
        """Product, dropping monomials beyond ``cap`` in any variable."""
        out: dict = {}
        for ea, ca in self.coeffs:
            for eb, cb in other.coeffs:
                e = tuple(x + y for x, y in zip(ea, eb))
                if cap is not None and any(x > c for x, c in zip(e, cap)):
                    continue
                out[e] = out.get(e, 0) + ca * cb
        return IntPoly.from_dict(self.nvars, out)

    def pow(self, e: int, cap: tuple[int, ...] | None = None) -> "IntPoly":
        result = IntPoly.one(self.nvars)
        base = self
        while e:
            if e & 1:
                result = result.mul(base, cap)
            e >>= 1
            if e:
                base = base.mul(base, cap)
        return result

    def __add__(self, other: "IntPoly") -> "IntPoly":
        d = self.as_dict()
        for e, c in other.coeffs:
            d[e] = d.get(e, 0) + c
        return IntPoly.from_dict(self.nvars, d)

    def scale(self, c: int) -> "IntPoly":
        return IntPoly.from_dict(self.nvars, {e: c * v for e, v in self.coeffs})

    def __call__(self, *xs):
        total = 0
        for e, c in self.coeffs:
            term = c
            for x, p in zip(xs, e):
                term = term * x**p
            total += term
        return total

    def degree(self) -> int:
        return max((sum(e) for e, _ in self.coeffs), default=0)


def _binomial_poly(deg: int, sign: int, var: int, nvars: int) -> IntPoly:
    d = {}
    for i in range(deg + 1):
        e = [0] * nvars
        e[var] = i
        d[tuple(e)] = binom(deg, i) * sign**i
    return IntPoly.from_dict(nvars, d)


def f_plus(k: int) -> IntPoly:
    """((1+z)^k + (1-z)^k)/2."""
    return IntPoly.from_dict(1, {(i,): binom(k, i) for i in range(0, k + 1, 2)})


def f_minus(k: int) -> IntPoly:
    """((1+z)^k - (1-z)^k)/2."""
    return IntPoly.from_dict(1, {(i,): binom(k, i) for i in range(1, k + 1, 2)})


def column_poly(j_Z: int, j_D: int, k: int, odd: bool = False) -> IntPoly:
    """g(u,v,r) (even part) or g^-(u,v,r) (odd part) as an IntPoly in (u, v, r)."""
    P = _binomial_poly(j_Z, 1, 0, 3).mul(_binomial_poly(j_D, 1, 1, 3)).mul(_binomial_poly(k, 1, 2, 3))
    Q = _binomial_poly(j_Z, -1, 0, 3).mul(_binomial_poly(j_D, -1, 1, 3)).mul(_binomial_poly(k, -1, 2, 3))
    S = P + Q.scale(-1 if odd else 1)
    return IntPoly.from_dict(3, {e: c // 2 for e, c in S.coeffs})


def gpow_coeff_poly(j_Z: int, j_D: int, k: int, n: int, A: int, Bv: int, C: int, odd: bool = False) -> int:
    """[u^A v^B r^C] g^n by truncated repeated squaring (oracle path)."""
    g = column_poly(j_Z, j_D, k, odd)
    return g.pow(n, cap=(A, Bv, C)).coeff((A, Bv, C))


# fast separable extraction

@lru_cache(maxsize=4096)
def _mixed_coeffs(a: int, n: int, A: int) -> tuple[int, ...]:
    """c[i] = [x^A] (1+x)^(a*i) (1-x)^(a*(n-i)) for i = 0..n."""
    out = []
    for i in range(n + 1):
        p, q = a * i, a * (n - i)
        lo, hi = max(0, A - q), min(A, p)
        s = 0
        for t in range(lo, hi + 1):
            term = binom(p, t) * binom(q, A - t)
            s += -term if (A - t) & 1 else term
        out.append(s)
    return tuple(out)


def gpow_coeff(j_Z: int, j_D: int, k: int, n: int, A: int, Bv: int, C: int, odd: bool = False) -> Fraction:
    """[u^A v^B r^C] g^n (or (g^-)^n), exact."""
    cu = _mixed_coeffs(j_Z, n, A)
    cv = _mixed_coeffs(j_D, n, Bv)
    cr = _mixed_coeffs(k, n, C)
    total = 0
    for i in range(n + 1):
        term = binom(n, i) * cu[i] * cv[i] * cr[i]
        if odd and (n - i) & 1:
            term = -term
        total += term
    return Fraction(total, 2**n)


def _upow(base: list[int], e: int, maxdeg: int) -> list[int]:
    """Univariate power with truncation at maxdeg."""
    def mul(a, b):
        out = [0] * min(len(a) + len(b) - 1, maxdeg + 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b[: maxdeg + 1 - i]):
                out[i + j] += x * y
        return out

    result = [1]
    b = base[: maxdeg + 1]
    while e:
        if e & 1:
            result = mul(result, b)
        e >>= 1
        if e:
            b = mul(b, b)
    return result


@lru_cache(maxsize=256)
def _fplus_power(k: int, m: int) -> tuple[int, ...]:
    base = [binom(k, i) if i % 2 == 0 else 0 for i in range(k + 1)]
    return tuple(_upow(base, m, k * m))


@lru_cache(maxsize=4096)
def _transition_poly(k: int, n: int, l: int) -> tuple[int, ...]:
    fp = [binom(k, i) if i % 2 == 0 else 0 for i in range(k + 1)]
    fm = [binom(k, i) if i % 2 == 1 else 0 for i in range(k + 1)]
    a = _upow(fm, l, k * n)
    b = _upow(fp, n - l, k * n)
    out = [0] * (k * n + 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b[: k * n + 1 - i]):
                out[i + j] += x * y
    return tuple(out)


def _coef(poly: tuple[int, ...], d: int) -> int:
    return poly[d] if 0 <= d < len(poly) else 0


def outer_enum(n: int, j_Z: int, k: int, s: int) -> Fraction:
    """N_o(s): expected number of weight-s words in Ker A_Z, (j_Z, k)-regular, mod 2 model."""
    if (j_Z * n) % k:
        raise DomainError(f"k={k} does not divide j_Z*n={j_Z * n}")
    if not 0 <= s <= n:
        raise DomainError(f"s={s} outside [0, {n}]")
    m = j_Z * n // k
    c = _coef(_fplus_power(k, m), j_Z * s)
    return Fraction(binom(n, s) * c, binom(n * j_Z, j_Z * s))


def transition_kernel(n: int, k: int, s: int, l: int) -> Fraction:
    """M_k(s, l): probability-weighted count of weight-l images of a weight-s input under B.

    The downstream bounds assume even k; odd k is computed as well (see ``in_lemma_hypothesis``).
    """
    if not (0 <= s <= n and 0 <= l <= n):
        raise DomainError("weights outside [0, n]")
    if k < 1 or n < 1:
        raise DomainError("need k, n >= 1")
    c = _coef(_transition_poly(k, n, l), k * s)
    return Fraction(binom(n, l) * c, binom(k * n, k * s))


def in_lemma_hypothesis(k: int) -> bool:
    return k % 2 == 0


def ha_mean_bound(n: int, j_Z: int, k: int, l: int) -> Fraction:
    """N_Z^ub(l) = sum_{s=ceil(l/k)}^{n-ceil(l/k)} N_o(s) M_k(s, l)."""
    if not 0 <= l <= n:
        raise DomainError("l outside [0, n]")
    lo = -(-l // k)
    return sum(
        (outer_enum(n, j_Z, k, s) * transition_kernel(n, k, s, l) for s in range(lo, n - lo + 1)),
        Fraction(0),
    )


def _profile_of(ctx, n: int | None) -> DegreeProfile:
    if isinstance(ctx, DegreeProfile):
        return ctx if n is None else ctx.with_n(n)
    if isinstance(ctx, BalancedTriple):
        if n is None:
            raise DomainError("blocklength required for a triple")
        return ctx.profile(n)
    raise TypeError(f"unsupported context {ctx!r}")


def stacked_mean(ctx, n: int | None, t_1: int, t_Delta: int, w: int, syndrome: str = "even") -> Fraction:
    """E[N_X(t_1, t_Delta, w)] from the stacked configuration formula.

    ``syndrome="ones"`` swaps g for its odd part (right-hand side all-ones).
    """
    p = _profile_of(ctx, n)
    m_Z, m_D, _ = row_counts(p)
    n = p.n
    if not (0 <= t_1 <= m_Z and 0 <= t_Delta <= m_D and 0 <= w <= n):
        raise DomainError("weights outside block dimensions")
    if syndrome not in ("even", "ones"):
        raise DomainError(f"unknown syndrome {syndrome!r}")
    A, Bv, C = p.k_Z * t_1, p.k_Delta * t_Delta if p.j_Delta else 0, p.k * w
    coef = gpow_coeff(p.j_Z, p.j_Delta, p.k, n, A, Bv, C, odd=(syndrome == "ones"))
    if coef == 0:
        return Fraction(0)
    supports = binom(m_Z, t_1) * binom(m_D, t_Delta) * binom(n, w)
    norm = binom(n * p.j_Z, A) * binom(n * p.j_Delta, Bv) * binom(n * p.k, C)
    return coef * supports / norm


def n_dep_mean(ctx, n: int | None, t_1: int, t_Delta: int) -> Fraction:
    return stacked_mean(ctx, n, t_1, t_Delta, 0)


def support_probability(ctx, n: int | None, t_1: int, t_Delta: int, w: int, syndrome: str = "even") -> Fraction:
    """stacked_mean divided by the number of support choices."""
    p = _profile_of(ctx, n)
    m_Z, m_D, _ = row_counts(p)
    return stacked_mean(p, None, t_1, t_Delta, w, syndrome) / (
        binom(m_Z, t_1) * binom(m_D, t_Delta) * binom(p.n, w)
    )


# oracles

def socket_count_outer(n: int, j_Z: int, k: int, s: int) -> Fraction:
    """Exhaustive oracle for N_o(s): enumerate every j_Z*s-subset of the m*k row sockets."""
    m = j_Z * n // k
    good = 0
    total = 0
    for sub in itertools.combinations(range(m * k), j_Z * s):
        counts = [0] * m
        for x in sub:
            counts[x // k] += 1
        total += 1
        good += all(c % 2 == 0 for c in counts)
    return Fraction(binom(n, s) * good, total)


def exhaustive_transition(n: int, k: int, s: int) -> list[Fraction]:
    """Exact law of wt(B x), wt(x) = s, over all (kn)! socket matchings (tiny n*k only)."""
    if math.factorial(n * k) > 5 * 10**6:
        raise DomainError("too many matchings for exhaustive enumeration")
    col_of = [c for c in range(n) for _ in range(k)]
    row_of = [r for r in range(n) for _ in range(k)]
    x = set(range(s))
    hist = [0] * (n + 1)
    total = 0
    for perm in itertools.permutations(range(n * k)):
        y = [0] * n
        for sock, dst in enumerate(perm):
            if col_of[sock] in x:
                y[row_of[dst]] ^= 1
        hist[sum(y)] += 1
        total += 1
    return [Fraction(h, total) for h in hist]


def mc_support_prob(ctx, n: int | None, t_1: int, t_Delta: int, w: int, samples: int, seed: int,
                    batch: int = 50000, syndrome: str = "even") -> tuple[float, float]:
    """Monte Carlo estimate of P[A_Z^T 1_S1 + A_D^T 1_SD + B^T 1_T = rhs] on canonical supports.

    Canonical supports are the first t_1, t_Delta, w rows; exchangeability of
    the configuration model makes any other choice equivalent.
    """
    if samples < 1000:
        raise DomainError("need at least 1000 samples")
    p = _profile_of(ctx, n)
    m_Z, m_D, _ = row_counts(p)
    n = p.n
    if t_1 == 0 and t_Delta == 0 and w == 0 and syndrome == "even":
        return 1.0, 0.0
    rhs = 1 if syndrome == "ones" else 0
    hits = 0
    done = 0
    idx = 0
    while done < samples:
        cnt = min(batch, samples - done)
        acc = np.zeros((cnt, n), dtype=np.uint8)
        if t_1:
            rng = rng_for(seed, idx, 0)
            acc ^= np.bitwise_xor.reduce(batch_edge_parity(p.j_Z, p.k_Z, n, cnt, rng)[:, :t_1, :], axis=1)
        if t_Delta:
            rng = rng_for(seed, idx, 1)
            acc ^= np.bitwise_xor.reduce(batch_edge_parity(p.j_Delta, p.k_Delta, n, cnt, rng)[:, :t_Delta, :], axis=1)
        if w:
            rng = rng_for(seed, idx, 2)
            acc ^= np.bitwise_xor.reduce(batch_edge_parity(p.k, p.k, n, cnt, rng)[:, :w, :], axis=1)
        hits += int(np.all(acc == rhs, axis=1).sum())
        done += cnt
        idx += 1
    est = hits / samples
    return est, math.sqrt(max(est * (1 - est), 0.0) / samples)


def brute_weight_enum(inst, which: str) -> np.ndarray:
    """Exact weight distribution of a code attached to an instance."""
    from . import construct, gf2

    if which == "C_Z":
        G = construct.cz_generator(inst)
    elif which == "C_X":
        G = gf2.kernel_basis(construct.compressed_pair(inst).H_X)
    elif which == "KerB":
        G = gf2.kernel_basis(inst.B)
    elif which == "KerAX_left":
        G = gf2.kernel_basis(inst.A_X.T)
    elif which == "KerAZ":
        G = gf2.kernel_basis(inst.A_Z)
    else:
        raise DomainError(f"unknown code {which!r}")
    if G.rows == 0:
        out = np.zeros(G.cols + 1, dtype=np.int64)
        out[0] = 1
        return out
    return construct.span_weight_table(G)
