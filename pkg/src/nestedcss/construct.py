"""Nested CSS family: sampled blocks, extended and compressed checks, rates.

C_Z = B(Ker A_Z) and C_X = (B(Ker A_X))^perp, with A_X = [A_Z; A_Delta].
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import gf2
from .ensemble import DegreeProfile, SamplerConfig, row_counts, sample_regular, sample_square
from .gf2 import BitMatrix, RankDeficient, hstack, kernel_basis, rank, vstack

MAX_KERNEL_DIM = 26


class TooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FamilyInstance:
    profile: DegreeProfile
    A_Z: BitMatrix
    A_Delta: BitMatrix
    B: BitMatrix
    seed: int = 0
    stream: int = 0

    def __post_init__(self) -> None:
        n = self.profile.n
        m_Z, m_D, _ = row_counts(self.profile)
        if self.A_Z.shape != (m_Z, n) or self.A_Delta.shape != (m_D, n) or self.B.shape != (n, n):
            raise gf2.DimensionMismatch("block shapes do not match the profile")

    @property
    def n(self) -> int:
        return self.profile.n

    @cached_property
    def A_X(self) -> BitMatrix:
        return vstack([self.A_Z, self.A_Delta])


def build_instance(p: DegreeProfile, cfg: SamplerConfig, stream: int = 0) -> FamilyInstance:
    """Independent draws of A_Z, A_Delta and B; substreams (stream, 0/1/2)."""
    A_Z = sample_regular(p.j_Z, p.k_Z, p.n, cfg, (stream, 0))
    if p.j_Delta:
        A_D = sample_regular(p.j_Delta, p.k_Delta, p.n, cfg, (stream, 1))
    else:
        A_D = BitMatrix.zeros(0, p.n)
    B = sample_square(p.k, p.n, cfg, (stream, 2))
    inst = FamilyInstance(p, A_Z, A_D, B, cfg.seed, stream)
    assert gf2.span_contains(inst.A_X, inst.A_Z)
    return inst


def extended_matrices(inst: FamilyInstance) -> tuple[BitMatrix, BitMatrix]:
    """H'_Z = [[A_Z, 0], [B, I]] and H'_X = [A_X^T  B^T]."""
    n = inst.n
    top = hstack([inst.A_Z, BitMatrix.zeros(inst.A_Z.rows, n)])
    bottom = hstack([inst.B, BitMatrix.identity(n)])
    HZp = vstack([top, bottom])
    HXp = hstack([inst.A_X.T, inst.B.T])
    return HZp, HXp


@dataclass(frozen=True, eq=False)
class CompressedPair:
    H_Z: BitMatrix
    H_X: BitMatrix
    K_X: BitMatrix


def compressed_pair(inst: FamilyInstance) -> CompressedPair:
    K_X = kernel_basis(inst.A_X)
    H_X = K_X @ inst.B.T
    m_Z = inst.A_Z.rows
    Kfull = kernel_basis(hstack([inst.A_Z.T, inst.B.T]))
    H_Z = Kfull.select_cols(np.arange(m_Z, m_Z + inst.n))
    return CompressedPair(H_Z, H_X, K_X)


def cz_generator(inst: FamilyInstance) -> BitMatrix:
    """Rows span C_Z = B(Ker A_Z)."""
    return kernel_basis(inst.A_Z) @ inst.B.T


def cz_ax_generator(inst: FamilyInstance) -> BitMatrix:
    """Rows span the subcode B(Ker A_X)."""
    return kernel_basis(inst.A_X) @ inst.B.T


def check_compressed(inst: FamilyInstance, pair: CompressedPair | None = None) -> bool:
    """Double inclusion: Row(H_Z) = C_Z^perp and Row(H_X) = B(Ker A_X)."""
    pair = pair or compressed_pair(inst)
    n = inst.n
    G = cz_generator(inst)
    if not (pair.H_Z @ G.T).is_zero():
        return False
    if rank(pair.H_Z) + rank(G) != n:
        return False
    G_X = cz_ax_generator(inst)
    r = rank(pair.H_X)
    return r == rank(G_X) == rank(vstack([pair.H_X, G_X]))


@dataclass(frozen=True)
class CSSCheck:
    ok: bool
    bad_row: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_css(inst: FamilyInstance, pair: CompressedPair | None = None) -> CSSCheck:
    """H_X H_Z^T = 0 and B^T v in Row(A_X) for every row v of H_Z."""
    pair = pair or compressed_pair(inst)
    return verify_css_pair(pair, inst.A_X, inst.B)


def verify_css_pair(pair: CompressedPair, A_X: BitMatrix, B: BitMatrix) -> CSSCheck:
    prod = (pair.H_X @ pair.H_Z.T).to_dense()
    if prod.any():
        return CSSCheck(False, int(np.nonzero(prod.any(axis=0))[0][0]), "H_X H_Z^T != 0")
    BtV = (B.T @ pair.H_Z.T).T  # row i is (B^T v_i)^T
    rA = rank(A_X)
    for i in range(BtV.rows):
        if rank(vstack([A_X, BtV.select_rows([i])])) != rA:
            return CSSCheck(False, i, "B^T v not in Row(A_X)")
    return CSSCheck(True)


@dataclass(frozen=True)
class RateReport:
    n: int
    rank_AZ: int
    rank_AX: int
    rank_B: int
    L_Z: int
    L_X: int
    R_Z: Fraction
    R_X: Fraction
    R_Q: Fraction
    R_Z_des: Fraction
    R_X_des: Fraction
    R_Q_des: Fraction

    @property
    def dim_CZ(self) -> int:
        return self.n - self.rank_AZ - self.L_Z

    @property
    def dim_CX(self) -> int:
        return self.rank_AX + self.L_X

    def to_json(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = str(v) if isinstance(v, Fraction) else v
        for k in ("R_Z", "R_X", "R_Q", "R_Z_des", "R_X_des", "R_Q_des"):
            out[k + "_float"] = float(getattr(self, k))
        return out


def rate_report(inst: FamilyInstance) -> RateReport:
    n = inst.n
    rAZ, rAX, rB = rank(inst.A_Z), rank(inst.A_X), rank(inst.B)
    L_Z = n - rank(vstack([inst.A_Z, inst.B]))
    L_X = n - rank(vstack([inst.A_X, inst.B]))
    R_Z = Fraction(n - rAZ - L_Z, n)
    R_X = Fraction(rAX + L_X, n)
    dZ, dX, dQ = inst.profile.design_rates()
    return RateReport(n, rAZ, rAX, rB, L_Z, L_X, R_Z, R_X, R_X + R_Z - 1, dZ, dX, dQ)


# affine syndrome systems

@dataclass(frozen=True, eq=False)
class AffineSystems:
    """Sparse affine forms of H_Z e_X = s_Z and H_X e_Z = s_X.

    ``H_Z`` and ``K_X`` here are the full-row-rank reductions actually used;
    ``T_Z`` records the row transformation with H_Z(reduced) = T_Z H_Z(raw)
    restricted to a basis selection.
    """

    H_Z: BitMatrix
    K_X: BitMatrix
    Gamma_Z: BitMatrix
    Gamma_X: BitMatrix
    s_Z: BitMatrix
    s_X: BitMatrix
    t_Z: BitMatrix
    t_X: BitMatrix
    A_Z: BitMatrix
    A_X: BitMatrix
    B: BitMatrix

    def z_residual_ok(self, e_X: BitMatrix) -> bool:
        """H_Z e_X = s_Z (column vectors)."""
        return (self.H_Z @ e_X) == self.s_Z

    def x_syndrome_ok(self, e_Z: BitMatrix) -> bool:
        """H_X e_Z = s_X with H_X = K_X B^T."""
        return (self.K_X @ (self.B.T @ e_Z)) == self.s_X

    def e_from_witness(self, f_X: BitMatrix) -> BitMatrix:
        """e_X = t_Z + B f_X; requires A_Z f_X = 0."""
        if not (self.A_Z @ f_X).is_zero():
            raise ValueError("witness not in Ker A_Z")
        return self.t_Z + self.B @ f_X

    def z_witness(self, e_X: BitMatrix) -> BitMatrix | None:
        """Some f_X with A_Z f_X = 0 and B f_X = e_X + t_Z, or None."""
        target = e_X + self.t_Z
        K = kernel_basis(self.A_Z)  # rows span Ker A_Z
        M = self.B @ K.T  # columns B k_i
        return _solve(M, target, K.T)

    def x_witness(self, e_Z: BitMatrix) -> BitMatrix | None:
        """Some f_Z with B^T e_Z = t_X + A_X^T f_Z, or None."""
        target = self.B.T @ e_Z + self.t_X
        return _solve(self.A_X.T, target, None)


def _solve(M: BitMatrix, b: BitMatrix, lift: BitMatrix | None) -> BitMatrix | None:
    """Solve M x = b over GF(2); return lift @ x (or x) or None when inconsistent."""
    aug = hstack([M, b])
    R, piv = gf2.rref(aug)
    if M.cols in piv:
        return None
    D = R.to_dense()
    x = np.zeros((M.cols, 1), dtype=np.uint8)
    for i, p in enumerate(piv):
        x[p, 0] = D[i, M.cols]
    xm = BitMatrix.from_dense(x)
    return lift @ xm if lift is not None else xm


def _column(v) -> BitMatrix:
    arr = np.asarray(v, dtype=np.uint8).reshape(-1, 1)
    return BitMatrix.from_dense(arr)


def affine_systems(inst: FamilyInstance, s_Z, s_X, pair: CompressedPair | None = None) -> AffineSystems:
    """Build Gamma_Z, Gamma_X and the representatives t_Z = Gamma_Z s_Z, t_X = Gamma_X s_X.

    H_Z is row-reduced deterministically first (RREF nonzero rows); callers
    supply syndromes relative to that reduced matrix.
    """
    pair = pair or compressed_pair(inst)
    HZ = gf2.row_basis(pair.H_Z)
    KX = pair.K_X
    if rank(KX) != KX.rows:
        raise RankDeficient("K_X is not full row rank")
    s_Z = s_Z if isinstance(s_Z, BitMatrix) else _column(s_Z)
    s_X = s_X if isinstance(s_X, BitMatrix) else _column(s_X)
    if s_Z.shape != (HZ.rows, 1) or s_X.shape != (KX.rows, 1):
        raise gf2.DimensionMismatch("syndrome lengths do not match reduced checks")
    G_Z = gf2.right_inverse(HZ)
    G_X = gf2.right_inverse(KX)
    return AffineSystems(HZ, KX, G_Z, G_X, s_Z, s_X, G_Z @ s_Z, G_X @ s_X,
                         inst.A_Z, inst.A_X, inst.B)



EXHAUSTIVE_N = 16


def _all_words(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def _mod2(X: np.ndarray, M: BitMatrix) -> np.ndarray:
    """Rows of X times M^T over GF(2)."""
    if M.rows == 0:
        return np.zeros((X.shape[0], 0), dtype=np.uint8)
    return ((X.astype(np.int64) @ M.to_dense().T.astype(np.int64)) & 1).astype(np.uint8)


def affine_equivalence(inst: FamilyInstance, seed: int, trials: int = 8, exhaustive: bool | None = None) -> dict:
    """Check both affine reformulations against the raw syndrome equations.

    Z: H_Z e = s_Z  iff  e = t_Z + B f with A_Z f = 0.
    X: H_X e = s_X  iff  B^T e + t_X lies in Row(A_X).
    Exhaustive over all 2^n error words when n <= 16, otherwise spot checks
    through the explicit witness solvers on in-coset and random words.
    """
    from .ensemble import rng_for

    n = inst.n
    exhaustive = n <= EXHAUSTIVE_N if exhaustive is None else exhaustive
    rng = rng_for(seed, 99)
    pair = compressed_pair(inst)
    HZ = gf2.row_basis(pair.H_Z)
    CZ = cz_generator(inst)
    KerAX = kernel_basis(inst.A_X)
    out = {"n": n, "exhaustive": exhaustive, "z_ok": True, "x_ok": True, "checked": 0}
    words = _all_words(n) if exhaustive else None
    for _ in range(trials):
        sZ = rng.integers(0, 2, size=HZ.rows, dtype=np.uint8)
        sX = rng.integers(0, 2, size=pair.K_X.rows, dtype=np.uint8)
        sy = affine_systems(inst, sZ, sX, pair)
        tZ = sy.t_Z.to_dense()[:, 0]
        tX = sy.t_X.to_dense()[:, 0]
        if exhaustive:
            lhs_z = np.all(_mod2(words, HZ) == sZ, axis=1)
            rhs_z = ~_mod2(words ^ tZ, kernel_basis(CZ) if CZ.rows else BitMatrix.identity(n)).any(axis=1)
            HX = pair.H_X
            lhs_x = np.all(_mod2(words, HX) == sX, axis=1)
            v = _mod2(words, inst.B.T) ^ tX
            rhs_x = ~_mod2(v, KerAX).any(axis=1) if KerAX.rows else np.ones(len(words), dtype=bool)
            out["z_ok"] &= bool(np.array_equal(lhs_z, rhs_z))
            out["x_ok"] &= bool(np.array_equal(lhs_x, rhs_x))
            out["checked"] += 2 * len(words)
            continue
        probes = [rng.integers(0, 2, size=n, dtype=np.uint8) for _ in range(2)]
        zsol = _column(tZ)
        if CZ.rows:
            c = rng.integers(0, 2, size=CZ.rows, dtype=np.uint8)
            zsol = zsol + BitMatrix.from_dense(((c.astype(np.int64) @ CZ.to_dense().astype(np.int64)) & 1)
                                               .astype(np.uint8).reshape(-1, 1))
        xsol = _solve(pair.H_X, _column(sX), None)
        for e in [zsol] + [_column(p) for p in probes]:
            out["z_ok"] &= sy.z_residual_ok(e) == (sy.z_witness(e) is not None)
            out["checked"] += 1
        for e in ([xsol] if xsol is not None else []) + [_column(p) for p in probes]:
            out["x_ok"] &= sy.x_syndrome_ok(e) == (sy.x_witness(e) is not None)
            out["checked"] += 1
        if xsol is not None:
            out["x_ok"] &= sy.x_syndrome_ok(xsol) and sy.x_witness(xsol) is not None
        out["z_ok"] &= sy.z_residual_ok(zsol) and sy.z_witness(zsol) is not None
    out["ok"] = out["z_ok"] and out["x_ok"]
    return out


# brute-force distances

def _span_words(G: BitMatrix) -> np.ndarray:
    """All 2^r codewords of the row span of a full-row-rank G, as uint8 rows."""
    G = gf2.row_basis(G)
    r = G.rows
    if r > MAX_KERNEL_DIM:
        raise TooLarge(f"span dimension {r} exceeds {MAX_KERNEL_DIM}")
    n = G.cols
    words = np.zeros((1, n), dtype=np.uint8)
    D = G.to_dense()
    for i in range(r):
        words = np.vstack([words, words ^ D[i]])
    return words


def span_weight_table(G: BitMatrix) -> np.ndarray:
    """A(w) for w = 0..n over the row span of G."""
    words = _span_words(G)
    return np.bincount(words.sum(axis=1), minlength=G.cols + 1)


INF = float("inf")


@dataclass(frozen=True)
class DistanceReport:
    d_CZ: float
    d_CX: float
    d_Z_rel: float
    d_X_rel: float

    def to_json(self) -> dict:
        return {k: (None if v == INF else int(v)) for k, v in asdict(self).items()}


def _min_nonzero_weight(words: np.ndarray) -> float:
    w = words.sum(axis=1)
    w = w[w > 0]
    return float(w.min()) if w.size else INF


def _min_outside(words: np.ndarray, sub: BitMatrix) -> float:
    """Min weight over words not in Row(sub)."""
    n = words.shape[1]
    Kperp = kernel_basis(sub) if sub.rows else BitMatrix.identity(n)
    if Kperp.rows == 0:
        return INF
    syn = (words.astype(np.int64) @ Kperp.to_dense().T.astype(np.int64)) & 1
    outside = syn.any(axis=1)
    if not outside.any():
        return INF
    return float(words[outside].sum(axis=1).min())


def brute_distances(inst: FamilyInstance, max_kernel_dim: int = MAX_KERNEL_DIM) -> DistanceReport:
    pair = compressed_pair(inst)
    GZ = cz_generator(inst)
    GZA = cz_ax_generator(inst)
    CX = kernel_basis(pair.H_X)
    if rank(GZ) > max_kernel_dim or CX.rows > max_kernel_dim:
        raise TooLarge("code dimension beyond enumeration bound")
    wz = _span_words(GZ)
    wx = _span_words(CX)
    return DistanceReport(
        _min_nonzero_weight(wz),
        _min_nonzero_weight(wx),
        _min_outside(wz, gf2.row_basis(GZA)),
        _min_outside(wx, gf2.row_basis(pair.H_Z)),
    )


def instance_report(inst: FamilyInstance) -> dict:
    pair = compressed_pair(inst)
    HZp, HXp = extended_matrices(inst)
    rr = rate_report(inst)
    return {
        "profile": asdict(inst.profile),
        "seed": inst.seed,
        "stream": inst.stream,
        "shapes": {
            "A_Z": list(inst.A_Z.shape),
            "A_Delta": list(inst.A_Delta.shape),
            "A_X": list(inst.A_X.shape),
            "B": list(inst.B.shape),
            "H_Z_ext": list(HZp.shape),
            "H_X_ext": list(HXp.shape),
            "H_Z": list(pair.H_Z.shape),
            "H_X": list(pair.H_X.shape),
        },
        "nnz": {"H_Z_ext": HZp.nnz(), "H_X_ext": HXp.nnz()},
        "rank_H_Z": rank(pair.H_Z),
        "rank_H_X": rank(pair.H_X),
        "css_ok": bool(verify_css(inst, pair)),
        "rates": rr.to_json(),
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
