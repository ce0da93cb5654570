"""Configuration-model samplers for regular GF(2) matrices.

Every column gets ``j`` sockets and every row ``k_row`` sockets; a uniform
permutation matches them and an entry is the parity of the number of edges
joining its row and column.  Randomness comes from numpy's Philox counter-based
generator keyed by ``(seed, stream_id)`` through ``SeedSequence``, so results do
not depend on how samples are scheduled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .gf2 import BitMatrix


class DivisibilityViolation(ValueError):
    pass


class RejectionLimitExceeded(RuntimeError):
    pass


class Mode(str, enum.Enum):
    MOD2 = "Mod2Multigraph"
    SIMPLE = "SimpleGraph"


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    mode: Mode = Mode.MOD2
    max_rejections: int = 10000

    def __post_init__(self) -> None:
        if self.max_rejections < 1:
            raise ValueError("max_rejections must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "mode", Mode(self.mode))


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for a (seed, stream ids...) key."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class DegreeProfile:
    """Degrees of the nested family: A_Z is (j_Z, k_Z), A_Delta is (j_Delta, k_Delta), B is (k, k)."""

    j_Z: int
    k_Z: int
    j_Delta: int
    k_Delta: int
    k: int
    n: int

    def __post_init__(self) -> None:
        if self.j_Z < 1 or self.k_Z < 1 or self.k < 1 or self.n < 1:
            raise ValueError("degrees and blocklength must be positive")
        if self.j_Delta < 0:
            raise ValueError("j_Delta must be >= 0")
        if self.j_Delta > 0 and self.k_Delta < 1:
            raise ValueError("k_Delta must be positive when j_Delta > 0")

    @property
    def m_Z(self) -> int:
        return row_counts(self)[0]

    @property
    def m_Delta(self) -> int:
        return row_counts(self)[1]

    @property
    def m_X(self) -> int:
        return row_counts(self)[2]

    def with_n(self, n: int) -> "DegreeProfile":
        return DegreeProfile(self.j_Z, self.k_Z, self.j_Delta, self.k_Delta, self.k, n)

    def design_rates(self) -> tuple[Fraction, Fraction, Fraction]:
        m_Z, m_D, m_X = row_counts(self)
        n = self.n
        return Fraction(n - m_Z, n), Fraction(m_X, n), Fraction(m_D, n)


@dataclass(frozen=True, order=True)
class BalancedTriple:
    j_Z: int
    j_X: int
    k: int

    def __post_init__(self) -> None:
        if min(self.j_Z, self.j_X, self.k) < 1:
            raise ValueError("triple entries must be positive")
        if self.j_X < self.j_Z:
            raise ValueError("need j_Z <= j_X")

    @property
    def j_Delta(self) -> int:
        return self.j_X - self.j_Z

    @property
    def alpha_Z(self) -> float:
        return self.j_Z / self.k

    @property
    def alpha_Delta(self) -> float:
        return self.j_Delta / self.k

    @property
    def alpha_X(self) -> float:
        return self.j_X / self.k

    @property
    def balanced(self) -> bool:
        return self.j_Z + self.j_X == self.k

    @property
    def boundary(self) -> bool:
        return self.j_Z == self.j_X

    def profile(self, n: int) -> DegreeProfile:
        return DegreeProfile(self.j_Z, self.k, self.j_Delta, self.k, self.k, n)

    @classmethod
    def parse(cls, text: str) -> "BalancedTriple":
        parts = [int(p) for p in text.replace("(", "").replace(")", "").split(",")]
        if len(parts) != 3:
            raise ValueError(f"triple needs three integers: {text!r}")
        return cls(*parts)

    def __str__(self) -> str:
        return f"({self.j_Z},{self.j_X},{self.k})"


def row_counts(p: DegreeProfile) -> tuple[int, int, int]:
    if (p.j_Z * p.n) % p.k_Z:
        raise DivisibilityViolation(f"k_Z={p.k_Z} does not divide j_Z*n={p.j_Z * p.n}")
    m_Z = p.j_Z * p.n // p.k_Z
    if p.j_Delta == 0:
        m_D = 0
    else:
        if (p.j_Delta * p.n) % p.k_Delta:
            raise DivisibilityViolation(
                f"k_Delta={p.k_Delta} does not divide j_Delta*n={p.j_Delta * p.n}"
            )
        m_D = p.j_Delta * p.n // p.k_Delta
    return m_Z, m_D, m_Z + m_D


def _edge_counts(j: int, k_row: int, n: int, rng: np.random.Generator) -> np.ndarray:
    m = j * n // k_row
    col_of = np.repeat(np.arange(n), j)
    row_of = np.repeat(np.arange(m), k_row)[rng.permutation(j * n)]
    return np.bincount(row_of * n + col_of, minlength=m * n).reshape(m, n)


def sample_regular(
    j: int, k_row: int, n: int, cfg: SamplerConfig, stream_id: tuple[int, ...] | int = 0
) -> BitMatrix:
    """Sample an m x n matrix from the (j, k_row) configuration model."""
    if j < 0 or k_row < 1 or n < 1:
        raise ValueError("need j >= 0, k_row >= 1, n >= 1")
    if (j * n) % k_row:
        raise DivisibilityViolation(f"k_row={k_row} does not divide j*n={j * n}")
    if j == 0:
        return BitMatrix.zeros(0, n)
    stream = stream_id if isinstance(stream_id, tuple) else (stream_id,)
    rng = rng_for(cfg.seed, *stream)
    if cfg.mode is Mode.MOD2:
        return BitMatrix.from_dense((_edge_counts(j, k_row, n, rng) & 1).astype(np.uint8))
    for _ in range(cfg.max_rejections):
        counts = _edge_counts(j, k_row, n, rng)
        if counts.max() <= 1:
            return BitMatrix.from_dense(counts.astype(np.uint8))
    raise RejectionLimitExceeded(
        f"no simple ({j},{k_row}) graph at n={n} after {cfg.max_rejections} draws"
    )


def sample_square(k: int, n: int, cfg: SamplerConfig, stream_id: tuple[int, ...] | int = 0) -> BitMatrix:
    return sample_regular(k, k, n, cfg, stream_id)


def batch_edge_parity(j: int, k_row: int, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized Mod2Multigraph draws, shape (count, m, n), dtype uint8."""
    m = j * n // k_row
    col_of = np.repeat(np.arange(n), j)
    row_sock = np.repeat(np.arange(m), k_row)
    perms = rng.permuted(np.tile(np.arange(j * n), (count, 1)), axis=1)
    cell = row_sock[perms] * n + col_of[None, :]
    flat = cell + (np.arange(count) * (m * n))[:, None]
    counts = np.bincount(flat.ravel(), minlength=count * m * n)
    return (counts.reshape(count, m, n) & 1).astype(np.uint8)
