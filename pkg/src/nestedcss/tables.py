"""Published certification constants (68 rows) embedded as data.

Columns follow the three tables: HA side (beta_Z, delta_bar, lambda_Z, eps_Z)
and MN side (beta_X, B_X, eps_X).  Boundary rows carry both sides.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ensemble import BalancedTriple

TABLE_D = (
    ((4, 6, 10), 0.25, 0.07938261, 0.919698603, 1.4335e-6),
    ((4, 8, 12), 0.20, 0.06149048, 0.882910659, 1.4281e-6),
    ((5, 7, 12), 0.20, 0.08415898, 0.882910659, 1.4334e-6),
    ((4, 10, 14), 0.15, 0.04983939, 0.772546826, 1.4475e-6),
    ((5, 9, 14), 0.15, 0.06766342, 0.772546826, 1.4606e-6),
    ((6, 8, 14), 0.15, 0.08764842, 0.772546826, 1.4393e-6),
    ((4, 12, 16), 0.15, 0.04169270, 0.882910659, 1.4232e-6),
    ((5, 11, 16), 0.15, 0.05628065, 0.882910659, 1.4402e-6),
    ((6, 10, 16), 0.15, 0.07244980, 0.882910659, 1.4386e-6),
    ((7, 9, 16), 0.15, 0.09030889, 0.882910659, 1.4550e-6),
    ((4, 14, 18), 0.15, 0.03570112, 0.993274491, 1.4638e-6),
    ((5, 13, 18), 0.15, 0.04798567, 0.993274491, 1.4344e-6),
    ((6, 12, 18), 0.15, 0.06149048, 0.993274491, 1.4281e-6),
    ((7, 11, 18), 0.15, 0.07626748, 0.993274491, 1.4606e-6),
    ((8, 10, 18), 0.15, 0.09240427, 0.993274491, 1.4644e-6),
    ((4, 16, 20), 0.12, 0.03112447, 0.882910659, 1.4191e-6),
    ((5, 15, 20), 0.12, 0.04169270, 0.882910659, 1.4232e-6),
    ((6, 14, 20), 0.12, 0.05323905, 0.882910659, 1.4289e-6),
    ((7, 13, 20), 0.12, 0.06578671, 0.882910659, 1.4532e-6),
    ((8, 12, 20), 0.12, 0.07938261, 0.882910659, 1.4335e-6),
    ((9, 11, 20), 0.12, 0.09409725, 0.882910659, 1.4454e-6),
    ((4, 18, 22), 0.12, 0.02752391, 0.971201725, 1.4669e-6),
    ((5, 17, 22), 0.12, 0.03676814, 0.971201725, 1.4506e-6),
    ((6, 16, 22), 0.12, 0.04681897, 0.971201725, 1.4264e-6),
    ((7, 15, 22), 0.12, 0.05768400, 0.971201725, 1.4665e-6),
    ((8, 14, 22), 0.12, 0.06938820, 0.971201725, 1.4562e-6),
    ((9, 13, 22), 0.12, 0.08197232, 0.971201725, 1.4378e-6),
    ((10, 12, 22), 0.12, 0.09549354, 0.971201725, 1.4623e-6),
    ((4, 20, 24), 0.10, 0.02462349, 0.882910659, 1.4250e-6),
    ((5, 19, 24), 0.10, 0.03281810, 0.882910659, 1.4666e-6),
    ((6, 18, 24), 0.10, 0.04169270, 0.882910659, 1.4232e-6),
    ((7, 17, 24), 0.10, 0.05124605, 0.882910659, 1.4422e-6),
    ((8, 16, 24), 0.10, 0.06149048, 0.882910659, 1.4281e-6),
    ((9, 15, 24), 0.10, 0.07244980, 0.882910659, 1.4386e-6),
    ((10, 14, 24), 0.10, 0.08415898, 0.882910659, 1.4334e-6),
    ((4, 22, 26), 0.10, 0.02224127, 0.956486547, 1.4627e-6),
    ((5, 21, 26), 0.10, 0.02958527, 0.956486547, 1.4348e-6),
    ((6, 20, 26), 0.10, 0.03751267, 0.956486547, 1.4267e-6),
    ((7, 19, 26), 0.10, 0.04601713, 0.956486547, 1.4401e-6),
    ((8, 18, 26), 0.10, 0.05510337, 0.956486547, 1.4556e-6),
    ((9, 17, 26), 0.10, 0.06478503, 0.956486547, 1.4466e-6),
    ((10, 16, 26), 0.10, 0.07508386, 0.956486547, 1.4309e-6),
    ((4, 24, 28), 0.08, 0.02025272, 0.824049948, 1.4589e-6),
    ((5, 23, 28), 0.08, 0.02689470, 0.824049948, 1.4307e-6),
    ((6, 22, 28), 0.08, 0.03404447, 0.824049948, 1.4371e-6),
    ((7, 21, 28), 0.08, 0.04169270, 0.824049948, 1.4232e-6),
    ((8, 20, 28), 0.08, 0.04983939, 0.824049948, 1.4475e-6),
    ((9, 19, 28), 0.08, 0.05849180, 0.824049948, 1.4337e-6),
    ((10, 18, 28), 0.08, 0.06766342, 0.824049948, 1.4606e-6),
    ((4, 26, 30), 0.08, 0.01856981, 0.882910659, 1.4627e-6),
    ((5, 25, 30), 0.08, 0.02462349, 0.882910659, 1.4250e-6),
    ((6, 24, 30), 0.08, 0.03112447, 0.882910659, 1.4191e-6),
    ((7, 23, 30), 0.08, 0.03806168, 0.882910659, 1.4329e-6),
    ((8, 22, 30), 0.08, 0.04543217, 0.882910659, 1.4344e-6),
    ((9, 21, 30), 0.08, 0.05323905, 0.882910659, 1.4289e-6),
    ((10, 20, 30), 0.08, 0.06149048, 0.882910659, 1.4281e-6),
)

TABLE_E = (
    ((4, 6, 10), 0.10, 3.3913e-1, 6.1440e-4),
    ((4, 8, 12), 0.10, 8.4365e-2, 1.1086e-2),
    ((5, 7, 12), 0.15, 3.8769e-1, 6.9837e-3),
    ((4, 10, 14), 0.10, 2.0288e-2, 9.8082e-3),
    ((5, 9, 14), 0.10, 3.1429e-2, 1.0623e-2),
    ((6, 8, 14), 0.15, 2.0142e-1, 5.2800e-3),
    ((4, 12, 16), 0.10, 4.7570e-3, 7.4626e-3),
    ((5, 11, 16), 0.10, 7.3569e-3, 1.3600e-2),
    ((6, 10, 16), 0.10, 1.1550e-2, 8.8885e-3),
    ((7, 9, 16), 0.15, 1.0325e-1, 4.6730e-3),
    ((4, 14, 18), 0.10, 1.0939e-3, 4.4071e-3),
    ((5, 13, 18), 0.10, 1.6913e-3, 9.8208e-3),
    ((6, 12, 18), 0.10, 2.6454e-3, 1.5198e-2),
    ((7, 11, 18), 0.10, 4.1979e-3, 6.3084e-3),
    ((8, 10, 18), 0.15, 5.2357e-2, 3.5759e-3),
    ((4, 16, 20), 0.10, 2.6812e-4, 5.0760e-3),
    ((5, 15, 20), 0.10, 3.8321e-4, 1.0657e-2),
    ((6, 14, 20), 0.10, 5.9819e-4, 1.6201e-2),
    ((7, 13, 20), 0.10, 9.4444e-4, 1.6772e-2),
    ((8, 12, 20), 0.10, 1.5119e-3, 7.3575e-3),
    ((9, 11, 20), 0.15, 2.6313e-2, 2.1374e-3),
    ((4, 18, 22), 0.10, 6.5671e-5, 1.2690e-3),
    ((5, 17, 22), 0.10, 8.5794e-5, 5.9311e-3),
    ((6, 16, 22), 0.10, 1.3379e-4, 1.0570e-2),
    ((7, 15, 22), 0.10, 2.1057e-4, 1.5185e-2),
    ((8, 14, 22), 0.10, 3.3510e-4, 1.1607e-2),
    ((9, 13, 22), 0.10, 5.4041e-4, 3.8617e-3),
    ((10, 12, 22), 0.15, 1.3126e-2, 4.5230e-4),
    ((4, 20, 24), 0.10, 1.5881e-5, 1.6115e-3),
    ((5, 19, 24), 0.10, 1.9764e-5, 6.3591e-3),
    ((6, 18, 24), 0.10, 2.9645e-5, 1.1084e-2),
    ((7, 17, 24), 0.10, 4.6565e-5, 1.5785e-2),
    ((8, 16, 24), 0.10, 7.3811e-5, 2.0463e-2),
    ((9, 15, 24), 0.10, 1.1826e-4, 1.2509e-2),
    ((10, 14, 24), 0.10, 1.9191e-4, 4.4634e-3),
    ((4, 22, 26), 0.15, 3.7134e-5, 6.4652e-3),
    ((5, 21, 26), 0.10, 4.6788e-6, 1.0830e-3),
    ((6, 20, 26), 0.10, 6.5168e-6, 4.7828e-3),
    ((7, 19, 26), 0.10, 1.0223e-5, 8.4696e-3),
    ((8, 18, 26), 0.10, 1.6160e-5, 1.2143e-2),
    ((9, 17, 26), 0.10, 2.5776e-5, 1.2582e-2),
    ((10, 16, 26), 0.10, 4.1543e-5, 6.5379e-3),
    ((4, 24, 28), 0.15, 1.0800e-5, 6.7960e-3),
    ((5, 23, 28), 0.10, 1.0975e-6, 1.2864e-3),
    ((6, 22, 28), 0.10, 1.4384e-6, 5.0269e-3),
    ((7, 21, 28), 0.10, 2.2301e-6, 8.7543e-3),
    ((8, 20, 28), 0.10, 3.5186e-6, 1.2469e-2),
    ((9, 19, 28), 0.10, 5.5937e-6, 1.6170e-2),
    ((10, 18, 28), 0.10, 8.9708e-6, 1.3284e-2),
    ((4, 26, 30), 0.15, 3.1195e-6, 7.0826e-3),
    ((5, 25, 30), 0.10, 2.5546e-7, 1.4627e-3),
    ((6, 24, 30), 0.10, 3.3237e-7, 5.2384e-3),
    ((7, 23, 30), 0.10, 4.8377e-7, 9.0011e-3),
    ((8, 22, 30), 0.10, 7.6222e-7, 1.2751e-2),
    ((9, 21, 30), 0.10, 1.2088e-6, 1.6487e-2),
    ((10, 20, 30), 0.10, 1.9315e-6, 2.0211e-2),
)

TABLE_F = (
    ((4, 4, 8), 0.25, 0.11002787, 0.735758882, 2.6092e-4, 0.12, 9.6399e-1, 1.9832e-2),
    ((5, 5, 10), 0.25, 0.11002787, 0.919698603, 2.8660e-4, 0.20, 5.3489e-1, 4.9200e-2),
    ((6, 6, 12), 0.20, 0.11002787, 0.882910659, 2.8839e-4, 0.20, 2.1081e-1, 6.5579e-2),
    ((7, 7, 14), 0.15, 0.11002787, 0.772546826, 1.7807e-4, 0.20, 8.0792e-2, 7.3902e-2),
    ((8, 8, 16), 0.15, 0.11002787, 0.882910659, 2.5980e-4, 0.20, 3.0334e-2, 7.7142e-2),
    ((9, 9, 18), 0.15, 0.11002787, 0.993274491, 2.8106e-4, 0.20, 1.1212e-2, 8.4112e-2),
    ((10, 10, 20), 0.12, 0.11002787, 0.882910659, 2.8648e-4, 0.20, 4.0929e-3, 8.8504e-2),
    ((11, 11, 22), 0.12, 0.11002787, 0.971201725, 2.8800e-4, 0.20, 1.4792e-3, 9.0340e-2),
    ((12, 12, 24), 0.10, 0.11002787, 0.882910659, 2.8840e-4, 0.20, 5.3019e-4, 8.9625e-2),
    ((13, 13, 26), 0.10, 0.11002787, 0.956486547, 2.8850e-4, 0.20, 1.8872e-4, 8.6348e-2),
    ((14, 14, 28), 0.08, 0.11002787, 0.824049948, 2.8853e-4, 0.20, 6.6777e-5, 9.5554e-2),
    ((15, 15, 30), 0.08, 0.11002787, 0.882910659, 2.8854e-4, 0.20, 2.3508e-5, 8.8432e-2),
)


@dataclass(frozen=True)
class HARow:
    triple: BalancedTriple
    beta_Z: float
    delta_bar: float
    lambda_Z: float
    eps_Z: float


@dataclass(frozen=True)
class MNRow:
    triple: BalancedTriple
    beta_X: float
    B_X: float
    eps_X: float


def ha_rows() -> list[HARow]:
    return [HARow(BalancedTriple(*t), *rest) for t, *rest in TABLE_D]


def mn_rows() -> list[MNRow]:
    return [MNRow(BalancedTriple(*t), *rest) for t, *rest in TABLE_E]


def boundary_rows() -> list[tuple[HARow, MNRow]]:
    out = []
    for t, bz, db, lz, ez, bx, BX, ex in TABLE_F:
        tr = BalancedTriple(*t)
        out.append((HARow(tr, bz, db, lz, ez), MNRow(tr, bx, BX, ex)))
    return out


def lookup(triple: BalancedTriple) -> tuple[HARow | None, MNRow | None]:
    """Published rows for a triple (HA, MN); None where absent."""
    for ha, mn in boundary_rows():
        if ha.triple == triple:
            return ha, mn
    ha = next((r for r in ha_rows() if r.triple == triple), None)
    mn = next((r for r in mn_rows() if r.triple == triple), None)
    return ha, mn
