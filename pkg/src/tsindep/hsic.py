"""HSIC V-statistics and the single / joint test statistics built on them.

Given paired innovation estimates ``eta1`` (n x d1) and ``eta2`` (n x d2),
the single statistic at lag ``m >= 0`` measures dependence between

- direction 1: ``eta1[t]`` and ``eta2[t + m]``  (series 1 leading), and
- direction 2: ``eta1[t + m]`` and ``eta2[t]``  (series 2 leading),

over the N = n - m overlapping pairs; the joint statistic sums the single
statistics over lags 0..M.  Under independence the scaled statistics
``n * stat`` are stochastically bounded, which is what the residual
bootstrap (see :mod:`tsindep.bootstrap`) calibrates against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError
from .kernels import GramMatrix, KernelSpec, as_points, gram_matrix

_REFERENCE_MAX_N = 50


@dataclass(frozen=True)
class PairedResiduals:
    """Two residual series observed on a common time axis."""

    eta1: np.ndarray
    eta2: np.ndarray

    def __post_init__(self) -> None:
        e1 = as_points(self.eta1)
        e2 = as_points(self.eta2)
        if e1.shape[0] != e2.shape[0]:
            raise DataError(
                f"residual series have different lengths: {e1.shape[0]} vs {e2.shape[0]}"
            )
        object.__setattr__(self, "eta1", e1)
        object.__setattr__(self, "eta2", e2)

    @property
    def n(self) -> int:
        return self.eta1.shape[0]


@dataclass(frozen=True)
class LagConfig:
    """One HSIC test: a single lag ``m`` or all lags up to ``max_lag``.

    ``direction`` 1 pairs series-1 values at t with series-2 values at
    t + m; direction 2 is the reverse.  Exactly one of ``m`` / ``max_lag``
    must be given.
    """

    direction: int
    m: int | None = None
    max_lag: int | None = None

    def __post_init__(self) -> None:
        if self.direction not in (1, 2):
            raise ValueError("direction must be 1 or 2")
        if (self.m is None) == (self.max_lag is None):
            raise ValueError("set exactly one of m (single) or max_lag (joint)")
        lag = self.m if self.m is not None else self.max_lag
        if lag < 0:
            raise ValueError("lags must be nonnegative")

    @property
    def is_joint(self) -> bool:
        return self.max_lag is not None

    @property
    def lag(self) -> int:
        return self.max_lag if self.is_joint else self.m

    @property
    def label(self) -> str:
        family = "J" if self.is_joint else "S"
        return f"{family}{self.direction}({self.lag})"


def _gram_values(g) -> np.ndarray:
    if isinstance(g, GramMatrix):
        return g.values
    arr = np.asarray(g, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DataError("Gram matrix must be square")
    return arr


def hsic_v(K, L) -> float:
    """Biased (V-statistic) HSIC estimate from two Gram matrices.

    Equals trace(K H L H) / N^2 with H the centering matrix, evaluated
    through row / grand means so that H is never materialized:

        mean(K * L) + mean(K) mean(L) - 2 mean(rowmean(K) * rowmean(L))

    Nonnegative up to roundoff whenever both kernels are positive definite.
    """
    k = _gram_values(K)
    l = _gram_values(L)
    if k.shape != l.shape:
        raise DataError(f"Gram size mismatch: {k.shape} vs {l.shape}")
    if k.shape[0] < 2:
        raise DataError("need at least 2 points")
    row_k = k.mean(axis=1)
    row_l = l.mean(axis=1)
    return float(np.mean(k * l) + k.mean() * l.mean() - 2.0 * np.mean(row_k * row_l))


def hsic_v_reference(K, L) -> float:
    """Literal three-sum form of the HSIC V-statistic (test oracle).

    Materializes every term k_ij * l_qr of

        (1/N^2) sum_{ij} k_ij l_ij + (1/N^4) sum_{ijqr} k_ij l_qr
        - (2/N^3) sum_{ijq} k_ij l_iq

    so it is O(N^4) and limited to N <= 50.  Kept deliberately independent
    of the centered fast path in :func:`hsic_v`.
    """
    k = _gram_values(K)
    l = _gram_values(L)
    if k.shape != l.shape:
        raise DataError(f"Gram size mismatch: {k.shape} vs {l.shape}")
    n = k.shape[0]
    if n < 2:
        raise DataError("need at least 2 points")
    if n > _REFERENCE_MAX_N:
        raise DataError(f"reference estimator supports N <= {_REFERENCE_MAX_N}")
    term1 = (k * l).sum() / n**2
    term2 = (k[:, :, None, None] * l[None, None, :, :]).sum() / n**4
    term3 = 2.0 * (k[:, :, None] * l[:, None, :]).sum() / n**3
    return float(term1 + term2 - term3)


def _lagged_pair(res: PairedResiduals, m: int, direction: int):
    n = res.n
    if m < 0:
        raise DataError("lag must be nonnegative")
    if n - m < 2:
        raise DataError(f"lag m={m} leaves fewer than 2 pairs (n={n})")
    big = n - m
    if direction == 1:
        return res.eta1[:big], res.eta2[m:]
    if direction == 2:
        return res.eta1[m:], res.eta2[:big]
    raise ValueError("direction must be 1 or 2")


def single_stat(
    res: PairedResiduals,
    m: int,
    direction: int,
    kernel_k: KernelSpec,
    kernel_l: KernelSpec,
) -> float:
    """Single-lag HSIC statistic on the lag-aligned residual pairs.

    Both directions share one code path, so the two direction variants at
    m = 0 coincide bit for bit.
    """
    a, b = _lagged_pair(res, m, direction)
    k = gram_matrix(kernel_k, a).values
    l = gram_matrix(kernel_l, b).values
    return hsic_v(k, l)


def joint_stat(
    res: PairedResiduals,
    max_lag: int,
    direction: int,
    kernel_k: KernelSpec,
    kernel_l: KernelSpec,
) -> float:
    """Sum of single-lag statistics over m = 0..max_lag (ascending order)."""
    if res.n - max_lag < 2:
        raise DataError(f"max_lag {max_lag} infeasible for n={res.n}")
    g1 = gram_matrix(kernel_k, res.eta1).values
    g2 = gram_matrix(kernel_l, res.eta2).values
    return float(sum(single_from_grams(g1, g2, m, direction) for m in range(max_lag + 1)))


def scaled_stat(stat: float, n: int) -> float:
    """Scale a raw statistic by the full residual sample size n."""
    if n < 2:
        raise DataError("sample size must be at least 2")
    return float(n * stat)


def single_from_grams(g1: np.ndarray, g2: np.ndarray, m: int, direction: int) -> float:
    """Single-lag statistic from precomputed full n x n Gram matrices.

    ``g1[i, j] = k(eta1_i, eta1_j)`` and likewise ``g2``; the lagged pairing
    only selects a contiguous principal submatrix of each, so one Gram
    computation per series serves every lag.  Entry-identical to
    :func:`single_stat` on the same residuals.
    """
    n = g1.shape[0]
    big = n - m
    if big < 2:
        raise DataError(f"lag m={m} leaves fewer than 2 pairs (n={n})")
    if direction == 1:
        return hsic_v(g1[:big, :big], g2[m:, m:])
    if direction == 2:
        return hsic_v(g1[m:, m:], g2[:big, :big])
    raise ValueError("direction must be 1 or 2")


def stat_from_grams(g1: np.ndarray, g2: np.ndarray, cfg: LagConfig) -> float:
    """Raw single or joint statistic from full Gram matrices (see above)."""
    if cfg.is_joint:
        return float(
            sum(single_from_grams(g1, g2, m, cfg.direction) for m in range(cfg.max_lag + 1))
        )
    return single_from_grams(g1, g2, cfg.m, cfg.direction)
