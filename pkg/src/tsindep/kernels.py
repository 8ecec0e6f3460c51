"""Kernel functions and Gram matrices for the RKHS dependence measures.

Four stationary kernel families are supported.  With ``r = ||u - v||``
(Euclidean norm):

- ``gaussian``:             k(u, v) = exp(-r^2 / (2 sigma^2))
- ``laplace``:              k(u, v) = exp(-r / sigma)
- ``inverse_multiquadric``: k(u, v) = (beta + r)^(-alpha)
- ``fbm``:                  k(u, v) = (||u||^2h + ||v||^2h - r^2h) / 2

The first three are bounded, characteristic and translation invariant; the
fractional Brownian motion kernel is unbounded and is included for
completeness (it falls outside the regularity conditions the bootstrap
tests rely on, and the CLI warns when it is selected there).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError

FAMILIES = ("gaussian", "laplace", "inverse_multiquadric", "fbm")


@dataclass(frozen=True)
class KernelSpec:
    """Descriptor of one kernel family plus its parameters.

    Exactly the parameters of the declared family must be set: ``sigma``
    for gaussian/laplace, ``alpha`` and ``beta`` for inverse_multiquadric,
    ``hurst`` for fbm.
    """

    family: str
    sigma: float | None = None
    alpha: float | None = None
    beta: float | None = None
    hurst: float | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        required = {
            "gaussian": ("sigma",),
            "laplace": ("sigma",),
            "inverse_multiquadric": ("alpha", "beta"),
            "fbm": ("hurst",),
        }[self.family]
        for name in ("sigma", "alpha", "beta", "hurst"):
            value = getattr(self, name)
            if name in required:
                if value is None or not np.isfinite(value):
                    raise ValueError(f"{self.family} kernel requires finite {name}")
            elif value is not None:
                raise ValueError(f"{self.family} kernel does not take {name}")
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.beta is not None and self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.hurst is not None and not 0.0 < self.hurst < 1.0:
            raise ValueError("hurst must lie in (0, 1)")

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "KernelSpec":
        return cls("gaussian", sigma=float(sigma))

    @classmethod
    def laplace(cls, sigma: float = 1.0) -> "KernelSpec":
        return cls("laplace", sigma=float(sigma))

    @classmethod
    def inverse_multiquadric(cls, alpha: float = 1.0, beta: float = 1.0) -> "KernelSpec":
        return cls("inverse_multiquadric", alpha=float(alpha), beta=float(beta))

    @classmethod
    def fbm(cls, hurst: float = 0.5) -> "KernelSpec":
        return cls("fbm", hurst=float(hurst))

    def diagonal_value(self) -> float | None:
        """k(u, u), which is constant for all families except fbm."""
        if self.family in ("gaussian", "laplace"):
            return 1.0
        if self.family == "inverse_multiquadric":
            return float(self.beta ** -self.alpha)
        return None


@dataclass(frozen=True)
class GramMatrix:
    """An N x N matrix of kernel evaluations over all sample pairs."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("Gram matrix must be square")

    @property
    def n_points(self) -> int:
        return self.values.shape[0]


def as_points(x, min_rows: int = 1) -> np.ndarray:
    """Coerce ``x`` to a finite n x d float matrix (1-D input becomes n x 1)."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise DataError(f"expected an n x d matrix, got ndim={pts.ndim}")
    if pts.shape[0] < min_rows:
        raise DataError(f"need at least {min_rows} rows, got {pts.shape[0]}")
    if not np.all(np.isfinite(pts)):
        raise DataError("non-finite values in input points")
    return pts


def eval_kernel(spec: KernelSpec, u, v) -> float:
    """Evaluate k(u, v) for a single pair of points."""
    uu = np.asarray(u, dtype=float).ravel()
    vv = np.asarray(v, dtype=float).ravel()
    if uu.shape != vv.shape:
        raise DataError(f"dimension mismatch: {uu.shape} vs {vv.shape}")
    if not (np.all(np.isfinite(uu)) and np.all(np.isfinite(vv))):
        raise DataError("non-finite input to kernel evaluation")
    diff = uu - vv
    sq = float(diff @ diff)
    if spec.family == "gaussian":
        return float(np.exp(-sq / (2.0 * spec.sigma**2)))
    if spec.family == "laplace":
        return float(np.exp(-np.sqrt(sq) / spec.sigma))
    if spec.family == "inverse_multiquadric":
        return float((spec.beta + np.sqrt(sq)) ** -spec.alpha)
    h = spec.hurst
    nu = float(uu @ uu) ** h
    nv = float(vv @ vv) ** h
    return 0.5 * (nu + nv - sq**h)


def _pairwise_sq_dists(pts: np.ndarray) -> np.ndarray:
    # Explicit differences rather than the ||u||^2 + ||v||^2 - 2<u,v>
    # shortcut: this keeps every entry exact and nonnegative.
    diff = pts[:, None, :] - pts[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def gram_matrix(spec: KernelSpec, points) -> GramMatrix:
    """Gram matrix of ``points`` (rows are observations) under ``spec``.

    The upper triangle is computed and mirrored, so the result is exactly
    symmetric regardless of floating-point non-associativity.
    """
    pts = as_points(points)
    sq = _pairwise_sq_dists(pts)
    if spec.family == "gaussian":
        vals = np.exp(-sq / (2.0 * spec.sigma**2))
    elif spec.family == "laplace":
        vals = np.exp(-np.sqrt(sq) / spec.sigma)
    elif spec.family == "inverse_multiquadric":
        vals = (spec.beta + np.sqrt(sq)) ** -spec.alpha
    else:
        norms = np.einsum("ij,ij->i", pts, pts) ** spec.hurst
        vals = 0.5 * (norms[:, None] + norms[None, :] - sq**spec.hurst)
    upper = np.triu(vals)
    vals = upper + np.triu(vals, 1).T
    return GramMatrix(values=vals)


def median_heuristic_sigma(points) -> float:
    """Bandwidth heuristic: median pairwise distance divided by sqrt(2).

    Offered as an option for real data; the tests in this package default
    to a fixed ``sigma = 1``.
    """
    pts = as_points(points, min_rows=2)
    sq = _pairwise_sq_dists(pts)
    dists = np.sqrt(sq[np.triu_indices(pts.shape[0], k=1)])
    med = float(np.median(dists))
    if med <= 0.0:
        raise DataError("median pairwise distance is zero; cannot set bandwidth")
    return med / np.sqrt(2.0)
