"""Fields on a periodic 4-torus chart and their Levi-Civita data.

All field arrays have shape (n, n, n, n, *components).  Derivatives are
fourth-order central differences with periodic wrap-around.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fiber import so4_split


class NotPositiveDefinite(ValueError):
    def __init__(self, point):
        self.point = tuple(int(i) for i in point)
        super().__init__(f"metric is not positive definite at grid point {self.point}")


@dataclass(frozen=True)
class Grid:
    n: int

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"grid needs n >= 4 points per axis, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.n,) * 4

    def coords(self) -> np.ndarray:
        """Coordinate field x^mu, shape (n, n, n, n, 4)."""
        axis = np.arange(self.n) * self.h
        return np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1)


def partial(field: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order periodic central difference along grid axis 0..3."""
    f = np.asarray(field)
    return (
        -np.roll(f, -2, axis=axis)
        + 8.0 * np.roll(f, -1, axis=axis)
        - 8.0 * np.roll(f, 1, axis=axis)
        + np.roll(f, 2, axis=axis)
    ) / (12.0 * h)


def gradient(field: np.ndarray, h: float) -> np.ndarray:
    """All four partials; the derivative index is appended as the LAST-but-components axis.

    Returns shape (n, n, n, n, 4, *components) with [..., mu, ...] = d_mu field.
    """
    return np.stack([partial(field, mu, h) for mu in range(4)], axis=4)


class MetricField:
    """Symmetric positive-definite metric g_{mu nu}(x) on a grid."""

    def __init__(self, grid: Grid, g: np.ndarray, *, symmetry_tol: float = 1e-12):
        g = np.asarray(g, dtype=float)
        if g.shape != grid.shape + (4, 4):
            raise ValueError(f"metric array has shape {g.shape}, expected {grid.shape + (4, 4)}")
        if np.max(np.abs(g - np.swapaxes(g, -1, -2))) > symmetry_tol:
            raise ValueError("metric is not symmetric")
        self.grid = grid
        self.g = g
        # fail fast on degenerate input
        self.cholesky

    @cached_property
    def cholesky(self) -> np.ndarray:
        flat = self.g.reshape(-1, 4, 4)
        try:
            return np.linalg.cholesky(self.g)
        except np.linalg.LinAlgError:
            for idx, m in enumerate(flat):
                try:
                    np.linalg.cholesky(m)
                except np.linalg.LinAlgError:
                    raise NotPositiveDefinite(np.unravel_index(idx, self.grid.shape)) from None
            raise

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.g)


def christoffels(metric: MetricField) -> np.ndarray:
    """Gamma^lam_{mu nu} as an array [..., lam, mu, nu]."""
    dg = gradient(metric.g, metric.grid.h)  # [..., rho(deriv), a, b]
    # first-kind symbols Gamma_{rho mu nu} = (d_mu g_{rho nu} + d_nu g_{rho mu} - d_rho g_{mu nu}) / 2
    first = 0.5 * (
        np.einsum("...mrn->...rmn", dg)
        + np.einsum("...nrm->...rmn", dg)
        - dg
    )
    gamma = np.einsum("...lr,...rmn->...lmn", metric.inverse, first)
    # symmetric in (mu, nu) up to rounding; enforce exactly
    return 0.5 * (gamma + np.swapaxes(gamma, -1, -2))


def orthonormal_frame(metric: MetricField) -> np.ndarray:
    """Gram-Schmidt frame in coordinate order, as columns: E[..., mu, k] = e_k^mu.

    With g = L L^T (Cholesky), E = L^{-T} is upper triangular with positive
    diagonal, which is exactly Gram-Schmidt applied to d_0, d_1, d_2, d_3.
    """
    L = metric.cholesky
    eye = np.broadcast_to(np.eye(4), L.shape)
    linv = np.linalg.solve(L, eye)
    return np.swapaxes(linv, -1, -2)


@dataclass
class LCConnection:
    """Levi-Civita connection of a metric expressed in its orthonormal frame.

    theta[..., k, :, :] is the so(4) matrix of nabla_{e_k} in frame
    components (nabla_{e_k} e_l = theta[k, m, l] e_m); a and b are its
    left/right imaginary-quaternion parts, theta_k = L_{a_k} + R_{b_k}.
    """

    metric: MetricField
    gamma: np.ndarray
    frame: np.ndarray
    coframe: np.ndarray
    theta: np.ndarray
    a: np.ndarray
    b: np.ndarray
    compatibility_residual: float

    @property
    def grid(self) -> Grid:
        return self.metric.grid

    @classmethod
    def from_metric(cls, metric: MetricField) -> "LCConnection":
        gamma = christoffels(metric)
        frame = orthonormal_frame(metric)
        coframe = np.linalg.inv(frame)
        theta_coord, raw_sym = frame_connection(metric, gamma, frame, coframe)
        theta = np.einsum("...mk,...mab->...kab", frame, theta_coord)
        a, b = so4_split(theta)
        return cls(metric, gamma, frame, coframe, theta, a, b, raw_sym)

    def frame_derivative(self, field: np.ndarray) -> np.ndarray:
        """Directional derivatives e_k(field), k on axis 4 of the result."""
        return np.einsum("abcdmk,abcdm...->abcdk...", self.frame, gradient(field, self.grid.h))


def frame_connection(
    metric: MetricField, gamma: np.ndarray, frame: np.ndarray, coframe: np.ndarray | None = None
) -> tuple[np.ndarray, float]:
    """Coordinate-indexed frame connection form Theta_mu in so(4).

    Theta_mu = E^{-1} (d_mu E + Gamma_mu E).  Metric compatibility makes it
    skew only up to the truncation error of the two difference routes; the
    skew part is returned together with the max size of the discarded
    symmetric part (the discrete nabla g residual).
    """
    if coframe is None:
        coframe = np.linalg.inv(frame)
    h = metric.grid.h
    dframe = gradient(frame, h)  # [..., mu, rho, k]
    gamma_e = np.einsum("...rmn,...nk->...mrk", gamma, frame)
    raw = np.einsum("...kr,...mrl->...mkl", coframe, dframe + gamma_e)
    sym = 0.5 * (raw + np.swapaxes(raw, -1, -2))
    return raw - sym, float(np.max(np.abs(sym)))


def exterior_derivative(alpha: np.ndarray, k: int, h: float) -> np.ndarray:
    """Discrete d on a k-form given by its full antisymmetric coordinate components.

    (d alpha)_{mu0..muk} = sum_i (-1)^i d_{mu_i} alpha_{mu0..^mu_i..muk}.
    """
    if not 0 <= k <= 3:
        raise ValueError(f"exterior derivative defined for k <= 3, got {k}")
    alpha = np.asarray(alpha, dtype=float)
    grad = gradient(alpha, h)  # derivative index at position 4, then k form indices
    out = np.zeros_like(grad)
    for i in range(k + 1):
        # move the derivative index into slot i of the (k+1) form indices
        out += (-1) ** i * np.moveaxis(grad, 4, 4 + i)
    return out
