"""Pointwise minimization of the parts of B over the admissible connections.

B depends on the connection parameter t only algebraically,

    B(t)_{k} = L_{c_k} + t_k L_{i q},

so each squared part norm |P B(t)|^2 is a quadratic in t at every grid point
and the global minimizer is the pointwise one.  The four minimizers (full
tensor, Alt, Sym0, Dirac) are compared for collinearity and coincidence,
and coincidence is compared against closedness of sigma(phi).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .fiber import left_matrix
from .geometry import LCConnection, exterior_derivative, partial
from .spinc import (
    SDSpinorField, cov_deriv_parts, pairing_form, sigma_coordinates, split_b, tensor_inner, trace_tensor,
)

COMPONENTS = ("full", "alt", "sym0", "dirac")
CONDITION_LIMIT = 1e8
# Hessians below this fraction of the largest one on the grid count as vanishing
ABSOLUTE_FLOOR = 1e-12


class DegenerateEverywhere(ValueError):
    """No grid point admits a well-posed minimizer (phi vanishes identically)."""


class Collapsed(ValueError):
    """All minimizers coincide at every usable point, so no line is defined."""

    def __init__(self, message: str, points: int, max_spread: float):
        self.points = points
        self.max_spread = max_spread
        super().__init__(message)


def component_part(B: np.ndarray, component: str) -> np.ndarray:
    if component == "full":
        return B
    split = split_b(B)
    if component == "alt":
        return split.alt
    if component == "sym0":
        return split.sym0
    if component == "dirac":
        return trace_tensor(split.dirac)
    raise ValueError(f"unknown component {component!r}; expected one of {COMPONENTS}")


@dataclass
class Minimizer:
    component: str
    t: np.ndarray            # [..., 4], zero where degenerate
    residual: np.ndarray     # minimum value of |P B(t)|^2
    degenerate: np.ndarray   # bool
    hessian: np.ndarray      # [..., 4, 4]


def _parts(B: np.ndarray, components) -> dict[str, np.ndarray]:
    split = split_b(B) if set(components) - {"full"} else None
    table = {}
    for comp in components:
        if comp == "full":
            table[comp] = B
        elif comp == "alt":
            table[comp] = split.alt
        elif comp == "sym0":
            table[comp] = split.sym0
        else:
            table[comp] = trace_tensor(split.dirac)
    return table


def quadratic_data(c: np.ndarray, iq: np.ndarray, components=COMPONENTS) -> dict:
    """Coefficients of t -> |P B(t)|^2 = t.G.t + 2 r.t + k0 for each requested part P.

    Returns {component: (G, r, k0)} with G [..., 4, 4], r [..., 4], k0 [...].
    """
    B0 = left_matrix(c)
    L_iq = left_matrix(iq)
    base = _parts(B0, components)
    dirs = []
    for j in range(4):
        M = np.zeros(B0.shape)
        M[..., j, :, :] = L_iq
        dirs.append(_parts(M, components))
    out = {}
    for comp in components:
        G = np.empty(B0.shape[:-3] + (4, 4))
        r = np.empty(B0.shape[:-3] + (4,))
        for j in range(4):
            r[..., j] = tensor_inner(dirs[j][comp], base[comp])
            for k in range(j, 4):
                G[..., j, k] = G[..., k, j] = tensor_inner(dirs[j][comp], dirs[k][comp])
        out[comp] = (G, r, tensor_inner(base[comp], base[comp]))
    return out


def _solve(G: np.ndarray, r: np.ndarray, k0: np.ndarray, component: str) -> Minimizer:
    eig = np.linalg.eigvalsh(G)
    lam_min, lam_max = eig[..., 0], eig[..., -1]
    floor = ABSOLUTE_FLOOR * float(np.max(lam_max)) if np.max(lam_max) > 0 else np.inf
    degenerate = (lam_max <= floor) | (lam_min <= lam_max / CONDITION_LIMIT)
    if np.all(degenerate):
        raise DegenerateEverywhere(f"{component}: the quadratic in t is degenerate at every grid point")
    t = np.zeros(r.shape)
    ok = ~degenerate
    t[ok] = np.linalg.solve(G[ok], -r[ok][..., None])[..., 0]
    residual = np.einsum("...j,...jk,...k->...", t, G, t, optimize=True) + 2.0 * np.sum(r * t, axis=-1) + k0
    return Minimizer(component, t, residual, degenerate, G)


def minimize_component(phi, lc: LCConnection, component: str) -> Minimizer:
    """Solve the normal equations of the pointwise affine least-squares problem."""
    if component not in COMPONENTS:
        raise ValueError(f"unknown component {component!r}; expected one of {COMPONENTS}")
    c, iq = cov_deriv_parts(phi, lc)
    return _solve(*quadratic_data(c, iq, (component,))[component], component)


def minimize_all(phi, lc: LCConnection) -> dict[str, Minimizer]:
    c, iq = cov_deriv_parts(phi, lc)
    data = quadratic_data(c, iq)
    return {comp: _solve(*data[comp], comp) for comp in COMPONENTS}


def full_minimizer_closed_form(phi, lc: LCConnection) -> np.ndarray:
    """t*_k = -<c_k, i q> / |q|^2 (the full norm decouples per direction)."""
    c, iq = cov_deriv_parts(phi, lc)
    return -np.sum(c * iq[..., None, :], axis=-1) / np.sum(iq * iq, axis=-1)[..., None]


def pairing_at_minimizer(phi, lc: LCConnection, offset=None, full: Minimizer | None = None) -> float:
    """max |<nabla-bar phi, i phi>| at the full-norm minimizer, optionally shifted by ``offset``."""
    if full is None:
        full = minimize_component(phi, lc, "full")
    t = full.t if offset is None else full.t + np.asarray(offset, dtype=float)
    lam = pairing_form(phi, lc, t)
    return float(np.max(np.abs(lam[~full.degenerate])))


# -- collinearity ----------------------------------------------------------------

@dataclass
class LineReport:
    components: tuple[str, ...]
    direction: np.ndarray          # [..., 4] unit direction of the fitted line
    residual: np.ndarray           # max distance of a minimizer to the line
    spread: np.ndarray             # max pairwise distance between minimizers
    ratios: np.ndarray             # [..., C] affine coordinates, reference pair at 0 and 1
    valid: np.ndarray              # nondegenerate and not coincident
    coincident: np.ndarray
    reference: tuple[str, str]
    stats: dict = field(default_factory=dict)

    @property
    def max_relative_residual(self) -> float:
        if not np.any(self.valid):
            return 0.0
        return float(np.max(self.residual[self.valid] / self.spread[self.valid]))

    def ratio_mean(self) -> dict[str, float]:
        return {c: float(np.mean(self.ratios[..., i][self.valid])) for i, c in enumerate(self.components)}

    def ratio_std(self) -> dict[str, float]:
        return {c: float(np.std(self.ratios[..., i][self.valid])) for i, c in enumerate(self.components)}


def _stack(minimizers) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    names = tuple(m.component for m in minimizers)
    points = np.stack([m.t for m in minimizers], axis=-2)
    degenerate = np.any(np.stack([m.degenerate for m in minimizers], axis=-1), axis=-1)
    return names, points, degenerate


def collinearity_report(minimizers, *, coincidence_tol: float = 1e-9,
                        reference: tuple[str, str] = ("full", "dirac")) -> LineReport:
    """Fit the principal axis through the component minimizers at every point.

    Ratios are signed coordinates along the line with ``reference[0]`` at 0 and
    ``reference[1]`` at 1.  Raises Collapsed when every usable point has all
    minimizers within ``coincidence_tol`` of each other.
    """
    minimizers = list(minimizers)
    names, points, degenerate = _stack(minimizers)
    if len(set(names)) < 3:
        raise ValueError("collinearity needs at least 3 distinct components")
    if not set(reference) <= set(names):
        reference = (names[0], names[1])
    i0, i1 = names.index(reference[0]), names.index(reference[1])

    centred = points - points.mean(axis=-2, keepdims=True)
    _, _, vt = np.linalg.svd(centred)
    direction = vt[..., 0, :]
    along = np.einsum("...ci,...i->...c", centred, direction)
    off_line = centred - along[..., None] * direction[..., None, :]
    residual = np.max(np.linalg.norm(off_line, axis=-1), axis=-1)
    diffs = points[..., :, None, :] - points[..., None, :, :]
    spread = np.max(np.linalg.norm(diffs, axis=-1), axis=(-2, -1))

    coincident = (spread < coincidence_tol) & ~degenerate
    valid = ~degenerate & ~coincident
    denom = along[..., i1] - along[..., i0]
    safe = np.where(valid, denom, 1.0)
    ratios = (along - along[..., i0, None]) / safe[..., None]
    ratios = np.where(valid[..., None], ratios, np.nan)

    usable = int(np.count_nonzero(~degenerate))
    if usable and not np.any(valid):
        raise Collapsed(
            f"all {len(names)} minimizers coincide at every one of {usable} usable points",
            usable, float(np.max(spread[~degenerate])),
        )
    report = LineReport(names, direction, residual, spread, ratios, valid, coincident, reference)
    report.stats = {
        "usable_points": usable,
        "valid_points": int(np.count_nonzero(valid)),
        "coincident_points": int(np.count_nonzero(coincident)),
        "max_relative_residual": report.max_relative_residual,
        "ratio_mean": report.ratio_mean(),
        "ratio_std": report.ratio_std(),
    }
    return report


def coincidence_violations(minimizers, pair_tol: float = 1e-9, all_tol: float = 1e-8) -> int:
    """Points where two minimizers coincide within pair_tol but not all within all_tol."""
    _, points, degenerate = _stack(minimizers)
    diffs = np.linalg.norm(points[..., :, None, :] - points[..., None, :, :], axis=-1)
    count = points.shape[-2]
    upper = np.triu_indices(count, 1)
    pairs = diffs[..., upper[0], upper[1]]
    some = np.any(pairs < pair_tol, axis=-1)
    all_close = np.max(pairs, axis=-1) < all_tol
    return int(np.count_nonzero(some & ~all_close & ~degenerate))


def max_discrepancy(minimizers) -> float:
    """max over usable points and component pairs of |t*_c1 - t*_c2|."""
    _, points, degenerate = _stack(minimizers)
    if np.all(degenerate):
        raise DegenerateEverywhere("no usable points")
    worst = 0.0
    for a, b in itertools.combinations(range(points.shape[-2]), 2):
        d = np.linalg.norm(points[..., a, :] - points[..., b, :], axis=-1)
        worst = max(worst, float(np.max(d[~degenerate])))
    return worst


# -- Alt symmetry ------------------------------------------------------------------

def alt_symmetry_check(phi, lc: LCConnection, t=None) -> float:
    """Compare (nabla-bar_{e_k} phi)(e_l) - (nabla-bar_{e_l} phi)(e_k) with 2 Alt B.

    Both are the same tensor computed two ways; returns the max difference.
    """
    from .spinc import spinor_cov_deriv

    p = spinor_cov_deriv(phi, lc, t)
    B = left_matrix(p)
    direct = B - np.swapaxes(B, -3, -1)
    return float(np.max(np.abs(direct - 2.0 * split_b(B).alt)))


# -- detection ----------------------------------------------------------------------

@dataclass
class DetectionReport:
    dsigma_max: float
    min_norm: float
    discrepancy: float
    tol_d: float
    tol_q: float
    tol_m: float
    symplectic: bool
    criterion: bool

    @property
    def agree(self) -> bool:
        return self.symplectic == self.criterion

    @property
    def outcome(self) -> str:
        return "consistent" if self.agree else "InconsistentVerdict"


# default tolerance constants, in units of h^4 times the field scale
DSIGMA_CONSTANT = 10.0
DISCREPANCY_CONSTANT = 10.0
DEFAULT_TOL_Q = 1e-3
# keeps exactly representable cases (constant fields) from a zero tolerance
ROUNDOFF_FLOOR = 1e-10


def detect(phi, lc: LCConnection, *, tol_d: float | None = None, tol_m: float | None = None,
           tol_q: float = DEFAULT_TOL_Q) -> DetectionReport:
    """Direct closedness test of sigma(phi) next to the simultaneous-minimizer criterion."""
    q = phi.q if isinstance(phi, SDSpinorField) else np.asarray(phi, dtype=float)
    h = lc.grid.h
    sig = sigma_coordinates(phi, lc)
    dsig = exterior_derivative(sig, 2, h)
    dsigma_max = float(np.max(np.abs(dsig)))
    min_norm = float(np.min(np.linalg.norm(q, axis=-1)))
    scale_d, scale_m = tolerance_scales(phi, lc, tol_q)
    if tol_d is None:
        tol_d = DSIGMA_CONSTANT * h**4 * scale_d + ROUNDOFF_FLOOR
    if tol_m is None:
        tol_m = DISCREPANCY_CONSTANT * h**4 * scale_m + ROUNDOFF_FLOOR
    minimizers = minimize_all(phi, lc)
    discrepancy = max_discrepancy(minimizers.values())
    symplectic = dsigma_max < tol_d and min_norm > tol_q
    criterion = discrepancy < tol_m
    return DetectionReport(dsigma_max, min_norm, discrepancy, tol_d, tol_q, tol_m, symplectic, criterion)


def _fifth_derivative_size(field: np.ndarray, h: float) -> np.ndarray:
    """Pointwise sum over axes of |d^5 f / dx_mu^5|, summed over components."""
    total = np.zeros(field.shape[:4])
    comp_axes = tuple(range(4, field.ndim))
    for mu in range(4):
        d = field
        for _ in range(5):
            d = partial(d, mu, h)
        total += np.sum(np.abs(d), axis=comp_axes) if comp_axes else np.abs(d)
    return total


def tolerance_scales(phi, lc: LCConnection, tol_q: float = DEFAULT_TOL_Q) -> tuple[float, float]:
    """Field scales multiplying h^4 in the detection tolerances.

    A fourth-order first derivative errs by about h^4 |f^(5)| / 30.  The
    closedness scale uses sigma itself; the minimizer scale uses the
    relative fifth derivative of q plus that of the metric.
    """
    q = phi.q if isinstance(phi, SDSpinorField) else np.asarray(phi, dtype=float)
    h = lc.grid.h
    sig = sigma_coordinates(phi, lc)
    scale_d = float(np.max(_fifth_derivative_size(sig, h))) / 30.0
    qnorm = np.maximum(np.linalg.norm(q, axis=-1), tol_q)
    q_part = float(np.max(_fifth_derivative_size(q, h) / qnorm))
    g = lc.metric.g
    ginv_norm = np.linalg.norm(lc.metric.inverse, ord=2, axis=(-2, -1))
    g_part = float(np.max(_fifth_derivative_size(g, h) * ginv_norm))
    scale_m = (q_part + g_part) / 30.0
    return scale_d, scale_m
