"""Admissible connections, the spinor covariant derivative and the B tensor.

The admissible connections on TM are C-linear metric connections that agree
with Levi-Civita on the anti-self-dual part.  In the orthonormal frame they
are parametrised by a real 1-form t:

    theta~_k = R_{b_k} + s_k L_i,    s_k = <a_k, i> + t_k

where theta_k = L_{a_k} + R_{b_k} is the Levi-Civita frame connection.  The
induced derivative of a self-dual spinor with label q is

    p_k = e_k(q) + s_k i q - q a_k

and (B phi)_{e_k} e_l = p_k e_l.  Every quantity is in frame components and
indexed by the frame direction k on axis 4.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fiber import (
    BASIS, I_UNIT, REFERENCE_AC, AcStructure, left_matrix, quat_mul, quat_inner, right_matrix, sigma,
)
from .geometry import LCConnection, gradient


class ConsistencyFailure(RuntimeError):
    """The two routes to B disagree beyond truncation error: a convention bug."""


# residual allowance for the two B routes, in units of h^4
CONSISTENCY_CONSTANT = 2.0e3


@dataclass
class SDSpinorField:
    q: np.ndarray
    ac: AcStructure = REFERENCE_AC

    @property
    def norm(self) -> np.ndarray:
        return np.linalg.norm(self.q, axis=-1)

    def sigma(self) -> np.ndarray:
        """Pointwise squaring map, frame components."""
        return sigma(self.q, self.ac)


@dataclass
class TildeConnection:
    theta: np.ndarray  # [..., k, a, b]
    s: np.ndarray      # [..., k]


@dataclass
class BTensorField:
    B: np.ndarray       # [..., k, m, l] = m-th component of (B)_{e_k} e_l
    p: np.ndarray       # [..., k, 4] labels of nabla-bar_{e_k} phi
    consistency_residual: float


@dataclass
class BSplit:
    alt: np.ndarray
    sym0: np.ndarray
    dirac: np.ndarray   # [..., 4]

    @property
    def trace_part(self) -> np.ndarray:
        return trace_tensor(self.dirac)


def _as_q(phi) -> np.ndarray:
    return phi.q if isinstance(phi, SDSpinorField) else np.asarray(phi, dtype=float)


def zero_param(lc: LCConnection) -> np.ndarray:
    return np.zeros(lc.grid.shape + (4,))


def tilde_connection(lc: LCConnection, t=None) -> TildeConnection:
    if t is None:
        t = zero_param(lc)
    s = lc.a[..., 1] + np.asarray(t, dtype=float)
    theta = right_matrix(lc.b) + s[..., None, None] * left_matrix(I_UNIT)
    return TildeConnection(theta, s)


def cov_deriv_parts(phi, lc: LCConnection) -> tuple[np.ndarray, np.ndarray]:
    """Split p_k(t) = c_k + t_k (i q); returns (c, i q)."""
    q = _as_q(phi)
    iq = quat_mul(I_UNIT, q)
    dq = lc.frame_derivative(q)                     # [..., k, 4]
    s0 = lc.a[..., 1]                               # [..., k]
    c = dq + s0[..., None] * iq[..., None, :] - quat_mul(q[..., None, :], lc.a)
    return c, iq


def spinor_cov_deriv(phi, lc: LCConnection, t=None) -> np.ndarray:
    c, iq = cov_deriv_parts(phi, lc)
    if t is None:
        return c
    return c + np.asarray(t, dtype=float)[..., None] * iq[..., None, :]


def eqcomp_residual_field(phi, lc: LCConnection, t, v: np.ndarray) -> np.ndarray:
    """Frame components of nabla~_{e_k}(phi v) - phi(nabla_{e_k} v) - (nabla-bar_{e_k} phi)(v).

    Computed in coordinates: the left side differentiates the coordinate field
    phi(v) directly and uses the Christoffel symbols for nabla v, so it shares
    no product-rule algebra with the label formula for nabla-bar.
    ``v`` holds coordinate components, shape [..., 4].
    """
    q = _as_q(phi)
    if t is None:
        t = zero_param(lc)
    h = lc.grid.h
    E, C = lc.frame, lc.coframe
    tilde = tilde_connection(lc, t)
    phi_coord = np.einsum("...rk,...kl,...lm->...rm", E, left_matrix(q), C, optimize=True)
    w = np.einsum("...rm,...m->...r", phi_coord, v)
    dw = gradient(w, h)                                             # [..., mu, r]
    dE = gradient(E, h)                                             # [..., mu, r, k]
    theta_coord = np.einsum("...km,...kab->...mab", C, tilde.theta)
    frame_w = np.einsum("...kr,...r->...k", C, w)
    conn_w = (np.einsum("...rk,...mkl,...l->...mr", E, theta_coord, frame_w, optimize=True)
              - np.einsum("...mrk,...k->...mr", dE, frame_w))
    cov_tilde = dw + conn_w
    dv = gradient(v, h)
    cov_v = dv + np.einsum("...rmn,...n->...mr", lc.gamma, v)
    lhs_coord = cov_tilde - np.einsum("...rs,...ms->...mr", phi_coord, cov_v)
    lhs = np.einsum("...mk,...mr->...kr", E, lhs_coord)             # along e_k, coordinates
    lhs_frame = np.einsum("...jr,...kr->...kj", C, lhs)
    p = spinor_cov_deriv(q, lc, t)
    v_frame = np.einsum("...kr,...r->...k", C, v)
    return lhs_frame - quat_mul(p, v_frame[..., None, :])


def eqcomp_residual(phi, lc: LCConnection, t, v: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(eqcomp_residual_field(phi, lc, t, v), axis=-1)))


def b_tensor(phi, lc: LCConnection, t=None, *, consistency_constant: float = CONSISTENCY_CONSTANT) -> BTensorField:
    """B phi from the derivative labels, cross-checked against the direct route.

    Raises ConsistencyFailure when the routes differ by more than
    consistency_constant * h^4.
    """
    q = _as_q(phi)
    if t is None:
        t = zero_param(lc)
    p = spinor_cov_deriv(q, lc, t)
    B = left_matrix(p)
    residual = 0.0
    for l in range(4):
        frame_vec = lc.frame[..., :, l]
        direct = eqcomp_residual_field(q, lc, t, frame_vec)
        residual = max(residual, float(np.max(np.abs(direct))))
    if residual > consistency_constant * lc.grid.h**4:
        raise ConsistencyFailure(
            f"direct and evaluation routes to B differ by {residual:.3e} "
            f"(allowed {consistency_constant * lc.grid.h**4:.3e})"
        )
    return BTensorField(B, p, residual)


def b_from_labels(p: np.ndarray) -> np.ndarray:
    return left_matrix(p)


def trace_tensor(d: np.ndarray) -> np.ndarray:
    """g (x) d/4 as a [..., k, m, l] tensor."""
    d = np.asarray(d, dtype=float)
    return 0.25 * np.eye(4)[:, None, :] * d[..., None, :, None]


def split_b(B: np.ndarray) -> BSplit:
    """Alt + Sym0 + g (x) D/4 decomposition in an orthonormal frame."""
    B = np.asarray(B, dtype=float)
    swapped = np.swapaxes(B, -3, -1)             # B[l, m, k]
    alt = 0.5 * (B - swapped)
    dirac = np.einsum("...kmk->...m", B)
    sym0 = 0.5 * (B + swapped) - trace_tensor(dirac)
    return BSplit(alt, sym0, dirac)


def dirac_from_labels(p: np.ndarray) -> np.ndarray:
    """D = sum_k e_k . nabla-bar_{e_k} phi = sum_k p_k e_k."""
    return np.sum(quat_mul(p, BASIS), axis=-2)


def dirac(phi, lc: LCConnection, t=None) -> np.ndarray:
    return dirac_from_labels(spinor_cov_deriv(phi, lc, t))


def pairing_form(phi, lc: LCConnection, t=None) -> np.ndarray:
    """lambda_k = <nabla-bar_{e_k} phi, i phi>."""
    q = _as_q(phi)
    p = spinor_cov_deriv(q, lc, t)
    return quat_inner(p, quat_mul(I_UNIT, q)[..., None, :])


def tensor_inner(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.sum(x * y, axis=(-3, -2, -1))


def sigma_coordinates(phi, lc: LCConnection) -> np.ndarray:
    """The squaring map as a coordinate 2-form field sigma_{mu nu}."""
    q = _as_q(phi)
    ac = phi.ac if isinstance(phi, SDSpinorField) else REFERENCE_AC
    frame_form = sigma(q, ac)
    C = lc.coframe
    return np.einsum("...km,...kl,...ln->...mn", C, frame_form, C, optimize=True)
