"""Single-fiber algebra on the quaternionic model of a 4-dimensional tangent space.

The tangent fiber is identified with H via the orthonormal basis
e0=1, e1=i, e2=j, e3=k (orientation e0^e1^e2^e3 positive).  A self-dual
spinor is a quaternion label q acting on tangent vectors by left
multiplication, v -> q*v.  Clifford multiplication is evaluation of that
endomorphism and the squaring map is a quarter of the pulled-back
fundamental form.

Every function broadcasts over leading axes: quaternions are arrays with a
trailing axis of length 4, 2-forms and endomorphisms have trailing shape (4, 4).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I_UNIT = np.array([0.0, 1.0, 0.0, 0.0])
J_UNIT = np.array([0.0, 0.0, 1.0, 0.0])
K_UNIT = np.array([0.0, 0.0, 0.0, 1.0])
BASIS = np.eye(4)

# Sign in the W- -> W+ half of Clifford multiplication, v.w = -(w * conj(v)),
# fixed so that v.(v.phi) = -|v|^2 phi.
CLIFFORD_MINUS_SIGN = -1.0


class NotSDConformal(ValueError):
    """Matrix is not a non-negative multiple of a self-dual rotation."""


class NotUnitSD(ValueError):
    """2-form is not self-dual of length sqrt(2)."""


def _levi_civita() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inversions = sum(perm[a] > perm[b] for a in range(4) for b in range(a + 1, 4))
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


EPSILON = _levi_civita()


# -- quaternions -----------------------------------------------------------

def quat_mul(p, q) -> np.ndarray:
    """Hamilton product p*q, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def quat_conj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_norm(q) -> np.ndarray:
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def quat_inner(p, q) -> np.ndarray:
    return np.sum(np.asarray(p, dtype=float) * np.asarray(q, dtype=float), axis=-1)


def left_matrix(q) -> np.ndarray:
    """Matrix of v -> q*v in the basis (1, i, j, k)."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    rows = [
        [w, -x, -y, -z],
        [x, w, -z, y],
        [y, z, w, -x],
        [z, -y, x, w],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def right_matrix(q) -> np.ndarray:
    """Matrix of v -> v*q in the basis (1, i, j, k)."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    rows = [
        [w, -x, -y, -z],
        [x, w, z, -y],
        [y, -z, w, x],
        [z, y, -x, w],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


_LEFT_BASIS = left_matrix(BASIS)    # (4, 4, 4): L_{e_m}
_RIGHT_BASIS = right_matrix(BASIS)  # (4, 4, 4): R_{e_m}


def left_part(m) -> np.ndarray:
    """Quaternion q of the orthogonal projection of a 4x4 matrix onto {L_q}."""
    return np.einsum("...ab,mab->...m", np.asarray(m, dtype=float), _LEFT_BASIS) / 4.0


def right_part(m) -> np.ndarray:
    """Quaternion q of the orthogonal projection of a 4x4 matrix onto {R_q}."""
    return np.einsum("...ab,mab->...m", np.asarray(m, dtype=float), _RIGHT_BASIS) / 4.0


def so4_split(theta) -> tuple[np.ndarray, np.ndarray]:
    """Split a skew 4x4 matrix as L_a + R_b with a, b imaginary quaternions.

    The left and right imaginary multiplications are mutually orthogonal
    3-dimensional subspaces spanning so(4), so both parts are projections.
    """
    a = left_part(theta)
    b = right_part(theta)
    a[..., 0] = 0.0
    b[..., 0] = 0.0
    return a, b


# -- spinors and Clifford multiplication ------------------------------------

def endo_from_spinor(q) -> np.ndarray:
    """The endomorphism of the tangent fiber represented by a self-dual spinor."""
    return left_matrix(q)


def clifford_mul(v, q) -> np.ndarray:
    """v . phi as an element of W- (= TM with J = L_i): evaluation phi(v) = q*v."""
    return quat_mul(q, v)


def clifford_mul_minus(v, w) -> np.ndarray:
    """v . w for w in W-, landing back in W+."""
    return CLIFFORD_MINUS_SIGN * quat_mul(w, quat_conj(v))


def i_action(q) -> np.ndarray:
    """Complex structure on W+: left multiplication by i."""
    return quat_mul(I_UNIT, q)


def spinor_inner(p, q) -> np.ndarray:
    return quat_inner(p, q)


def asd_scalar_action(c: complex, v, unit=I_UNIT) -> np.ndarray:
    """(c_re + c_im u) * v on W-, u the unit imaginary quaternion defining J."""
    scalar = c.real * ONE + c.imag * np.asarray(unit, dtype=float)
    return quat_mul(scalar, v)


def classify_endo(m, tol: float = 1e-9) -> tuple[float, float]:
    """Write M = s R with R a self-dual rotation by angle theta.

    Returns (s, theta) with s >= 0 and theta in [0, pi].  Raises
    NotSDConformal if M is further than tol (relative to max(1, |M|)) from
    the subspace of left multiplications.
    """
    m = np.asarray(m, dtype=float)
    q = left_part(m)
    residual = np.linalg.norm(m - left_matrix(q))
    if residual > tol * max(1.0, float(np.linalg.norm(m))):
        raise NotSDConformal(f"distance {residual:.3e} from self-dual conformal maps")
    s = float(np.linalg.norm(q))
    if s == 0.0:
        return 0.0, 0.0
    theta = float(np.arccos(np.clip(q[0] / s, -1.0, 1.0)))
    return s, theta


# -- 2-forms -----------------------------------------------------------------

def form_norm(omega) -> np.ndarray:
    """|omega| with |omega|^2 = sum over a<b of omega_ab^2."""
    omega = np.asarray(omega, dtype=float)
    return np.sqrt(0.5 * np.sum(omega**2, axis=(-2, -1)))


def form_inner(alpha, beta) -> np.ndarray:
    return 0.5 * np.sum(np.asarray(alpha) * np.asarray(beta), axis=(-2, -1))


def basis_form(a: int, b: int) -> np.ndarray:
    """e_a ^ e_b as an antisymmetric component array."""
    omega = np.zeros((4, 4))
    omega[a, b] = 1.0
    omega[b, a] = -1.0
    return omega


def hodge_star(omega) -> np.ndarray:
    """Hodge star on 2-forms in an oriented orthonormal frame."""
    return 0.5 * np.einsum("abcd,...cd->...ab", EPSILON, np.asarray(omega, dtype=float))


def sd_asd_split(omega) -> tuple[np.ndarray, np.ndarray]:
    omega = np.asarray(omega, dtype=float)
    star = hodge_star(omega)
    return 0.5 * (omega + star), 0.5 * (omega - star)


@dataclass(frozen=True)
class AcStructure:
    """Orthogonal almost-complex structure J on the fiber, J^2 = -1."""

    J: np.ndarray

    @classmethod
    def from_unit(cls, u) -> "AcStructure":
        return cls(left_matrix(u))

    @property
    def unit(self) -> np.ndarray:
        """Imaginary quaternion u with J = L_u (meaningful when J is self-dual)."""
        return left_part(self.J)

    @property
    def form(self) -> np.ndarray:
        return sdform_from_j(self)


def j_from_sdform(omega, tol: float = 1e-9) -> AcStructure:
    omega = np.asarray(omega, dtype=float)
    if np.max(np.abs(hodge_star(omega) - omega)) > tol:
        raise NotUnitSD("form is not self-dual")
    if abs(float(form_norm(omega)) - np.sqrt(2.0)) > tol:
        raise NotUnitSD(f"form has length {float(form_norm(omega)):.6g}, not sqrt(2)")
    # omega(v, w) = g(Jv, w) gives omega_ab = J_ba
    return AcStructure(omega.T.copy())


def sdform_from_j(ac: AcStructure) -> np.ndarray:
    return np.asarray(ac.J, dtype=float).T.copy()


REFERENCE_AC = AcStructure.from_unit(I_UNIT)
REFERENCE_FORM = basis_form(0, 1) + basis_form(2, 3)


def pullback_form(q, omega) -> np.ndarray:
    """(phi^* omega)(e_a, e_b) = omega(q e_a, q e_b)."""
    lq = left_matrix(q)
    return np.einsum("...ca,...cd,...db->...ab", lq, np.asarray(omega, dtype=float), lq, optimize=True)


def sigma(q, ac: AcStructure = REFERENCE_AC) -> np.ndarray:
    """The squaring map W+ -> Lambda+: a quarter of the pulled-back fundamental form."""
    return 0.25 * pullback_form(q, sdform_from_j(ac))
