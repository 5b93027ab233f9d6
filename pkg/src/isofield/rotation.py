"""Group action on sphere points and on harmonic coefficients.

The action on points is ``x -> g^-1 x``. Coefficients transform so that

    synthesize(rotate_coeffs(a, g))(x) == synthesize(a)(g^-1 x),

which in the conjugation-compatible basis is ``a_new = Dt(g) @ a`` per degree
with ``Dt = S D S``. Written with the summation index first, as
``a_new[m'] = sum_m Dt^T[m, m'] a[m]``, this is the transposed application of
the representation matrix. Consequently

    rotate_coeffs(rotate_coeffs(a, g1), g2) == rotate_coeffs(a, g2 o g1).

On the torus, ``theta -> theta - theta'`` corresponds to
``a_k -> exp(-i k theta') a_k``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError
from .field_model import HarmonicCoefficients, TorusCoefficients
from .repr_core import coeff_index, to_phi_basis, wigner_D_blocks

REALITY_TOL = 1e-12


@dataclass(frozen=True)
class SpherePoint:
    colatitude: float
    longitude: float

    def __post_init__(self):
        if not (0.0 <= self.colatitude <= np.pi) or not (0.0 <= self.longitude < 2.0 * np.pi):
            raise DomainError(f"point out of range: {self}")

    def unit_vector(self):
        st = math.sin(self.colatitude)
        return np.array([st * math.cos(self.longitude), st * math.sin(self.longitude),
                         math.cos(self.colatitude)])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        theta = math.acos(max(-1.0, min(1.0, v[2])))
        if math.hypot(v[0], v[1]) < 1e-15:
            return cls(theta, 0.0)  # poles get longitude 0
        phi = math.atan2(v[1], v[0]) % (2.0 * np.pi)
        if phi >= 2.0 * np.pi:
            phi = 0.0
        return cls(theta, phi)


def rotate_point(g, p):
    """``g^-1 p``."""
    return SpherePoint.from_vector(g.matrix().T @ p.unit_vector())


def rotate_points(g, theta, phi):
    """Vectorized :func:`rotate_point` over arrays of colatitudes and longitudes."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    v = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    w = g.matrix().T @ v.reshape(3, -1)
    t = np.arccos(np.clip(w[2], -1.0, 1.0))
    p = np.where(np.hypot(w[0], w[1]) < 1e-15, 0.0, np.mod(np.arctan2(w[1], w[0]), 2.0 * np.pi))
    return t.reshape(theta.shape), p.reshape(theta.shape)


def phi_blocks(lmax, g):
    return [to_phi_basis(l, D) for l, D in enumerate(wigner_D_blocks(lmax, g))]


def rotate_coeff_batch(batch, lmax, g):
    """Rotate every row of an ``(n, (lmax+1)^2)`` coefficient array."""
    out = np.empty_like(batch, dtype=complex)
    for l, Dt in enumerate(phi_blocks(lmax, g)):
        sl = slice(l * l, (l + 1) * (l + 1))
        out[:, sl] = batch[:, sl] @ Dt.T
    return out


def rotate_coeffs(coeffs, g):
    """Coefficients of the rotated field ``x -> T(g^-1 x)``.

    Raises :class:`ConsistencyError` if a reality-constrained input comes
    out violating the constraint, which can only mean a convention bug.
    """
    real_in = coeffs.is_real_field(tol=REALITY_TOL * max(1.0, float(np.abs(coeffs.data).max())))
    out = HarmonicCoefficients(coeffs.lmax, rotate_coeff_batch(coeffs.data[None, :], coeffs.lmax, g)[0])
    if real_in:
        scale = max(1.0, float(np.abs(coeffs.data).max()))
        if out.reality_residual() > REALITY_TOL * scale:
            raise ConsistencyError("rotation broke the reality constraint")
        out.symmetrize()
    return out


def block_norms(coeffs):
    return np.array([np.sum(np.abs(coeffs.block(l)) ** 2) for l in range(coeffs.lmax + 1)])


def rotate_torus_coeffs(coeffs, theta_shift):
    """Coefficients of ``theta -> T(theta - theta_shift)``."""
    k = np.arange(coeffs.k_max + 1)
    data = np.exp(-1j * k * theta_shift) * coeffs.data
    data[0] = data[0].real
    return TorusCoefficients(coeffs.k_max, data)


def rotate_torus_batch(batch, theta_shift):
    k = np.arange(batch.shape[1])
    return batch * np.exp(-1j * k * theta_shift)[None, :]


def extract(batch, l, m):
    """Column of coefficient ``(l, m)`` from a batch."""
    return batch[:, coeff_index(l, m)]
