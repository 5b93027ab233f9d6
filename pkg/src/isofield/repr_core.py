"""Numerical representation theory for S^2, SO(3) and SU(2).

Conventions
-----------
* Harmonics are normalized against the *probability* measure on the sphere,
  so they are ``sqrt(4 pi)`` times the usual physics ``Y_lm`` and
  ``Y_00 == 1``.
* The conjugation-compatible basis is ``phi_lm = Y_lm`` for ``m >= 0`` and
  ``phi_lm = (-1)^m Y_lm`` for ``m < 0``; it satisfies
  ``conj(phi_lm) == phi_l,-m`` and equals ``Pbar_l^|m|(cos t) exp(i m p)``.
* Rotations are ZYZ Euler triples, ``R(g) = Rz(alpha) Ry(beta) Rz(gamma)``
  acting actively on unit vectors.
* ``wigner_D(l, g)[k, m] = exp(-i k alpha) d^l_km(beta) exp(-i m gamma)``
  (rows and columns offset by ``l``). With these choices
  ``Y_lm(R(g)^-1 x) = sum_k D_km(g) Y_lk(x)``, which is what
  :func:`isofield.rotation.rotate_coeffs` relies on.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_jacobi, gammaln

from . import rng as _rng
from .errors import DomainError
from .kernels import legendre_table, wigner_d_table

TWO_PI = 2.0 * np.pi
GAP_TOL = 1e-9


@dataclass(frozen=True)
class SphericalIndex:
    degree: int
    order: int

    def __post_init__(self):
        if self.degree < 0 or abs(self.order) > self.degree:
            raise DomainError(f"invalid spherical index (l={self.degree}, m={self.order})")


@dataclass(frozen=True)
class EulerRotation:
    """ZYZ Euler angles. ``su2=True`` widens the gamma range to ``[0, 4 pi)``."""

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    su2: bool = False

    def __post_init__(self):
        gmax = 2.0 * TWO_PI if self.su2 else TWO_PI
        eps = 1e-12
        if not (-eps <= self.alpha < TWO_PI + eps and -eps <= self.beta <= np.pi + eps
                and -eps <= self.gamma < gmax + eps):
            raise DomainError(f"Euler angles out of range: {self.as_tuple()}")

    def as_tuple(self):
        return (float(self.alpha), float(self.beta), float(self.gamma))

    @classmethod
    def identity(cls):
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def wrap(cls, alpha, beta, gamma, su2=False):
        """Build from arbitrary angles, reducing alpha and gamma into range."""
        gmax = 2.0 * TWO_PI if su2 else TWO_PI
        return cls(float(np.mod(alpha, TWO_PI)), float(beta), float(np.mod(gamma, gmax)), su2)

    def matrix(self):
        return rotation_matrix(self)

    def inverse(self):
        return euler_from_matrix(self.matrix().T)

    def compose(self, other):
        """Rotation ``self o other`` (apply ``other`` first)."""
        return euler_from_matrix(self.matrix() @ other.matrix())


@dataclass
class AssumptionReport:
    degree: int
    orders: tuple
    min_gap: float
    samples_tried: int
    witness: EulerRotation = None
    gaps: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {
            "degree": self.degree,
            "orders": list(self.orders),
            "min_gap": float(self.min_gap),
            "samples_tried": self.samples_tried,
            "witness": None if self.witness is None else list(self.witness.as_tuple()),
            "gaps": None if self.gaps is None else [[float(v) for v in row] for row in self.gaps],
        }


# -- rotations ----------------------------------------------------------------

def _rz(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ry(b):
    c, s = math.cos(b), math.sin(b)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_matrix(g):
    return _rz(g.alpha) @ _ry(g.beta) @ _rz(g.gamma)


def euler_from_matrix(R):
    """ZYZ angles of a 3x3 rotation matrix; gimbal-locked cases put everything in alpha."""
    R = np.asarray(R, dtype=float)
    sb = math.hypot(R[0, 2], R[1, 2])
    beta = math.atan2(sb, R[2, 2])
    if sb > 1e-12:
        alpha = math.atan2(R[1, 2], R[0, 2])
        gamma = math.atan2(R[2, 1], -R[2, 0])
    elif R[2, 2] > 0:
        alpha = math.atan2(R[1, 0], R[0, 0])
        gamma = 0.0
    else:
        alpha = math.atan2(-R[1, 0], -R[0, 0])
        gamma = 0.0
    return EulerRotation.wrap(alpha, beta, gamma)


def haar_rotation(gen, su2=False):
    """Haar-distributed Euler triple (beta has density sin(beta)/2)."""
    alpha = gen.uniform(0.0, TWO_PI)
    beta = math.acos(gen.uniform(-1.0, 1.0))
    gamma = gen.uniform(0.0, 2.0 * TWO_PI if su2 else TWO_PI)
    return EulerRotation.wrap(alpha, beta, gamma, su2=su2)


# -- Legendre functions and harmonics -------------------------------------------

def assoc_legendre(l, m, x):
    """Unnormalized ``P_l^m(x)`` with Condon-Shortley phase (upward recursion in l)."""
    if not (0 <= m <= l):
        raise DomainError(f"need 0 <= m <= l, got l={l}, m={m}")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise DomainError("|x| > 1")
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.ones_like(x)
    for i in range(1, m + 1):
        pmm = -(2.0 * i - 1.0) * s * pmm
    if l == m:
        return pmm[()] if pmm.ndim == 0 else pmm
    p_prev, p = pmm, (2.0 * m + 1.0) * x * pmm
    for ll in range(m + 2, l + 1):
        p_prev, p = p, ((2.0 * ll - 1.0) * x * p - (ll + m - 1.0) * p_prev) / (ll - m)
    return p[()] if p.ndim == 0 else p


def _pbar(l, m, theta):
    theta = np.asarray(theta, dtype=float)
    tab = legendre_table(l, np.cos(theta).ravel())
    return tab[l, m].reshape(theta.shape)


def spherical_harmonic(l, m, theta, phi):
    """``sqrt(4 pi) Y_lm(theta, phi)``: orthonormal under the probability measure."""
    SphericalIndex(l, m)
    phi = np.asarray(phi, dtype=float)
    val = _pbar(l, abs(m), theta) * np.exp(1j * abs(m) * phi)
    if m < 0:
        val = (-1) ** abs(m) * np.conj(val)
    return val[()] if np.ndim(val) == 0 else val


def conj_compatible_phi(l, m, theta, phi):
    """Conjugation-compatible basis function ``phi_lm``; ``conj(phi_lm) = phi_l,-m``."""
    SphericalIndex(l, m)
    phi = np.asarray(phi, dtype=float)
    val = _pbar(l, abs(m), theta) * np.exp(1j * m * phi)
    return val[()] if np.ndim(val) == 0 else val


def coeff_index(l, m):
    """Flat position of ``(l, m)`` in a coefficient vector of length ``(lmax+1)^2``."""
    return l * l + l + m


def phi_basis_matrix(lmax, theta, phi):
    """Matrix ``M[j, coeff_index(l, m)] = phi_lm(theta_j, phi_j)`` for all ``l <= lmax``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float)).ravel()
    phi = np.atleast_1d(np.asarray(phi, dtype=float)).ravel()
    tab = legendre_table(lmax, np.cos(theta))
    out = np.empty((theta.size, (lmax + 1) ** 2), dtype=complex)
    ms = np.arange(-lmax, lmax + 1)
    phase = np.exp(1j * np.outer(phi, ms))
    for l in range(lmax + 1):
        for m in range(-l, l + 1):
            out[:, coeff_index(l, m)] = tab[l, abs(m)] * phase[:, m + lmax]
    return out


# -- Wigner matrices -------------------------------------------------------------

def wigner_small_d(l, beta):
    """Real orthogonal matrix ``d^l(beta)``, indices offset by ``l``."""
    if l < 0:
        raise DomainError("l must be nonnegative")
    return wigner_d_table(l, beta)[l].copy()


def _phase_wrap(l, g, d):
    ks = np.arange(-l, l + 1)
    return np.exp(-1j * ks * g.alpha)[:, None] * d * np.exp(-1j * ks * g.gamma)[None, :]


def wigner_D(l, g):
    """Unitary matrix ``D^l(g)``; ``wigner_D(l, g1) @ wigner_D(l, g2) == wigner_D(l, g1 o g2)``."""
    return _phase_wrap(l, g, wigner_small_d(l, g.beta))


def wigner_D_blocks(lmax, g):
    """``[D^0(g), ..., D^lmax(g)]`` from a single recursion sweep."""
    table = wigner_d_table(lmax, g.beta)
    return [_phase_wrap(l, g, table[l, lmax - l:lmax + l + 1, lmax - l:lmax + l + 1])
            for l in range(lmax + 1)]


def phi_sign(l):
    """Diagonal of the basis change ``S`` with ``phi = S Y``: ``(-1)^m`` for ``m < 0``."""
    ms = np.arange(-l, l + 1)
    return np.where((ms < 0) & (ms % 2 == 1), -1.0, 1.0)


def to_phi_basis(l, D):
    s = phi_sign(l)
    return s[:, None] * D * s[None, :]


def rep_matrix_phi_basis(l, g):
    """``S D^l(g) S``, the representation matrix in the conjugation-compatible basis.

    It satisfies ``conj(Dt[k, m]) == Dt[-k, -m]``.
    """
    return to_phi_basis(l, wigner_D(l, g))


def su2_matrix(g):
    """Fundamental SU(2) matrix ``[[a, b], [c, d]]`` of ``g``; note ``conj(a) == d``."""
    c = math.cos(0.5 * g.beta)
    s = math.sin(0.5 * g.beta)
    hp = 0.5 * (g.alpha + g.gamma)
    hm = 0.5 * (g.alpha - g.gamma)
    return np.array([
        [np.exp(-1j * hp) * c, -np.exp(-1j * hm) * s],
        [np.exp(1j * hm) * s, np.exp(1j * hp) * c],
    ])


def torus_character(k, theta):
    return np.exp(1j * k * np.asarray(theta, dtype=float))


# -- Assumption checker -----------------------------------------------------------

def assumption_gaps(Dt, l, m1, m2):
    """Gap table of shape ``(l+1, 2)`` for target orders ``(m1, m2)``.

    Row ``m >= 1`` holds ``||Dt[m, mi]| - |Dt[-m, mi]||``: the real-linear map
    ``z -> Dt[m, mi] z + Dt[-m, mi] conj(z)`` is invertible iff this is
    nonzero. Row ``m = 0`` holds ``|Dt[0, mi]|`` because ``a_0`` is real and
    enters through ``z -> Dt[0, mi] z``, which is injective iff nonzero.
    Rows index the source order, matching the sum over ``m`` in the
    coefficient transform.
    """
    A = np.abs(Dt)
    gaps = np.empty((l + 1, 2))
    for i, mi in enumerate((m1, m2)):
        # source m feeds target mi through Dt[mi, m]; |d_km| = |d_mk| so the
        # transposed (row = source) indexing gives the same table
        gaps[0, i] = A[l + mi, l]
        for m in range(1, l + 1):
            gaps[m, i] = abs(A[l + mi, l + m] - A[l + mi, l - m])
    return gaps


def check_assumption(l, g, m1, m2):
    if not (0 <= m1 < m2 <= l):
        raise DomainError(f"need 0 <= m1 < m2 <= l, got ({m1}, {m2}) at l={l}")
    gaps = assumption_gaps(rep_matrix_phi_basis(l, g), l, m1, m2)
    min_gap = float(gaps.min())
    return AssumptionReport(
        degree=l,
        orders=(m1, m2),
        min_gap=min_gap,
        samples_tried=1,
        witness=g if min_gap > GAP_TOL else None,
        gaps=gaps,
    )


def search_witness(l, seed, max_draws=10, orders=None):
    """Draw Haar rotations until one satisfies the assumption for some order pair.

    Draw ``i`` is generated from ``stream(seed, i)``. All pairs are tried per
    draw unless ``orders`` fixes one; the pair with the largest minimum gap
    is reported.
    """
    if l < 1:
        raise DomainError("need l >= 1")
    pairs = [tuple(orders)] if orders is not None else [
        (a, b) for a in range(l + 1) for b in range(a + 1, l + 1)]
    best = None
    for i in range(max_draws):
        g = haar_rotation(_rng.stream(seed, i))
        Dt = rep_matrix_phi_basis(l, g)
        for m1, m2 in pairs:
            gaps = assumption_gaps(Dt, l, m1, m2)
            mg = float(gaps.min())
            if best is None or mg > best.min_gap:
                best = AssumptionReport(l, (m1, m2), mg, i + 1, g if mg > GAP_TOL else None, gaps)
        best.samples_tried = i + 1
        if best.witness is not None:
            return best
    return best


def jacobi_factors(l, beta):
    """Reduced entries ``r_km`` with ``|d_km(beta)| = s^mu c^nu |r_km|``.

    Here ``c, s = cos(beta/2), sin(beta/2)``, ``mu = |k - m|``, ``nu = |k + m|``
    and ``r_km`` is a normalized Jacobi polynomial in ``cos(beta)``. The
    endpoint factors vanish only at ``beta in {0, pi}``; every other zero of an
    entry is a zero of ``r_km``. Shape ``(len(beta), 2l+1, 2l+1)``.
    """
    ks = np.arange(-l, l + 1)
    K, M = np.meshgrid(ks, ks, indexing="ij")
    mu, nu = np.abs(K - M), np.abs(K + M)
    n = l - np.maximum(np.abs(K), np.abs(M))
    norm = np.exp(0.5 * (gammaln(n + 1) + gammaln(n + mu + nu + 1) - gammaln(n + mu + 1) - gammaln(n + nu + 1)))
    x = np.cos(np.atleast_1d(np.asarray(beta, dtype=float)))[:, None, None]
    return norm * eval_jacobi(n, mu, nu, x)


def zero_set_probe(l, n_samples, seed, tol=1e-9, reduced=True):
    """Fraction of Haar-random rotations where some entry of ``D^l`` vanishes.

    With ``reduced=True`` (default) an entry counts as zero when its Jacobi
    factor (see :func:`jacobi_factors`) is below ``tol``. The endpoint powers
    of ``sin(beta/2)`` and ``cos(beta/2)`` only vanish at the poles, but at
    high degree they drop below any absolute tolerance on a set of positive
    measure, so ``reduced=False`` (the raw ``|D_km| < tol`` test) reports
    small entries rather than zeros.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    gen = _rng.stream(seed)
    betas = np.array([haar_rotation(gen).beta for _ in range(n_samples)])
    # |D_km| = |d_km(beta)|, the phases do not matter
    if reduced:
        small = np.abs(jacobi_factors(l, betas)).min(axis=(1, 2)) < tol
    else:
        small = np.array([np.abs(wigner_small_d(l, b)).min() < tol for b in betas])
    return float(np.mean(small))
