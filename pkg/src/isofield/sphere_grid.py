"""Gauss-Legendre x equiangular grids and exact bandlimited transforms.

A grid for bandlimit ``L`` has ``L+1`` Gauss-Legendre colatitude rings and
``2L+1`` equally spaced longitudes. Products of two harmonics of degree at
most ``L`` are integrated exactly, which makes :func:`analyze` the exact
inverse of :func:`synthesize`.

``analyze`` computes ``<T, phi_lm> = int T conj(phi_lm) dm``. In the
conjugation-compatible basis this equals ``int T phi_l,-m dm``, i.e. the
coefficient ``a(phi_l,-m)`` in the unconjugated convention, and it is the
convention under which ``T = sum a_lm phi_lm``.
"""
import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, DomainError
from .field_model import HarmonicCoefficients
from .kernels import legendre_table
from .repr_core import coeff_index, phi_basis_matrix

REAL_TOL = 1e-10


def gauss_legendre_nodes(n):
    """Nodes in (-1, 1) and weights (summing to 2) of the ``n``-point rule."""
    if n < 1:
        raise DomainError("need at least one node")
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@dataclass
class SphereGrid:
    lmax: int
    n_theta: int
    n_phi: int
    theta: np.ndarray
    phi: np.ndarray
    ring_weights: np.ndarray
    _basis: np.ndarray = field(default=None, repr=False)

    @property
    def size(self):
        return self.n_theta * self.n_phi

    @property
    def nodes(self):
        """``(size, 2)`` array of (colatitude, longitude), ring-major."""
        t, p = np.meshgrid(self.theta, self.phi, indexing="ij")
        return np.column_stack([t.ravel(), p.ravel()])

    @property
    def weights(self):
        return np.repeat(self.ring_weights / self.n_phi, self.n_phi)

    def basis(self):
        """Dense ``phi`` basis matrix at the nodes (cached)."""
        if self._basis is None:
            nd = self.nodes
            self._basis = phi_basis_matrix(self.lmax, nd[:, 0], nd[:, 1])
        return self._basis


def build_grid(lmax):
    if lmax < 0:
        raise DomainError("lmax must be nonnegative")
    x, w = gauss_legendre_nodes(lmax + 1)
    order = np.argsort(-x)  # north to south
    n_phi = 2 * lmax + 1
    return SphereGrid(
        lmax=lmax,
        n_theta=lmax + 1,
        n_phi=n_phi,
        theta=np.arccos(x[order]),
        phi=2.0 * np.pi * np.arange(n_phi) / n_phi,
        ring_weights=w[order] / 2.0,
    )


@dataclass
class FieldValues:
    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.size,):
            raise DomainError("field values do not match the grid")

    @property
    def is_real(self):
        return not np.iscomplexobj(self.values)

    def to_csv(self, header=None):
        """CSV text with columns colatitude, longitude, weight, value (and imag if complex).

        ``header`` is an optional mapping written as ``# key=value`` comment lines.
        """
        buf = io.StringIO()
        if header:
            for k, v in header.items():
                buf.write(f"# {k}={v}\n")
        w = csv.writer(buf, lineterminator="\n")
        cols = ["colatitude", "longitude", "weight", "value"]
        if not self.is_real:
            cols.append("imag")
        w.writerow(cols)
        nd = self.grid.nodes
        wts = self.grid.weights
        for j in range(self.grid.size):
            row = [repr(float(nd[j, 0])), repr(float(nd[j, 1])), repr(float(wts[j]))]
            v = self.values[j]
            row.append(repr(float(np.real(v))))
            if not self.is_real:
                row.append(repr(float(np.imag(v))))
            w.writerow(row)
        return buf.getvalue()


def _finish(grid, vals, coeffs):
    if coeffs.is_real_field(tol=1e-12 * max(1.0, float(np.abs(coeffs.data).max(initial=0.0)))):
        scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
        if np.max(np.abs(vals.imag), initial=0.0) > REAL_TOL * scale:
            raise ConsistencyError("reality-constrained coefficients synthesized a complex field")
        return FieldValues(grid, vals.real.copy())
    return FieldValues(grid, vals)


def synthesize(coeffs, grid, method="dense"):
    """Field values ``T(x_j) = sum_lm a_lm phi_lm(x_j)`` at the grid nodes.

    ``method="separable"`` sums over degrees per ring and then over
    longitudes; it agrees with the dense path to rounding.
    """
    if coeffs.lmax > grid.lmax:
        raise DomainError(f"coefficient bandlimit {coeffs.lmax} exceeds grid bandlimit {grid.lmax}")
    a = np.zeros((grid.lmax + 1) ** 2, dtype=complex)
    a[:coeffs.data.size] = coeffs.data
    if method == "dense":
        vals = grid.basis() @ a
    elif method == "separable":
        L = grid.lmax
        tab = legendre_table(L, np.cos(grid.theta))
        ring = np.zeros((grid.n_theta, 2 * L + 1), dtype=complex)
        for l in range(L + 1):
            for m in range(-l, l + 1):
                ring[:, m + L] += a[coeff_index(l, m)] * tab[l, abs(m)]
        phase = np.exp(1j * np.outer(np.arange(-L, L + 1), grid.phi))
        vals = (ring @ phase).ravel()
    else:
        raise DomainError(f"unknown method {method!r}")
    return _finish(grid, vals, HarmonicCoefficients(grid.lmax, a))


def analyze(values, lmax, method="dense"):
    """Coefficients ``a_lm = sum_j w_j T(x_j) conj(phi_lm(x_j))`` up to ``lmax``."""
    grid = values.grid
    if lmax > grid.lmax:
        raise DomainError(f"grid supports bandlimit {grid.lmax}, asked for {lmax}")
    wt = grid.weights * values.values
    if method == "dense":
        a = grid.basis().conj().T @ wt
    elif method == "separable":
        L = grid.lmax
        tab = legendre_table(L, np.cos(grid.theta))
        T = wt.reshape(grid.n_theta, grid.n_phi)
        phase = np.exp(-1j * np.outer(grid.phi, np.arange(-L, L + 1)))
        ring = T @ phase
        a = np.zeros((L + 1) ** 2, dtype=complex)
        for l in range(L + 1):
            for m in range(-l, l + 1):
                a[coeff_index(l, m)] = ring[:, m + L] @ tab[l, abs(m)]
    else:
        raise DomainError(f"unknown method {method!r}")
    out = HarmonicCoefficients(lmax, a[:(lmax + 1) ** 2])
    if values.is_real:
        out.symmetrize()
    return out


def synthesize_at(coeff_batch, lmax, theta, phi):
    """Real field values, shape ``(n, npts)``, for a batch of coefficient vectors."""
    M = phi_basis_matrix(lmax, theta, phi)
    return np.real(coeff_batch @ M.T)


def covariance_kernel(spectrum, cos_angle):
    """Isotropic covariance ``sum_l lambda_l (2l+1) P_l(cos_angle)``."""
    c = np.asarray(cos_angle, dtype=float)
    if np.any(np.abs(c) > 1.0 + 1e-15):
        raise DomainError("|cos_angle| > 1")
    lam = spectrum.as_array()
    L = lam.size - 1
    tab = legendre_table(L, np.clip(c, -1.0, 1.0).ravel())
    # Pbar_l^0 = sqrt(2l+1) P_l
    ls = np.arange(L + 1)
    vals = np.sum((lam * np.sqrt(2 * ls + 1))[:, None] * tab[:, 0, :], axis=0)
    return vals.reshape(c.shape)[()] if c.ndim == 0 else vals.reshape(c.shape)


def parseval_energy(coeffs):
    return float(np.sum(np.abs(coeffs.data) ** 2))

