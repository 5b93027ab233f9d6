"""Random spectral coefficients, power spectra and torus fields.

Coefficients live in the conjugation-compatible basis, where a real field has
``a[l, -m] == conj(a[l, m])`` and real ``a[l, 0]``. Only ``m >= 0`` is ever
drawn; negative orders are filled in from the constraint.

Random draws for coefficient ``(l, m)`` come from ``stream(seed, *key, l, m)``,
one value per realization, so a coefficient depends only on
``(seed, key, l, m, realization)``.
"""
import json
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import ConsistencyError, DomainError
from .repr_core import coeff_index

LAW_KINDS = ("ComplexGaussian", "FixedModulusPhase", "RademacherReal", "UniformDisk")


@dataclass(frozen=True)
class CoefficientLaw:
    """Law of a standardized coefficient (centered, ``E|a|^2 == 1``).

    ``ComplexGaussian``
        real part and imaginary part independent N(0, 1/2); real marginal N(0, 1).
    ``FixedModulusPhase``
        ``exp(i U)`` with U uniform; real marginal a random sign.
    ``UniformDisk``
        uniform on the disk of radius sqrt(2); real marginal uniform on
        [-sqrt(3), sqrt(3)].
    ``RademacherReal``
        random signs; complex draws are ``(e1 + i e2) / sqrt(2)``. Only
        invariant under quarter turns, so this is the negative control.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise DomainError(f"unknown law {self.kind!r}; expected one of {LAW_KINDS}")

    @property
    def phase_invariant(self):
        return self.kind != "RademacherReal"

    @property
    def gaussian(self):
        return self.kind == "ComplexGaussian"

    def draw_real(self, gen, n):
        if self.kind == "ComplexGaussian":
            return gen.standard_normal(n)
        if self.kind in ("FixedModulusPhase", "RademacherReal"):
            return gen.choice(np.array([-1.0, 1.0]), size=n)
        return gen.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=n)

    def draw_complex(self, gen, n):
        if self.kind == "ComplexGaussian":
            z = gen.standard_normal((n, 2)) * np.sqrt(0.5)
            return z[:, 0] + 1j * z[:, 1]
        if self.kind == "FixedModulusPhase":
            return np.exp(1j * gen.uniform(0.0, 2.0 * np.pi, size=n))
        if self.kind == "RademacherReal":
            e = gen.choice(np.array([-1.0, 1.0]), size=(n, 2)) / np.sqrt(2.0)
            return e[:, 0] + 1j * e[:, 1]
        u = gen.uniform(size=(n, 2))
        r = np.sqrt(2.0 * u[:, 0])
        return r * np.exp(2j * np.pi * u[:, 1])


@dataclass(frozen=True)
class AngularPowerSpectrum:
    """Eigenvalue ``lambda_l`` of the covariance operator for each degree."""

    values: tuple

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise DomainError("spectrum must be a nonempty 1-d sequence")
        if np.any(~np.isfinite(vals)) or np.any(vals < 0):
            raise DomainError("spectrum values must be finite and nonnegative")
        object.__setattr__(self, "values", tuple(float(v) for v in vals))

    @classmethod
    def power_law(cls, lmax, amplitude=1.0, slope=2.0):
        """``lambda_l = amplitude * (1 + l)^-slope``."""
        ls = np.arange(lmax + 1)
        return cls(tuple(amplitude * (1.0 + ls) ** (-slope)))

    @classmethod
    def single_degree(cls, l, value=1.0):
        vals = np.zeros(l + 1)
        vals[l] = value
        return cls(tuple(vals))

    @property
    def lmax(self):
        return len(self.values) - 1

    def as_array(self):
        return np.asarray(self.values)

    def total_variance(self):
        """Expected field energy ``sum_l lambda_l (2l+1)``."""
        ls = np.arange(len(self.values))
        return float(np.sum(self.as_array() * (2 * ls + 1)))


@dataclass
class HarmonicCoefficients:
    """Flat coefficient vector; entry ``coeff_index(l, m)`` holds ``a_lm``."""

    lmax: int
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != ((self.lmax + 1) ** 2,):
            raise DomainError(f"expected {(self.lmax + 1) ** 2} coefficients, got {self.data.shape}")

    @classmethod
    def zeros(cls, lmax):
        return cls(lmax, np.zeros((lmax + 1) ** 2, dtype=complex))

    def __getitem__(self, lm):
        l, m = lm
        return self.data[coeff_index(l, m)]

    def __setitem__(self, lm, value):
        l, m = lm
        self.data[coeff_index(l, m)] = value

    def block(self, l):
        return self.data[l * l:(l + 1) * (l + 1)]

    def reality_residual(self):
        res = 0.0
        for l in range(self.lmax + 1):
            b = self.block(l)
            res = max(res, float(np.max(np.abs(b[::-1] - np.conj(b)))))
        return res

    def is_real_field(self, tol=1e-12):
        return self.reality_residual() <= tol

    def symmetrize(self):
        """Overwrite ``m < 0`` (and ``Im a_l0``) from the ``m >= 0`` entries."""
        for l in range(self.lmax + 1):
            b = self.block(l)
            b[l] = b[l].real
            b[:l] = np.conj(b[l + 1:][::-1])
        return self

    def copy(self):
        return HarmonicCoefficients(self.lmax, self.data.copy())

    def to_json_dict(self):
        blocks = []
        for l in range(self.lmax + 1):
            b = self.block(l)[l:]
            blocks.append([[float(z.real), float(z.imag)] for z in b])
        return {"lmax": self.lmax, "blocks": blocks}

    @classmethod
    def from_json_dict(cls, doc, tol=0.0):
        lmax = int(doc["lmax"])
        blocks = doc["blocks"]
        if len(blocks) != lmax + 1:
            raise DomainError("number of blocks does not match lmax")
        out = cls.zeros(lmax)
        for l, blk in enumerate(blocks):
            if len(blk) != l + 1:
                raise DomainError(f"block {l} must hold {l + 1} entries (m = 0..l)")
            if abs(blk[0][1]) > tol:
                raise DomainError(f"a_({l},0) must be real, got imaginary part {blk[0][1]}")
            for m, (re, im) in enumerate(blk):
                out[l, m] = complex(re, im)
        return out.symmetrize()

    def dumps(self):
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text):
        return cls.from_json_dict(json.loads(text))


@dataclass
class TorusCoefficients:
    """``a_k`` for ``k = 0..k_max``; ``a_-k = conj(a_k)`` is implied."""

    k_max: int
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (self.k_max + 1,):
            raise DomainError("torus coefficient vector must have k_max + 1 entries")
        if self.data[0].imag != 0.0:
            raise DomainError("a_0 must be real")

    def full(self):
        """Coefficients for ``k = -k_max..k_max``."""
        return np.concatenate([np.conj(self.data[1:][::-1]), self.data])


def _check_spectrum(spectrum, lmax):
    lam = spectrum.as_array()
    if lam.size < lmax + 1:
        raise DomainError(f"spectrum defined up to {lam.size - 1}, need {lmax}")
    return lam[:lmax + 1]


def sample_coefficient_batch(spectrum, law, lmax, n, seed, key=(), include_monopole=False):
    """``n`` independent realizations as an array of shape ``(n, (lmax+1)^2)``.

    Draw order is l ascending, then m = 0..l. ``a_00`` is drawn and then
    discarded unless ``include_monopole``: the trivial-representation
    coefficient is zero by default.
    """
    lam = _check_spectrum(spectrum, lmax)
    out = np.zeros((n, (lmax + 1) ** 2), dtype=complex)
    for l in range(lmax + 1):
        scale = np.sqrt(lam[l])
        for m in range(l + 1):
            gen = _rng.stream(seed, *key, l, m)
            if m == 0:
                col = law.draw_real(gen, n).astype(complex)
            else:
                col = law.draw_complex(gen, n)
            out[:, coeff_index(l, m)] = scale * col
            if m > 0:
                out[:, coeff_index(l, -m)] = np.conj(out[:, coeff_index(l, m)])
    if not include_monopole:
        out[:, 0] = 0.0
    return out


def sample_coefficients(spectrum, law, lmax, seed, key=(), include_monopole=False):
    """One realization of reality-constrained coefficients ``a_lm = sqrt(lambda_l) alpha_lm``."""
    data = sample_coefficient_batch(spectrum, law, lmax, 1, seed, key, include_monopole)[0]
    return HarmonicCoefficients(lmax, data)


def sample_torus_batch(spectrum, law, k_max, n, seed, key=()):
    """Shape ``(n, k_max+1)`` array of torus coefficients ``a_0..a_kmax``."""
    lam = _check_spectrum(spectrum, k_max)
    out = np.zeros((n, k_max + 1), dtype=complex)
    for k in range(k_max + 1):
        gen = _rng.stream(seed, *key, k)
        col = law.draw_real(gen, n).astype(complex) if k == 0 else law.draw_complex(gen, n)
        out[:, k] = np.sqrt(lam[k]) * col
    return out


def sample_torus_coefficients(spectrum, law, k_max, seed, key=()):
    return TorusCoefficients(k_max, sample_torus_batch(spectrum, law, k_max, 1, seed, key)[0])


def evaluate_torus(coeffs, theta, tol=1e-12):
    """``T(theta) = sum_{|k| <= k_max} a_k exp(i k theta)`` as a real array."""
    theta = np.asarray(theta, dtype=float)
    ks = np.arange(-coeffs.k_max, coeffs.k_max + 1)
    vals = np.exp(1j * np.multiply.outer(theta, ks)) @ coeffs.full()
    scale = max(1.0, float(np.abs(coeffs.data).sum()))
    if np.max(np.abs(vals.imag), initial=0.0) > tol * scale:
        raise ConsistencyError("torus field has a non-negligible imaginary part")
    return vals.real


def evaluate_torus_batch(batch, theta):
    """Real field values, shape ``(n, len(theta))``, for a batch of torus coefficients."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    k_max = batch.shape[1] - 1
    ks = np.arange(1, k_max + 1)
    phase = np.exp(1j * np.outer(ks, theta))
    return batch[:, :1].real + 2.0 * np.real(batch[:, 1:] @ phase)


def field_energy(values):
    """Quadrature estimate of ``int T^2 dm`` for a real field on a grid."""
    v = np.asarray(values.values)
    if np.iscomplexobj(v):
        raise DomainError("field_energy needs a real field")
    return float(np.sum(values.grid.weights * v * v))
