"""Splitting ``V = H + conj(H)`` into ``K (+) conj(K)`` with ``K`` orthogonal to ``conj(K)``.

Functions on SU(2) are callables ``f(alpha, beta, gamma)`` on arrays of Euler
angles (gamma in ``[0, 4 pi)``). Every inner product is a Haar-measure
quadrature that is exact for the low-degree matrix-coefficient functions used
here, so all linear algebra happens on sampled vectors.

Outline of :func:`split_invariant_subspace`:

1. orthonormalize ``H`` and ``V = H + conj(H)``; if ``conj(H) == H`` stop;
2. solve for the G-intertwiners ``H -> V`` from representation matrices
   sampled at a few random group elements; a one-dimensional solution space
   means the two actions are inequivalent (then ``H`` is already orthogonal
   to ``conj(H)``) and raises :class:`StructuralError`;
3. an orthonormal pair of intertwiners identifies ``V`` with ``H (x) C^2``;
   conjugation becomes ``u (x) v -> J u (x) L conj(v)`` with ``J`` an
   antiunitary structure on ``H`` and ``L`` a 2x2 matrix;
4. ``K = H (x) z`` for an isotropic vector ``z`` of the symmetric part of
   ``B(v, w) = (v, L conj(w)) = v^T conj(L) w``.
"""
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .errors import StructuralError
from .repr_core import EulerRotation, haar_rotation, su2_matrix, wigner_d_table

RANK_TOL = 1e-6
CERT_TOL = 1e-10
DEFAULT_ORDER = 4
N_INTERTWINER_SAMPLES = 8
INVARIANCE_TOL = 1e-8


# -- SU(2) coordinates and quadrature ----------------------------------------------

def su2_matrices(alpha, beta, gamma):
    """Stack of fundamental matrices, shape ``(n, 2, 2)``."""
    alpha, beta, gamma = (np.asarray(v, dtype=float).ravel() for v in (alpha, beta, gamma))
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    hp, hm = (alpha + gamma) / 2, (alpha - gamma) / 2
    U = np.empty((alpha.size, 2, 2), dtype=complex)
    U[:, 0, 0] = np.exp(-1j * hp) * c
    U[:, 0, 1] = -np.exp(-1j * hm) * s
    U[:, 1, 0] = np.exp(1j * hm) * s
    U[:, 1, 1] = np.exp(1j * hp) * c
    return U


def euler_from_su2(U):
    """Inverse of :func:`su2_matrices`; returns ``(alpha, beta, gamma)`` arrays."""
    U = np.asarray(U).reshape(-1, 2, 2)
    a, c = U[:, 0, 0], U[:, 1, 0]
    beta = 2.0 * np.arctan2(np.abs(c), np.abs(a))
    p = np.where(np.abs(a) > 1e-14, -np.angle(a), 0.0)
    q = np.where(np.abs(c) > 1e-14, np.angle(c), 0.0)
    alpha_raw, gamma_raw = p + q, p - q
    k = np.floor(alpha_raw / (2 * np.pi))
    alpha = alpha_raw - 2 * np.pi * k
    gamma = np.mod(gamma_raw - 2 * np.pi * k, 4 * np.pi)
    return alpha, beta, gamma


@dataclass
class HaarQuadrature:
    """Product rule: Gauss-Legendre in cos(beta), uniform in alpha and gamma."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    weights: np.ndarray

    @classmethod
    def of_order(cls, order=DEFAULT_ORDER):
        n_b = order + 1
        n_ag = 2 * order + 1
        x, w = np.polynomial.legendre.leggauss(n_b)
        al = 2 * np.pi * np.arange(n_ag) / n_ag
        ga = 4 * np.pi * np.arange(n_ag) / n_ag
        A, X, G = np.meshgrid(al, x, ga, indexing="ij")
        W = np.broadcast_to((w / 2.0)[None, :, None], A.shape) / n_ag ** 2
        return cls(A.ravel(), np.arccos(X.ravel()), G.ravel(), W.ravel().copy())

    def matrices(self):
        return su2_matrices(self.alpha, self.beta, self.gamma)

    def inner(self, fv, hv):
        """``<f, h> = int f conj(h) dm`` for sampled vectors (or matrices of columns)."""
        return np.conj(hv).T @ (self.weights[:, None] * fv) if fv.ndim == 2 else np.sum(self.weights * fv * np.conj(hv))


def haar_inner_product(f, h, quadrature_order=DEFAULT_ORDER):
    """``int f conj(h) dm_G`` over SU(2) with normalized Haar measure."""
    q = HaarQuadrature.of_order(quadrature_order)
    return complex(q.inner(np.asarray(f(q.alpha, q.beta, q.gamma), dtype=complex),
                           np.asarray(h(q.alpha, q.beta, q.gamma), dtype=complex)))


def translated(f, g):
    """The function ``x -> f(g^-1 x)``."""
    Ug_inv = su2_matrix(g).conj().T

    def fg(alpha, beta, gamma):
        X = su2_matrices(alpha, beta, gamma)
        a, b, c = euler_from_su2(Ug_inv[None, :, :] @ X)
        return f(a, b, c)

    return fg


# -- standard function handles ---------------------------------------------------------

def su2_entry(i, j):
    """Matrix entry ``U(g)[i, j]`` of the fundamental representation as a handle."""
    def f(alpha, beta, gamma):
        return su2_matrices(alpha, beta, gamma)[:, i, j]
    f.__name__ = "abcd"[2 * i + j]
    return f


def wigner_entry(l, k, m):
    """``D^l_km`` as a handle on SU(2) Euler coordinates."""
    def f(alpha, beta, gamma):
        alpha, beta, gamma = (np.asarray(v, dtype=float).ravel() for v in (alpha, beta, gamma))
        d = np.array([wigner_d_table(l, b)[l, l + k, l + m] for b in beta])
        return np.exp(-1j * k * alpha) * d * np.exp(-1j * m * gamma)
    return f


def combination(funcs, coeffs):
    coeffs = np.asarray(coeffs, dtype=complex)

    def f(alpha, beta, gamma):
        return sum(c * g(alpha, beta, gamma) for c, g in zip(coeffs, funcs) if c != 0)
    return f


@dataclass
class SubspaceBasis:
    """Spanning functions of a subspace of ``L^2(SU(2))``."""

    functions: list
    quadrature_order: int = DEFAULT_ORDER
    _gram: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self):
        return len(self.functions)

    def sample(self, q, translate_by=None):
        fs = self.functions if translate_by is None else [translated(f, translate_by) for f in self.functions]
        return np.column_stack([np.asarray(f(q.alpha, q.beta, q.gamma), dtype=complex) for f in fs])

    def gram(self):
        if self._gram is None:
            q = HaarQuadrature.of_order(self.quadrature_order)
            F = self.sample(q)
            self._gram = q.inner(F, F)
        return self._gram

    def conjugate(self):
        return SubspaceBasis([_conj(f) for f in self.functions], self.quadrature_order)


def _conj(f):
    def g(alpha, beta, gamma):
        return np.conj(f(alpha, beta, gamma))
    return g


def su2_fundamental_h1():
    """``H_1 = span{a, c}``, the first column of the fundamental representation."""
    return SubspaceBasis([su2_entry(0, 0), su2_entry(1, 0)])


def spin1_column_mix(v=(1.0, 0.0, 0.5)):
    """``span_k { sum_m D^1_km v_m }``: invariant, equivalent to its conjugate, not orthogonal to it."""
    v = np.asarray(v, dtype=complex)
    funcs = []
    for k in (-1, 0, 1):
        funcs.append(combination([wigner_entry(1, k, m) for m in (-1, 0, 1)], v))
    return SubspaceBasis(funcs)


def degree1_harmonics_on_group():
    """``g -> phi_1m(g e_z)``: self-conjugate, no split needed."""
    from .repr_core import conj_compatible_phi

    def make(m):
        def f(alpha, beta, gamma):
            return conj_compatible_phi(1, m, np.asarray(beta, float).ravel(), np.asarray(alpha, float).ravel())
        return f
    return SubspaceBasis([make(m) for m in (-1, 0, 1)])


# -- bilinear forms -------------------------------------------------------------------

def symmetrize_bilinear(B):
    B = np.asarray(B, dtype=complex)
    return B + B.T


def isotropic_vector(B_sym, tol=1e-12):
    """Unit ``v`` with ``v^T B_sym v == 0`` (closed-form quadratic solve).

    With ``q = b12 + disc``, where ``disc`` is a square root of ``b12^2 - b11 b22``
    and its sign is taken to maximize ``|q|``, the two isotropic directions are
    ``(q, -b11)`` and ``(b22, -q)``. Neither needs a division, so tiny or zero
    coefficients cause no cancellation. The larger candidate is kept. A zero form
    gives ``(1, 0)``, a degenerate form gives a null vector, and the identity gives
    ``(1, i) / sqrt(2)``.
    """
    B = np.asarray(B_sym, dtype=complex)
    scale = np.abs(B).max()
    if scale <= tol:
        return np.array([1.0 + 0j, 0.0 + 0j])
    Bn = B / scale
    b11, b12, b22 = Bn[0, 0], 0.5 * (Bn[0, 1] + Bn[1, 0]), Bn[1, 1]
    disc = np.sqrt(complex(b12 * b12 - b11 * b22))
    q = b12 + disc if abs(b12 + disc) >= abs(b12 - disc) else b12 - disc
    v1 = np.array([q, -b11], dtype=complex)
    v2 = np.array([b22, -q], dtype=complex)
    v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    return v / np.linalg.norm(v)


# -- the construction --------------------------------------------------------------------

def _lowdin(F, q):
    """Orthonormal combination of the sampled columns of ``F``; returns (Fo, C) with Fo = F C."""
    G = q.inner(F, F)
    w, V = np.linalg.eigh(G)
    if w.min() <= RANK_TOL * w.max():
        raise StructuralError("spanning functions are linearly dependent")
    C = V @ np.diag(w ** -0.5) @ V.conj().T
    return F @ C, C


def rep_matrices(basis_vectors, translated_vectors, q):
    """``rho[i, j] = <L_g u_j, u_i>`` for an orthonormal sampled basis."""
    return q.inner(translated_vectors, basis_vectors)


def solve_intertwiners(rho_src, rho_dst):
    """Basis of ``{S : rho_dst(g) S = S rho_src(g) for all samples}`` and the singular values."""
    d_src = rho_src[0].shape[0]
    d_dst = rho_dst[0].shape[0]
    rows = []
    for A, Bm in zip(rho_src, rho_dst):
        # column-major vec: vec(Bm S - S A) = (I kron Bm - A^T kron I) vec(S)
        rows.append(np.kron(np.eye(d_src), Bm) - np.kron(A.T, np.eye(d_dst)))
    M = np.vstack(rows)
    _, sv, vh = np.linalg.svd(M)
    sv_full = np.concatenate([sv, np.zeros(max(0, vh.shape[0] - sv.size))])
    null = sv_full <= RANK_TOL * max(1.0, sv_full.max())
    sols = [vh[i].conj().reshape(d_dst, d_src, order="F") for i in np.flatnonzero(null)]
    return sols, sv_full


def nearest_kronecker(Gam, d):
    """Best ``C (x) L`` approximation (C: d x d, L: 2 x 2) for index order (i, a) -> i * 2 + a."""
    R = Gam.reshape(d, 2, d, 2).transpose(0, 2, 1, 3).reshape(d * d, 4)
    u, s, vh = np.linalg.svd(R)
    C = (u[:, 0] * np.sqrt(s[0])).reshape(d, d)
    L = (vh[0] * np.sqrt(s[0])).reshape(2, 2)
    # C unitary up to the phase of L
    nrm = np.linalg.norm(C) / np.sqrt(d)
    C, L = C / nrm, L * nrm
    k = np.argmax(np.abs(L))
    ph = np.exp(-1j * np.angle(L.flat[k]))
    return C / ph, L * ph, float(np.linalg.norm(Gam - np.kron(C / ph, L * ph)))


@dataclass
class ConjugationOperator:
    L: np.ndarray
    J: np.ndarray
    kron_residual: float
    reconstruction_residual: float
    intertwiner_singular_values: np.ndarray
    # internal state for the splitting step
    dim: int = 0
    quadrature: HaarQuadrature = field(default=None, repr=False)
    tensor_vectors: np.ndarray = field(default=None, repr=False)

    @property
    def condition_number(self):
        return float(np.linalg.cond(self.L))

    def bilinear_form(self):
        """Matrix of ``B(v, w) = (v, L conj(w))``, i.e. ``conj(L)``."""
        return np.conj(self.L)


def _classify(H):
    q = HaarQuadrature.of_order(H.quadrature_order)
    F = H.sample(q)
    Hv, CH = _lowdin(F, q)
    both = np.concatenate([Hv, np.conj(Hv)], axis=1)
    sv = np.linalg.eigvalsh(q.inner(both, both))
    rank = int(np.sum(sv > RANK_TOL * sv.max()))
    return q, Hv, CH, both, rank


def build_conjugation_operator(H, seed=0):
    """Identify ``V = H + conj(H)`` with ``H (x) C^2`` and compute ``L``.

    Raises :class:`StructuralError` when ``H`` is not invariant, when
    ``conj(H) == H`` (nothing to split) or when the actions on ``H`` and
    ``conj(H)`` are inequivalent. Every irreducible of SU(2) is equivalent to
    its conjugate, so on SU(2) the last case is unreachable for invariant ``H``.
    """
    q, Hv, CH, both, rank = _classify(H)
    d = H.dim
    if rank == d:
        raise StructuralError("H is self-conjugate")
    if rank != 2 * d:
        raise StructuralError(f"H + conj(H) has unexpected dimension {rank}")
    Vv, CV = _lowdin(both, q)

    gens = [haar_rotation(_rng.stream(seed, i), su2=True) for i in range(N_INTERTWINER_SAMPLES)]
    conjH = H.conjugate()
    rho_H, rho_V = [], []
    for g in gens:
        Ht = H.sample(q, g) @ CH
        Vt = np.concatenate([Ht, conjH.sample(q, g) @ np.conj(CH)], axis=1) @ CV
        rho = rep_matrices(Hv, Ht, q)
        resid = Ht - Hv @ rho
        if np.sqrt(np.max(np.real(np.diag(q.inner(resid, resid))))) > INVARIANCE_TOL:
            raise StructuralError("H is not G-invariant")
        rho_H.append(rho)
        rho_V.append(rep_matrices(Vv, Vt, q))
    sols, sv = solve_intertwiners(rho_H, rho_V)
    if len(sols) < 2:
        raise StructuralError("H and conj(H) carry inequivalent actions; they are already orthogonal")
    S1, S2 = sols[0], sols[1]
    # Schur: S_a^H S_b = c_ab I; orthonormalize the pair
    c = np.array([[np.trace(Sa.conj().T @ Sb) / d for Sb in (S1, S2)] for Sa in (S1, S2)])
    w, U = np.linalg.eigh(c)
    T = U @ np.diag(w ** -0.5) @ U.conj().T
    Sn = [T[0, a] * S1 + T[1, a] * S2 for a in range(2)]
    Phi = np.zeros((2 * d, 2 * d), dtype=complex)
    for i in range(d):
        for a in range(2):
            Phi[:, 2 * i + a] = Sn[a][:, i]
    # conjugation in V coordinates: c -> Sig conj(c)
    Sig = q.inner(np.conj(Vv), Vv)
    Gam = Phi.conj().T @ Sig @ np.conj(Phi)
    J, L, kres = nearest_kronecker(Gam, d)

    tensor = Vv @ Phi  # columns u_i (x) e_a as sampled functions
    gen = _rng.stream(seed, 10_000)
    recon = 0.0
    for _ in range(20):
        t = gen.standard_normal(2 * d) + 1j * gen.standard_normal(2 * d)
        f = tensor @ t
        model = tensor @ (np.kron(J, L) @ np.conj(t))
        diff = np.conj(f) - model
        recon = max(recon, float(np.sqrt(np.real(q.inner(diff, diff)))))
    return ConjugationOperator(L=L, J=J, kron_residual=kres, reconstruction_residual=recon,
                               intertwiner_singular_values=sv, dim=d, quadrature=q,
                               tensor_vectors=tensor)


@dataclass
class SplitReport:
    case: str
    orthogonality: float = None
    isotropy_residual: float = None
    isotropic_vector: np.ndarray = None
    L: np.ndarray = None
    bilinear_form: np.ndarray = None
    invariance_residual: float = None
    reconstruction_residual: float = None
    dim_K: int = None
    rank_K_plus_conjK: int = None
    dim_V: int = None
    overlap_H_conjH: float = None
    gram_K_conjK: np.ndarray = field(default=None, repr=False)

    @property
    def certified(self):
        if self.case == "self-conjugate":
            return True
        return (self.orthogonality < CERT_TOL and self.isotropy_residual < 1e-12
                and self.invariance_residual < 1e-8 and self.rank_K_plus_conjK == self.dim_V)

    def to_dict(self):
        def cx(a):
            if a is None:
                return None
            a = np.asarray(a)
            return {"re": np.real(a).tolist(), "im": np.imag(a).tolist()}
        return {
            "case": self.case,
            "certified": bool(self.certified),
            "orthogonality": self.orthogonality,
            "isotropy_residual": self.isotropy_residual,
            "isotropic_vector": cx(self.isotropic_vector),
            "L": cx(self.L),
            "bilinear_form": cx(self.bilinear_form),
            "invariance_residual": self.invariance_residual,
            "reconstruction_residual": self.reconstruction_residual,
            "dim_K": self.dim_K,
            "rank_K_plus_conjK": self.rank_K_plus_conjK,
            "dim_V": self.dim_V,
            "overlap_H_conjH": self.overlap_H_conjH,
            "gram_K_conjK": cx(self.gram_K_conjK),
        }


def split_invariant_subspace(H, quadrature_order=None, seed=0, n_checks=10):
    """``(K, report)`` with ``K`` irreducible, invariant and orthogonal to ``conj(K)``.

    For self-conjugate ``H`` the input is returned unchanged with
    ``report.case == "self-conjugate"``.
    """
    if quadrature_order is not None:
        H = SubspaceBasis(H.functions, quadrature_order)
    q, Hv, CH, both, rank = _classify(H)
    if rank == H.dim:
        return H, SplitReport(case="self-conjugate", dim_V=H.dim)
    op = build_conjugation_operator(H, seed=seed)
    d = op.dim
    B = symmetrize_bilinear(op.bilinear_form())
    z = isotropic_vector(B)
    iso = float(abs(z @ B @ z))

    # K basis as sampled vectors and as coefficients on the spanning functions
    Kv = np.column_stack([op.tensor_vectors[:, 2 * i:2 * i + 2] @ z for i in range(d)])
    span_funcs = H.functions + H.conjugate().functions
    span_samples = np.concatenate([H.sample(q), H.conjugate().sample(q)], axis=1)
    coef, *_ = np.linalg.lstsq(span_samples, Kv, rcond=None)
    K = SubspaceBasis([combination(span_funcs, coef[:, i]) for i in range(d)], H.quadrature_order)

    gram = q.inner(np.conj(Kv), Kv)  # <k_j-th conj, k_i>
    ortho = float(np.abs(gram).max())
    allv = np.concatenate([Kv, np.conj(Kv)], axis=1)
    ev = np.linalg.eigvalsh(q.inner(allv, allv))
    rank_all = int(np.sum(ev > RANK_TOL * ev.max()))

    Ko, _ = _lowdin(Kv, q)
    inv = 0.0
    for i in range(n_checks):
        g = haar_rotation(_rng.stream(seed, 20_000 + i), su2=True)
        KT = np.column_stack([np.asarray(translated(f, g)(q.alpha, q.beta, q.gamma), dtype=complex)
                              for f in K.functions])
        resid = KT - Ko @ q.inner(KT, Ko)
        inv = max(inv, float(np.sqrt(np.max(np.real(np.diag(q.inner(resid, resid)))))))
    report = SplitReport(
        case="split",
        orthogonality=ortho,
        isotropy_residual=iso,
        isotropic_vector=z,
        L=op.L,
        bilinear_form=B,
        invariance_residual=inv,
        reconstruction_residual=op.reconstruction_residual,
        dim_K=d,
        rank_K_plus_conjK=rank_all,
        dim_V=rank,
        overlap_H_conjH=float(np.abs(q.inner(np.conj(Hv), Hv)).max()),
        gram_K_conjK=gram,
    )
    return K, report


__all__ = [
    "EulerRotation", "HaarQuadrature", "SubspaceBasis", "ConjugationOperator", "SplitReport",
    "haar_inner_product", "symmetrize_bilinear", "isotropic_vector", "build_conjugation_operator",
    "split_invariant_subspace", "su2_fundamental_h1", "spin1_column_mix",
    "degree1_harmonics_on_group", "solve_intertwiners", "su2_entry", "wigner_entry",
]
