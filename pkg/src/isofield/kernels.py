"""Hot numeric kernels, each with a numba loop version and a numpy version.

The public names (``legendre_table``, ``wigner_d_table``, ``dcov_perm_stats``)
dispatch to the numba variant unless ``ISOFIELD_DISABLE_NUMBA`` is set. Both
variants are importable under their suffixed names so the benchmark and the
agreement tests can call them side by side.
"""
import math

import numpy as np
from scipy.special import gammaln

from ._accel import USE_NUMBA, njit

__all__ = [
    "legendre_table",
    "legendre_table_nb",
    "legendre_table_np",
    "wigner_d_table",
    "wigner_d_table_nb",
    "wigner_d_table_np",
    "dcov_perm_stats",
    "dcov_perm_stats_nb",
    "dcov_perm_stats_np",
]


# -- normalized associated Legendre functions ---------------------------------
#
# Table entry [l, m, j] holds sqrt((2l+1)(l-m)!/(l+m)!) P_l^m(x_j) with the
# Condon-Shortley phase, i.e. unit L2 norm for P e^{im phi} under the
# probability measure on the sphere.

@njit
def legendre_table_nb(lmax, x):
    n = x.shape[0]
    out = np.zeros((lmax + 1, lmax + 1, n))
    for j in range(n):
        xj = x[j]
        sj = math.sqrt(max(0.0, 1.0 - xj * xj))
        pmm = 1.0
        for m in range(lmax + 1):
            if m > 0:
                pmm = -math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * sj * pmm
            out[m, m, j] = pmm
            if m + 1 <= lmax:
                out[m + 1, m, j] = math.sqrt(2.0 * m + 3.0) * xj * pmm
            for l in range(m + 2, lmax + 1):
                a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
                out[l, m, j] = a * (xj * out[l - 1, m, j] - b * out[l - 2, m, j])
    return out


def legendre_table_np(lmax, x):
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    out = np.zeros((lmax + 1, lmax + 1, x.size))
    pmm = np.ones_like(x)
    for m in range(lmax + 1):
        if m > 0:
            pmm = -np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * pmm
        out[m, m] = pmm
        if m + 1 <= lmax:
            out[m + 1, m] = np.sqrt(2.0 * m + 3.0) * x * pmm
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            out[l, m] = a * (x * out[l - 1, m] - b * out[l - 2, m])
    return out


def legendre_table(lmax, x):
    """Normalized associated Legendre table of shape ``(lmax+1, lmax+1, len(x))``."""
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
    if USE_NUMBA:
        return legendre_table_nb(int(lmax), x)
    return legendre_table_np(int(lmax), x)


# -- Wigner small-d by three-term recursion in l ------------------------------
#
# Table entry [l, k + lmax, m + lmax] holds d^l_{k,m}(beta); entries with
# max(|k|,|m|) > l are zero. Each (k, m) column is seeded in closed form at
# l = max(|k|,|m|) (log-gamma binomial, no factorial overflow) and carried
# upward with the recursion
#   d^{J+1} = u_J (cos b - k m / (J(J+1))) d^J - v_J d^{J-1}.

@njit
def _seed_d(J, k, m, c, s):
    # d^J_{k,m} where J = max(|k|, |m|)
    sign = 1.0
    if abs(k) < abs(m):
        if (m - k) % 2 != 0:
            sign = -1.0
        k, m = m, k
    logbin = 0.5 * (math.lgamma(2.0 * J + 1.0) - math.lgamma(J + m + 1.0) - math.lgamma(J - m + 1.0))
    coef = math.exp(logbin)
    if k == J:
        if (J - m) % 2 != 0:
            sign = -sign
        return sign * coef * c ** (J + m) * s ** (J - m)
    return sign * coef * c ** (J - m) * s ** (J + m)


@njit
def wigner_d_table_nb(lmax, beta):
    size = 2 * lmax + 1
    out = np.zeros((lmax + 1, size, size))
    c = math.cos(0.5 * beta)
    s = math.sin(0.5 * beta)
    cb = math.cos(beta)
    for k in range(-lmax, lmax + 1):
        for m in range(-lmax, lmax + 1):
            J0 = max(abs(k), abs(m))
            out[J0, k + lmax, m + lmax] = _seed_d(J0, k, m, c, s)
            prev = 0.0
            cur = out[J0, k + lmax, m + lmax]
            for J in range(J0, lmax):
                den = math.sqrt(((J + 1.0) ** 2 - k * k) * ((J + 1.0) ** 2 - m * m))
                if J == 0:
                    nxt = cb * cur
                else:
                    u = (J + 1.0) * (2.0 * J + 1.0) / den
                    v = (J + 1.0) * math.sqrt((J * J - k * k) * (J * J - m * m)) / (J * den)
                    nxt = u * (cb - k * m / (J * (J + 1.0))) * cur - v * prev
                out[J + 1, k + lmax, m + lmax] = nxt
                prev = cur
                cur = nxt
    return out


def _seed_d_np(J, k, m, c, s):
    swap = np.abs(k) < np.abs(m)
    sign = np.where(swap & ((m - k) % 2 != 0), -1.0, 1.0)
    kk = np.where(swap, m, k)
    mm = np.where(swap, k, m)
    coef = np.exp(0.5 * (gammaln(2.0 * J + 1.0) - gammaln(J + mm + 1.0) - gammaln(J - mm + 1.0)))
    top = kk == J
    sign = np.where(top & ((J - mm) % 2 != 0), -sign, sign)
    val_top = c ** (J + mm) * s ** (J - mm)
    val_bot = c ** (J - mm) * s ** (J + mm)
    return sign * coef * np.where(top, val_top, val_bot)


def wigner_d_table_np(lmax, beta):
    size = 2 * lmax + 1
    out = np.zeros((lmax + 1, size, size))
    c = math.cos(0.5 * beta)
    s = math.sin(0.5 * beta)
    cb = math.cos(beta)
    k, m = np.meshgrid(np.arange(-lmax, lmax + 1), np.arange(-lmax, lmax + 1), indexing="ij")
    J0 = np.maximum(np.abs(k), np.abs(m))
    kf = k.astype(float)
    mf = m.astype(float)
    for l in range(lmax + 1):
        seed = J0 == l
        if seed.any():
            out[l][seed] = _seed_d_np(l, k[seed], m[seed], c, s)
        if l == 0:
            continue
        J = l - 1
        act = J0 <= J
        den = np.sqrt(((J + 1.0) ** 2 - kf[act] ** 2) * ((J + 1.0) ** 2 - mf[act] ** 2))
        if J == 0:
            out[l][act] = cb * out[J][act]
            continue
        u = (J + 1.0) * (2.0 * J + 1.0) / den
        v = (J + 1.0) * np.sqrt((J * J - kf[act] ** 2) * (J * J - mf[act] ** 2)) / (J * den)
        out[l][act] = u * (cb - kf[act] * mf[act] / (J * (J + 1.0))) * out[J][act] - v * out[J - 1][act]
    return out


def wigner_d_table(lmax, beta):
    """All Wigner small-d matrices ``d^l(beta)`` for ``l <= lmax``, zero padded."""
    if USE_NUMBA:
        return wigner_d_table_nb(int(lmax), float(beta))
    return wigner_d_table_np(int(lmax), float(beta))


# -- distance covariance under row permutations --------------------------------

@njit
def dcov_perm_stats_nb(A, B, perms):
    n = A.shape[0]
    n_perm = perms.shape[0]
    out = np.empty(n_perm)
    for p in range(n_perm):
        pi = perms[p]
        acc = 0.0
        for i in range(n):
            bi = pi[i]
            row = 0.0
            for j in range(n):
                row += A[i, j] * B[bi, pi[j]]
            acc += row
        out[p] = acc / (n * n)
    return out


def dcov_perm_stats_np(A, B, perms):
    n = A.shape[0]
    out = np.empty(len(perms))
    for p, pi in enumerate(perms):
        out[p] = np.sum(A * B[np.ix_(pi, pi)]) / (n * n)
    return out


def dcov_perm_stats(A, B, perms):
    """dCov^2 of (X, Y[pi]) for each permutation row ``pi`` of ``perms``.

    ``A`` and ``B`` are the double-centered distance matrices of X and Y.
    """
    A = np.ascontiguousarray(A, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    perms = np.ascontiguousarray(np.atleast_2d(perms), dtype=np.int64)
    if USE_NUMBA:
        return dcov_perm_stats_nb(A, B, perms)
    return dcov_perm_stats_np(A, B, perms)
