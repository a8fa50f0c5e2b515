"""Spin-1/2 R and K matrices and their fused higher-spin versions.

Fused operators are built in the full tensor space of ``2j`` (or ``2s``)
qubits and compressed onto the symmetric subspace with the Dicke isometry,
so ``fused_r(j, s, ...)`` is ``(2j+1)(2s+1)`` square.
"""
from functools import lru_cache

import numpy as np

from .algebra import ch, embed, kron, opnorm, sh, symmetric_isometry, twice
from .errors import PoleError

__all__ = [
    "r_half", "k_minus_half", "fused_r", "fused_k", "xi", "k_plus_normalization",
    "ybe_residual", "bybe_residual",
]


def r_half(u, params):
    """The 4x4 spin-1/2 R matrix in the basis ``|uu>, |ud>, |du>, |dd>``."""
    eta = params.eta
    a, b, c = sh(u + eta), sh(u), sh(eta)
    return np.array(
        [[a, 0, 0, 0], [0, b, c, 0], [0, c, b, 0], [0, 0, 0, a]], dtype=complex
    )


def _k_minus_raw(u, alpha, beta, theta):
    d1 = sh(alpha) * ch(beta) * ch(u)
    d2 = ch(alpha) * sh(beta) * sh(u)
    off = sh(2 * u)
    return np.array(
        [[2 * (d1 + d2), np.exp(theta) * off], [np.exp(-theta) * off, 2 * (d1 - d2)]],
        dtype=complex,
    )


def k_minus_half(u, params):
    """Spin-1/2 right-boundary K matrix."""
    return _k_minus_raw(u, params.alpha_minus, params.beta_minus, params.theta_minus)


def _r_raw(u, eta):
    a, b, c = sh(u + eta), sh(u), sh(eta)
    return np.array(
        [[a, 0, 0, 0], [0, b, c, 0], [0, c, b, 0], [0, 0, 0, a]], dtype=complex
    )


@lru_cache(maxsize=4096)
def _fused_r_cached(tj, ts, u, eta):
    na, nb = tj, ts
    dims = [2] * (na + nb)
    j, s = tj / 2, ts / 2
    full = np.eye(2 ** (na + nb), dtype=complex)
    # leftmost factor has the smallest (k, l); this keeps the symmetric
    # subspaces invariant on both sides
    for k in range(1, na + 1):
        for l in range(1, nb + 1):
            arg = u + (k + l - j - s - 1) * eta
            full = full @ embed(_r_raw(arg, eta), dims, [k - 1, na + l - 1])
    v = kron(symmetric_isometry(na), symmetric_isometry(nb))
    out = v.conj().T @ full @ v
    out.setflags(write=False)
    return out


def fused_r(j, s, u, params):
    """Fused R matrix acting on spin-j (aux) times spin-s, dimension ``(2j+1)(2s+1)``.

    Results are memoized on ``(2j, 2s, u, eta)``; the returned array is read-only.
    """
    return _fused_r_cached(twice(j), twice(s), complex(u), complex(params.eta))


def xi(x, params):
    """Scalar ``xi(x) = sh(x + eta) sh(x - eta)`` used by the K+ normalization and delta."""
    eta = params.eta
    return sh(x + eta) * sh(x - eta)


def k_plus_normalization(j, u, params):
    """Scalar ``f^(j)(u)`` dividing the fused K+ matrix (empty product for j = 1/2)."""
    tj = twice(j)
    eta = params.eta
    out = 1.0 + 0j
    for l in range(1, tj):
        for k in range(1, l + 1):
            out *= -xi(2 * u + (l + k + 1 - tj) * eta, params)
    return out


@lru_cache(maxsize=4096)
def _fused_k_cached(tj, u, eta, alpha, beta, theta):
    n = tj
    j = tj / 2
    dims = [2] * n
    full = np.eye(2**n, dtype=complex)
    for k in range(1, n + 1):
        for l in range(1, k):
            full = full @ embed(_r_raw(2 * u + (k + l - 2 * j - 1) * eta, eta), dims, [l - 1, k - 1])
        kk = _k_minus_raw(u + (k - j - 0.5) * eta, alpha, beta, theta)
        full = full @ embed(kk, dims, [k - 1])
    v = symmetric_isometry(n)
    out = v.conj().T @ full @ v
    out.setflags(write=False)
    return out


def fused_k(j, sign, u, params):
    """Fused boundary matrix K^{-(j)}(u) (``sign='minus'``) or K^{+(j)}(u) (``sign='plus'``).

    K+ is K- evaluated at ``-u-eta`` with ``(alpha, beta, theta)_-`` replaced by
    ``(-alpha_+, -beta_+, theta_+)``, divided by :func:`k_plus_normalization`.
    """
    tj = twice(j)
    u = complex(u)
    eta = complex(params.eta)
    if sign in ("minus", "-"):
        return _fused_k_cached(tj, u, eta, params.alpha_minus, params.beta_minus, params.theta_minus)
    if sign not in ("plus", "+"):
        raise ValueError(f"sign must be 'minus' or 'plus', got {sign!r}")
    norm = k_plus_normalization(j, u, params)
    if abs(norm) < 1e-300:
        for l in range(1, tj):
            for k in range(1, l + 1):
                if abs(xi(2 * u + (l + k + 1 - tj) * eta, params)) < 1e-14:
                    raise PoleError(f"xi(2u + {l + k + 1 - tj}*eta) in f^({j})", 0.0)
        raise PoleError(f"f^({j})(u)", norm)
    km = _fused_k_cached(tj, -u - eta, eta, -params.alpha_plus, -params.beta_plus, params.theta_plus)
    return km / norm


def ybe_residual(j, k, s, u, v, params):
    """Relative Yang-Baxter residual on spin-j (x) spin-k (x) spin-s."""
    dj, dk, ds = twice(j) + 1, twice(k) + 1, twice(s) + 1
    dims = [dj, dk, ds]
    r12 = embed(fused_r(j, k, u - v, params), dims, [0, 1])
    r13 = embed(fused_r(j, s, u, params), dims, [0, 2])
    r23 = embed(fused_r(k, s, v, params), dims, [1, 2])
    lhs = r12 @ r13 @ r23
    rhs = r23 @ r13 @ r12
    return opnorm(lhs - rhs) / max(opnorm(lhs), opnorm(rhs))


def bybe_residual(j, s, u, v, params):
    """Relative boundary Yang-Baxter residual for K^{-} on spin-j (x) spin-s."""
    dims = [twice(j) + 1, twice(s) + 1]
    rm = fused_r(j, s, u - v, params)
    rp = fused_r(j, s, u + v, params)
    ka = embed(fused_k(j, "minus", u, params), dims, [0])
    kb = embed(fused_k(s, "minus", v, params), dims, [1])
    lhs = rm @ ka @ rp @ kb
    rhs = kb @ rp @ ka @ rm
    return opnorm(lhs - rhs) / max(opnorm(lhs), opnorm(rhs))
