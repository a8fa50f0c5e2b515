"""Hyperbolic helpers and dense tensor-space operators.

Every operator in the package is a dense ``complex128`` numpy array. Tensor
factors are ordered left to right, so ``embed(X, [2, 3], [0])`` is
``kron(X, I_3)``.
"""
from functools import lru_cache
from itertools import permutations
from math import factorial

import numpy as np

from .errors import ValidationError

__all__ = [
    "sh", "ch", "th", "cth",
    "twice", "kron", "embed", "permutation_operator",
    "symmetric_projector", "symmetric_isometry", "opnorm",
]


def sh(x):
    return np.sinh(x)


def ch(x):
    return np.cosh(x)


def th(x):
    return np.tanh(x)


def cth(x):
    return 1.0 / np.tanh(x)


def twice(spin):
    """Return ``2*spin`` as an int, rejecting values that are not half-integers."""
    two = 2 * spin
    n = int(round(float(two)))
    if abs(float(two) - n) > 1e-12 or n < 0:
        raise ValidationError(f"{spin!r} is not a non-negative half-integer", "spin")
    return n


def opnorm(a):
    """Spectral norm (largest singular value)."""
    a = np.asarray(a)
    if a.ndim == 0 or a.size == 0:
        return float(abs(a)) if a.ndim == 0 else 0.0
    return float(np.linalg.norm(a, 2))


def kron(*ops):
    """Kronecker product of any number of matrices, left factor outermost."""
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def embed(op, site_dims, positions):
    """Place ``op`` on the tensor factors listed in ``positions``.

    ``op`` must act on the factors in the order given by ``positions``; those
    need not be adjacent or sorted. All remaining factors receive the identity.

    Examples
    --------
    >>> x = np.array([[0, 1], [1, 0]])
    >>> np.allclose(embed(x, [2, 2], [1]), np.kron(np.eye(2), x))
    True
    """
    site_dims = [int(d) for d in site_dims]
    positions = [int(p) for p in positions]
    op = np.asarray(op, dtype=complex)
    n = len(site_dims)
    if len(set(positions)) != len(positions) or any(p < 0 or p >= n for p in positions):
        raise ValidationError(f"invalid positions {positions} for {n} sites", "positions")
    sub = int(np.prod([site_dims[p] for p in positions], dtype=int))
    if op.shape != (sub, sub):
        raise ValidationError(
            f"operator shape {op.shape} does not match dims {[site_dims[p] for p in positions]}",
            "op",
        )
    rest = [k for k in range(n) if k not in positions]
    rest_dim = int(np.prod([site_dims[k] for k in rest], dtype=int))
    full = np.kron(op, np.eye(rest_dim, dtype=complex))
    order = positions + rest  # factor order of `full`
    dims = [site_dims[k] for k in order]
    t = full.reshape(dims + dims)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    total = int(np.prod(site_dims, dtype=int))
    return np.ascontiguousarray(t.reshape(total, total))


def permutation_operator(site_dims, perm):
    """Operator sending factor ``k`` of a product state to slot ``perm[k]``."""
    site_dims = [int(d) for d in site_dims]
    n = len(site_dims)
    total = int(np.prod(site_dims, dtype=int))
    eye = np.eye(total, dtype=complex).reshape(site_dims + [total])
    # new tensor index at slot perm[k] is old index k
    new_dims_order = np.argsort(perm)
    out = eye.transpose(list(new_dims_order) + [n])
    return np.ascontiguousarray(out.reshape(total, total))


@lru_cache(maxsize=None)
def _projector(n):
    if n < 1:
        raise ValidationError("symmetric projector needs n >= 1", "n")
    dims = [2] * n
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    total = 2**n
    out = np.eye(total, dtype=complex)
    for k in range(n):
        acc = np.eye(total, dtype=complex)  # the l = k term, P_{k,k} = 1
        for l in range(k):
            acc = acc + embed(swap, dims, [l, k])
        out = out @ acc
    out /= factorial(n)
    out.setflags(write=False)
    return out


def symmetric_projector(n):
    """Symmetrizer on ``(C^2)^{\\otimes n}`` built as a product of partial sums of transpositions."""
    return _projector(int(n))


@lru_cache(maxsize=None)
def _isometry(n):
    if n < 1:
        raise ValidationError("symmetric isometry needs n >= 1", "n")
    total = 2**n
    v = np.zeros((total, n + 1), dtype=complex)
    for idx in range(total):
        downs = bin(idx).count("1")
        v[idx, downs] = 1.0
    v /= np.sqrt(np.sum(np.abs(v) ** 2, axis=0))
    v.setflags(write=False)
    return v


def symmetric_isometry(n):
    """Orthonormal Dicke basis of the symmetric subspace of ``n`` qubits.

    Column ``m`` is the normalized sum of product states with ``m`` down spins
    (qubit state index 1), so column 0 is the highest-weight state.
    """
    return _isometry(int(n))


def brute_symmetrizer(n):
    """Average of all ``n!`` factor permutations; reference for tests."""
    dims = [2] * n
    out = np.zeros((2**n, 2**n), dtype=complex)
    for perm in permutations(range(n)):
        out += permutation_operator(dims, perm)
    return out / factorial(n)
