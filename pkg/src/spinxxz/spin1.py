"""Open spin-1 XXZ chain: Hamiltonian, fused spin-1 transfer matrix and energies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import ch, cth, embed, sh, th
from .errors import ConvergenceError, PoleError, ValidationError
from .params import BoundaryCase
from .transfer import delta, delta1, transfer

__all__ = [
    "spin1_operators", "boundary_coefficients", "bulk_term", "build_hamiltonian",
    "Spin1Hamiltonian", "EnergyRecord", "spin1_transfer", "rescale_spin1",
    "c1_coefficient", "c2_coefficient", "contour_derivative", "richardson_derivative",
    "lambda11_tilde", "fused_basis_gauge", "energy_from_derivative", "energies_from_derivative", "c_function", "energy_from_bethe",
    "diagonalize",
]


def _require_spin1(params):
    if params.two_s != 2:
        raise ValidationError("the spin-1 chain needs s = 1", "s")


def spin1_operators():
    """``(Sz, S+, S-, Sx, Sy)`` in the basis ``m = 1, 0, -1``."""
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    sp = np.sqrt(2) * np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=complex)
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    return sz, sp, sm, sx, sy


def _a0(alpha, beta, eta):
    den = sh(alpha - eta / 2) * sh(alpha + eta / 2) * ch(beta - eta / 2) * ch(beta + eta / 2)
    if abs(den) < 1e-13:
        for name, val in (
            ("sh(alpha - eta/2)", sh(alpha - eta / 2)),
            ("sh(alpha + eta/2)", sh(alpha + eta / 2)),
            ("ch(beta - eta/2)", ch(beta - eta / 2)),
            ("ch(beta + eta/2)", ch(beta + eta / 2)),
        ):
            if abs(val) < 1e-13:
                raise PoleError(name + " in a0", val)
    return 1.0 / den


def boundary_coefficients(alpha, beta, theta, eta):
    """Coefficients ``a_1 .. a_8`` of the one-site boundary operator (index 0 holds ``a_0``)."""
    a0 = _a0(alpha, beta, eta)
    she, sh2e = sh(eta), sh(2 * eta)
    c32 = ch(eta) ** 1.5
    plus = ch(beta) * sh(alpha) * ch(eta / 2) + ch(alpha) * sh(beta) * sh(eta / 2)
    minus = ch(beta) * sh(alpha) * ch(eta / 2) - ch(alpha) * sh(beta) * sh(eta / 2)
    return [
        a0,
        0.25 * a0 * (ch(2 * alpha) - ch(2 * beta) + ch(eta)) * sh2e * she,
        0.25 * a0 * sh(2 * alpha) * sh(2 * beta) * sh2e,
        -0.125 * a0 * np.exp(2 * theta) * sh2e * she,
        -0.125 * a0 * np.exp(-2 * theta) * sh2e * she,
        a0 * np.exp(theta) * plus * she * c32,
        a0 * np.exp(-theta) * plus * she * c32,
        -a0 * np.exp(theta) * minus * she * c32,
        -a0 * np.exp(-theta) * minus * she * c32,
    ]


def _boundary_operator(coef):
    sz, sp, sm, _, _ = spin1_operators()
    return (
        coef[1] * sz @ sz + coef[2] * sz + coef[3] * sp @ sp + coef[4] * sm @ sm
        + coef[5] * sp @ sz + coef[6] * sz @ sm + coef[7] * sz @ sp + coef[8] * sm @ sz
    )


def bulk_term(eta):
    """Two-site bulk operator on ``C^3 (x) C^3``."""
    sz, _, _, sx, sy = spin1_operators()
    one = np.eye(3)
    perp = np.kron(sx, sx) + np.kron(sy, sy)
    zz = np.kron(sz, sz)
    sig = perp + zz
    return (
        sig - sig @ sig
        + 2 * sh(eta) ** 2 * (zz + np.kron(sz @ sz, one) + np.kron(one, sz @ sz) - zz @ zz)
        - 4 * sh(eta / 2) ** 2 * (perp @ zz + zz @ perp)
    )


@dataclass(frozen=True)
class Spin1Hamiltonian:
    N: int
    params: object
    matrix: np.ndarray
    bulk: tuple
    boundary: tuple


def build_hamiltonian(params):
    """Dense ``3^N x 3^N`` Hamiltonian: nearest-neighbour bulk terms plus boundary terms at sites 1 and N."""
    _require_spin1(params)
    eta, N = params.eta, params.N
    dims = [3] * N
    h2 = bulk_term(eta)
    bulk = tuple(embed(h2, dims, [n, n + 1]) for n in range(N - 1))
    a = boundary_coefficients(params.alpha_minus, params.beta_minus, params.theta_minus, eta)
    b = boundary_coefficients(params.alpha_plus, -params.beta_plus, params.theta_plus, eta)
    bnd = (embed(_boundary_operator(a), dims, [0]), embed(_boundary_operator(b), dims, [N - 1]))
    mat = sum(bulk, np.zeros((3**N, 3**N), dtype=complex)) + bnd[0] + bnd[1]
    return Spin1Hamiltonian(N=N, params=params, matrix=mat, bulk=bulk, boundary=bnd)


@dataclass
class EnergyRecord:
    level_index: int
    E: float
    source: str
    residual_imag: float

    @classmethod
    def from_complex(cls, level, value, source):
        return cls(level_index=level, E=float(np.real(value)), source=source,
                   residual_imag=float(np.imag(value)))


def diagonalize(params):
    """Sorted Hamiltonian energies as :class:`EnergyRecord` objects."""
    ham = build_hamiltonian(params)
    vals = np.linalg.eigvals(ham.matrix)
    vals = vals[np.argsort(vals.real)]
    return [EnergyRecord.from_complex(i, v, "diagonalization") for i, v in enumerate(vals)]


def rescale_spin1(u, params):
    """``sh(2u) sh(2u+2eta) / [sh(u) sh(u+eta)]^{2N}``."""
    eta = params.eta
    den = (sh(u) * sh(u + eta)) ** (2 * params.N)
    if abs(den) < 1e-300:
        raise PoleError("sh(u) sh(u+eta)", den)
    return sh(2 * u) * sh(2 * u + 2 * eta) / den


def spin1_transfer(u, params):
    """Rescaled spin-1 auxiliary transfer matrix built through the fusion hierarchy.

    Finite at ``u = 0`` only as a limit; sample ``|u|`` away from zero.
    """
    _require_spin1(params)
    eta = params.eta
    t = transfer(0.5, u - eta / 2, params) @ transfer(0.5, u + eta / 2, params)
    t = t - delta(u - eta / 2, params) * np.eye(params.dim)
    return rescale_spin1(u, params) * t


def fused_basis_gauge(params):
    """Diagonal ``D`` with ``H = D (c1 t~'(0) + c2) D^-1``.

    The fused quantum space normalizes ``m = 0`` differently from the
    Hamiltonian basis; per site ``D = diag(1, -sqrt(ch eta), 1)``.
    """
    local = np.array([1.0, -np.sqrt(ch(params.eta)), 1.0])
    d = np.ones(1, dtype=complex)
    for _ in range(params.N):
        d = np.kron(d, local)
    return np.diag(d)


def lambda11_tilde(u, lam, params):
    """Rescaled spin-1 eigenvalue from a spin-1/2 branch ``lam`` (un-rescaled eigenvalue function)."""
    eta = params.eta
    return rescale_spin1(u, params) * (
        lam(u - eta / 2) * lam(u + eta / 2) - delta(u - eta / 2, params)
    )


def c1_coefficient(params):
    eta, N = params.eta, params.N
    am, ap, bm, bp = params.alpha_minus, params.alpha_plus, params.beta_minus, params.beta_plus
    inner = (
        16 * (sh(2 * eta) * sh(eta)) ** (2 * N) * sh(3 * eta)
        * sh(am - eta / 2) * sh(am + eta / 2) * ch(bm - eta / 2) * ch(bm + eta / 2)
        * sh(ap - eta / 2) * sh(ap + eta / 2) * ch(bp - eta / 2) * ch(bp + eta / 2)
    )
    if abs(inner) < 1e-300:
        raise PoleError("c1 denominator", inner)
    return ch(eta) / inner


def c2_coefficient(params):
    eta, N = params.eta, params.N
    am, ap, bm, bp = params.alpha_minus, params.alpha_plus, params.beta_minus, params.beta_plus
    a0 = _a0(am, bm, eta)
    b = 2 * (-ch(2 * bm) - ch(eta) ** 3 + ch(2 * am) * (1 + ch(2 * bm) * ch(eta)))
    d = -4 * sh(3 * eta) * sh(ap + eta / 2) * sh(ap - eta / 2) * ch(bp + eta / 2) * ch(bp - eta / 2)
    if abs(d) < 1e-300:
        raise PoleError("d in c2", d)
    c2e, c4e = ch(2 * eta), ch(4 * eta)
    term1 = (
        -2 * ch(2 * ap) * (ch(eta) * (3 + 7 * c2e + c4e) + ch(2 * bp) * (4 + 5 * c2e + 2 * c4e))
        + 2 * ch(eta) * (ch(2 * bp) * (3 + 7 * c2e + c4e) + ch(eta) * (5 + 3 * c2e + 3 * c4e))
    )
    term2 = (
        ch(2 * bp) * (2 + 4 * ch(eta) * ch(3 * eta)) + ch(eta) * (5 * c2e + c4e)
        - 2 * ch(2 * ap) * (1 + c2e + ch(2 * bp) * (ch(eta) + 2 * ch(3 * eta)) + c4e)
    )
    return (
        -a0 / 4 * b * ch(eta) - (N - 1) * (4 + c2e) + 2 * N * ch(eta) ** 2
        - sh(eta) / (2 * d) * term1 - sh(2 * eta) / (2 * d) * term2
    )


def contour_derivative(f, z0=0.0, radius=0.2, n=64):
    """First derivative of an analytic ``f`` at ``z0`` from the trapezoidal Cauchy integral.

    Avoids evaluating near ``z0``, which matters for functions assembled from
    a removable singularity.
    """
    k = np.arange(n)
    w = np.exp(2j * np.pi * k / n)
    vals = np.array([f(z0 + radius * wk) for wk in w])
    d = np.tensordot(w.conj(), vals, axes=1) / (n * radius)
    return complex(d) if d.ndim == 0 else d


def richardson_derivative(f, z0=0.0, steps=(1e-3, 5e-4, 2.5e-4), rtol=1e-8):
    """Central differences with two Richardson levels.

    Raises ``ConvergenceError`` when the two level-one estimates disagree by
    more than ``rtol`` relative.
    """
    d0 = [(f(z0 + h) - f(z0 - h)) / (2 * h) for h in steps]
    d1 = [(4 * d0[i + 1] - d0[i]) / 3 for i in range(len(d0) - 1)]
    d2 = (16 * d1[1] - d1[0]) / 15
    scale = max(abs(d2), 1.0)
    if abs(d1[1] - d1[0]) > rtol * scale:
        raise ConvergenceError(
            "derivative estimates did not converge",
            {"central": [complex(x) for x in d0], "level1": [complex(x) for x in d1]},
        )
    return complex(d2)


def _contour_radius(params):
    return min(0.2, 0.4 * abs(params.eta))


def energy_from_derivative(lam, params, level=-1, radius=None):
    """Energy ``c1 * d/du Lambda11~(0) + c2`` of one branch.

    ``lam`` is the branch's un-rescaled ``t^(1/2,1)`` eigenvalue function.
    """
    _require_spin1(params)
    r = radius or _contour_radius(params)
    deriv = contour_derivative(lambda u: lambda11_tilde(u, lam, params), 0.0, r)
    e = c1_coefficient(params) * deriv + c2_coefficient(params)
    return EnergyRecord.from_complex(level, e, "derivative_formula")


def energies_from_derivative(branches, params, radius=None):
    """:func:`energy_from_derivative` for every branch of an :class:`EigenBranches` at once."""
    _require_spin1(params)
    r = radius or _contour_radius(params)
    deriv = contour_derivative(lambda u: lambda11_tilde(u, branches.values, params), 0.0, r)
    e = c1_coefficient(params) * deriv + c2_coefficient(params)
    return [EnergyRecord.from_complex(i, v, "derivative_formula") for i, v in enumerate(e)]


def c_function(u, params):
    """``C(u)`` with the ``[sh u sh(u+eta)]^{2N}`` pole cancelled against delta0.

    Reduces to ``-[sh(u+2eta) sh(u-eta)]^{2N} sh(2u-eta) sh(2u+3eta) delta1(u - eta/2)``.
    """
    eta = params.eta
    rest = (sh(u + 2 * eta) * sh(u - eta)) ** (2 * params.N)
    return -rest * sh(2 * u - eta) * sh(2 * u + 3 * eta) * delta1(u - eta / 2, params)


def energy_from_bethe(sol, params):
    """Energy from the roots of Q1 for boundary case I or II."""
    _require_spin1(params)
    eta, N = params.eta, params.N
    case = BoundaryCase.parse(sol.case)
    total = 0j
    for r in sol.roots1:
        den = sh(r + 1.5 * eta) * sh(r - 0.5 * eta)
        if abs(den) < 1e-13:
            raise PoleError(f"root {r:.6g} at a pole of the energy sum", den)
        total += 1.0 / den
    last = cth(eta / 2) if case is BoundaryCase.I else th(eta / 2)
    cprime = richardson_derivative(lambda u: c_function(u, params))
    e = (
        sh(2 * eta) ** 2 * total
        + 2 * sh(2 * eta) * ((N + 1) * cth(eta) - last)
        + c1_coefficient(params) * cprime
        + c2_coefficient(params)
    )
    return EnergyRecord.from_complex(sol.level_index, e, "bethe_roots")
