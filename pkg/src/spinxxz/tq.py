"""Two-Q T-Q relations, Bethe-ansatz-type equations and the Bethe-root solver.

A crossing-symmetric Q function ``prod_k sh(u - r_k) sh(u + r_k + eta)`` equals
``2**-M prod_k (x - x_k)`` with ``x = ch(2u + eta)`` and ``x_k = ch(2 r_k + eta)``,
so fitting Q reduces to fitting a polynomial in ``x``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import ch, sh
from .errors import ConvergenceError, PoleError, RootCollisionError, ValidationError
from .params import BoundaryCase
from .transfer import EigenBranches, delta, transfer

__all__ = [
    "h1", "h2", "w_function", "root_counts", "q_function", "m_matrix", "shift_matrix",
    "null_vector", "BetheSolution", "SolverSettings", "fit_q_functions",
    "lambda_from_tq", "bae_residual", "bae_terms", "refine_roots", "classify_equations", "vanishing_flags", "roundoff_floor",
    "normalize_root", "normalize_roots", "transfer_branches", "solve_bethe", "tq_residual",
]


def h1(u, case, params):
    """Closed-form ``h^(1)(u)`` for boundary case I or II."""
    case = BoundaryCase.parse(case)
    s, eta, N = float(params.s), params.eta, params.N
    den = sh(2 * u + 3 * eta)
    if abs(den) < 1e-13:
        raise PoleError("sh(2u+3eta) in h1", den)
    prod = 1.0 + 0j
    for k in range(params.two_s):
        prod *= sh(u + (s - k + 1.5) * eta)
    mid = sh(u + eta) ** 2 if case is BoundaryCase.I else ch(u + eta) ** 2
    return 4 * prod ** (2 * N) * mid * sh(2 * u + 4 * eta) / den


def h2(u, case, params):
    """``h^(2)(u) = h^(1)(-u - 2 eta)``."""
    return h1(-u - 2 * params.eta, case, params)


def w_function(u, case, params):
    """Ratio of shifted h2 products over shifted h1 products."""
    p, eta = params.p, params.eta
    num = np.prod([h2(u + j * eta, case, params) for j in range(1, p + 1, 2)])
    den = np.prod([h1(u + j * eta, case, params) for j in range(0, p, 2)])
    return num / den


def root_counts(params):
    """``(M1, M2)`` with ``M1 = sN + (p+1)/2`` and ``M2 = M1 - 1``."""
    m1 = params.two_s * params.N // 2 + (params.p + 1) // 2
    return m1, m1 - 1


def q_function(roots, u, eta):
    """Evaluate ``prod_k sh(u - r_k) sh(u + r_k + eta)``."""
    out = 1.0 + 0j
    for r in roots:
        out *= sh(u - r) * sh(u + r + eta)
    return out


def shift_matrix(n):
    """Cyclic shift ``S`` with ones on the superdiagonal and in the bottom-left corner."""
    return np.roll(np.eye(n, dtype=complex), 1, axis=1)


def m_matrix(u, lam, case, params):
    """The ``(p+1) x (p+1)`` matrix whose determinant vanishes on eigenvalue branches.

    ``lam`` is either a callable ``u -> Lambda(u)`` or the sequence
    ``Lambda(u + k*eta)`` for ``k = 0..p``.
    """
    p, eta = params.p, params.eta
    n = p + 1
    if n % 2:
        raise ValidationError("p must be odd", "p")
    vals = [lam(u + k * eta) for k in range(n)] if callable(lam) else list(lam)
    m = np.zeros((n, n), dtype=complex)
    for k in range(n):
        x = u + k * eta
        m[k, k] = vals[k]
        if k % 2 == 0:
            m[k, (k + 1) % n] = -delta(x, params) / h1(x, case, params)
            m[k, k - 1] = -delta(x - eta, params) / h2(x - eta, case, params)
        else:
            m[k, k - 1] = -h1(x - eta, case, params)
            m[k, (k + 1) % n] = -h2(x, case, params)
    return m


def null_vector(m, max_ratio=0.1):
    """Unit right null vector of ``m`` via SVD.

    Raises ``ConvergenceError`` when the two smallest singular values are not
    separated by at least ``1/max_ratio`` or the second one is itself zero.
    """
    _, sv, vh = np.linalg.svd(m)
    tiny = 1e3 * np.finfo(float).eps * sv[0]
    if sv.size > 1 and (sv[-1] > max_ratio * sv[-2] or sv[-2] <= tiny):
        raise ConvergenceError(
            "ambiguous null space; sample a different u",
            {"singular_values": sv.tolist()},
        )
    vec = vh[-1].conj()
    return vec / np.linalg.norm(vec)


@dataclass
class SolverSettings:
    """Knobs for :func:`solve_bethe`."""

    tol: float = 1e-10
    grid: tuple = (0.05, 0.65)
    grid_imag: float = 0.013
    fit_tol: float = 1e-7
    newton_maxiter: int = 60
    reference_points: tuple = (0.1234 + 0.0567j, -0.2718 + 0.3141j)


@dataclass
class BetheSolution:
    """Bethe roots of one eigenvalue branch with their diagnostics."""

    case: BoundaryCase
    roots1: list
    roots2: list
    bae_residual: float = float("nan")
    tq_residual: float = float("nan")
    level_index: int = -1
    fit_residual: float = float("nan")
    flagged: bool = False
    notes: str = ""

    def q1(self, u, eta):
        return q_function(self.roots1, u, eta)

    def q2(self, u, eta):
        return q_function(self.roots2, u, eta)


def lambda_from_tq(u, sol, which, params):
    """Eigenvalue of ``t^(1/2,s)`` reconstructed from the roots via either T-Q relation."""
    eta = params.eta
    case = sol.case
    if which in ("TQ1", 1):
        q1 = sol.q1(u, eta)
        if abs(q1) < 1e-300:
            raise PoleError("Q1(u) (shift the sample point)", q1)
        return (
            delta(u, params) / h1(u, case, params) * sol.q2(u + eta, eta)
            + delta(u - eta, params) / h2(u - eta, case, params) * sol.q2(u - eta, eta)
        ) / q1
    if which in ("TQ2", 2):
        q2 = sol.q2(u, eta)
        if abs(q2) < 1e-300:
            raise PoleError("Q2(u) (shift the sample point)", q2)
        return (
            h1(u - eta, case, params) * sol.q1(u - eta, eta)
            + h2(u, case, params) * sol.q1(u + eta, eta)
        ) / q2
    raise ValueError(f"which must be 'TQ1' or 'TQ2', got {which!r}")


def _bae_pair(u, family, roots1, roots2, case, params):
    eta = params.eta
    if family == 1:
        a = delta(u, params) * h2(u - eta, case, params) * q_function(roots2, u + eta, eta)
        b = delta(u - eta, params) * h1(u, case, params) * q_function(roots2, u - eta, eta)
    else:
        a = h1(u - eta, case, params) * q_function(roots1, u - eta, eta)
        b = h2(u, case, params) * q_function(roots1, u + eta, eta)
    return a, b


def bae_terms(roots1, roots2, case, params):
    """Pairs ``(A_j, B_j)`` whose sum vanishes on a solution.

    First family (one per root of Q1):
    ``A = delta(u) h2(u-eta) Q2(u+eta)``, ``B = delta(u-eta) h1(u) Q2(u-eta)``.
    Second family (one per root of Q2):
    ``A = h1(u-eta) Q1(u-eta)``, ``B = h2(u) Q1(u+eta)``.
    """
    out = [_bae_pair(r, 1, roots1, roots2, case, params) for r in roots1]
    out += [_bae_pair(r, 2, roots1, roots2, case, params) for r in roots2]
    return out


def vanishing_flags(roots1, roots2, case, params, radius=1e-3, ratio=1e-8, n=8):
    """Whether ``A`` and ``B`` vanish at each root.

    Each equation is viewed as a function of its own root with all other
    roots held fixed; a factor counts as vanishing when its value at the root
    is below ``ratio`` times its size on a circle of ``radius`` around it.
    """
    circle = radius * np.exp(2j * np.pi * np.arange(n) / n)
    out = []
    for family, roots in ((1, roots1), (2, roots2)):
        for r in roots:
            with np.errstate(all="ignore"):
                a0, b0 = _bae_pair(r, family, roots1, roots2, case, params)
                ring = np.abs([_bae_pair(r + c, family, roots1, roots2, case, params) for c in circle])
            out.append((abs(a0) <= ratio * ring[:, 0].max(), abs(b0) <= ratio * ring[:, 1].max()))
    return out


def classify_equations(roots1, roots2, case, params):
    """Split equation indices into regular and singular ones.

    An equation whose ``A`` and ``B`` both vanish at the root (for example a
    root pinned to a zero of ``delta``, or a member of an exact ``eta``-string
    of period ``i*pi``) carries no constraint. An equation where only ``B``
    vanishes is a root collision.
    """
    roots = list(roots1) + list(roots2)
    regular, singular = [], []
    for i, (za, zb) in enumerate(vanishing_flags(roots1, roots2, case, params)):
        if za and zb:
            singular.append(i)
        elif zb:
            raise RootCollisionError([roots[i]] + [r for r in roots if r is not roots[i] and _near_shift(roots[i], r, params.eta)])
        else:
            regular.append(i)
    return regular, singular


def bae_residual(sol, params):
    """Largest ``|A/B + 1|`` over the regular equations of :func:`bae_terms`.

    This is ``LHS * RHS^{-1} + 1`` with the minus sign of the right-hand side
    moved to the left, so it vanishes on a solution. Equations that are
    ``0/0`` at their root are skipped (see :func:`classify_equations`); a
    vanishing denominator alone raises ``RootCollisionError``.
    """
    regular, _ = classify_equations(sol.roots1, sol.roots2, sol.case, params)
    terms = bae_terms(sol.roots1, sol.roots2, sol.case, params)
    worst = 0.0
    for i in regular:
        a, b = terms[i]
        worst = max(worst, abs(a / b + 1))
    return worst


def roundoff_floor(sol, params, h=1e-11):
    """Smallest BAE residual reachable in double precision.

    ``eps * |r| * |dF/dr|`` maximized over the regular equations: a root
    sitting very close to a zero of ``A`` or ``B`` makes its ratio steep.
    """
    regular, _ = classify_equations(sol.roots1, sol.roots2, sol.case, params)
    n1 = len(sol.roots1)
    z = np.array(list(sol.roots1) + list(sol.roots2), dtype=complex)
    worst = 0.0
    for i in regular:
        fam = 1 if i < n1 else 2
        vals = []
        for d in (h, -h):
            zz = z.copy()
            zz[i] += d
            a, b = _bae_pair(zz[i], fam, zz[:n1], zz[n1:], sol.case, params)
            vals.append(a / b)
        slope = abs(vals[0] - vals[1]) / (2 * h)
        worst = max(worst, np.finfo(float).eps * max(1.0, abs(z[i])) * slope)
    return worst


def _near_shift(a, b, eta, tol=1e-6):
    for shift in (eta, -eta):
        for cand in (b, -b - eta):
            d = a + shift - cand
            d = d.real + 1j * ((d.imag + np.pi / 2) % np.pi - np.pi / 2)
            if abs(d) <= tol:
                return True
    return False


def normalize_root(r, eta):
    """Representative of ``{r, -r - eta} + i*pi*Z`` in ``0 <= Im < pi`` with ``Re >= 0``.

    For purely imaginary pairs the member with the smaller imaginary part is
    returned.
    """
    def fold(z):
        im = z.imag % np.pi
        if im > np.pi - 1e-12:
            im -= np.pi
        return complex(z.real, abs(im) if abs(im) < 1e-12 else im)

    a, b = fold(complex(r)), fold(-complex(r) - eta)
    if abs(a.real) > 1e-9 or abs(b.real) > 1e-9:
        return a if a.real > 0 else b
    a, b = complex(0, a.imag), complex(0, b.imag)
    return a if a.imag <= b.imag else b


def normalize_roots(roots, eta):
    out = [normalize_root(r, eta) for r in roots]
    return sorted(out, key=lambda z: (round(z.imag, 9), round(z.real, 9)))


def transfer_branches(params, settings=None):
    """Common eigenbasis of ``t^(1/2,s)``; see :class:`EigenBranches`."""
    settings = settings or SolverSettings()
    return EigenBranches(lambda u: transfer(0.5, u, params), refs=settings.reference_points)


def _x(u, eta):
    return ch(2 * u + eta)


def fit_q_functions(lam_samples, us, case, params, degrees=None):
    """Fit Q1, Q2 on one branch from null vectors of ``M(u)`` on a grid.

    ``lam_samples[i][k]`` is ``Lambda(us[i] + k*eta)``. Adjacent null-vector
    components give homogeneous linear equations for the polynomial
    coefficients of Q1 and Q2 in ``x``; the coefficient vector is the least
    singular vector of the stacked system.

    Returns ``(roots1, roots2, fit_residual, vectors)``.
    """
    eta, p = params.eta, params.p
    n = p + 1
    m1, m2 = degrees or root_counts(params)
    rows = []
    vectors = []
    for u, lam in zip(us, lam_samples):
        try:
            v = null_vector(m_matrix(u, lam, case, params))
        except ConvergenceError:
            continue
        vectors.append(v)
        for k in range(n):
            k2 = (k + 1) % n
            x_a, x_b = _x(u + k * eta, eta), _x(u + (k + 1) * eta, eta)
            # v[k2] * Q_a(u + k eta) - v[k] * Q_b(u + (k+1) eta) = 0
            row = np.zeros(m1 + m2 + 2, dtype=complex)
            pa = x_a ** np.arange(m1 + 1) if k % 2 == 0 else x_a ** np.arange(m2 + 1)
            pb = x_b ** np.arange(m2 + 1) if k % 2 == 0 else x_b ** np.arange(m1 + 1)
            if k % 2 == 0:
                row[: m1 + 1] += v[k2] * pa
                row[m1 + 1:] -= v[k] * pb
            else:
                row[m1 + 1:] += v[k2] * pa
                row[: m1 + 1] -= v[k] * pb
            rows.append(row / max(np.linalg.norm(row), 1e-300))
    if len(vectors) * n < m1 + m2 + 2:
        raise ConvergenceError("too few grid points with a simple null vector", {"usable": len(vectors)})
    a = np.array(rows)
    _, sv, vh = np.linalg.svd(a)
    coef = vh[-1].conj()
    fit_residual = float(sv[-1] / sv[0])
    c1, c2 = coef[: m1 + 1], coef[m1 + 1:]
    roots1 = _poly_roots_to_u(c1, eta)
    roots2 = _poly_roots_to_u(c2, eta)
    return roots1, roots2, fit_residual, (sv, vectors)


def _poly_roots_to_u(coef, eta):
    if abs(coef[-1]) <= 1e-10 * np.max(np.abs(coef)):
        raise ConvergenceError("fitted Q has lower degree than the ansatz", {"coefficients": coef.tolist()})
    xs = np.roots(coef[::-1])
    return [complex((np.arccosh(complex(x)) - eta) / 2) for x in xs]


def _bae_vector(z, n1, case, params, rows):
    terms = bae_terms(z[:n1], z[n1:], case, params)
    return np.array([terms[i][0] / terms[i][1] + 1 for i in rows])


def refine_roots(roots1, roots2, case, params, tol=1e-13, maxiter=60):
    """Damped complex Newton on the ratio-form equations.

    Only regular equations enter and only their roots move; roots of
    ``0/0`` equations stay where the fit put them. The equations are
    holomorphic in the roots, so the Jacobian is taken by central
    differences along the real axis. Returns ``(roots1, roots2, err)`` where
    ``err`` is the final max-norm of the residual vector.
    """
    n1 = len(roots1)
    z = np.array(list(roots1) + list(roots2), dtype=complex)
    rows, _ = classify_equations(roots1, roots2, case, params)
    if not rows:
        return list(z[:n1]), list(z[n1:]), 0.0
    f = _bae_vector(z, n1, case, params, rows)
    err = float(np.max(np.abs(f)))
    hstep = 1e-8
    for _ in range(maxiter):
        if err <= tol or not np.isfinite(err):
            break
        jac = np.empty((len(rows), len(rows)), dtype=complex)
        for col, i in enumerate(rows):
            dz = np.zeros_like(z)
            dz[i] = hstep
            jac[:, col] = (_bae_vector(z + dz, n1, case, params, rows)
                           - _bae_vector(z - dz, n1, case, params, rows)) / (2 * hstep)
        step = np.zeros_like(z)
        step[rows] = np.linalg.lstsq(jac, -f, rcond=None)[0]
        lam = 1.0
        while lam > 1e-3:
            trial = z + lam * step
            with np.errstate(all="ignore"):
                ft = _bae_vector(trial, n1, case, params, rows)
            et = float(np.max(np.abs(ft)))
            if np.isfinite(et) and et < err:
                z, f, err = trial, ft, et
                break
            lam /= 2
        else:
            break
    return list(z[:n1]), list(z[n1:]), err


_TQ_POINTS = (0.2113 + 0.1371j, 0.4472 - 0.0917j, -0.3317 + 0.2593j, 0.0731 + 0.6180j,
              0.5773 + 0.3090j, -0.1234 - 0.4321j, 0.3333 + 0.9425j, 0.6931 - 0.2718j,
              -0.5257 + 0.1618j, 0.2679 - 0.7071j)


def tq_residual(sol, lam_values, params, points=_TQ_POINTS):
    """Largest relative deviation of TQ1 and TQ2 from the diagonalized branch.

    ``lam_values[i]`` is the branch eigenvalue at ``points[i]``.
    """
    worst = 0.0
    for u, lam in zip(points, lam_values):
        scale = max(abs(lam), 1e-300)
        for which in ("TQ1", "TQ2"):
            worst = max(worst, abs(lambda_from_tq(u, sol, which, params) - lam) / scale)
    return worst


def sample_grid(params, settings):
    m1, _ = root_counts(params)
    lo, hi = settings.grid
    return np.linspace(lo, hi, 4 * (m1 + 1)) + 1j * settings.grid_imag


def solve_bethe(case, params, settings=None, branches=None):
    """Bethe roots for every eigenvalue branch of ``t^(1/2,s)``.

    Pipeline: common eigenbasis of the commuting family, null vectors of
    ``M(u)`` on a grid, linear fit of Q1/Q2 as polynomials in ``ch(2u+eta)``,
    polynomial roots, then Newton on the Bethe-ansatz-type equations.
    Branches whose fit or refinement misses tolerance come back with
    ``flagged=True`` and a note instead of being dropped.
    """
    settings = settings or SolverSettings()
    params.check_bethe()
    case = params.check_case(case)
    eta, p = params.eta, params.p
    br = branches or transfer_branches(params, settings)
    us = sample_grid(params, settings)
    samples = np.array([[br.values(u + k * eta) for k in range(p + 1)] for u in us])
    check_vals = np.array([br.values(u) for u in _TQ_POINTS])
    out = []
    for i in range(len(br)):
        sol = BetheSolution(case=case, roots1=[], roots2=[], level_index=i)
        try:
            r1, r2, fit_res, _ = fit_q_functions(samples[:, :, i], us, case, params)
        except ConvergenceError as exc:
            sol.flagged = True
            sol.notes = f"fit failed: {exc}"
            out.append(sol)
            continue
        sol.fit_residual = fit_res
        with np.errstate(all="ignore"):
            n1, n2, _ = refine_roots(r1, r2, case, params, maxiter=settings.newton_maxiter)
        sol.roots1 = normalize_roots(n1, eta)
        sol.roots2 = normalize_roots(n2, eta)
        try:
            sol.bae_residual = bae_residual(sol, params)
        except RootCollisionError as exc:
            sol.flagged = True
            sol.notes = str(exc)
        sol.tq_residual = tq_residual(sol, check_vals[:, i], params)
        problems = []
        if fit_res > settings.fit_tol:
            problems.append(f"fit residual {fit_res:.2e}")
        if not sol.bae_residual <= settings.tol:
            msg = f"bae residual {sol.bae_residual:.2e}"
            if np.isfinite(sol.bae_residual):
                msg += f" (roundoff floor {roundoff_floor(sol, params):.1e})"
            problems.append(msg)
        if problems:
            sol.flagged = True
            sol.notes = "; ".join([sol.notes] + problems if sol.notes else problems)
        out.append(sol)
    return out
