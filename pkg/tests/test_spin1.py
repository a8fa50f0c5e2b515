import numpy as np
import pytest

from conftest import random_u
from spinxxz.algebra import sh
from spinxxz.errors import ConvergenceError, PoleError, ValidationError
from spinxxz.params import ModelParams
from spinxxz.spin1 import (
    boundary_coefficients, build_hamiltonian, c1_coefficient, c2_coefficient, c_function, contour_derivative, diagonalize,
    energies_from_derivative, energy_from_bethe, fused_basis_gauge, richardson_derivative, spin1_operators,
    spin1_transfer,
)
from spinxxz.tables import REFERENCE
from spinxxz.tq import BetheSolution, solve_bethe, transfer_branches


@pytest.fixture(scope="module")
def solved():
    out = {}
    for name, case in (("table1", "I"), ("table2", "II")):
        params = REFERENCE[name]["params"]()
        branches = transfer_branches(params)
        out[name] = (params, branches, solve_bethe(case, params, branches=branches))
    return out


def test_spin1_operators_algebra():
    sz, sp, sm, sx, sy = spin1_operators()
    assert np.allclose(sp @ sm - sm @ sp, 2 * sz)
    assert np.allclose(sx @ sx + sy @ sy + sz @ sz, 2 * np.eye(3))


def test_hamiltonian_dimensions(t1):
    ham = build_hamiltonian(t1)
    assert ham.matrix.shape == (9, 9)
    assert len(ham.bulk) == 1 and len(ham.boundary) == 2


def test_hamiltonian_rejects_other_spins():
    with pytest.raises(ValidationError):
        build_hamiltonian(ModelParams(s=0.5, N=2, p=3))


def test_a3_over_a4(generic):
    a = boundary_coefficients(generic.alpha_minus, generic.beta_minus, generic.theta_minus, generic.eta)
    assert np.isclose(a[3] / a[4], np.exp(4 * generic.theta_minus), rtol=1e-14)
    assert np.isclose(a[5] / a[6], np.exp(2 * generic.theta_minus), rtol=1e-14)


@pytest.mark.parametrize("table", ["table1", "table2"])
def test_diagonalization_matches_printed_energies(table):
    params = REFERENCE[table]["params"]()
    records = diagonalize(params)
    energies = [r.E for r in records]
    printed = [row[0] for row in REFERENCE[table]["rows"]]
    assert np.max(np.abs(np.array(energies) - printed)) <= 5e-4
    assert max(abs(r.residual_imag) for r in records) <= 1e-10


@pytest.mark.parametrize("which", ["t1", "t2", "generic"])
def test_hamiltonian_is_derivative_of_transfer(request, which):
    params = request.getfixturevalue(which)
    h = build_hamiltonian(params).matrix
    d = contour_derivative(lambda u: spin1_transfer(u, params), 0.0, 0.1)
    x = c1_coefficient(params) * d + c2_coefficient(params) * np.eye(h.shape[0])
    g = fused_basis_gauge(params)
    assert np.linalg.norm(g @ x @ np.linalg.inv(g) - h) <= 1e-10 * np.linalg.norm(h)


def test_spin1_transfer_commutes(t1, rng):
    g = fused_basis_gauge(t1)
    h = np.linalg.inv(g) @ build_hamiltonian(t1).matrix @ g
    us = random_u(rng, 3)
    for u in us:
        t = spin1_transfer(u, t1)
        scale = np.linalg.norm(t) * np.linalg.norm(h)
        assert np.linalg.norm(t @ h - h @ t) <= 1e-10 * scale
        v = spin1_transfer(us[0], t1)
        assert np.linalg.norm(t @ v - v @ t) <= 1e-10 * np.linalg.norm(t) * np.linalg.norm(v)


@pytest.mark.parametrize("table", ["table1", "table2"])
def test_derivative_energies_match_diagonalization(solved, table):
    params, branches, _ = solved[table]
    derived = sorted(r.E for r in energies_from_derivative(branches, params))
    direct = sorted(r.E for r in diagonalize(params))
    assert np.allclose(derived, direct, rtol=1e-8, atol=1e-8)


@pytest.mark.parametrize("table,row", [("table1", 0), ("table2", 8)])
def test_bethe_energy_matches_printed(solved, table, row):
    params, _, sols = solved[table]
    e_printed = REFERENCE[table]["rows"][row][0]
    energies = [energy_from_bethe(s, params).E for s in sols]
    assert min(abs(e - e_printed) for e in energies) <= 5e-4


def test_bethe_energies_cover_spectrum(solved):
    params, _, sols = solved["table1"]
    bethe = sorted(energy_from_bethe(s, params).E for s in sols)
    direct = sorted(r.E for r in diagonalize(params))
    assert np.allclose(bethe, direct, rtol=1e-6)


def test_energy_invariant_under_root_symmetries(solved):
    params, _, sols = solved["table1"]
    sol = sols[1]
    base = energy_from_bethe(sol, params).E
    eta = params.eta
    moved = BetheSolution(case=sol.case, roots1=[-sol.roots1[0] - eta, sol.roots1[1] + 1j * np.pi]
                          + list(sol.roots1[2:]), roots2=sol.roots2)
    assert abs(energy_from_bethe(moved, params).E - base) <= 1e-10 * abs(base)


def test_energy_pole(t1):
    sol = BetheSolution(case="I", roots1=[-1.5 * t1.eta], roots2=[])
    with pytest.raises(PoleError):
        energy_from_bethe(sol, t1)


def test_c_function_is_analytic_at_zero(t1):
    f = lambda u: c_function(u, t1)
    assert np.isclose(richardson_derivative(f), contour_derivative(f, 0.0, 0.05), rtol=1e-8)


def test_contour_derivative_of_entire_function():
    assert np.isclose(contour_derivative(lambda z: np.exp(3 * z) * sh(z), 0.1), np.exp(0.3) * (3 * sh(0.1) + np.cosh(0.1)))


def test_contour_derivative_vectorized():
    d = contour_derivative(lambda z: np.array([z ** 2, np.sin(z)]), 0.2)
    assert np.allclose(d, [0.4, np.cos(0.2)])


def test_richardson_reports_nonconvergence():
    with pytest.raises(ConvergenceError):
        richardson_derivative(lambda z: 1.0 / (z - 1.2e-3))
