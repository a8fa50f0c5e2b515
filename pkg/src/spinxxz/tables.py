"""Reference spin-1 spectra with their Q1 roots, and comparison helpers."""
import numpy as np
from scipy.optimize import linear_sum_assignment

from .params import table1_params, table2_params

__all__ = ["REFERENCE", "root_distance", "match_roots", "compare_rows"]

# (energy, roots of Q1) in ascending energy; the roots are listed as printed.
_TABLE1 = [
    (-5.6483, [0.426847 + 2.19193j, 0.719676 + 1.1781j, 0.109151j, 0.426847 + 0.164266j]),
    (-4.67715, [0.106242 + 2.28424j, 0.379199 + 1.1781j, 1.05101 + 1.1781j, 0.106242 + 0.071957j]),
    (-2.75841, [0.387014 + 2.748893j, 1.277532j, 0.932369 + 1.1781j, 0.0609966j]),
    (-1.98286, [0.185547 + 2.748893j, 1.701637j, 0.915819 + 1.1781j, 0.138044j]),
    (-1.54571, [0.171807 + 3.046499j, 0.171807 + 2.451287j, 1.566925j, 0.916569 + 1.1781j]),
    (-0.489791, [0.781754 + 1.921787j, 1.599981j, 0.0312436j, 0.781754 + 0.434407j]),
    (-0.392189, [3.109568j, 0.779636 + 1.920991j, 1.554992j, 0.779636 + 0.435203j]),
    (0.572634, [0.810472j, 0.624212 + 1.1781j, 0.010646j, 1.227343 + 1.1781j]),
    (0.808501, [3.130312j, 0.791507j, 0.618753 + 1.1781j, 1.221033 + 1.1781j]),
]

_TABLE2 = [
    (-6.07709, [0.0471453 + 3.1415j, 0.0471453 + 2.61809j, 1.74867j, 0.74532 + 1.309j, 0.48742j]),
    (-4.65604, [2.65564j, 0.107433 + 2.35618j, 0.321204 + 1.309j, 0.557414j, 0.107433 + 0.261819j]),
    (-4.3506, [0.00657235 + 3.07819j, 0.00657235 + 2.6814j, 2.07693j, 0.12098 + 1.93837j,
               0.12098 + 0.679624j]),
    (-2.55991, [0.272597 + 3.13706j, 0.272597 + 2.62253j, 2.13098j, 0.672718 + 1.309j, 0.862768j]),
    (-1.63092, [0.326829 + 2.87979j, 0.308315 + 2.35663j, 2.13093j, 0.890835j, 0.308315 + 0.261367j]),
    (0.0925845, [0.248529 + 2.87979j, 1.76311j, 0.373083 + 1.309j, 1.20497 + 1.309j, 0.487j]),
    (0.0971716, [0.548694 + 2.59187j, 2.13099j, 0.518481 + 1.309j, 0.856853j, 0.548694 + 0.0261235j]),
    (1.6757, [0.70468 + 2.87979j, 0.338436 + 1.309j, 0.854426j, 1.08306 + 1.309j, 0.487j]),
    (2.99332, [1.7639j, 0.273003 + 1.309j, 0.720682 + 1.309j, 0.487j, 1.54847 + 1.309j]),
]

REFERENCE = {
    "table1": {"params": table1_params, "case": "I", "rows": _TABLE1},
    "table2": {"params": table2_params, "case": "II", "rows": _TABLE2},
}


def _wrap_im(z):
    return complex(z.real, (z.imag + np.pi / 2) % np.pi - np.pi / 2)


def root_distance(a, b, eta):
    """Distance between two roots modulo ``u -> -u - eta`` and ``u -> u + i*pi``."""
    return min(abs(_wrap_im(a - b)), abs(_wrap_im(a + b + eta)))


def match_roots(found, printed, eta):
    """Largest distance under the best one-to-one pairing of two root lists."""
    if len(found) != len(printed):
        return float("inf")
    if not found:
        return 0.0
    cost = np.array([[root_distance(a, b, eta) for b in printed] for a in found])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def compare_rows(table, energies, roots, e_tol=5e-4, root_tol=1e-4):
    """Compare computed ``(energies, roots)`` sorted by energy against a reference table.

    Returns one dict per row with the energy and root deviations and a pass flag.
    """
    ref = REFERENCE[table]
    eta = ref["params"]().eta
    out = []
    for i, (e_ref, r_ref) in enumerate(ref["rows"]):
        if i >= len(energies):
            out.append({"row": i, "E_printed": e_ref, "E": None, "dE": None, "droots": None, "pass": False})
            continue
        de = abs(energies[i] - e_ref)
        dr = match_roots(list(roots[i]), r_ref, eta)
        out.append({"row": i, "E_printed": e_ref, "E": float(energies[i]), "dE": float(de),
                    "droots": dr, "pass": bool(de <= e_tol and dr <= root_tol)})
    for i in range(len(ref["rows"]), len(energies)):
        out.append({"row": i, "E_printed": None, "E": float(energies[i]), "dE": None, "droots": None, "pass": False})
    return out
