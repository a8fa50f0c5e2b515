import numpy as np
import pytest

from spinxxz.checks import DEFAULT_TOLERANCES, SUITES, generic_params, run_checks, sample_points
from spinxxz.errors import ValidationError


@pytest.mark.parametrize("s", [0.5, 1, 1.5])
@pytest.mark.parametrize("p", [3, 5])
def test_all_suites_pass(s, p):
    results = run_checks(generic_params(s, 2, p), n=5, seed=1)
    assert [r.name for r in results] == list(SUITES)
    for r in results:
        assert r.passed, (r.name, r.residual)


def test_even_p_skips_odd_only_suites():
    results = run_checks(generic_params(1, 2, 4), n=3)
    names = {r.name for r in results}
    assert "functional_relation" not in names and "f0_identity" not in names
    assert all(r.passed for r in results)
    with pytest.raises(ValidationError):
        run_checks(generic_params(1, 2, 4), names=["f0_identity"])


def test_tolerance_override_and_names():
    res = run_checks(generic_params(0.5, 2, 3), names=["ybe", "crossing"], n=2, tolerances={"ybe": 1e-30})
    assert [r.name for r in res] == ["ybe", "crossing"]
    assert not res[0].passed and res[0].tolerance == 1e-30
    assert res[1].tolerance == DEFAULT_TOLERANCES["crossing"]
    assert res[0].as_dict()["pass"] is False


def test_sample_points_avoid_imaginary_axis():
    u = sample_points(200, np.random.default_rng(3))
    assert np.all(np.abs(u.real) >= 0.05) and np.all(np.abs(u.imag) <= np.pi / 2)
