"""Model parameters and boundary-case tags."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .algebra import twice
from .errors import ValidationError

BOUNDARY_FIELDS = ("alpha_minus", "alpha_plus", "beta_minus", "beta_plus", "theta_minus", "theta_plus")


class BoundaryCase(str, Enum):
    """Two-parameter boundary families with a known two-Q solution.

    ``I``: beta arbitrary, alpha = 0. ``II``: alpha arbitrary, beta = 0.
    Both require theta_minus == theta_plus.
    """

    I = "I"
    II = "II"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper()
        if text in ("1", "I"):
            return cls.I
        if text in ("2", "II"):
            return cls.II
        raise ValidationError(f"unknown boundary case {value!r}", "case")


def _as_complex(x):
    z = complex(x)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValidationError(f"non-finite value {x!r}", "params")
    return z


@dataclass(frozen=True)
class ModelParams:
    """Spin, chain length, root-of-unity order and the six boundary parameters.

    The anisotropy is ``eta = i*pi/(p+1)``. ``eta_value`` overrides it and
    exists only to build the ``eta -> 0`` limit directly.
    """

    s: Fraction = Fraction(1, 2)
    N: int = 2
    p: int = 3
    alpha_minus: complex = 0j
    alpha_plus: complex = 0j
    beta_minus: complex = 0j
    beta_plus: complex = 0j
    theta_minus: complex = 0j
    theta_plus: complex = 0j
    eta_value: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "s", Fraction(twice(Fraction(self.s).limit_denominator(4)), 2))
        if self.s <= 0:
            raise ValidationError("spin must be positive", "s")
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError("N must be a positive integer", "N")
        if int(self.p) != self.p or self.p < 1:
            raise ValidationError("p must be a positive integer", "p")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "p", int(self.p))
        for name in BOUNDARY_FIELDS:
            object.__setattr__(self, name, _as_complex(getattr(self, name)))
        if self.eta_value is not None:
            object.__setattr__(self, "eta_value", _as_complex(self.eta_value))

    @property
    def eta(self):
        if self.eta_value is not None:
            return self.eta_value
        return 1j * np.pi / (self.p + 1)

    @property
    def two_s(self):
        return int(2 * self.s)

    @property
    def dim(self):
        """Dimension of the quantum space, ``(2s+1)**N``."""
        return (self.two_s + 1) ** self.N

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def boundary(self):
        return {name: getattr(self, name) for name in BOUNDARY_FIELDS}

    def detect_case(self, tol=1e-14):
        """Return the boundary case these parameters belong to, or ``None``."""
        if abs(self.theta_minus - self.theta_plus) > tol:
            return None
        if abs(self.alpha_minus) <= tol and abs(self.alpha_plus) <= tol:
            return BoundaryCase.I
        if abs(self.beta_minus) <= tol and abs(self.beta_plus) <= tol:
            return BoundaryCase.II
        return None

    def check_case(self, case):
        case = BoundaryCase.parse(case)
        if abs(self.theta_minus - self.theta_plus) > 1e-14:
            raise ValidationError("theta_minus must equal theta_plus", "theta_plus")
        if case is BoundaryCase.I and (self.alpha_minus != 0 or self.alpha_plus != 0):
            raise ValidationError("case I requires alpha_minus = alpha_plus = 0", "alpha_minus")
        if case is BoundaryCase.II and (self.beta_minus != 0 or self.beta_plus != 0):
            raise ValidationError("case II requires beta_minus = beta_plus = 0", "beta_minus")
        return case

    def check_bethe(self):
        if self.eta_value is not None:
            raise ValidationError("Bethe solving needs eta = i*pi/(p+1)", "eta_value")
        if self.p % 2 == 0:
            raise ValidationError("p must be odd", "p")
        if self.N % 2:
            raise ValidationError("N must be even", "N")


def table1_params():
    return ModelParams(s=1, N=2, p=3, beta_minus=0.767, beta_plus=0.598,
                       theta_minus=0.573, theta_plus=0.573)


def table2_params():
    return ModelParams(s=1, N=2, p=5, alpha_minus=0.854j, alpha_plus=0.487j,
                       theta_minus=0.482, theta_plus=0.482)
