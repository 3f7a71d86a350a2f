"""Smooth Wu-Sprung potential: implicit form, numerical inverse and series.

The potential is given implicitly as x(V) for V >= V0.  Everything here works
in the variable r = sqrt(V - V0), in which x(r) is smooth and strictly
increasing (for V0 > 2*pi), so the inverse r(x) is well conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicSpline

V0_DEFAULT = 3.10073 * math.pi


class PotentialRangeError(ValueError):
    """Argument outside the domain of the smooth potential or its inverse."""


def _x_of_r(r, V0):
    s = np.sqrt(V0 + r * r)
    log_term = np.log(V0 / (2.0 * np.pi * np.e**2))
    # ln((s + r)/(s - r)) == 2 artanh(r/s); the latter is stable for small r
    return (r * log_term + s * 2.0 * np.arctanh(r / s)) / np.pi


def _dx_dr(r, V0):
    s = np.sqrt(V0 + r * r)
    return (np.log(V0 / (2.0 * np.pi)) + 2.0 * (r / s) * np.arctanh(r / s)) / np.pi


@dataclass(frozen=True)
class SmoothPotential:
    """Smooth Wu-Sprung potential with a cached inverse.

    Parameters
    ----------
    V0 : float
        Value of the potential at the origin; must exceed ``2*pi``.
    max_V : float
        Ceiling for the inverse; ``V_of_x`` rejects ``x > x_of_V(max_V)``.
    resolution : float
        Spacing in x of the interpolation table backing the fast inverse.
    """

    V0: float = V0_DEFAULT
    max_V: float = 400.0
    resolution: float = 1.0 / 40.0
    _x_nodes: np.ndarray = field(init=False, repr=False, compare=False)
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.V0 > 2.0 * math.pi:
            raise ValueError(f"V0 must exceed 2*pi for a single-valued inverse, got {self.V0}")
        if not self.max_V > self.V0:
            raise ValueError("max_V must exceed V0")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        x_max = self.x_max
        n = int(math.ceil(x_max / self.resolution)) + 1
        x_nodes = np.linspace(0.0, x_max, n)
        # rough guess from a dense forward table, then Newton to full precision
        r_dense = np.linspace(0.0, self.r_max, 20 * n)
        r_nodes = np.interp(x_nodes, _x_of_r(r_dense, self.V0), r_dense)
        for _ in range(8):
            r_nodes = r_nodes - (_x_of_r(r_nodes, self.V0) - x_nodes) / _dx_dr(r_nodes, self.V0)
        r_nodes[0] = 0.0
        object.__setattr__(self, "_x_nodes", x_nodes)
        object.__setattr__(self, "_spline", CubicSpline(x_nodes, r_nodes))

    @property
    def r_max(self) -> float:
        return math.sqrt(self.max_V - self.V0)

    @property
    def x_max(self) -> float:
        """Largest x accepted by the inverse."""
        return float(_x_of_r(self.r_max, self.V0))

    @property
    def omega(self) -> float:
        return 1.0 / math.log(self.V0 / (2.0 * math.pi))

    def x_of_V(self, V):
        """Evaluate the implicit relation x(V) directly.

        Accepts scalars or arrays; raises ``PotentialRangeError`` for V < V0.
        """
        V = np.asarray(V, dtype=float)
        if np.any(V < self.V0):
            raise PotentialRangeError(f"V must be >= V0={self.V0}")
        rv = np.sqrt(V - self.V0)
        sv = np.sqrt(V)
        log_term = math.log(self.V0 / (2.0 * math.pi * math.e**2))
        with np.errstate(divide="ignore"):
            x = (rv * log_term + sv * np.log((sv + rv) / (sv - rv))) / math.pi
        x = np.where(rv == 0.0, 0.0, x)
        return float(x) if x.ndim == 0 else x

    def V_of_x_direct(self, x: float) -> float:
        """Bracketed root solve of x(V) = x; the ground truth for the cache."""
        x = float(x)
        self._check_range(x)
        if x == 0.0:
            return self.V0
        r = optimize.brentq(
            lambda r: _x_of_r(r, self.V0) - x, 0.0, self.r_max, xtol=1e-15, rtol=1e-15, maxiter=200
        )
        # one Newton polish; brentq stops on bracket width, not residual
        r -= (_x_of_r(r, self.V0) - x) / _dx_dr(r, self.V0)
        return self.V0 + r * r

    def V_of_x(self, x):
        """Inverse potential V(x) for x >= 0 (vectorized).

        Cubic-spline lookup followed by two Newton steps on x(r); agrees with
        :meth:`V_of_x_direct` to well below 1e-10.
        """
        x = np.asarray(x, dtype=float)
        self._check_range(x)
        r = self._spline(x)
        for _ in range(2):
            r = r - (_x_of_r(r, self.V0) - x) / _dx_dr(r, self.V0)
        r = np.where(x == 0.0, 0.0, r)
        V = self.V0 + r * r
        return float(V) if V.ndim == 0 else V

    def V_even(self, x):
        """Symmetric extension V(|x|), as needed on [-x_t, x_t]."""
        return self.V_of_x(np.abs(x))

    def smooth_turning_point(self, lam):
        """Turning point of the translated smooth well: x with V(x) - V0 = lam."""
        lam = np.asarray(lam, dtype=float)
        if np.any(lam <= 0):
            raise ValueError("lambda must be positive")
        return self.x_of_V(lam + self.V0)

    def _check_range(self, x):
        if np.any(np.asarray(x) < 0):
            raise PotentialRangeError("x must be nonnegative")
        if np.any(np.asarray(x) > self.x_max * (1 + 1e-12)):
            raise PotentialRangeError(
                f"x exceeds invertible range {self.x_max:.6g}; raise max_V (now {self.max_V})"
            )


def dominici_coefficients(V0: float = V0_DEFAULT) -> tuple[float, float, float]:
    """The three printed Dominici coefficients (a1, a2, a3) for a given V0."""
    w = 1.0 / math.log(V0 / (2.0 * math.pi))
    return (w, 4.0 / 3.0 * w**2, 8.0 / 15.0 * w**2 + 28.0 / 9.0 * w**3)


def dominici_series(x, terms: int = 3, V0: float = V0_DEFAULT, check_domain: bool = True):
    """Truncated power series for the inverted potential about x = 0.

    ``V0 + sum_k a_k (pi x)^(2k) w^(2k-1) (-V0)^(1-k)`` with ``w = 1/ln(V0/2pi)``.

    The series has a small radius of convergence; ``check_domain`` enforces
    ``|pi x w| < 1`` and may be disabled to study the divergence.
    """
    if terms not in (1, 2, 3):
        raise ValueError("terms must be 1, 2 or 3")
    x = np.asarray(x, dtype=float)
    w = 1.0 / math.log(V0 / (2.0 * math.pi))
    if check_domain and np.any(np.abs(math.pi * x * w) >= 1.0):
        raise PotentialRangeError(f"|pi*x*omega| must be < 1 (x < {1 / (math.pi * w):.6g})")
    a = dominici_coefficients(V0)
    V = np.full_like(x, V0)
    for k in range(1, terms + 1):
        V = V + a[k - 1] * (math.pi * x) ** (2 * k) * w ** (2 * k - 1) * (-V0) ** (1 - k)
    return float(V) if V.ndim == 0 else V
