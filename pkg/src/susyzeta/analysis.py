"""Post-fit statistics: Rao spacing test, phase-shift correlation, residuals,
unfolding, and the closed-form identities for fractal turning points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

TWO_PI = 2.0 * math.pi

# Critical values of Rao's U for n = 20 (degrees).
RAO_CRITICAL_N20 = ((192.17, "p<=0.001"), (154.31, "p<=0.10"))


def _tribonacci() -> float:
    r = math.sqrt(33.0)
    return (1.0 + (19.0 + 3.0 * r) ** (1 / 3) + (19.0 - 3.0 * r) ** (1 / 3)) / 3.0


@dataclass(frozen=True)
class NamedConstants:
    tribonacci: float = field(default_factory=_tribonacci)
    gelfond_schneider: float = 2.0 ** math.sqrt(2.0)
    trott: float = 0.010841015122311136
    cahen: float = 0.6434105462883
    zeta3: float = float(special.zeta(3.0))
    zeta5: float = float(special.zeta(5.0))
    gamma_7_12: float = math.gamma(7.0 / 12.0)


@dataclass(frozen=True)
class RaoResult:
    U: float
    significance: str
    n: int


def rao_spacing_statistic(angles: Sequence[float]) -> RaoResult:
    """Rao's spacing statistic U in degrees.

    U = (1/2) sum_i |T_i - 360/n| over the n circular spacings of the sorted
    sample, the wrap-around gap included.  Significance buckets are only
    tabulated for n = 20; other sizes report ``"unknown"``.
    """
    a = np.asarray(angles, dtype=float)
    if a.ndim != 1 or len(a) < 4:
        raise ValueError("Rao's spacing test needs at least 4 angles")
    if np.any(~np.isfinite(a)) or np.any(a < 0) or np.any(a >= TWO_PI):
        raise ValueError("angles must lie in [0, 2*pi)")
    n = len(a)
    deg = np.sort(np.degrees(a))
    spacings = np.diff(np.append(deg, deg[0] + 360.0))
    U = 0.5 * float(np.sum(np.abs(spacings - 360.0 / n)))
    if n != 20:
        return RaoResult(U, "unknown", n)
    for crit, label in RAO_CRITICAL_N20:
        if U > crit:
            return RaoResult(U, label, n)
    return RaoResult(U, "not-significant", n)


@dataclass(frozen=True)
class CorrelationCurve:
    theta: np.ndarray
    corr: np.ndarray
    max: float
    plateau: tuple[float, float]
    base: float

    def to_csv(self) -> str:
        lines = ["theta,correlation"]
        lines += [f"{t:.9g},{c:.9g}" for t, c in zip(self.theta, self.corr)]
        return "\n".join(lines) + "\n"


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da, db = a - a.mean(), b - b.mean()
    den = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    if den == 0.0:
        raise ValueError("zero-variance input")
    return float(np.dot(da, db)) / den


def shifted_correlation(a, b, theta: float) -> float:
    """Pearson correlation of ``a`` with ``(b + theta) mod 2 pi``."""
    return _pearson(np.asarray(a, float), np.mod(np.asarray(b, float) + theta, TWO_PI))


def phase_shift_correlation(a, b, theta_grid=None, plateau_tol: float = 1e-9) -> CorrelationCurve:
    """Correlation of ``a`` with the rotated, re-wrapped second set over theta.

    The curve is piecewise constant: it only changes where some ``b_k + theta``
    crosses a multiple of 2 pi.  The maximum and its plateau are therefore
    computed exactly from those crossing points; ``theta_grid`` (default 1024
    uniform points on [0, 2 pi]) only controls the tabulated curve.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 3:
        raise ValueError("need two equal-length sequences of at least 3 values")
    if theta_grid is None:
        theta_grid = np.linspace(0.0, TWO_PI, 1024)
    theta_grid = np.asarray(theta_grid, dtype=float)
    corr = np.array([shifted_correlation(a, b, t) for t in theta_grid])

    events = np.unique(np.concatenate(([0.0, TWO_PI], np.mod(-b, TWO_PI))))
    lo, hi = events[:-1], events[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    seg = np.array([shifted_correlation(a, b, 0.5 * (x + y)) for x, y in zip(lo, hi)])
    best = float(seg.max())
    k = int(np.argmax(seg))
    i = k
    while i > 0 and seg[i - 1] >= best - plateau_tol:
        i -= 1
    j = k
    while j + 1 < len(seg) and seg[j + 1] >= best - plateau_tol:
        j += 1
    return CorrelationCurve(theta_grid, corr, best, (float(lo[i]), float(hi[j])), shifted_correlation(a, b, 0.0))


def pearson(a, b) -> float:
    return _pearson(np.asarray(a, float), np.asarray(b, float))


def unfold(lam: float) -> float:
    """Map a zero height to unit mean spacing: (lam / 2 pi) ln lam."""
    if not lam > 1.0:
        raise ValueError("unfold requires lambda > 1")
    return lam / TWO_PI * math.log(lam)


def residual_series(fit, zeros=None) -> np.ndarray:
    """Normalized residuals (lambda_j - Phi^2(x_j)) / (j pi) of a fit result."""
    lams = np.asarray(getattr(zeros, "values", zeros) if zeros is not None else fit.lambdas, dtype=float)
    phi2 = np.asarray(fit.phi2_values, dtype=float)
    if len(lams) != len(phi2):
        raise ValueError(f"{len(lams)} zeros for {len(phi2)} fitted levels")
    j = np.arange(1, len(lams) + 1)
    return (lams - phi2) / (j * math.pi)


# Quoted fractal turning points for the five identities.
IDENTITY_X = {1: 0.949646, 2: 1.660974, 3: 1.9003895, 4: 2.3843247, 5: 2.8338417}
IDENTITY_FACTOR = {1: 0.99999996, 2: 1.0000028005, 3: 0.99999998, 4: 1.00000003037, 5: 1.00000004769}


@dataclass(frozen=True)
class IdentityCheck:
    id: int
    lhs: float
    rhs: float

    @property
    def multiplier(self) -> float:
        return self.lhs / self.rhs

    def to_dict(self) -> dict:
        return {"id": self.id, "lhs": self.lhs, "rhs": self.rhs, "multiplier": self.multiplier}


def identity_rhs(id: int, c: NamedConstants, zeros) -> float:
    lam = np.asarray(getattr(zeros, "values", zeros), dtype=float)
    need = {1: 1, 2: 3, 3: 5, 4: 7, 5: 9}
    if id not in need:
        raise ValueError(f"identity id must be 1..5, got {id}")
    if len(lam) < need[id]:
        raise ValueError(f"identity {id} needs the first {need[id]} zeros")
    L = lambda k: float(lam[k - 1])
    sqrt3 = math.sqrt(3.0)
    if id == 1:
        return 1e-6 * c.tribonacci * math.exp(L(1)) / c.gelfond_schneider
    if id == 2:
        return 1e-21 * math.exp(2 * L(3)) / (c.tribonacci * math.log(2 + sqrt3) ** 2)
    if id == 3:
        return 1e-40 * math.exp(3 * L(5)) * 3 * c.trott / (2 + sqrt3) ** 2
    if id == 4:
        return 1e-72 * math.exp(4 * L(7)) / (c.tribonacci**2 * c.cahen**2 * math.log(c.zeta5))
    return 1e-106 * c.zeta3 * math.exp(4 * math.sqrt(2.0)) * math.exp(5 * L(9)) / c.gamma_7_12


def fractal_identity_check(id: int, constants: NamedConstants, zeros, x_value: float | None = None) -> IdentityCheck:
    """Compare a quoted fractal turning point with its closed-form expression.

    ``multiplier = x / rhs`` is the factor by which the quoted value departs
    from the expression (rhs excludes that factor).
    """
    rhs = identity_rhs(id, constants, zeros)
    x = IDENTITY_X[id] if x_value is None else float(x_value)
    return IdentityCheck(id, x, rhs)
