"""Imaginary parts of the nontrivial Riemann zeros.

Two routes: ingest a text table (a 300-zero reference table ships with the
package) or locate sign changes of the Riemann-Siegel Z function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import mpmath
import numpy as np
from scipy import optimize

REFERENCE_TABLE = "zeros300.txt"
T_MIN = 10.0
CANONICAL_DECIMALS = 12


class ZeroTableError(ValueError):
    pass


@dataclass(frozen=True)
class ZeroTable:
    values: tuple[float, ...]
    source: str = "ingested"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.source not in ("computed", "ingested"):
            raise ValueError(f"unknown source {self.source!r}")
        v = np.asarray(self.values)
        if len(v):
            if not 14.0 < v[0] < 14.2:
                raise ZeroTableError(f"first zero {v[0]} outside (14, 14.2)")
            if np.any(np.diff(v) <= 0):
                i = int(np.nonzero(np.diff(v) <= 0)[0][0])
                raise ZeroTableError(f"zeros not strictly increasing at index {i + 1}")

    @property
    def count(self) -> int:
        return len(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, idx):
        return self.values[idx]

    def head(self, n: int) -> "ZeroTable":
        if n > self.count:
            raise ZeroTableError(f"table holds {self.count} zeros, {n} requested")
        return ZeroTable(self.values[:n], self.source)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values)

    def to_text(self, decimals: int = CANONICAL_DECIMALS) -> str:
        """Canonical serialization: one fixed-point decimal per line."""
        return "".join(f"{v:.{decimals}f}\n" for v in self.values)


def parse_zeros(text: str, count: int, origin: str = "<string>") -> ZeroTable:
    values: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if len(values) == count:
            break
        try:
            v = float(line)
        except ValueError:
            raise ZeroTableError(f"{origin}:{lineno}: cannot parse {line!r}") from None
        if not (math.isfinite(v) and v > 0):
            raise ZeroTableError(f"{origin}:{lineno}: expected a positive decimal, got {line!r}")
        if values and v <= values[-1]:
            raise ZeroTableError(f"{origin}:{lineno}: value {v} does not exceed previous {values[-1]}")
        values.append(v)
    if len(values) < count:
        raise ZeroTableError(f"{origin}: {len(values)} values found, {count} requested")
    return ZeroTable(tuple(values), "ingested")


def ingest_zeros(path, count: int) -> ZeroTable:
    """Read the first ``count`` zeros from a text table ('#' comments allowed)."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"zero table {path} not found")
    return parse_zeros(path.read_text(encoding="utf-8"), count, str(path))


def reference_zeros(count: int = 300) -> ZeroTable:
    """The shipped reference table (first 300 zeros, 12 decimals)."""
    text = resources.files("susyzeta.data").joinpath(REFERENCE_TABLE).read_text(encoding="utf-8")
    return parse_zeros(text, count, REFERENCE_TABLE)


def write_zeros(table: ZeroTable, path, decimals: int = CANONICAL_DECIMALS) -> None:
    Path(path).write_text(table.to_text(decimals), encoding="utf-8")


# --- Riemann-Siegel -------------------------------------------------------

def _psi_taylor(degree: int = 80) -> np.ndarray:
    """Taylor coefficients of Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) about p = 1/2.

    With q = p - 1/2 the numerator is cos(2 pi q^2 - 5 pi/8) and the
    denominator -cos(2 pi q).  Psi is entire, but 1/cos(2 pi q) alone has
    radius 1/4, so the series division runs in extended precision.
    """
    with mpmath.workdps(120):
        A, B = -5 * mpmath.pi / 8, 2 * mpmath.pi
        num = [mpmath.mpf(0)] * (degree + 1)
        den = [mpmath.mpf(0)] * (degree + 1)
        for n in range(degree // 2 + 1):
            num[2 * n] = B**n / mpmath.factorial(n) * mpmath.cos(A + n * mpmath.pi / 2)
            den[2 * n] = -((-1) ** n) * (2 * mpmath.pi) ** (2 * n) / mpmath.factorial(2 * n)
        c = []
        for k in range(degree + 1):
            acc = num[k] - mpmath.fsum(den[i] * c[k - i] for i in range(1, k + 1))
            c.append(acc / den[0])
        return np.array([float(v) for v in c])


_PSI = np.polynomial.Polynomial(_psi_taylor())
_PSI_D = [_PSI.deriv(k) if k else _PSI for k in range(13)]
_PI2, _PI4, _PI6, _PI8 = (math.pi**k for k in (2, 4, 6, 8))


def _rs_corrections(p: float, order: int) -> list[float]:
    q = p - 0.5
    d = [float(P(q)) for P in _PSI_D]
    c = [d[0]]
    if order >= 1:
        c.append(-d[3] / (96 * _PI2))
    if order >= 2:
        c.append(d[2] / (64 * _PI2) + d[6] / (18432 * _PI4))
    if order >= 3:
        c.append(-d[1] / (64 * _PI2) - d[5] / (3840 * _PI4) - d[9] / (5308416 * _PI6))
    if order >= 4:
        c.append(
            d[0] / (128 * _PI2)
            + 19 * d[4] / (24576 * _PI4)
            + 11 * d[8] / (5898240 * _PI6)
            + d[12] / (2038431744 * _PI8)
        )
    return c


def riemann_siegel_theta(t: float) -> float:
    return t / 2 * math.log(t / (2 * math.pi)) - t / 2 - math.pi / 8 + 1 / (48 * t) + 7 / (5760 * t**3)


def riemann_siegel_Z(t: float, corrections: int = 4) -> float:
    """Hardy's Z(t) by the Riemann-Siegel main sum plus remainder terms C0..C_k.

    ``corrections`` selects how many remainder terms beyond C0 are kept
    (0..4); the default gives about 1e-9 absolute accuracy at t ~ 14.
    """
    if t < T_MIN:
        raise ValueError(f"Riemann-Siegel evaluation requires t >= {T_MIN}, got {t}")
    if not 0 <= corrections <= 4:
        raise ValueError("corrections must be in 0..4")
    a = math.sqrt(t / (2 * math.pi))
    N = int(a)
    p = a - N
    th = riemann_siegel_theta(t)
    n = np.arange(1, N + 1)
    main = 2.0 * np.sum(np.cos(th - t * np.log(n)) / np.sqrt(n))
    cs = _rs_corrections(p, corrections)
    rem = sum(c * a ** (-k) for k, c in enumerate(cs))
    sign = 1.0 if (N - 1) % 2 == 0 else -1.0
    return float(main + sign * a ** (-0.5) * rem)


def compute_zeros(
    count: int,
    grid_step: float = 0.1,
    t_max: float | None = None,
    corrections: int = 4,
    xtol: float = 1e-9,
) -> ZeroTable:
    """Scan Z(t) upward from t = 10 and bisect the first ``count`` sign changes."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0 < grid_step <= 0.25:
        raise ValueError("grid_step must lie in (0, 0.25]")
    if t_max is None:
        # the n-th zero sits near 2 pi n / W(n/e); generous margin
        t_max = 40.0 + 2 * math.pi * count / max(1.0, math.log(count / (2 * math.pi * math.e) + 1.0) + 0.5)
    Z = lambda t: riemann_siegel_Z(t, corrections)
    roots: list[float] = []
    t0, z0 = T_MIN, Z(T_MIN)
    while len(roots) < count:
        t1 = t0 + grid_step
        if t1 > t_max:
            raise ZeroTableError(f"only {len(roots)} sign changes found below t={t_max:g}")
        z1 = Z(t1)
        if z0 == 0.0:
            roots.append(t0)
        elif z0 * z1 < 0:
            roots.append(optimize.bisect(Z, t0, t1, xtol=xtol, maxiter=200))
        t0, z0 = t1, z1
    return ZeroTable(tuple(roots), "computed")
