"""Fractal CBC quantization integral with its Abel-type endpoint kernel.

The integral

    I = (2 / Gamma(beta)) * int_{-x_t}^{x_t} sqrt(max(0, lam - phi2(x'))) (x_t - x')^(beta-1) dx'

has an integrable singularity at x' = x_t.  With u = x_t - x' = s^(1/beta)
the kernel becomes the constant 1/beta, so

    I = (2 / (beta Gamma(beta))) * int_0^{(2 x_t)^beta} g(x_t - s^(1/beta)) ds.

The clamped square root vanishes like a square root wherever lam - phi2
changes sign.  Those points are located and used as breakpoints; each
positive piece is mapped through a quintic smoothstep, which flattens
square-root endpoints so composite Gauss-Legendre converges quickly.
Panels are then bisected adaptively: each panel's error is estimated by
comparing one 16-point rule with two on its halves, and the panels holding
most of the error are split until the total falls below the tolerance.
Local refinement also copes with sign changes the sampler missed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, special

from .fractal import FractalParams, PhiSquared
from .potential import SmoothPotential

SUBSTITUTIONS = ("power_sub", "gauss_jacobi")
_GL_ORDER = 16


class QuadratureError(RuntimeError):
    """Integral failed to converge within the node budget."""


@dataclass(frozen=True)
class QuadratureConfig:
    beta: float = 0.75
    node_budget: int = 1 << 21
    rel_tol: float = 1e-8
    substitution: str = "power_sub"
    sample_points: int = 257
    abs_tol: float = 1e-14

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not 0.0 < self.rel_tol < 1e-4:
            raise ValueError("rel_tol must lie in (0, 1e-4)")
        if self.node_budget < 2 * _GL_ORDER:
            raise ValueError("node_budget too small")
        if self.substitution not in SUBSTITUTIONS:
            raise ValueError(f"substitution must be one of {SUBSTITUTIONS}")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    nodes: int


@dataclass(frozen=True)
class CbcRecord:
    j: int
    lam: float
    x: float
    integral: float

    @property
    def ratio(self) -> float:
        return self.integral / (self.j * math.pi)


@dataclass
class CbcReport:
    records: list[CbcRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.records])

    @property
    def integrals(self) -> np.ndarray:
        return np.array([r.integral for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "lambda", "x", "integral", "ratio"])
        for r in self.records:
            w.writerow([r.j, fmt(r.lam), fmt(r.x), fmt(r.integral), fmt(r.ratio)])
        return buf.getvalue()

    def to_dict(self) -> list[dict]:
        return [
            {"j": r.j, "lambda": r.lam, "x": r.x, "integral": r.integral, "ratio": r.ratio}
            for r in self.records
        ]


def fmt(v: float) -> str:
    """Locale-free 9-significant-digit rendering used by all CSV output."""
    return format(float(v), ".9g")


@lru_cache(maxsize=64)
def _panel_rule(panels: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    t = (x + 1.0) / 2.0
    offsets = np.arange(panels)[:, None]
    nodes = ((offsets + t) / panels).ravel()
    weights = np.tile(w / (2.0 * panels), panels)
    return nodes, weights


def _smoothstep(t):
    return t**3 * (10.0 - 15.0 * t + 6.0 * t * t)


def _smoothstep_jac(t):
    return 30.0 * t * t * (1.0 - t) ** 2


def _max_frequency(phi2) -> float:
    return float(getattr(phi2, "max_frequency", 0.0) or 0.0)


def _positive_support(f_u: Callable, u_max: float, n_samples: int) -> list[tuple[float, float]]:
    """Sub-intervals of [0, u_max] where f_u > 0, split at located sign changes."""
    u = np.linspace(0.0, u_max, n_samples)
    vals = np.asarray(f_u(u), dtype=float)
    pos = vals > 0
    if not pos.any():
        return []
    scalar = lambda z: float(f_u(np.float64(z)))
    cuts = [0.0]
    for i in np.nonzero(pos[1:] != pos[:-1])[0]:
        a, b = u[i], u[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            root = a
        elif fb == 0.0:
            root = b
        else:
            root = optimize.brentq(scalar, a, b, xtol=1e-15 * max(1.0, u_max), rtol=1e-15)
        cuts.append(root)
    cuts.append(u_max)
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        if scalar(0.5 * (a + b)) > 0:
            if out and out[-1][1] == a:
                out[-1] = (out[-1][0], b)
            else:
                out.append((a, b))
    return out


def integrate_cbc(lam: float, x_t: float, phi2: Callable, config: QuadratureConfig = QuadratureConfig()) -> QuadratureResult:
    """Evaluate the CBC integral with node doubling; see :func:`cbc_integral`."""
    if not x_t > 0:
        raise ValueError(f"turning point must be positive, got {x_t}")
    if config.substitution == "gauss_jacobi":
        return _integrate_gauss_jacobi(lam, x_t, phi2, config)
    b = config.beta
    prefactor = 2.0 / (b * special.gamma(b))
    u_max = 2.0 * x_t
    f_u = lambda u: lam - np.asarray(phi2(x_t - u))
    n_samples = config.sample_points
    freq = _max_frequency(phi2)
    if freq > 0:
        n_samples = max(n_samples, int(math.ceil(8.0 * u_max * freq / (2.0 * math.pi))) + 1)
    n_samples = min(n_samples, 1 << 17)
    supp = _positive_support(f_u, u_max, n_samples)
    if not supp:
        return QuadratureResult(0.0, 0.0, n_samples)

    # panels live in smoothstep coordinates t in [0, 1] of each positive piece
    sa = np.array([ua**b for ua, _ in supp])
    sb = np.array([ub**b for _, ub in supp])
    xg, wg = np.polynomial.legendre.leggauss(_GL_ORDER)
    tg, wg = (xg + 1.0) / 2.0, wg / 2.0

    def rule(piece, lo, hi):
        """16-point Gauss-Legendre on each panel; arrays in, integrals out."""
        t = lo[:, None] + (hi - lo)[:, None] * tg
        ds = (sb - sa)[piece][:, None]
        s_ = sa[piece][:, None] + ds * _smoothstep(t)
        g = np.sqrt(np.maximum(0.0, lam - np.asarray(phi2(x_t - s_ ** (1.0 / b)))))
        return (hi - lo) * np.sum(wg * g * ds * _smoothstep_jac(t), axis=1)

    def assess(piece, lo, hi):
        mid = 0.5 * (lo + hi)
        coarse = rule(piece, lo, hi)
        fine = rule(piece, lo, mid) + rule(piece, mid, hi)
        return fine, np.abs(fine - coarse)

    # start with roughly one panel per oscillation of the fractal term
    periods = (np.array([ub - ua for ua, ub in supp]) * freq / (2.0 * math.pi)) if freq > 0 else np.zeros(len(supp))
    counts = np.clip(np.ceil(periods).astype(int), 1, 4096)
    piece = np.repeat(np.arange(len(supp)), counts)
    lo = np.concatenate([np.arange(c) / c for c in counts])
    hi = np.concatenate([np.arange(1, c + 1) / c for c in counts])
    val, err = assess(piece, lo, hi)
    nodes = 3 * _GL_ORDER * len(lo)
    while True:
        total, err_sum = float(np.sum(val)), float(np.sum(err))
        if err_sum <= max(config.rel_tol * abs(total), config.abs_tol):
            return QuadratureResult(float(prefactor * total), float(prefactor * err_sum), nodes)
        # bisect the worst panels carrying half of the estimated error
        order = np.argsort(err)[::-1]
        k = int(np.searchsorted(np.cumsum(err[order]), 0.5 * err_sum)) + 1
        split = order[:k]
        if nodes + 6 * _GL_ORDER * k > config.node_budget:
            raise QuadratureError(
                f"CBC integral not converged within {config.node_budget} nodes "
                f"(lam={lam}, x_t={x_t}, error estimate {prefactor * err_sum:.3g})"
            )
        keep = np.ones(len(lo), dtype=bool)
        keep[split] = False
        mid = 0.5 * (lo[split] + hi[split])
        new_piece = np.concatenate([piece[split], piece[split]])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_val, new_err = assess(new_piece, new_lo, new_hi)
        nodes += 6 * _GL_ORDER * k
        piece = np.concatenate([piece[keep], new_piece])
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], new_val])
        err = np.concatenate([err[keep], new_err])


def _integrate_gauss_jacobi(lam, x_t, phi2, config) -> QuadratureResult:
    b = config.beta
    prefactor = 2.0 / special.gamma(b) * x_t**b

    def estimate(n):
        xi, w = special.roots_jacobi(n, 0.0, b - 1.0)
        u = x_t * (1.0 + xi)
        g = np.sqrt(np.maximum(0.0, lam - np.asarray(phi2(x_t - u))))
        return prefactor * np.dot(w, g)

    n = _GL_ORDER
    prev = estimate(n)
    while True:
        if 2 * n > config.node_budget:
            raise QuadratureError(f"Gauss-Jacobi CBC integral not converged within {config.node_budget} nodes")
        n *= 2
        value = estimate(n)
        change = abs(value - prev)
        if change <= config.rel_tol * abs(value) or change <= config.abs_tol:
            return QuadratureResult(float(value), float(change), n)
        prev = value


def cbc_integral(lam: float, x_t: float, phi2: Callable, config: QuadratureConfig = QuadratureConfig()) -> float:
    """Fractal CBC integral I(lam, x_t) for a vectorized, even ``phi2``.

    The integrand is ``sqrt(max(0, lam - phi2))``, the real part of the
    complex square root.  Converged to ``config.rel_tol`` under node doubling;
    raises :class:`QuadratureError` when the node budget runs out.
    """
    return integrate_cbc(lam, x_t, phi2, config).value


def cbc_integrals_fixed(lams, x_t, phi2: Callable, beta: float = 0.75, panels: int = 16) -> np.ndarray:
    """Batch CBC integrals on a fixed node set (no error control).

    ``x_t`` may carry leading batch axes; ``lams`` broadcasts against its last
    axis.  ``phi2`` receives an array of shape ``x_t.shape + (nodes,)``.  The
    single-interval rule smooths only the outer endpoints, so accuracy is
    around 1e-4 relative when interior clamps occur.  Meant for scans and
    population fitness, never for reported values.
    """
    x_t = np.asarray(x_t, dtype=float)
    lams = np.asarray(lams, dtype=float)
    t, w = _panel_rule(panels)
    S = (2.0 * x_t) ** beta
    s = S[..., None] * _smoothstep(t)
    jac = S[..., None] * _smoothstep_jac(t)
    xp = x_t[..., None] - s ** (1.0 / beta)
    g = np.sqrt(np.maximum(0.0, lams[..., None] - phi2(xp)))
    return 2.0 / (beta * special.gamma(beta)) * np.sum(w * g * jac, axis=-1)


def _lambdas(zeros) -> np.ndarray:
    return np.asarray(getattr(zeros, "values", zeros), dtype=float)


def cbc_ratio_series(
    zeros,
    x: Sequence[float],
    potential: SmoothPotential,
    params: FractalParams,
    config: QuadratureConfig | None = None,
) -> CbcReport:
    """CBC integrals and ratios I_j/(j pi) for levels j = 1..n."""
    lams = _lambdas(zeros)
    x = np.asarray(x, dtype=float)
    if len(x) != len(lams):
        raise ValueError(f"{len(x)} turning points for {len(lams)} zeros")
    config = config or QuadratureConfig(beta=params.beta)
    phi2 = PhiSquared(potential, params)
    report = CbcReport()
    for j, (lam, xt) in enumerate(zip(lams, x), start=1):
        report.records.append(CbcRecord(j, float(lam), float(xt), cbc_integral(lam, xt, phi2, config)))
    return report


def adjust_turning_point(
    j: int,
    lam: float,
    potential: SmoothPotential,
    params: FractalParams,
    config: QuadratureConfig | None = None,
    search: tuple[float, float] | None = None,
    grid: int = 400,
) -> tuple[float, float]:
    """Turning point in ``search`` whose CBC ratio is closest to 1.

    The default interval is (0, 1.05 x_smooth].  A coarse scan on ``grid``
    points (fixed-node quadrature) is followed by accurate re-evaluation of
    the best few points and bounded golden-section/Brent refinement.
    Returns ``(x_adj, ratio)``.
    """
    config = config or QuadratureConfig(beta=params.beta)
    phi2 = PhiSquared(potential, params)
    if search is None:
        search = (0.0, 1.05 * float(potential.smooth_turning_point(lam)))
    lo, hi = map(float, search)
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo or hi <= 0 or lo < 0:
        raise ValueError(f"invalid search interval {search}")
    jpi = j * math.pi

    def ratio(x):
        return cbc_integral(lam, x, phi2, config) / jpi

    if hi == lo:
        return lo, ratio(lo)
    xs = np.linspace(lo, hi, grid + 1 if lo == 0.0 else grid)
    if lo == 0.0:
        xs = xs[1:]
    coarse = np.abs(cbc_integrals_fixed(np.full(len(xs), lam), xs, phi2, config.beta) / jpi - 1.0)
    # fixed-node values can misrank close neighbours; re-check the best few accurately
    k0 = int(np.argmin(coarse))
    candidates = range(max(0, k0 - 2), min(len(xs), k0 + 3))
    errs = {k: abs(ratio(xs[k]) - 1.0) for k in candidates}
    k = min(errs, key=lambda i: (errs[i], i))
    a = xs[k - 1] if k > 0 else (lo if lo > 0 else 0.5 * xs[0])
    b = xs[k + 1] if k + 1 < len(xs) else xs[k]
    if b > a:
        res = optimize.minimize_scalar(
            lambda x: abs(ratio(x) - 1.0), bounds=(a, b), method="bounded", options={"xatol": 1e-10}
        )
        if res.fun < errs[k]:
            return float(res.x), ratio(float(res.x))
    return float(xs[k]), ratio(float(xs[k]))
