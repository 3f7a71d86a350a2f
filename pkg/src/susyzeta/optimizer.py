"""Joint estimation of phases, turning points, gamma and sigma.

The objective couples two residual sets: Phi^2(x_j) - lambda_j and
I_j - j*pi.  Differential evolution (rand/1/bin) searches the box-bounded
parameter vector; population fitness uses batched fixed-node quadrature and
the reported result is always re-evaluated with the adaptive integrator.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import optimize

from .cbc import CbcReport, QuadratureConfig, cbc_integrals_fixed, cbc_ratio_series, adjust_turning_point
from .fractal import FractalParams, PhiSquared, TWO_PI
from .potential import SmoothPotential

log = logging.getLogger(__name__)

PHASE_MODES = ("free", "zero_fixed", "monotone", "fixed_values")
X_MODES = ("free_increasing", "fixed_smooth", "fixed_values")
SIGMA_MODES = ("fixed", "free")


class OptimizationError(RuntimeError):
    pass


class ObjectiveError(RuntimeError):
    def __init__(self, message, candidate):
        super().__init__(f"{message} (candidate={np.array2string(np.asarray(candidate), precision=6)})")
        self.candidate = np.asarray(candidate)


def potential_covering(x_max: float, base: SmoothPotential | None = None) -> SmoothPotential:
    """A potential whose inverse reaches at least ``x_max``."""
    base = base or SmoothPotential()
    if base.x_max >= x_max:
        return base
    max_V = base.max_V
    while SmoothPotential(base.V0, max_V, base.resolution).x_max < x_max:
        max_V *= 1.5
    return SmoothPotential(base.V0, max_V, base.resolution)


@dataclass
class FitProblem:
    """Configuration of one coupled fit.

    Vector layout: [phases][turning-point increments][gamma][sigma], each
    block present only when free.  Free turning points are encoded as
    increments ``delta_j`` with ``x_j = x_{j-1} + delta_j`` so candidates are
    strictly increasing by construction.
    """

    zeros: Sequence[float]
    n: int
    m: int
    phase_mode: str = "free"
    phase_values: Sequence[float] | None = None
    phase_bounds: tuple[float, float] = (0.0, 1.0)
    gamma_bounds: tuple[float, float] = (1.0, 5.0)
    gamma_fixed: float | None = None
    sigma_mode: str = "fixed"
    sigma_value: float = 1.0
    sigma_bounds: tuple[float, float] = (0.1, 10.0)
    x_mode: str = "free_increasing"
    x_values: Sequence[float] | None = None
    delta_bounds: tuple[float, float] = (1e-3, 2.0)
    weights: tuple[float, float] = (1.0, 1.0)
    seed: int = 0
    population: int | None = None
    generations: int = 500
    F: float = 0.7
    CR: float = 0.9
    D: float = 1.5
    fit_panels: int = 16
    chunk: int = 32
    workers: int = 1
    initial_points: list[dict] = field(default_factory=list)
    potential: SmoothPotential | None = None
    quadrature: QuadratureConfig | None = None

    def __post_init__(self):
        if self.sigma_mode == "fixed_1":
            self.sigma_mode, self.sigma_value = "fixed", 1.0
        lams = np.asarray(getattr(self.zeros, "values", self.zeros), dtype=float)
        if len(lams) < self.n:
            raise ValueError(f"{len(lams)} zeros supplied, n={self.n}")
        self.zeros = tuple(lams[: self.n])
        if self.n < 1 or self.m < 0:
            raise ValueError("need n >= 1 and m >= 0")
        if self.phase_mode not in PHASE_MODES:
            raise ValueError(f"phase_mode must be one of {PHASE_MODES}")
        if self.x_mode not in X_MODES:
            raise ValueError(f"x_mode must be one of {X_MODES}")
        if self.sigma_mode not in SIGMA_MODES:
            raise ValueError(f"sigma_mode must be one of {SIGMA_MODES} (or fixed_1)")
        if self.gamma_bounds[0] < 1.0 or self.gamma_bounds[1] <= self.gamma_bounds[0]:
            raise ValueError("gamma bounds must satisfy 1 <= low < high")
        w_s, w_c = self.weights
        if w_s < 0 or w_c < 0 or (w_s == 0 and w_c == 0):
            raise ValueError("weights must be nonnegative and not both zero")
        if self.phase_mode == "fixed_values":
            if self.phase_values is None or len(self.phase_values) != self.m:
                raise ValueError("fixed_values phase mode needs m phase values")
            self.phase_values = tuple(float(a) for a in self.phase_values)
        if self.x_mode == "fixed_values":
            if self.x_values is None or len(self.x_values) != self.n:
                raise ValueError("fixed_values x mode needs n turning points")
            self.x_values = tuple(float(v) for v in self.x_values)
        lo, hi = self.delta_bounds
        if not 0 < lo < hi:
            raise ValueError("delta bounds must satisfy 0 < low < high")
        reach = self.n * hi if self.x_mode == "free_increasing" else max(self.fixed_x())
        self.potential = potential_covering(reach * 1.05, self.potential)
        if self.quadrature is None:
            self.quadrature = QuadratureConfig(beta=self.D / 2.0)
        if self.population is None:
            self.population = max(15 * self.dimension, 8)

    @property
    def lambdas(self) -> np.ndarray:
        return np.asarray(self.zeros)

    def fixed_x(self) -> np.ndarray:
        if self.x_mode == "fixed_values":
            return np.asarray(self.x_values)
        pot = self.potential or SmoothPotential()
        return np.asarray(pot.smooth_turning_point(self.lambdas), dtype=float).reshape(-1)

    # --- vector layout ---------------------------------------------------
    def _blocks(self):
        blocks = []
        if self.phase_mode in ("free", "monotone"):
            blocks.append(("phases", self.m, self.phase_bounds))
        if self.x_mode == "free_increasing":
            blocks.append(("deltas", self.n, self.delta_bounds))
        if self.gamma_fixed is None:
            blocks.append(("gamma", 1, (max(self.gamma_bounds[0], 1.0 + 1e-12), self.gamma_bounds[1])))
        if self.sigma_mode == "free":
            blocks.append(("sigma", 1, self.sigma_bounds))
        return blocks

    @property
    def dimension(self) -> int:
        return sum(size for _, size, _ in self._blocks())

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = [], []
        for _, size, (a, b) in self._blocks():
            lo += [a] * size
            hi += [b] * size
        return np.array(lo, dtype=float), np.array(hi, dtype=float)

    def decode(self, vecs):
        """Map candidate vectors (..., dim) to (alphas, x, gamma, sigma) arrays."""
        vecs = np.atleast_2d(np.asarray(vecs, dtype=float))
        P = vecs.shape[0]
        parts, i = {}, 0
        for name, size, _ in self._blocks():
            parts[name] = vecs[:, i : i + size]
            i += size
        if self.phase_mode == "free":
            alphas = parts["phases"]
        elif self.phase_mode == "monotone":
            alphas = np.sort(parts["phases"], axis=1)
        elif self.phase_mode == "zero_fixed":
            alphas = np.zeros((P, self.m))
        else:
            alphas = np.tile(np.asarray(self.phase_values), (P, 1))
        if self.x_mode == "free_increasing":
            x = np.cumsum(parts["deltas"], axis=1)
        else:
            x = np.tile(self.fixed_x(), (P, 1))
        gamma = parts["gamma"][:, 0] if "gamma" in parts else np.full(P, float(self.gamma_fixed))
        sigma = parts["sigma"][:, 0] if "sigma" in parts else np.full(P, float(self.sigma_value))
        return alphas, x, gamma, sigma

    def encode(self, phases=None, x=None, gamma=None, sigma=None) -> np.ndarray:
        out = []
        for name, size, _ in self._blocks():
            if name == "phases":
                out += list(np.asarray(phases, dtype=float))
            elif name == "deltas":
                out += list(np.diff(np.asarray(x, dtype=float), prepend=0.0))
            elif name == "gamma":
                out.append(float(gamma))
            else:
                out.append(float(sigma))
        return np.array(out)

    def params_for(self, alphas, gamma, sigma) -> FractalParams:
        return FractalParams(
            gamma=float(gamma),
            phases=tuple(float(a) for a in alphas),
            sigma=float(sigma),
            D=self.D,
            phase_bounds=(min(self.phase_bounds[0], 0.0), max(self.phase_bounds[1], 1.0)),
        )

    def echo(self) -> dict:
        d = {
            k: v
            for k, v in asdict(self).items()
            if k not in ("zeros", "potential", "quadrature", "initial_points", "workers")
        }
        d["zeros_head"] = list(self.zeros[:3])
        d["V0"] = self.potential.V0
        d["quadrature"] = asdict(self.quadrature)
        return json.loads(json.dumps(d, default=list))


@dataclass
class FitResult:
    params: FractalParams
    x: np.ndarray
    lambdas: np.ndarray
    phi2_values: np.ndarray
    ssq_susy: float
    ssq_cbc: float
    weights: tuple[float, float]
    cbc_report: CbcReport | None = None
    history: list[float] = field(default_factory=list)
    seed: int | None = None
    config: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def ssq_total(self) -> float:
        return self.weights[0] * self.ssq_susy + self.weights[1] * self.ssq_cbc

    def to_dict(self) -> dict:
        p = self.params
        return {
            "params": {
                "gamma": p.gamma,
                "sigma": p.sigma,
                "D": p.D,
                "alphas": list(p.phases),
                "phases_rad": [TWO_PI * a for a in p.phases],
            },
            "x": [float(v) for v in self.x],
            "lambdas": [float(v) for v in self.lambdas],
            "phi2_values": [float(v) for v in self.phi2_values],
            "ssq": {"susy": self.ssq_susy, "cbc": self.ssq_cbc, "total": self.ssq_total},
            "weights": list(self.weights),
            "cbc": self.cbc_report.to_dict() if self.cbc_report is not None else None,
            "seed": self.seed,
            "generations_run": len(self.history) - 1 if self.history else 0,
            "config": self.config,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def history_csv(self) -> str:
        return "generation,best_total\n" + "".join(f"{g},{v:.9g}\n" for g, v in enumerate(self.history))


# --- objective ------------------------------------------------------------

def _batch_phi2(potential: SmoothPotential, alphas, gamma, sigma, D):
    """Phi^2 closure over a batch of candidates; inputs shaped (P, ...)."""
    m = alphas.shape[1]
    k = np.arange(1, m + 1)
    freqs = gamma[:, None] ** k
    amps = 2.0 * np.cos(TWO_PI * alphas) / gamma[:, None] ** (k * (2.0 - D)) * sigma[:, None]

    def phi2(xp):
        xp = np.asarray(xp, dtype=float)
        smooth = potential.V_even(xp) - potential.V0
        if m == 0:
            return smooth
        shape = (xp.shape[0],) + (1,) * (xp.ndim - 1) + (m,)
        osc = (1.0 - np.cos(xp[..., None] * freqs.reshape(shape))) * amps.reshape(shape)
        return smooth + osc.sum(axis=-1)

    return phi2


def batch_objective(vecs, problem: FitProblem, with_cbc: bool | None = None):
    """(ssq_susy, ssq_cbc) for each row of ``vecs`` using fixed-node quadrature."""
    alphas, x, gamma, sigma = problem.decode(vecs)
    lams = problem.lambdas
    phi2 = _batch_phi2(problem.potential, alphas, gamma, sigma, problem.D)
    ssq_susy = np.sum((phi2(x) - lams) ** 2, axis=1)
    if with_cbc is None:
        with_cbc = problem.weights[1] > 0
    if not with_cbc:
        return ssq_susy, np.zeros_like(ssq_susy)
    jpi = np.arange(1, problem.n + 1) * math.pi
    I = cbc_integrals_fixed(lams, x, phi2, problem.D / 2.0, problem.fit_panels)
    return ssq_susy, np.sum((I - jpi) ** 2, axis=1)


def objective(candidate, problem: FitProblem, accurate: bool = False) -> tuple[float, float, float]:
    """Objective for one candidate vector: (ssq_susy, ssq_cbc, weighted total).

    ``accurate=True`` uses the adaptive CBC integrator instead of the fixed
    node rule used during the search.
    """
    w_s, w_c = problem.weights
    try:
        if accurate:
            alphas, x, gamma, sigma = problem.decode(candidate)
            res = replay(problem.params_for(alphas[0], gamma[0], sigma[0]), x[0], problem)
            s, c = res.ssq_susy, res.ssq_cbc
        else:
            s_arr, c_arr = batch_objective(np.atleast_2d(candidate), problem)
            s, c = float(s_arr[0]), float(c_arr[0])
    except Exception as exc:
        raise ObjectiveError(f"objective evaluation failed: {exc}", candidate) from exc
    if not (math.isfinite(s) and math.isfinite(c)):
        raise ObjectiveError("objective is not finite", candidate)
    return s, c, w_s * s + w_c * c


def _fitness(pop: np.ndarray, problem: FitProblem, pool) -> np.ndarray:
    w_s, w_c = problem.weights
    chunks = [pop[i : i + problem.chunk] for i in range(0, len(pop), problem.chunk)]

    def run(chunk):
        try:
            with np.errstate(all="ignore"):
                s, c = batch_objective(chunk, problem)
            return w_s * s + w_c * c
        except Exception:
            out = np.empty(len(chunk))
            for i, row in enumerate(chunk):
                try:
                    out[i] = objective(row, problem)[2]
                except ObjectiveError as exc:
                    log.debug("%s", exc)
                    out[i] = np.inf
            return out

    parts = list(pool.map(run, chunks)) if pool is not None else [run(c) for c in chunks]
    fit = np.concatenate(parts)
    return np.where(np.isfinite(fit), fit, np.inf)


def de_minimize(fitness, lo, hi, *, seed=0, population=None, generations=500, F=0.7, CR=0.9, initial=None):
    """Seeded rand/1/bin differential evolution on a box.

    ``fitness`` maps an (P, dim) array to P values (``inf`` marks failures).
    Trial components leaving the box are projected back onto it.  Returns
    ``(best_vector, best_value, history)`` with the best value after every
    generation, generation 0 being the initial population.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = len(lo)
    NP = population or 15 * dim
    if NP < 4 * dim or NP < 4:
        raise ValueError(f"population {NP} below 4 x dimension ({4 * dim})")
    if np.any(hi < lo):
        raise ValueError("empty search box")
    rng = np.random.default_rng(seed)
    pop = lo + rng.random((NP, dim)) * (hi - lo)
    if initial is not None:
        init = np.atleast_2d(np.asarray(initial, dtype=float))[:NP]
        pop[: len(init)] = np.clip(init, lo, hi)
    fit = np.asarray(fitness(pop), dtype=float)
    fit = np.where(np.isfinite(fit), fit, np.inf)
    if not np.isfinite(fit).any():
        raise OptimizationError("every member of the initial population failed to evaluate")
    history = [float(fit.min())]
    rows = np.arange(NP)
    for _ in range(generations):
        keys = rng.random((NP, NP))
        keys[rows, rows] = np.inf
        r = np.argpartition(keys, 3, axis=1)[:, :3]
        mutant = pop[r[:, 0]] + F * (pop[r[:, 1]] - pop[r[:, 2]])
        cross = rng.random((NP, dim)) < CR
        cross[rows, rng.integers(dim, size=NP)] = True
        trial = np.clip(np.where(cross, mutant, pop), lo, hi)
        trial_fit = np.asarray(fitness(trial), dtype=float)
        trial_fit = np.where(np.isfinite(trial_fit), trial_fit, np.inf)
        better = trial_fit <= fit
        pop[better] = trial[better]
        fit[better] = trial_fit[better]
        history.append(float(fit.min()))
    k = int(np.argmin(fit))
    return pop[k].copy(), float(fit[k]), history


def differential_evolution(problem: FitProblem) -> FitResult:
    """Fit ``problem`` by differential evolution and re-evaluate the winner.

    Fitness values are consumed in candidate order, so evaluating chunks on
    several threads cannot change the outcome.  Failed evaluations score
    +inf.  The search uses fixed-node quadrature; the returned result is an
    accurate :func:`replay` of the best candidate.
    """
    dim = problem.dimension
    if dim == 0:
        return replay_vector(np.empty(0), problem, history=[])
    lo, hi = problem.bounds()
    initial = [problem.encode(**pt) for pt in problem.initial_points] or None
    pool = ThreadPoolExecutor(problem.workers) if problem.workers > 1 else None
    try:
        best, best_fit, history = de_minimize(
            lambda pop: _fitness(pop, problem, pool),
            lo,
            hi,
            seed=problem.seed,
            population=problem.population,
            generations=problem.generations,
            F=problem.F,
            CR=problem.CR,
            initial=initial,
        )
    finally:
        if pool is not None:
            pool.shutdown()
    result = replay_vector(best, problem, history=history)
    result.diagnostics["search_total"] = best_fit
    return result


# --- evaluation -------------------------------------------------------------

def replay(params: FractalParams, x, problem: FitProblem, with_cbc: bool = True, history=None) -> FitResult:
    """Deterministic accurate evaluation at a given parameter point."""
    x = np.asarray(x, dtype=float)
    if len(x) != problem.n:
        raise ValueError(f"{len(x)} turning points for n={problem.n}")
    if params.m != problem.m:
        raise ValueError(f"{params.m} phases for m={problem.m}")
    lams = problem.lambdas
    phi2 = PhiSquared(problem.potential, params)
    phi2_x = np.asarray(phi2(x), dtype=float)
    ssq_susy = float(np.sum((phi2_x - lams) ** 2))
    report = None
    ssq_cbc = 0.0
    if with_cbc:
        report = cbc_ratio_series(lams, x, problem.potential, params, problem.quadrature)
        jpi = np.arange(1, problem.n + 1) * math.pi
        ssq_cbc = float(np.sum((report.integrals - jpi) ** 2))
    return FitResult(
        params=params,
        x=x,
        lambdas=lams,
        phi2_values=phi2_x,
        ssq_susy=ssq_susy,
        ssq_cbc=ssq_cbc,
        weights=tuple(problem.weights),
        cbc_report=report,
        history=list(history or []),
        seed=problem.seed,
        config=problem.echo(),
    )


def replay_vector(vec, problem: FitProblem, history=None) -> FitResult:
    alphas, x, gamma, sigma = problem.decode(np.atleast_2d(vec) if len(vec) else np.empty((1, 0)))
    params = problem.params_for(alphas[0], gamma[0], sigma[0])
    return replay(params, x[0], problem, with_cbc=problem.weights[1] > 0, history=history)


# --- fit modes ----------------------------------------------------------------

QUARTER_TOL = 1e-3


def fit_phases_fixed_x(problem: FitProblem, polish: bool = True) -> FitResult:
    """Fit the phases alone, turning points held fixed, gamma fixed.

    Minimizes the SUSY residuals only.  The DE optimum is polished with a
    bounded least-squares step; if every phase lands within 1e-3 of 1/4 or
    3/4 the zero-real-part configuration is snapped to exactly.
    """
    if problem.x_mode == "free_increasing":
        raise ValueError("fit_phases_fixed_x needs fixed turning points")
    if problem.gamma_fixed is None:
        raise ValueError("fit_phases_fixed_x needs a fixed gamma")
    prob = replace(problem, weights=(1.0, 0.0), sigma_mode=problem.sigma_mode, population=problem.population)
    result = differential_evolution(prob)
    alphas = np.array(result.params.phases)
    if polish and prob.phase_mode in ("free", "monotone") and prob.dimension:
        lo, hi = prob.bounds()

        def resid(v):
            al, x, g, s = prob.decode(v)
            phi2 = _batch_phi2(prob.potential, al, g, s, prob.D)
            return (phi2(x) - prob.lambdas)[0]

        v0 = np.clip(prob.encode(phases=alphas, gamma=result.params.gamma, sigma=result.params.sigma), lo, hi)
        plo, phi = prob.phase_bounds
        periodic = prob.phase_mode == "free" and phi - plo >= 1.0
        if periodic:
            # only cos(2 pi alpha) enters, so phases need no box during the polish
            lo, hi = lo.copy(), hi.copy()
            lo[: prob.m], hi[: prob.m] = -np.inf, np.inf
        ls = optimize.least_squares(resid, v0, bounds=(lo, hi), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        vec = ls.x.copy()
        if periodic:
            vec[: prob.m] = plo + np.mod(vec[: prob.m] - plo, 1.0)
        cand = replay_vector(vec, prob, history=result.history)
        if cand.ssq_susy < result.ssq_susy:
            result = cand
            alphas = np.array(result.params.phases)
    near = np.minimum(np.abs(alphas - 0.25), np.abs(alphas - 0.75))
    zero_real = bool(len(alphas)) and bool(np.all(near <= QUARTER_TOL))
    if zero_real:
        snapped = np.where(np.abs(alphas - 0.25) < np.abs(alphas - 0.75), 0.25, 0.75)
        cand = replay(replace(result.params, phases=tuple(snapped)), result.x, prob, with_cbc=False, history=result.history)
        if cand.ssq_susy <= result.ssq_susy + 1e-12:
            result = cand
    result.diagnostics["zero_real_part"] = zero_real
    return result


def iterate_two_step(problem: FitProblem, iterations: int, initial_phases=None, tol: float = 1e-6):
    """Alternate a phase fit at fixed turning points with per-level CBC adjustment.

    Returns a list of ``(phase_fit, adjusted)`` FitResult pairs, one per
    iteration.  ``adjusted`` is evaluated at the new turning points with the
    phases of the preceding half-step.  Stops early once neither phases nor
    turning points move by more than ``tol``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if problem.gamma_fixed is None:
        raise ValueError("the two-step scheme holds gamma fixed")
    x_smooth = np.asarray(problem.potential.smooth_turning_point(problem.lambdas), dtype=float).reshape(-1)
    x = problem.fixed_x() if problem.x_mode == "fixed_values" else x_smooth
    phases = None if initial_phases is None else tuple(float(a) for a in initial_phases)
    out = []
    for it in range(iterations):
        step_problem = replace(problem, x_mode="fixed_values", x_values=tuple(x))
        if it == 0 and phases is not None:
            params = step_problem.params_for(phases, problem.gamma_fixed, problem.sigma_value)
            phase_fit = replay(params, x, replace(step_problem, weights=(1.0, 0.0)), with_cbc=False)
        else:
            phase_fit = fit_phases_fixed_x(step_problem)
        params = phase_fit.params
        new_x = np.array(
            [
                adjust_turning_point(j, lam, problem.potential, params, problem.quadrature, search=(0.0, 1.05 * xs))[0]
                for j, (lam, xs) in enumerate(zip(problem.lambdas, x_smooth), start=1)
            ]
        )
        adjusted = replay(params, new_x, replace(problem, x_mode="fixed_values", x_values=tuple(new_x)))
        out.append((phase_fit, adjusted))
        change = float(np.max(np.abs(new_x - x)))
        if phases is not None and it > 0:
            change = max(change, float(np.max(np.abs(np.array(params.phases) - np.array(phases)))))
        phases, x = params.phases, new_x
        if change < tol:
            break
    return out
