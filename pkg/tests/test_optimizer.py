import json
import math

import numpy as np
import pytest

from susyzeta.analysis import residual_series
from susyzeta.fractal import FractalParams
from susyzeta.optimizer import (
    FitProblem,
    ObjectiveError,
    OptimizationError,
    batch_objective,
    de_minimize,
    differential_evolution,
    fit_phases_fixed_x,
    iterate_two_step,
    objective,
    replay,
)
from susyzeta.presets import REFERENCE_SETS


def test_de_sphere():
    lo, hi = -5 * np.ones(5), 5 * np.ones(5)
    best, val, hist = de_minimize(lambda P: np.sum(P**2, axis=1), lo, hi, seed=1, generations=200)
    assert val < 1e-6
    assert np.all(np.diff(hist) <= 0) and len(hist) == 201


def test_de_projection_and_failures():
    lo, hi = np.zeros(3), np.ones(3)

    def f(P):
        out = np.sum((P - 2.0) ** 2, axis=1)
        out[P[:, 0] < 0.1] = np.nan
        return out

    best, val, _ = de_minimize(f, lo, hi, seed=0, generations=50)
    assert np.all((best >= 0) & (best <= 1))
    np.testing.assert_allclose(best, 1.0, atol=1e-6)
    with pytest.raises(OptimizationError):
        de_minimize(lambda P: np.full(len(P), np.inf), lo, hi, generations=1)
    with pytest.raises(ValueError):
        de_minimize(lambda P: P[:, 0], lo, hi, population=8)


def test_problem_validation(zeros):
    with pytest.raises(ValueError):
        FitProblem(zeros, 3, 3, gamma_bounds=(0.5, 5))
    with pytest.raises(ValueError):
        FitProblem(zeros, 3, 3, weights=(0, 0))
    with pytest.raises(ValueError):
        FitProblem(zeros, 3, 3, weights=(-1, 1))
    with pytest.raises(ValueError):
        FitProblem(zeros, 3, 3, phase_mode="fixed_values", phase_values=[0.1])
    with pytest.raises(ValueError):
        FitProblem(zeros.head(2), 3, 3)


def test_layout_and_bounds(zeros):
    p = FitProblem(zeros, 7, 7, sigma_mode="free")
    assert p.dimension == 16 and p.population == 240
    lo, hi = p.bounds()
    rng = np.random.default_rng(0)
    vecs = lo + rng.random((50, p.dimension)) * (hi - lo)
    alphas, x, gamma, sigma = p.decode(vecs)
    assert np.all(np.diff(x, axis=1) > 0) and np.all(x > 0)
    assert np.all((gamma > 1) & (gamma <= 5)) and np.all((sigma >= 0.1) & (sigma <= 10))
    v = p.encode(alphas[0], x[0], gamma[0], sigma[0])
    np.testing.assert_allclose(v, vecs[0], rtol=1e-12, atol=1e-15)


def test_smooth_candidate_has_zero_susy_residual(zeros):
    p = FitProblem(zeros, 8, 0, x_mode="fixed_smooth", sigma_value=0.0, gamma_fixed=2.0)
    s, c, total = objective(np.empty(0), p)
    assert s < 1e-10
    assert total == pytest.approx(s + c)


def test_objective_fast_and_accurate_agree(zeros):
    ref = REFERENCE_SETS["n10"]
    p = FitProblem(zeros, 10, 10, sigma_mode="free")
    v = p.encode(ref.params().phases, ref.x, ref.gamma, ref.sigma)
    fast = objective(v, p)
    acc = objective(v, p, accurate=True)
    assert acc[0] == pytest.approx(fast[0], rel=1e-12)
    assert acc[1] == pytest.approx(2.68872, rel=0.05)
    assert fast[1] == pytest.approx(acc[1], rel=0.1)


def test_objective_error_carries_candidate(zeros):
    p = FitProblem(zeros, 3, 3)
    with pytest.raises(ObjectiveError) as info:
        objective(np.ones(2), p)
    assert info.value.candidate.shape == (2,)


def test_weight_scaling_preserves_ranking(zeros):
    p1 = FitProblem(zeros, 4, 4, sigma_mode="free")
    p2 = FitProblem(zeros, 4, 4, sigma_mode="free", weights=(2.0, 2.0))
    lo, hi = p1.bounds()
    vecs = lo + np.random.default_rng(5).random((40, p1.dimension)) * (hi - lo)
    t1 = np.sum(batch_objective(vecs, p1), axis=0)
    t2 = 2 * np.sum(batch_objective(vecs, p2), axis=0)
    np.testing.assert_allclose(t2, 2 * t1)
    np.testing.assert_array_equal(np.argsort(t1, kind="stable"), np.argsort(t2, kind="stable"))


def small_fit(zeros, **kw):
    args = dict(sigma_mode="free", seed=7, generations=15)
    args.update(kw)
    return differential_evolution(FitProblem(zeros, 4, 4, **args))


def test_fit_is_deterministic_and_monotone(zeros):
    a, b = small_fit(zeros), small_fit(zeros)
    assert a.to_json() == b.to_json()
    assert np.all(np.diff(a.history) <= 0)
    assert a.ssq_total == pytest.approx(a.weights[0] * a.ssq_susy + a.weights[1] * a.ssq_cbc)
    assert np.all(np.diff(a.x) > 0)
    assert small_fit(zeros, seed=8).to_json() != a.to_json()


def test_threaded_fitness_matches_serial(zeros):
    a = small_fit(zeros, generations=5, chunk=8)
    b = small_fit(zeros, generations=5, chunk=8, workers=3)
    assert a.to_json() == b.to_json()


def test_initial_points_are_used(zeros):
    ref = REFERENCE_SETS["n7-scaled"]
    p = FitProblem(zeros, 7, 7, sigma_mode="free", generations=0,
                   initial_points=[dict(phases=ref.params().phases, x=ref.x, gamma=ref.gamma, sigma=ref.sigma)])
    assert differential_evolution(p).ssq_total == pytest.approx(13.703, rel=0.05)


def test_result_serialization(zeros):
    r = small_fit(zeros, generations=2)
    doc = json.loads(r.to_json())
    assert set(doc) >= {"params", "x", "ssq", "cbc", "seed", "config"}
    assert doc["seed"] == 7 and len(doc["cbc"]) == 4
    lines = r.history_csv().splitlines()
    assert lines[0] == "generation,best_total" and len(lines) == 4


def test_replay_is_bit_identical(zeros):
    ref = REFERENCE_SETS["n10-zero"]
    p = FitProblem(zeros, 10, 10, x_mode="fixed_values", x_values=ref.x)
    a = replay(ref.params(), ref.x, p)
    b = replay(a.params, a.x, p)
    assert a.to_json() == b.to_json()
    with pytest.raises(ValueError):
        replay(ref.params(), ref.x[:9], p)


def test_phase_fit_zero_real_part_family(zeros):
    p = FitProblem(zeros, 8, 8, x_mode="fixed_smooth", gamma_fixed=3.0, generations=200, seed=0)
    r = fit_phases_fixed_x(p)
    assert r.ssq_susy < 1e-6
    assert r.diagnostics["zero_real_part"]
    assert set(r.params.phases) <= {0.25, 0.75}


def test_phase_fit_monotone(zeros):
    p = FitProblem(zeros, 6, 6, x_mode="fixed_smooth", gamma_fixed=3.0, generations=30, phase_mode="monotone")
    r = fit_phases_fixed_x(p)
    assert np.all(np.diff(r.params.phases) >= 0)


def test_phase_fit_requires_fixed_x(zeros):
    with pytest.raises(ValueError):
        fit_phases_fixed_x(FitProblem(zeros, 3, 3, gamma_fixed=2.0))


def test_two_step_single_iteration(zeros):
    p = FitProblem(zeros, 10, 10, x_mode="fixed_smooth", gamma_fixed=1.41119)
    out = iterate_two_step(p, 1, initial_phases=[0.75] * 10)
    assert len(out) == 1
    fit, adjusted = out[0]
    x_smooth = p.potential.smooth_turning_point(p.lambdas)
    assert np.all(adjusted.x <= x_smooth)
    # old phases at the revised turning points no longer solve the level equations
    assert adjusted.ssq_susy >= 1e3 * max(fit.ssq_susy, 1e-12)
    assert np.all(residual_series(adjusted) > 0)
    np.testing.assert_allclose(adjusted.cbc_report.ratios, 1.0, atol=1e-6)
    with pytest.raises(ValueError):
        iterate_two_step(p, 0)
