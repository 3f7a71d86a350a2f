import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from susyzeta.fractal import FractalParams, PhiSquared, affine_weierstrass, phi_squared, weierstrass_real
from susyzeta.potential import SmoothPotential

POT = SmoothPotential()
phases_st = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=25)


def naive_F(x, gamma, alphas, D=1.5):
    """Direct complex-exponential form of the symmetrized sum (oracle)."""
    total = 0.0
    for k, a in enumerate(alphas, start=1):
        w = sum(
            (1 - np.exp(1j * sgn * gamma**k * x)) * np.exp(1j * 2 * math.pi * a) / gamma ** (k * (2 - D))
            for sgn in (1, -1)
        )
        total += 0.5 * (w + np.conj(w))
    return float(np.real(total))


def test_matches_complex_form():
    rng = np.random.default_rng(3)
    for _ in range(20):
        m = int(rng.integers(1, 12))
        p = FractalParams(gamma=float(rng.uniform(1.01, 4)), phases=tuple(rng.random(m)))
        x = float(rng.uniform(-5, 5))
        assert weierstrass_real(x, p) == pytest.approx(naive_F(x, p.gamma, p.phases), abs=1e-11)


@settings(max_examples=150, deadline=None)
@given(st.floats(1.01, 5.0), phases_st, st.floats(-20, 20))
def test_even(gamma, phases, x):
    p = FractalParams(gamma=gamma, phases=tuple(phases))
    assert weierstrass_real(x, p) == pytest.approx(weierstrass_real(-x, p), abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(st.floats(1.01, 5.0), st.integers(1, 30), st.floats(-20, 20), st.sampled_from([0.25, 0.75]))
def test_quarter_phases_vanish(gamma, m, x, a):
    p = FractalParams(gamma=gamma, phases=(a,) * m)
    assert abs(weierstrass_real(x, p)) < 1e-13 * m


@settings(max_examples=150, deadline=None)
@given(st.floats(1.05, 5.0), st.integers(1, 15), st.integers(1, 15), st.floats(-10, 10), st.floats(1.1, 1.9))
def test_truncation_tail_bound(gamma, m, extra, x, D):
    rng = np.random.default_rng(m * 31 + extra)
    phases = tuple(rng.random(m + extra))
    full = FractalParams(gamma=gamma, phases=phases, D=D)
    cut = FractalParams(gamma=gamma, phases=phases[:m], D=D)
    k = np.arange(m + 1, m + extra + 1)
    bound = float(np.sum(4.0 / gamma ** (k * (2 - D))))
    assert abs(weierstrass_real(x, full) - weierstrass_real(x, cut)) <= bound + 1e-12


@settings(max_examples=150, deadline=None)
@given(st.floats(1.01, 5.0), phases_st, st.floats(0, 10))
def test_phi2_vanishes_at_origin(gamma, phases, sigma):
    p = FractalParams(gamma=gamma, phases=tuple(phases), sigma=sigma)
    assert phi_squared(0.0, POT, p) == pytest.approx(0.0, abs=1e-12)
    assert PhiSquared(POT, p)(0.0) == pytest.approx(0.0, abs=1e-12)


def test_phi2_callable_matches_function():
    p = FractalParams(gamma=1.7, phases=(0.1, 0.4, 0.9), sigma=2.5)
    xs = np.linspace(-4, 4, 33)
    np.testing.assert_allclose(PhiSquared(POT, p)(xs), phi_squared(xs, POT, p), rtol=1e-14, atol=1e-13)
    # batched leading axes keep their shape
    assert PhiSquared(POT, p)(xs.reshape(3, 11)).shape == (3, 11)


def test_sigma_zero_is_smooth_well():
    p = FractalParams(gamma=2.0, phases=(0.3,), sigma=0.0)
    xs = np.linspace(0, 3, 7)
    np.testing.assert_allclose(phi_squared(xs, POT, p), POT.V_of_x(xs) - POT.V0)


def test_affine():
    p = FractalParams(gamma=2.0, phases=(0.0, 0.5))
    assert affine_weierstrass(1.3, p, 3.0, -2.0) == pytest.approx(3 * weierstrass_real(1.3, p) - 2)


def test_param_validation():
    with pytest.raises(ValueError):
        FractalParams(gamma=1.0, phases=())
    with pytest.raises(ValueError):
        FractalParams(gamma=2.0, phases=(1.2,))
    with pytest.raises(ValueError):
        FractalParams(gamma=2.0, phases=(), D=2.0)
    with pytest.raises(ValueError):
        FractalParams(gamma=2.0, phases=(), sigma=-1)
    assert FractalParams(gamma=2.0, phases=(-0.3,), phase_bounds=(-0.5, 0.5)).phases == (-0.3,)
    p = FractalParams(gamma=2.0, phases=(), D=1.2)
    assert p.beta == pytest.approx(0.6) and p.with_D(1.5).beta == 0.75


def test_from_radians_wraps():
    p = FractalParams.from_radians(2.0, [6.28319, math.pi, 0.0])
    assert p.phases[0] == pytest.approx((6.28319 - 2 * math.pi) / (2 * math.pi))
    assert p.phases[1] == pytest.approx(0.5)
