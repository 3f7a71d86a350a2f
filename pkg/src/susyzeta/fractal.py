"""Truncated Weierstrass fractal term and the potential-squared Phi^2(x)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .potential import SmoothPotential

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FractalParams:
    """Parameters of the symmetrized Weierstrass contribution.

    ``phases`` holds the scaled phases alpha_k (physical phase 2*pi*alpha_k)
    for k = 1..m.  ``beta`` is always D/2.
    """

    gamma: float
    phases: tuple[float, ...]
    sigma: float = 1.0
    D: float = 1.5
    phase_bounds: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(a) for a in self.phases))
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not 1.0 < self.D < 2.0:
            raise ValueError(f"D must lie in (1, 2), got {self.D}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        lo, hi = self.phase_bounds
        for a in self.phases:
            if not lo <= a <= hi:
                raise ValueError(f"scaled phase {a} outside [{lo}, {hi}]")

    @property
    def m(self) -> int:
        return len(self.phases)

    @property
    def beta(self) -> float:
        return self.D / 2.0

    def with_D(self, D: float) -> "FractalParams":
        return replace(self, D=D)

    @classmethod
    def from_radians(cls, gamma: float, phases_rad: Sequence[float], **kwargs) -> "FractalParams":
        """Build from physical phases in radians, reduced modulo 2*pi."""
        alphas = np.mod(np.asarray(phases_rad, dtype=float), TWO_PI) / TWO_PI
        return cls(gamma=gamma, phases=tuple(alphas), **kwargs)


def weierstrass_terms(gamma: float, phases, D: float = 1.5):
    """Frequencies and amplitudes ``2 cos(2 pi alpha_k) / gamma^(k(2-D))``."""
    k = np.arange(1, len(phases) + 1)
    freqs = gamma**k
    amps = 2.0 * np.cos(TWO_PI * np.asarray(phases, dtype=float)) / gamma ** (k * (2.0 - D))
    return freqs, amps


def weierstrass_real(x, params: FractalParams):
    """Real symmetrized Weierstrass sum F(x) = (1/2)[W(x) + W(-x) + c.c.].

    Under truncation to k = 1..m this is
    ``2 * sum_k (1 - cos(x gamma^k)) cos(2 pi alpha_k) / gamma^(k(2-D))``.
    """
    x = np.asarray(x, dtype=float)
    freqs, amps = weierstrass_terms(params.gamma, params.phases, params.D)
    out = np.tensordot(1.0 - np.cos(x[..., None] * freqs), amps, axes=([-1], [0]))
    return float(out) if out.ndim == 0 else out


def affine_weierstrass(x, params: FractalParams, scale: float = 1.0, offset: float = 0.0):
    """``scale * F(x) + offset``; used to compare the term's shape by eye."""
    return scale * np.asarray(weierstrass_real(x, params)) + offset


def phi_squared(x, potential: SmoothPotential, params: FractalParams):
    """Supersymmetric potential-squared ``V(|x|) - V0 + sigma F(x)``.

    Vanishes at x = 0 and is even in x.
    """
    x = np.asarray(x, dtype=float)
    out = potential.V_even(x) - potential.V0 + params.sigma * np.asarray(weierstrass_real(x, params))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PhiSquared:
    """Callable Phi^2 bound to a potential and parameter set."""

    potential: SmoothPotential
    params: FractalParams
    _freqs: np.ndarray = field(init=False, repr=False, compare=False)
    _amps: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        freqs, amps = weierstrass_terms(self.params.gamma, self.params.phases, self.params.D)
        object.__setattr__(self, "_freqs", freqs)
        object.__setattr__(self, "_amps", amps * self.params.sigma)

    @property
    def max_frequency(self) -> float:
        """Highest angular frequency present; guides sign-change sampling."""
        if self.params.sigma == 0.0 or self.params.m == 0:
            return 0.0
        return float(self._freqs[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        smooth = self.potential.V_even(x) - self.potential.V0
        if self.params.sigma == 0.0 or self.params.m == 0:
            return smooth
        return smooth + np.tensordot(1.0 - np.cos(x[..., None] * self._freqs), self._amps, axes=([-1], [0]))
