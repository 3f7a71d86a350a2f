"""Reference parameter points used for deterministic replays.

Phases are stored as physical angles in radians; ``params()`` reduces them
modulo 2 pi into scaled form.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fractal import FractalParams


@dataclass(frozen=True)
class ReferenceSet:
    name: str
    gamma: float
    sigma: float
    phases_rad: tuple[float, ...]
    x: tuple[float, ...]
    total: float
    ssq_cbc: float | None = None
    ratios: tuple[float, ...] | None = None

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def m(self) -> int:
        return len(self.phases_rad)

    def params(self, D: float = 1.5) -> FractalParams:
        return FractalParams.from_radians(self.gamma, self.phases_rad, sigma=self.sigma, D=D)


REFERENCE_SETS = {
    s.name: s
    for s in (
        ReferenceSet(
            "n7-scaled",
            gamma=2.18081,
            sigma=3.92036,
            phases_rad=(0.915274, 6.28319, 6.28319, 1.20429, 5.33637, 0.700917, 0.0),
            x=(0.321253, 0.676572, 0.936234, 1.65921, 1.79613, 2.1688, 2.18378),
            total=13.703,
            ssq_cbc=8.48114,
            ratios=(1.1386, 1.16732, 0.951104, 1.13392, 1.02881, 1.067, 1.06951),
        ),
        ReferenceSet(
            "n10",
            gamma=1.30466,
            sigma=1.49575,
            phases_rad=(6.28319, 6.28319, 1.27142, 0.0493542, 6.28319, 0.0555025, 0.0000178313, 6.28319, 0.0, 6.00153e-23),
            x=(0.38402, 0.665384, 0.915631, 1.32033, 1.42245, 1.83676, 1.95767, 2.33568, 2.68742, 3.06041),
            total=2.86609,
            ssq_cbc=2.68872,
            ratios=(1.27306, 1.142, 1.00359, 1.03838, 0.969627, 1.02007, 1.0058, 0.978438, 1.00323, 0.984601),
        ),
        ReferenceSet(
            "n10-zero",
            gamma=1.25274,
            sigma=1.23289,
            phases_rad=(0.0,) * 10,
            x=(0.406011, 0.72083, 0.88735, 1.21503, 1.38215, 1.72066, 2.07865, 2.24067, 2.81678, 2.91862),
            total=7.2358,
            ssq_cbc=6.758,
            ratios=(1.4716, 1.20207, 1.04624, 1.0322, 0.953197, 0.985181, 0.987027, 0.9602, 1.03323, 0.995425),
        ),
        ReferenceSet(
            "n20",
            gamma=1.08285,
            sigma=1.23124,
            phases_rad=(
                6.28319, 5.12918, 1.82172, 0.627236, 2.28354, 6.28057, 2.09377, 2.27574, 6.28319, 6.28319,
                1.39899, 1.05003, 4.08259, 0.00871371, 6.28319, 5.20743, 0.00527643, 6.28319, 3.08389e-7, 0.00224054,
            ),
            x=(
                0.430261, 0.581042, 0.682297, 0.990577, 1.66733, 1.8869, 2.03975, 2.16318, 2.7836, 2.8999,
                3.11796, 3.36483, 3.61917, 3.71294, 4.1214, 4.23216, 4.39019, 4.59062, 5.39774, 5.49934,
            ),
            total=11.4018,
            ssq_cbc=10.3952,
            ratios=(
                1.63002, 1.21105, 0.97568, 0.925948, 0.959536, 1.03755, 1.02111, 0.978159, 1.01279, 0.983753,
                0.998834, 1.01199, 1.00774, 0.97948, 1.01524, 1.00143, 0.997587, 0.993286, 1.00448, 0.994628,
            ),
        ),
        ReferenceSet(
            "n8-unit",
            gamma=1.41119,
            sigma=1.0,
            phases_rad=(0.0,) * 8,
            x=(0.662734, 1.17022, 1.58516, 2.28689, 2.32938, 3.18343, 3.21295, 3.30561),
            total=181.6414,
            ssq_cbc=130.236,
            ratios=(1.80006, 1.55891, 1.3248, 1.32142, 1.22064, 1.23564, 1.23128, 1.21166),
        ),
        ReferenceSet(
            "n8-unit-smooth",
            gamma=1.41119,
            sigma=1.0,
            phases_rad=(0.0,) * 8,
            x=(1.30083, 1.87866, 2.20626, 2.64243, 2.84142, 3.20489, 3.4613, 3.64459),
            total=620.878 + 83.5937,
            ssq_cbc=83.5937,
            ratios=(1.46964, 1.34903, 1.19796, 1.26407, 1.14572, 1.23298, 1.201, 1.16905),
        ),
    )
}

# Two independently fitted fifteen-level solutions (phases in radians, turning points).
FIFTEEN_A_PHASES = (
    5.85115, 1.90972, 6.07707, 3.38707, 5.79917, 3.01828, 5.21112, 0.972974,
    6.28319, 4.06528, 5.13804, 1.09178, 5.42993, 0.0000400221, 0.887475,
)
FIFTEEN_B_PHASES = (
    1.44074, 6.28318, 1.66813, 0.542437, 2.10471, 4.76708, 2.12488, 0.0381873,
    1.27475, 0.672527, 1.10953, 1.92716, 5.96083, 0.00013761, 0.0,
)
FIFTEEN_A_X = (
    0.427238, 0.575873, 0.674962, 0.964599, 1.67025, 1.86543, 1.99707, 2.09904,
    2.87102, 2.96694, 3.12156, 3.26476, 3.37853, 3.42232, 3.66246,
)
FIFTEEN_B_X = (
    0.447782, 0.605638, 0.711853, 1.03604, 1.65431, 1.87966, 2.02289, 2.13206,
    2.85323, 2.95601, 3.11569, 3.25825, 3.37216, 3.41606, 3.70782,
)
