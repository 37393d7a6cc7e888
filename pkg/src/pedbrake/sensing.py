"""Stochastic model of monocular pedestrian-range measurement.

The ranging error grows linearly with distance (sigma0 + sigma_slope * d),
with optional heavy-tailed outliers and detection dropouts, matching the
qualitative behavior of a monocular 3D detector: noisy everywhere, worse
far away. An exponential smoothing filter is provided but disabled by
default, since the braking experiments run on the raw signal.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import InvalidInputError, InvalidParameterError

MIN_RANGE = 0.1  # m, measurements are floored here


@dataclass
class DetectionNoiseModel:
    sigma0: float = 0.1  # m, base std-dev
    sigma_slope: float = 0.04  # m of std-dev per m of range
    outlier_prob: float = 0.01  # per sample
    outlier_sigma: float = 3.0  # m
    dropout_prob: float = 0.02  # per sample
    seed: int = 0

    def __post_init__(self):
        for name in ("outlier_prob", "dropout_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidParameterError(f"{name} must be in [0, 1], got {p}")
        if self.sigma0 < 0 or self.outlier_sigma < 0 or self.sigma_slope < 0:
            raise InvalidParameterError("noise magnitudes must be non-negative")

    def make_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def sigma_at(self, distance: float) -> float:
        return self.sigma0 + self.sigma_slope * distance


def noise_free() -> DetectionNoiseModel:
    return DetectionNoiseModel(0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass
class Measurement:
    timestamp: float  # s
    value: Optional[float]  # m, None on dropout

    @property
    def dropped(self) -> bool:
        return self.value is None


def sample_from_draws(
    true_distance: float,
    model: DetectionNoiseModel,
    u_dropout: float,
    u_outlier: float,
    z: float,
) -> Optional[float]:
    """Measurement value from pre-drawn uniforms/normal; None on dropout.

    Keeping the randomness external lets the simulation kernels consume
    pre-generated draw arrays and stay bit-reproducible across backends.
    """
    if u_dropout < model.dropout_prob:
        return None
    if u_outlier < model.outlier_prob:
        value = true_distance + z * model.outlier_sigma
    else:
        value = true_distance + z * model.sigma_at(true_distance)
    return value if value > MIN_RANGE else MIN_RANGE


def sample_detection(
    true_distance: float,
    model: DetectionNoiseModel,
    rng: np.random.Generator,
    timestamp: float = 0.0,
) -> Measurement:
    """Draw one range measurement.

    Consumes exactly three draws (dropout uniform, outlier uniform,
    standard normal) per call regardless of the branch taken, so a fixed
    seed always reproduces the same measurement stream.
    """
    if not math.isfinite(true_distance) or true_distance <= 0:
        raise InvalidInputError(
            f"true distance must be positive and finite, got {true_distance}"
        )
    u_dropout = rng.random()
    u_outlier = rng.random()
    z = rng.standard_normal()
    return Measurement(timestamp, sample_from_draws(true_distance, model, u_dropout, u_outlier, z))


def smooth(values: Iterable[Optional[float]], alpha: float) -> list[Optional[float]]:
    """First-order exponential filter; dropouts hold the previous output.

    Leading dropouts stay absent (there is nothing to hold yet); the
    first present value initializes the filter state.
    """
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameterError(f"alpha must be in (0, 1], got {alpha}")
    out: list[Optional[float]] = []
    state: Optional[float] = None
    for value in values:
        if value is None:
            out.append(state)
            continue
        state = value if state is None else alpha * value + (1.0 - alpha) * state
        out.append(state)
    return out
