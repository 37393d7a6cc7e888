"""Closed-loop experiment harness and trajectory logging.

Wires plant, controller and sensor model into the four desk experiments:
the pedestrian braking run, the comfort (outer-gain) sweep, the lateral
step response, and the detection-range characterization. Each run is a
pure function of its config, including the seed, so sweeps and Monte
Carlo batches are reproducible bit-for-bit.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernel
from .control import PdGains, lateral_gains, braking_gains
from .dynamics import MAX_STEP, DEFAULT_STEERING_LIMIT, LateralParams, LongitudinalParams
from .errors import ConfigurationError
from .sensing import MIN_RANGE, DetectionNoiseModel, Measurement

BRAKE_CSV_HEADER = "t,x,v,ped_true,ped_meas,r,e1,r_v,e2,u,brake_cmd"
LATERAL_CSV_HEADER = "t,y,psi,psi_dot,v_y,r_psidot,delta_f"
DETECTION_CSV_HEADER = "t,true_range,meas"

# Reference kind for a lateral run: a constant step target, or a sorted
# piecewise-constant schedule of (time, target) breakpoints.
LateralReference = Union[float, Sequence[tuple[float, float]]]


@dataclass
class ScenarioConfig:
    """Braking experiment configuration. Defaults: approach a pedestrian
    25 m ahead at 8.13 m/s and stop 5 m short of them."""

    label: str = "brake"
    initial_speed: float = 8.13  # m/s
    initial_ped_distance: float = 25.0  # m, pedestrian ahead of the start point
    safe_offset: float = 5.0  # m
    dt: float = 0.01  # s
    horizon: float = 30.0  # s
    gains: PdGains = field(default_factory=braking_gains)
    plant: LongitudinalParams = field(default_factory=LongitudinalParams)
    f_brake_max: float = 8000.0  # N at brake command 1.0
    noise: Optional[DetectionNoiseModel] = None  # None = ideal sensor
    seed: int = 0
    detection_every: int = 1  # sensor decimation, in control steps
    # The loop approaches rest asymptotically; the run counts as stopped
    # once speed and brake command are both below these thresholds.
    stop_speed_eps: float = 1e-3  # m/s
    stop_brake_eps: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.dt <= MAX_STEP:
            raise ConfigurationError(f"dt must be in (0, {MAX_STEP}] s, got {self.dt}")
        if self.horizon < self.dt:
            raise ConfigurationError("horizon must cover at least one step")
        if self.safe_offset <= 0:
            raise ConfigurationError("safe_offset must be positive")
        if self.initial_ped_distance <= self.safe_offset:
            raise ConfigurationError(
                "initial pedestrian distance must exceed the safe offset"
            )
        if self.initial_speed < 0:
            raise ConfigurationError("initial speed must be non-negative")
        if self.detection_every < 1:
            raise ConfigurationError("detection_every must be >= 1")


@dataclass
class TrajectoryLog:
    """Time-indexed record of every braking-loop signal, plus run summary.

    Column arrays all share one length; `ped_meas` is NaN where the
    sensor produced nothing (dropout or decimation), and the controller
    reference columns are NaN before the first successful detection.
    """

    label: str
    seed: int
    dt: float
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    ped_true: np.ndarray
    ped_meas: np.ndarray
    r: np.ndarray
    e1: np.ndarray
    r_v: np.ndarray
    e2: np.ndarray
    u: np.ndarray
    brake_cmd: np.ndarray
    converged: bool
    final_gap: float  # m between stopped vehicle and pedestrian
    peak_decel: float  # m/s^2
    stop_time: float  # s, NaN when the run did not converge

    def __len__(self):
        return len(self.t)

    def summary_items(self) -> list[tuple[str, str]]:
        return [
            ("label", self.label),
            ("seed", str(self.seed)),
            ("converged", "true" if self.converged else "false"),
            ("final_gap", _fmt(self.final_gap)),
            ("peak_decel", _fmt(self.peak_decel)),
            ("stop_time", _fmt(self.stop_time)),
        ]


def run_braking_scenario(config: ScenarioConfig) -> TrajectoryLog:
    """Simulate the braking loop from t=0 until stop or horizon.

    The vehicle starts at x=0 aimed at a pedestrian fixed at
    `initial_ped_distance`; the range sensor is sampled every step
    (identity when noise is disabled). A horizon hit while still moving
    is reported via `converged=False`, not an exception, so sweeps run
    to completion.
    """
    n = int(round(config.horizon / config.dt))
    cols = [np.empty(n + 1) for _ in range(11)]

    noise = config.noise
    if noise is not None:
        rng = np.random.default_rng(config.seed)
        u_drop = rng.random(n + 1)
        u_out = rng.random(n + 1)
        z = rng.standard_normal(n + 1)
    else:
        u_drop = u_out = z = np.empty(0)

    plant = config.plant
    drag_c = 0.5 * plant.rho * plant.c_d * plant.area if plant.drag_enabled else 0.0
    dummy = DetectionNoiseModel(0.0, 0.0, 0.0, 0.0, 0.0)
    nm = noise if noise is not None else dummy

    n_rows, converged = _kernel.run_braking_loop(
        config.initial_ped_distance, config.initial_speed, config.dt, n,
        plant.m, drag_c,
        config.gains.k_p, config.gains.k_d, config.gains.k_inner,
        config.safe_offset, config.f_brake_max,
        config.stop_speed_eps, config.stop_brake_eps,
        noise is not None, nm.dropout_prob, nm.outlier_prob, nm.outlier_sigma,
        nm.sigma0, nm.sigma_slope, MIN_RANGE, config.detection_every,
        u_drop, u_out, z,
        *cols,
    )

    t, x, v, ped_true, ped_meas, r, e1, r_v, e2, u, brake = (
        c[:n_rows].copy() for c in cols
    )
    return TrajectoryLog(
        label=config.label,
        seed=config.seed,
        dt=config.dt,
        t=t, x=x, v=v, ped_true=ped_true, ped_meas=ped_meas,
        r=r, e1=e1, r_v=r_v, e2=e2, u=u, brake_cmd=brake,
        converged=bool(converged),
        final_gap=float(ped_true[-1]),
        peak_decel=_peak_decel(v, config.dt),
        stop_time=float(t[-1]) if converged else math.nan,
    )


def _peak_decel(v: np.ndarray, dt: float) -> float:
    if len(v) < 2:
        return 0.0
    return float(np.max((v[:-1] - v[1:]) / dt))


def run_kp_sweep(base: ScenarioConfig, kp_values: Sequence[float]) -> list[TrajectoryLog]:
    """One noise-free braking run per outer proportional gain."""
    logs = []
    for kp in kp_values:
        cfg = replace(
            base,
            gains=PdGains(kp, base.gains.k_d, base.gains.k_inner),
            noise=None,
            label=f"kp-{kp:g}",
        )
        logs.append(run_braking_scenario(cfg))
    return logs


def default_sweep_base() -> ScenarioConfig:
    """Base config for comfort sweeps.

    Starts farther out than the braking default so that even the softest
    swept gain begins before its braking-onset distance; otherwise the
    first steps saturate the brake and mask the comfort ordering.
    """
    return ScenarioConfig(label="kp-sweep", initial_ped_distance=40.0, noise=None)


@dataclass
class LateralScenarioConfig:
    label: str = "lateral"
    initial_offset: float = 0.0  # m, initial lateral position
    y_ref: LateralReference = 1.0  # m
    params: LateralParams = field(default_factory=LateralParams)
    gains: PdGains = field(default_factory=lateral_gains)
    dt: float = 0.01  # s
    horizon: float = 15.0  # s
    steering_limit: float = DEFAULT_STEERING_LIMIT  # rad
    diverge_limit: float = 100.0  # m, |y| beyond this aborts the run
    seed: int = 0  # logged for manifest parity; the run is deterministic

    def __post_init__(self):
        if not 0.0 < self.dt <= MAX_STEP:
            raise ConfigurationError(f"dt must be in (0, {MAX_STEP}] s, got {self.dt}")
        if self.horizon < self.dt:
            raise ConfigurationError("horizon must cover at least one step")


@dataclass
class LateralTrajectoryLog:
    label: str
    seed: int
    dt: float
    t: np.ndarray
    y: np.ndarray
    psi: np.ndarray
    psi_dot: np.ndarray
    v_y: np.ndarray
    r_psidot: np.ndarray
    delta_f: np.ndarray
    diverged: bool
    overshoot: float  # fraction of the final reference step
    settling_time: float  # s, last exit from the 2% band of the final step
    final_y: float

    def __len__(self):
        return len(self.t)

    def summary_items(self) -> list[tuple[str, str]]:
        return [
            ("label", self.label),
            ("seed", str(self.seed)),
            ("diverged", "true" if self.diverged else "false"),
            ("overshoot", _fmt(self.overshoot)),
            ("settling_time", _fmt(self.settling_time)),
            ("final_y", _fmt(self.final_y)),
        ]


def _reference_array(ref: LateralReference, n: int, dt: float) -> np.ndarray:
    if isinstance(ref, (int, float)):
        return np.full(n + 1, float(ref))
    out = np.zeros(n + 1)
    pairs = sorted((float(t), float(v)) for t, v in ref)
    for t_start, value in pairs:
        k = max(0, int(math.ceil(t_start / dt - 1e-9)))
        if k <= n:
            out[k:] = value
    return out


def run_lateral_scenario(config: LateralScenarioConfig) -> LateralTrajectoryLog:
    """Closed-loop lateral tracking toward a step or piecewise reference.

    Overshoot and settling time are measured on the final reference
    segment, with a settling band of 2% of that segment's step amplitude.
    """
    n = int(round(config.horizon / config.dt))
    y_ref = _reference_array(config.y_ref, n, config.dt)
    cols = [np.empty(n + 1) for _ in range(7)]

    p = config.params
    a11, a12, a21, a22 = p.yaw_plane_matrix()
    b1, b2 = p.steering_input_column()

    n_rows, diverged = _kernel.run_lateral_loop(
        0.0, 0.0, 0.0, config.initial_offset, config.dt, n,
        a11, a12, a21, a22, b1, b2, p.m_z / p.i_z, p.v_x,
        config.gains.k_p, config.gains.k_d, config.gains.k_inner,
        config.steering_limit,
        y_ref, config.diverge_limit,
        *cols,
    )

    t, y, psi, psi_dot, v_y, r_psidot, delta_f = (c[:n_rows].copy() for c in cols)
    overshoot, settling_time = _step_metrics(t, y, y_ref[:n_rows], config.dt)
    return LateralTrajectoryLog(
        label=config.label,
        seed=config.seed,
        dt=config.dt,
        t=t, y=y, psi=psi, psi_dot=psi_dot, v_y=v_y,
        r_psidot=r_psidot, delta_f=delta_f,
        diverged=bool(diverged),
        overshoot=overshoot,
        settling_time=settling_time,
        final_y=float(y[-1]),
    )


def _step_metrics(t, y, y_ref, dt) -> tuple[float, float]:
    changes = np.nonzero(np.diff(y_ref))[0]
    seg = int(changes[-1] + 1) if len(changes) else 0
    target = float(y_ref[-1])
    amplitude = target - float(y[seg])
    tail = y[seg:]
    if amplitude == 0.0:
        deviation = float(np.max(np.abs(tail - target))) if len(tail) else 0.0
        return 0.0, 0.0 if deviation == 0.0 else math.nan
    sign = 1.0 if amplitude > 0 else -1.0
    overshoot = max(0.0, float(np.max(sign * (tail - target)))) / abs(amplitude)
    band = 0.02 * abs(amplitude)
    outside = np.nonzero(np.abs(tail - target) > band)[0]
    settling = float(t[seg] + (outside[-1] + 1) * dt) if len(outside) else float(t[seg])
    return overshoot, settling


@dataclass
class RangeSummary:
    true_range: float
    n_samples: int
    n_dropped: int
    mean: float
    std: float


@dataclass
class CharacterizationLog:
    measurements: list[Measurement]
    true_ranges: list[float]  # one per measurement, aligned
    summaries: list[RangeSummary]
    seed: int


def run_detection_characterization(
    ranges: Sequence[float],
    dwell: float,
    model: DetectionNoiseModel,
    rate: float = 100.0,
) -> CharacterizationLog:
    """Synthetic range-characterization sweep.

    Holds the pedestrian at each range for `dwell` seconds of samples at
    `rate` Hz, then summarizes the empirical mean/std per range. Seeded
    by the noise model, so reruns are bit-identical.
    """
    if any(d <= 0 for d in ranges):
        raise ConfigurationError("ranges must be positive")
    if dwell <= 0 or rate <= 0:
        raise ConfigurationError("dwell and rate must be positive")
    from .sensing import sample_detection

    rng = model.make_rng()
    per_range = int(round(dwell * rate))
    measurements: list[Measurement] = []
    true_ranges: list[float] = []
    summaries: list[RangeSummary] = []
    step = 1.0 / rate
    tick = 0
    for d in ranges:
        values = []
        dropped = 0
        for _ in range(per_range):
            meas = sample_detection(d, model, rng, timestamp=tick * step)
            measurements.append(meas)
            true_ranges.append(d)
            tick += 1
            if meas.value is None:
                dropped += 1
            else:
                values.append(meas.value)
        arr = np.asarray(values)
        summaries.append(RangeSummary(
            true_range=d,
            n_samples=per_range,
            n_dropped=dropped,
            mean=float(arr.mean()) if len(arr) else math.nan,
            std=float(arr.std(ddof=1)) if len(arr) > 1 else math.nan,
        ))
    return CharacterizationLog(measurements, true_ranges, summaries, model.seed)


# ---------------------------------------------------------------------------
# CSV serialization (the cross-tool contract; see plotkit)

def _fmt(value: float) -> str:
    return format(value, ".12g")


def _fmt_meas(value: float) -> str:
    return "" if math.isnan(value) else _fmt(value)


def write_trajectory_csv(log: TrajectoryLog, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(BRAKE_CSV_HEADER + "\n")
        for i in range(len(log)):
            fh.write(",".join((
                _fmt(log.t[i]), _fmt(log.x[i]), _fmt(log.v[i]),
                _fmt(log.ped_true[i]), _fmt_meas(log.ped_meas[i]),
                _fmt(log.r[i]), _fmt(log.e1[i]), _fmt(log.r_v[i]),
                _fmt(log.e2[i]), _fmt(log.u[i]), _fmt(log.brake_cmd[i]),
            )) + "\n")


def write_lateral_csv(log: LateralTrajectoryLog, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(LATERAL_CSV_HEADER + "\n")
        for i in range(len(log)):
            fh.write(",".join((
                _fmt(log.t[i]), _fmt(log.y[i]), _fmt(log.psi[i]),
                _fmt(log.psi_dot[i]), _fmt(log.v_y[i]),
                _fmt(log.r_psidot[i]), _fmt(log.delta_f[i]),
            )) + "\n")


def write_detection_csv(log: CharacterizationLog, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(DETECTION_CSV_HEADER + "\n")
        for meas, true_range in zip(log.measurements, log.true_ranges):
            value = "" if meas.value is None else _fmt(meas.value)
            fh.write(f"{_fmt(meas.timestamp)},{_fmt(true_range)},{value}\n")
