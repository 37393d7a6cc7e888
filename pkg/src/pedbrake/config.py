"""Scenario configuration files.

A run is described by one INI-style text file (flat key/value entries
grouped into sections); every field has a built-in default, and CLI flag
overrides beat file values beat defaults. Unknown sections or keys are
rejected so typos fail loudly.
"""

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .control import PdGains, lateral_gains, braking_gains
from .dynamics import LateralParams, LongitudinalParams
from .errors import ConfigurationError
from .scenarios import LateralScenarioConfig, ScenarioConfig
from .sensing import DetectionNoiseModel

_SCHEMA = {
    "scenario": {
        "label": str,
        "initial_speed": float,
        "initial_ped_distance": float,
        "safe_offset": float,
        "dt": float,
        "horizon": float,
        "seed": int,
        "noise": bool,
        "detection_every": int,
    },
    "gains": {"k_p": float, "k_d": float, "k_inner": float},
    "plant": {
        "m": float,
        "drag_enabled": bool,
        "rho": float,
        "c_d": float,
        "area": float,
        "f_brake_max": float,
    },
    "noise": {
        "sigma0": float,
        "sigma_slope": float,
        "outlier_prob": float,
        "outlier_sigma": float,
        "dropout_prob": float,
    },
    "lateral": {
        "label": str,
        "initial_offset": float,
        "y_ref": float,
        "dt": float,
        "horizon": float,
        "k_p": float,
        "k_d": float,
        "k_inner": float,
        "c_f": float,
        "c_r": float,
        "l_f": float,
        "l_r": float,
        "m": float,
        "i_z": float,
        "v_x": float,
        "m_z": float,
        "steering_limit": float,
    },
    "characterize": {
        "ranges": str,  # comma-separated meters
        "dwell": float,
        "rate": float,
    },
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass
class ConfigSource:
    """Parsed config file plus its path (for diagnostics)."""

    values: dict  # (section, key) -> raw string
    path: Optional[Path] = None

    def line_of(self, section: str, key: str) -> Optional[int]:
        if self.path is None:
            return None
        in_section = False
        for lineno, raw in enumerate(self.path.read_text().splitlines(), start=1):
            line = raw.strip()
            if line.startswith("[") and line.endswith("]"):
                in_section = line[1:-1].strip() == section
            elif in_section and line.split("=", 1)[0].split(":", 1)[0].strip() == key:
                return lineno
        return None


EMPTY_SOURCE = ConfigSource(values={})


def load_config_file(path) -> ConfigSource:
    path = Path(path)
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        # configparser syntax errors already carry line numbers.
        raise ConfigurationError(f"malformed config file: {exc}") from exc

    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigurationError(
                f"{path}: unknown section [{section}] "
                f"(expected one of {sorted(_SCHEMA)})"
            )
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigurationError(
                    f"{path}: unknown key '{key}' in section [{section}]"
                )
            values[(section, key)] = raw
    return ConfigSource(values=values, path=path)


class Resolver:
    """Field-by-field precedence: override > file value > default."""

    def __init__(self, source: ConfigSource, overrides: Optional[dict] = None):
        self.source = source
        self.overrides = overrides or {}

    def get(self, section: str, key: str, default):
        override = self.overrides.get(f"{section}.{key}")
        if override is not None:
            return override
        raw = self.source.values.get((section, key))
        if raw is None:
            return default
        return self._cast(section, key, raw)

    def _cast(self, section, key, raw):
        kind = _SCHEMA[section][key]
        try:
            if kind is bool:
                lowered = raw.strip().lower()
                if lowered in _TRUE:
                    return True
                if lowered in _FALSE:
                    return False
                raise ValueError(f"not a boolean: {raw!r}")
            return kind(raw)
        except ValueError as exc:
            line = self.source.line_of(section, key)
            where = f"line {line}" if line is not None else f"[{section}] {key}"
            raise ConfigurationError(
                f"{self.source.path}: {where}: cannot parse {raw!r} "
                f"as {kind.__name__} for [{section}] {key}"
            ) from exc


def build_noise_model(resolver: Resolver, seed: int) -> DetectionNoiseModel:
    return DetectionNoiseModel(
        sigma0=resolver.get("noise", "sigma0", 0.1),
        sigma_slope=resolver.get("noise", "sigma_slope", 0.04),
        outlier_prob=resolver.get("noise", "outlier_prob", 0.01),
        outlier_sigma=resolver.get("noise", "outlier_sigma", 3.0),
        dropout_prob=resolver.get("noise", "dropout_prob", 0.02),
        seed=seed,
    )


def build_scenario(
    source: ConfigSource,
    overrides: Optional[dict] = None,
    defaults: Optional[ScenarioConfig] = None,
) -> ScenarioConfig:
    base = defaults if defaults is not None else ScenarioConfig()
    r = Resolver(source, overrides)
    seed = r.get("scenario", "seed", base.seed)
    noise_on = r.get("scenario", "noise", base.noise is not None)
    return ScenarioConfig(
        label=r.get("scenario", "label", base.label),
        initial_speed=r.get("scenario", "initial_speed", base.initial_speed),
        initial_ped_distance=r.get(
            "scenario", "initial_ped_distance", base.initial_ped_distance
        ),
        safe_offset=r.get("scenario", "safe_offset", base.safe_offset),
        dt=r.get("scenario", "dt", base.dt),
        horizon=r.get("scenario", "horizon", base.horizon),
        gains=PdGains(
            k_p=r.get("gains", "k_p", base.gains.k_p),
            k_d=r.get("gains", "k_d", base.gains.k_d),
            k_inner=r.get("gains", "k_inner", base.gains.k_inner),
        ),
        plant=LongitudinalParams(
            m=r.get("plant", "m", base.plant.m),
            drag_enabled=r.get("plant", "drag_enabled", base.plant.drag_enabled),
            rho=r.get("plant", "rho", base.plant.rho),
            c_d=r.get("plant", "c_d", base.plant.c_d),
            area=r.get("plant", "area", base.plant.area),
        ),
        f_brake_max=r.get("plant", "f_brake_max", base.f_brake_max),
        noise=build_noise_model(r, seed) if noise_on else None,
        seed=seed,
        detection_every=r.get("scenario", "detection_every", base.detection_every),
    )


def build_lateral_scenario(
    source: ConfigSource, overrides: Optional[dict] = None
) -> LateralScenarioConfig:
    r = Resolver(source, overrides)
    base = LateralScenarioConfig()
    lat_defaults = lateral_gains()
    params_default = LateralParams()
    return LateralScenarioConfig(
        label=r.get("lateral", "label", base.label),
        initial_offset=r.get("lateral", "initial_offset", base.initial_offset),
        y_ref=r.get("lateral", "y_ref", 1.0),
        params=LateralParams(
            c_f=r.get("lateral", "c_f", params_default.c_f),
            c_r=r.get("lateral", "c_r", params_default.c_r),
            l_f=r.get("lateral", "l_f", params_default.l_f),
            l_r=r.get("lateral", "l_r", params_default.l_r),
            m=r.get("lateral", "m", params_default.m),
            i_z=r.get("lateral", "i_z", params_default.i_z),
            v_x=r.get("lateral", "v_x", params_default.v_x),
            m_z=r.get("lateral", "m_z", params_default.m_z),
        ),
        gains=PdGains(
            k_p=r.get("lateral", "k_p", lat_defaults.k_p),
            k_d=r.get("lateral", "k_d", lat_defaults.k_d),
            k_inner=r.get("lateral", "k_inner", lat_defaults.k_inner),
        ),
        dt=r.get("lateral", "dt", base.dt),
        horizon=r.get("lateral", "horizon", base.horizon),
        steering_limit=r.get("lateral", "steering_limit", base.steering_limit),
        seed=r.get("scenario", "seed", base.seed),
    )


@dataclass
class CharacterizeConfig:
    ranges: list[float] = field(default_factory=lambda: [5.0, 10.0, 15.0, 20.0, 25.0])
    dwell: float = 5.0  # s per range
    rate: float = 100.0  # Hz
    model: DetectionNoiseModel = field(default_factory=DetectionNoiseModel)


def build_characterize(
    source: ConfigSource, overrides: Optional[dict] = None
) -> CharacterizeConfig:
    r = Resolver(source, overrides)
    base = CharacterizeConfig()
    ranges_raw = r.get("characterize", "ranges", None)
    if ranges_raw is None:
        ranges = base.ranges
    elif isinstance(ranges_raw, list):
        ranges = [float(v) for v in ranges_raw]
    else:
        try:
            ranges = [float(v) for v in str(ranges_raw).split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigurationError(f"cannot parse ranges list: {ranges_raw!r}") from exc
    seed = r.get("scenario", "seed", 0)
    return CharacterizeConfig(
        ranges=ranges,
        dwell=r.get("characterize", "dwell", base.dwell),
        rate=r.get("characterize", "rate", base.rate),
        model=build_noise_model(r, seed),
    )
