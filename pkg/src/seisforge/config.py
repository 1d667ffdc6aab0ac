"""Flat key = value configuration for the batch pipeline.

One ``key = value`` per line, ``#`` starts a comment, blank lines ignored.
Every key has a default, so an empty file is a valid (small demo) config;
unknown keys are errors.  See DEFAULT_CONFIG_TEXT for the full key set.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .velmodel import Grid2D, LayerConfig, SaltConfig
from .wavesim import RickerSource, SpongeBoundary


class ConfigError(ValueError):
    """Bad pipeline configuration (unknown key, bad value, broken invariant)."""


@dataclass(frozen=True)
class AcquisitionPlan:
    """Shot/receiver geometry shared by every model in the batch.

    ``dt = 0`` means: use 0.9x the CFL limit of each model.  Source x
    positions are evenly spaced across [src_x0, src_x1] (midpoint for a
    single shot).
    """

    dt: float = 0.0
    nt: int = 700
    n_receivers: int = 64
    rcv_x0: float = 150.0
    rcv_x1: float = 1860.0
    rcv_z: float = 40.0
    src_x0: float = 400.0
    src_x1: float = 1600.0
    src_z: float = 40.0

    def source_xs(self, n_shots: int) -> list[float]:
        if n_shots == 1:
            return [(self.src_x0 + self.src_x1) / 2.0]
        span = self.src_x1 - self.src_x0
        return [self.src_x0 + s * span / (n_shots - 1) for s in range(n_shots)]

    def receiver_xs(self) -> tuple[float, ...]:
        n = self.n_receivers
        if n == 1:
            return ((self.rcv_x0 + self.rcv_x1) / 2.0,)
        span = self.rcv_x1 - self.rcv_x0
        return tuple(self.rcv_x0 + r * span / (n - 1) for r in range(n))


@dataclass(frozen=True)
class PipelineConfig:
    grid: Grid2D = field(default_factory=lambda: Grid2D(201, 201, 10.0, 10.0))
    layers: LayerConfig = field(default_factory=LayerConfig)
    salt: SaltConfig = field(default_factory=SaltConfig)
    source: RickerSource = field(default_factory=lambda: RickerSource(f0=10.0))
    sponge: SpongeBoundary = field(default_factory=SpongeBoundary)
    acquisition: AcquisitionPlan = field(default_factory=AcquisitionPlan)
    spatial_order: int = 4
    rtm_smooth_radius: int = 8
    rtm_save_stride: int = 1
    master_seed: int = 2024
    n_models: int = 1
    shots_per_model: int = 1
    output_dir: str = "dataset"

    def __post_init__(self):
        if self.n_models < 1:
            raise ConfigError("n_models must be >= 1")
        if self.shots_per_model < 1:
            raise ConfigError("shots_per_model must be >= 1")
        if self.spatial_order not in (2, 4):
            raise ConfigError("sim.spatial_order must be 2 or 4")
        if self.rtm_smooth_radius < 0:
            raise ConfigError("rtm.smooth_radius must be >= 0")
        if self.rtm_save_stride < 1:
            raise ConfigError("rtm.save_stride must be >= 1")


# key -> (section object name, attribute path, type)
_KEYS = {
    "grid.nx": ("grid", "nx", int),
    "grid.nz": ("grid", "nz", int),
    "grid.dx": ("grid", "dx", float),
    "grid.dz": ("grid", "dz", float),
    "layers.n_min": ("layers", "n_layers_range.0", int),
    "layers.n_max": ("layers", "n_layers_range.1", int),
    "layers.v_top_min": ("layers", "v_top_range.0", float),
    "layers.v_top_max": ("layers", "v_top_range.1", float),
    "layers.v_inc_min": ("layers", "v_increment_range.0", float),
    "layers.v_inc_max": ("layers", "v_increment_range.1", float),
    "layers.wobble_amp": ("layers", "interface_wobble_amp", float),
    "salt.hulls_min": ("salt", "n_hulls_range.0", int),
    "salt.hulls_max": ("salt", "n_hulls_range.1", int),
    "salt.points_min": ("salt", "points_per_hull_range.0", int),
    "salt.points_max": ("salt", "points_per_hull_range.1", int),
    "salt.v_min": ("salt", "v_salt_range.0", float),
    "salt.v_max": ("salt", "v_salt_range.1", float),
    "salt.box_x0": ("salt", "placement_box.0", float),
    "salt.box_z0": ("salt", "placement_box.1", float),
    "salt.box_x1": ("salt", "placement_box.2", float),
    "salt.box_z1": ("salt", "placement_box.3", float),
    "source.f0": ("source", "f0", float),
    "source.t0": ("source", "t0", float),
    "source.amplitude": ("source", "amplitude", float),
    "sponge.width": ("sponge", "width", int),
    "sponge.strength": ("sponge", "strength", float),
    "sponge.free_surface": ("sponge", "free_surface", bool),
    "acq.dt": ("acquisition", "dt", float),
    "acq.nt": ("acquisition", "nt", int),
    "acq.n_receivers": ("acquisition", "n_receivers", int),
    "acq.rcv_x0": ("acquisition", "rcv_x0", float),
    "acq.rcv_x1": ("acquisition", "rcv_x1", float),
    "acq.rcv_z": ("acquisition", "rcv_z", float),
    "acq.src_x0": ("acquisition", "src_x0", float),
    "acq.src_x1": ("acquisition", "src_x1", float),
    "acq.src_z": ("acquisition", "src_z", float),
    "sim.spatial_order": ("", "spatial_order", int),
    "rtm.smooth_radius": ("", "rtm_smooth_radius", int),
    "rtm.save_stride": ("", "rtm_save_stride", int),
    "master_seed": ("", "master_seed", int),
    "n_models": ("", "n_models", int),
    "shots_per_model": ("", "shots_per_model", int),
    "output_dir": ("", "output_dir", str),
}

_SECTIONS = {
    "grid": Grid2D,
    "layers": LayerConfig,
    "salt": SaltConfig,
    "source": RickerSource,
    "sponge": SpongeBoundary,
    "acquisition": AcquisitionPlan,
}


def _parse_value(text: str, typ, key: str):
    try:
        if typ is bool:
            lowered = text.lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(text)
        return typ(text)
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {text!r} as {typ.__name__}") from None


def parse_config(text: str) -> PipelineConfig:
    """Build a PipelineConfig from key = value text; unknown keys are errors."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    # Collect overrides per section, with tuple fields assembled element-wise.
    section_over: dict[str, dict] = {name: {} for name in _SECTIONS}
    top_over: dict = {}
    for key, value in raw.items():
        section, attr, typ = _KEYS[key]
        parsed = _parse_value(value, typ, key)
        if not section:
            top_over[attr] = parsed
        elif "." in attr:
            name, idx = attr.split(".")
            section_over[section].setdefault(name, {})[int(idx)] = parsed
        else:
            section_over[section][attr] = parsed

    kwargs = {}
    try:
        for name, cls in _SECTIONS.items():
            overrides = section_over[name]
            base = {f.name: getattr(_DEFAULTS, name).__getattribute__(f.name)
                    for f in fields(cls)}
            for attr, val in overrides.items():
                if isinstance(val, dict):
                    current = list(base[attr])
                    for idx, v in val.items():
                        current[idx] = v
                    base[attr] = tuple(current)
                else:
                    base[attr] = val
            kwargs[name] = cls(**base)
        return PipelineConfig(**kwargs, **top_over)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


_DEFAULTS = PipelineConfig()

DEFAULT_CONFIG_TEXT = """\
# seisforge pipeline configuration (defaults shown)

grid.nx = 201
grid.nz = 201
grid.dx = 10.0
grid.dz = 10.0

layers.n_min = 4
layers.n_max = 8
layers.v_top_min = 1500.0
layers.v_top_max = 2000.0
layers.v_inc_min = 80.0
layers.v_inc_max = 220.0
layers.wobble_amp = 40.0

salt.hulls_min = 2
salt.hulls_max = 5
salt.points_min = 5
salt.points_max = 12
salt.v_min = 4300.0
salt.v_max = 4700.0
salt.box_x0 = 300.0
salt.box_z0 = 500.0
salt.box_x1 = 1700.0
salt.box_z1 = 1400.0

source.f0 = 10.0
source.t0 = 0.12
source.amplitude = 1.0

sponge.width = 30
sponge.strength = 0.009
sponge.free_surface = false

acq.dt = 0.0            # 0 = 0.9x the CFL limit per model
acq.nt = 700
acq.n_receivers = 64
acq.rcv_x0 = 150.0
acq.rcv_x1 = 1860.0
acq.rcv_z = 40.0
acq.src_x0 = 400.0
acq.src_x1 = 1600.0
acq.src_z = 40.0

sim.spatial_order = 4
rtm.smooth_radius = 8
rtm.save_stride = 1

master_seed = 2024
n_models = 1
shots_per_model = 1
output_dir = dataset
"""
