"""Random layered velocity models with salt bodies made of convex hull unions.

Generation is a pure function of (grid, config, seed).  Layer interfaces are
horizontal planes at equal depth partitions, perturbed by a three-harmonic
sinusoid whose amplitudes and phases are drawn from the seeded stream; layer
velocities increase with depth by cumulative non-negative increments.  Salt
is rasterized from convex hulls of points sampled inside a placement box and
painted over the background at a single sampled salt velocity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .rng import Stream, mix

# Global sanity bounds for any generated P-wave velocity, m/s.
VP_MIN = 1400.0
VP_MAX = 6000.0

# Salt must be fast rock; insert_salt refuses values outside this band.
SALT_VP_MIN = 3500.0
SALT_VP_MAX = 6000.0


class DegenerateHullError(ValueError):
    """Raised when a point set has no 2D convex hull (collinear or < 3 points)."""


@dataclass(frozen=True)
class Grid2D:
    """Regular 2D grid: nx columns, nz rows, cell sizes in meters."""

    nx: int
    nz: int
    dx: float
    dz: float

    def __post_init__(self):
        if self.nx < 16 or self.nz < 16:
            raise ValueError(f"grid must be at least 16x16, got {self.nx}x{self.nz}")
        if not (math.isfinite(self.dx) and math.isfinite(self.dz)):
            raise ValueError("grid spacing must be finite")
        if self.dx <= 0 or self.dz <= 0:
            raise ValueError("grid spacing must be positive")

    @property
    def width(self) -> float:
        return self.nx * self.dx

    @property
    def depth(self) -> float:
        return self.nz * self.dz

    def cell_centers_x(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def cell_centers_z(self) -> np.ndarray:
        return (np.arange(self.nz) + 0.5) * self.dz


@dataclass(frozen=True, eq=False)
class VelocityModel:
    """P-wave velocity field (nz x nx, m/s) on a grid."""

    grid: Grid2D
    vp: np.ndarray

    def __post_init__(self):
        vp = np.asarray(self.vp, dtype=np.float64)
        if vp.shape != (self.grid.nz, self.grid.nx):
            raise ValueError(
                f"vp shape {vp.shape} does not match grid ({self.grid.nz}, {self.grid.nx})"
            )
        if not np.all(np.isfinite(vp)):
            raise ValueError("vp contains non-finite values")
        if vp.min() < VP_MIN or vp.max() > VP_MAX:
            raise ValueError(
                f"vp range [{vp.min():g}, {vp.max():g}] outside [{VP_MIN:g}, {VP_MAX:g}]"
            )
        object.__setattr__(self, "vp", vp)


@dataclass(frozen=True)
class LayerConfig:
    """Controls the layered sediment background.

    ``interface_wobble_amp`` is the maximum vertical excursion (meters) of any
    interface from its flat position.  The velocity ceiling is enforced at
    construction so any generated field stays inside [VP_MIN, VP_MAX].
    """

    n_layers_range: tuple[int, int] = (4, 8)
    v_top_range: tuple[float, float] = (1500.0, 2000.0)
    v_increment_range: tuple[float, float] = (80.0, 220.0)
    interface_wobble_amp: float = 40.0
    seed: int = 0

    def __post_init__(self):
        _check_int_range("n_layers_range", self.n_layers_range, lo_min=1)
        _check_float_range("v_top_range", self.v_top_range)
        _check_float_range("v_increment_range", self.v_increment_range)
        if self.v_top_range[0] < VP_MIN:
            raise ValueError(f"v_top_range minimum must be >= {VP_MIN:g} m/s")
        if self.v_increment_range[0] < 0:
            raise ValueError("v_increment_range must be non-negative")
        if self.interface_wobble_amp < 0:
            raise ValueError("interface_wobble_amp must be >= 0")
        if self.max_velocity() > VP_MAX:
            raise ValueError(
                f"config can reach {self.max_velocity():g} m/s, above the {VP_MAX:g} cap"
            )

    def max_velocity(self) -> float:
        """Largest sediment velocity this config can produce."""
        n_max = self.n_layers_range[1]
        return self.v_top_range[1] + (n_max - 1) * self.v_increment_range[1]


@dataclass(frozen=True)
class SaltConfig:
    """Controls salt-body sampling.

    ``placement_box`` is (x_min, z_min, x_max, z_max) in meters; all hull
    points are drawn inside it, so the salt mask cannot escape the box.
    """

    n_hulls_range: tuple[int, int] = (2, 5)
    points_per_hull_range: tuple[int, int] = (5, 12)
    v_salt_range: tuple[float, float] = (4300.0, 4700.0)
    placement_box: tuple[float, float, float, float] = (300.0, 500.0, 1700.0, 1400.0)

    def __post_init__(self):
        _check_int_range("n_hulls_range", self.n_hulls_range, lo_min=0)
        _check_int_range("points_per_hull_range", self.points_per_hull_range, lo_min=3)
        _check_float_range("v_salt_range", self.v_salt_range)
        if self.v_salt_range[0] < SALT_VP_MIN or self.v_salt_range[1] > SALT_VP_MAX:
            raise ValueError(
                f"v_salt_range must lie within [{SALT_VP_MIN:g}, {SALT_VP_MAX:g}] m/s"
            )
        x0, z0, x1, z1 = self.placement_box
        if not (x0 < x1 and z0 < z1):
            raise ValueError("placement_box must have positive extent")
        if x0 < 0 or z0 < 0:
            raise ValueError("placement_box must not extend past the grid origin")


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon; vertices counter-clockwise in (x, z) meters."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        v = self.vertices
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        n = len(v)
        for k in range(n):
            ax, az = v[k]
            bx, bz = v[(k + 1) % n]
            cx, cz = v[(k + 2) % n]
            cross = (bx - ax) * (cz - az) - (bz - az) * (cx - ax)
            if cross <= 0:
                raise ValueError("vertices must be strictly convex and counter-clockwise")

    def contains(self, x: float, z: float) -> bool:
        """Half-plane test; points on an edge count as inside."""
        v = self.vertices
        n = len(v)
        for k in range(n):
            ax, az = v[k]
            bx, bz = v[(k + 1) % n]
            if (bx - ax) * (z - az) - (bz - az) * (x - ax) < 0.0:
                return False
        return True


def _check_int_range(name, r, lo_min):
    lo, hi = r
    if lo > hi:
        raise ValueError(f"{name} is empty: [{lo}, {hi}]")
    if lo < lo_min:
        raise ValueError(f"{name} minimum must be >= {lo_min}")


def _check_float_range(name, r):
    lo, hi = r
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"{name} must be finite")
    if lo > hi:
        raise ValueError(f"{name} is empty: [{lo}, {hi}]")


def generate_background(grid: Grid2D, cfg: LayerConfig) -> VelocityModel:
    """Layered sediment model: piecewise-constant velocity over wobbled interfaces.

    Interfaces sit at depths k * nz/n_layers * dz (k = 1..n_layers-1) plus a
    seeded three-harmonic sinusoid bounded by ``interface_wobble_amp``.  A cell
    belongs to layer k when its center lies below k interfaces, so the field is
    non-decreasing with depth in every column.  Draw order (layer count, top
    velocity, increments, per-interface wobble) is fixed; identical (grid, cfg)
    give bit-identical output.
    """
    rng = Stream(cfg.seed)
    n_layers = rng.randint(*cfg.n_layers_range)
    if n_layers > grid.nz:
        raise ValueError(f"{n_layers} layers cannot fit in {grid.nz} rows")

    v = np.empty(n_layers)
    v[0] = rng.uniform(*cfg.v_top_range)
    for k in range(1, n_layers):
        v[k] = v[k - 1] + rng.uniform(*cfg.v_increment_range)

    xc = grid.cell_centers_x()
    zc = grid.cell_centers_z()
    interfaces = np.empty((n_layers - 1, grid.nx))
    for k in range(n_layers - 1):
        flat = (k + 1) * grid.nz / n_layers * grid.dz
        wobble = np.zeros(grid.nx)
        for h in (1, 2, 3):
            amp = rng.uniform(0.0, cfg.interface_wobble_amp / 3.0)
            phase = rng.uniform(0.0, 2.0 * math.pi)
            wobble += amp * np.sin(2.0 * math.pi * h * xc / grid.width + phase)
        interfaces[k] = flat + wobble

    # Layer index of each cell = number of interfaces above its center.
    layer = (zc[:, None] >= interfaces[:, None, :]).sum(axis=0)
    return VelocityModel(grid, v[layer])


def convex_hull(points) -> ConvexPolygon:
    """Convex hull by monotone chain; collinear points are dropped.

    Returns vertices counter-clockwise, a subset of the input points.
    """
    pts = sorted(set((float(x), float(z)) for x, z in points))
    if len(pts) < 3:
        raise DegenerateHullError("need at least 3 distinct points")

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) > 1 and cross(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateHullError("points are collinear")
    return ConvexPolygon(tuple(hull))


def rasterize_union(polygons, grid: Grid2D) -> np.ndarray:
    """Boolean nz x nx mask: cell center inside at least one polygon.

    The center of cell (i, j) is ((i+0.5)dx, (j+0.5)dz); edge points count
    as inside.
    """
    mask = np.zeros((grid.nz, grid.nx), dtype=bool)
    if not polygons:
        return mask
    xc = grid.cell_centers_x()[None, :]
    zc = grid.cell_centers_z()[:, None]
    for poly in polygons:
        v = poly.vertices
        inside = np.ones((grid.nz, grid.nx), dtype=bool)
        for k in range(len(v)):
            ax, az = v[k]
            bx, bz = v[(k + 1) % len(v)]
            inside &= (bx - ax) * (zc - az) - (bz - az) * (xc - ax) >= 0.0
        mask |= inside
    return mask


def insert_salt(model: VelocityModel, mask: np.ndarray, v_salt: float) -> VelocityModel:
    """Paint v_salt wherever the mask is true; other cells untouched."""
    if mask.shape != model.vp.shape:
        raise ValueError(f"mask shape {mask.shape} does not match model {model.vp.shape}")
    if not (SALT_VP_MIN <= v_salt <= SALT_VP_MAX):
        raise ValueError(
            f"v_salt {v_salt:g} outside sanity bounds [{SALT_VP_MIN:g}, {SALT_VP_MAX:g}]"
        )
    return VelocityModel(model.grid, np.where(mask, v_salt, model.vp))


def sample_salt_hulls(grid: Grid2D, cfg: SaltConfig, seed: int):
    """Draw (polygons, v_salt) for one model from the seeded stream.

    Draw order: hull count, salt velocity, then per hull the point count and
    point coordinates (x, z interleaved).  A degenerate point set is redrawn,
    consuming further draws; with continuous coordinates this is a null event.
    """
    x0, z0, x1, z1 = cfg.placement_box
    if x1 > grid.width or z1 > grid.depth:
        raise ValueError("placement_box extends past the grid extent")
    rng = Stream(seed)
    n_hulls = rng.randint(*cfg.n_hulls_range)
    v_salt = rng.uniform(*cfg.v_salt_range)
    polygons = []
    for _ in range(n_hulls):
        n_pts = rng.randint(*cfg.points_per_hull_range)
        for _attempt in range(10):
            pts = [(rng.uniform(x0, x1), rng.uniform(z0, z1)) for _ in range(n_pts)]
            try:
                polygons.append(convex_hull(pts))
                break
            except DegenerateHullError:
                continue
        else:
            raise DegenerateHullError("could not sample a non-degenerate hull")
    return polygons, v_salt


def generate_model(
    grid: Grid2D, layers: LayerConfig, salt: SaltConfig, seed: int
) -> VelocityModel:
    """Full velocity model: background layers, then rasterized salt union.

    The layer config's own seed is replaced by mix(seed, 0) and the salt
    stream uses mix(seed, 1), so one model seed controls the whole draw.
    """
    if salt.v_salt_range[0] <= layers.max_velocity():
        raise ValueError(
            f"salt velocity floor {salt.v_salt_range[0]:g} must exceed the "
            f"largest sediment velocity {layers.max_velocity():g}"
        )
    background = generate_background(grid, replace(layers, seed=mix(seed, 0)))
    polygons, v_salt = sample_salt_hulls(grid, salt, mix(seed, 1))
    if not polygons:
        return background
    return insert_salt(background, rasterize_union(polygons, grid), v_salt)
