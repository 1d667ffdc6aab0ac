"""2D acoustic finite-difference forward modeling.

Explicit scheme, second order in time, selectable 2nd/4th order in space, on
the cell-centered grid of :mod:`seisforge.velmodel` (field sample (j, i) lives
at ((i+0.5)dx, (j+0.5)dz)).  Absorbing boundaries are a Cerjan-style sponge:
the computational domain is padded by ``width`` cells on each absorbing side
and the updated field is multiplied per cell by exp(-(strength * depth)^2),
where depth counts cells into the band.  Shot gathers are recorded by
bilinear interpolation at the receiver coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .velmodel import Grid2D, VelocityModel

# Stability: dt_max = c * min(dx, dz) / v_max with c = sqrt(2 / S), where S is
# the largest per-axis magnitude of the discrete Laplacian symbol: 4 for the
# 2nd-order stencil, 16/3 for the 4th-order stencil (both attained at Nyquist).
_CFL_COEFF = {2: math.sqrt(2.0 / 4.0), 4: math.sqrt(2.0 / (16.0 / 3.0))}


class StabilityError(RuntimeError):
    """Time step violates the CFL bound; raised before any stepping."""


class DivergenceError(RuntimeError):
    """Field amplitude blew up mid-run."""

    def __init__(self, step: int, value: float):
        super().__init__(f"wavefield diverged at step {step}: max |u| = {value:.3e}")
        self.step = step
        self.value = value


@dataclass(frozen=True)
class RickerSource:
    """Ricker wavelet: amplitude * (1 - 2 pi^2 f0^2 (t-t0)^2) exp(-pi^2 f0^2 (t-t0)^2)."""

    f0: float
    t0: float | None = None
    amplitude: float = 1.0

    def __post_init__(self):
        if self.f0 <= 0:
            raise ValueError("f0 must be positive")
        if self.t0 is None:
            object.__setattr__(self, "t0", 1.2 / self.f0)
        if self.t0 * self.f0 < 1.0:
            raise ValueError("t0 must be at least 1/f0 so the wavelet is causal")


@dataclass(frozen=True)
class SpongeBoundary:
    """Absorbing band: width in cells, per-cell decay strength in [0, 1).

    With ``free_surface`` the top edge is left unpadded and untapered; the
    zero ring of the scheme then acts as a pressure-free surface.
    """

    width: int = 30
    strength: float = 0.009
    free_surface: bool = False

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("sponge width must be >= 0")
        if not (0.0 <= self.strength < 1.0):
            raise ValueError("sponge strength must be in [0, 1)")


@dataclass(frozen=True)
class Acquisition:
    """One shot: source position, receiver line at fixed depth, time sampling."""

    source_pos: tuple[float, float]
    receiver_xs: tuple[float, ...]
    receiver_z: float
    dt: float
    nt: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.nt < 2:
            raise ValueError("nt must be >= 2")
        if len(self.receiver_xs) == 0:
            raise ValueError("need at least one receiver")
        object.__setattr__(self, "receiver_xs", tuple(float(x) for x in self.receiver_xs))


@dataclass(frozen=True, eq=False)
class ShotGather:
    """Recorded pressure, nt x n_receivers; peak_amplitude tracks max |u| seen."""

    data: np.ndarray
    dt: float
    receiver_xs: tuple[float, ...]
    peak_amplitude: float = 0.0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != len(self.receiver_xs):
            raise ValueError("gather shape does not match receiver count")
        if not np.all(np.isfinite(data)):
            raise ValueError("gather contains non-finite samples")
        object.__setattr__(self, "data", data)


@dataclass(frozen=True, eq=False)
class WavefieldHistory:
    """Interior wavefield snapshots taken every save_stride steps."""

    snapshots: np.ndarray
    save_stride: int


def ricker(src: RickerSource, t) -> np.ndarray | float:
    """Evaluate the wavelet at time(s) t (seconds)."""
    tau = np.asarray(t, dtype=np.float64) - src.t0
    arg = (math.pi * src.f0) ** 2 * tau * tau
    out = src.amplitude * (1.0 - 2.0 * arg) * np.exp(-arg)
    return out if out.ndim else float(out)


def cfl_max_dt(model: VelocityModel, spatial_order: int = 4) -> float:
    """Largest stable time step for the explicit scheme on this model."""
    if spatial_order not in _CFL_COEFF:
        raise ValueError("spatial_order must be 2 or 4")
    h = min(model.grid.dx, model.grid.dz)
    return _CFL_COEFF[spatial_order] * h / float(model.vp.max())


def _laplacian(u: np.ndarray, dx: float, dz: float, order: int) -> np.ndarray:
    """Interior Laplacian; a ring of stencil-radius cells stays zero (Dirichlet)."""
    out = np.zeros_like(u)
    if order == 2:
        out[1:-1, 1:-1] = (
            (u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / (dx * dx)
            + (u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / (dz * dz)
        )
    elif order == 4:
        c0, c1, c2 = -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0
        mid = u[2:-2, 2:-2]
        out[2:-2, 2:-2] = (
            (c0 * mid + c1 * (u[2:-2, 3:-1] + u[2:-2, 1:-3])
             + c2 * (u[2:-2, 4:] + u[2:-2, :-4])) / (dx * dx)
            + (c0 * mid + c1 * (u[3:-1, 2:-2] + u[1:-3, 2:-2])
               + c2 * (u[4:, 2:-2] + u[:-4, 2:-2])) / (dz * dz)
        )
    else:
        raise ValueError("spatial_order must be 2 or 4")
    return out


@lru_cache(maxsize=32)
def _taper(nz: int, nx: int, width: int, strength: float, free_surface: bool) -> np.ndarray:
    """Per-cell sponge factor exp(-(strength * depth)^2); 1 outside the band."""
    if width == 0 or strength == 0.0:
        return np.ones((nz, nx))
    jj = np.arange(nz)[:, None]
    ii = np.arange(nx)[None, :]
    dist_x = np.minimum(ii, nx - 1 - ii)
    dist_top = jj if not free_surface else np.full_like(jj, width)
    dist = np.minimum(dist_x, np.minimum(dist_top, nz - 1 - jj))
    depth = np.maximum(width - dist, 0)
    return np.exp(-((strength * depth) ** 2))


def step_field(
    u_prev: np.ndarray,
    u_curr: np.ndarray,
    model: VelocityModel,
    dt: float,
    sponge: SpongeBoundary,
    source: np.ndarray | None = None,
    spatial_order: int = 4,
) -> np.ndarray:
    """One leapfrog update with a full-grid source density field.

    u_next = taper * (2 u_curr - taper * u_prev + (vp dt)^2 lap(u_curr)
                      + dt^2 source),

    i.e. both stored time levels end up attenuated once per step spent in the
    band (the classic two-field application; a taper on the new level alone
    leaves u_prev lagging the decay and re-radiates from the band).  The
    stencil-radius boundary ring is pinned to zero (Dirichlet); keeping the
    ring exactly zero makes the interior update operator symmetric, which
    back-propagation relies on for adjointness.
    """
    g = _taper(model.grid.nz, model.grid.nx, sponge.width, sponge.strength,
               sponge.free_surface)
    lap = _laplacian(u_curr, model.grid.dx, model.grid.dz, spatial_order)
    u_next = 2.0 * u_curr - g * u_prev + (model.vp * dt) ** 2 * lap
    if source is not None:
        u_next = u_next + dt * dt * source
    u_next *= g
    r = 1 if spatial_order == 2 else 2
    u_next[:r, :] = 0.0
    u_next[-r:, :] = 0.0
    u_next[:, :r] = 0.0
    u_next[:, -r:] = 0.0
    return u_next


def step(
    u_prev: np.ndarray,
    u_curr: np.ndarray,
    model: VelocityModel,
    dt: float,
    sponge: SpongeBoundary,
    src_value: float = 0.0,
    src_cell: tuple[int, int] | None = None,
    spatial_order: int = 4,
) -> np.ndarray:
    """One leapfrog update with a point source at grid cell (j, i)."""
    source = None
    if src_cell is not None and src_value != 0.0:
        source = np.zeros_like(u_curr)
        source[src_cell] = src_value / (model.grid.dx * model.grid.dz)
    return step_field(u_prev, u_curr, model, dt, sponge, source, spatial_order)


def _pad_model(model: VelocityModel, sponge: SpongeBoundary):
    """Extend the model by the sponge width (edge-replicated velocities)."""
    w = sponge.width
    top = 0 if sponge.free_surface else w
    if w == 0:
        return model, 0, 0
    vp = np.pad(model.vp, ((top, w), (w, w)), mode="edge")
    grid = Grid2D(model.grid.nx + 2 * w, model.grid.nz + top + w,
                  model.grid.dx, model.grid.dz)
    return VelocityModel(grid, vp), w, top


def _frac_index(x: float, h: float) -> float:
    """Fractional cell index of coordinate x for cell-centered samples."""
    return x / h - 0.5


def _check_interior(grid: Grid2D, x: float, z: float, what: str):
    if not (2 * grid.dx <= x <= grid.width - 2 * grid.dx):
        raise ValueError(f"{what} x={x:g} not >= 2 cells inside the grid")
    if not (2 * grid.dz <= z <= grid.depth - 2 * grid.dz):
        raise ValueError(f"{what} z={z:g} not >= 2 cells inside the grid")


def receiver_weights(grid: Grid2D, xs, z: float, ox: int = 0, oz: int = 0):
    """Bilinear sampling indices/weights for receivers at (xs, z).

    ox/oz shift indices into a padded field.  Returns (rows, cols, weights)
    arrays of shape (4, n_receivers) such that the sample is
    sum_k weights[k] * u[rows[k], cols[k]].
    """
    xs = np.asarray(xs, dtype=np.float64)
    fi = xs / grid.dx - 0.5 + ox
    fj = np.full_like(fi, z / grid.dz - 0.5 + oz)
    i0 = np.floor(fi).astype(int)
    j0 = np.floor(fj).astype(int)
    wi = fi - i0
    wj = fj - j0
    rows = np.stack([j0, j0, j0 + 1, j0 + 1])
    cols = np.stack([i0, i0 + 1, i0, i0 + 1])
    weights = np.stack([(1 - wj) * (1 - wi), (1 - wj) * wi, wj * (1 - wi), wj * wi])
    return rows, cols, weights


def forward_model(
    model: VelocityModel,
    acq: Acquisition,
    src: RickerSource,
    sponge: SpongeBoundary,
    save_wavefield: bool = False,
    save_stride: int = 1,
    spatial_order: int = 4,
    divergence_threshold: float = 1e9,
    check_interval: int = 100,
    enforce_cfl: bool = True,
) -> tuple[ShotGather, WavefieldHistory | None]:
    """Propagate a shot and record the gather (and optionally the wavefield).

    Raises StabilityError if acq.dt exceeds the CFL bound (skippable with
    enforce_cfl=False, e.g. to demonstrate the runtime guard), and
    DivergenceError (naming the step) if max |u| passes divergence_threshold
    or goes non-finite at one of the periodic checks.
    """
    dt_max = cfl_max_dt(model, spatial_order)
    if enforce_cfl and acq.dt > dt_max:
        raise StabilityError(f"dt {acq.dt:g} exceeds CFL limit {dt_max:g}")
    sx, sz = acq.source_pos
    _check_interior(model.grid, sx, sz, "source")
    for x in acq.receiver_xs:
        _check_interior(model.grid, x, acq.receiver_z, "receiver")

    padded, ox, oz = _pad_model(model, sponge)
    si = round(_frac_index(sx, model.grid.dx)) + ox
    sj = round(_frac_index(sz, model.grid.dz)) + oz
    rows, cols, weights = receiver_weights(model.grid, acq.receiver_xs,
                                           acq.receiver_z, ox, oz)

    nt = acq.nt
    gather = np.empty((nt, len(acq.receiver_xs)))
    history = None
    if save_wavefield:
        n_saved = -(-nt // save_stride)
        history = np.empty((n_saved, model.grid.nz, model.grid.nx))
    nz, nx = model.grid.nz, model.grid.nx

    u_prev = np.zeros((padded.grid.nz, padded.grid.nx))
    u_curr = np.zeros_like(u_prev)
    peak = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(nt):
            value = ricker(src, n * acq.dt)
            u_next = step(u_prev, u_curr, padded, acq.dt, sponge,
                          value, (sj, si), spatial_order)
            gather[n] = (weights * u_next[rows, cols]).sum(axis=0)
            if save_wavefield and n % save_stride == 0:
                history[n // save_stride] = u_next[oz:oz + nz, ox:ox + nx]
            peak = max(peak, float(np.abs(u_next).max()))
            if (n % check_interval == check_interval - 1 or n == nt - 1) and (
                not math.isfinite(peak) or peak > divergence_threshold
            ):
                raise DivergenceError(n, peak)
            u_prev, u_curr = u_curr, u_next

    shot = ShotGather(gather, acq.dt, acq.receiver_xs, peak_amplitude=peak)
    return shot, (WavefieldHistory(history, save_stride) if save_wavefield else None)
