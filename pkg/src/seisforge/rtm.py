"""Reverse-time migration with a zero-lag cross-correlation imaging condition.

Per shot: the source is forward-propagated through a smoothed migration model
while storing snapshots; receiver traces are then injected in reversed time
order (bilinear-spread at the receiver positions, the transpose of the
recording interpolation) and propagated with the same scheme; the image is
the per-cell sum over matched time steps of the two wavefields.  With the
sponge disabled on a homogeneous model the backward pass is the exact adjoint
of gridded-source forward modeling, which the dot-product test exploits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .velmodel import Grid2D, VelocityModel
from .wavesim import (
    Acquisition,
    RickerSource,
    SpongeBoundary,
    _pad_model,
    cfl_max_dt,
    StabilityError,
    forward_model,
    receiver_weights,
    ricker,
    step_field,
)


@dataclass(frozen=True, eq=False)
class MigrationModel:
    """Smoothed velocity used for migration (same bounds as VelocityModel)."""

    grid: Grid2D
    vp_smooth: np.ndarray

    def as_velocity_model(self) -> VelocityModel:
        return VelocityModel(self.grid, self.vp_smooth)


@dataclass(frozen=True, eq=False)
class RtmImage:
    """Reflectivity proxy on the model grid (dimensionless)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.grid.nz, self.grid.nx):
            raise ValueError(
                f"image shape {values.shape} does not match grid "
                f"({self.grid.nz}, {self.grid.nx})"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("image contains non-finite values")
        object.__setattr__(self, "values", values)


def smooth_model(model: VelocityModel, radius_cells: int) -> MigrationModel:
    """Gaussian blur with sigma = radius/2 and reflecting boundaries; 0 = identity."""
    if radius_cells < 0:
        raise ValueError("radius must be >= 0")
    if radius_cells == 0:
        return MigrationModel(model.grid, model.vp.copy())
    smoothed = ndimage.gaussian_filter(model.vp, sigma=radius_cells / 2.0, mode="reflect")
    return MigrationModel(model.grid, smoothed)


def _backward_fields(model, data, acq, sponge, spatial_order):
    """Yield (step, interior field) while back-propagating receiver traces.

    Steps run nt-1 down to 0; at step n the yielded field has absorbed the
    trace samples data[n:].  Injection is the transpose of the bilinear
    recording operator, so sample n enters the field exactly as +R^T data[n].
    """
    padded, ox, oz = _pad_model(model, sponge)
    rows, cols, weights = receiver_weights(model.grid, acq.receiver_xs,
                                           acq.receiver_z, ox, oz)
    nz, nx = model.grid.nz, model.grid.nx
    dt2 = acq.dt * acq.dt
    u_nn = np.zeros((padded.grid.nz, padded.grid.nx))
    u_n1 = np.zeros_like(u_nn)
    for n in range(acq.nt - 1, -1, -1):
        source = np.zeros_like(u_nn)
        np.add.at(source, (rows, cols), weights * data[n] / dt2)
        u = step_field(u_nn, u_n1, padded, acq.dt, sponge, source, spatial_order)
        yield n, u[oz:oz + nz, ox:ox + nx]
        u_nn, u_n1 = u_n1, u


def rtm_shot(
    mig: MigrationModel,
    gather,
    acq: Acquisition,
    src: RickerSource,
    sponge: SpongeBoundary,
    spatial_order: int = 4,
    save_stride: int = 1,
) -> RtmImage:
    """Migrate one shot: image = sum over matched steps of u_src * u_rcv."""
    data = np.asarray(gather.data if hasattr(gather, "data") else gather)
    if data.shape != (acq.nt, len(acq.receiver_xs)):
        raise ValueError(
            f"gather shape {data.shape} does not match acquisition "
            f"({acq.nt}, {len(acq.receiver_xs)})"
        )
    vel = mig.as_velocity_model()
    if acq.dt > cfl_max_dt(vel, spatial_order):
        raise StabilityError("dt exceeds the CFL limit on the migration model")

    _, history = forward_model(vel, acq, src, sponge, save_wavefield=True,
                               save_stride=save_stride, spatial_order=spatial_order)
    image = np.zeros((mig.grid.nz, mig.grid.nx))
    for n, u_r in _backward_fields(vel, data, acq, sponge, spatial_order):
        if n % save_stride == 0:
            image += history.snapshots[n // save_stride] * u_r
    return RtmImage(mig.grid, image)


def stack_images(images) -> RtmImage:
    """Element-wise sum; all images must share one grid."""
    images = list(images)
    if not images:
        raise ValueError("need at least one image")
    grid = images[0].grid
    total = np.zeros_like(images[0].values)
    for img in images:
        if img.grid != grid:
            raise ValueError("images are on different grids")
        total += img.values
    return RtmImage(grid, total)


def laplacian_filter(image: RtmImage) -> RtmImage:
    """5-point Laplacian in cell units, edges replicated; kills smooth trends."""
    p = np.pad(image.values, 1, mode="edge")
    out = p[1:-1, 2:] + p[1:-1, :-2] + p[2:, 1:-1] + p[:-2, 1:-1] - 4.0 * image.values
    return RtmImage(image.grid, out)


def forward_gridded(
    model: VelocityModel,
    source_field: np.ndarray,
    acq: Acquisition,
    src: RickerSource,
    sponge: SpongeBoundary,
    spatial_order: int = 4,
) -> np.ndarray:
    """Record the response to source density ricker(t_n) * source_field.

    The linear map source_field -> data whose adjoint is
    :func:`adjoint_gridded`.  acq.source_pos is ignored.
    """
    if source_field.shape != (model.grid.nz, model.grid.nx):
        raise ValueError("source_field shape does not match the model grid")
    padded, ox, oz = _pad_model(model, sponge)
    rows, cols, weights = receiver_weights(model.grid, acq.receiver_xs,
                                           acq.receiver_z, ox, oz)
    field = np.zeros((padded.grid.nz, padded.grid.nx))
    field[oz:oz + model.grid.nz, ox:ox + model.grid.nx] = source_field
    data = np.empty((acq.nt, len(acq.receiver_xs)))
    u_prev = np.zeros_like(field)
    u_curr = np.zeros_like(field)
    for n in range(acq.nt):
        u_next = step_field(u_prev, u_curr, padded, acq.dt, sponge,
                            ricker(src, n * acq.dt) * field, spatial_order)
        data[n] = (weights * u_next[rows, cols]).sum(axis=0)
        u_prev, u_curr = u_curr, u_next
    return data


def adjoint_gridded(
    model: VelocityModel,
    data: np.ndarray,
    acq: Acquisition,
    src: RickerSource,
    sponge: SpongeBoundary,
    spatial_order: int = 4,
) -> np.ndarray:
    """Adjoint of :func:`forward_gridded`: dt^2 sum_n ricker(t_n) * u_rcv^n."""
    data = np.asarray(data)
    if data.shape != (acq.nt, len(acq.receiver_xs)):
        raise ValueError("data shape does not match the acquisition")
    out = np.zeros((model.grid.nz, model.grid.nx))
    dt2 = acq.dt * acq.dt
    for n, u_r in _backward_fields(model, data, acq, sponge, spatial_order):
        out += dt2 * ricker(src, n * acq.dt) * u_r
    return out
