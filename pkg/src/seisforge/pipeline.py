"""Batch dataset generation: velocity -> shot gathers -> stacked RTM image.

Each model index gets its own seed via mix(master_seed, index), so outputs
are a pure function of the configuration no matter how many workers run, and
the manifest records an FNV-1a 64 checksum for every emitted file.  A model
that fails mid-pipeline is logged and skipped; the rest of the batch runs.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import f32r
from .config import PipelineConfig
from .rng import mix
from .rtm import laplacian_filter, rtm_shot, smooth_model, stack_images
from .velmodel import generate_model
from .wavesim import Acquisition, cfl_max_dt, forward_model

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash (offset 0xcbf29ce484222325, prime 0x100000001b3)."""
    h = _FNV_OFFSET
    for byte in data:
        h = (h ^ byte) * _FNV_PRIME & _MASK64
    return h


def _write_entry(out_dir: Path, relpath: str, blob: bytes, kind: str,
                 model: int, shot, seed: int) -> dict:
    target = out_dir / relpath
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(blob)
    return {
        "path": relpath,
        "kind": kind,
        "model": model,
        "shot": shot,
        "seed": seed,
        "fnv1a": f"{fnv1a64(blob):016x}",
    }


def process_model(cfg: PipelineConfig, out_dir: str, index: int) -> dict:
    """Generate one model's velocity, gathers and stacked RTM image files."""
    out = Path(out_dir)
    seed = mix(cfg.master_seed, index)
    prefix = f"model_{index:04d}"
    entries = []

    model = generate_model(cfg.grid, cfg.layers, cfg.salt, seed)
    blob = f32r.f32r_bytes(model.vp, f32r.KIND_FIELD, (cfg.grid.dz, cfg.grid.dx))
    entries.append(_write_entry(out, f"{prefix}/velocity.f32r", blob,
                                "velocity", index, None, seed))

    plan = cfg.acquisition
    dt = plan.dt if plan.dt > 0 else 0.9 * cfl_max_dt(model, cfg.spatial_order)
    receiver_xs = plan.receiver_xs()
    shots = []
    for s, src_x in enumerate(plan.source_xs(cfg.shots_per_model)):
        acq = Acquisition((src_x, plan.src_z), receiver_xs, plan.rcv_z, dt, plan.nt)
        gather, _ = forward_model(model, acq, cfg.source, cfg.sponge,
                                  spatial_order=cfg.spatial_order)
        shots.append((acq, gather))
        blob = f32r.f32r_bytes(gather.data, f32r.KIND_GATHER, (dt, plan.rcv_z))
        entries.append(_write_entry(out, f"{prefix}/shot_{s:03d}.f32r", blob,
                                    "gather", index, s, seed))

    mig = smooth_model(model, cfg.rtm_smooth_radius)
    images = [
        rtm_shot(mig, gather, acq, cfg.source, cfg.sponge,
                 spatial_order=cfg.spatial_order, save_stride=cfg.rtm_save_stride)
        for acq, gather in shots
    ]
    image = laplacian_filter(stack_images(images))
    blob = f32r.f32r_bytes(image.values, f32r.KIND_FIELD, (cfg.grid.dz, cfg.grid.dx))
    entries.append(_write_entry(out, f"{prefix}/rtm.f32r", blob,
                                "rtm", index, None, seed))
    return {"index": index, "entries": entries, "error": None}


def _process_model_safe(cfg: PipelineConfig, out_dir: str, index: int) -> dict:
    try:
        return process_model(cfg, out_dir, index)
    except Exception as exc:  # noqa: BLE001 - batch isolation is the contract
        return {"index": index, "entries": [], "error": f"{type(exc).__name__}: {exc}"}


def run_dataset(cfg: PipelineConfig, out_dir: str | None = None, jobs: int = 1) -> dict:
    """Run the batch and write manifest.json; returns the manifest dict."""
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    indices = range(cfg.n_models)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_process_model_safe, [cfg] * cfg.n_models,
                                    [str(out)] * cfg.n_models, indices))
    else:
        results = [_process_model_safe(cfg, str(out), i) for i in indices]
    results.sort(key=lambda r: r["index"])

    manifest = {
        "master_seed": cfg.master_seed,
        "n_models": cfg.n_models,
        "shots_per_model": cfg.shots_per_model,
        "files": [entry for r in results for entry in r["entries"]],
        "failures": [
            {"model": r["index"], "error": r["error"]}
            for r in results if r["error"] is not None
        ],
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
