"""Command-line driver: per-stage tools plus the batch dataset pipeline.

Exit codes: 0 on success, 1 on configuration/usage errors, 2 when a batch
finished but some models failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import f32r, metrics, nas, pruner
from .config import DEFAULT_CONFIG_TEXT, ConfigError, PipelineConfig, load_config
from .pipeline import run_dataset
from .rng import mix
from .rtm import laplacian_filter, rtm_shot, smooth_model, stack_images
from .velmodel import Grid2D, VelocityModel, generate_model
from .wavesim import Acquisition, RickerSource, SpongeBoundary, cfl_max_dt, forward_model


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_common(p: _Parser):
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers (dataset)")
    p.add_argument("--out", default=None, help="output file or directory")


def _build_parser() -> _Parser:
    parser = _Parser(prog="seisforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-velocity", parents=[], help="generate one velocity model")
    _add_common(p)
    p.add_argument("--config", default=None, help="pipeline config file")
    p.add_argument("--render", default=None, help="also write a PGM preview here")

    p = sub.add_parser("forward", help="forward-model one shot over a velocity file")
    _add_common(p)
    p.add_argument("--model", required=True, help="velocity F32R file")
    p.add_argument("--f0", type=float, default=10.0)
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=0.0, help="0 = 0.9x the CFL limit")
    p.add_argument("--nt", type=int, default=700)
    p.add_argument("--src", required=True, metavar="X,Z", help="source position, meters")
    p.add_argument("--receivers", required=True, metavar="X0:X1:N",
                   help="receiver line: first x, last x, count")
    p.add_argument("--receiver-depth", type=float, required=True)
    p.add_argument("--sponge-width", type=int, default=30)
    p.add_argument("--sponge-strength", type=float, default=0.009)
    p.add_argument("--order", type=int, default=4, choices=(2, 4))

    p = sub.add_parser("rtm", help="migrate a directory of shot gathers")
    _add_common(p)
    p.add_argument("--config", default=None, help="pipeline config (acquisition geometry)")
    p.add_argument("--model", required=True, help="velocity F32R file")
    p.add_argument("--gathers", required=True,
                   help="directory of gather F32R files (sorted = shot order)")
    p.add_argument("--partials", action="store_true",
                   help="also write per-shot partial images")

    p = sub.add_parser("metrics", help="compare two F32R rasters")
    _add_common(p)
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--header", action="store_true", help="print the CSV header line")

    p = sub.add_parser("prune", help="magnitude-prune a weight raster")
    _add_common(p)
    p.add_argument("--weights", required=True, help="F32R file of weights")
    p.add_argument("--fraction", type=float, required=True)

    p = sub.add_parser("nas-discretize", help="derive a genotype from alpha logits")
    _add_common(p)
    p.add_argument("--alpha", required=True,
                   help="CSV of logits, one row per edge, |ops| columns")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--kind", choices=nas.CELL_KINDS, default="encoder")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--base-channels", type=int, default=16)
    p.add_argument("--no-fixed", action="store_true",
                   help="exclude stem/head/resampling parameters from the count")

    p = sub.add_parser("dataset", help="run the full batch pipeline")
    _add_common(p)
    p.add_argument("--config", default=None, help="pipeline config file")
    p.add_argument("--write-config", action="store_true",
                   help="print the default config and exit")

    p = sub.add_parser("render", help="render an F32R raster to 8-bit PGM")
    _add_common(p)
    p.add_argument("input")
    return parser


def _load_cfg(path, seed_override) -> PipelineConfig:
    cfg = load_config(path) if path else PipelineConfig()
    if seed_override is not None:
        cfg = PipelineConfig(**{**_cfg_dict(cfg), "master_seed": seed_override})
    return cfg


def _cfg_dict(cfg: PipelineConfig) -> dict:
    import dataclasses
    return {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)}


def _require_out(args) -> str:
    if args.out is None:
        raise ConfigError("--out is required for this command")
    return args.out


def _cmd_gen_velocity(args) -> int:
    cfg = _load_cfg(args.config, args.seed)
    out = _require_out(args)
    model = generate_model(cfg.grid, cfg.layers, cfg.salt, cfg.master_seed)
    f32r.write_f32r(out, model.vp, f32r.KIND_FIELD, (cfg.grid.dz, cfg.grid.dx))
    if args.render:
        f32r.write_pgm(args.render, model.vp)
    print(f"wrote {out}: {cfg.grid.nz}x{cfg.grid.nx} cells, "
          f"vp in [{model.vp.min():.0f}, {model.vp.max():.0f}] m/s")
    return 0


def _read_model(path) -> VelocityModel:
    arr, header = f32r.read_f32r(path)
    if header.kind != f32r.KIND_FIELD:
        raise ConfigError(f"{path} is not a field-kind F32R file")
    dz, dx = header.meta
    grid = Grid2D(header.cols, header.rows, dx or 10.0, dz or 10.0)
    return VelocityModel(grid, arr.astype(np.float64))


def _cmd_forward(args) -> int:
    model = _read_model(args.model)
    out = _require_out(args)
    try:
        sx, sz = (float(v) for v in args.src.split(","))
        x0, x1, n = args.receivers.split(":")
        receiver_xs = np.linspace(float(x0), float(x1), int(n))
    except ValueError:
        raise ConfigError("--src must be X,Z and --receivers X0:X1:N") from None
    src = RickerSource(args.f0, args.t0, args.amplitude)
    sponge = SpongeBoundary(args.sponge_width, args.sponge_strength)
    dt = args.dt if args.dt > 0 else 0.9 * cfl_max_dt(model, args.order)
    acq = Acquisition((sx, sz), tuple(receiver_xs), args.receiver_depth, dt, args.nt)
    gather, _ = forward_model(model, acq, src, sponge, spatial_order=args.order)
    f32r.write_f32r(out, gather.data, f32r.KIND_GATHER, (dt, args.receiver_depth))
    print(f"wrote {out}: {args.nt} steps x {len(receiver_xs)} receivers, dt={dt:.6g} s")
    return 0


def _cmd_rtm(args) -> int:
    cfg = _load_cfg(args.config, args.seed)
    model = _read_model(args.model)
    out = _require_out(args)
    gather_files = sorted(Path(args.gathers).glob("*.f32r"))
    if not gather_files:
        raise ConfigError(f"no .f32r gathers found in {args.gathers}")

    plan = cfg.acquisition
    source_xs = plan.source_xs(len(gather_files))
    mig = smooth_model(model, cfg.rtm_smooth_radius)
    images = []
    for s, path in enumerate(gather_files):
        data, header = f32r.read_f32r(path)
        if header.kind != f32r.KIND_GATHER:
            raise ConfigError(f"{path} is not a gather-kind F32R file")
        dt, rcv_z = header.meta
        acq = Acquisition((source_xs[s], plan.src_z), plan.receiver_xs(),
                          rcv_z, dt, header.rows)
        if header.cols != len(acq.receiver_xs):
            raise ConfigError(
                f"{path} has {header.cols} traces, config expects "
                f"{len(acq.receiver_xs)} receivers"
            )
        image = rtm_shot(mig, data.astype(np.float64), acq, cfg.source, cfg.sponge,
                         spatial_order=cfg.spatial_order,
                         save_stride=cfg.rtm_save_stride)
        images.append(image)
        if args.partials:
            partial = Path(out).with_suffix(f".shot{s:03d}.f32r")
            f32r.write_f32r(partial, image.values, f32r.KIND_FIELD,
                            (model.grid.dz, model.grid.dx))
    stacked = laplacian_filter(stack_images(images))
    f32r.write_f32r(out, stacked.values, f32r.KIND_FIELD,
                    (model.grid.dz, model.grid.dx))
    print(f"wrote {out}: stacked {len(images)} shot(s)")
    return 0


def _cmd_metrics(args) -> int:
    a, _ = f32r.read_f32r(args.file_a)
    b, _ = f32r.read_f32r(args.file_b)
    a = a.astype(np.float64)
    b = b.astype(np.float64)
    values = (
        metrics.ssim(a, b),
        metrics.pixel_loss(a, b, "L1"),
        metrics.pixel_loss(a, b, "L2"),
        metrics.feature_loss(a, b),
        metrics.combined_loss(a, b),
    )
    if args.header:
        print("file_a,file_b,ssim,l1,l2,feature,combined")
    row = ",".join(f"{v:.12g}" for v in values)
    print(f"{args.file_a},{args.file_b},{row}")
    return 0


def _cmd_prune(args) -> int:
    out = _require_out(args)
    w, header = f32r.read_f32r(args.weights)
    w = w.astype(np.float64)
    keep = pruner.level_prune(w, args.fraction)
    pruned = pruner.apply_mask(w, keep)
    f32r.write_f32r(out, pruned, header.kind, header.meta)
    print(f"{w.size},{args.fraction:g},{pruner.sparsity_of(pruned):g}")
    return 0


def _cmd_nas_discretize(args) -> int:
    out = _require_out(args)
    alpha = np.loadtxt(args.alpha, delimiter=",", ndmin=2)
    cell = nas.CellSpec(n_nodes=args.nodes, kind=args.kind)
    genotype = nas.discretize(alpha, cell)
    Path(out).write_text(nas.serialize_genotype(genotype), encoding="utf-8")
    backbone = nas.BackboneConfig(depth=args.depth, base_channels=args.base_channels,
                                  nodes_per_cell=args.nodes,
                                  include_fixed=not args.no_fixed)
    print(f"wrote {out}; backbone parameters: {nas.param_count(genotype, backbone)}")
    return 0


def _cmd_dataset(args) -> int:
    if args.write_config:
        print(DEFAULT_CONFIG_TEXT, end="")
        return 0
    cfg = _load_cfg(args.config, args.seed)
    manifest = run_dataset(cfg, out_dir=args.out, jobs=args.jobs)
    for failure in manifest["failures"]:
        print(f"model {failure['model']} failed: {failure['error']}", file=sys.stderr)
    print(f"wrote {len(manifest['files'])} files "
          f"({len(manifest['failures'])} model(s) failed)")
    return 2 if manifest["failures"] else 0


def _cmd_render(args) -> int:
    out = _require_out(args)
    arr, _ = f32r.read_f32r(args.input)
    f32r.write_pgm(out, arr)
    print(f"wrote {out}")
    return 0


_COMMANDS = {
    "gen-velocity": _cmd_gen_velocity,
    "forward": _cmd_forward,
    "rtm": _cmd_rtm,
    "metrics": _cmd_metrics,
    "prune": _cmd_prune,
    "nas-discretize": _cmd_nas_discretize,
    "dataset": _cmd_dataset,
    "render": _cmd_render,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except (ConfigError, f32r.FormatError, ValueError, OSError) as exc:
        print(f"seisforge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
