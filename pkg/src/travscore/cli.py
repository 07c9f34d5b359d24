"""Command-line entry point tying the library together.

Subcommands::

    select-frames   thin out a recorded trace by pose displacement
    synth-gen       materialize a synthetic dataset (images + annotations)
    train           supervised regression on an annotated manifest
    adapt           adversarial domain adaptation (labeled source, images-only target)
    eval            metrics report and overlay renderings for a checkpoint
    infer           per-image section scores from a checkpoint
    navigate-sim    closed-loop episode in a synthetic world
    annotate-serve  local annotation UI + data API

Every artifact-producing run writes a ``run.json`` (or ``<out>.run.json``
for single-file outputs) recording the resolved configuration, so the run
can be reproduced from that document alone.  A ``--config`` JSON file may
supply hyperparameter defaults; explicit flags always win.

Exit codes: 0 success, 2 configuration errors (bad flags or unusable
inputs), 1 runtime failures (training divergence, ports in use, ...).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import torch
from PIL import Image, ImageDraw, UnidentifiedImageError

from . import dataset as data_io
from . import server as annotation_server
from . import synthworld
from .core import (
    ConfigurationError,
    ImageFrame,
    SectionLayout,
    TraversabilityVector,
    section_boundaries,
)
from .dataset import SelectionConfig, select_frames
from .losses import LossConfig
from .model import (
    TraversabilityNet,
    load_checkpoint,
    peek_checkpoint,
    save_checkpoint,
)
from .nav import Box, NavConfig, PlanarWorld, ReplayWorld, oracle_policy, simulate
from .report import compute_report, render_overlay
from .train import AdaptationSetup, ArrayDataset, TrainConfig, train_adaptation, train_supervised

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

CONFIG_ERRORS = (
    ConfigurationError,
    ValueError,
    KeyError,
    FileNotFoundError,
    NotADirectoryError,
    IsADirectoryError,
    UnidentifiedImageError,
    json.JSONDecodeError,
)


# -- shared helpers -----------------------------------------------------------


def _require_file(path: Path, what: str) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{what} not found: {path}")
    return path


def _require_dir(path: Path, what: str) -> Path:
    path = Path(path)
    if not path.is_dir():
        raise FileNotFoundError(f"{what} directory not found: {path}")
    return path


def _plain(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _write_run_manifest(path: Path, args: argparse.Namespace) -> None:
    """Record the resolved configuration of this run next to its outputs."""
    parameters = {
        name: _plain(value)
        for name, value in sorted(vars(args).items())
        if name not in ("func", "subcommand", "config")
    }
    doc = {
        "subcommand": args.subcommand,
        "config_file": str(args.config) if args.config else None,
        "seed": getattr(args, "seed", None),
        "output": _plain(getattr(args, "out_dir", None) or getattr(args, "out", None)),
        "parameters": parameters,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _build_model_for_checkpoint(checkpoint: Path) -> TraversabilityNet:
    payload = peek_checkpoint(checkpoint)
    arch = payload["architecture"]
    if arch.get("encoder_kind") != "tiny":
        raise ConfigurationError(
            f"checkpoint uses encoder {arch.get('encoder_kind')!r}; only the "
            "built-in encoder can be reconstructed from the command line"
        )
    model = TraversabilityNet(k=int(arch["k"]), grl_scale=float(arch.get("grl_scale", 1.0)))
    load_checkpoint(checkpoint, model)
    return model


def _predict_scores(
    model: TraversabilityNet, frames: np.ndarray, batch_size: int = 16
) -> np.ndarray:
    """Clamped per-section scores for a stack of frames."""
    model.eval()
    rows: List[np.ndarray] = []
    with torch.no_grad():
        for start in range(0, frames.shape[0], batch_size):
            batch = np.ascontiguousarray(frames[start : start + batch_size])
            out = model.forward_traversability(torch.from_numpy(batch.copy()))
            rows.append(torch.clamp(out.double(), 0.0, 1.0).numpy())
    return np.concatenate(rows, axis=0)


def _layout_for(frame: ImageFrame, k: int) -> SectionLayout:
    return SectionLayout(k=k, width=frame.width, boundaries=section_boundaries(frame.width, k))


# -- subcommand handlers -------------------------------------------------------


def cmd_select_frames(args: argparse.Namespace) -> None:
    manifest = _require_file(args.manifest, "manifest")
    records = data_io.load_manifest(manifest)
    config = SelectionConfig(
        theta_th=args.theta_th, dist_th=args.dist_th, comb_threshold=args.comb
    )
    kept = select_frames(records, config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    data_io.save_manifest(kept, out)
    _write_run_manifest(Path(str(out) + ".run.json"), args)
    print(f"kept {len(kept)} of {len(records)} frames -> {out}")


def cmd_synth_gen(args: argparse.Namespace) -> None:
    specs = synthworld.generate_domain_specs(
        args.n,
        domain=args.domain,
        seed=args.seed,
        height=args.height,
        width=args.width,
        noise_level=args.noise,
        max_obstacles=args.max_obstacles,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = synthworld.write_dataset(specs, out_dir, k=args.k)
    _write_run_manifest(out_dir / "run.json", args)
    print(f"wrote {len(specs)} {args.domain} scenes -> {manifest}")


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        loss=LossConfig(alpha=args.alpha, lam=args.lam),
        seed=args.seed,
        k=args.k,
        domain_learning_rate=getattr(args, "domain_lr", 1e-3),
        domain_momentum=getattr(args, "momentum", 0.9),
        grl_scale=getattr(args, "grl_scale", 1.0),
    )


def _check_label_width(dataset: ArrayDataset, k: int, what: str) -> None:
    if dataset.scores is not None and dataset.scores.shape[1] != k:
        raise ConfigurationError(
            f"{what} annotations have {dataset.scores.shape[1]} sections, expected {k}"
        )


def _finish_training(args: argparse.Namespace, config: TrainConfig, result) -> None:
    out_dir = Path(args.out_dir)
    save_checkpoint(
        out_dir / "checkpoint.pkl",
        result.model,
        epoch=result.best_epoch,
        seed=config.seed,
        optimizer_state=result.best_optimizer_state,
        extra={"train_mae": result.best_train_mae, "epochs_run": config.epochs},
    )
    print(
        f"best epoch {result.best_epoch}/{config.epochs - 1}: "
        f"train MAE {result.best_train_mae:.4f} -> {out_dir / 'checkpoint.pkl'}"
    )


def cmd_train(args: argparse.Namespace) -> None:
    manifest = _require_file(args.manifest, "manifest")
    annotations = _require_dir(args.annotations, "annotations")
    config = _train_config(args)
    dataset = ArrayDataset.from_manifest(manifest, annotations, resize_shortest=args.resize)
    _check_label_width(dataset, config.k, "training")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_run_manifest(out_dir / "run.json", args)
    log = out_dir / "epochs.jsonl"
    log.unlink(missing_ok=True)
    result = train_supervised(dataset, config, log_path=log)
    _finish_training(args, config, result)


def cmd_adapt(args: argparse.Namespace) -> None:
    source_manifest = _require_file(args.source, "source manifest")
    annotations = _require_dir(args.annotations, "source annotations")
    target_manifest = _require_file(args.target, "target manifest")
    config = _train_config(args)
    source = ArrayDataset.from_manifest(
        source_manifest, annotations, resize_shortest=args.resize
    )
    target = ArrayDataset.from_manifest(target_manifest, None, resize_shortest=args.resize)
    _check_label_width(source, config.k, "source")
    setup = AdaptationSetup(source=source, target=target)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_run_manifest(out_dir / "run.json", args)
    log = out_dir / "epochs.jsonl"
    log.unlink(missing_ok=True)
    result = train_adaptation(setup, config, log_path=log)
    _finish_training(args, config, result)


def cmd_eval(args: argparse.Namespace) -> None:
    checkpoint = _require_file(args.checkpoint, "checkpoint")
    manifest = _require_file(args.manifest, "manifest")
    annotations = _require_dir(args.annotations, "annotations")
    model = _build_model_for_checkpoint(checkpoint)
    dataset = ArrayDataset.from_manifest(manifest, annotations, resize_shortest=args.resize)
    _check_label_width(dataset, model.k, "evaluation")
    predictions = _predict_scores(model, dataset.frames, batch_size=args.batch)
    report = compute_report(
        predictions,
        dataset.scores,
        dataset.domains,
        delta=args.delta,
        config={"checkpoint": str(args.checkpoint), "manifest": str(args.manifest)},
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report.save(out_dir / "report.json")
    _write_run_manifest(out_dir / "run.json", args)
    if args.overlays is not None:
        overlay_dir = Path(args.overlays)
        overlay_dir.mkdir(parents=True, exist_ok=True)
        records = data_io.load_manifest(manifest)
        for i, record in enumerate(records):
            frame = ImageFrame(dataset.frames[i])
            overlay = render_overlay(
                frame,
                TraversabilityVector(dataset.scores[i]),
                TraversabilityVector(predictions[i]),
                _layout_for(frame, model.k),
            )
            stem = Path(record.image_path).stem
            data_io.save_image(overlay, overlay_dir / f"{stem}_overlay.png")
        print(f"wrote {len(records)} overlays -> {overlay_dir}")
    print(
        f"MAE {report.mae_all:.4f} over {report.n_frames} frames | "
        f"unsafe rate {report.unsafe_rate:.4f} | "
        f"mean unsafe overshoot {report.mean_unsafe_overshoot:.4f}"
    )
    for domain, mae in sorted(report.mae_per_domain.items()):
        print(f"  {domain}: MAE {mae:.4f}")


def cmd_infer(args: argparse.Namespace) -> None:
    checkpoint = _require_file(args.checkpoint, "checkpoint")
    model = _build_model_for_checkpoint(checkpoint)
    out_dir = Path(args.out_dir) if args.out_dir is not None else None
    overlay_dir: Optional[Path] = None
    if args.overlay:
        if out_dir is None:
            raise ConfigurationError("--overlay requires --out-dir for the rendered files")
        overlay_dir = out_dir / "overlays"
        overlay_dir.mkdir(parents=True, exist_ok=True)
    rows: List[Dict[str, Any]] = []
    for image_arg in args.images:
        path = _require_file(Path(image_arg), "image")
        frame = data_io.load_image(path)
        if args.resize is not None:
            frame = data_io.resize_shortest_side(frame, args.resize)
        scores = _predict_scores(model, frame.pixels[np.newaxis], batch_size=1)[0]
        row = {"image": str(image_arg), "scores": [float(s) for s in scores]}
        rows.append(row)
        print(json.dumps(row))
        if overlay_dir is not None:
            overlay = render_overlay(
                frame, None, TraversabilityVector(scores), _layout_for(frame, model.k)
            )
            data_io.save_image(overlay, overlay_dir / f"{path.stem}_overlay.png")
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "scores.jsonl", "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
        _write_run_manifest(out_dir / "run.json", args)


# A wall ahead and slightly to the left: the canned arena exercises both the
# slow-down-then-steer behavior and collision detection.
PLANAR_ARENA = (Box(x0=2.0, y0=-1.0, x1=2.6, y1=4.0),)


def _render_path(path: Path, points, boxes: Sequence[Box]) -> None:
    """Draw the travelled x/y trace (and any obstacles) to a PNG."""
    size, margin = 480, 32
    xs = [p.pose.x for p in points] + [b for box in boxes for b in (box.x0, box.x1)]
    ys = [p.pose.y for p in points] + [b for box in boxes for b in (box.y0, box.y1)]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    span = max(x_hi - x_lo, y_hi - y_lo, 1e-6)
    scale = (size - 2 * margin) / span

    def to_px(x: float, y: float) -> tuple[float, float]:
        return margin + (x - x_lo) * scale, size - margin - (y - y_lo) * scale

    image = Image.new("RGB", (size, size), (255, 255, 255))
    draw = ImageDraw.Draw(image)
    for box in boxes:
        draw.rectangle([to_px(box.x0, box.y1), to_px(box.x1, box.y0)], fill=(90, 90, 90))
    trace = [to_px(p.pose.x, p.pose.y) for p in points]
    if len(trace) > 1:
        draw.line(trace, fill=(30, 90, 200), width=3)
    for (cx, cy), color in ((trace[0], (0, 160, 0)), (trace[-1], (200, 0, 0))):
        draw.ellipse([cx - 5, cy - 5, cx + 5, cy + 5], fill=color)
    image.save(path)


def cmd_navigate_sim(args: argparse.Namespace) -> None:
    nav_config = NavConfig(v_max=args.v_max, k=args.k)
    if args.world == "replay":
        specs = synthworld.generate_domain_specs(
            args.scenes,
            domain=args.domain,
            seed=args.seed,
            height=args.height,
            width=args.width,
        )
        world = ReplayWorld(specs, k=args.k)
        boxes: Sequence[Box] = ()
    else:
        boxes = PLANAR_ARENA
        world = PlanarWorld(boxes=boxes, k=args.k)
    result = simulate(
        oracle_policy, world, steps=args.steps, config=nav_config, dt=args.dt, gain=args.gain
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "trajectory.jsonl", "w", encoding="utf-8") as fh:
        for point in result.points:
            fh.write(
                json.dumps(
                    {
                        "step": point.step,
                        "x": point.pose.x,
                        "y": point.pose.y,
                        "yaw": point.pose.yaw,
                        "linear": point.command.linear,
                        "angular_target": point.command.angular_target,
                        "scores": list(point.scores.scores),
                    }
                )
                + "\n"
            )
    summary = {
        "steps": len(result.points),
        "collided": result.collided,
        "stopped": result.stopped,
        "final_pose": {
            "x": result.points[-1].pose.x,
            "y": result.points[-1].pose.y,
            "yaw": result.points[-1].pose.yaw,
        }
        if result.points
        else None,
    }
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _write_run_manifest(out_dir / "run.json", args)
    if args.render is not None and result.points:
        _render_path(out_dir / args.render, result.points, boxes)
    print(
        f"{summary['steps']} steps, collided={summary['collided']}, "
        f"stopped={summary['stopped']} -> {out_dir / 'trajectory.jsonl'}"
    )


def cmd_annotate_serve(args: argparse.Namespace) -> None:
    manifest = _require_file(args.manifest, "manifest")
    annotations = Path(args.annotations)
    annotations.mkdir(parents=True, exist_ok=True)
    if args.ui is not None:
        _require_dir(args.ui, "UI assets")
    httpd = annotation_server.build_server(
        manifest_path=manifest,
        annotations_dir=annotations,
        port=args.port,
        host=args.host,
        ui_dir=args.ui,
        k=args.k,
    )
    host, port = httpd.server_address[:2]
    print(f"serving annotation tool on http://{host}:{port}/ (Ctrl-C to stop)")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()


# -- parser --------------------------------------------------------------------


def _add_training_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=1.5,
                        help="extra weight on overestimation errors")
    parser.add_argument("--lambda", dest="lam", type=float, default=5e-4,
                        help="L2 weight-penalty coefficient")
    parser.add_argument("--epochs", type=int, default=200)
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--lr", type=float, default=2e-4, help="main learning rate")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--k", type=int, default=9, help="number of vertical sections")
    parser.add_argument("--resize", type=int, default=None,
                        help="resize each image's shortest side to this many pixels")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="travscore",
        description="Per-section traversability estimation toolkit",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def new(name: str, func, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, allow_abbrev=False)
        p.set_defaults(func=func)
        p.add_argument("--config", type=Path, default=None,
                       help="JSON file of flag defaults; explicit flags win")
        return p

    p = new("select-frames", cmd_select_frames,
            "thin out a recorded trace by pose displacement")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--theta-th", dest="theta_th", type=float, default=40.0,
                   help="yaw-difference normalizer (degrees)")
    p.add_argument("--dist-th", dest="dist_th", type=float, default=0.8,
                   help="displacement normalizer (meters)")
    p.add_argument("--comb", type=float, default=1.0,
                   help="combined-displacement selection threshold")

    p = new("synth-gen", cmd_synth_gen, "materialize a synthetic dataset")
    p.add_argument("--out-dir", dest="out_dir", type=Path, required=True)
    p.add_argument("--n", type=int, required=True, help="number of scenes")
    p.add_argument("--domain", choices=synthworld.GROUND_STYLES,
                   default=synthworld.ASPHALT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=9)
    p.add_argument("--height", type=int, default=synthworld.DEFAULT_HEIGHT)
    p.add_argument("--width", type=int, default=synthworld.DEFAULT_WIDTH)
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--max-obstacles", dest="max_obstacles", type=int, default=3)

    p = new("train", cmd_train, "supervised regression on an annotated manifest")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--annotations", type=Path, required=True)
    p.add_argument("--out-dir", dest="out_dir", type=Path, required=True)
    _add_training_flags(p)

    p = new("adapt", cmd_adapt, "domain adaptation from a labeled source")
    p.add_argument("--source", type=Path, required=True, help="source manifest")
    p.add_argument("--annotations", type=Path, required=True,
                   help="source annotations directory")
    p.add_argument("--target", type=Path, required=True,
                   help="target manifest (annotations never read)")
    p.add_argument("--out-dir", dest="out_dir", type=Path, required=True)
    _add_training_flags(p)
    p.add_argument("--domain-lr", dest="domain_lr", type=float, default=1e-3,
                   help="domain classifier learning rate")
    p.add_argument("--momentum", type=float, default=0.9,
                   help="domain classifier momentum")
    p.add_argument("--grl-scale", dest="grl_scale", type=float, default=1.0,
                   help="gradient reversal strength")

    p = new("eval", cmd_eval, "metrics report for a checkpoint")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--annotations", type=Path, required=True)
    p.add_argument("--out-dir", dest="out_dir", type=Path, required=True)
    p.add_argument("--delta", type=float, default=0.0,
                   help="tolerance before an overestimate counts as unsafe")
    p.add_argument("--overlays", type=Path, default=None,
                   help="directory for per-frame overlay renderings")
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--resize", type=int, default=None)

    p = new("infer", cmd_infer, "per-image section scores from a checkpoint")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("images", nargs="+", help="image files to score, in order")
    p.add_argument("--out-dir", dest="out_dir", type=Path, default=None,
                   help="also write scores.jsonl (and overlays) here")
    p.add_argument("--overlay", action="store_true",
                   help="render an overlay per image into <out-dir>/overlays")
    p.add_argument("--resize", type=int, default=None)

    p = new("navigate-sim", cmd_navigate_sim, "closed-loop synthetic episode")
    p.add_argument("--out-dir", dest="out_dir", type=Path, required=True)
    p.add_argument("--steps", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--world", choices=("replay", "planar"), default="replay")
    p.add_argument("--scenes", type=int, default=8,
                   help="scene count for the replay world")
    p.add_argument("--domain", choices=synthworld.GROUND_STYLES,
                   default=synthworld.ASPHALT)
    p.add_argument("--height", type=int, default=synthworld.DEFAULT_HEIGHT)
    p.add_argument("--width", type=int, default=synthworld.DEFAULT_WIDTH)
    p.add_argument("--k", type=int, default=9)
    p.add_argument("--v-max", dest="v_max", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--gain", type=float, default=1.0,
                   help="proportional steering gain (deg/s per deg)")
    p.add_argument("--render", type=str, default=None,
                   help="file name for a rendered path image in --out-dir")

    p = new("annotate-serve", cmd_annotate_serve, "serve the annotation tool")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--annotations", type=Path, required=True)
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--host", type=str, default="127.0.0.1")
    p.add_argument("--ui", type=Path, default=None, help="built UI bundle to serve")
    p.add_argument("--k", type=int, default=9)

    return parser


# -- config-file plumbing --------------------------------------------------------


def _extract_config_path(argv: Sequence[str]) -> Optional[str]:
    for i, token in enumerate(argv):
        if token == "--config":
            if i + 1 < len(argv):
                return argv[i + 1]
        elif token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def _load_config_values(path: str) -> Dict[str, Any]:
    doc = json.loads(_require_file(Path(path), "config file").read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ValueError(f"config file must hold a JSON object: {path}")
    return {
        key: value
        for key, value in doc.items()
        if not key.startswith("_") and key not in ("func", "subcommand", "config")
    }


def _option_for(dest: str) -> str:
    return "--lambda" if dest == "lam" else "--" + dest.replace("_", "-")


def _apply_config(args: argparse.Namespace, argv: Sequence[str], values: Dict[str, Any]) -> None:
    """Fill parsed args from the config file; flags given on the CLI win."""
    for key, value in values.items():
        if not hasattr(args, key):
            continue
        option = _option_for(key)
        if any(tok == option or tok.startswith(option + "=") for tok in argv):
            continue
        setattr(args, key, value)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = [str(a) for a in (sys.argv[1:] if argv is None else argv)]
    parser = build_parser()
    config_values: Dict[str, Any] = {}
    config_path = _extract_config_path(argv)
    if config_path is not None:
        try:
            config_values = _load_config_values(config_path)
        except CONFIG_ERRORS as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    _apply_config(args, argv, config_values)
    try:
        args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
