"""Training loops: supervised regression and adversarial domain adaptation.

Both procedures share the same skeleton — Adam (lr 2e-4, betas (0.5, 0.999))
over encoder + scoring layer, sum-reduced safety loss, per-epoch training MAE
logged to an append-only line-delimited file, and checkpoint selection at the
epoch with the best (lowest) training MAE.

The adaptation procedure adds a second stream: each step also draws a mixed
half-source/half-target batch, runs it through the shared encoder into the
domain classifier, and backpropagates a binary cross-entropy.  The gradient
reversal layer flips the sign of that gradient inside the encoder, so the
main optimizer simultaneously fits the regression targets and *un*-fits the
domain distinction, while a separate SGD optimizer (lr 0.001, momentum 0.9)
trains the classifier itself.  Target-domain score labels are structurally
absent from the setup: :class:`AdaptationSetup` strips them on construction.

Batch order is a pure function of the seed, with independent generator
streams for the regression and domain branches, so disabling the reversal
(scale 0) reproduces the supervised parameter trajectory exactly.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import torch

from . import dataset as data_io
from .core import ImageFrame, TraversabilityVector
from .losses import LossConfig, domain_bce_loss, safety_loss
from .model import TraversabilityNet
from .synthworld import derive_seed

__all__ = [
    "TrainConfig",
    "ArrayDataset",
    "AdaptationSetup",
    "TrainResult",
    "DivergenceError",
    "evaluate_mae",
    "select_best_epoch",
    "adaptation_step",
    "train_supervised",
    "train_adaptation",
]

CHECKPOINT_METRICS = ("train_mae", "train_loss")


class DivergenceError(RuntimeError):
    """Raised when a training loss stops being finite."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for both training procedures."""

    epochs: int = 200
    batch_size: int = 16
    learning_rate: float = 2e-4
    betas: Tuple[float, float] = (0.5, 0.999)
    domain_learning_rate: float = 1e-3
    domain_momentum: float = 0.9
    loss: LossConfig = LossConfig()
    seed: int = 0
    k: int = 9
    grl_scale: float = 1.0
    checkpoint_metric: str = "train_mae"
    domain_holdout_fraction: float = 0.2

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not (self.learning_rate > 0.0):
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (self.domain_learning_rate > 0.0):
            raise ValueError(
                f"domain_learning_rate must be > 0, got {self.domain_learning_rate}"
            )
        if not (0.0 <= self.domain_momentum < 1.0):
            raise ValueError(f"domain_momentum must be in [0, 1), got {self.domain_momentum}")
        for b in self.betas:
            if not (0.0 <= b < 1.0):
                raise ValueError(f"betas must be in [0, 1), got {self.betas}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.checkpoint_metric not in CHECKPOINT_METRICS:
            raise ValueError(
                f"checkpoint_metric must be one of {CHECKPOINT_METRICS}, "
                f"got {self.checkpoint_metric!r}"
            )
        if not (0.0 <= self.domain_holdout_fraction < 1.0):
            raise ValueError(
                f"domain_holdout_fraction must be in [0, 1), got {self.domain_holdout_fraction}"
            )


@dataclass(frozen=True, eq=False)
class ArrayDataset:
    """In-memory dataset: stacked frames, optional score labels, domain names."""

    frames: np.ndarray
    scores: Optional[np.ndarray]
    domains: Tuple[str, ...]

    def __post_init__(self) -> None:
        frames = np.ascontiguousarray(self.frames, dtype=np.float32)
        if frames.ndim != 4 or frames.shape[1] != 3:
            raise ValueError(f"expected (n, 3, h, w) frames, got {frames.shape}")
        object.__setattr__(self, "frames", frames)
        domains = tuple(str(d) for d in self.domains)
        if len(domains) != frames.shape[0]:
            raise ValueError(
                f"{frames.shape[0]} frames but {len(domains)} domain labels"
            )
        object.__setattr__(self, "domains", domains)
        if self.scores is not None:
            scores = np.ascontiguousarray(self.scores, dtype=np.float64)
            if scores.ndim != 2 or scores.shape[0] != frames.shape[0]:
                raise ValueError(
                    f"scores shape {scores.shape} does not align with {frames.shape[0]} frames"
                )
            if not np.all(np.isfinite(scores)):
                raise ValueError("scores must be finite")
            if scores.size and (scores.min() < 0.0 or scores.max() > 1.0):
                raise ValueError("scores must lie in [0, 1]")
            object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def labeled(self) -> bool:
        return self.scores is not None

    def without_labels(self) -> "ArrayDataset":
        return ArrayDataset(frames=self.frames, scores=None, domains=self.domains)

    def subset(self, indices: Sequence[int]) -> "ArrayDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return ArrayDataset(
            frames=self.frames[idx],
            scores=None if self.scores is None else self.scores[idx],
            domains=tuple(self.domains[i] for i in idx),
        )

    @classmethod
    def from_samples(
        cls, samples: Sequence[Tuple[ImageFrame, TraversabilityVector, str]]
    ) -> "ArrayDataset":
        if not samples:
            raise ValueError("no samples")
        frames = np.stack([frame.pixels for frame, _, _ in samples])
        scores = np.stack([vec.as_array() for _, vec, _ in samples])
        domains = tuple(domain for _, _, domain in samples)
        return cls(frames=frames, scores=scores, domains=domains)

    @classmethod
    def from_manifest(
        cls,
        manifest_path: Union[str, Path],
        annotations_dir: Optional[Union[str, Path]] = None,
        resize_shortest: Optional[int] = None,
    ) -> "ArrayDataset":
        """Load a manifest's frames, with labels when ``annotations_dir`` is given.

        Image paths are resolved relative to the manifest file.  All frames
        must share one shape after the optional resize, so they can be
        stacked into batches.
        """
        manifest_path = Path(manifest_path)
        records = data_io.load_manifest(manifest_path)
        if not records:
            raise ValueError(f"empty manifest: {manifest_path}")
        annotations = (
            data_io.load_annotations_dir(annotations_dir)
            if annotations_dir is not None
            else None
        )
        root = manifest_path.parent
        frames: List[np.ndarray] = []
        scores: List[np.ndarray] = []
        domains: List[str] = []
        for record in records:
            image_path = Path(record.image_path)
            if not image_path.is_absolute():
                image_path = root / image_path
            frame = data_io.load_image(image_path)
            if resize_shortest is not None:
                frame = data_io.resize_shortest_side(frame, resize_shortest)
            if frames and frame.pixels.shape != frames[0].shape:
                raise ValueError(
                    f"{record.image_path}: shape {frame.pixels.shape} differs from "
                    f"{frames[0].shape}; frames must stack into one batch"
                )
            frames.append(frame.pixels)
            domains.append(record.domain)
            if annotations is not None:
                stem = Path(record.image_path).stem
                if stem not in annotations:
                    raise ValueError(f"no annotation found for {record.image_path}")
                scores.append(
                    data_io.annotation_to_scores(annotations[stem]).as_array()
                )
        return cls(
            frames=np.stack(frames),
            scores=np.stack(scores) if annotations is not None else None,
            domains=tuple(domains),
        )


@dataclass(frozen=True)
class AdaptationSetup:
    """Adaptation inputs: labeled source set, image-only target set.

    Any labels on the target dataset are stripped at construction, so the
    training loop cannot read them even by accident; target annotations may
    still exist on disk for evaluation.
    """

    source: ArrayDataset
    target: ArrayDataset

    def __post_init__(self) -> None:
        if not self.source.labeled:
            raise ValueError("source dataset must be annotated")
        if len(self.source) == 0 or len(self.target) == 0:
            raise ValueError("source and target must be non-empty")
        object.__setattr__(self, "target", self.target.without_labels())


@dataclass(frozen=True)
class TrainResult:
    """Outcome of a training run.

    ``model`` carries the best epoch's weights; ``final_state`` /
    ``best_state`` are numpy snapshots of the last and best epochs, and
    ``best_optimizer_state`` is the main optimizer's state at the best epoch
    (for checkpointing).
    """

    model: TraversabilityNet
    best_epoch: int
    best_train_mae: float
    history: Tuple[Dict[str, Any], ...]
    final_state: Dict[str, np.ndarray]
    best_state: Dict[str, np.ndarray]
    best_optimizer_state: Dict[str, Any]


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _append_log(path: Optional[Union[str, Path]], record: Dict[str, Any]) -> None:
    if path is None:
        return
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def _snapshot(model: torch.nn.Module) -> Dict[str, np.ndarray]:
    return {
        name: tensor.detach().cpu().numpy().copy()
        for name, tensor in model.state_dict().items()
    }


def _restore(model: torch.nn.Module, state: Dict[str, np.ndarray]) -> None:
    model.load_state_dict(
        {name: torch.from_numpy(array.copy()) for name, array in state.items()}
    )


def evaluate_mae(
    model: torch.nn.Module,
    dataset: ArrayDataset,
    batch_size: Optional[int] = None,
) -> float:
    """Mean absolute error of clamped predictions over an annotated dataset."""
    if not dataset.labeled:
        raise ValueError("evaluation requires an annotated dataset")
    n = len(dataset)
    if n == 0:
        raise ValueError("cannot evaluate an empty dataset")
    if batch_size is None:
        batch_size = n
    was_training = getattr(model, "training", False)
    model.eval()
    total = 0.0
    count = 0
    with torch.no_grad():
        for start in range(0, n, batch_size):
            stop = min(start + batch_size, n)
            x = torch.from_numpy(dataset.frames[start:stop])
            out = model.forward_traversability(x).double()
            if not torch.all(torch.isfinite(out)):
                raise ValueError("model produced non-finite predictions")
            t = torch.from_numpy(dataset.scores[start:stop])
            if out.shape != t.shape:
                raise ValueError(
                    f"model emitted {tuple(out.shape)} scores, labels are {tuple(t.shape)}"
                )
            clamped = torch.clamp(out, 0.0, 1.0)
            total += (clamped - t).abs().sum().item()
            count += t.numel()
    if was_training:
        model.train()
    return total / count


def select_best_epoch(
    history: Sequence[Dict[str, Any]], metric: str = "train_mae"
) -> int:
    """Epoch with the lowest metric value; earliest epoch wins ties.

    Pure: re-running selection over a stored epoch log reproduces the
    training loop's choice.
    """
    if not history:
        raise ValueError("empty history")
    best = min(history, key=lambda rec: (rec[metric], rec["epoch"]))
    return int(best["epoch"])


def _check_finite(value: float, what: str) -> None:
    if not math.isfinite(value):
        raise DivergenceError(f"{what} is not finite: {value!r}")


def adaptation_step(
    model: TraversabilityNet,
    main_opt: torch.optim.Optimizer,
    domain_opt: torch.optim.Optimizer,
    source_x: torch.Tensor,
    source_t: torch.Tensor,
    mixed_x: torch.Tensor,
    mixed_labels: torch.Tensor,
    loss_config: LossConfig,
    *,
    include_regression: bool = True,
    include_domain: bool = True,
) -> Tuple[Optional[float], Optional[float]]:
    """One adaptation step; returns the (regression, domain) loss values.

    Gradients from both losses are accumulated at the current parameters,
    then the main optimizer steps the encoder + scoring layer and the domain
    optimizer steps the classifier.  The ``include_*`` switches exist so the
    parameter-flow invariants can be verified loss-by-loss; training always
    uses both.
    """
    model.train()
    main_opt.zero_grad(set_to_none=True)
    domain_opt.zero_grad(set_to_none=True)
    reg_value: Optional[float] = None
    dom_value: Optional[float] = None
    if include_regression:
        out = model.forward_traversability(source_x)
        reg_loss = safety_loss(
            source_t, out, loss_config, params=list(model.regression_parameters())
        )
        reg_value = reg_loss.item()
        _check_finite(reg_value, "regression loss")
        reg_loss.backward()
    if include_domain:
        features = model.shared_features(mixed_x)
        probabilities = model.forward_domain(features)
        dom_loss = domain_bce_loss(probabilities.double(), mixed_labels)
        dom_value = dom_loss.item()
        _check_finite(dom_value, "domain loss")
        dom_loss.backward()
    main_opt.step()
    domain_opt.step()
    return reg_value, dom_value


def _regression_batches(
    rng: np.random.Generator, n: int, batch_size: int
) -> List[np.ndarray]:
    order = rng.permutation(n)
    return [order[start : start + batch_size] for start in range(0, n, batch_size)]


def _build_model(config: TrainConfig) -> TraversabilityNet:
    return TraversabilityNet(k=config.k, grl_scale=config.grl_scale)


def train_supervised(
    dataset: ArrayDataset,
    config: TrainConfig,
    model: Optional[TraversabilityNet] = None,
    log_path: Optional[Union[str, Path]] = None,
) -> TrainResult:
    """Fit the regression objective on a fully annotated dataset.

    Returns the model restored to the epoch with the best training MAE.  A
    non-finite loss aborts with :class:`DivergenceError` naming the epoch and
    batch.
    """
    if not dataset.labeled:
        raise ValueError("train_supervised requires an annotated dataset")
    if len(dataset) == 0:
        raise ValueError("empty training set")
    torch.manual_seed(config.seed)
    if model is None:
        model = _build_model(config)
    main_opt = torch.optim.Adam(
        model.regression_parameters(), lr=config.learning_rate, betas=config.betas
    )
    reg_rng = np.random.default_rng(derive_seed(config.seed, "regression"))
    frames = torch.from_numpy(dataset.frames)
    scores = torch.from_numpy(dataset.scores)
    history: List[Dict[str, Any]] = []
    best_state: Optional[Dict[str, np.ndarray]] = None
    best_opt_state: Dict[str, Any] = {}
    best_value = math.inf
    best_epoch = -1
    best_mae = math.inf
    for epoch in range(config.epochs):
        model.train()
        epoch_loss = 0.0
        for batch_no, idx in enumerate(
            _regression_batches(reg_rng, len(dataset), config.batch_size)
        ):
            index = torch.from_numpy(idx)
            main_opt.zero_grad(set_to_none=True)
            out = model.forward_traversability(frames[index])
            loss = safety_loss(
                scores[index], out, config.loss,
                params=list(model.regression_parameters()),
            )
            value = loss.item()
            try:
                _check_finite(value, "training loss")
            except DivergenceError as exc:
                raise DivergenceError(f"epoch {epoch}, batch {batch_no}: {exc}") from exc
            loss.backward()
            main_opt.step()
            epoch_loss += value
        train_mae = evaluate_mae(model, dataset, batch_size=config.batch_size)
        record = {
            "epoch": epoch,
            "train_mae": train_mae,
            "train_loss": epoch_loss / len(dataset),
            "timestamp": _utc_now(),
        }
        history.append(record)
        _append_log(log_path, record)
        metric_value = record[config.checkpoint_metric]
        if metric_value < best_value:
            best_value = metric_value
            best_epoch = epoch
            best_mae = train_mae
            best_state = _snapshot(model)
            best_opt_state = copy.deepcopy(main_opt.state_dict())
    final_state = _snapshot(model)
    assert best_state is not None
    _restore(model, best_state)
    return TrainResult(
        model=model,
        best_epoch=best_epoch,
        best_train_mae=best_mae,
        history=tuple(history),
        final_state=final_state,
        best_state=best_state,
        best_optimizer_state=best_opt_state,
    )


def _domain_holdout_split(
    rng: np.random.Generator, n: int, fraction: float
) -> Tuple[np.ndarray, np.ndarray]:
    order = rng.permutation(n)
    held = max(1, int(round(n * fraction))) if fraction > 0.0 and n > 1 else 0
    held = min(held, n - 1)
    return order[:held], order[held:]


def _domain_accuracy(
    model: TraversabilityNet,
    frames: torch.Tensor,
    labels: torch.Tensor,
    batch_size: int,
) -> float:
    model.eval()
    correct = 0
    with torch.no_grad():
        for start in range(0, frames.shape[0], batch_size):
            stop = min(start + batch_size, frames.shape[0])
            p = model.forward_domain(model.shared_features(frames[start:stop]))
            predicted = (p > 0.5).double()
            correct += int((predicted == labels[start:stop]).sum().item())
    model.train()
    return correct / frames.shape[0]


def train_adaptation(
    setup: AdaptationSetup,
    config: TrainConfig,
    model: Optional[TraversabilityNet] = None,
    log_path: Optional[Union[str, Path]] = None,
) -> TrainResult:
    """Adversarial adaptation: regression on source, domain confusion on both.

    Each step pairs one source regression batch with one mixed
    half-source/half-target batch for the domain classifier (labels 0 =
    source, 1 = target).  Checkpoint selection follows the *source* training
    MAE.  Held-out source/target frames, never used for domain training,
    provide the per-epoch ``domain_acc`` diagnostic.
    """
    source, target = setup.source, setup.target
    torch.manual_seed(config.seed)
    if model is None:
        model = _build_model(config)
    main_opt = torch.optim.Adam(
        model.regression_parameters(), lr=config.learning_rate, betas=config.betas
    )
    domain_opt = torch.optim.SGD(
        model.domain_parameters(),
        lr=config.domain_learning_rate,
        momentum=config.domain_momentum,
    )
    reg_rng = np.random.default_rng(derive_seed(config.seed, "regression"))
    dom_rng = np.random.default_rng(derive_seed(config.seed, "domain"))
    src_frames = torch.from_numpy(source.frames)
    src_scores = torch.from_numpy(source.scores)
    tgt_frames = torch.from_numpy(target.frames)
    src_hold, src_pool = _domain_holdout_split(
        dom_rng, len(source), config.domain_holdout_fraction
    )
    tgt_hold, tgt_pool = _domain_holdout_split(
        dom_rng, len(target), config.domain_holdout_fraction
    )
    holdout_frames = torch.cat([src_frames[src_hold], tgt_frames[tgt_hold]])
    holdout_labels = torch.cat(
        [
            torch.zeros(len(src_hold), dtype=torch.float64),
            torch.ones(len(tgt_hold), dtype=torch.float64),
        ]
    )
    half = max(1, config.batch_size // 2)
    mixed_labels = torch.cat(
        [torch.zeros(half, dtype=torch.float64), torch.ones(half, dtype=torch.float64)]
    )
    history: List[Dict[str, Any]] = []
    best_state: Optional[Dict[str, np.ndarray]] = None
    best_opt_state: Dict[str, Any] = {}
    best_value = math.inf
    best_epoch = -1
    best_mae = math.inf
    for epoch in range(config.epochs):
        model.train()
        src_order = dom_rng.permutation(src_pool)
        tgt_order = dom_rng.permutation(tgt_pool)
        src_cursor = 0
        tgt_cursor = 0
        epoch_reg = 0.0
        epoch_dom = 0.0
        mixed_count = 0
        batches = _regression_batches(reg_rng, len(source), config.batch_size)
        for batch_no, idx in enumerate(batches):
            src_take = [
                src_order[(src_cursor + j) % len(src_order)] for j in range(half)
            ]
            tgt_take = [
                tgt_order[(tgt_cursor + j) % len(tgt_order)] for j in range(half)
            ]
            src_cursor += half
            tgt_cursor += half
            mixed_x = torch.cat(
                [src_frames[torch.tensor(src_take)], tgt_frames[torch.tensor(tgt_take)]]
            )
            index = torch.from_numpy(idx)
            try:
                reg_value, dom_value = adaptation_step(
                    model,
                    main_opt,
                    domain_opt,
                    src_frames[index],
                    src_scores[index],
                    mixed_x,
                    mixed_labels,
                    config.loss,
                )
            except DivergenceError as exc:
                raise DivergenceError(f"epoch {epoch}, batch {batch_no}: {exc}") from exc
            epoch_reg += reg_value
            epoch_dom += dom_value
            mixed_count += 2 * half
        train_mae = evaluate_mae(model, source, batch_size=config.batch_size)
        domain_acc = _domain_accuracy(
            model, holdout_frames, holdout_labels, config.batch_size
        )
        record = {
            "epoch": epoch,
            "train_mae": train_mae,
            "train_loss": epoch_reg / len(source),
            "domain_loss": epoch_dom / mixed_count,
            "domain_acc": domain_acc,
            "timestamp": _utc_now(),
        }
        history.append(record)
        _append_log(log_path, record)
        metric_value = record[config.checkpoint_metric]
        if metric_value < best_value:
            best_value = metric_value
            best_epoch = epoch
            best_mae = train_mae
            best_state = _snapshot(model)
            best_opt_state = copy.deepcopy(main_opt.state_dict())
    final_state = _snapshot(model)
    assert best_state is not None
    _restore(model, best_state)
    return TrainResult(
        model=model,
        best_epoch=best_epoch,
        best_train_mae=best_mae,
        history=tuple(history),
        final_state=final_state,
        best_state=best_state,
        best_optimizer_state=best_opt_state,
    )
