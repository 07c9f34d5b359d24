"""Traversability network: encoder, regression head, and domain classifier.

The network maps an RGB frame to ``k`` per-section traversability scores.  A
pluggable encoder produces a 2048-channel feature map; the head normalizes it,
reduces it to 64 channels, pools to a fixed 8x8 grid, and flattens to a
4096-vector shared by two consumers: a linear regression layer emitting the
``k`` raw scores, and a domain classifier reached through a gradient-reversal
layer so that adversarial training pushes the encoder toward domain-invariant
features.

Raw head outputs are unbounded; clamp them with
:func:`travscore.core.clamp_scores` at inference time only, so training
gradients never saturate.
"""

from __future__ import annotations

import pickle
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Union

import numpy as np
import torch
from torch import nn

__all__ = [
    "GradientReversal",
    "TinyBackbone",
    "SegmentationBackboneEncoder",
    "DomainClassifier",
    "TraversabilityNet",
    "ENCODER_KINDS",
    "CHECKPOINT_VERSION",
    "save_checkpoint",
    "load_checkpoint",
    "peek_checkpoint",
]

#: Channel width every encoder must produce.
ENCODER_CHANNELS = 2048
#: Width of the flattened shared representation (64 channels x 8 x 8).
FEATURE_WIDTH = 4096

ENCODER_KINDS = ("tiny", "segmentation_backbone")

CHECKPOINT_VERSION = 1


class _ReverseGradient(torch.autograd.Function):
    """Identity on the forward pass; negated, scaled gradient on the way back."""

    @staticmethod
    def forward(ctx, x: torch.Tensor, scale: float) -> torch.Tensor:
        ctx.scale = scale
        return x.view_as(x)

    @staticmethod
    def backward(ctx, grad_output: torch.Tensor):
        return -ctx.scale * grad_output, None


class GradientReversal(nn.Module):
    """Gradient-reversal layer.

    Forward is the identity.  During backpropagation the upstream gradient is
    multiplied by ``-scale``, so the layers below are trained to *oppose*
    whatever objective sits above — the mechanism that makes the domain
    classifier an adversary of the encoder.
    """

    def __init__(self, scale: float = 1.0) -> None:
        super().__init__()
        if not (scale >= 0.0):
            raise ValueError(f"scale must be >= 0, got {scale}")
        self.scale = scale

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return _ReverseGradient.apply(x, self.scale)

    def extra_repr(self) -> str:
        return f"scale={self.scale}"


class TinyBackbone(nn.Module):
    """Small convolutional encoder honoring the 2048-channel contract.

    Three strided stages give an effective stride of 8 (with ceil-mode
    pooling), then a dilated 3x3 convolution enlarges the receptive field
    without further downsampling and a 1x1 projection widens to 2048
    channels.  A 128x227 input yields a 17x29 map, the same spatial contract
    as the full segmentation backbone, while staying fast enough to train on
    a CPU in seconds.
    """

    def __init__(self) -> None:
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv2d(3, 16, kernel_size=3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.MaxPool2d(kernel_size=3, stride=2, padding=1, ceil_mode=True),
            nn.Conv2d(16, 32, kernel_size=3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(32, 64, kernel_size=3, stride=1, padding=2, dilation=2),
            nn.ReLU(inplace=True),
            nn.Conv2d(64, ENCODER_CHANNELS, kernel_size=1),
            nn.ReLU(inplace=True),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 4 or x.shape[1] != 3:
            raise ValueError(
                f"expected an image batch of shape (n, 3, h, w), got {tuple(x.shape)}"
            )
        return self.stem(x)


class SegmentationBackboneEncoder(nn.Module):
    """Adapter wrapping an external pretrained encoder.

    The wrapped module must map an image batch to a feature map of shape
    ``(n, 2048, h, w)`` with a nonempty spatial extent; anything else is
    rejected so downstream shape bugs surface at the boundary.
    """

    def __init__(self, backbone: nn.Module) -> None:
        super().__init__()
        self.backbone = backbone

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = self.backbone(x)
        if not isinstance(out, torch.Tensor) or out.dim() != 4:
            raise ValueError("backbone must return a 4-d feature map")
        if out.shape[1] != ENCODER_CHANNELS:
            raise ValueError(
                f"backbone must produce {ENCODER_CHANNELS} channels, got {out.shape[1]}"
            )
        if out.shape[2] < 1 or out.shape[3] < 1:
            raise ValueError(
                f"backbone produced an empty spatial map: {tuple(out.shape)}"
            )
        return out


class DomainClassifier(nn.Module):
    """Adversarial domain discriminator over the shared 4096-feature.

    Gradient reversal, then 4096 -> 1024 -> 256 -> 1 fully-connected layers
    with rectifiers in between and a final sigmoid.  Output is one probability
    per sample that the input came from the target domain.
    """

    def __init__(self, grl_scale: float = 1.0) -> None:
        super().__init__()
        self.reversal = GradientReversal(scale=grl_scale)
        self.net = nn.Sequential(
            nn.Linear(FEATURE_WIDTH, 1024),
            nn.ReLU(inplace=True),
            nn.Linear(1024, 256),
            nn.ReLU(inplace=True),
            nn.Linear(256, 1),
            nn.Sigmoid(),
        )

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        if features.dim() != 2 or features.shape[1] != FEATURE_WIDTH:
            raise ValueError(
                f"expected (n, {FEATURE_WIDTH}) features, got {tuple(features.shape)}"
            )
        return self.net(self.reversal(features)).squeeze(-1)


class TraversabilityNet(nn.Module):
    """Full model: encoder, regression head, and adversarial domain branch.

    Parameters are exposed in three groups: :meth:`trunk_parameters` (the
    shared encoder up to the 4096 tap), :meth:`regression_parameters` (trunk
    plus the final scoring layer — the weights the regression objective
    regularizes and its optimizer updates), and :meth:`domain_parameters`
    (the classifier alone, stepped by its own optimizer).
    """

    def __init__(
        self,
        k: int = 9,
        encoder_kind: str = "tiny",
        backbone: Optional[nn.Module] = None,
        grl_scale: float = 1.0,
    ) -> None:
        super().__init__()
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if encoder_kind == "tiny":
            if backbone is not None:
                raise ValueError("the tiny encoder does not take an external backbone")
            encoder: nn.Module = TinyBackbone()
        elif encoder_kind == "segmentation_backbone":
            if backbone is None:
                raise ValueError(
                    "encoder_kind 'segmentation_backbone' requires a backbone module"
                )
            encoder = SegmentationBackboneEncoder(backbone)
        else:
            raise ValueError(
                f"unknown encoder_kind {encoder_kind!r}; expected one of {ENCODER_KINDS}"
            )
        self.k = k
        self.encoder_kind = encoder_kind
        self.encoder = encoder
        self.head_bn = nn.BatchNorm2d(ENCODER_CHANNELS, momentum=0.1)
        self.reduce = nn.Conv2d(ENCODER_CHANNELS, 64, kernel_size=1)
        self.pool = nn.AdaptiveAvgPool2d((8, 8))
        self.score_fc = nn.Linear(FEATURE_WIDTH, k)
        self.domain_classifier = DomainClassifier(grl_scale=grl_scale)

    # -- forward paths ----------------------------------------------------

    def shared_features(self, frames: torch.Tensor) -> torch.Tensor:
        """Flattened 4096-vector feeding both the scorer and the classifier."""
        if frames.dim() != 4:
            raise ValueError(
                f"expected an image batch of shape (n, c, h, w), got {tuple(frames.shape)}"
            )
        fmap = self.encoder(frames)
        if fmap.shape[2] < 1 or fmap.shape[3] < 1:
            raise ValueError(
                f"encoder output collapsed to an empty map for input {tuple(frames.shape)}"
            )
        z = torch.relu(self.reduce(self.head_bn(fmap)))
        return torch.flatten(self.pool(z), start_dim=1)

    def forward_traversability(self, frames: torch.Tensor) -> torch.Tensor:
        """Raw (unclamped) per-section scores, shape ``(n, k)``."""
        return self.score_fc(self.shared_features(frames))

    def forward_domain(self, features: torch.Tensor) -> torch.Tensor:
        """Target-domain probability per sample, shape ``(n,)``."""
        return self.domain_classifier(features)

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        return self.forward_traversability(frames)

    # -- parameter groups --------------------------------------------------

    def trunk_parameters(self) -> Iterator[nn.Parameter]:
        """Shared encoder weights: backbone, head normalization, reduction."""
        yield from self.encoder.parameters()
        yield from self.head_bn.parameters()
        yield from self.reduce.parameters()

    def regression_parameters(self) -> Iterator[nn.Parameter]:
        """Trunk plus the final scoring layer: everything the regression loss trains."""
        yield from self.trunk_parameters()
        yield from self.score_fc.parameters()

    def domain_parameters(self) -> Iterator[nn.Parameter]:
        """Domain-classifier weights only."""
        yield from self.domain_classifier.parameters()

    def architecture(self) -> Dict[str, Any]:
        """Descriptor embedded in checkpoints to guard against mismatched loads."""
        return {
            "k": self.k,
            "encoder_kind": self.encoder_kind,
            "grl_scale": self.domain_classifier.reversal.scale,
        }


# -- checkpointing ---------------------------------------------------------


def _tensors_to_numpy(obj: Any) -> Any:
    if isinstance(obj, torch.Tensor):
        return obj.detach().cpu().numpy()
    if isinstance(obj, dict):
        return {key: _tensors_to_numpy(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        converted = [_tensors_to_numpy(value) for value in obj]
        return type(obj)(converted)
    return obj


def _numpy_to_tensors(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return torch.from_numpy(obj.copy())
    if isinstance(obj, dict):
        return {key: _numpy_to_tensors(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        converted = [_numpy_to_tensors(value) for value in obj]
        return type(obj)(converted)
    return obj


def save_checkpoint(
    path: Union[str, Path],
    model: TraversabilityNet,
    *,
    epoch: int,
    seed: int,
    optimizer_state: Optional[Dict[str, Any]] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> None:
    """Write a versioned checkpoint with byte-deterministic serialization.

    Tensors are stored as numpy arrays inside a plain pickled dict, so two
    saves of the same state produce identical files — a property the stock
    zip-based tensor serializer does not guarantee.  The write is atomic
    (temp file + rename).
    """
    path = Path(path)
    payload: Dict[str, Any] = {
        "version": CHECKPOINT_VERSION,
        "architecture": model.architecture(),
        "model_state": _tensors_to_numpy(model.state_dict()),
        "optimizer_state": _tensors_to_numpy(optimizer_state)
        if optimizer_state is not None
        else None,
        "epoch": int(epoch),
        "seed": int(seed),
        "extra": extra,
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        pickle.dump(payload, fh, protocol=4)
    tmp.replace(path)


def peek_checkpoint(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a checkpoint payload without restoring it into a model.

    Useful for discovering the saved architecture before constructing the
    model to load into.
    """
    with open(Path(path), "rb") as fh:
        payload = pickle.load(fh)
    version = payload.get("version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(
            f"unsupported checkpoint version {version!r} (expected {CHECKPOINT_VERSION})"
        )
    return payload


def load_checkpoint(path: Union[str, Path], model: TraversabilityNet) -> Dict[str, Any]:
    """Restore ``model`` from ``path`` and return the checkpoint payload.

    The payload's ``optimizer_state`` (if any) has its arrays converted back
    to tensors, ready for ``optimizer.load_state_dict``.  Loading into a
    model whose architecture differs from the one saved is an error.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    version = payload.get("version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(
            f"unsupported checkpoint version {version!r} (expected {CHECKPOINT_VERSION})"
        )
    saved_arch = payload["architecture"]
    current_arch = model.architecture()
    if (saved_arch["k"], saved_arch["encoder_kind"]) != (
        current_arch["k"],
        current_arch["encoder_kind"],
    ):
        raise ValueError(
            f"checkpoint architecture {saved_arch} does not match model {current_arch}"
        )
    state = {
        name: torch.from_numpy(np.asarray(array).copy())
        for name, array in payload["model_state"].items()
    }
    model.load_state_dict(state)
    if payload.get("optimizer_state") is not None:
        payload = dict(payload)
        payload["optimizer_state"] = _numpy_to_tensors(payload["optimizer_state"])
    return payload
