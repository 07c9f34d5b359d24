"""Training objectives: safety-weighted regression and domain discrimination.

The regression loss penalizes squared error everywhere, then adds an extra
``alpha``-weighted squared term wherever the prediction exceeds the label.
Overestimating traversability is the failure mode that drives a robot into an
obstacle, so it costs more than undershooting by the same amount.  An optional
L2 penalty over a caller-supplied parameter list provides weight decay that is
explicit in the loss value rather than hidden inside the optimizer.

All losses use sum reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import torch

__all__ = [
    "LossConfig",
    "mse_loss",
    "safety_loss",
    "domain_bce_loss",
    "l2_penalty",
]

#: Probability clamp applied inside the binary cross entropy to avoid log(0).
BCE_EPS = 1e-7


@dataclass(frozen=True)
class LossConfig:
    """Weights for the regression objective.

    ``alpha`` scales the extra penalty on overestimates, ``lam`` scales the L2
    term, and ``safety_enabled`` switches the asymmetric term off entirely
    (useful for ablations where ``alpha`` should be ignored rather than set
    to zero).
    """

    alpha: float = 1.5
    lam: float = 5e-4
    safety_enabled: bool = True

    def __post_init__(self) -> None:
        if not (self.alpha >= 0.0):
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not (self.lam >= 0.0):
            raise ValueError(f"lam must be >= 0, got {self.lam}")


def _check_same_shape(t: torch.Tensor, t_hat: torch.Tensor) -> None:
    if t.shape != t_hat.shape:
        raise ValueError(
            f"label/prediction shape mismatch: {tuple(t.shape)} vs {tuple(t_hat.shape)}"
        )


def mse_loss(t: torch.Tensor, t_hat: torch.Tensor) -> torch.Tensor:
    """Sum of squared errors between labels ``t`` and predictions ``t_hat``."""
    _check_same_shape(t, t_hat)
    diff = t_hat - t
    return (diff * diff).sum()


def l2_penalty(params: Iterable[torch.Tensor]) -> torch.Tensor:
    """Sum of squared entries over every tensor in ``params``."""
    total: Optional[torch.Tensor] = None
    for p in params:
        term = (p * p).sum()
        total = term if total is None else total + term
    if total is None:
        raise ValueError("params is empty")
    return total


def safety_loss(
    t: torch.Tensor,
    t_hat: torch.Tensor,
    config: LossConfig,
    params: Optional[Sequence[torch.Tensor]] = None,
) -> torch.Tensor:
    """Safety-weighted regression loss.

    Computes ``sum((t_hat - t)^2 + alpha * max(0, t_hat - t)^2)`` plus
    ``lam * l2_penalty(params)``.  ``params`` is required whenever
    ``config.lam > 0`` so a nonzero weight penalty can never be silently
    dropped.
    """
    _check_same_shape(t, t_hat)
    diff = t_hat - t
    loss = (diff * diff).sum()
    if config.safety_enabled and config.alpha > 0.0:
        over = torch.clamp(diff, min=0.0)
        loss = loss + config.alpha * (over * over).sum()
    if config.lam > 0.0:
        if params is None:
            raise ValueError("config.lam > 0 requires the params to regularize")
        loss = loss + config.lam * l2_penalty(params)
    return loss


def domain_bce_loss(p: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Binary cross entropy (sum reduction) for the domain discriminator.

    ``p`` holds predicted probabilities of the *target* domain and ``labels``
    holds 0.0 for source-domain samples and 1.0 for target-domain samples.
    Probabilities are clamped to ``[BCE_EPS, 1 - BCE_EPS]`` before the log so
    saturated sigmoids cannot produce infinities.
    """
    _check_same_shape(p, labels)
    if torch.any(p < 0.0) or torch.any(p > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    binary = (labels == 0.0) | (labels == 1.0)
    if not torch.all(binary):
        raise ValueError("domain labels must be 0.0 (source) or 1.0 (target)")
    q = torch.clamp(p, min=BCE_EPS, max=1.0 - BCE_EPS)
    return -(labels * torch.log(q) + (1.0 - labels) * torch.log1p(-q)).sum()
