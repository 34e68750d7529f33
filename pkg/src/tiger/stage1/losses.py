"""Restoration-stage objective: denoising loss plus segmentation-oriented loss.

The total is lambda_td * L_td + lambda_seg * L_seg, where L_td is the noise
MSE over both output branches and L_seg compares the decoded x0 estimate of
the mask branch against the ground-truth mask with MSE, focal, and dice terms.
"""

from __future__ import annotations

import dataclasses

import torch

from ..diffusion.schedule import NoiseSchedule, estimate_x0, forward_noise
from ..diffusion.textcond import CharTextEncoder
from ..diffusion.unet import DualUNet
from ..diffusion.vae import ToyVAE

CLAMP_EPS = 1e-6


@dataclasses.dataclass
class Stage1LossWeights:
    lambda_td: float = 1.0
    lambda_seg: float = 0.1
    lambda_focal: float = 20.0
    lambda_dice: float = 1.0

    def __post_init__(self):
        for name in ("lambda_td", "lambda_seg", "lambda_focal", "lambda_dice"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def focal_loss(pred: torch.Tensor, target: torch.Tensor, gamma: float = 2.0) -> torch.Tensor:
    """Mean of -(1 - p_t)^gamma log(p_t); p_t is the probability of the true class."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    p = pred.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
    p_t = p * target + (1.0 - p) * (1.0 - target)
    return (-((1.0 - p_t) ** gamma) * torch.log(p_t)).mean()


def dice_loss(pred: torch.Tensor, target: torch.Tensor, eps: float = 1.0) -> torch.Tensor:
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    p = pred.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
    inter = (p * target).sum()
    return 1.0 - (2.0 * inter + eps) / (p.sum() + target.sum() + eps)


def loss_stage1(
    batch: dict,
    model: DualUNet,
    text_encoder: CharTextEncoder,
    vae: ToyVAE,
    sched: NoiseSchedule,
    weights: Stage1LossWeights,
    generator: torch.Generator | None = None,
) -> tuple[torch.Tensor, dict[str, float]]:
    """One training objective evaluation on a region batch.

    batch: {"lr": (B,3,32,128), "hr": (B,3,32,128), "mask": (B,3,32,128) 3-chan
    replicated, "mask1": (B,1,32,128), "texts": list[str]}. The VAE is treated
    as frozen: latents are detached, but gradients flow through the decoder to
    the mask-branch noise prediction.
    """
    dtype = next(model.parameters()).dtype
    lr = batch["lr"].to(dtype)
    hr = batch["hr"].to(dtype)
    mask3 = batch["mask"].to(dtype)
    mask1 = batch["mask1"].to(dtype)
    b = lr.shape[0]

    with torch.no_grad():
        z_cond = vae.encode(lr)
        z0 = torch.cat([vae.encode(hr), vae.encode(mask3)], dim=1)

    t = torch.randint(0, sched.T, (b,), generator=generator)
    eps = torch.randn(z0.shape, generator=generator, dtype=torch.float32).to(dtype)
    z_t = forward_noise(z0, t, eps, sched).to(dtype)

    ctx = text_encoder.embed_batch(batch["texts"]).to(dtype)
    eps_rgb, eps_mask = model(torch.cat([z_t, z_cond], dim=1), t, ctx)
    l_td = ((eps - torch.cat([eps_rgb, eps_mask], dim=1)) ** 2).mean()

    c = model.cfg.latent_channels
    z_mask_t = z_t[:, c:]
    z_mask0_hat = estimate_x0(z_mask_t, eps_mask, t, sched).to(dtype)
    x_mask0_hat = vae.decode(z_mask0_hat).mean(dim=1, keepdim=True)
    l_mse = ((x_mask0_hat - mask1) ** 2).mean()
    l_focal = focal_loss(x_mask0_hat, mask1)
    l_dice = dice_loss(x_mask0_hat, mask1)
    l_seg = l_mse + weights.lambda_focal * l_focal + weights.lambda_dice * l_dice

    total = weights.lambda_td * l_td + weights.lambda_seg * l_seg
    parts = {
        "l_td": float(l_td),
        "l_seg": float(l_seg),
        "seg_mse": float(l_mse),
        "seg_focal": float(l_focal),
        "seg_dice": float(l_dice),
        "total": float(total),
    }
    return total, parts
