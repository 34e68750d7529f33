"""Enhancement-stage objective: image loss plus Sobel edge loss.

total = lambda_l2 * MSE + lambda_perceptual * Perceptual + lambda_edge * L_edge,
where L_edge compares the signed Sobel gradient planes of the target and the
prediction. The perceptual slot defaults to the internal structural proxy and
accepts any differentiable scorer with the same contract.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

from .. import imaging
from ..diffusion.schedule import NoiseSchedule
from ..diffusion.vae import ToyVAE
from ..perceptual import structural_dissimilarity
from .enhance import EnhanceConfig, enhance_latent
from .model import ControlModel


def sobel_planes(x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Per-channel 3x3 Sobel responses with replicate padding, differentiable."""
    c = x.shape[1]
    kx = torch.tensor(imaging.SOBEL_X, dtype=x.dtype, device=x.device).expand(c, 1, 3, 3)
    ky = torch.tensor(imaging.SOBEL_Y, dtype=x.dtype, device=x.device).expand(c, 1, 3, 3)
    xp = F.pad(x, (1, 1, 1, 1), mode="replicate")
    return F.conv2d(xp, kx, groups=c), F.conv2d(xp, ky, groups=c)


def edge_loss(x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
    gx1, gy1 = sobel_planes(x)
    gx2, gy2 = sobel_planes(y)
    return 0.5 * (((gx1 - gx2) ** 2).mean() + ((gy1 - gy2) ** 2).mean())


def loss_stage2(
    batch: dict,
    model: ControlModel,
    vae: ToyVAE,
    sched: NoiseSchedule,
    cfg: EnhanceConfig,
    perceptual=None,
) -> tuple[torch.Tensor, dict[str, float]]:
    """Objective on an aligned (x_L, x_m, x_H) batch of crops.

    batch: {"lr": (B,3,H,W), "mask": (B,3,H,W), "hr": (B,3,H,W)}. The VAE is
    frozen; gradients reach the control model through the decoded prediction.
    """
    scorer = perceptual if perceptual is not None else structural_dissimilarity
    dtype = next(model.parameters()).dtype
    x_l = batch["lr"].to(dtype)
    x_m = batch["mask"].to(dtype)
    x_h = batch["hr"].to(dtype)
    if x_l.shape != x_h.shape:
        raise ValueError(f"shape mismatch: {tuple(x_l.shape)} vs {tuple(x_h.shape)}")

    with torch.no_grad():
        z_l = vae.encode(x_l)
        z_m = vae.encode(x_m)
    z_h = enhance_latent(z_l, z_m, cfg.t, model, sched, cfg.rescale_by_alpha)
    x_hat = vae.decode(z_h.to(dtype))

    l_mse = ((x_h - x_hat) ** 2).mean()
    l_perc = scorer(x_h, x_hat)
    l_img = cfg.lambda_l2 * l_mse + cfg.lambda_perceptual * l_perc
    l_edge = edge_loss(x_h, x_hat)
    total = l_img + cfg.lambda_edge * l_edge
    parts = {
        "l_img": float(l_img),
        "mse": float(l_mse),
        "perceptual": float(l_perc),
        "l_edge": float(l_edge),
        "total": float(total),
        "lambda_l2": cfg.lambda_l2,
        "lambda_perceptual": cfg.lambda_perceptual,
        "lambda_edge": cfg.lambda_edge,
    }
    return total, parts
