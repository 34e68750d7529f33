"""Deterministic subsampled denoising for region restoration."""

from __future__ import annotations

import torch

from .schedule import NoiseSchedule, estimate_x0, uniform_timesteps
from .textcond import TextEmbedding
from .unet import DualUNet


@torch.no_grad()
def sample_region(
    z_cond: torch.Tensor,
    cond: TextEmbedding,
    model: DualUNet,
    sched: NoiseSchedule,
    steps: int = 50,
    generator: torch.Generator | None = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Denoise from unit Gaussian noise down to both branch latents at t=0.

    The conditioning latent stays concatenated at every step; no noise is added
    between steps, so the trajectory is a deterministic function of the initial
    draw. Returns (z_rgb_0, z_mask_0), each with z_cond's channel count.
    """
    if z_cond.ndim != 4:
        raise ValueError("z_cond must be (B, C, h, w)")
    b, c, h, w = z_cond.shape
    ts = uniform_timesteps(sched, steps)
    # The trajectory is kept in float64 (schedule precision); the model runs
    # in its own parameter dtype.
    z = torch.randn((b, 2 * c, h, w), generator=generator, dtype=torch.float32).double()
    ctx = cond.data if cond.data.ndim == 3 else cond.data[None].expand(b, -1, -1)
    for i, t in enumerate(ts):
        t_b = torch.full((b,), t, dtype=torch.long)
        z_in = torch.cat([z.to(z_cond.dtype), z_cond], dim=1)
        eps_rgb, eps_mask = model(z_in, t_b, ctx)
        eps = torch.cat([eps_rgb, eps_mask], dim=1)
        x0 = estimate_x0(z, eps, t_b, sched)
        if i + 1 < len(ts):
            ab_prev = sched.alpha_bar[ts[i + 1]]
            z = torch.sqrt(ab_prev) * x0 + torch.sqrt(1.0 - ab_prev) * eps
        else:
            z = x0
    z = z.to(z_cond.dtype)
    return z[:, :c], z[:, c:]
