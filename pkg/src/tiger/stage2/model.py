"""Glyph-mask-conditioned denoiser: a main trunk plus a control branch.

The control branch mirrors the trunk's encoder, consumes the channel-stacked
(LR latent, mask latent), and injects residuals through zero-initialized 1x1
fusion convolutions, so a fresh model ignores the mask entirely and the main
head (also zero-initialized) predicts zero noise.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from ..diffusion.unet import CrossAttention, ResBlock, UNetConfig, UNetTrunk, zero_module


class ControlBranch(nn.Module):
    def __init__(self, in_channels: int, width: int, ctx_dim: int, t_dim: int):
        super().__init__()
        w = width
        self.in_conv = nn.Conv2d(in_channels, w, 3, padding=1)
        self.down1 = ResBlock(w, w, t_dim)
        self.down2 = ResBlock(w, w, t_dim)
        self.downsample = nn.Conv2d(w, 2 * w, 3, stride=2, padding=1)
        self.mid1 = ResBlock(2 * w, 2 * w, t_dim)
        self.mid_attn = CrossAttention(2 * w, ctx_dim)
        self.mid2 = ResBlock(2 * w, 2 * w, t_dim)
        self.fuse_in = zero_module(nn.Conv2d(w, w, 1))
        self.fuse_down = zero_module(nn.Conv2d(2 * w, 2 * w, 1))
        self.fuse_mid = zero_module(nn.Conv2d(2 * w, 2 * w, 1))

    def forward(self, x: torch.Tensor, t_emb: torch.Tensor, ctx: torch.Tensor) -> dict[str, torch.Tensor]:
        h0 = self.in_conv(x)
        h1 = self.down2(self.down1(h0, t_emb), t_emb)
        h2 = self.downsample(h1)
        m = self.mid2(self.mid_attn(self.mid1(h2, t_emb), ctx), t_emb)
        return {"in": self.fuse_in(h0), "down": self.fuse_down(h2), "mid": self.fuse_mid(m)}


class ControlModel(nn.Module):
    """Enhancement-stage noise predictor conditioned on the glyph-mask latent."""

    def __init__(self, cfg: UNetConfig):
        super().__init__()
        self.cfg = cfg
        c = cfg.latent_channels
        self.trunk = UNetTrunk(c, cfg.width, cfg.ctx_dim)
        self.head = zero_module(nn.Conv2d(cfg.width, c, 3, padding=1))
        self.control = ControlBranch(2 * c, cfg.width, cfg.ctx_dim, self.trunk.t_dim)
        self._clone_trunk_weights()

    def _clone_trunk_weights(self) -> None:
        # Control branch starts as a copy of the trunk encoder where shapes
        # match (everything except its widened input convolution).
        src = self.trunk.state_dict()
        dst = self.control.state_dict()
        with torch.no_grad():
            for name, tensor in dst.items():
                if name.startswith(("fuse_", "in_conv")):
                    continue
                if name in src and src[name].shape == tensor.shape:
                    tensor.copy_(src[name])

    def null_context(self, batch: int, dtype=None) -> torch.Tensor:
        dtype = dtype or next(self.parameters()).dtype
        return torch.zeros(batch, self.cfg.max_len, self.cfg.ctx_dim, dtype=dtype)

    def forward(self, z_l: torch.Tensor, z_m: torch.Tensor, t: torch.Tensor, ctx: torch.Tensor | None = None) -> torch.Tensor:
        if z_l.shape != z_m.shape:
            raise ValueError(f"latent geometry mismatch: {tuple(z_l.shape)} vs {tuple(z_m.shape)}")
        if ctx is None:
            ctx = self.null_context(z_l.shape[0], dtype=z_l.dtype)
        t_emb = self.trunk.time_embedding(t)
        control = self.control(torch.cat([z_l, z_m], dim=1), t_emb, ctx)
        feats = self.trunk(z_l, t_emb, ctx, control=control)
        return self.head(feats)
