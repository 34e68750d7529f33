"""Compact UNet denoisers with transcript cross-attention.

DualUNet is the restoration-stage model: one shared trunk, two zero-initialized
output heads (appearance and mask). The enhancement stage reuses the same trunk
with a single head plus an additive control branch.
"""

from __future__ import annotations

import dataclasses
import math

import torch
import torch.nn as nn


@dataclasses.dataclass
class UNetConfig:
    latent_channels: int = 4
    width: int = 64
    ctx_dim: int = 64
    max_len: int = 8

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _gn(ch: int) -> nn.GroupNorm:
    return nn.GroupNorm(min(8, ch), ch)


def zero_module(m: nn.Module) -> nn.Module:
    for p in m.parameters():
        nn.init.zeros_(p)
    return m


def sinusoidal_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    half = dim // 2
    freqs = torch.exp(-math.log(10000.0) * torch.arange(half, dtype=torch.float32) / max(half - 1, 1))
    args = t.float()[:, None] * freqs[None]
    return torch.cat([torch.sin(args), torch.cos(args)], dim=1)


class ResBlock(nn.Module):
    def __init__(self, cin: int, cout: int, t_dim: int):
        super().__init__()
        self.norm1 = _gn(cin)
        self.conv1 = nn.Conv2d(cin, cout, 3, padding=1)
        self.t_proj = nn.Linear(t_dim, cout)
        self.norm2 = _gn(cout)
        self.conv2 = nn.Conv2d(cout, cout, 3, padding=1)
        self.skip = nn.Conv2d(cin, cout, 1) if cin != cout else nn.Identity()
        self.act = nn.SiLU()

    def forward(self, x: torch.Tensor, t_emb: torch.Tensor) -> torch.Tensor:
        h = self.conv1(self.act(self.norm1(x)))
        h = h + self.t_proj(t_emb)[:, :, None, None]
        h = self.conv2(self.act(self.norm2(h)))
        return h + self.skip(x)


class CrossAttention(nn.Module):
    """Spatial queries attending over the transcript embedding.

    Key/value/output projections carry no bias, so the all-zero null embedding
    contributes exactly nothing.
    """

    def __init__(self, ch: int, ctx_dim: int, heads: int = 2):
        super().__init__()
        self.heads = heads
        self.norm = _gn(ch)
        self.q = nn.Conv2d(ch, ch, 1, bias=False)
        self.k = nn.Linear(ctx_dim, ch, bias=False)
        self.v = nn.Linear(ctx_dim, ch, bias=False)
        self.out = nn.Conv2d(ch, ch, 1, bias=False)

    def forward(self, x: torch.Tensor, ctx: torch.Tensor) -> torch.Tensor:
        b, c, h, w = x.shape
        hd = self.heads
        q = self.q(self.norm(x)).reshape(b, hd, c // hd, h * w).transpose(2, 3)  # b, hd, hw, d
        k = self.k(ctx).reshape(b, -1, hd, c // hd).transpose(1, 2)  # b, hd, L, d
        v = self.v(ctx).reshape(b, -1, hd, c // hd).transpose(1, 2)
        att = torch.softmax(q @ k.transpose(2, 3) / math.sqrt(c // hd), dim=-1)
        out = (att @ v).transpose(2, 3).reshape(b, c, h, w)
        return x + self.out(out)


class UNetTrunk(nn.Module):
    """Two-level encoder/decoder producing width-`w` features.

    An optional control dict adds residuals at the input, post-downsample, and
    mid-block fusion points (the enhancement stage's control branch).
    """

    def __init__(self, in_channels: int, width: int, ctx_dim: int):
        super().__init__()
        w = width
        self.t_dim = 2 * w
        self.t_mlp = nn.Sequential(nn.Linear(w, self.t_dim), nn.SiLU(), nn.Linear(self.t_dim, self.t_dim))
        self.in_conv = nn.Conv2d(in_channels, w, 3, padding=1)
        self.down1 = ResBlock(w, w, self.t_dim)
        self.down2 = ResBlock(w, w, self.t_dim)
        self.downsample = nn.Conv2d(w, 2 * w, 3, stride=2, padding=1)
        self.mid1 = ResBlock(2 * w, 2 * w, self.t_dim)
        self.mid_attn = CrossAttention(2 * w, ctx_dim)
        self.mid2 = ResBlock(2 * w, 2 * w, self.t_dim)
        self.up_conv = nn.Conv2d(2 * w, w, 3, padding=1)
        self.up1 = ResBlock(2 * w, w, self.t_dim)
        self.up2 = ResBlock(w, w, self.t_dim)
        self.out_norm = _gn(w)
        self.act = nn.SiLU()
        self.width = w

    def time_embedding(self, t: torch.Tensor) -> torch.Tensor:
        emb = sinusoidal_embedding(t, self.width).to(self.in_conv.weight.dtype)
        return self.t_mlp(emb)

    def encode_stages(self, x: torch.Tensor, t_emb: torch.Tensor, ctx: torch.Tensor) -> dict[str, torch.Tensor]:
        h0 = self.in_conv(x)
        h1 = self.down2(self.down1(h0, t_emb), t_emb)
        h2 = self.downsample(h1)
        m = self.mid2(self.mid_attn(self.mid1(h2, t_emb), ctx), t_emb)
        return {"in": h0, "down": h2, "mid": m}

    def forward(
        self,
        x: torch.Tensor,
        t_emb: torch.Tensor,
        ctx: torch.Tensor,
        control: dict[str, torch.Tensor] | None = None,
    ) -> torch.Tensor:
        if x.shape[-1] % 2 or x.shape[-2] % 2:
            raise ValueError(f"latent dims must be even, got {tuple(x.shape[-2:])}")
        h0 = self.in_conv(x)
        if control is not None:
            h0 = h0 + control["in"]
        h1 = self.down2(self.down1(h0, t_emb), t_emb)
        h2 = self.downsample(h1)
        if control is not None:
            h2 = h2 + control["down"]
        m = self.mid1(h2, t_emb)
        m = self.mid_attn(m, ctx)
        m = self.mid2(m, t_emb)
        if control is not None:
            m = m + control["mid"]
        u = self.up_conv(nn.functional.interpolate(m, scale_factor=2, mode="nearest"))
        u = self.up1(torch.cat([u, h1], dim=1), t_emb)
        u = self.up2(u, t_emb)
        return self.act(self.out_norm(u))


class DualUNet(nn.Module):
    """Noise predictor with separate appearance and mask output heads."""

    def __init__(self, cfg: UNetConfig):
        super().__init__()
        self.cfg = cfg
        c = cfg.latent_channels
        self.trunk = UNetTrunk(3 * c, cfg.width, cfg.ctx_dim)
        self.rgb_head = zero_module(nn.Conv2d(cfg.width, c, 3, padding=1))
        self.mask_head = zero_module(nn.Conv2d(cfg.width, c, 3, padding=1))

    def forward(self, z_cat: torch.Tensor, t: torch.Tensor, ctx: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        c = self.cfg.latent_channels
        if z_cat.shape[1] != 3 * c:
            raise ValueError(f"expected {3 * c} input channels, got {z_cat.shape[1]}")
        feats = self.trunk(z_cat, self.trunk.time_embedding(t), ctx)
        return self.rgb_head(feats), self.mask_head(feats)

    def head_parameters(self) -> list[nn.Parameter]:
        return list(self.rgb_head.parameters()) + list(self.mask_head.parameters())
