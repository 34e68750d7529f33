"""Small convolutional VAE: spatial factor 4, shared by both pipeline stages.

Masks travel through the same model as 3-channel replications; decoded masks
are channel-averaged back to a single plane.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn


def _gn(ch: int) -> nn.GroupNorm:
    return nn.GroupNorm(min(8, ch), ch)


class ToyVAE(nn.Module):
    def __init__(self, latent_channels: int = 4, width: int = 48, kl_weight: float = 1e-6):
        super().__init__()
        self.latent_channels = latent_channels
        self.kl_weight = kl_weight
        # Fixed latent rescaling applied after training so diffusion sees
        # roughly unit-variance latents; stored in checkpoints.
        self.register_buffer("latent_scale", torch.ones(()))
        w = width
        self.encoder = nn.Sequential(
            nn.Conv2d(3, w, 3, padding=1), _gn(w), nn.SiLU(),
            nn.Conv2d(w, 2 * w, 3, stride=2, padding=1), _gn(2 * w), nn.SiLU(),
            nn.Conv2d(2 * w, 2 * w, 3, padding=1), _gn(2 * w), nn.SiLU(),
            nn.Conv2d(2 * w, 2 * w, 3, stride=2, padding=1), _gn(2 * w), nn.SiLU(),
            nn.Conv2d(2 * w, 2 * latent_channels, 3, padding=1),
        )
        self.decoder = nn.Sequential(
            nn.Conv2d(latent_channels, 2 * w, 3, padding=1), _gn(2 * w), nn.SiLU(),
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.Conv2d(2 * w, 2 * w, 3, padding=1), _gn(2 * w), nn.SiLU(),
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.Conv2d(2 * w, w, 3, padding=1), _gn(w), nn.SiLU(),
            nn.Conv2d(w, 3, 3, padding=1),
        )

    def _check_dims(self, x: torch.Tensor) -> None:
        if x.shape[-1] % 4 or x.shape[-2] % 4:
            raise ValueError(f"image dims must be divisible by 4, got {tuple(x.shape[-2:])}")

    def encode_params(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        self._check_dims(x)
        mean, logvar = self.encoder(x).chunk(2, dim=1)
        return mean, logvar.clamp(-20, 10)

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        """Deterministic (mean) latent, rescaled to the unit-variance convention."""
        return self.encode_params(x)[0] * self.latent_scale

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.decoder(z / self.latent_scale))

    def reconstruction_loss(self, x: torch.Tensor, generator: torch.Generator | None = None) -> tuple[torch.Tensor, torch.Tensor]:
        mean, logvar = self.encode_params(x)
        noise = torch.randn(mean.shape, generator=generator, dtype=mean.dtype)
        z = mean + torch.exp(0.5 * logvar) * noise
        rec = torch.sigmoid(self.decoder(z))
        rec_loss = ((rec - x) ** 2).mean()
        kl = 0.5 * (mean**2 + logvar.exp() - 1.0 - logvar).mean()
        return rec_loss + self.kl_weight * kl, rec_loss

    @torch.no_grad()
    def calibrate_latent_scale(self, sample: torch.Tensor) -> float:
        """Set latent_scale so encoded means have unit std on the given batch."""
        self.latent_scale.fill_(1.0)
        mean, _ = self.encode_params(sample)
        std = float(mean.std())
        self.latent_scale.fill_(1.0 / max(std, 1e-6))
        return float(self.latent_scale)


def image_to_tensor(img: np.ndarray) -> torch.Tensor:
    """HWC (or HW mask, replicated to 3 channels) in [0,1] -> (1, 3, H, W) float32."""
    arr = np.asarray(img, dtype=np.float32)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    return torch.from_numpy(arr.transpose(2, 0, 1))[None]


def tensor_to_image(t: torch.Tensor) -> np.ndarray:
    """(1, 3, H, W) -> HWC float64 in [0,1]."""
    arr = t.detach().squeeze(0).clamp(0, 1).numpy().astype(np.float64)
    return arr.transpose(1, 2, 0)


def tensor_to_mask(t: torch.Tensor) -> np.ndarray:
    """(1, 3, H, W) decoded mask -> single channel via channel mean."""
    return tensor_to_image(t).mean(axis=2)
