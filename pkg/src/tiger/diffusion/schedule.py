"""Linear DDPM coefficient table and the forward/backward latent algebra."""

from __future__ import annotations

import dataclasses

import torch


@dataclasses.dataclass
class NoiseSchedule:
    T: int
    beta: torch.Tensor
    alpha: torch.Tensor
    alpha_bar: torch.Tensor

    @property
    def sigma(self) -> torch.Tensor:
        return torch.sqrt(1.0 - self.alpha_bar)

    def to_json(self) -> dict:
        return {"T": self.T, "beta_start": float(self.beta[0]), "beta_end": float(self.beta[-1])}


def make_schedule(T: int, beta_start: float = 1e-4, beta_end: float = 0.02) -> NoiseSchedule:
    """Coefficients are kept in double precision; the latent algebra follows
    torch promotion, so roundtrips stay exact even for float32 inputs."""
    if not (0.0 < beta_start < beta_end < 1.0):
        raise ValueError(f"need 0 < beta_start < beta_end < 1, got ({beta_start}, {beta_end})")
    if T < 2:
        raise ValueError("T must be at least 2")
    beta = torch.linspace(beta_start, beta_end, T, dtype=torch.float64)
    alpha = 1.0 - beta
    alpha_bar = torch.cumprod(alpha, dim=0)
    return NoiseSchedule(T=T, beta=beta, alpha=alpha, alpha_bar=alpha_bar)


def _gather(coeff: torch.Tensor, t: torch.Tensor, ndim: int) -> torch.Tensor:
    out = coeff.to(t.device)[t]
    return out.reshape(t.shape + (1,) * (ndim - t.ndim))


def _check_t(t: torch.Tensor | int, T: int) -> torch.Tensor:
    t = torch.as_tensor(t, dtype=torch.long)
    if (t < 0).any() or (t >= T).any():
        raise ValueError(f"timestep out of range [0, {T})")
    return t


def forward_noise(z0: torch.Tensor, t: torch.Tensor | int, eps: torch.Tensor, sched: NoiseSchedule) -> torch.Tensor:
    """z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps."""
    if z0.shape != eps.shape:
        raise ValueError(f"shape mismatch: {tuple(z0.shape)} vs {tuple(eps.shape)}")
    t = _check_t(t, sched.T)
    ab = _gather(sched.alpha_bar, t, z0.ndim)
    return torch.sqrt(ab) * z0 + torch.sqrt(1.0 - ab) * eps


def estimate_x0(z_t: torch.Tensor, eps_pred: torch.Tensor, t: torch.Tensor | int, sched: NoiseSchedule) -> torch.Tensor:
    """Invert forward noising given a noise prediction."""
    if z_t.shape != eps_pred.shape:
        raise ValueError(f"shape mismatch: {tuple(z_t.shape)} vs {tuple(eps_pred.shape)}")
    t = _check_t(t, sched.T)
    ab = _gather(sched.alpha_bar, t, z_t.ndim)
    return (z_t - torch.sqrt(1.0 - ab) * eps_pred) / torch.sqrt(ab)


def sigma_for_t(t: int, sched: NoiseSchedule) -> float:
    """Noise magnitude sqrt(1 - abar_t) used by the one-step enhancement rule."""
    t = int(_check_t(t, sched.T))
    return float(torch.sqrt(1.0 - sched.alpha_bar[t]))


def uniform_timesteps(sched: NoiseSchedule, steps: int) -> list[int]:
    """Descending uniform subsequence of timesteps ending at stride - 1."""
    if steps < 1 or steps > sched.T:
        raise ValueError(f"steps must lie in [1, {sched.T}], got {steps}")
    if sched.T % steps != 0:
        raise ValueError(f"steps={steps} must divide T={sched.T}")
    stride = sched.T // steps
    return list(range(sched.T - 1, -1, -stride))
