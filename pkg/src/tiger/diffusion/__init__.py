"""Generative core: schedules, latent algebra, VAE, text conditioning, UNet, sampler."""

from .checkpoint import load_checkpoint, load_module_state, module_state, save_checkpoint
from .sampler import sample_region
from .schedule import (
    NoiseSchedule,
    estimate_x0,
    forward_noise,
    make_schedule,
    sigma_for_t,
    uniform_timesteps,
)
from .textcond import CharTextEncoder, TextEmbedding
from .unet import DualUNet, UNetConfig, UNetTrunk, zero_module
from .vae import ToyVAE, image_to_tensor, tensor_to_image, tensor_to_mask

__all__ = [
    "NoiseSchedule",
    "make_schedule",
    "forward_noise",
    "estimate_x0",
    "sigma_for_t",
    "uniform_timesteps",
    "CharTextEncoder",
    "TextEmbedding",
    "DualUNet",
    "UNetConfig",
    "UNetTrunk",
    "zero_module",
    "ToyVAE",
    "image_to_tensor",
    "tensor_to_image",
    "tensor_to_mask",
    "sample_region",
    "save_checkpoint",
    "load_checkpoint",
    "module_state",
    "load_module_state",
]
