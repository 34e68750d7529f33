"""Two-phase restoration training: all parameters on synthetic+real data first,
then head-frozen refinement on synthetic data only. The VAE is pretrained for a
fixed budget and stays frozen during diffusion training.

Every optimization step derives its batch and noise draws from
(seed, phase, step), so runs are reproducible and a reloaded checkpoint
reproduces the next step's loss exactly.
"""

from __future__ import annotations

import dataclasses
import logging
from pathlib import Path

import numpy as np
import torch

from .. import imaging
from ..corpus.build import ManifestRecord
from ..diffusion.checkpoint import load_checkpoint, save_checkpoint
from ..diffusion.schedule import NoiseSchedule, make_schedule
from ..diffusion.textcond import CharTextEncoder
from ..diffusion.unet import DualUNet, UNetConfig
from ..diffusion.vae import ToyVAE, image_to_tensor
from ..regions import placement_for_model
from .losses import Stage1LossWeights, loss_stage1

log = logging.getLogger(__name__)


@dataclasses.dataclass
class PhasePlan:
    phase1_epochs: float = 8.0
    phase2_epochs: float = 2.0

    def __post_init__(self):
        if self.phase1_epochs < 0 or self.phase2_epochs < 0:
            raise ValueError("epoch counts must be non-negative")


@dataclasses.dataclass
class Stage1TrainConfig:
    lr: float = 5e-5
    batch_size: int = 16
    latent_channels: int = 4
    unet_width: int = 64
    ctx_dim: int = 64
    max_len: int = 8
    T: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    vae_width: int = 48
    vae_lr: float = 1e-3
    vae_steps: int = 1200
    seed: int = 0


class RegionCropDataset:
    """All region crops of a manifest, rectified to the model size, in memory."""

    def __init__(self, records: list[ManifestRecord], root, max_len: int = 8):
        root = Path(root)
        lrs, hrs, masks, texts, real = [], [], [], [], []
        for rec in records:
            lr_img = imaging.load_image(root / rec.lr)
            hr_img = imaging.load_image(root / rec.hr)
            mask_img = imaging.load_image(root / rec.mask)
            for region in rec.regions:
                pl = placement_for_model(region)
                lrs.append(image_to_tensor(pl.extract(lr_img)))
                hrs.append(image_to_tensor(pl.extract(hr_img)))
                masks.append(image_to_tensor(pl.extract(mask_img)))
                texts.append(region.transcript[:max_len])
                real.append(rec.is_real)
        if not lrs:
            raise ValueError("no regions found in the given records")
        self.lr = torch.cat(lrs)
        self.hr = torch.cat(hrs)
        self.mask = torch.cat(masks)
        self.mask1 = self.mask.mean(dim=1, keepdim=True)
        self.texts = texts
        self.is_real = np.array(real, dtype=bool)

    def __len__(self) -> int:
        return self.lr.shape[0]

    def batch(self, idx: np.ndarray) -> dict:
        t = torch.from_numpy(np.ascontiguousarray(idx)).long()
        return {
            "lr": self.lr[t],
            "hr": self.hr[t],
            "mask": self.mask[t],
            "mask1": self.mask1[t],
            "texts": [self.texts[i] for i in idx],
        }


def _step_seeds(seed: int, phase: int, step: int) -> tuple[np.random.Generator, torch.Generator]:
    ss = np.random.SeedSequence([seed, phase, step])
    np_rng = np.random.default_rng(ss)
    g = torch.Generator()
    g.manual_seed(int(ss.generate_state(2)[1]))
    return np_rng, g


def step_batch_indices(pool: np.ndarray, batch_size: int, seed: int, phase: int, step: int) -> np.ndarray:
    np_rng, _ = _step_seeds(seed, phase, step)
    return np_rng.choice(pool, size=min(batch_size, len(pool)), replace=len(pool) < batch_size)


def compute_step_loss(
    model: DualUNet,
    text_encoder: CharTextEncoder,
    vae: ToyVAE,
    sched: NoiseSchedule,
    weights: Stage1LossWeights,
    dataset: RegionCropDataset,
    pool: np.ndarray,
    cfg: Stage1TrainConfig,
    phase: int,
    step: int,
) -> tuple[torch.Tensor, dict[str, float]]:
    """Loss of one seeded step; pure in (parameters, dataset, phase, step)."""
    idx = step_batch_indices(pool, cfg.batch_size, cfg.seed, phase, step)
    _, g = _step_seeds(cfg.seed, phase, step)
    return loss_stage1(dataset.batch(idx), model, text_encoder, vae, sched, weights, generator=g)


def train_vae(dataset: RegionCropDataset, cfg: Stage1TrainConfig) -> ToyVAE:
    """Reconstruction pretraining over HR crops, masks, and LR crops."""
    torch.manual_seed(cfg.seed)
    vae = ToyVAE(latent_channels=cfg.latent_channels, width=cfg.vae_width)
    opt = torch.optim.Adam(vae.parameters(), lr=cfg.vae_lr)
    pool = torch.cat([dataset.hr, dataset.mask, dataset.lr])
    n = pool.shape[0]
    for step in range(cfg.vae_steps):
        np_rng, g = _step_seeds(cfg.seed, 0, step)
        idx = torch.from_numpy(np_rng.choice(n, size=min(cfg.batch_size, n), replace=n < cfg.batch_size))
        opt.zero_grad()
        loss, rec = vae.reconstruction_loss(pool[idx], generator=g)
        loss.backward()
        opt.step()
        if step % 200 == 0:
            log.info("vae step %d: loss=%.5f rec=%.5f", step, float(loss), float(rec))
    np_rng, _ = _step_seeds(cfg.seed, 0, cfg.vae_steps)
    sample = pool[torch.from_numpy(np_rng.choice(n, size=min(64, n), replace=False))]
    scale = vae.calibrate_latent_scale(sample)
    log.info("vae latent scale set to %.4f", scale)
    vae.eval()
    for p in vae.parameters():
        p.requires_grad_(False)
    return vae


def _steps_for(epochs: float, pool_size: int, batch_size: int) -> int:
    return int(round(epochs * max(1, int(np.ceil(pool_size / batch_size)))))


def train_stage1(
    records: list[ManifestRecord],
    root,
    cfg: Stage1TrainConfig,
    plan: PhasePlan,
    weights: Stage1LossWeights,
    out_dir,
    vae: ToyVAE | None = None,
    dataset: RegionCropDataset | None = None,
) -> dict:
    """Run both phases and write a checkpoint per phase; returns paths and loss logs."""
    if not records:
        raise ValueError("no manifest records given")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = dataset or RegionCropDataset(records, root, max_len=cfg.max_len)
    charset = _charset_of(records)
    sched = make_schedule(cfg.T, cfg.beta_start, cfg.beta_end)

    if vae is None:
        vae = train_vae(dataset, cfg)

    torch.manual_seed(cfg.seed)
    unet_cfg = UNetConfig(latent_channels=cfg.latent_channels, width=cfg.unet_width, ctx_dim=cfg.ctx_dim, max_len=cfg.max_len)
    model = DualUNet(unet_cfg)
    enc = CharTextEncoder(charset, max_len=cfg.max_len, dim=cfg.ctx_dim)

    all_idx = np.arange(len(dataset))
    synthetic_idx = all_idx[~dataset.is_real]
    result = {"loss_log": {1: [], 2: []}, "checkpoints": {}}

    for phase in (1, 2):
        pool = all_idx if phase == 1 else synthetic_idx
        if phase == 2:
            for p in model.head_parameters():
                p.requires_grad_(False)
        params = [p for p in list(model.parameters()) + list(enc.parameters()) if p.requires_grad]
        opt = torch.optim.AdamW(params, lr=cfg.lr)
        epochs = plan.phase1_epochs if phase == 1 else plan.phase2_epochs
        n_steps = _steps_for(epochs, len(pool), cfg.batch_size)
        for step in range(n_steps):
            opt.zero_grad()
            loss, parts = compute_step_loss(model, enc, vae, sched, weights, dataset, pool, cfg, phase, step)
            loss.backward()
            opt.step()
            result["loss_log"][phase].append(parts)
            if step % 100 == 0:
                log.info("stage1 phase %d step %d/%d: %s", phase, step, n_steps, parts)
        ck = save_stage1_checkpoint(out_dir / f"stage1_phase{phase}", model, enc, vae, cfg, charset, phase)
        result["checkpoints"][phase] = ck
    return result


def _charset_of(records: list[ManifestRecord]) -> str:
    chars = sorted({c for rec in records for r in rec.regions for c in r.transcript})
    return "".join(chars)


def save_stage1_checkpoint(
    path, model: DualUNet, enc: CharTextEncoder, vae: ToyVAE, cfg: Stage1TrainConfig, charset: str, phase: int
) -> Path:
    tensors = {}
    for prefix, module in (("unet.", model), ("text.", enc), ("vae.", vae)):
        for k, v in module.state_dict().items():
            tensors[prefix + k] = v
    meta = {
        "kind": "stage1",
        "phase": phase,
        "charset": charset,
        "config": dataclasses.asdict(cfg),
    }
    return save_checkpoint(path, tensors, meta)


def load_stage1_checkpoint(path) -> dict:
    tensors, meta = load_checkpoint(path)
    cfg = Stage1TrainConfig(**meta["config"])
    model = DualUNet(UNetConfig(latent_channels=cfg.latent_channels, width=cfg.unet_width, ctx_dim=cfg.ctx_dim, max_len=cfg.max_len))
    enc = CharTextEncoder(meta["charset"], max_len=cfg.max_len, dim=cfg.ctx_dim)
    vae = ToyVAE(latent_channels=cfg.latent_channels, width=cfg.vae_width)
    for prefix, module in (("unet.", model), ("text.", enc), ("vae.", vae)):
        module.load_state_dict({k[len(prefix):]: v for k, v in tensors.items() if k.startswith(prefix)})
    vae.eval()
    for p in vae.parameters():
        p.requires_grad_(False)
    sched = make_schedule(cfg.T, cfg.beta_start, cfg.beta_end)
    return {"model": model, "text_encoder": enc, "vae": vae, "sched": sched, "cfg": cfg, "meta": meta}
