"""Text Restoration stage: detection, per-region diffusion restoration, mask
reassembly, the stage losses, and the two-phase training schedule."""

from ..regions import RegionPlacement, TextRegionInstance, placement_for_model, placement_native
from .detect import detect_regions, detect_regions_toy
from .losses import Stage1LossWeights, dice_loss, focal_loss, loss_stage1
from .restore import reassemble, restore_region
from .train import (
    PhasePlan,
    RegionCropDataset,
    Stage1TrainConfig,
    compute_step_loss,
    load_stage1_checkpoint,
    save_stage1_checkpoint,
    train_stage1,
    train_vae,
)

__all__ = [
    "TextRegionInstance",
    "RegionPlacement",
    "placement_for_model",
    "placement_native",
    "detect_regions",
    "detect_regions_toy",
    "focal_loss",
    "dice_loss",
    "Stage1LossWeights",
    "loss_stage1",
    "restore_region",
    "reassemble",
    "PhasePlan",
    "Stage1TrainConfig",
    "RegionCropDataset",
    "compute_step_loss",
    "train_stage1",
    "train_vae",
    "save_stage1_checkpoint",
    "load_stage1_checkpoint",
]
