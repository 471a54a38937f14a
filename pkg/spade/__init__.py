"""
SpaDe: sparse-to-dense depth with log uncertainty, its two-stage trainer and checkpoints.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .network import PARTITIONS, SpadeNet, SpadeOutput, pad_to_multiple, predict_batch, spade_forward
from .trainer import TrainState, train_spade_stage1, train_spade_stage2

__all__ = [
    'PARTITIONS', 'SpadeNet', 'SpadeOutput', 'TrainState', 'load_checkpoint', 'pad_to_multiple',
    'predict_batch', 'save_checkpoint', 'spade_forward', 'train_spade_stage1', 'train_spade_stage2',
]
