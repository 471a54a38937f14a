"""
Downstream depth-completion backbones: contract, registry, URL training and plug-and-play evaluation.
"""

from .checkpoint import load_backbone, save_backbone
from .factory import BackboneFactory
from .interface import BackboneInterface
from .plug_and_play import BASELINE, PLUG_AND_PLAY, plug_and_play_eval
from .predictors import plug_and_play_model_fn, sparse_backbone_model_fn, spade_model_fn, trained_model_fn
from .reference import ReferenceBackbone, ReferenceSparseBackbone, backbone_predict, reference_backbone_forward
from .trainer import BackboneState, select_tags, train_backbone, train_url
from .url import MODES, UrlDiagnostics, UrlModel, freeze, stratified_refinement, url_forward

__all__ = [
    'BASELINE', 'BackboneFactory', 'BackboneInterface', 'BackboneState', 'MODES', 'PLUG_AND_PLAY',
    'ReferenceBackbone', 'ReferenceSparseBackbone', 'UrlDiagnostics', 'UrlModel', 'backbone_predict',
    'freeze', 'load_backbone', 'plug_and_play_eval', 'plug_and_play_model_fn', 'reference_backbone_forward',
    'save_backbone', 'select_tags', 'sparse_backbone_model_fn', 'spade_model_fn', 'stratified_refinement',
    'train_backbone', 'train_url', 'trained_model_fn', 'url_forward',
]
