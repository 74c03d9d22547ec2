"""
Model Package
Red IQCaption360: backbone NAT, AFA/MSFS, DSPN, VPFS y QSPN
"""

from .config import BackboneConfig, ModelConfig, N_SITUATIONS
from .backbone import PatchEmbed, Backbone, NatBlock
from .afa import AdaptiveFeatureAggregation
from .heads import DistortionSituationHead, ViewportFeatureSelector, QualityRegressionHead, SelectionResult
from .network import IQCaption360, ModelOutput, ForwardResult
from .checkpoint import save_checkpoint, load_checkpoint, read_checkpoint

__all__ = [
    'BackboneConfig',
    'ModelConfig',
    'N_SITUATIONS',
    'PatchEmbed',
    'Backbone',
    'NatBlock',
    'AdaptiveFeatureAggregation',
    'DistortionSituationHead',
    'ViewportFeatureSelector',
    'QualityRegressionHead',
    'SelectionResult',
    'IQCaption360',
    'ModelOutput',
    'ForwardResult',
    'save_checkpoint',
    'load_checkpoint',
    'read_checkpoint',
]
