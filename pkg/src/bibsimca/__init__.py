"""Stochastic (SIMCA) and deterministic (BCS) scoring of research performance."""

__version__ = "0.1.0"

from .bcs import BcsConfig, bcs, bcs_scores, positive_mean_standardize
from .config import PipelineConfig
from .indicators import (INDICATOR_NAMES, IndicatorVector, compute_indicators,
                         fractional_contribution)
from .pipeline import run_pipeline, write_bundle
from .simca import (build_excellence_class, fit_class_model, kennard_stone_split,
                    modeling_power, score, sensitivity)
