"""Hybrid-field channel modelling and compressed-sensing channel estimation for XL-MIMO arrays."""

__version__ = "0.1.0"

from .array_geometry import ArrayConfig, far_steering, near_steering, rayleigh_distance
from .channel_model import PathComponent, ChannelRealization, sample_paths, synthesize
from .dictionaries import Dictionary, GridPoint, dft_dictionary, polar_dictionary
from .estimators import (
    EstimatorReport,
    SparseEstimate,
    ff_omp_estimate,
    hf_omp_estimate,
    ls_estimate,
    mmse_estimate,
    nf_omp_estimate,
    omp,
)
from .measurement import MeasurementRecord, observe, random_pilots, snr_to_sigma2
