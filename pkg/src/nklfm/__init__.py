"""Probability that a genome is a local fitness maximum in the NK model."""
from nklfm._mc import Estimate
from nklfm.model import (
    DistributionKind,
    FullLandscape,
    InfeasibleSizeError,
    ModelParams,
    NeighborhoodSample,
    cdf_sum,
    count_lfm,
    genome_fitness,
    h_event,
    sample_landscape,
    sample_neighborhood,
    zero_is_lfm,
)

__all__ = [
    "DistributionKind",
    "Estimate",
    "FullLandscape",
    "InfeasibleSizeError",
    "ModelParams",
    "NeighborhoodSample",
    "cdf_sum",
    "count_lfm",
    "genome_fitness",
    "h_event",
    "sample_landscape",
    "sample_neighborhood",
    "zero_is_lfm",
]
