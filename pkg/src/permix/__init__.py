"""Mixing and mixing rates of ``x -> m x mod 1`` composed with permutations
of N equal subintervals.

Modules
-------
permcore
    permutations, block decompositions and the mixing classifiers
specmat
    transition, circulant and Fredholm matrices, spectra and rates
census
    exhaustive and sampled counts over S_N, closed forms and bounds
cli
    the ``permix`` command
"""

__version__ = "0.1.0"

from .permcore import (  # noqa: E402
    BlockDecomposition,
    MapFamily,
    MixingStatus,
    MixingVerdict,
    Permutation,
    classify_mixing_fast,
    classify_mixing_oracle,
    parse_permutation,
)
from .specmat import RateReport, Spectrum, lambda_sigma, worst_permutation, worst_rate_bound  # noqa: E402
from .census import CensusRow, MCEstimate, mc_slowdown, slowdown_census  # noqa: E402
