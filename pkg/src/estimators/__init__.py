from .base import BaseEstimator, CoverageIncompleteError, EstimatorError, InsufficientCollisionsError
from .mmd import ClassicalMMDEstimator, LabelFreeMMD1Estimator, NonuniformMMDEstimator, UStatMMDEstimator
from .ustat import ustat_kernel, ustat_kernel_counts
from .wasserstein import NonuniformWassersteinEstimator, WassersteinEstimator
