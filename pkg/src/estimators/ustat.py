"""
U-statistic kernel for the k-th power of a label's fidelity.

For T outcomes of which a are +1 and b = T - a are -1, the average product
over all k-subsets is e_k(r) / C(T, k) = sum_j C(a, j) C(b, k-j) (-1)^(k-j) / C(T, k).
The weights C(a, j) C(b, k-j) / C(T, k) form a hypergeometric pmf, which scipy
evaluates in log space, so large T and k do not overflow.
"""
import numpy as np
from scipy.stats import hypergeom

import logging
from typing import Sequence

logger = logging.getLogger(__name__)

def ustat_kernel_counts(plus: np.ndarray, total: np.ndarray, k: int) -> np.ndarray:
    """Kernel values for arrays of (+1 count, total count); every total must be >= k."""
    if k < 1:
        raise ValueError(f"k must be a positive integer. Got {k}")
    plus = np.atleast_1d(np.asarray(plus, dtype=np.int64))
    total = np.atleast_1d(np.asarray(total, dtype=np.int64))
    if plus.shape != total.shape:
        raise ValueError(f"Count arrays differ in shape: {plus.shape} vs {total.shape}")
    if np.any(total < k):
        raise ValueError(f"Every label needs T >= k={k}. Got min T = {total.min()}")
    if np.any((plus < 0) | (plus > total)):
        raise ValueError("+1 counts must lie in [0, T]")

    j = np.arange(k + 1)
    weights = hypergeom.pmf(j[None, :], total[:, None], plus[:, None], k)
    signs = np.where((k - j) % 2 == 0, 1.0, -1.0)
    return np.clip(weights @ signs, -1.0, 1.0)

def ustat_kernel(rs: Sequence[int], k: int) -> float:
    """Unbiased estimate of X**k from T >= k outcomes r in {-1, +1}."""
    rs = np.asarray(rs)
    if rs.size and not np.all(np.isin(rs, (-1, 1))):
        raise ValueError("SWAP outcomes must be -1 or +1")
    if rs.size < k:
        raise ValueError(f"U-statistic kernel needs T >= k. Got T={rs.size}, k={k}")
    return float(ustat_kernel_counts(int((rs > 0).sum()), rs.size, k)[0])
