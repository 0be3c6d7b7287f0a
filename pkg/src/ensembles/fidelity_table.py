import numpy as np

import logging
from pathlib import Path
from typing import Tuple

from ..config import get_tolerances
from ..quantum import fidelity_matrix
from .base import BaseEnsembleGenerator, Ensemble, FidelityTable

logger = logging.getLogger(__name__)

def from_fidelity_table(table: FidelityTable) -> Tuple[Ensemble, Ensemble]:
    """
    Realize a square cross-fidelity table by two uniform N-state ensembles.

    The states live in dimension 2N: psi_i = e_i and
    phi_j = sum_i sqrt(X_ij) e_i + sqrt(1 - sum_i X_ij) f_j, with f_j the
    second block of basis vectors. Requires every X_ij < 1/N.
    """
    x = table.entries
    n_rows, n_cols = x.shape
    if n_rows != n_cols:
        raise ValueError(f"Fidelity table must be square. Got {n_rows}x{n_cols}")
    n = n_rows

    violations = np.argwhere(x >= 1.0 / n)
    if violations.size:
        i, j = violations[0]
        raise ValueError(f"Entry ({i}, {j}) = {x[i, j]} violates X_ij < 1/N = {1.0 / n}")

    d = 2 * n
    psi = np.zeros((n, d), dtype=np.complex128)
    psi[np.arange(n), np.arange(n)] = 1.0

    phi = np.zeros((n, d), dtype=np.complex128)
    phi[:, :n] = np.sqrt(x.T)
    phi[np.arange(n), n + np.arange(n)] = np.sqrt(1.0 - x.sum(axis=0))

    overlaps = fidelity_matrix(phi, phi)
    np.fill_diagonal(overlaps, 0.0)
    j, k = np.unravel_index(np.argmax(overlaps), overlaps.shape)
    limit = 1.0 - get_tolerances().distinct_fidelity
    if overlaps[j, k] >= limit:
        raise ValueError(
            f"Columns {j} and {k} of the fidelity table give indistinguishable states "
            f"(fidelity {overlaps[j, k]:.12g} >= {limit}); the table has no realization by distinct states"
        )

    return Ensemble(psi, kind=table.row_id), Ensemble(phi, kind=table.col_id)

class FidelityTableGenerator(BaseEnsembleGenerator):
    """Reads a cross-fidelity table from CSV (or takes the matrix) and returns the realizing pair."""

    generator_name = "fidelity-table"
    is_random = False

    def __init__(self, table: str | list | None = None, path: str | None = None):
        if (table is None) == (path is None):
            raise ValueError("fidelity-table needs exactly one of 'table' or 'path'")
        super().__init__(table=table, path=path)

    @classmethod
    def sized(cls, n: int, /, **params):
        raise ValueError("A fidelity-table ensemble has a fixed size and cannot be swept over N")

    def load_table(self) -> FidelityTable:
        if self.params["path"] is not None:
            path = Path(self.params["path"])
            return FidelityTable.from_csv(path, row_id=f"{path.stem}:rows", col_id=f"{path.stem}:cols")
        return FidelityTable(np.asarray(self.params["table"], dtype=np.float64))

    def generate(self, rng=None) -> Tuple[Ensemble, Ensemble]:
        return from_fidelity_table(self.load_table())
