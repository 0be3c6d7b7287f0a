import numpy as np
import pandas as pd

import logging
from pathlib import Path
from typing import Iterable

from .config import CSV_HEADER, FLOAT_FORMAT

logger = logging.getLogger(__name__)

def derive_seed(base_seed: int, worker_index: int) -> int:
    """Seed of one worker stream: base_seed XOR worker_index."""
    if base_seed < 0 or worker_index < 0:
        raise ValueError(f"Seeds and worker indices must be non-negative. Got {base_seed}, {worker_index}")
    return int(base_seed) ^ int(worker_index)

def trial_rng(seed: int, *indices: int) -> np.random.Generator:
    """Generator keyed by (seed, *indices); independent of scheduling order."""
    return np.random.default_rng([int(seed), *[int(i) for i in indices]])

def split_budget(total: int, n_parts: int) -> list[int]:
    """
    Split a sample budget into n_parts disjoint sub-budgets.

    The remainder goes to the last part, so sum(parts) == total always.
    """
    if total < 0:
        raise ValueError(f"Budget must be >= 0. Got {total}")
    if n_parts < 1:
        raise ValueError(f"Number of parts must be >= 1. Got {n_parts}")

    base = total // n_parts
    parts = [base] * n_parts
    parts[-1] += total - base * n_parts
    return parts

def write_csv(df: pd.DataFrame, path: str | Path) -> Path:
    """Write a versioned CSV: header comment line, then the frame."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(CSV_HEADER + "\n")
        df.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"Wrote {len(df)} rows to {path}")
    return path

def read_csv(path: str | Path, **kwargs) -> pd.DataFrame:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        first = f.readline().rstrip("\n")
    if first != CSV_HEADER:
        raise ValueError(f"{path} is not a qmetric-lab v1 file. First line: {first!r}")
    return pd.read_csv(path, comment="#", **kwargs)

def split_list_parameter(x: Iterable[str] | None):
    """Accept either repeated values or a single comma-separated value."""
    if x is None:
        return None
    x = list(x)
    if len(x) == 1 and "," in x[0]:
        return [v.strip() for v in x[0].split(",") if v.strip()]
    return x
