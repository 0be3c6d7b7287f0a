from sqlalchemy import create_engine
from sqlalchemy.exc import IntegrityError
from sqlalchemy.orm import sessionmaker
from contextlib import contextmanager
import pandas as pd

import hashlib
import json
import logging
from pathlib import Path
from typing import Iterable, List

from . import models
from ..validation import TrialOutcome

logger = logging.getLogger(__name__)

def run_key(config: dict) -> str:
    """Stable hash of a resolved sweep config; equal configs share stored trials."""
    canonical = json.dumps(config, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

def sqlite_url(output_dir: str | Path, filename: str = "trials.db") -> str:
    path = Path(output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return f"sqlite:///{path / filename}"

class ResultStore:
    """
    Trial outcomes of complexity sweeps, keyed by (run_key, n, trial).

    A rerun of the same config finds its finished trials here and skips them.
    """

    def __init__(self, engine: str = 'sqlite:///trials.db'):
        self.engine = create_engine(engine)
        models.Base.metadata.create_all(self.engine)
        self.Session = sessionmaker(
            bind=self.engine,
            autocommit=False,
            autoflush=False,
            expire_on_commit=False,
        )

    @contextmanager
    def session_scope(self):
        session = self.Session()
        try:
            yield session
            session.commit()
        except Exception:
            session.rollback()
            raise
        finally:
            session.close()

    def query_trials(self, key: str, n: int | None = None) -> List[TrialOutcome]:
        with self.session_scope() as session:
            query = session.query(models.TrialRecord).filter(models.TrialRecord.run_key == key)
            if n is not None:
                query = query.filter(models.TrialRecord.n == n)
            rows = query.order_by(models.TrialRecord.n, models.TrialRecord.trial).all()
            return [self._to_outcome(row) for row in rows]

    def completed(self, key: str) -> set[tuple[int, int]]:
        with self.session_scope() as session:
            rows = (
                session.query(models.TrialRecord.n, models.TrialRecord.trial)
                .filter(models.TrialRecord.run_key == key)
                .all()
            )
            return {(n, trial) for n, trial in rows}

    def insert_trial(self, key: str, metric: str, k: int | None, outcome: TrialOutcome) -> bool:
        """Store one outcome; returns False when (key, n, trial) is already stored."""
        try:
            with self.session_scope() as session:
                session.add(
                    models.TrialRecord(
                        run_key=key,
                        metric=metric,
                        k=k,
                        **outcome.model_dump(),
                    )
                )
        except IntegrityError:
            logger.debug(f"Trial N={outcome.n} #{outcome.trial} already stored for run {key}")
            return False
        return True

    def insert_trials(self, key: str, metric: str, k: int | None, outcomes: Iterable[TrialOutcome]) -> int:
        return sum(self.insert_trial(key, metric, k, outcome) for outcome in outcomes)

    def to_frame(self, key: str) -> pd.DataFrame:
        outcomes = self.query_trials(key)
        return pd.DataFrame([o.model_dump() for o in outcomes])

    def delete_run(self, key: str) -> int:
        with self.session_scope() as session:
            deleted = session.query(models.TrialRecord).filter(models.TrialRecord.run_key == key).delete()
        logger.info(f"Deleted {deleted} stored trials of run {key}")
        return deleted

    @staticmethod
    def _to_outcome(row: models.TrialRecord) -> TrialOutcome:
        return TrialOutcome(
            n=row.n,
            trial=row.trial,
            m=row.m,
            flagged=row.flagged,
            d_true=row.d_true,
            seed=row.seed,
            probes=row.probes,
            message=row.message,
        )

    def close(self):
        try:
            if self.engine:
                self.engine.dispose()
                logger.debug("Result store engine disposed.")
        except Exception as e:
            logger.warning(f"Error disposing result store engine: {e}")
