from sqlalchemy import Boolean, Column, Float, Integer, String, UniqueConstraint
from sqlalchemy.orm import declarative_base

Base = declarative_base()

class TrialRecord(Base):
    __tablename__ = "trials"

    id = Column(Integer, primary_key=True)
    run_key = Column(String, nullable=False)   # hash of the resolved sweep config
    metric = Column(String, nullable=False)
    k = Column(Integer)
    n = Column(Integer, nullable=False)
    trial = Column(Integer, nullable=False)
    m = Column(Integer, nullable=False)
    flagged = Column(Boolean, nullable=False, default=False)
    d_true = Column(Float)
    seed = Column(Integer, nullable=False)
    probes = Column(Integer, nullable=False, default=0)
    message = Column(String)

    __table_args__ = (UniqueConstraint("run_key", "n", "trial"), )
