"""
SQLAlchemy models for recorded experiment runs
"""
from datetime import datetime

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship

import config

Base = declarative_base()


def _now():
    return datetime.now(config.TIMEZONE)


class ExperimentRun(Base):
    """
    One invocation of an experiment command
    """
    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True, index=True)
    command = Column(String, nullable=False, index=True)  # convergence, sweep, condition, mesh
    example = Column(String, nullable=False)
    basis = Column(String, nullable=False)
    delta = Column(Float, nullable=True)
    delta_range = Column(String, nullable=True)  # "a:b:n"
    tolerance = Column(Float, nullable=False)
    h_list = Column(String, nullable=False)
    status = Column(String, default=config.STATUS_COMPLETED, nullable=False)  # completed, failed, assumption_violation
    message = Column(Text, nullable=True)
    created_at = Column(DateTime, default=_now, nullable=False)

    rows = relationship("ResultRow", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<ExperimentRun(command='{self.command}', example='{self.example}', status='{self.status}')>"


class ResultRow(Base):
    """
    One (h, delta) row, mirroring the CSV columns
    """
    __tablename__ = "result_rows"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("experiment_runs.id"), nullable=False)
    h = Column(Float, nullable=False)
    delta = Column(Float, nullable=False)
    l2_error = Column(Float, nullable=True)
    energy_error = Column(Float, nullable=True)
    eoc_l2 = Column(Float, nullable=True)
    eoc_energy = Column(Float, nullable=True)
    pn = Column(Integer, nullable=False)
    n_l = Column(Integer, nullable=False)
    n_fallback_patches = Column(Integer, default=0, nullable=False)
    cond_lagrange = Column(Float, nullable=True)
    cond_hier = Column(Float, nullable=True)
    cg_iters = Column(Integer, nullable=True)

    run = relationship("ExperimentRun", back_populates="rows")

    def __repr__(self):
        return f"<ResultRow(h={self.h}, delta={self.delta}, l2_error={self.l2_error}, n_l={self.n_l})>"
