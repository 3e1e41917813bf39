"""
Database models for dcaport.

This module defines the ORM models for benchmark runs and their rows.
"""

from datetime import datetime

from sqlalchemy import (
    JSON,
    Column,
    DateTime,
    Float,
    ForeignKey,
    Integer,
    String,
    Text,
)
from sqlalchemy.orm import relationship

from dcaport.database.base import Base


class BenchRun(Base):
    """
    Model for one benchmark sweep.

    Holds the dataset identity and solver settings shared by all rows.
    """

    __tablename__ = 'bench_runs'

    id = Column(Integer, primary_key=True, index=True)
    dataset = Column(String(1024), nullable=True)
    dataset_sha256 = Column(String(64), nullable=True, index=True)
    n_assets = Column(Integer, nullable=False)
    config = Column(JSON, nullable=True)
    created_at = Column(DateTime, default=datetime.utcnow, nullable=False)
    completed_at = Column(DateTime, nullable=True)
    status = Column(String(50), default='running', nullable=False)

    rows = relationship('BenchRowRecord', back_populates='run',
                        cascade='all, delete-orphan',
                        order_by='BenchRowRecord.card')

    def __repr__(self):
        return f"<BenchRun(id={self.id}, dataset={self.dataset})>"


class BenchRowRecord(Base):
    """
    Model for one card of a sweep.
    """

    __tablename__ = 'bench_rows'

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey('bench_runs.id'), nullable=False,
                    index=True)
    card = Column(Integer, nullable=False)
    dca_objective = Column(Float, nullable=True)
    dca_seconds = Column(Float, nullable=True)
    dca_iterations = Column(Integer, nullable=True)
    exact_objective = Column(Float, nullable=True)
    exact_seconds = Column(Float, nullable=True)
    exact_status = Column(String(50), nullable=True)
    gap = Column(Float, nullable=True)
    error = Column(Text, nullable=True)

    run = relationship('BenchRun', back_populates='rows')

    def __repr__(self):
        return f"<BenchRowRecord(id={self.id}, card={self.card})>"
