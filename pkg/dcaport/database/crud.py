"""
CRUD operations for the benchmark store.

This module provides Create, Read, Delete operations for benchmark runs
and their rows.
"""

from dataclasses import asdict
from datetime import datetime
from typing import Any, Dict, List, Optional

from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session

from dcaport.database.models import BenchRowRecord, BenchRun
from dcaport.reporting.benchmark import BenchReport, BenchRow
from dcaport.utils.exceptions import StorageError
from dcaport.utils.logger import get_logger

logger = get_logger()

ROW_FIELDS = ('card', 'dca_objective', 'dca_seconds', 'dca_iterations',
              'exact_objective', 'exact_seconds', 'exact_status', 'gap',
              'error')


def _clean(value: Any) -> Any:
    """NaN is stored as NULL."""
    if isinstance(value, float) and value != value:
        return None
    return value


def create_bench_run(
    db: Session,
    n_assets: int,
    dataset: Optional[str] = None,
    dataset_sha256: Optional[str] = None,
    config: Optional[Dict[str, Any]] = None,
    commit: bool = True
) -> BenchRun:
    """
    Create a new benchmark run.

    Args:
        db: Database session
        n_assets: Number of assets in the dataset
        dataset: Optional dataset label or path
        dataset_sha256: Optional hash of the dataset file
        config: Optional solver settings
        commit: Commit immediately

    Returns:
        Created BenchRun object
    """
    run = BenchRun(
        dataset=dataset,
        dataset_sha256=dataset_sha256,
        n_assets=n_assets,
        config=config
    )
    db.add(run)
    if commit:
        db.commit()
        db.refresh(run)
    else:
        db.flush()
    return run


def add_bench_row(
    db: Session,
    run_id: int,
    row: BenchRow,
    commit: bool = True
) -> BenchRowRecord:
    """
    Store one benchmark row.

    Args:
        db: Database session
        run_id: Owning run ID
        row: Benchmark row
        commit: Commit immediately

    Returns:
        Created BenchRowRecord object
    """
    values = {k: _clean(v) for k, v in asdict(row).items()
              if k in ROW_FIELDS}
    record = BenchRowRecord(run_id=run_id, **values)
    db.add(record)
    if commit:
        db.commit()
        db.refresh(record)
    return record


def get_bench_run(db: Session, run_id: int) -> Optional[BenchRun]:
    """
    Get benchmark run by ID.

    Args:
        db: Database session
        run_id: Run ID

    Returns:
        BenchRun object or None if not found
    """
    return db.query(BenchRun).filter(BenchRun.id == run_id).first()


def list_bench_runs(
    db: Session,
    dataset_sha256: Optional[str] = None,
    limit: int = 100
) -> List[BenchRun]:
    """
    List benchmark runs, newest first.

    Args:
        db: Database session
        dataset_sha256: Only runs on this dataset
        limit: Maximum number of runs

    Returns:
        List of BenchRun objects
    """
    query = db.query(BenchRun)
    if dataset_sha256 is not None:
        query = query.filter(BenchRun.dataset_sha256 == dataset_sha256)
    return query.order_by(BenchRun.id.desc()).limit(limit).all()


def complete_bench_run(
    db: Session,
    run_id: int,
    status: str = 'completed'
) -> Optional[BenchRun]:
    """
    Mark benchmark run as finished.

    Args:
        db: Database session
        run_id: Run ID
        status: Final status

    Returns:
        Updated BenchRun object or None if not found
    """
    run = get_bench_run(db, run_id)
    if run:
        run.status = status
        run.completed_at = datetime.utcnow()
        db.commit()
        db.refresh(run)
    return run


def delete_bench_run(db: Session, run_id: int) -> bool:
    """
    Delete a benchmark run and its rows.

    Returns:
        True if deleted, False if not found
    """
    run = get_bench_run(db, run_id)
    if run:
        db.delete(run)
        db.commit()
        return True
    return False


def save_bench_report(
    db: Session,
    report: BenchReport,
    dataset_sha256: Optional[str] = None
) -> BenchRun:
    """
    Store a whole report in one transaction.

    Args:
        db: Database session
        report: Benchmark report
        dataset_sha256: Optional hash of the dataset file

    Returns:
        Created BenchRun object with rows

    Raises:
        StorageError: If the transaction fails
    """
    try:
        run = create_bench_run(db, n_assets=report.n,
                               dataset=report.dataset or None,
                               dataset_sha256=dataset_sha256,
                               config=report.settings, commit=False)
        for row in report.rows:
            add_bench_row(db, run.id, row, commit=False)
        failed = any(row.error for row in report.rows)
        run.status = 'completed-with-errors' if failed else 'completed'
        run.completed_at = datetime.utcnow()
        db.commit()
        db.refresh(run)
    except SQLAlchemyError as e:
        db.rollback()
        logger.error(f"Storing benchmark report failed: {e}")
        raise StorageError(f"Failed to store benchmark report: {e}")
    logger.info(f"Stored benchmark run {run.id} with {len(report.rows)} rows")
    return run
