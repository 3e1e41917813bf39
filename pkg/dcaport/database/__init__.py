"""
Database module for dcaport.

This module provides database connectivity and ORM setup for storing
benchmark runs.
"""

from dcaport.database.base import Base, SessionLocal, engine, init_db
from dcaport.database.models import BenchRowRecord, BenchRun
from dcaport.database.crud import (
    add_bench_row,
    complete_bench_run,
    create_bench_run,
    delete_bench_run,
    get_bench_run,
    list_bench_runs,
    save_bench_report,
)

__all__ = [
    'Base',
    'SessionLocal',
    'engine',
    'init_db',
    'BenchRun',
    'BenchRowRecord',
    'create_bench_run',
    'add_bench_row',
    'complete_bench_run',
    'get_bench_run',
    'list_bench_runs',
    'save_bench_report',
    'delete_bench_run',
]
