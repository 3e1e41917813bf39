"""
Database connection and session management.

This module sets up the SQLAlchemy engine and session factory for the
benchmark store.
"""

import os

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

DATABASE_URL = os.getenv(
    'DCAPORT_DATABASE_URL',
    'sqlite:///./data/dcaport.db'
)

# SQLite connections are shared with joblib threads
connect_args = {}
if DATABASE_URL.startswith('sqlite'):
    connect_args = {
        'check_same_thread': False
    }

engine = create_engine(
    DATABASE_URL,
    connect_args=connect_args,
    echo=os.getenv('DCAPORT_DB_ECHO', 'false').lower() == 'true'
)

SessionLocal = sessionmaker(
    autocommit=False,
    autoflush=False,
    bind=engine
)

Base = declarative_base()


def init_db(bind=None):
    """
    Create all tables.

    Args:
        bind: Optional engine, defaults to the configured one
    """
    bind = bind or engine
    url = str(bind.url)
    if url.startswith('sqlite:///') and ':memory:' not in url:
        db_path = url.replace('sqlite:///', '')
        directory = os.path.dirname(db_path)
        if directory:
            os.makedirs(directory, exist_ok=True)

    from dcaport.database import models  # noqa: F401

    Base.metadata.create_all(bind=bind)

