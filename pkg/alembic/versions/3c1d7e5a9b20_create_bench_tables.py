"""create benchmark tables

Revision ID: 3c1d7e5a9b20
Revises:
Create Date: 2026-10-19 10:30:00.000000

"""
from typing import Sequence, Union

from alembic import op
import sqlalchemy as sa


revision: str = '3c1d7e5a9b20'
down_revision: Union[str, Sequence[str], None] = None
branch_labels: Union[str, Sequence[str], None] = None
depends_on: Union[str, Sequence[str], None] = None


def upgrade() -> None:
    """Upgrade schema."""
    op.create_table('bench_runs',
    sa.Column('id', sa.Integer(), nullable=False),
    sa.Column('dataset', sa.String(length=1024), nullable=True),
    sa.Column('dataset_sha256', sa.String(length=64), nullable=True),
    sa.Column('n_assets', sa.Integer(), nullable=False),
    sa.Column('config', sa.JSON(), nullable=True),
    sa.Column('created_at', sa.DateTime(), nullable=False),
    sa.Column('completed_at', sa.DateTime(), nullable=True),
    sa.Column('status', sa.String(length=50), nullable=False),
    sa.PrimaryKeyConstraint('id')
    )
    op.create_index(op.f('ix_bench_runs_id'), 'bench_runs', ['id'], unique=False)
    op.create_index(op.f('ix_bench_runs_dataset_sha256'), 'bench_runs', ['dataset_sha256'], unique=False)
    op.create_table('bench_rows',
    sa.Column('id', sa.Integer(), nullable=False),
    sa.Column('run_id', sa.Integer(), nullable=False),
    sa.Column('card', sa.Integer(), nullable=False),
    sa.Column('dca_objective', sa.Float(), nullable=True),
    sa.Column('dca_seconds', sa.Float(), nullable=True),
    sa.Column('dca_iterations', sa.Integer(), nullable=True),
    sa.Column('exact_objective', sa.Float(), nullable=True),
    sa.Column('exact_seconds', sa.Float(), nullable=True),
    sa.Column('exact_status', sa.String(length=50), nullable=True),
    sa.Column('gap', sa.Float(), nullable=True),
    sa.Column('error', sa.Text(), nullable=True),
    sa.ForeignKeyConstraint(['run_id'], ['bench_runs.id'], ),
    sa.PrimaryKeyConstraint('id')
    )
    op.create_index(op.f('ix_bench_rows_id'), 'bench_rows', ['id'], unique=False)
    op.create_index(op.f('ix_bench_rows_run_id'), 'bench_rows', ['run_id'], unique=False)


def downgrade() -> None:
    """Downgrade schema."""
    op.drop_index(op.f('ix_bench_rows_run_id'), table_name='bench_rows')
    op.drop_index(op.f('ix_bench_rows_id'), table_name='bench_rows')
    op.drop_table('bench_rows')
    op.drop_index(op.f('ix_bench_runs_dataset_sha256'), table_name='bench_runs')
    op.drop_index(op.f('ix_bench_runs_id'), table_name='bench_runs')
    op.drop_table('bench_runs')
