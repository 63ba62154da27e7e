"""
Database package initialization
"""
from .db import init_db, get_session, SessionLocal, engine
from .models import Base, ExperimentRun, ResultRow
from .records import record_run

__all__ = [
    'init_db',
    'get_session',
    'SessionLocal',
    'engine',
    'Base',
    'ExperimentRun',
    'ResultRow',
    'record_run'
]
