"""
Results database: engine and sessions for the run history
"""
import logging
from contextlib import contextmanager

from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

import config

logger = logging.getLogger(__name__)

_SQLITE = config.DATABASE_URL.startswith("sqlite")

engine = create_engine(
    config.DATABASE_URL,
    connect_args={"check_same_thread": False} if _SQLITE else {},
    echo=False,
)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


def init_db():
    """Create the run and result tables if they are missing"""
    from .models import Base
    Base.metadata.create_all(bind=engine)
    logger.debug("results database ready at %s", config.DATABASE_URL)


@contextmanager
def get_session() -> Session:
    """
    Session that commits when the block succeeds and rolls back otherwise

        with get_session() as session:
            session.add(run)
    """
    session = SessionLocal()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        logger.warning("results database transaction rolled back")
        raise
    finally:
        session.close()
