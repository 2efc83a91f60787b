"""
Translation of engine errors into command exit codes
"""
import logging
from contextlib import contextmanager

from django.core.management.base import CommandError

from phylodist.exceptions import EngineError, TreeInputError

logger = logging.getLogger(__name__)

INPUT_ERROR = 2
ENGINE_ERROR = 3


@contextmanager
def exit_codes():
    """Bad input exits with 2, a failed algorithm run with 3"""
    try:
        yield
    except TreeInputError as e:
        logger.error(f"Input error: {e}")
        raise CommandError(f"{type(e).__name__}: {e}", returncode=INPUT_ERROR) from e
    except EngineError as e:
        logger.error(f"Engine error: {e}")
        raise CommandError(f"{type(e).__name__}: {e}", returncode=ENGINE_ERROR) from e
    except OSError as e:
        raise CommandError(str(e), returncode=INPUT_ERROR) from e
