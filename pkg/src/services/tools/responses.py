from typing import Any, Dict
import logging

logger = logging.getLogger(__name__)


def success(message: str, **fields: Any) -> Dict[str, Any]:
    return {"status": "success", "message": message, **fields}


def error(err: Exception, tool: str) -> Dict[str, Any]:
    """
    Error payload. ValueError and its FlipSortError subclasses are input
    problems (``input_error`` true); anything else is logged as a failure.
    """
    if isinstance(err, ValueError):
        logger.info(f"{tool}: rejected input: {err}")
    else:
        logger.error(f"{tool} failed: {err}", exc_info=True)
    return {
        "status": "error",
        "error_type": type(err).__name__,
        "message": str(err),
        "input_error": isinstance(err, ValueError),
    }
