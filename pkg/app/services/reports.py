"""JSON documents, atomic file writes and run records for long pipelines."""
import datetime
import json
import logging
import os
import tempfile
from contextlib import contextmanager
from datetime import timezone
from pathlib import Path
from typing import Any, Dict, Iterator, Union

from app.core.errors import ExperimentError, TransductionCounterexample, WordProblemError

logger = logging.getLogger(__name__)


def dump_json(doc: Any) -> str:
    """Stable rendering: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False, default=str) + "\n"


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path: Union[str, Path], doc: Any) -> Path:
    return atomic_write_text(path, dump_json(doc))


@contextmanager
def run_record(kind: str, parameters: Dict[str, Any], timing: bool = False) -> Iterator[Dict[str, Any]]:
    """Record of one pipeline run; the body fills ``results``.

    A failed check leaves ``status`` at ``"failed"`` with the diagnostic attached,
    any other toolkit error at ``"error"``. The exception is re-raised either way.
    """
    start_time = datetime.datetime.now(timezone.utc)
    log_data: Dict[str, Any] = {
        "kind": kind,
        "parameters": parameters,
        "status": "started",
        "results": None,
        "error": None,
    }
    try:
        yield log_data
        log_data["status"] = "success"
    except ExperimentError as e:
        log_data["status"] = "failed"
        log_data["error"] = str(e)
        log_data["diff"] = e.diff
        raise
    except TransductionCounterexample as e:
        log_data["status"] = "failed"
        log_data["error"] = str(e)
        log_data["witness"] = [e.first, e.second]
        raise
    except WordProblemError as e:
        log_data["status"] = "error"
        log_data["error"] = str(e)
        raise
    finally:
        if timing:
            end_time = datetime.datetime.now(timezone.utc)
            log_data["timestamp_start"] = start_time.isoformat()
            log_data["timestamp_end"] = end_time.isoformat()
            log_data["duration_seconds"] = (end_time - start_time).total_seconds()
        logger.info("%s run finished with status %s", kind, log_data["status"])
