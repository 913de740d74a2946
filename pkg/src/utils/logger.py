import logging
import sys
import json
from datetime import datetime, timezone
from typing import IO, Any, Dict, Optional


class JsonFormatter(logging.Formatter):
    def format(self, record):
        log_record = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "funcName": record.funcName,
            "line": record.lineno
        }
        if record.exc_info:
            log_record["exception"] = self.formatException(record.exc_info)
        return json.dumps(log_record)


def setup_logger(name: str, level: str = "INFO") -> logging.Logger:
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # stdout carries command reports, logs go to stderr
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonFormatter())

    if not logger.handlers:
        logger.addHandler(handler)

    return logger


class TraceWriter:
    """JSON-lines diagnostic stream, one object per event."""

    def __init__(self, stream: Optional[IO[str]] = None):
        self.stream = stream

    @property
    def enabled(self) -> bool:
        return self.stream is not None

    def emit(self, event: str, **fields: Any) -> None:
        if self.stream is None:
            return
        record: Dict[str, Any] = {"event": event}
        record.update(fields)
        self.stream.write(json.dumps(record, sort_keys=True) + "\n")
