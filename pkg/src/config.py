import json
import logging
import os
import sys
from datetime import datetime, timezone

from dotenv import load_dotenv

load_dotenv()

# =========================
# Config knobs (env-override)
# =========================
THREADS = max(1, int(os.getenv("GRALG_THREADS", "1") or 1))
DEFAULT_POINTS = int(os.getenv("GRALG_POINTS", "100") or 100)
DEFAULT_SEED = int(os.getenv("GRALG_SEED", "0") or 0)
FD_STEP = float(os.getenv("GRALG_FD_STEP", "1e-3") or 1e-3)
FD_POINTS = int(os.getenv("GRALG_FD_POINTS", "10") or 10)
MAX_SKIP_FRACTION = float(os.getenv("GRALG_MAX_SKIP_FRACTION", "0.10") or 0.10)

# =========================
# Tolerances
# =========================
TOL_JET = float(os.getenv("GRALG_TOL_JET", "1e-8") or 1e-8)
TOL_FD = float(os.getenv("GRALG_TOL_FD", "1e-5") or 1e-5)
TOL_ALGEBRA = float(os.getenv("GRALG_TOL_ALGEBRA", "1e-11") or 1e-11)

# =========================
# Mass extrapolation
# =========================
MASS_FIT_DEGREE = int(os.getenv("GRALG_MASS_FIT_DEGREE", "2") or 2)
MASS_FIT_TOL = float(os.getenv("GRALG_MASS_FIT_TOL", "1e-6") or 1e-6)

REPORT_HEADER = "# gralg-report v1"

# =========
# Logging
# =========
TEXT_LOG_FORMAT = "%(asctime)s %(levelname)s %(message)s"


class JsonLineFormatter(logging.Formatter):
    """One JSON object per record, for LOG_FORMAT=json."""

    def format(self, record):
        line = {
            "ts": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "event": record.getMessage(),
            "where": f"{record.module}:{record.lineno}",
            "run_id": os.getenv("RUN_ID", "unknown"),
        }
        if record.exc_info:
            line["exc_info"] = self.formatException(record.exc_info)
        return json.dumps(line, ensure_ascii=False)


def build_logger(level=None, fmt_mode=None, stream=None):
    """The "gralg" logger writing to stderr; arguments default to LOG_LEVEL and LOG_FORMAT."""
    level = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    fmt_mode = (fmt_mode or os.getenv("LOG_FORMAT", "text")).lower()
    formatter = JsonLineFormatter() if fmt_mode == "json" else logging.Formatter(TEXT_LOG_FORMAT)
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(formatter)

    log = logging.getLogger("gralg")
    log.setLevel(level)
    log.handlers = [handler]
    log.propagate = False
    return log


logger = build_logger()
