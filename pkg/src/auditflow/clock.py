"""Injectable clock.

Commands stamp timestamps through :func:`now_iso` so tests and golden
transcripts can pin time via the ``AUDITFLOW_NOW`` environment variable.
"""

from __future__ import annotations

import os
from datetime import datetime, timezone

from .diagnostics import AuditError

ENV_NOW = "AUDITFLOW_NOW"


def now_iso() -> str:
    """Current UTC time as ISO-8601, honoring the env override."""
    override = os.environ.get(ENV_NOW)
    if override:
        try:
            datetime.fromisoformat(override)
        except ValueError:
            raise AuditError("E_CONFIG", f"{ENV_NOW} is not an ISO-8601 timestamp: {override!r}")
        return override
    return datetime.now(timezone.utc).isoformat(timespec="seconds")
