"""
UTC timestamps for cache records and run manifests, and duration formatting for stage logs.
"""
from datetime import datetime

import pytz


def utc_timestamp(dt=None):
    """
    ISO-8601 timestamp in UTC with second precision.

    Args:
        dt: datetime to render (default: now); a naive value is taken as UTC

    Returns:
        str: e.g. '2024-03-01T12:00:00+00:00'
    """
    if dt is None:
        dt = datetime.now(pytz.UTC)
    elif dt.tzinfo is None:
        dt = pytz.UTC.localize(dt)
    else:
        dt = dt.astimezone(pytz.UTC)
    return dt.replace(microsecond=0).isoformat()


def format_duration(seconds):
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, secs = divmod(int(seconds), 60)
    return f"{minutes}m {secs}s"


__all__ = ['utc_timestamp', 'format_duration']
