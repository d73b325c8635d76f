"""
Helper Utilities Module for Superform Lab

This module provides small formatting and hashing helpers shared by the
report, trace and command-line code.
"""

import hashlib
import json


def inputs_digest(inputs):
    """
    Short stable digest of a check's inputs.

    The inputs are serialized as sorted-key JSON, so equal dictionaries give
    equal digests across runs and platforms.

    Args:
        inputs (dict): parameters identifying a check

    Returns:
        str: the first 12 hex digits of the SHA-256 of the serialization

    Example:
        >>> inputs_digest({"N": 1}) == inputs_digest({"N": 1})
        True
    """
    text = json.dumps(inputs, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def format_duration(seconds):
    """
    Convert a duration to a short human-readable string.

    Example:
        >>> format_duration(75.5)
        '1m 15.5s'
    """
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    minutes, rest = divmod(seconds, 60)
    if minutes:
        return f"{int(minutes)}m {rest:.1f}s"
    return f"{rest:.2f}s"


def trace_filename(suite, name):
    """File name of a CSV trace: ``<suite>_<name>.csv`` with path separators replaced."""
    safe = f"{suite}_{name}".replace("/", "-").replace("\\", "-").replace(" ", "_")
    return f"{safe}.csv"
