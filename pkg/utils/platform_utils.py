"""Platform Utilities Module for Superform Lab

This module provides the host information written into report headers and
the worker cap used to run suites and lattice evaluations concurrently.
It keeps psutil calls in one place so the rest of the application never
queries the system itself.
"""

import logging
import platform

import psutil

logger = logging.getLogger(__name__)

# Constants for platform identification
PLATFORM_WINDOWS = "windows"
PLATFORM_LINUX = "linux"
PLATFORM_MACOS = "darwin"

# Upper bound on the default worker count; suites are few and memory-bound
MAX_DEFAULT_WORKERS = 8

_worker_cache = {}


def get_platform_type():
    """
    Determine the current platform type.

    Returns:
        str: One of the platform constants, or "unknown"
    """
    system = platform.system().lower()
    if system in (PLATFORM_WINDOWS, PLATFORM_LINUX, PLATFORM_MACOS):
        return system
    return "unknown"


def get_system_info():
    """
    Host description for the report header.

    Returns:
        dict: node, platform, python version, core counts and total memory
    """
    uname = platform.uname()
    info = {
        "node": uname.node,
        "platform": get_platform_type(),
        "machine": uname.machine,
        "python_version": platform.python_version(),
        "physical_cores": psutil.cpu_count(logical=False) or 0,
        "logical_cores": psutil.cpu_count(logical=True) or 0,
    }
    try:
        info["memory_total"] = psutil.virtual_memory().total
    except (OSError, RuntimeError) as error:
        logger.debug("memory query failed: %s", error)
        info["memory_total"] = None
    return info


def worker_cap(requested=None):
    """
    Number of worker threads to use.

    Args:
        requested (int): explicit cap from the scenario, or None

    Returns:
        int: ``requested`` when given, otherwise the physical core count
        (cached after the first query), clamped to 1..MAX_DEFAULT_WORKERS

    Example:
        >>> worker_cap(3)
        3
    """
    if requested is not None:
        return max(1, int(requested))
    if "default" not in _worker_cache:
        cores = psutil.cpu_count(logical=False) or psutil.cpu_count(logical=True) or 1
        _worker_cache["default"] = max(1, min(cores, MAX_DEFAULT_WORKERS))
        logger.debug("worker cap %d from %d cores", _worker_cache["default"], cores)
    return _worker_cache["default"]
