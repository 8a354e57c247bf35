"""
    Utils stuff.
"""

import os
import sys
import platform
import logging

from typing import Any, Dict

import numpy as np

from vmm_solver.consts import LIBRARY_INFORMATION_DICT, RUNTIME_NAME, THREADS_ENV_VARIABLE
from vmm_solver.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


def sgnpow(t, p) -> np.ndarray:
    """
    Sign preserving power sign(t) |t|^p (real odd roots for p = 1/3).

    :param t: Base (scalar or array).
    :param p: Exponent.
    """
    t = np.asarray(t, dtype=float)
    return np.sign(t) * np.abs(t) ** p


def resolve_thread_count(threads: int = None) -> int:
    """
    Returns worker count: explicit value, else the environment variable, else 1.
    """
    if threads is None:
        raw = os.environ.get(THREADS_ENV_VARIABLE, "1")
        try:
            threads = int(raw)
        except ValueError as parse_error:
            raise ConfigurationError(
                f"{THREADS_ENV_VARIABLE} must be an integer, got {raw!r}!"
            ) from parse_error
    if threads < 1:
        raise ConfigurationError(f"Thread count must be positive, got {threads}!")
    return threads


def get_run_information_tags(
    include_platform_info: bool = True,
    include_runtime_info: bool = True,
    include_library_info: bool = True,
) -> Dict[str, Any]:
    """
    Returns run information tags (library, platform, runtime) for debug logs.
    """
    tags = dict()
    if include_library_info:
        tags.update(LIBRARY_INFORMATION_DICT)
        tags["numpy.ver"] = np.__version__
    if include_platform_info:
        tags.update(get_platform_tags())
    if include_runtime_info:
        tags.update(get_runtime_tags())
    return tags


def get_platform_tags() -> Dict[str, Any]:
    """
    Returns platform information tags.
    """
    return {
        "os": platform.system(),
        "os.version": platform.release(),
        "os.bits": platform.architecture()[0],
        "cpu.count": os.cpu_count(),
    }


def get_runtime_tags() -> Dict[str, Any]:
    """
    Returns runtime information tags.
    """
    runtime_version = sys.version_info
    return {
        "runtime.name": RUNTIME_NAME,
        "runtime.ver": f"{runtime_version[0]}.{runtime_version[1]}.{runtime_version[2]}",
        "runtime.impl": platform.python_implementation(),
    }
