"""Version and configuration fingerprints stamped onto every result row."""

import hashlib
import subprocess
from functools import lru_cache
from pathlib import Path

import tomli_w

from . import __version__
from .config import ExperimentConfig
from .constants import GIT_DESCRIBE_TIMEOUT


@lru_cache(maxsize=1)
def describe_version() -> str:
    """``git describe`` of the source tree, or ``v<version>`` outside a checkout."""
    try:
        result = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=GIT_DESCRIBE_TIMEOUT,
            check=False,
            cwd=Path(__file__).resolve().parent,
        )
        if result.returncode == 0 and result.stdout.strip():
            return result.stdout.strip()
    except (subprocess.TimeoutExpired, FileNotFoundError, NotADirectoryError):
        pass
    return f"v{__version__}"


def config_hash(config: ExperimentConfig) -> str:
    """First 12 hex digits of the SHA-256 of the canonical TOML form.

    The [output] section is left out, so the worker count and the output
    directory do not change the hash.
    """
    data = config.to_dict()
    del data["output"]
    return hashlib.sha256(tomli_w.dumps(data).encode("utf-8")).hexdigest()[:12]
