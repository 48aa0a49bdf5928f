# src/walklab/utils/version.py
import logging
import subprocess
from functools import lru_cache
from importlib import metadata
from pathlib import Path

logger = logging.getLogger(__name__)

FALLBACK_VERSION = "0.1.0"


@lru_cache(maxsize=1)
def version_string() -> str:
    """git-describe style version, falling back to the installed package version."""
    repo_root = Path(__file__).resolve().parents[3]
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=repo_root,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError) as e:
        logger.debug(f"git describe unavailable: {e}")

    try:
        return metadata.version("walklab")
    except metadata.PackageNotFoundError:
        return FALLBACK_VERSION
