from dataclasses import dataclass, replace
import os


@dataclass(frozen=True)
class Config:
    app_name: str
    out_dir: str
    db_path: str | None
    threads: int
    step_cap: int
    max_jump: int
    debug: bool


def _opt_str(key: str, alt=None) -> str | None:
    val = os.getenv(key)
    return val if val is not None and val != "" else alt


def _opt_int(key: str, alt=None) -> int | None:
    val = os.getenv(key)
    return int(val) if val is not None and val != "" else alt


def _opt_bool(key: str, alt=None) -> bool | None:
    val = os.getenv(key)
    if val is not None and val != "":
        return val.lower() in ("1", "true", "yes", "on")
    return alt


def load_config() -> Config:
    # WALKLAB_DB_PATH set to an empty string keeps the default; "off" disables the ledger
    db_path = _opt_str("WALKLAB_DB_PATH", "reports/runs.db")
    return Config(
        app_name=_opt_str("WALKLAB_APP_NAME", "walklab"),
        out_dir=_opt_str("WALKLAB_OUT_DIR", "reports"),
        db_path=None if db_path.lower() == "off" else db_path,
        threads=_opt_int("WALKLAB_THREADS", 1),
        step_cap=_opt_int("WALKLAB_STEP_CAP", 10_000_000),
        max_jump=_opt_int("WALKLAB_MAX_JUMP", 64),
        debug=_opt_bool("WALKLAB_DEBUG", False),
    )


def with_overrides(config: Config, **overrides) -> Config:
    """Apply CLI overrides; ``None`` values leave the field alone."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **changes) if changes else config

