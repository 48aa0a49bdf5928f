# src/walklab/models/experiment.py
"""
Experiment configs.

An experiment config is a ``KEY=VALUE`` file in ``.env`` syntax, read with
``dotenv.dotenv_values``. Structured values (environment and tube specs, lists) are
JSON literals. ``SCHEMA`` below is the published list of keys.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping

from dotenv import dotenv_values

from walklab.env import EnvironmentSpecError, JumpLawError, as_rho, build_environment
from walklab.process import DriverSpecError
from walklab.tube import TubeSpecError, build_tube
from walklab.utils.seeding import MASK64

logger = logging.getLogger(__name__)

KINDS = (
    "rwre_speed",
    "rwre_regen",
    "rwre_Q",
    "billiard_lln",
    "billiard_balance",
    "billiard_tails",
    "skeleton",
    "oracle_check",
)
RWRE_KINDS = ("rwre_speed", "rwre_regen", "rwre_Q", "oracle_check")


@dataclass(frozen=True)
class Field:
    kind: str
    doc: str
    default: Any = None
    required: bool = False


SCHEMA: dict[str, Field] = {
    "EXPERIMENT": Field("kind", f"experiment kind, one of {', '.join(KINDS)}", required=True),
    "SEED": Field("u64", "master seed (unsigned 64-bit)", required=True),
    "ENVIRONMENT": Field("object", "environment spec: driver, laws, declared constants (RWRE kinds)"),
    "TUBE": Field("object", "tube spec: driver, radii, r_min, M_hat (billiard kinds)"),
    "TUBE_SEEDS": Field("int_list", "tube seeds to compare (billiard_lln); default [SEED]"),
    "RHO": Field("rho_list", "truncation levels, ints >= 2 or \"inf\"", default=["inf"]),
    "LAMBDA": Field("float_list", "drift parameter(s) lambda >= 0", default=[1.0]),
    "N_SKELETON": Field("int", "eta is uniform on 1..N", default=2),
    "R1": Field("prob", "thinning probability of the skeleton", default=0.1),
    "BLOCK_LENGTH": Field("int", "skeleton stride is BLOCK_LENGTH^4 thinned epochs", default=3),
    "REPLICAS": Field("int", "independent replicas", default=16),
    "STEPS": Field("int", "steps per replica", default=100_000),
    "CYCLES": Field("int", "regeneration cycles per replica", default=200),
    "SAMPLES": Field("int", "samples (hits, starts, chords, r-profile replicas)", default=10_000),
    "LEVELS": Field("int", "ladder levels in the r profile", default=8),
    "BANDS": Field("band_pairs", "band pairs [[B1, B2], ...] for billiard_balance", default=[[0, 1]]),
    "EXIT_WINDOW": Field("float_pair", "axial window [a, b] for exit times", default=[0.0, 4.0]),
    "H_LIST": Field("float_list", "backtrack depths H", default=[0.0, 1.0, 2.0, 4.0, 8.0, 16.0]),
    "WINDOW": Field("int", "oracle window W (auto-doubled when absent)"),
    "DEPTH": Field("int", "Condition D check depth (guard runs when set)"),
    "START": Field("int", "start site x0 < 0 for exact-hit checks", default=-1),
    "HALF_WIDTH": Field("nonneg_int", "descriptor half width for occupation estimates", default=0),
    "OUTPUT": Field("str", "report path (default <out_dir>/<name>.json)"),
    "CSV": Field("bool", "also write CSV series next to the report", default=False),
    "SUITE": Field("str", "suite id (informational)"),
}


@dataclass(frozen=True)
class Diagnostic:
    key: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line else ""
        return f"{where}{self.key}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic], source: str | None = None) -> None:
        self.diagnostics = diagnostics
        self.source = source
        head = f"{source}: " if source else ""
        super().__init__(head + "; ".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    values: dict[str, Any] = field(default_factory=dict)
    source: str | None = None

    def get(self, key: str, default: Any = None) -> Any:
        if key in self.values and self.values[key] is not None:
            return self.values[key]
        f = SCHEMA.get(key)
        return f.default if f is not None and f.default is not None else default

    def echo(self) -> dict[str, Any]:
        """Every effective key, defaults included; enough to re-run the experiment."""
        out = {key: self.get(key) for key in SCHEMA}
        out["EXPERIMENT"], out["SEED"] = self.kind, self.seed
        return {k: v for k, v in sorted(out.items()) if v is not None}

    def config_hash(self) -> str:
        body = {k: v for k, v in self.echo().items() if k not in ("SEED", "OUTPUT", "CSV", "SUITE")}
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()[:16]

    def name(self) -> str:
        if self.get("SUITE"):
            return str(self.get("SUITE"))
        if self.source:
            return os.path.splitext(os.path.basename(self.source))[0]
        return f"{self.kind}-{self.config_hash()}"

    def with_seed(self, seed: int | None) -> "ExperimentConfig":
        return self if seed is None else replace(self, seed=int(seed))


def _json(raw: str) -> Any:
    return json.loads(raw)


def _u64(raw: str) -> int:
    v = int(raw)
    if not 0 <= v <= MASK64:
        raise ValueError("must be an unsigned 64-bit integer")
    return v


def _positive_int(raw: str) -> int:
    v = int(raw)
    if v < 1:
        raise ValueError("must be a positive integer")
    return v


def _nonneg_int(raw: str) -> int:
    v = int(raw)
    if v < 0:
        raise ValueError("must be >= 0")
    return v


def _prob(raw: str) -> float:
    v = float(raw)
    if not 0.0 < v <= 1.0:
        raise ValueError("must be in (0, 1]")
    return v


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _object(raw: str) -> dict:
    v = _json(raw)
    if not isinstance(v, dict):
        raise ValueError("must be a JSON object")
    return v


def _as_list(raw: str) -> list:
    try:
        v = _json(raw)
    except json.JSONDecodeError:
        v = raw.strip()
    return v if isinstance(v, list) else [v]


def _rho_list(raw: str) -> list:
    out = []
    for item in _as_list(raw):
        level = as_rho(item)
        out.append("inf" if level.is_infinite else int(level.rho))
    if not out:
        raise ValueError("empty list")
    return out


def _float_list(raw: str) -> list[float]:
    out = [float(v) for v in _as_list(raw)]
    if not out:
        raise ValueError("empty list")
    return out


def _int_list(raw: str) -> list[int]:
    return [_u64(str(v)) for v in _as_list(raw)]


def _float_pair(raw: str) -> list[float]:
    v = _float_list(raw)
    if len(v) != 2:
        raise ValueError("must be a pair [a, b]")
    return v


def _band_pairs(raw: str) -> list[list]:
    v = _json(raw)
    if not isinstance(v, list) or not v or not all(isinstance(p, list) and len(p) == 2 for p in v):
        raise ValueError("must be a list of [B1, B2] pairs")
    return v


def _kind(raw: str) -> str:
    if raw not in KINDS:
        raise ValueError(f"unknown experiment {raw!r}; expected one of {', '.join(KINDS)}")
    return raw


PARSERS: dict[str, Callable[[str], Any]] = {
    "kind": _kind,
    "u64": _u64,
    "int": _positive_int,
    "nonneg_int": _nonneg_int,
    "prob": _prob,
    "bool": _bool,
    "str": str,
    "object": _object,
    "rho_list": _rho_list,
    "float_list": _float_list,
    "int_list": _int_list,
    "float_pair": _float_pair,
    "band_pairs": _band_pairs,
}


def _scan_lines(path: str) -> tuple[dict[str, int], list[Diagnostic]]:
    """Line number of every key, and lines dotenv would silently skip."""
    lines: dict[str, int] = {}
    bad: list[Diagnostic] = []
    with open(path, encoding="utf-8") as fh:
        for no, text in enumerate(fh, start=1):
            s = text.strip()
            if not s or s.startswith("#"):
                continue
            if s.startswith("export "):
                s = s[len("export "):].lstrip()
            key, sep, _ = s.partition("=")
            if not sep or not key.strip():
                bad.append(Diagnostic(key="<parse>", message=f"cannot parse {s[:40]!r}", line=no))
                continue
            lines.setdefault(key.strip(), no)
    return lines, bad


def _check_semantics(values: dict[str, Any], lines: Mapping[str, int]) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    kind, seed = values.get("EXPERIMENT"), values.get("SEED")
    if kind is None or seed is None:
        return diags

    if kind in RWRE_KINDS:
        if values.get("ENVIRONMENT") is None:
            diags.append(Diagnostic("ENVIRONMENT", f"required for {kind}", lines.get("EXPERIMENT")))
        else:
            try:
                build_environment(values["ENVIRONMENT"], seed)
            except (EnvironmentSpecError, JumpLawError, DriverSpecError) as e:
                diags.append(Diagnostic("ENVIRONMENT", str(e), lines.get("ENVIRONMENT")))
    else:
        if values.get("TUBE") is None:
            diags.append(Diagnostic("TUBE", f"required for {kind}", lines.get("EXPERIMENT")))
        else:
            try:
                build_tube(values["TUBE"], seed)
            except TubeSpecError as e:
                diags.append(Diagnostic("TUBE", str(e), lines.get("TUBE")))

    for lam in values.get("LAMBDA") or []:
        if lam < 0.0:
            diags.append(Diagnostic("LAMBDA", f"lambda must be >= 0, got {lam}", lines.get("LAMBDA")))
    window = values.get("EXIT_WINDOW")
    if window is not None and window[1] - window[0] < 1.0:
        diags.append(Diagnostic("EXIT_WINDOW", "need b - a >= 1", lines.get("EXIT_WINDOW")))
    start = values.get("START")
    if start is not None and start >= 0:
        diags.append(Diagnostic("START", "exact-hit start must be < 0", lines.get("START")))
    if kind in ("rwre_regen", "rwre_Q") and "inf" in (values.get("RHO") or []):
        diags.append(Diagnostic("RHO", f"{kind} needs finite truncation levels", lines.get("RHO")))
    return diags


def parse_experiment(
    raw: Mapping[str, str | None], lines: Mapping[str, int] | None = None, source: str | None = None
) -> tuple[ExperimentConfig | None, list[Diagnostic]]:
    """Typed config plus diagnostics; the config is None whenever a diagnostic was raised."""
    lines = lines or {}
    values: dict[str, Any] = {}
    diags: list[Diagnostic] = []
    for key, text in raw.items():
        f = SCHEMA.get(key)
        if f is None:
            diags.append(Diagnostic(key, "unknown key", lines.get(key)))
            continue
        if text is None or text.strip() == "":
            diags.append(Diagnostic(key, "empty value", lines.get(key)))
            continue
        try:
            values[key] = PARSERS[f.kind](text.strip())
        except (ValueError, TypeError, JumpLawError) as e:
            diags.append(Diagnostic(key, str(e) or f"invalid {f.kind}", lines.get(key)))

    for key, f in SCHEMA.items():
        if f.required and key not in raw:
            diags.append(Diagnostic(key, "missing required field"))

    if not diags:
        diags.extend(_check_semantics(values, lines))
    if diags:
        return None, diags
    cfg = ExperimentConfig(kind=values["EXPERIMENT"], seed=values["SEED"], values=values, source=source)
    return cfg, []


def validate_config(path: str) -> list[Diagnostic]:
    """All schema and invariant problems of the file at ``path``; empty when it is valid."""
    lines, bad = _scan_lines(path)
    raw = dotenv_values(path)
    _, diags = parse_experiment(raw, lines, source=path)
    return bad + diags


def load_experiment(path: str) -> ExperimentConfig:
    lines, bad = _scan_lines(path)
    raw = dotenv_values(path)
    cfg, diags = parse_experiment(raw, lines, source=path)
    if bad or diags:
        raise ConfigError(bad + diags, source=path)
    logger.debug(f"Loaded experiment {cfg.kind} from {path}")
    return cfg


def render_value(v: Any) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render_experiment(values: Mapping[str, Any]) -> str:
    """``KEY=VALUE`` text for a mapping of typed values; structured values become JSON."""
    return "".join(f"{key}={render_value(v)}\n" for key, v in values.items())
