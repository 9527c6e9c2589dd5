"""Experiment configuration: one JSON document, strictly validated."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "BudgetError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
]

EXPERIMENTS = (
    "tau-plus",
    "coupling",
    "dimer",
    "spectrum",
    "heat",
    "coldyn",
    "modified-2d",
)

_KEYS = {"experiment", "sizes", "replicas", "seed", "beta", "t", "ndim",
         "out", "format"}


class ConfigError(ValueError):
    """The configuration document is malformed or inconsistent."""


class BudgetError(RuntimeError):
    """A requested run exceeds a module's hard size budget."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    sizes: tuple[int, ...]
    replicas: int
    seed: int
    beta: float = math.inf
    t: float | None = None
    ndim: int = 2
    out: str | None = None
    format: str = "csv"

    def canonical(self) -> str:
        """Canonical JSON form (the hashing base; excludes the output path)."""
        doc = {
            "experiment": self.experiment,
            "sizes": list(self.sizes),
            "replicas": self.replicas,
            "seed": self.seed,
            "beta": "inf" if math.isinf(self.beta) else self.beta,
            "t": self.t,
            "ndim": self.ndim,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]


def _fail(msg: str) -> None:
    raise ConfigError(msg)


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a decoded JSON document and freeze it into a config."""
    if not isinstance(doc, dict):
        _fail("configuration must be a JSON object")
    unknown = set(doc) - _KEYS
    if unknown:
        _fail(f"unknown configuration keys: {sorted(unknown)}")
    for key in ("experiment", "sizes", "replicas", "seed"):
        if key not in doc:
            _fail(f"missing required key: {key}")

    experiment = doc["experiment"]
    if experiment not in EXPERIMENTS:
        _fail(f"unknown experiment kind: {experiment!r}")

    sizes = doc["sizes"]
    if (not isinstance(sizes, list) or not sizes
            or not all(isinstance(s, int) and not isinstance(s, bool) for s in sizes)):
        _fail("sizes must be a non-empty list of integers")
    if any(s <= 0 for s in sizes):
        _fail("sizes must be positive")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        _fail("sizes must be strictly increasing")

    replicas = doc["replicas"]
    if not isinstance(replicas, int) or isinstance(replicas, bool) or replicas < 1:
        _fail("replicas must be an integer >= 1")
    seed = doc["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        _fail("seed must be a nonnegative integer")

    beta = doc.get("beta", "inf")
    if beta == "inf":
        beta = math.inf
    if not isinstance(beta, (int, float)) or isinstance(beta, bool) or beta < 0:
        _fail("beta must be a nonnegative number or \"inf\"")

    t = doc.get("t")
    if t is not None:
        if not isinstance(t, (int, float)) or isinstance(t, bool) or t < 0:
            _fail("t must be a nonnegative number")
        t = float(t)

    ndim = doc.get("ndim", 2)
    if ndim not in (2, 3):
        _fail("ndim must be 2 or 3")

    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        _fail("out must be a path string")
    fmt = doc.get("format", "csv")
    if fmt not in ("csv", "json"):
        _fail("format must be \"csv\" or \"json\"")

    # kind-specific consistency
    if experiment in ("heat", "coldyn"):
        if t is None:
            _fail(f"{experiment} requires a time t")
        if any(s % 2 for s in sizes):
            _fail(f"{experiment} requires even sizes")
    if experiment == "modified-2d" and ndim != 2:
        _fail("modified-2d is two-dimensional")

    return ExperimentConfig(experiment=experiment, sizes=tuple(sizes),
                            replicas=replicas, seed=seed, beta=float(beta),
                            t=t, ndim=ndim, out=out, format=fmt)


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Read and validate a JSON config file; overrides replace keys first."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    if overrides:
        doc = {**doc, **{k: v for k, v in overrides.items() if v is not None}}
    return parse_config(doc)
