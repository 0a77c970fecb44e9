"""Experiment configuration, body catalog and reproducible run reports."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import bodies as B

KINDS = ("coeffs", "mc-sphere", "mc-flat", "sweep", "verify", "table")
SPACES = ("pseudosphere", "pseudohyperbolic", "flat")
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    seed: int | None = None
    body: dict = field(default_factory=dict)
    space: str = "pseudosphere"
    p: int | None = None
    q: int = 0
    k: int | None = None
    n: int | None = None
    sigma: float | None = None
    zeta: list | None = None  # [re, im]
    eps: list | None = None
    N: int = 100_000
    workers: int | None = None  # None: CROFTON_WORKERS or 1
    window_R: float | None = None
    stratify: bool = True
    method: str = "polynomial"
    suite: str = "riemannian"
    k_max: int | None = None
    n_max: int | None = None
    output: str | None = None
    tolerances: dict = field(default_factory=dict)

    # -- serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        return {"schema": SCHEMA_VERSION, **asdict(self)}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        schema = data.pop("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema version {schema}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "kind" not in data:
            raise ConfigError("config needs a 'kind'")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.loads(Path(path).read_text())

    # -- validation ----------------------------------------------------------

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind in ("mc-sphere", "mc-flat", "sweep"):
            if self.seed is None:
                raise ConfigError("a seed is mandatory for Monte Carlo runs (no implicit entropy)")
            if self.p is None or self.k is None:
                raise ConfigError("p and k are required")
            if not self.body:
                raise ConfigError("a body descriptor is required")
            if self.N < 1:
                raise ConfigError("N must be positive")
        if self.seed is not None and (not isinstance(self.seed, int) or self.seed < 0):
            raise ConfigError("seed must be a nonnegative integer")
        if self.space not in SPACES:
            raise ConfigError(f"space must be one of {SPACES}")
        if self.kind == "mc-flat" and self.space != "flat":
            raise ConfigError("mc-flat needs space = 'flat'")
        if self.kind == "mc-sphere" and self.space == "flat":
            raise ConfigError("mc-sphere needs a curved space form")
        if self.kind == "sweep":
            if not self.eps or len(self.eps) < 3:
                raise ConfigError("a sweep needs at least 3 epsilon values")
            if any(b >= a for a, b in zip(self.eps, self.eps[1:])):
                raise ConfigError("epsilon values must be strictly decreasing")
        if self.kind == "coeffs" and (self.k is None or self.n is None or self.sigma is None):
            raise ConfigError("coeffs needs k, n and sigma")
        if self.kind == "table":
            if self.k_max is None or self.n_max is None:
                raise ConfigError("table needs k_max and n_max")
            if not 1 <= self.k_max <= self.n_max <= 10:
                raise ConfigError("table needs 1 <= k_max <= n_max <= 10")
        if self.method not in ("fit", "polynomial"):
            raise ConfigError("method must be 'fit' or 'polynomial'")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be positive")
        for name in ("sigma", "window_R"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise ConfigError(f"{name} must be finite")
        for seq in (self.zeta or [], self.eps or []):
            if any(not math.isfinite(x) for x in seq):
                raise ConfigError("numeric fields must be finite")
        if self.zeta is not None and len(self.zeta) != 2:
            raise ConfigError("zeta is given as [re, im]")
        if self.eps is not None and any(e < 0 for e in self.eps):
            raise ConfigError("epsilon values must be nonnegative")

    # -- derived objects -----------------------------------------------------

    def zeta_value(self) -> complex:
        if self.zeta is None:
            return 1.0 + 0j
        return complex(self.zeta[0], self.zeta[1])

    def space_form(self) -> B.SpaceForm:
        """Space form inside the ambient R^{p,q}."""
        if self.space == "pseudosphere":
            return B.SpaceForm("pseudosphere", self.p - 1, self.q)
        if self.space == "pseudohyperbolic":
            return B.SpaceForm("pseudohyperbolic", self.p, self.q - 1)
        return B.SpaceForm("flat", self.p, self.q)


def make_body(desc: dict, d: int | None = None):
    """Build a body from its catalog descriptor, e.g. {"name": "band", "p": 2, "theta": 0.5}."""
    desc = dict(desc)
    name = desc.pop("name", None)
    try:
        if name == "cap":
            axis = desc.get("axis") or [0.0] * (d - 1) + [1.0]
            return B.Cap(np.asarray(axis, dtype=float), float(desc["radius"]))
        if name == "band":
            return B.Band(int(desc.get("p", (d or 0) - 1)), float(desc["theta"]))
        if name == "equator":
            return B.Equator(int(desc.get("p", (d or 0) - 1)))
        if name == "full-sphere":
            return B.FullSphere(int(desc.get("d", d)))
        if name == "constant":
            return B.ConstantChi(int(desc.get("d", d)), int(desc.get("value", 1)))
        if name == "cone":
            return B.ConeBody(np.asarray(desc["generators"], dtype=float))
        if name == "swapped":
            return B.SwappedBody(make_body(desc["base"], d), int(desc["q_of_base"]))
        if name == "ellipse":
            return B.Ellipse(float(desc.get("a", 1.0)), float(desc.get("b", 1.0)))
        if name == "circle":
            return B.Ellipse(float(desc.get("radius", 1.0)), float(desc.get("radius", 1.0)))
        if name == "limacon":
            return B.Limacon(float(desc.get("c", 0.8)))
        if name == "ball":
            return B.FlatBall(float(desc.get("radius", 1.0)), int(desc.get("d", d)))
    except KeyError as exc:
        raise ConfigError(f"body {name!r} is missing parameter {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameters for body {name!r}: {exc}") from exc
    raise ConfigError(f"unknown body {name!r}; catalog: cap, band, equator, full-sphere, constant, "
                      "cone, swapped, ellipse, circle, limacon, ball")


def input_hash(cfg: ExperimentConfig) -> str:
    canon = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class RunReport:
    config: dict
    input_hash: str
    results: list
    checks: list

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def dumps(self) -> str:
        return json.dumps({"config": self.config, "input_hash": self.input_hash,
                           "results": self.results, "checks": self.checks,
                           "passed": self.passed}, sort_keys=True, indent=2,
                          default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")
