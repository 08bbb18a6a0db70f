"""Run configuration: a strict JSON schema validated at parse time.

Every module precondition that can be checked without assembling is
checked here, so a bad file fails before any numerics start.  Unknown
keys are rejected at every nesting level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ConfigError, FieldSpecError, MixneuError
from .fields import OperatorParams, PiecewiseField, critical_exponent, exponent_pack
from .mesh import build_mesh

TASKS = ("solve-eigen", "solve-source", "verify", "convergence", "audit")


@dataclass(frozen=True)
class RunConfig:
    task: str
    a: float
    b: float
    n_in: int
    collar_width: float
    n_col: int
    alpha: float
    beta: float
    s: float
    weight: PiecewiseField
    coefficient: PiecewiseField | None
    source: PiecewiseField | None
    q: float
    k_pos: int
    k_neg: int
    seed: int
    diagnostic: bool
    n_in_sweep: tuple | None

    def params(self) -> OperatorParams:
        return OperatorParams(alpha=self.alpha, beta=self.beta, s=self.s)

    def mesh(self, n_in: int | None = None):
        return build_mesh(self.a, self.b, n_in if n_in is not None else self.n_in,
                          self.collar_width, self.n_col)


def _take(d: dict, ctx: str, required: tuple, optional: tuple = ()):
    unknown = set(d) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"unknown keys in {ctx}: {sorted(unknown)}")
    missing = [k for k in required if k not in d]
    if missing:
        raise ConfigError(f"missing keys in {ctx}: {missing}")


def _field_from_spec(spec, a: float, b: float, what: str, role: str) -> PiecewiseField:
    if not isinstance(spec, dict):
        raise FieldSpecError(f"{what} must be an object with breakpoints and values")
    _take(spec, what, ("values",), ("breakpoints",))
    bps = spec.get("breakpoints", [])
    try:
        return PiecewiseField(a, b, tuple(float(x) for x in bps),
                              tuple(float(v) for v in spec["values"]), role=role)
    except MixneuError:
        raise
    except (TypeError, ValueError) as exc:
        raise FieldSpecError(f"bad {what} spec: {exc}") from exc


def _parse_q(raw) -> float:
    if raw == "inf":
        return math.inf
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError('q must be a number or "inf"')
    return float(raw)


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    _take(data, "configuration",
          ("task", "geometry", "operator"),
          ("weight", "coefficient", "source", "q", "eigencounts", "seed",
           "diagnostic", "convergence"))

    task = data["task"]
    if task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {task!r}")

    geo = data["geometry"]
    _take(geo, "geometry", ("a", "b", "n_in", "R", "n_col"))
    op = data["operator"]
    _take(op, "operator", ("alpha", "beta", "s"))

    try:
        a, b = float(geo["a"]), float(geo["b"])
        n_in = int(geo["n_in"])
        collar_width = float(geo["R"])
        n_col = int(geo["n_col"])
        params = OperatorParams(alpha=float(op["alpha"]), beta=float(op["beta"]),
                                s=float(op["s"]))
        build_mesh(a, b, n_in, collar_width, n_col)   # geometry preconditions
    except MixneuError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad geometry/operator values: {exc}") from exc

    weight = (_field_from_spec(data["weight"], a, b, "weight", "weight")
              if "weight" in data else PiecewiseField(a, b, (), (1.0,), role="weight"))
    coefficient = (_field_from_spec(data["coefficient"], a, b, "coefficient", "coefficient")
                   if "coefficient" in data else None)
    source = (_field_from_spec(data["source"], a, b, "source", "source")
              if "source" in data else None)

    q = _parse_q(data.get("q", "inf"))
    exponent_pack(params, q)                          # integrability preconditions

    ec = data.get("eigencounts", {})
    _take(ec, "eigencounts", (), ("k_pos", "k_neg"))
    k_pos = int(ec.get("k_pos", 3))
    k_neg = int(ec.get("k_neg", 3))
    if k_pos < 0 or k_neg < 0:
        raise ConfigError("eigencounts must be nonnegative")

    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0 or seed > 2**64 - 1:
        raise ConfigError("seed must be an unsigned 64-bit integer")

    diagnostic = data.get("diagnostic", False)
    if not isinstance(diagnostic, bool):
        raise ConfigError("diagnostic must be a boolean")

    sweep = None
    if task == "convergence":
        if "convergence" not in data:
            raise ConfigError('convergence task needs a "convergence" section')
        conv = data["convergence"]
        _take(conv, "convergence", ("n_in",))
        raw = conv["n_in"]
        if not isinstance(raw, list) or len(raw) < 2:
            raise ConfigError("convergence.n_in must list at least two mesh sizes")
        sweep = tuple(int(n) for n in raw)
        for n in sweep:
            build_mesh(a, b, n, collar_width, n_col)
    elif "convergence" in data:
        raise ConfigError('"convergence" section is only valid for the convergence task')

    if task == "solve-source" and source is None:
        raise ConfigError('solve-source task needs a "source" field')
    if task == "verify" and not math.isfinite(q):
        raise ConfigError(
            f"verify task runs the level iteration and needs finite q > "
            f"{critical_exponent(params)}"
        )

    return RunConfig(
        task=task, a=a, b=b, n_in=n_in, collar_width=collar_width, n_col=n_col,
        alpha=params.alpha, beta=params.beta, s=params.s,
        weight=weight, coefficient=coefficient, source=source, q=q,
        k_pos=k_pos, k_neg=k_neg, seed=seed, diagnostic=diagnostic, n_in_sweep=sweep,
    )


def load_config(path, seed_override: int | None = None, task_override: str | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if task_override is not None:
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        stated = data.get("task", task_override)
        if stated != task_override:
            raise ConfigError(
                f"config file says task {stated!r} but the command line asked "
                f"for {task_override!r}"
            )
        data = {**data, "task": task_override}
    if seed_override is not None:
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        data = {**data, "seed": seed_override}
    return config_from_dict(data)


def _field_to_spec(f: PiecewiseField | None):
    if f is None:
        return None
    return {"breakpoints": list(f.breakpoints), "values": list(f.values)}


def config_to_dict(cfg: RunConfig) -> dict:
    """Echo of the parsed configuration, JSON-serializable."""
    out = {
        "task": cfg.task,
        "geometry": {"a": cfg.a, "b": cfg.b, "n_in": cfg.n_in,
                     "R": cfg.collar_width, "n_col": cfg.n_col},
        "operator": {"alpha": cfg.alpha, "beta": cfg.beta, "s": cfg.s},
        "weight": _field_to_spec(cfg.weight),
        "q": "inf" if math.isinf(cfg.q) else cfg.q,
        "eigencounts": {"k_pos": cfg.k_pos, "k_neg": cfg.k_neg},
        "seed": cfg.seed,
        "diagnostic": cfg.diagnostic,
    }
    if cfg.coefficient is not None:
        out["coefficient"] = _field_to_spec(cfg.coefficient)
    if cfg.source is not None:
        out["source"] = _field_to_spec(cfg.source)
    if cfg.n_in_sweep is not None:
        out["convergence"] = {"n_in": list(cfg.n_in_sweep)}
    return out
