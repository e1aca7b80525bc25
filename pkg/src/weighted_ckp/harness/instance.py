"""Problem instances: a space, a density and optional test functions/metric.

The JSON form is atom-indexed::

    {"mu": [...], "f": [...], "g": [...], "u": [...], "w": [...],
     "dist": [[...]], "base": 0, "alpha": 2.0, "p": 1.0}

Only ``mu``, ``f`` and ``alpha`` are required; checks that need a missing
field are skipped. Floats are written with ``repr`` (the shortest string that
reads back to the same double), so a dump/load cycle is exact.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import BadFunction, ConfigError, NegativeWeightFunction
from ..measure import Order, Space, as_density, as_function, make_space
from ..transport import MetricSpace

FIELDS = ("mu", "f", "g", "u", "w", "dist", "base", "alpha", "p")


@dataclass(frozen=True, eq=False)
class Instance:
    space: Space
    f: np.ndarray
    alpha: float
    g: np.ndarray | None = None
    u: np.ndarray | None = None
    w: np.ndarray | None = None
    metric: MetricSpace | None = None
    p: float | None = None
    seed: int | None = None

    @property
    def order(self) -> Order:
        return Order(self.alpha)

    @property
    def n(self) -> int:
        return self.space.n

    def has(self, name: str) -> bool:
        if name == "metric":
            return self.metric is not None and self.p is not None
        return getattr(self, name) is not None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"mu": _floats(self.space.weights), "f": _floats(self.f)}
        for name in ("g", "u", "w"):
            value = getattr(self, name)
            if value is not None:
                d[name] = _floats(value)
        if self.metric is not None:
            d["dist"] = [_floats(row) for row in self.metric.dist]
            d["base"] = self.metric.base_index
        d["alpha"] = float(self.alpha)
        if self.p is not None:
            d["p"] = float(self.p)
        return d

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form."""
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()

    def replace(self, **changes) -> "Instance":
        d = self.to_dict()
        d.update(changes)
        return instance_from_dict(d, seed=self.seed)


def _floats(a) -> list[float]:
    return [float(x) for x in np.asarray(a, dtype=float)]


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def instance_from_dict(d: dict[str, Any], seed: int | None = None) -> Instance:
    """Validate a JSON-shaped mapping and build an :class:`Instance`."""
    unknown = set(d) - set(FIELDS)
    if unknown:
        raise ConfigError(f"unknown instance fields: {sorted(unknown)}")
    for key in ("mu", "f", "alpha"):
        if key not in d:
            raise ConfigError(f"instance is missing required field {key!r}")
    space = make_space(d["mu"])
    f = as_density(space, d["f"])
    alpha = Order(float(d["alpha"])).alpha
    funcs = {name: as_function(space, d[name]) for name in ("g", "u", "w") if d.get(name) is not None}
    if "w" in funcs and np.any(funcs["w"] < 0):
        raise NegativeWeightFunction("instance weight function w must be >= 0")
    metric = None
    if d.get("dist") is not None:
        metric = MetricSpace(space, np.asarray(d["dist"], dtype=float), int(d.get("base", 0)))
    p = d.get("p")
    if p is not None:
        p = float(p)
        if not (math.isfinite(p) and p >= 1):
            raise BadFunction(f"transport order p must be a finite number >= 1, got {p!r}")
    return Instance(space=space, f=f, alpha=alpha, metric=metric, p=p, seed=seed, **funcs)


def load_instance(path: str | Path) -> Instance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return instance_from_dict(data)


def dump_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance.to_dict(), indent=1) + "\n")
