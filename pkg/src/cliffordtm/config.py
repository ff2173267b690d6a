"""Run configuration shared by the CLI subcommands."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from typing import Optional

from .clifford import MAX_DIM
from .exceptions import ConfigError
from .kernels import Domain


@dataclass
class RunConfig:
    m: int = 2
    domain: str = "ball"
    quad_degree: int = 40
    radial_step: float = 0.05
    r_max: float = 0.95
    n_angular: Optional[int] = None
    refine_rounds: int = 2
    direction_degree: int = 6
    stop_tol: float = 1e-8
    n_max: int = 10
    seed: int = 42
    out: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        def need(ok, key, msg):
            if not ok:
                raise ConfigError(key, msg)

        for f in fields(self):
            v = getattr(self, f.name)
            if f.type in ("int", "Optional[int]") and v is not None:
                need(isinstance(v, int) and not isinstance(v, bool), f.name, f"expected an integer, got {v!r}")
            if f.type == "float":
                need(isinstance(v, (int, float)) and not isinstance(v, bool), f.name, f"expected a number, got {v!r}")
        need(1 <= self.m <= MAX_DIM, "m", f"m must lie in 1..{MAX_DIM}")
        try:
            self.domain = Domain.parse(self.domain).value
        except ValueError as exc:
            raise ConfigError("domain", str(exc)) from None
        need(self.quad_degree >= 0, "quad_degree", "quadrature degree must be >= 0")
        need(0 < self.r_max < 1, "r_max", "search radius must lie in (0, 1)")
        need(0 < self.radial_step <= self.r_max, "radial_step", "radial step must lie in (0, r_max]")
        need(self.n_angular is None or self.n_angular >= 1, "n_angular", "need at least one angular point")
        need(self.refine_rounds >= 0, "refine_rounds", "must be >= 0")
        need(self.direction_degree >= 0, "direction_degree", "must be >= 0")
        need(self.stop_tol >= 0, "stop_tol", "must be >= 0")
        need(self.n_max >= 0, "n_max", "must be >= 0")
        return self

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("<root>", "configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        for key in obj:
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
        return cls(**obj)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(str(path), exc.strerror) from None
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}", exc.msg) from None
        return cls.from_dict(obj)

    def replace(self, **changes) -> "RunConfig":
        obj = self.to_json()
        obj.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig.from_dict(obj)

    def search_grid(self):
        from .afd import HalfSpaceSearchGrid, SearchGrid

        if self.domain == "ball":
            return SearchGrid(self.m, self.radial_step, self.r_max, self.n_angular, self.refine_rounds)
        return HalfSpaceSearchGrid(self.m, refine_rounds=self.refine_rounds)
