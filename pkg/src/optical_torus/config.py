"""Run configuration and the single table of defaults.

Every tolerance and default used by the command-line tools lives in
``DEFAULTS``; the verification report embeds the table so a report can be
reproduced from its own contents.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .elliptic import K_MAX, K_MIN
from .errors import DomainError

# name -> (value, description)
DEFAULTS: dict[str, tuple[object, str]] = {
    "k": (1.0 / math.sqrt(2.0), "elliptic modulus of the target rectangle"),
    "pivot": (0, "polygon vertex sent to the rectangle corner R1"),
    "bounces": (8, "billiard reflections to trace"),
    "samples": (64, "mapped samples per straight leg"),
    "s_max": (20.0, "stepping-parameter horizon for free geodesics"),
    "grid": (21, "rows of the exported field grid (columns = 2 rows - 1)"),
    "seed": (20240611, "seed for randomised probes"),
    "jobs": (1, "worker processes for batch checks"),
    "tol_vertex": (1e-6, "SC vertex reproduction, relative to the diameter"),
    "tol_curve": (1e-6, "mapped vs integrated curve deviation"),
    "tol_energy": (1e-8, "max |E| along an integrated ray"),
    "tol_speed": (1e-6, "relative speed-constraint error"),
    "tol_tangent": (1e-6, "tangent jump at unfolded bounces (rad)"),
    "tol_closure": (1e-8, "closed-geodesic recurrence"),
    "tol_spread": (1e-8, "relative index spread of a constant field"),
    "tol_order": (1.9, "minimum observed harmonicity convergence order"),
    "tol_billiard": (1e-9, "periodic-orbit closure and unfolding collinearity"),
    "field_guard": (1e-8, "field puncture radius, times min(a, b)"),
    "dynamics_guard": (1e-4, "ray puncture guard radius, times min(a, b)"),
    "rtol": (1e-12, "integrator relative tolerance"),
    "atol": (1e-12, "integrator absolute tolerance"),
}

TOLERANCE_KEYS = tuple(k for k in DEFAULTS if k.startswith("tol_")) + ("field_guard", "dynamics_guard", "rtol", "atol")


def default(name: str):
    return DEFAULTS[name][0]


def defaults_table() -> str:
    """Markdown table of the defaults (used by the README and ``--help``)."""
    rows = ["| name | default | meaning |", "|---|---|---|"]
    for name, (value, doc) in DEFAULTS.items():
        rows.append(f"| `{name}` | `{value!r}` | {doc} |")
    return "\n".join(rows)


@dataclass
class RunConfig:
    polygon: str | None = None
    chart: str | None = None
    k: float | str = field(default_factory=lambda: default("k"))
    pivot: int = field(default_factory=lambda: default("pivot"))
    start: tuple[float, float] | None = None
    direction: tuple[float, float] | None = None
    bounces: int = field(default_factory=lambda: default("bounces"))
    samples: int = field(default_factory=lambda: default("samples"))
    s_max: float | None = None
    grid: int = field(default_factory=lambda: default("grid"))
    seed: int = field(default_factory=lambda: default("seed"))
    jobs: int = field(default_factory=lambda: default("jobs"))
    out: str = "out"
    tolerances: dict = field(default_factory=lambda: {k: default(k) for k in TOLERANCE_KEYS})

    def tol(self, name: str) -> float:
        return float(self.tolerances[name])

    def validate(self) -> "RunConfig":
        for name, value in self.tolerances.items():
            if name not in DEFAULTS:
                raise DomainError(f"unknown tolerance {name!r}")
            if not (isinstance(value, (int, float)) and value > 0):
                raise DomainError(f"tolerance {name} must be positive, got {value!r}")
        if self.k != "auto":
            k = float(self.k)
            if not K_MIN <= k <= K_MAX:
                raise DomainError(f"k = {k} outside the admissible range [{K_MIN}, {K_MAX}]")
        for name in ("polygon", "chart"):
            path = getattr(self, name)
            if path and name == "chart" and not Path(path).exists():
                raise DomainError(f"{name} file {path!r} does not exist")
        if self.bounces < 0 or self.samples < 2 or self.jobs < 1 or self.grid < 2:
            raise DomainError("bounces >= 0, samples >= 2, grid >= 2 and jobs >= 1 are required")
        return self

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        data = json.loads(Path(path).read_text())
        return cls().update(data)

    def update(self, data: dict) -> "RunConfig":
        known = {f.name for f in fields(self)}
        for key, value in data.items():
            if value is None:
                continue
            if key == "tolerances":
                self.tolerances = {**self.tolerances, **value}
            elif key in known:
                setattr(self, key, value)
            else:
                raise DomainError(f"unknown config key {key!r}")
        return self

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
