"""Run configuration and its flat ``key=value`` manifest form."""

import dataclasses
from dataclasses import dataclass, fields
from typing import Optional

from .cluster import STRATEGIES
from .graph import FORMATS
from .program import SCATTER_VARIANTS
from .validation import check_positive_int, check_probability
from .walks import ERASURE_KINDS

COMMANDS = ("exact", "frogwild", "sweep", "compare-sparsify", "walk")
SWEEP_AXES = ("ps", "frogs", "iters", "machines")
WALK_PROCESSES = ("fixed-step", "truncated-geometric", "erasure")
# execution details that never change results; kept out of manifests
_NOT_IN_MANIFEST = ("out", "threads")


@dataclass
class RunConfig:
    command: str = "frogwild"
    graph: str = "suite:pa-200"
    format: str = "snap-with-comments"
    machines: int = 8
    partition: str = "random-edge"
    ps: float = 1.0
    pt: float = 0.15
    frogs: int = 100_000
    iters: Optional[int] = None
    k: int = 10
    seed: int = 0
    seeds: int = 1
    scatter: str = "ceil"
    erasure: str = "at-least-one"
    process: str = "truncated-geometric"
    delta: float = 0.1
    tol: float = 1e-10
    keep: float = 1.0
    axis: Optional[str] = None
    values: Optional[str] = None
    sync_bytes: int = 16
    frog_bytes: int = 24
    out: str = "out"
    threads: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"command must be one of {COMMANDS}")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        if self.partition not in STRATEGIES:
            raise ValueError(f"partition must be one of {STRATEGIES}")
        if self.scatter not in SCATTER_VARIANTS:
            raise ValueError(f"scatter must be one of {SCATTER_VARIANTS}")
        if self.erasure not in ERASURE_KINDS:
            raise ValueError(f"erasure must be one of {ERASURE_KINDS}")
        if self.process not in WALK_PROCESSES:
            raise ValueError(f"process must be one of {WALK_PROCESSES}")
        check_probability(self.ps, "ps")
        check_probability(self.pt, "pt", allow_zero=False)
        check_probability(self.keep, "keep", allow_zero=False)
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        for name in ("machines", "frogs", "k", "seeds", "sync_bytes", "frog_bytes", "threads"):
            check_positive_int(getattr(self, name), name)
        check_positive_int(self.seed, "seed", allow_zero=True)
        if self.iters is not None:
            check_positive_int(self.iters, "iters")
        if self.axis is not None and self.axis not in SWEEP_AXES:
            raise ValueError(f"axis must be one of {SWEEP_AXES}")

    @property
    def t_max(self):
        return 20 if self.iters is None else self.iters

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_text(self, *, manifest=False):
        lines = []
        for f in fields(self):
            if manifest and f.name in _NOT_IN_MANIFEST:
                continue
            lines.append(f"{f.name}={_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, **overrides):
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep or key not in types:
                raise ValueError(f"manifest line {lineno}: unrecognised entry {line!r}")
            values[key] = _parse(val, types[key])
        values.update(overrides)
        return cls(**values)


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(text, tp):
    if text == "none":
        return None
    base = {Optional[int]: int, Optional[str]: str}.get(tp, tp)
    if base in (int, "int"):
        return int(text)
    if base in (float, "float"):
        return float(text)
    return text
