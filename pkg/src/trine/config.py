"""Search configuration shared by the mask search and the CLI.

All randomness in a search flows from the single seed; per-sample bits
are derived with SHA-256 so results are reproducible across platforms
and process counts.  ``threads`` controls execution only and never
changes results, so it is excluded from the semantic hash.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, replace
from typing import Optional

THREADS_ENV_VAR = "TRINE_THREADS"


@dataclass(frozen=True)
class Config:
    lmin: int = 3
    lmax: int = 24
    exhaustive_cutoff: int = 12
    samples_per_L: int = 1000
    seed: int = 20230731
    check_level: str = "light"
    max_steps: int = 10**6
    threads: int = 1
    cond1_interpretation: str = "complemented"
    time_origin: int = 1

    def __post_init__(self):
        if self.lmin < 3:
            raise ValueError("lmin must be at least 3")
        if self.lmax < self.lmin:
            raise ValueError("lmax must be >= lmin")
        if self.check_level not in ("light", "full"):
            raise ValueError(f"unknown check level {self.check_level!r}")
        if self.cond1_interpretation not in ("raw", "complemented"):
            raise ValueError(
                f"unknown interpretation {self.cond1_interpretation!r}"
            )
        if self.time_origin not in (0, 1):
            raise ValueError("time_origin must be 0 or 1")
        if self.samples_per_L < 0:
            raise ValueError("samples_per_L must be >= 0")

    def semantic_dict(self) -> dict:
        """Everything that influences results (threads does not)."""
        data = asdict(self)
        data.pop("threads")
        return data

    def semantic_hash(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def with_overrides(self, **kwargs) -> "Config":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs) if kwargs else self

    @classmethod
    def from_json_dict(cls, data: dict) -> "Config":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "Config":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def resolve_threads(requested: Optional[int] = None) -> int:
    """Thread-count resolution: explicit argument, then the environment
    override, then one."""
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR}={env!r} is not an integer")
        if value > 0:
            return value
    return 1
