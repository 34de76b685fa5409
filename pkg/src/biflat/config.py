"""Default tolerances and step parameters.

Defaults can be overridden per process with the environment variables
``BIFLAT_TOL_FD``, ``BIFLAT_TOL_ALGEBRAIC`` and ``BIFLAT_DELTA_SEP``.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    return float(raw)


@dataclass(frozen=True)
class Tolerances:
    fd: float = 1e-6
    algebraic: float = 1e-10
    delta_sep: float = 1e-3
    delta_h: float = 1e-10

    @classmethod
    def from_env(cls) -> "Tolerances":
        return cls(
            fd=_env_float("BIFLAT_TOL_FD", cls.fd),
            algebraic=_env_float("BIFLAT_TOL_ALGEBRAIC", cls.algebraic),
            delta_sep=_env_float("BIFLAT_DELTA_SEP", cls.delta_sep),
        )

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


DEFAULTS = Tolerances.from_env()
