"""Tolerance record and logging setup shared by every module."""

from __future__ import annotations

import logging
import os
from typing import Iterable, Optional

from pydantic import BaseModel, ConfigDict, Field

LOG_ENV_VAR = "AMPERE_LOG"
TOL_ENV_VAR = "AMPERE_TOL"
SEED_ENV_VAR = "AMPERE_SEED"

_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Tolerances(BaseModel):
    """Every numerical tolerance used by the toolkit, in one place."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    geom: float = Field(default=1e-12, gt=0, description="Polygon and hull geometry.")
    conv: float = Field(default=1e-10, gt=0, description="Gradient monotonicity across edges.")
    psd: float = Field(default=1e-12, gt=0, description="PSD / PD predicates.")
    ineq: float = Field(default=1e-9, gt=0, description="Relative slack of inequality checks.")
    meas: float = Field(default=1e-6, gt=0, description="Monge-Ampère mass comparisons.")
    cmp: float = Field(default=1e-8, gt=0, description="Pointwise comparison principle.")
    bc: float = Field(default=1e-10, gt=0, description="Boundary data matching.")
    solve: float = Field(default=1e-6, gt=0, description="Relative site-mass residual.")
    lin: float = Field(default=1e-10, gt=0, description="Relative Krylov residual.")
    abs: float = Field(default=1e-14, gt=0, description="Absolute Krylov residual floor.")
    fp: float = Field(default=1e-6, gt=0, description="Fixed-point gap of the continuation.")

    def with_overrides(self, overrides: Iterable[str]) -> "Tolerances":
        """Return a copy with ``name=value`` overrides applied.

        Raises:
            ValueError: On unknown names or unparsable values.
        """
        updates: dict[str, float] = {}
        for item in overrides:
            item = item.strip()
            if not item:
                continue
            name, sep, raw = item.partition("=")
            name = name.strip()
            if not sep or name not in type(self).model_fields:
                raise ValueError(
                    f"Unknown tolerance override '{item}'. "
                    f"Expected name=value with name in {sorted(type(self).model_fields)}."
                )
            try:
                updates[name] = float(raw)
            except ValueError as exc:
                raise ValueError(f"Tolerance '{name}' needs a number, got '{raw}'.") from exc
        if not updates:
            return self
        return type(self).model_validate({**self.model_dump(), **updates})

    @classmethod
    def from_env(cls) -> "Tolerances":
        """Defaults with ``AMPERE_TOL`` (comma separated ``name=value``) applied."""
        raw = os.environ.get(TOL_ENV_VAR, "")
        return cls().with_overrides(raw.split(","))


def configure_logging(level: Optional[str] = None) -> None:
    """Attach a stream handler to the package logger.

    The level comes from ``level`` or ``AMPERE_LOG`` and defaults to WARNING.
    Repeated calls only adjust the level.
    """
    name = (level or os.environ.get(LOG_ENV_VAR) or "WARNING").upper()
    resolved = logging.getLevelName(name)
    if not isinstance(resolved, int):
        raise ValueError(f"Unknown log level '{name}' in {LOG_ENV_VAR}.")
    logger = logging.getLogger("langchain_ampere")
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        logger.addHandler(handler)
    logger.setLevel(resolved)
