"""Numerical tolerances shared by every module.

A configuration file is plain text with one ``key = value`` pair per line.
Blank lines and lines starting with ``#`` are ignored.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Config:
    """Tolerances for series truncation, root finding and integration.

    Attributes
    ----------
    series_tol : float
        Relative size of the next series term at which summation stops.
    newton_tol : float
        Residual target for Newton iterations on Hecke forms.
    ode_rtol : float
        Relative tolerance of the adaptive Runge-Kutta integrator.
    zero_tol : float
        Threshold below which a value is treated as zero.
    pole_floor : float
        Minimal lattice distance accepted by the pole-bearing functions.
    im_tau_floor : float
        Moduli with smaller imaginary part carry a precision warning.
    """

    series_tol: float = 1e-18
    newton_tol: float = 1e-13
    ode_rtol: float = 1e-11
    zero_tol: float = 1e-8
    pole_floor: float = 1e-8
    im_tau_floor: float = 1e-3

    @classmethod
    def from_file(cls, path: str | Path) -> "Config":
        values = {}
        names = {f.name for f in dataclasses.fields(cls)}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in names:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = float(value)
        return cls(**values)


DEFAULT = Config()
