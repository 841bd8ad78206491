"""Finite-breakpoint cadlag paths in R^d.

A path is given by breakpoints ``0 = t_0 < t_1 < ... < t_K`` and one value per
breakpoint.  ``Step`` paths hold ``value_k`` on ``[t_k, t_{k+1})``; ``Linear``
paths interpolate affinely between breakpoints.  Beyond ``t_K`` both kinds are
extended constantly at ``value_K``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ValidationError


class Interpolation(Enum):
    STEP = "step"
    LINEAR = "linear"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CadlagPath:
    breakpoints: np.ndarray
    values: np.ndarray
    interpolation: Interpolation = Interpolation.STEP

    def __post_init__(self):
        t = _frozen(self.breakpoints)
        v = np.array(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        v = _frozen(v)
        if t.ndim != 1 or t.size == 0:
            raise ValidationError("breakpoints must be a non-empty 1-d sequence")
        if v.ndim != 2 or v.shape[0] != t.size or v.shape[1] < 1:
            raise ValidationError("values must have one row per breakpoint")
        if t[0] != 0.0:
            raise ValidationError("first breakpoint must be 0")
        if not np.all(np.diff(t) > 0):
            raise ValidationError("breakpoints must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValidationError("breakpoints and values must be finite")
        interp = Interpolation(self.interpolation)
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "interpolation", interp)

    @classmethod
    def step(cls, breakpoints, values) -> "CadlagPath":
        return cls(np.asarray(breakpoints, float), np.asarray(values, float), Interpolation.STEP)

    @classmethod
    def linear(cls, breakpoints, values) -> "CadlagPath":
        return cls(np.asarray(breakpoints, float), np.asarray(values, float), Interpolation.LINEAR)

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    @property
    def is_scalar(self) -> bool:
        return self.values.shape[1] == 1

    @property
    def is_continuous(self) -> bool:
        return self.interpolation is Interpolation.LINEAR

    @property
    def horizon(self) -> float:
        """Last breakpoint; the path is constant afterwards."""
        return float(self.breakpoints[-1])

    @property
    def scalar_values(self) -> np.ndarray:
        _require_scalar(self)
        return self.values[:, 0]

    def __call__(self, t):
        """Evaluate the path (cadlag convention at breakpoints)."""
        t_arr = np.asarray(t, dtype=np.float64)
        if np.any(t_arr < 0):
            raise ValidationError("paths are defined on [0, inf)")
        bp = self.breakpoints
        k = np.searchsorted(bp, t_arr, side="right") - 1
        out = self.values[k]
        if self.interpolation is Interpolation.LINEAR and bp.size > 1:
            inner = k < bp.size - 1
            kk = np.where(inner, k, bp.size - 2)
            w = np.where(inner, (t_arr - bp[kk]) / (bp[kk + 1] - bp[kk]), 0.0)
            out = np.where(
                inner[..., None],
                self.values[kk] + w[..., None] * (self.values[kk + 1] - self.values[kk]),
                out,
            )
        return self._shape(out, t)

    def left_limit(self, t):
        """x_{t-}; equals x_t except at jump times of a step path."""
        if self.interpolation is Interpolation.LINEAR:
            return self(t)
        t_arr = np.asarray(t, dtype=np.float64)
        k = np.maximum(np.searchsorted(self.breakpoints, t_arr, side="left") - 1, 0)
        return self._shape(self.values[k], t)

    def _shape(self, out: np.ndarray, t):
        if self.is_scalar:
            out = out[..., 0]
            return float(out) if np.ndim(t) == 0 else out
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "interpolation": self.interpolation.value,
            "breakpoints": self.breakpoints.tolist(),
            "values": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CadlagPath":
        try:
            interp = Interpolation(str(d["interpolation"]).lower())
            return cls(np.asarray(d["breakpoints"], float), np.asarray(d["values"], float), interp)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed path object: {exc}") from exc
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed path object: {exc}") from exc


def load_path(path: str | Path) -> CadlagPath:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read path file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("a path file must hold a JSON object")
    return CadlagPath.from_dict(data)


def save_path(p: CadlagPath, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(p.to_dict(), fh)


def _require_scalar(path: CadlagPath) -> None:
    if not path.is_scalar:
        raise ValidationError(f"expected a scalar path, got dimension {path.dimension}")


def project(path: CadlagPath, gamma) -> CadlagPath:
    """Scalar path s -> gamma . x_s, same breakpoints and interpolation."""
    g = np.atleast_1d(np.asarray(gamma, dtype=np.float64))
    if g.ndim != 1 or g.size != path.dimension:
        raise ValidationError(
            f"projection has dimension {g.size}, path has dimension {path.dimension}"
        )
    if not np.all(np.isfinite(g)):
        raise ValidationError("projection entries must be finite")
    return CadlagPath(path.breakpoints, path.values @ g, path.interpolation)


def running_sup(path: CadlagPath, t: float) -> float:
    """sup_{s <= t} x_s (the value at t itself is included)."""
    v, k, xt = _window(path, t)
    return float(max(v[: k + 1].max(), xt))


def running_inf(path: CadlagPath, t: float) -> float:
    v, k, xt = _window(path, t)
    return float(min(v[: k + 1].min(), xt))


def _window(path: CadlagPath, t: float):
    _require_scalar(path)
    if t < 0:
        raise ValidationError("t must be nonnegative")
    v = path.scalar_values
    k = int(np.searchsorted(path.breakpoints, t, side="right")) - 1
    return v, k, path(t)


def jump_times(path: CadlagPath) -> np.ndarray:
    """Times with a nonzero jump; any coordinate counts for d > 1."""
    if path.interpolation is Interpolation.LINEAR:
        return np.empty(0)
    moved = np.any(np.diff(path.values, axis=0) != 0, axis=1)
    return path.breakpoints[1:][moved]
