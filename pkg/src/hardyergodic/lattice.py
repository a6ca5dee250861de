"""Finitely supported functions on ``Z^m`` and their binary file format.

File layout (all little-endian): ``int64 m``, ``int64 lower[m]``,
``int64 upper[m]`` (exclusive), then the values on the box as row-major
complex128.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["LatticeFunction", "Character"]

_COMPLEX_LE = np.dtype("<c16")
_INT_LE = np.dtype("<i8")


@dataclass(frozen=True)
class LatticeFunction:
    """Values on the integer box ``lower <= x < lower + values.shape``; zero elsewhere."""

    lower: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if not np.issubdtype(vals.dtype, np.number):
            raise TypeError("lattice values must be numeric")
        if vals.ndim == 0:
            vals = vals.reshape(1)
        lower = tuple(int(v) for v in np.atleast_1d(self.lower))
        if len(lower) != vals.ndim:
            raise ValueError(f"box corner has {len(lower)} coordinates for a {vals.ndim}-dimensional array")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "values", vals)

    @classmethod
    def delta(cls, point: Sequence[int] | int, m: int | None = None) -> "LatticeFunction":
        point = tuple(np.atleast_1d(point).tolist())
        if m is not None and len(point) != m:
            raise ValueError("point has the wrong dimension")
        return cls(point, np.ones((1,) * len(point), dtype=complex))

    @property
    def m(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def upper(self) -> tuple[int, ...]:
        return tuple(lo + n for lo, n in zip(self.lower, self.shape))

    def at(self, points) -> np.ndarray:
        """Values at integer points (last axis = coordinates), zero off the box."""
        pts = np.asarray(points, dtype=np.int64)
        if self.m == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        rel = pts - np.asarray(self.lower)
        inside = np.all((rel >= 0) & (rel < np.asarray(self.shape)), axis=-1)
        out = np.zeros(inside.shape, dtype=np.result_type(self.values.dtype, complex))
        if np.any(inside):
            out[inside] = self.values[tuple(rel[inside].T)]
        return out

    def norm(self, p: float = 2.0) -> float:
        a = np.abs(self.values).ravel()
        if p == np.inf:
            return float(a.max(initial=0.0))
        return float(np.sum(a**p) ** (1.0 / p))

    def inner(self, other: "LatticeFunction") -> complex:
        """``sum_x self(x) * conj(other(x))``."""
        a, b = _common(self, other)
        return complex(np.vdot(b.values, a.values))

    def embed(self, lower: Sequence[int], shape: Sequence[int]) -> "LatticeFunction":
        """Same function on a larger box (which must contain the current one)."""
        lower = tuple(int(v) for v in lower)
        shape = tuple(int(v) for v in shape)
        off = [lo_self - lo for lo_self, lo in zip(self.lower, lower)]
        if any(o < 0 for o in off) or any(o + n > s for o, n, s in zip(off, self.shape, shape)):
            raise ValueError("target box does not contain the support box")
        out = np.zeros(shape, dtype=np.result_type(self.values.dtype, complex))
        out[tuple(slice(o, o + n) for o, n in zip(off, self.shape))] = self.values
        return LatticeFunction(lower, out)

    def __add__(self, other: "LatticeFunction") -> "LatticeFunction":
        a, b = _common(self, other)
        return LatticeFunction(a.lower, a.values + b.values)

    def __sub__(self, other: "LatticeFunction") -> "LatticeFunction":
        a, b = _common(self, other)
        return LatticeFunction(a.lower, a.values - b.values)

    def __mul__(self, c) -> "LatticeFunction":
        return LatticeFunction(self.lower, self.values * c)

    __rmul__ = __mul__

    # -- binary IO -------------------------------------------------------

    def to_bytes(self) -> bytes:
        header = np.array([self.m, *self.lower, *self.upper], dtype=_INT_LE)
        body = np.ascontiguousarray(self.values, dtype=_COMPLEX_LE)
        return header.tobytes() + body.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "LatticeFunction":
        m = int(np.frombuffer(data, dtype=_INT_LE, count=1)[0])
        if m < 1:
            raise ValueError("corrupt lattice file: dimension < 1")
        bounds = np.frombuffer(data, dtype=_INT_LE, count=1 + 2 * m)[1:]
        lower, upper = bounds[:m], bounds[m:]
        shape = tuple(int(u - l) for l, u in zip(lower, upper))
        offset = _INT_LE.itemsize * (1 + 2 * m)
        count = int(np.prod(shape))
        if len(data) != offset + count * _COMPLEX_LE.itemsize:
            raise ValueError("corrupt lattice file: payload size does not match the box")
        vals = np.frombuffer(data, dtype=_COMPLEX_LE, count=count, offset=offset).reshape(shape)
        return cls(tuple(int(v) for v in lower), vals.astype(complex))

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path: str | os.PathLike) -> "LatticeFunction":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def _common(a: LatticeFunction, b: LatticeFunction) -> tuple[LatticeFunction, LatticeFunction]:
    if a.m != b.m:
        raise ValueError("lattice functions live in different dimensions")
    lower = tuple(min(x, y) for x, y in zip(a.lower, b.lower))
    upper = tuple(max(x, y) for x, y in zip(a.upper, b.upper))
    shape = tuple(u - l for l, u in zip(lower, upper))
    return a.embed(lower, shape), b.embed(lower, shape)


@dataclass(frozen=True)
class Character:
    """The pure frequency ``x -> e(xi . x)`` on ``Z^m`` (unbounded support).

    Offers the same ``at`` lookup as :class:`LatticeFunction`, so it can be fed
    to the orbit averages directly.
    """

    xi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(float(v) for v in np.atleast_1d(self.xi)))

    @property
    def m(self) -> int:
        return len(self.xi)

    def at(self, points) -> np.ndarray:
        from .expsum import frac_product

        pts = np.asarray(points, dtype=np.int64)
        if self.m == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        theta = sum(frac_product(c, pts[..., i]) for i, c in enumerate(self.xi))
        return np.exp(2j * np.pi * (theta - np.rint(theta)))
