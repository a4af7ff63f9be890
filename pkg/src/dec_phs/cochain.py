"""Cochains on the four carriers and the wedge pairings between them."""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .complex import SimplicialComplex
from .errors import CarrierMismatch, DegreeMismatch


class Carrier(enum.Enum):
    PRIMAL = "primal"
    INTERIOR_DUAL = "interior_dual"
    BOUNDARY_PRIMAL = "boundary_primal"
    BOUNDARY_DUAL = "boundary_dual"

    @property
    def is_dual(self) -> bool:
        return self in (Carrier.INTERIOR_DUAL, Carrier.BOUNDARY_DUAL)

    @property
    def on_boundary(self) -> bool:
        return self in (Carrier.BOUNDARY_PRIMAL, Carrier.BOUNDARY_DUAL)


def cell_count(K: SimplicialComplex, carrier: Carrier, degree: int) -> int:
    """Number of cells carrying a ``degree``-cochain on ``carrier``.

    Dual cells are indexed by the primal simplex they are dual to.
    """
    n = K.n
    if carrier is Carrier.PRIMAL:
        top = n
    elif carrier is Carrier.INTERIOR_DUAL:
        top = n
    else:
        top = n - 1
    if degree < 0 or degree > top:
        raise DegreeMismatch(f"degree {degree} is outside 0..{top} on {carrier.value}")
    if carrier is Carrier.PRIMAL:
        return K.count(degree)
    if carrier is Carrier.INTERIOR_DUAL:
        return K.count(n - degree)
    if carrier is Carrier.BOUNDARY_PRIMAL:
        return K.boundary_count(degree)
    return K.boundary_count(n - 1 - degree)


@dataclass(frozen=True, eq=False)
class Cochain:
    """Values of a ``degree``-cochain on ``carrier`` of an n-dimensional complex."""

    carrier: Carrier
    degree: int
    values: np.ndarray
    n: int

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def on(cls, K: SimplicialComplex, carrier: Carrier, degree: int, values) -> "Cochain":
        size = cell_count(K, carrier, degree)
        vals = np.asarray(values, dtype=float).ravel()
        if vals.size == 1 and size != 1:
            vals = np.full(size, float(vals[0]))
        if vals.size != size:
            raise DegreeMismatch(f"{carrier.value} {degree}-cochain needs {size} values, got {vals.size}")
        return cls(carrier, degree, vals, K.n)

    @classmethod
    def zeros(cls, K: SimplicialComplex, carrier: Carrier, degree: int) -> "Cochain":
        return cls.on(K, carrier, degree, np.zeros(cell_count(K, carrier, degree)))

    @classmethod
    def random(cls, K: SimplicialComplex, carrier: Carrier, degree: int, rng: np.random.Generator) -> "Cochain":
        return cls.on(K, carrier, degree, rng.standard_normal(cell_count(K, carrier, degree)))

    def __len__(self) -> int:
        return self.values.size

    def _like(self, values) -> "Cochain":
        return Cochain(self.carrier, self.degree, values, self.n)

    def _check(self, other: "Cochain") -> None:
        if other.carrier is not self.carrier:
            raise CarrierMismatch(f"{self.carrier.value} vs {other.carrier.value}")
        if other.degree != self.degree or other.values.size != self.values.size:
            raise DegreeMismatch(f"degree {self.degree} vs {other.degree}")

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        return self._like(self.values + other.values)

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        return self._like(self.values - other.values)

    def __neg__(self) -> "Cochain":
        return self._like(-self.values)

    def __mul__(self, scalar: float) -> "Cochain":
        return self._like(float(scalar) * self.values)

    __rmul__ = __mul__


def _pair(a: Cochain, b: Cochain, dim: int) -> float:
    if a.n != b.n:
        raise DegreeMismatch("cochains live on complexes of different dimension")
    if a.carrier.is_dual == b.carrier.is_dual:
        raise CarrierMismatch("a pairing needs one primal and one dual cochain")
    if a.degree + b.degree != dim:
        raise DegreeMismatch(f"degrees {a.degree} + {b.degree} must add up to {dim}")
    if a.values.size != b.values.size:
        raise DegreeMismatch("cochain sizes differ")
    if a.carrier.is_dual:
        # dual-first order: swap at the graded cost (-1)^{k (dim - k)}
        k = b.degree
        return (-1) ** (k * (dim - k)) * float(np.dot(b.values, a.values))
    return float(np.dot(a.values, b.values))


def wedge_pair(a: Cochain, b: Cochain) -> float:
    """Integral of the wedge of a primal k-cochain and an interior dual (n-k)-cochain.

    Either argument order is accepted; dual-first order picks up the
    graded sign (-1)^{k(n-k)}.
    """
    for c in (a, b):
        if c.carrier.on_boundary:
            raise CarrierMismatch("use boundary_wedge_pair for boundary cochains")
    return _pair(a, b, a.n)


def boundary_wedge_pair(a: Cochain, b: Cochain) -> float:
    """Same as :func:`wedge_pair` on the boundary complex and its dual."""
    for c in (a, b):
        if not c.carrier.on_boundary:
            raise CarrierMismatch("boundary_wedge_pair needs boundary cochains")
    return _pair(a, b, a.n - 1)


def cochain_columns(symbol: str, cochain: Cochain) -> list[str]:
    return [f"{symbol}[{i}]" for i in range(len(cochain))]


def write_cochains_csv(path, cochains: Mapping[str, Cochain]) -> None:
    """Write several cochains as a single CSV row with ``symbol[id]`` columns."""
    header: list[str] = []
    row: list[str] = []
    for symbol, c in cochains.items():
        header += cochain_columns(symbol, c)
        row += [repr(float(v)) for v in c.values]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerow(row)
