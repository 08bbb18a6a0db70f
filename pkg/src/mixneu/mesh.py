"""Interval mesh with a truncated exterior collar.

The computational domain is an interval (a, b) extended on both sides by
a collar of width ``collar_width``.  Interior elements discretize (a, b)
uniformly with ``n_in`` cells; each collar carries ``n_col`` uniform
cells.  Piecewise-linear hat functions sit on every node, so exterior
values are genuine degrees of freedom for the nonlocal part of the
operator.

Element pairs feed the nonlocal assembly.  A pair (e, f) is admissible
when the product e x f meets the cross-shaped region
(Omega x Omega) u (Omega x Omega^c) u (Omega^c x Omega), i.e. when at
least one of the two elements lies inside [a, b]; collar-collar pairs
are excluded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import InvalidGeometryError

PROX_IDENTICAL = "identical"
PROX_ADJACENT = "adjacent"
PROX_SEPARATED = "separated"


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Nodes and node/element classification for the collared interval.

    Attributes
    ----------
    a, b : float
        Endpoints of the interval Omega = (a, b).
    n_in : int
        Number of interior elements.
    collar_width : float
        Width of the truncated exterior collar on each side.
    n_col : int
        Number of collar elements per side.
    nodes : ndarray
        Strictly increasing node coordinates from a - collar_width to
        b + collar_width.  a and b are nodes.
    interior_mask : ndarray of bool
        True exactly for nodes in [a, b] (endpoints included).
    """

    a: float
    b: float
    n_in: int
    collar_width: float
    n_col: int
    nodes: np.ndarray = field(repr=False)
    interior_mask: np.ndarray = field(repr=False)

    @property
    def h(self) -> float:
        """Interior element length."""
        return (self.b - self.a) / self.n_in

    @property
    def h_col(self) -> float:
        """Collar element length."""
        return self.collar_width / self.n_col

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def n_elements(self) -> int:
        return self.nodes.size - 1

    def element_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Left and right endpoints of every element."""
        return self.nodes[:-1], self.nodes[1:]

    def element_is_interior(self, e: int | np.ndarray) -> bool | np.ndarray:
        """Whether element e lies inside [a, b] (index-range test, exact)."""
        return (e >= self.n_col) & (e < self.n_col + self.n_in)

    def interior_elements(self) -> np.ndarray:
        return np.arange(self.n_col, self.n_col + self.n_in)


def build_mesh(a: float, b: float, n_in: int, collar_width: float,
               n_col: int) -> Mesh1D:
    """Build the collared interval mesh.

    Parameters
    ----------
    a, b : float
        Interval endpoints, a < b, finite.
    n_in : int
        Interior element count, >= 2.
    collar_width : float
        Exterior collar width per side, > 0.
    n_col : int
        Collar element count per side, >= 1.
    """
    for name, val in (("a", a), ("b", b), ("collar_width", collar_width)):
        if not np.isfinite(val):
            raise InvalidGeometryError(f"{name} must be finite, got {val!r}")
    if not b > a:
        raise InvalidGeometryError(f"need a < b, got a={a}, b={b}")
    if not (isinstance(n_in, (int, np.integer)) and n_in >= 2):
        raise InvalidGeometryError(f"n_in must be an integer >= 2, got {n_in!r}")
    if not collar_width > 0:
        raise InvalidGeometryError(
            f"collar_width must be positive, got {collar_width}")
    if not (isinstance(n_col, (int, np.integer)) and n_col >= 1):
        raise InvalidGeometryError(f"n_col must be an integer >= 1, got {n_col!r}")

    left = np.linspace(a - collar_width, a, n_col + 1)
    inner = np.linspace(a, b, n_in + 1)
    right = np.linspace(b, b + collar_width, n_col + 1)
    nodes = np.concatenate([left[:-1], inner, right[1:]])
    if not np.all(np.diff(nodes) > 0):
        raise InvalidGeometryError(
            "mesh nodes are not strictly increasing; the requested "
            "resolution is below floating-point spacing")

    mask = np.zeros(nodes.size, dtype=bool)
    mask[n_col:n_col + n_in + 1] = True
    return Mesh1D(a=float(a), b=float(b), n_in=int(n_in),
                  collar_width=float(collar_width), n_col=int(n_col),
                  nodes=nodes, interior_mask=mask)


def element_pairs(mesh: Mesh1D) -> Iterator[tuple[int, int, str]]:
    """Yield ordered element pairs meeting the cross-shaped region.

    Yields (e, f, proximity) for every ordered pair with at least one
    interior element.  Proximity is "identical" (e == f), "adjacent"
    (closures share exactly one vertex, |e - f| == 1) or "separated".
    The enumeration is symmetric: (e, f) appears iff (f, e) does.
    """
    n_el = mesh.n_elements
    lo, hi = mesh.n_col, mesh.n_col + mesh.n_in
    for e in range(n_el):
        e_int = lo <= e < hi
        for f in range(n_el):
            if not (e_int or lo <= f < hi):
                continue
            if e == f:
                prox = PROX_IDENTICAL
            elif abs(e - f) == 1:
                prox = PROX_ADJACENT
            else:
                prox = PROX_SEPARATED
            yield e, f, prox


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Legendre rule on the reference element [0, 1].

    ``order`` is the point count per direction; ``split_depth`` caps the
    recursive comparable-splitting applied to near-singular separated
    element pairs (pairs whose gap is small against their lengths).
    """

    order: int
    split_depth: int
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.order < 2:
            raise InvalidGeometryError(f"quadrature order must be >= 2, got {self.order}")
        if self.split_depth < 0:
            raise InvalidGeometryError(
                f"split_depth must be >= 0, got {self.split_depth}")
        if not (np.all(self.weights > 0)
                and abs(self.weights.sum() - 1.0) < 1e-12):
            raise InvalidGeometryError("quadrature weights must be positive "
                                       "and sum to the reference length 1")


def gauss_rule(order: int = 10, split_depth: int = 3) -> QuadratureRule:
    """Gauss-Legendre rule mapped to [0, 1]."""
    if not (isinstance(order, (int, np.integer)) and order >= 2):
        raise InvalidGeometryError(f"quadrature order must be an integer >= 2, got {order!r}")
    x, w = np.polynomial.legendre.leggauss(int(order))
    return QuadratureRule(order=int(order), split_depth=int(split_depth),
                          points=0.5 * (x + 1.0), weights=0.5 * w)
