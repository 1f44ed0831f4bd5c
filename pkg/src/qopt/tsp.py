"""Euclidean TSP instances, tours, and the 2-opt neighborhood."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TspInstance",
    "Tour",
    "generate_instance",
    "save_instance",
    "load_instance",
    "tour_cost",
    "nn_tour",
    "two_opt_apply",
    "two_opt_delta",
]


@dataclass(frozen=True)
class TspInstance:
    """A set of cities in the plane.

    ``coords`` is an (n, 2) float64 array, frozen read-only on
    construction.  ``coord_range`` records the side length of the square
    the cities were drawn from; every coordinate must lie in
    [0, coord_range].
    """

    coords: np.ndarray
    coord_range: float = 200.0

    def __post_init__(self) -> None:
        pts = np.array(self.coords, dtype=np.float64, copy=True)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"coords must have shape (n, 2), got {pts.shape}")
        if pts.shape[0] < 3:
            raise ValueError(f"need at least 3 cities, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("coordinates must be finite")
        if not (self.coord_range > 0.0) or math.isinf(self.coord_range):
            raise ValueError(f"coord_range must be finite and > 0, got {self.coord_range!r}")
        if pts.min() < 0.0 or pts.max() > self.coord_range:
            raise ValueError(
                f"coordinates must lie in [0, {self.coord_range}], "
                f"got range [{pts.min()}, {pts.max()}]"
            )
        pts.setflags(write=False)
        object.__setattr__(self, "coords", pts)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def distance_matrix(self) -> np.ndarray:
        """Full (n, n) matrix of pairwise Euclidean distances."""
        c = self.coords
        return np.hypot(c[:, None, 0] - c[None, :, 0], c[:, None, 1] - c[None, :, 1])


@dataclass(frozen=True)
class Tour:
    """A closed visiting order: a permutation of 0..n-1.

    The tour is cyclic; the edge from the last city back to the first is
    implied.  Construction validates the permutation property.
    """

    order: tuple[int, ...]

    def __post_init__(self) -> None:
        order = tuple(int(i) for i in self.order)
        n = len(order)
        if n < 3:
            raise ValueError(f"tour must visit at least 3 cities, got {n}")
        if sorted(order) != list(range(n)):
            raise ValueError("tour order must be a permutation of 0..n-1")
        object.__setattr__(self, "order", order)

    @property
    def n(self) -> int:
        return len(self.order)


def generate_instance(n: int, coord_range: float = 200.0, seed: int = 0) -> TspInstance:
    """Draw ``n`` cities uniformly from the [0, coord_range] square."""
    if n < 3:
        raise ValueError(f"need at least 3 cities, got {n}")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, coord_range, size=(n, 2))
    return TspInstance(pts, coord_range)


def save_instance(instance: TspInstance, path) -> None:
    """Write an instance as plain text: first line n, then one 'x y' per city.

    Coordinates are written with shortest round-trip precision, so
    :func:`load_instance` recovers them bit for bit.
    """
    lines = [str(instance.n)]
    for x, y in instance.coords:
        lines.append(f"{float(x)!r} {float(y)!r}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_instance(path, coord_range: float | None = None) -> TspInstance:
    """Read an instance written by :func:`save_instance`.

    If ``coord_range`` is omitted it defaults to 200 or, when a coordinate
    exceeds that, the smallest value that fits the data.
    """
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError(f"{path}: empty instance file")
    n = int(tokens[0])
    if len(tokens) != 1 + 2 * n:
        raise ValueError(
            f"{path}: header says {n} cities but found {(len(tokens) - 1) / 2} coordinate pairs"
        )
    pts = np.array(tokens[1:], dtype=np.float64).reshape(n, 2)
    if coord_range is None:
        coord_range = max(200.0, float(pts.max()))
    return TspInstance(pts, coord_range)


def tour_cost(instance: TspInstance, tour: Tour) -> float:
    """Total closed-loop Euclidean length of the tour."""
    if tour.n != instance.n:
        raise ValueError(f"tour visits {tour.n} cities but instance has {instance.n}")
    pts = instance.coords[list(tour.order)]
    d = pts - np.roll(pts, -1, axis=0)
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def nn_tour(instance: TspInstance, start: int = 0) -> Tour:
    """Nearest-neighbor construction from ``start``.

    Distance ties are broken toward the lowest city index, which makes the
    construction deterministic for any instance.
    """
    n = instance.n
    if not 0 <= start < n:
        raise IndexError(f"start must be in [0, {n}), got {start}")
    dist = instance.distance_matrix()
    visited = np.zeros(n, dtype=bool)
    order = [start]
    visited[start] = True
    current = start
    for _ in range(n - 1):
        row = dist[current].copy()
        row[visited] = np.inf
        current = int(np.argmin(row))  # argmin takes the first minimum: lowest index
        visited[current] = True
        order.append(current)
    return Tour(tuple(order))


def _check_segment(n: int, i: int, j: int) -> None:
    if not (0 <= i <= j <= n - 1):
        raise ValueError(f"need 0 <= i <= j <= {n - 1}, got i={i}, j={j}")
    if i == 0 and j == n - 1:
        raise ValueError("reversing the whole tour is not a 2-opt move")


def two_opt_apply(tour: Tour, i: int, j: int) -> Tour:
    """Reverse positions i..j of the tour (inclusive).  i == j is a no-op."""
    _check_segment(tour.n, i, j)
    order = list(tour.order)
    order[i:j + 1] = order[i:j + 1][::-1]
    return Tour(tuple(order))


def two_opt_delta(instance: TspInstance, tour: Tour, i: int, j: int) -> float:
    """Cost change of :func:`two_opt_apply` without rebuilding the tour.

    Reversing a segment only swaps the two boundary edges: (a, b) and
    (c, d) become (a, c) and (b, d), where a precedes position i and d
    follows position j cyclically.  Interior edges keep their length, so
    the delta is a four-distance expression evaluated in O(1).
    """
    n = tour.n
    _check_segment(n, i, j)
    if i == j:
        return 0.0
    order = tour.order
    a, b = order[i - 1], order[i]
    c, d = order[j], order[(j + 1) % n]
    pts = instance.coords
    ax, ay = pts[a]
    bx, by = pts[b]
    cx, cy = pts[c]
    dx, dy = pts[d]
    return (
        math.hypot(ax - cx, ay - cy)
        + math.hypot(bx - dx, by - dy)
        - math.hypot(ax - bx, ay - by)
        - math.hypot(cx - dx, cy - dy)
    )
