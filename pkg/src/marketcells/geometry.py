"""Planar geometry for market cells.

Cells are intersections of half-planes clipped to the evaluation window,
built incrementally: start from the window rectangle and cut with one
half-plane at a time.  Everything is tolerance-aware; vertices closer
than ``EPS_GEOM`` (in window units) are merged so near-degenerate cuts do
not spawn phantom zero-length edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegeneratePair
from .model import Box

__all__ = [
    "EPS_GEOM",
    "CellResult",
    "ConvexPolygon",
    "HalfPlane",
    "Interval",
    "bisector",
    "intersect_halfplanes",
    "polygon_area",
    "shared_edge",
]

EPS_GEOM = 1e-9


@dataclass(frozen=True)
class Interval:
    """Closed interval; the 1D market cell."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("interval lo exceeds hi")

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class HalfPlane:
    """The set ``{x : a . x <= b}`` with nonzero normal ``a``."""

    a: tuple[float, float]
    b: float

    def __post_init__(self) -> None:
        if self.a[0] == 0.0 and self.a[1] == 0.0:
            raise ValueError("half-plane normal must be nonzero")

    def signed_violation(self, point: Sequence[float]) -> float:
        """Positive outside, negative inside, in normal-scaled units."""
        return self.a[0] * point[0] + self.a[1] * point[1] - self.b


class ConvexPolygon:
    """Convex polygon with counterclockwise vertices."""

    __slots__ = ("vertices",)

    def __init__(self, vertices: np.ndarray):
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise ValueError("polygon needs at least 3 two-dimensional vertices")
        verts = verts.copy()
        verts.flags.writeable = False
        self.vertices = verts

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        return polygon_area(self)

    @property
    def perimeter(self) -> float:
        d = np.diff(np.vstack([self.vertices, self.vertices[:1]]), axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    def is_convex(self, tol: float = EPS_GEOM) -> bool:
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        scale = max(1.0, float(np.abs(e).max()) ** 2)
        return bool(np.all(cross >= -tol * scale))

    def contains(self, point: Sequence[float], tol: float = EPS_GEOM) -> bool:
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        w = np.asarray(point, dtype=float) - v
        cross = e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0]
        scale = max(1.0, float(np.abs(e).max()))
        return bool(np.all(cross >= -tol * scale))


@dataclass(frozen=True)
class CellResult:
    """Outcome of a half-plane intersection clipped to a window.

    ``polygon`` is ``None`` when the intersection is empty (or degenerate
    below the geometric tolerance).  ``touches_window`` reports whether
    any surviving edge lies on the window boundary, which means the
    window truncated an unbounded or oversized cell.
    """

    polygon: ConvexPolygon | None
    touches_window: bool

    @property
    def is_empty(self) -> bool:
        return self.polygon is None


def bisector(
    xi: Sequence[float], pi_eff: float, xj: Sequence[float], pj_eff: float
) -> HalfPlane:
    """Half-plane where company i's aggregate price is at most j's.

    ``pi_eff`` and ``pj_eff`` are the effective additive weights (mill
    price minus brand bonus).  Equal weights give the perpendicular
    bisector of the two positions; a weight advantage pushes the boundary
    toward the pricier company.
    """
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    diff = xj - xi
    if not np.any(diff != 0.0):
        raise DegeneratePair("companies share a position; no bisector exists")
    a = 2.0 * diff
    b = pj_eff - pi_eff + float(xj @ xj) - float(xi @ xi)
    return HalfPlane((float(a[0]), float(a[1])), float(b))


def clip_by_halfplane(verts: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """One Sutherland-Hodgman pass; returns the clipped vertex loop."""
    s = verts @ a - b
    if np.all(s <= 0.0):
        return verts
    if np.all(s > 0.0):
        return verts[:0]
    out: list[np.ndarray] = []
    n = len(verts)
    for k in range(n):
        k2 = (k + 1) % n
        inside_k, inside_k2 = s[k] <= 0.0, s[k2] <= 0.0
        if inside_k:
            out.append(verts[k])
        if inside_k != inside_k2:
            t = s[k] / (s[k] - s[k2])
            out.append(verts[k] + t * (verts[k2] - verts[k]))
    return np.array(out) if out else verts[:0]


def merge_close_vertices(verts: np.ndarray, eps: float) -> np.ndarray:
    """Collapse consecutive vertices closer than ``eps`` (cyclically)."""
    if len(verts) == 0:
        return verts
    keep: list[np.ndarray] = []
    for v in verts:
        if not keep or np.hypot(*(v - keep[-1])) > eps:
            keep.append(v)
    while len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= eps:
        keep.pop()
    return np.array(keep)


def clip_cell(
    anchor: np.ndarray,
    normals: np.ndarray,
    offsets: np.ndarray,
    window: Box,
    eps: float = EPS_GEOM,
) -> np.ndarray:
    """Intersect ``a_k . x <= b_k`` with the window, nearest cut first.

    ``anchor`` is a reference point (the company position).  Sorting the
    half-planes by their boundary's distance from the anchor lets distant
    ones be skipped outright: once every current vertex is nearer to the
    anchor than a boundary line, that line (and all later ones) cannot cut
    the cell.  Returns the vertex loop, possibly empty.
    """
    scale = max(1.0, window.diameter)
    verts = window.corners()
    if len(normals) == 0:
        return verts
    norms = np.hypot(normals[:, 0], normals[:, 1])
    t = (offsets - normals @ anchor) / norms
    for idx in np.argsort(t):
        rho = float(np.max(np.hypot(*(verts - anchor).T)))
        if t[idx] >= rho + eps * scale:
            break
        verts = clip_by_halfplane(verts, normals[idx], offsets[idx])
        if len(verts) < 3:
            return verts[:0]
    verts = merge_close_vertices(verts, eps * scale)
    if len(verts) < 3:
        return verts[:0]
    return verts


def window_contact(verts: np.ndarray, window: Box, eps: float = EPS_GEOM) -> bool:
    """True when some polygon edge lies on the window boundary."""
    if len(verts) == 0:
        return False
    scale = max(1.0, window.diameter)
    tol = eps * scale
    nxt = np.roll(verts, -1, axis=0)
    for axis in (0, 1):
        for bound in (window.lo[axis], window.hi[axis]):
            on = (np.abs(verts[:, axis] - bound) <= tol) & (
                np.abs(nxt[:, axis] - bound) <= tol
            )
            if bool(np.any(on)):
                return True
    return False


def intersect_halfplanes(
    planes: Sequence[HalfPlane], window: Box, eps: float = EPS_GEOM
) -> CellResult:
    """Clip the window rectangle by every half-plane in turn."""
    if window.dimension != 2:
        raise ValueError("half-plane intersection requires a 2D window")
    scale = max(1.0, window.diameter)
    verts = window.corners()
    for hp in planes:
        verts = clip_by_halfplane(verts, np.asarray(hp.a, dtype=float), hp.b)
        if len(verts) < 3:
            return CellResult(None, False)
    verts = merge_close_vertices(verts, eps * scale)
    if len(verts) < 3 or _loop_area(verts) <= (eps * scale) ** 2:
        return CellResult(None, False)
    return CellResult(ConvexPolygon(verts), window_contact(verts, window, eps))


def _loop_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_area(polygon: ConvexPolygon) -> float:
    """Shoelace area (vertices are counterclockwise, so non-negative)."""
    return _loop_area(polygon.vertices)


def shared_edge(p: ConvexPolygon, q: ConvexPolygon, eps: float = EPS_GEOM) -> tuple[float, bool]:
    """Length of the common boundary of two convex polygons.

    Returns ``(length, exists)``.  ``(0.0, True)`` is the point-contact
    case: closures meeting at a single point.  The computation is made
    order-independent by canonicalizing the argument order first.
    """
    if _polygon_key(p) > _polygon_key(q):
        p, q = q, p
    scale = max(
        1.0,
        float(np.abs(p.vertices).max()),
        float(np.abs(q.vertices).max()),
    )
    tol = eps * scale
    verts = p.vertices
    qv = q.vertices
    n = len(qv)
    # Clip p by each edge half-plane of q; convexity keeps this exact.
    for k in range(n):
        edge = qv[(k + 1) % n] - qv[k]
        normal = np.array([edge[1], -edge[0]])  # outward for CCW loops
        offset = float(normal @ qv[k]) + tol
        verts = clip_by_halfplane(verts, normal, offset)
        if len(verts) == 0:
            return 0.0, False
    verts = merge_close_vertices(verts, tol)
    if len(verts) == 0:
        return 0.0, False
    if len(verts) == 1:
        return 0.0, True
    diffs = verts[:, None, :] - verts[None, :, :]
    length = float(np.max(np.hypot(diffs[..., 0], diffs[..., 1])))
    return (length if length > tol else 0.0), True


def _polygon_key(p: ConvexPolygon) -> tuple[float, ...]:
    k = np.lexsort((p.vertices[:, 1], p.vertices[:, 0]))[0]
    return tuple(p.vertices[k]) + (float(len(p.vertices)),)
