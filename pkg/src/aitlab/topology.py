"""Discrete topology engine: the constructive "disk is simply connected".

Everything here is integer-exact.  Winding numbers are computed from
signed axis crossings with integer cross products (no tolerance
parameter exists), the discrete intermediate value theorem is a walk
with a certified step bound, and preimages are found by winding-guided
subdivision whose additivity is an exact identity, not an estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import BoundaryTooClose, NotBracketed, NotLipschitz, TooClose, ZeroWinding

Point = tuple[int, int]


def sup_dist(a: Point, b: Point) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


# ---------------------------------------------------------------------------
# One dimension: the bit-deletion argument


def discrete_ivt(values: Sequence[int], step_bound: int, threshold: int) -> int:
    """Least index i with |values[i] - threshold| < step_bound.

    The sequence must move by at most step_bound per step and the
    threshold must lie between the endpoint values; the walk then cannot
    cross the threshold without entering its open step_bound-ball.
    """
    if step_bound < 1:
        raise ValueError("step bound must be positive")
    if not values:
        raise NotBracketed("empty sequence")
    for i in range(len(values) - 1):
        if abs(values[i + 1] - values[i]) > step_bound:
            raise NotLipschitz(i, f"|{values[i + 1]} - {values[i]}| > {step_bound}")
    lo = min(values[0], values[-1])
    hi = max(values[0], values[-1])
    if not lo <= threshold <= hi:
        raise NotBracketed(f"threshold {threshold} outside [{lo}, {hi}]")
    for i, v in enumerate(values):
        if abs(v - threshold) < step_bound:
            return i
    raise AssertionError("unreachable: bracketed Lipschitz walk must enter the ball")


# ---------------------------------------------------------------------------
# Lattice paths and winding numbers


@dataclass(frozen=True)
class LatticePath:
    """A closed polyline of integer points with a bounded step.

    Consecutive points (cyclically) are at most step_bound apart in the
    sup norm; the closing edge from the last point back to the first is
    implicit.
    """

    points: tuple[Point, ...]
    step_bound: int

    def __post_init__(self):
        if not self.points:
            raise ValueError("a lattice path needs at least one point")
        pts = self.points
        for i in range(len(pts)):
            a, b = pts[i], pts[(i + 1) % len(pts)]
            if sup_dist(a, b) > self.step_bound:
                raise NotLipschitz(i, f"path step {a} -> {b} exceeds {self.step_bound}")

    def __len__(self) -> int:
        return len(self.points)

    def edges(self):
        pts = self.points
        for i in range(len(pts)):
            yield pts[i], pts[(i + 1) % len(pts)]


def winding_number(path: LatticePath, target: Point) -> int:
    """Signed number of turns the closed path makes around target.

    Exact integer arithmetic: each edge contributes a signed crossing of
    the horizontal line through the target, with the side decided by an
    integer cross product.  The one condition for the winding number to
    exist is that the target not lie on any edge of the closed polyline;
    that exact test is enforced here.  Callers that need each angular
    increment bounded away from a half turn (the subdivision engine)
    additionally keep every path point farther than the step bound from
    the target before asking for a winding number.
    """
    tx, ty = target
    for (px, py), (qx, qy) in path.edges():
        cross = (qx - px) * (ty - py) - (qy - py) * (tx - px)
        if (
            cross == 0
            and min(px, qx) <= tx <= max(px, qx)
            and min(py, qy) <= ty <= max(py, qy)
        ):
            raise TooClose((px, py), f"target {target} lies on edge to {(qx, qy)}")
    w = 0
    for (px, py), (qx, qy) in path.edges():
        if py <= ty:
            if qy > ty:  # upward crossing
                if (qx - px) * (ty - py) - (qy - py) * (tx - px) > 0:
                    w += 1
        elif qy <= ty:  # downward crossing
            if (qx - px) * (ty - py) - (qy - py) * (tx - px) < 0:
                w -= 1
    return w


# ---------------------------------------------------------------------------
# Grid maps


@dataclass(frozen=True)
class GridMap:
    """A rectangular lattice [0..width] x [0..height] with an image point
    in Z^2 at every node, and a claimed sup-norm step bound."""

    width: int
    height: int
    values: tuple[tuple[Point, ...], ...]  # values[v][u], row-major by v
    step_bound: int

    @classmethod
    def from_function(cls, width: int, height: int, fn: Callable[[int, int], Point], step_bound: int) -> "GridMap":
        rows = tuple(tuple(tuple(fn(u, v)) for u in range(width + 1)) for v in range(height + 1))
        return cls(width, height, rows, step_bound)

    def at(self, u: int, v: int) -> Point:
        return self.values[v][u]

    def nodes(self):
        for v in range(self.height + 1):
            for u in range(self.width + 1):
                yield u, v


@dataclass(frozen=True)
class LipschitzCertificate:
    ok: bool
    edge: tuple[Point, Point] | None = None  # offending lattice nodes
    measured: int = 0


def certify_lipschitz(grid: GridMap) -> LipschitzCertificate:
    """Check every 4-adjacent node pair against the claimed step bound.

    Returns the first offending edge in scan order (u-steps before
    v-steps within each node), plus the measured maximum step.
    """
    worst = 0
    first_bad = None
    for v in range(grid.height + 1):
        row = grid.values[v]
        nxt = grid.values[v + 1] if v < grid.height else None
        for u in range(grid.width + 1):
            here = row[u]
            if u < grid.width:
                d = sup_dist(here, row[u + 1])
                if d > worst:
                    worst = d
                if d > grid.step_bound and first_bad is None:
                    first_bad = ((u, v), (u + 1, v))
            if nxt is not None:
                d = sup_dist(here, nxt[u])
                if d > worst:
                    worst = d
                if d > grid.step_bound and first_bad is None:
                    first_bad = ((u, v), (u, v + 1))
    return LipschitzCertificate(ok=first_bad is None, edge=first_bad, measured=worst)


def boundary_nodes(width: int, height: int, rect: tuple[int, int, int, int] | None = None):
    """Counterclockwise boundary nodes of a parameter rectangle."""
    u0, v0, u1, v1 = rect if rect is not None else (0, 0, width, height)
    nodes = []
    for u in range(u0, u1):
        nodes.append((u, v0))
    for v in range(v0, v1):
        nodes.append((u1, v))
    for u in range(u1, u0, -1):
        nodes.append((u, v1))
    for v in range(v1, v0, -1):
        nodes.append((u0, v))
    return nodes


def boundary_path(grid: GridMap, rect: tuple[int, int, int, int] | None = None) -> LatticePath:
    """Image of the counterclockwise parameter boundary."""
    pts = tuple(grid.at(u, v) for u, v in boundary_nodes(grid.width, grid.height, rect))
    return LatticePath(pts, grid.step_bound)


# ---------------------------------------------------------------------------
# Winding-guided preimage search


@dataclass(frozen=True)
class PreimageCertificate:
    """A grid node whose image provably lies within 2c of the target.

    The trace records every subdivision rectangle with its winding
    number; windings stay nonzero until the terminal cell, which is the
    constructive content of the contradiction in the existence proof.
    """

    node: Point
    image: Point
    distance: int
    trace: tuple[tuple[tuple[int, int, int, int], int], ...]


def _rect_winding(grid: GridMap, rect: tuple[int, int, int, int], target: Point) -> int:
    return winding_number(boundary_path(grid, rect), target)


def find_preimage(grid: GridMap, target: Point) -> PreimageCertificate:
    """Locate a node mapping within 2*step_bound of target by subdivision.

    Requires a certified step bound, boundary images farther than the
    step bound from the target, and nonzero boundary winding.  Splits
    along the longer side (midpoint ties go low); if the dividing
    cross-section comes strictly within the step bound of the target it
    is returned directly, otherwise winding additivity guarantees one
    half still winds and the recursion continues to a unit cell.  The
    strict test keeps every sub-boundary at distance >= c, which is
    enough for exact winding numbers: a segment through the target
    would need endpoints at combined distance > 2c but step <= c.
    """
    cert = certify_lipschitz(grid)
    if not cert.ok:
        raise NotLipschitz(cert.edge, "grid is not Lipschitz at its claimed bound")
    c = grid.step_bound
    for u, v in boundary_nodes(grid.width, grid.height):
        if sup_dist(grid.at(u, v), target) <= c:
            raise BoundaryTooClose(f"boundary image {grid.at(u, v)} within {c} of {target}")
    rect = (0, 0, grid.width, grid.height)
    w = _rect_winding(grid, rect, target)
    if w == 0:
        raise ZeroWinding(f"boundary does not wind around {target}; existence not certified")
    trace = [(rect, w)]
    while True:
        u0, v0, u1, v1 = rect
        du, dv = u1 - u0, v1 - v0
        if du <= 1 and dv <= 1:
            best = None
            for node in ((u0, v0), (u1, v0), (u0, v1), (u1, v1)):
                d = sup_dist(grid.at(*node), target)
                if best is None or d < best[0]:
                    best = (d, node)
            dist, node = best
            if dist > 2 * c:
                raise AssertionError(f"unit cell corner at distance {dist} > 2c; additivity violated")
            return PreimageCertificate(node=node, image=grid.at(*node), distance=dist, trace=tuple(trace))
        if du >= dv:
            mid = (u0 + u1) // 2
            section = [(mid, v) for v in range(v0, v1 + 1)]
            halves = ((u0, v0, mid, v1), (mid, v0, u1, v1))
        else:
            mid = (v0 + v1) // 2
            section = [(u, mid) for u in range(u0, u1 + 1)]
            halves = ((u0, v0, u1, mid), (u0, mid, u1, v1))
        hit = None
        for node in section:
            d = sup_dist(grid.at(*node), target)
            if d < c:
                hit = (d, node)
                break
        if hit is not None:
            dist, node = hit
            return PreimageCertificate(node=node, image=grid.at(*node), distance=dist, trace=tuple(trace))
        w0 = _rect_winding(grid, halves[0], target)
        if w0 != 0:
            rect = halves[0]
            trace.append((rect, w0))
        else:
            w1 = _rect_winding(grid, halves[1], target)
            if w1 == 0:
                raise AssertionError("winding additivity violated: parent winds, halves do not")
            rect = halves[1]
            trace.append((rect, w1))


def scan_preimage(grid: GridMap, target: Point, radius: int) -> Point | None:
    """Exhaustive oracle: first node (row-major) within radius of target."""
    for v in range(grid.height + 1):
        for u in range(grid.width + 1):
            if sup_dist(grid.at(u, v), target) <= radius:
                return (u, v)
    return None


# ---------------------------------------------------------------------------
# Trajectory comparison against an ideal polyline


def _seg_sup_dist(p: Point, a: Point, b: Point) -> Fraction:
    """Exact sup-norm distance from p to segment [a, b]."""
    px, py = p
    ax, ay = a
    bx, by = b
    dx0, dy0 = ax - px, ay - py
    ddx, ddy = bx - ax, by - ay

    def value(t: Fraction) -> Fraction:
        return max(abs(dx0 + t * ddx), abs(dy0 + t * ddy))

    candidates = [Fraction(0), Fraction(1)]
    # |x(t)| and |y(t)| are piecewise linear; minima of their max occur
    # at zeros or at crossings of the four signed combinations.
    if ddx != 0:
        candidates.append(Fraction(-dx0, ddx))
    if ddy != 0:
        candidates.append(Fraction(-dy0, ddy))
    for sx in (1, -1):
        for sy in (1, -1):
            denom = sx * ddx - sy * ddy
            if denom != 0:
                candidates.append(Fraction(sy * dy0 - sx * dx0, denom))
    best = None
    for t in candidates:
        if 0 <= t <= 1:
            val = value(t)
            if best is None or val < best:
                best = val
    return best


@dataclass(frozen=True)
class TrajectoryReport:
    """Deviation of a path from an ideal polyline, plus visit order.

    max_deviation is the largest sup-norm distance from a path point to
    the ideal polyline as a point set; in_order reports whether the
    delta-neighborhoods of the waypoints are first visited in waypoint
    order.  matched is True iff max_deviation <= tolerance.
    """

    max_deviation: Fraction
    worst_index: int
    tolerance: int
    matched: bool
    in_order: bool
    first_visits: tuple[int | None, ...]

    @property
    def max_deviation_float(self) -> float:
        return float(self.max_deviation)


def trajectory_match(path: LatticePath, ideal: Sequence[Point], tolerance: int) -> TrajectoryReport:
    """Compare a closed path against an ideal waypoint polyline."""
    if len(ideal) < 1:
        raise ValueError("ideal polyline needs at least one waypoint")
    segments = [(ideal[i], ideal[i + 1]) for i in range(len(ideal) - 1)]
    if not segments:
        segments = [(ideal[0], ideal[0])]
    max_dev = Fraction(0)
    worst = 0
    for i, p in enumerate(path.points):
        d = min(_seg_sup_dist(p, a, b) for a, b in segments)
        if d > max_dev:
            max_dev = d
            worst = i
    waypoints = list(ideal)
    if len(waypoints) > 1 and waypoints[-1] == waypoints[0]:
        waypoints = waypoints[:-1]  # closed polyline: order is cyclic
    first_visits = []
    for wp in waypoints:
        idx = None
        for i, p in enumerate(path.points):
            if sup_dist(p, wp) <= tolerance:
                idx = i
                break
        first_visits.append(idx)
    seen = [i for i in first_visits if i is not None]
    in_order = all(seen[i] <= seen[i + 1] for i in range(len(seen) - 1)) and len(seen) == len(first_visits)
    return TrajectoryReport(
        max_deviation=max_dev,
        worst_index=worst,
        tolerance=tolerance,
        matched=max_dev <= tolerance,
        in_order=in_order,
        first_visits=tuple(first_visits),
    )
