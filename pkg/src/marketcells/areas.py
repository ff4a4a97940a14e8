"""Market partition solvers.

Given a price vector, the market splits into convex cells of lowest
aggregate price.  With no brand feedback (``q = 0``) this is a plain
additively weighted diagram: each cell is an intersection of bisector
half-planes clipped to the window.  With linear brand feedback
(``q = 1``, 1D only) the areas appear inside the weights themselves, so
consecutive-boundary positions solve a small linear system, and
companies whose solved area is non-positive, or whose brand weight
exceeds the local wipe-out threshold ``2 d_L d_R / (d_L + d_R)``, are
eliminated one at a time until the survivor set is stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    BoundaryCompany,
    NoStableSurvivorSet,
    SingularSystem,
    WindowTooSmall,
)
from .geometry import (
    EPS_GEOM,
    ConvexPolygon,
    Interval,
    clip_cell,
    window_contact,
)
from .model import PriceVector, Scenario

__all__ = [
    "MarketPartition",
    "NeighborEdge",
    "WipeoutDiagnostics",
    "compute_wipeout_diagnostics",
    "solve_areas_q0",
    "solve_areas_q1_1d",
    "solve_partition",
    "wipeout_threshold",
]

# Price-gap tolerance (relative to the price scale) for detecting exact
# aggregate-price ties, which is what potential competitors are.
_TIE_RTOL = 1e-8


@dataclass(frozen=True)
class NeighborEdge:
    """One entry of a company's neighbor list."""

    company_id: int
    border_length: float
    distance: float
    potential_competitor: bool


@dataclass
class MarketPartition:
    """Cells, areas and the neighbor graph for one price vector.

    ``cells`` maps each company to an :class:`Interval` (1D), a
    :class:`ConvexPolygon` (2D) or ``None`` when the company holds no
    market.  1D border lengths are recorded as ``1.0`` so that the
    competition-intensity sum ``l / (2 d)`` reads the same in both
    dimensions.  ``potential_competitors[i]`` collects zero-area
    companies tying somewhere on ``i``'s closed cell as well as
    neighbors whose shared border has zero length.
    """

    dimension: int
    cells: dict[int, Interval | ConvexPolygon | None]
    areas: dict[int, float]
    neighbors: dict[int, tuple[NeighborEdge, ...]]
    survivors: frozenset[int]
    potential_competitors: dict[int, frozenset[int]]

    def gamma(self, company_id: int) -> float | None:
        """Competition intensity: sum of border length over twice the
        center distance, across all neighbors."""
        edges = self.neighbors.get(company_id, ())
        if not edges:
            return None
        return sum(e.border_length / (2.0 * e.distance) for e in edges)

    def has_potential_competitor(self, company_id: int) -> bool:
        return bool(self.potential_competitors.get(company_id))


@dataclass
class WipeoutDiagnostics:
    """Per-company wipe-out indicators from the brand-feedback solve.

    ``thresholds`` holds the harmonic-mean bound on the brand weight,
    ``psi`` the survival margin consistent with the solved partition
    (positive for every survivor), and ``entry_points`` the boundary the
    two flanking survivors would share if the company were absent.
    Companies without surviving flanks on both sides are omitted.
    """

    thresholds: dict[int, float]
    psi: dict[int, float]
    entry_points: dict[int, float]


def area_tolerance(scenario: Scenario) -> float:
    """Areas at or below this count as zero (non-surviving)."""
    return 1e-9 * scenario.window.measure


def wipeout_threshold(d_left: float | None, d_right: float | None) -> float:
    """Brand-weight bound ``2 d_L d_R / (d_L + d_R)`` with one-sided and
    isolated cases taken as the limits ``2 d`` and infinity."""
    if d_left is None and d_right is None:
        return math.inf
    if d_left is None:
        return 2.0 * d_right
    if d_right is None:
        return 2.0 * d_left
    return 2.0 * d_left * d_right / (d_left + d_right)


# ---------------------------------------------------------------------------
# 1D core
# ---------------------------------------------------------------------------


def _line_thresholds(x: np.ndarray) -> np.ndarray:
    """Wipe-out threshold per active company given sorted positions."""
    m = len(x)
    out = np.full(m, math.inf)
    if m < 2:
        return out
    d = np.diff(x)
    for k in range(m):
        d_left = d[k - 1] if k > 0 else None
        d_right = d[k] if k < m - 1 else None
        out[k] = wipeout_threshold(d_left, d_right)
    return out


def _line_boundaries(
    x: np.ndarray, p: np.ndarray, beta: float, lo: float, hi: float
) -> np.ndarray:
    """Interior boundaries of consecutive active companies.

    Solves ``2 d_k R_k = p_{k+1} - p_k + x_{k+1}^2 - x_k^2 + beta (S_k -
    S_{k+1})`` with the window closing the outermost cells.  For
    ``beta = 0`` the system is diagonal.
    """
    m = len(x)
    d = np.diff(x)
    c = np.diff(p) + np.diff(x * x)
    if beta == 0.0:
        return c / (2.0 * d)
    n = m - 1
    A = np.zeros((n, n))
    np.fill_diagonal(A, 2.0 * d - 2.0 * beta)
    for k in range(n - 1):
        A[k, k + 1] = beta
        A[k + 1, k] = beta
    rhs = c.copy()
    rhs[0] -= beta * lo
    rhs[-1] -= beta * hi
    # A consistent rank-deficient system has a whole family of partitions;
    # conditioning only explodes within rounding distance of exact
    # degeneracy, so this trips nothing else.
    if np.linalg.cond(A) > 1e12:
        raise SingularSystem(_singular_message(x, beta))
    try:
        r = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(_singular_message(x, beta)) from exc
    scale = max(1.0, float(np.abs(rhs).max()))
    if not np.all(np.isfinite(r)) or np.max(np.abs(A @ r - rhs)) > 1e-6 * scale:
        raise SingularSystem(_singular_message(x, beta))
    return r


def _singular_message(x: np.ndarray, beta: float) -> str:
    thr = float(np.min(_line_thresholds(x)))
    return (
        f"boundary system is singular at beta={beta:g}; the tightest "
        f"wipe-out threshold among active companies is {thr:g}"
    )


def _feedback_loop(
    x: np.ndarray,
    p: np.ndarray,
    beta: float,
    candidates: list[int],
    lo: float,
    hi: float,
    eps_area: float,
) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Survivor elimination loop on a line.

    Returns ``(active, bounds, areas)`` where ``active`` indexes into the
    sorted input arrays, ``bounds`` has one more entry than ``active``
    (window edges included) and ``areas`` aligns with ``active``.
    Elimination removes the most negative solved area first, then the
    worst brand-threshold violator; removed companies never re-enter
    within one solve.
    """
    active = list(candidates)
    for _ in range(len(x) + 1):
        xs, ps = x[active], p[active]
        if len(active) == 1:
            bounds = np.array([lo, hi])
        else:
            r = _line_boundaries(xs, ps, beta, lo, hi)
            bounds = np.concatenate([[lo], r, [hi]])
        areas = np.diff(bounds)
        if len(active) > 1 and np.min(areas) <= eps_area:
            del active[int(np.argmin(areas))]
            continue
        if beta > 0.0 and len(active) > 1:
            thresholds = _line_thresholds(xs)
            if float(np.min(thresholds)) <= beta:
                del active[int(np.argmin(thresholds))]
                continue
        return active, bounds, areas
    raise NoStableSurvivorSet("survivor elimination exceeded its removal budget")


def _invasion(
    x: np.ndarray,
    p: np.ndarray,
    beta: float,
    active: list[int],
    bounds: np.ndarray,
    areas: np.ndarray,
    eps_price: float,
) -> bool:
    """Can some eliminated company undercut the solved state anywhere?

    Aggregate-price fields share one curvature, so the gap between an
    outsider's field and the survivors' lower envelope is piecewise
    linear; checking it at the cell boundaries (window edges included)
    is exhaustive.
    """
    out = [k for k in range(len(x)) if k not in active]
    if not out:
        return False
    w = p[active] - beta * areas
    xs = x[active]
    envelope = np.min(
        w[:, None] + (bounds[None, :] - xs[:, None]) ** 2, axis=0
    )
    for k in out:
        field = p[k] + (bounds - x[k]) ** 2
        if np.min(field - envelope) < -eps_price:
            return True
    return False


def _solve_line(
    x: np.ndarray,
    p: np.ndarray,
    beta: float,
    lo: float,
    hi: float,
    eps_area: float,
) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Full 1D solve: candidate selection, feedback solve, validation.

    The physically meaningful state is the one the market grows into
    from the brand-free split, which is also where the grid oracle's
    damped iteration starts.  So: seed candidates with the brand-free
    envelope survivors, run the linear-system elimination loop, and
    accept the result only if no eliminated company could undercut it.
    When strong feedback sends the linear path to an inconsistent state,
    fall back to a damped fixed point of the analytic envelope map and
    polish its survivor set with the exact linear solve.
    """
    candidates = list(range(len(x)))
    if beta == 0.0:
        return _feedback_loop(x, p, 0.0, candidates, lo, hi, eps_area)

    eps_price = 1e-9 * max(1.0, float(np.abs(p).max()), (hi - lo) ** 2)
    base_active, _, base_areas = _feedback_loop(x, p, 0.0, candidates, lo, hi, eps_area)
    active, bounds, areas = _feedback_loop(x, p, beta, base_active, lo, hi, eps_area)
    if not _invasion(x, p, beta, active, bounds, areas, eps_price):
        return active, bounds, areas

    # Damped fixed point of S -> envelope_areas(p - beta S), full roster so
    # eliminated companies may re-enter while the state evolves.
    s = np.zeros(len(x))
    s[base_active] = base_areas
    for _ in range(10_000):
        env_active, _, env_areas = _feedback_loop(
            x, p - beta * s, 0.0, list(range(len(x))), lo, hi, eps_area
        )
        proposal = np.zeros(len(x))
        proposal[env_active] = env_areas
        step = float(np.max(np.abs(proposal - s)))
        s = 0.5 * s + 0.5 * proposal
        if 0.5 * step < eps_area:
            break
    else:
        raise NoStableSurvivorSet(
            "damped area iteration found no stable survivor set"
        )
    final_candidates = [k for k in range(len(x)) if s[k] > eps_area]
    active, bounds, areas = _feedback_loop(
        x, p, beta, final_candidates, lo, hi, eps_area
    )
    if _invasion(x, p, beta, active, bounds, areas, eps_price):
        raise NoStableSurvivorSet(
            "no ownership-consistent survivor set found"
        )
    return active, bounds, areas


def _order_1d(scenario: Scenario) -> tuple[np.ndarray, list[int]]:
    """Positions sorted ascending plus matching company ids."""
    pairs = sorted((c.position[0], c.id) for c in scenario.companies)
    return np.array([pos for pos, _ in pairs]), [cid for _, cid in pairs]


def _partition_1d(
    scenario: Scenario,
    prices: PriceVector,
    beta: float,
    check_window: bool,
) -> MarketPartition:
    x, ids = _order_1d(scenario)
    price_by_id = prices.to_mapping(scenario)
    p = np.array([price_by_id[cid] for cid in ids])
    lo, hi = scenario.window.lo[0], scenario.window.hi[0]
    eps_area = area_tolerance(scenario)

    active, bounds, areas_arr = _solve_line(x, p, beta, lo, hi, eps_area)

    cells: dict[int, Interval | ConvexPolygon | None] = {cid: None for cid in ids}
    areas: dict[int, float] = {cid: 0.0 for cid in ids}
    neighbors: dict[int, tuple[NeighborEdge, ...]] = {cid: () for cid in ids}
    potential: dict[int, set[int]] = {cid: set() for cid in ids}

    survivor_ids = [ids[k] for k in active]
    for slot, k in enumerate(active):
        cid = ids[k]
        cells[cid] = Interval(float(bounds[slot]), float(bounds[slot + 1]))
        areas[cid] = float(areas_arr[slot])

    for slot, k in enumerate(active):
        cid = ids[k]
        edges = []
        if slot > 0:
            left = active[slot - 1]
            edges.append(
                NeighborEdge(ids[left], 1.0, float(x[k] - x[left]), False)
            )
        if slot < len(active) - 1:
            right = active[slot + 1]
            edges.append(
                NeighborEdge(ids[right], 1.0, float(x[right] - x[k]), False)
            )
        neighbors[cid] = tuple(edges)

    # Zero-area companies tying a survivor's boundary price become its
    # potential competitors: one more price tick and they are real.
    tie_tol = _TIE_RTOL * max(1.0, scenario.price_upper)
    eliminated = [k for k in range(len(ids)) if k not in active]
    if eliminated:
        envelope_p = p[active]
        envelope_x = x[active]
        # beta enters through solved areas; eliminated companies hold none.
        w_active = envelope_p - beta * areas_arr
        for k in eliminated:
            f_k = p[k]  # zero area: brand bonus vanishes for q=1, cancels for q=0
            for slot, cid in enumerate(survivor_ids):
                for b in (bounds[slot], bounds[slot + 1]):
                    if b in (lo, hi):
                        continue
                    own = w_active[slot] + (b - envelope_x[slot]) ** 2
                    other = f_k + (b - x[k]) ** 2
                    if abs(other - own) <= tie_tol:
                        potential[cid].add(ids[k])

    if check_window:
        for edge_slot in (0, len(active) - 1):
            cid = ids[active[edge_slot]]
            if not scenario.company(cid).frozen:
                raise WindowTooSmall(
                    f"non-frozen company {cid} owns a window-edge cell; "
                    "the window understates its true market"
                )

    return MarketPartition(
        dimension=1,
        cells=cells,
        areas=areas,
        neighbors=neighbors,
        survivors=frozenset(survivor_ids),
        potential_competitors={cid: frozenset(s) for cid, s in potential.items()},
    )


# ---------------------------------------------------------------------------
# 2D partition
# ---------------------------------------------------------------------------


def _cell_planes(
    positions: np.ndarray, weights: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-plane family of company ``k`` against everyone else.

    The gap ``b_j - a_j . x`` equals the aggregate-price difference
    between company ``j`` and company ``k`` at ``x``.
    """
    others = np.arange(len(positions)) != k
    xo = positions[others]
    xi = positions[k]
    normals = 2.0 * (xo - xi)
    offsets = (
        weights[others]
        - weights[k]
        + np.einsum("ij,ij->i", xo, xo)
        - float(xi @ xi)
    )
    return normals, offsets, np.flatnonzero(others)


def focal_cell_2d(
    scenario: Scenario,
    weights: np.ndarray,
    k: int,
) -> np.ndarray:
    """Vertex loop of company ``k``'s cell; empty array if it holds none."""
    normals, offsets, _ = _cell_planes(scenario.positions, weights, k)
    return clip_cell(scenario.positions[k], normals, offsets, scenario.window)


def _edge_attribution(
    verts: np.ndarray,
    normals: np.ndarray,
    offsets: np.ndarray,
    plane_ids: np.ndarray,
    tie_tol: float,
) -> tuple[dict[int, float], set[int]]:
    """Match polygon edges to generating bisectors.

    Returns ``(border_lengths, ties)``: per-company border length for
    every company whose bisector carries an edge, and the set of
    companies tying only at isolated vertices (corner contacts or
    zero-area ties).
    """
    gaps = offsets[None, :] - verts @ normals.T  # price gap at each vertex
    tight = gaps <= tie_tol
    m = len(verts)
    lengths: dict[int, float] = {}
    edge_companies: set[int] = set()
    for k in range(m):
        k2 = (k + 1) % m
        both = np.flatnonzero(tight[k] & tight[k2])
        if len(both) == 0:
            continue  # window edge
        if len(both) > 1:  # coincident bisectors; pick the tightest
            both = [both[int(np.argmin(gaps[k, both] + gaps[k2, both]))]]
        j = plane_ids[int(both[0])]
        seg = float(np.hypot(*(verts[k2] - verts[k])))
        lengths[j] = lengths.get(j, 0.0) + seg
        edge_companies.add(j)
    tie_any = np.flatnonzero(np.any(tight, axis=0))
    ties = {plane_ids[int(t)] for t in tie_any} - edge_companies
    return lengths, ties


def _partition_2d(
    scenario: Scenario,
    weights: np.ndarray,
    check_window: bool,
) -> MarketPartition:
    n = len(scenario.companies)
    ids = scenario.ids
    eps_area = area_tolerance(scenario)
    tie_tol = _TIE_RTOL * max(1.0, scenario.price_upper)

    loops: list[np.ndarray] = []
    areas_by_index = np.zeros(n)
    for k in range(n):
        verts = focal_cell_2d(scenario, weights, k)
        loops.append(verts)
        if len(verts) >= 3:
            x, y = verts[:, 0], verts[:, 1]
            areas_by_index[k] = 0.5 * float(
                np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))
            )

    surviving = areas_by_index > eps_area

    cells: dict[int, Interval | ConvexPolygon | None] = {}
    areas: dict[int, float] = {}
    for k in range(n):
        if surviving[k]:
            cells[ids[k]] = ConvexPolygon(loops[k])
            areas[ids[k]] = float(areas_by_index[k])
        else:
            cells[ids[k]] = None
            areas[ids[k]] = 0.0

    if check_window:
        for k in range(n):
            if (
                surviving[k]
                and not scenario.companies[k].frozen
                and window_contact(loops[k], scenario.window)
            ):
                raise WindowTooSmall(
                    f"non-frozen company {ids[k]} owns a window-edge cell; "
                    "the window understates its true market"
                )

    # Neighbor graph with border lengths, plus tie bookkeeping, built from
    # each surviving cell's own boundary and then symmetrized.
    border: dict[tuple[int, int], float] = {}
    ties_by_index: dict[int, set[int]] = {k: set() for k in range(n)}
    for k in range(n):
        if not surviving[k]:
            continue
        normals, offsets, plane_ids = _cell_planes(scenario.positions, weights, k)
        lengths, ties = _edge_attribution(
            loops[k], normals, offsets, plane_ids, tie_tol
        )
        ties_by_index[k] = ties
        for j, seg in lengths.items():
            key = (min(k, j), max(k, j))
            if key not in border or (k < j):
                border[key] = seg

    neighbors: dict[int, list[NeighborEdge]] = {cid: [] for cid in ids}
    potential: dict[int, set[int]] = {cid: set() for cid in ids}

    def _distance(a: int, b: int) -> float:
        return float(np.linalg.norm(scenario.positions[a] - scenario.positions[b]))

    for (a, b), seg in sorted(border.items()):
        if surviving[a] and surviving[b]:
            flag = seg <= EPS_GEOM * max(1.0, scenario.window.diameter)
            d = _distance(a, b)
            neighbors[ids[a]].append(NeighborEdge(ids[b], seg, d, flag))
            neighbors[ids[b]].append(NeighborEdge(ids[a], seg, d, flag))
            if flag:
                potential[ids[a]].add(ids[b])
                potential[ids[b]].add(ids[a])
        elif surviving[a] != surviving[b]:
            # A zero-area company whose bisector still carries an edge of
            # the survivor's cell ties along that edge.
            owner, ghost = (a, b) if surviving[a] else (b, a)
            potential[ids[owner]].add(ids[ghost])

    corner_pairs: set[tuple[int, int]] = set()
    for k in range(n):
        for j in ties_by_index[k]:
            if surviving[k] and surviving[j]:
                corner_pairs.add((min(k, j), max(k, j)))
            elif surviving[k] and not surviving[j]:
                potential[ids[k]].add(ids[j])

    for a, b in sorted(corner_pairs):
        if (a, b) in border:
            continue
        d = _distance(a, b)
        neighbors[ids[a]].append(NeighborEdge(ids[b], 0.0, d, True))
        neighbors[ids[b]].append(NeighborEdge(ids[a], 0.0, d, True))
        potential[ids[a]].add(ids[b])
        potential[ids[b]].add(ids[a])

    return MarketPartition(
        dimension=2,
        cells=cells,
        areas=areas,
        neighbors={cid: tuple(v) for cid, v in neighbors.items()},
        survivors=frozenset(ids[k] for k in range(n) if surviving[k]),
        potential_competitors={cid: frozenset(s) for cid, s in potential.items()},
    )


# ---------------------------------------------------------------------------
# Public solvers
# ---------------------------------------------------------------------------


def solve_areas_q0(
    scenario: Scenario,
    prices: PriceVector,
    brand_areas: dict[int, float] | None = None,
    check_window: bool = True,
) -> MarketPartition:
    """Partition for fixed additive weights.

    When ``q = 0`` the brand bonus cancels, so the weights are the prices
    themselves.  Passing ``brand_areas`` evaluates one inner step of the
    ``q = 1`` problem at those frozen areas instead.
    """
    p = prices.as_array()
    if scenario.q == 1 and brand_areas is not None:
        bonus = np.array([brand_areas.get(cid, 0.0) for cid in scenario.ids])
        weights = p - scenario.beta * bonus
    else:
        weights = p
    if scenario.dimension == 1:
        shifted = PriceVector(tuple(weights))
        return _partition_1d(scenario, shifted, beta=0.0, check_window=check_window)
    return _partition_2d(scenario, weights, check_window)


def solve_areas_q1_1d(
    scenario: Scenario,
    prices: PriceVector,
    check_window: bool = True,
) -> tuple[MarketPartition, WipeoutDiagnostics]:
    """Brand-feedback partition on a line plus wipe-out diagnostics."""
    if scenario.dimension != 1 or scenario.q != 1:
        raise ValueError("this solver requires a 1D scenario with q=1")
    part = _partition_1d(scenario, prices, beta=scenario.beta, check_window=check_window)
    diag = _diagnostics_from_partition(scenario, prices, part)
    return part, diag


def solve_partition(
    scenario: Scenario, prices: PriceVector, check_window: bool = True
) -> MarketPartition:
    """Dispatch to the solver matching the scenario's brand exponent."""
    if scenario.q == 1:
        return solve_areas_q1_1d(scenario, prices, check_window)[0]
    return solve_areas_q0(scenario, prices, check_window=check_window)


def _flanking_survivors(
    scenario: Scenario, part: MarketPartition, company_id: int
) -> tuple[int | None, int | None]:
    """Nearest surviving company strictly left and right of a position."""
    x0 = scenario.company(company_id).position[0]
    left = right = None
    for cid in part.survivors:
        if cid == company_id:
            continue
        x = scenario.company(cid).position[0]
        if x < x0 and (left is None or x > scenario.company(left).position[0]):
            left = cid
        if x > x0 and (right is None or x < scenario.company(right).position[0]):
            right = cid
    return left, right


def _psi_terms(
    scenario: Scenario,
    prices: PriceVector,
    part: MarketPartition,
    company_id: int,
    left: int,
    right: int,
) -> tuple[float, float, float]:
    """Threshold, survival margin and hidden-entry boundary for one
    company given its flanking survivors and their areas in ``part``."""
    beta = scenario.beta
    x0 = scenario.company(company_id).position[0]
    xl = scenario.company(left).position[0]
    xr = scenario.company(right).position[0]
    d_left, d_right = x0 - xl, xr - x0
    p0 = prices.price_of(scenario, company_id)
    pl = prices.price_of(scenario, left)
    pr = prices.price_of(scenario, right)
    sl, sr = part.areas[left], part.areas[right]
    threshold = wipeout_threshold(d_left, d_right)
    psi = (pr + d_right**2 - beta * sr - p0) / (2.0 * d_right) + (
        pl + d_left**2 - beta * sl - p0
    ) / (2.0 * d_left)
    entry = (pr - pl - beta * sr + beta * sl) / (2.0 * (d_left + d_right)) + (
        xr + xl
    ) / 2.0
    return threshold, psi, entry


def _diagnostics_from_partition(
    scenario: Scenario, prices: PriceVector, part: MarketPartition
) -> WipeoutDiagnostics:
    thresholds: dict[int, float] = {}
    psi: dict[int, float] = {}
    entry: dict[int, float] = {}
    for c in scenario.companies:
        if c.frozen:
            continue
        left, right = _flanking_survivors(scenario, part, c.id)
        if left is None or right is None:
            continue
        thr, margin, r_entry = _psi_terms(scenario, prices, part, c.id, left, right)
        thresholds[c.id] = thr
        psi[c.id] = margin
        entry[c.id] = r_entry
    return WipeoutDiagnostics(thresholds, psi, entry)


@lru_cache(maxsize=256)
def _line_layout(scenario: Scenario) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Company indices sorted by position, plus the sorted positions."""
    order = sorted(range(len(scenario.companies)), key=lambda k: scenario.positions[k, 0])
    return tuple(order), tuple(float(scenario.positions[k, 0]) for k in order)


def fast_area(scenario: Scenario, values: np.ndarray, company_id: int) -> float:
    """Market area of one company under a full weight/price vector.

    The exploration workhorse behind profit evaluation: no window check,
    no neighbor bookkeeping.  ``values`` follows ``scenario.companies``
    order.  Respects the scenario's brand exponent.
    """
    k = scenario.index_of[company_id]
    if scenario.dimension == 1:
        order, xs = _line_layout(scenario)
        x = np.array(xs)
        p = values[list(order)]
        beta = scenario.beta if scenario.q == 1 else 0.0
        active, _, areas = _solve_line(
            x, p, beta, scenario.window.lo[0], scenario.window.hi[0],
            area_tolerance(scenario),
        )
        slot = {order[a]: s for s, a in enumerate(active)}.get(k)
        return float(areas[slot]) if slot is not None else 0.0
    verts = focal_cell_2d(scenario, values, k)
    if len(verts) < 3:
        return 0.0
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def fast_signature(
    scenario: Scenario, values: np.ndarray, company_id: int
) -> tuple[bool, frozenset[int]]:
    """(survives, neighbor ids) for one company under a weight vector.

    The neighbor set is what the best-response profile is piecewise in:
    it stays constant within a piece and changes at breakpoints.
    """
    k = scenario.index_of[company_id]
    if scenario.dimension == 1:
        order, xs = _line_layout(scenario)
        x = np.array(xs)
        p = values[list(order)]
        beta = scenario.beta if scenario.q == 1 else 0.0
        active, _, _ = _solve_line(
            x, p, beta, scenario.window.lo[0], scenario.window.hi[0],
            area_tolerance(scenario),
        )
        slots = {order[a]: s for s, a in enumerate(active)}
        slot = slots.get(k)
        if slot is None:
            return False, frozenset()
        flanks = set()
        if slot > 0:
            flanks.add(scenario.ids[order[active[slot - 1]]])
        if slot < len(active) - 1:
            flanks.add(scenario.ids[order[active[slot + 1]]])
        return True, frozenset(flanks)
    verts = focal_cell_2d(scenario, values, k)
    if len(verts) < 3:
        return False, frozenset()
    normals, offsets, plane_ids = _cell_planes(scenario.positions, values, k)
    tie_tol = _TIE_RTOL * max(1.0, scenario.price_upper)
    lengths, _ = _edge_attribution(verts, normals, offsets, plane_ids, tie_tol)
    return True, frozenset(scenario.ids[j] for j in lengths)


def compute_wipeout_diagnostics(
    scenario: Scenario,
    prices: PriceVector,
    part: MarketPartition,
    company_id: int,
) -> tuple[float, float, float]:
    """Hide one company, re-solve, and measure whether it could re-enter.

    Returns ``(threshold, psi, entry_point)`` computed from the hidden
    solve's areas: ``entry_point`` is where the flanking survivors meet
    once the company is gone, and ``psi`` is positive exactly when the
    company would undercut them there and regain market.
    """
    if scenario.dimension != 1:
        raise ValueError("wipe-out diagnostics are defined on 1D markets")
    x, ids = _order_1d(scenario)
    keep = [k for k, cid in enumerate(ids) if cid != company_id]
    price_by_id = prices.to_mapping(scenario)
    p = np.array([price_by_id[ids[k]] for k in keep])
    lo, hi = scenario.window.lo[0], scenario.window.hi[0]
    beta = scenario.beta if scenario.q == 1 else 0.0
    active, _, hidden_areas = _solve_line(
        x[keep], p, beta, lo, hi, area_tolerance(scenario)
    )
    hidden_ids = [ids[keep[k]] for k in active]
    x0 = scenario.company(company_id).position[0]
    left = right = None
    for cid in hidden_ids:
        xx = scenario.company(cid).position[0]
        if xx < x0:
            left = cid
        elif right is None:
            right = cid
    if left is None or right is None:
        raise BoundaryCompany(
            f"company {company_id} lacks a surviving neighbor on one side"
        )
    area_by_id = dict(zip(hidden_ids, hidden_areas))
    fake = MarketPartition(
        dimension=1,
        cells={},
        areas=area_by_id,
        neighbors={},
        survivors=frozenset(hidden_ids),
        potential_competitors={},
    )
    return _psi_terms(scenario, prices, fake, company_id, left, right)
