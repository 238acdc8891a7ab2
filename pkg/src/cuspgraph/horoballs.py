"""Combinatorial horoballs over a base graph, plain and coned off.

Depth-k horizontal edges span base distance up to 2^k, vertical edges step
one depth level, and the coned version adds an apex joined to every vertex
of depth >= cone_depth.  The closed-form metric implemented here is exact
for the horoball over the full line, which makes window-certified pairs a
rigorous oracle for truncated instances.
"""

from __future__ import annotations

from dataclasses import dataclass

from cuspgraph.errors import SpecificationError
from cuspgraph.graphs import (
    ApexVertex,
    EdgeKind,
    GraphBuilder,
    HoroVertex,
    Path,
    SpaceGraph,
)


@dataclass(frozen=True)
class HoroballSpec:
    """Recipe for one standalone horoball: base graph, depth cap, cone depth."""

    base: SpaceGraph
    max_depth: int
    cone_depth: int | None = None
    tag: str = "H"

    def __post_init__(self):
        if len(self.base) == 0:
            raise SpecificationError("horoball over an empty base")
        if self.max_depth < 1:
            raise SpecificationError("max_depth must be >= 1")
        if self.cone_depth is not None and not 0 <= self.cone_depth <= self.max_depth:
            raise SpecificationError("need 0 <= cone_depth <= max_depth")


def closed_form_distance(d_base: int | None, depth_a: int, depth_b: int,
                         cone_depth: int | None) -> int | None:
    """Distance in the untruncated horoball, assuming d_base is exact there.

    Minimizes two-verticals-plus-horizontal over all depths and, when coned,
    caps with the route through the apex.  None means no connection (plain
    horoball over a disconnected base).
    """
    candidates = []
    if d_base == 0:
        candidates.append(abs(depth_a - depth_b))
    elif d_base is not None:
        lo = max(depth_a, depth_b)
        hi = max(lo, max(d_base - 1, 1).bit_length()) + 2
        for m in range(lo, hi + 1):
            h = -(-d_base // (1 << m))
            candidates.append((m - depth_a) + (m - depth_b) + h)
    if cone_depth is not None:
        r = cone_depth
        candidates.append(max(r - depth_a, 0) + max(r - depth_b, 0) + 2)
    return min(candidates) if candidates else None


def regular_route(d_base: int | None, depth_a: int, depth_b: int,
                  cone_depth: int | None):
    """Shape of the regular geodesic: ('plain', m) or ('cone',).

    Plain routes pick the smallest optimal depth whose horizontal run has
    length <= 3; ties between plain and cone resolve to plain.
    """
    total = closed_form_distance(d_base, depth_a, depth_b, cone_depth)
    if total is None:
        raise SpecificationError("endpoints in different base components")
    if d_base is None:
        return ("cone",)
    if d_base == 0:
        return ("plain", max(depth_a, depth_b))
    lo = max(depth_a, depth_b)
    hi = max(lo, max(d_base - 1, 1).bit_length()) + 2
    for m in range(lo, hi + 1):
        h = -(-d_base // (1 << m))
        if (m - depth_a) + (m - depth_b) + h == total and h <= 3:
            return ("plain", m)
    return ("cone",)


class HoroballChart:
    """Metric and shape queries shared by standalone and in-space horoballs.

    Subclasses provide the coordinates: cone_depth, locate(), vertex(),
    apex(), base_dist(), base_waypoints().
    """

    cone_depth: int | None

    def locate(self, idx: int):  # -> (column | None for apex, depth)
        raise NotImplementedError

    def vertex(self, column, depth: int) -> int:
        raise NotImplementedError

    def apex(self) -> int:
        raise NotImplementedError

    def base_dist(self, col_a, col_b) -> int | None:
        raise NotImplementedError

    def base_waypoints(self, col_a, col_b, span: int) -> list:
        """Columns along a base geodesic, at most `span` apart consecutively."""
        raise NotImplementedError

    # -- derived ----------------------------------------------------------

    def distance(self, x: int, y: int) -> int | None:
        """Closed-form distance; None when the plain horoball is disconnected."""
        (ca, ka), (cb, kb) = self.locate(x), self.locate(y)
        r = self.cone_depth
        if ca is None and cb is None:
            return 0
        if ca is None or cb is None:
            depth = kb if ca is None else ka
            return 1 + max(r - depth, 0)
        return closed_form_distance(self.base_dist(ca, cb), ka, kb, r)

    def _vertical(self, column, k_from: int, k_to: int) -> list[int]:
        step = 1 if k_to >= k_from else -1
        return [self.vertex(column, k) for k in range(k_from, k_to + step, step)]

    def regular_geodesic(self, x: int, y: int) -> Path:
        """Two verticals plus a horizontal run <= 3, or the apex route.

        The length always equals the closed-form distance; oracles compare
        both against plain BFS.
        """
        if x == y:
            return Path((x,))
        (ca, ka), (cb, kb) = self.locate(x), self.locate(y)
        r = self.cone_depth
        if ca is None or cb is None:
            if ca is None and cb is None:
                raise SpecificationError("both endpoints are the apex")
            if ca is None:
                return self.regular_geodesic(y, x).reversed()
            return Path(tuple(self._vertical(ca, ka, max(ka, r)) + [self.apex()]))
        d = self.base_dist(ca, cb)
        route = regular_route(d, ka, kb, r)
        if route[0] == "cone":
            pts = self._vertical(ca, ka, max(ka, r))
            pts.append(self.apex())
            pts.extend(self._vertical(cb, max(kb, r), kb))
            return Path(tuple(pts))
        m = route[1]
        pts = self._vertical(ca, ka, m)
        for col in self.base_waypoints(ca, cb, 1 << m)[1:]:
            pts.append(self.vertex(col, m))
        if m != kb:
            pts.extend(self._vertical(cb, m, kb)[1:])
        return Path(tuple(pts))

    def depth_profile(self, path: Path) -> list[int]:
        return [self.locate(i)[1] for i in path.vertices()]

    def vertical_length_witness(self, path: Path) -> int:
        """The common vertical length L of a regular depth-0 geodesic.

        Raises unless the path is rise-L, horizontal run <= 3 at depth L,
        drop-L between depth-0 vertices (the plain shape).
        """
        verts = path.vertices()
        if len(verts) != len(path.points):
            raise SpecificationError("witness needs an edge path")
        info = [self.locate(i) for i in verts]
        if any(col is None for col, _ in info):
            raise SpecificationError("path passes the apex; not the plain shape")
        depths = [d for _, d in info]
        if depths[0] != 0 or depths[-1] != 0:
            raise SpecificationError("endpoints must be at depth 0")
        peak = max(depths)
        climb = depths.index(peak)
        descend = len(depths) - 1 - depths[::-1].index(peak)
        if depths[:climb + 1] != list(range(peak + 1)):
            raise SpecificationError("leading segment is not a single vertical rise")
        if depths[descend:] != list(range(peak, -1, -1)):
            raise SpecificationError("trailing segment is not a single vertical drop")
        if any(d != peak for d in depths[climb:descend + 1]):
            raise SpecificationError("horizontal run not at constant depth")
        if descend - climb > 3:
            raise SpecificationError("horizontal run longer than 3")
        return peak


def build_horoball(spec: HoroballSpec) -> SpaceGraph:
    """Materialize the truncated horoball as a SpaceGraph.

    Depth-0 vertices reuse the base payloads (the attaching map is literal);
    deeper vertices are HoroVertex(tag, column, depth); the apex, when coned,
    is ApexVertex(tag).
    """
    base = spec.base
    builder = GraphBuilder(
        radius=base.radius,
        meta={"space": "horoball", "max_depth": spec.max_depth,
              "cone_depth": spec.cone_depth},
    )
    columns = list(base.vertices)

    def vert(col, depth: int):
        return col if depth == 0 else HoroVertex(spec.tag, col, depth)

    for col in columns:
        builder.add_vertex(col)
        for k in range(spec.max_depth):
            builder.add_edge(vert(col, k), vert(col, k + 1), EdgeKind.VERTICAL)

    # depth-0 horizontal edges are the base edges themselves
    for u, v, kind, label in sorted(base.edges, key=repr):
        builder.add_edge(columns[u], columns[v], kind, label)

    # deeper horizontal edges from all-pairs base distances
    reach = 1 << spec.max_depth
    for i, u in enumerate(columns):
        dist = base.bfs(i, cutoff=reach)
        for j in range(i + 1, len(columns)):
            v = columns[j]
            d = dist.get(j)
            if not d:
                continue
            start = max(1, (d - 1).bit_length())
            for k in range(start, spec.max_depth + 1):
                if d <= (1 << k):
                    builder.add_edge(vert(u, k), vert(v, k), EdgeKind.HORIZONTAL)

    if spec.cone_depth is not None:
        apex = ApexVertex(spec.tag)
        builder.add_vertex(apex)
        for col in columns:
            for k in range(max(spec.cone_depth, 1), spec.max_depth + 1):
                builder.add_edge(vert(col, k), apex, EdgeKind.CONE)
            if spec.cone_depth == 0:
                builder.add_edge(col, apex, EdgeKind.CONE)

    return builder.build(columns[base.basepoint])


class Horoball(HoroballChart):
    """A standalone horoball built over an explicit base SpaceGraph."""

    def __init__(self, spec: HoroballSpec):
        self.spec = spec
        self.cone_depth = spec.cone_depth
        self.graph = build_horoball(spec)
        self._base_dist_cache: dict = {}

    def vertex(self, column, depth: int) -> int:
        payload = column if depth == 0 else HoroVertex(self.spec.tag, column, depth)
        return self.graph.index_of(payload)

    def apex(self) -> int:
        if self.cone_depth is None:
            raise SpecificationError("plain horoball has no apex")
        return self.graph.index_of(ApexVertex(self.spec.tag))

    def locate(self, idx: int):
        payload = self.graph.payload(idx)
        if isinstance(payload, HoroVertex):
            return payload.column, payload.depth
        if isinstance(payload, ApexVertex):
            return None, self.cone_depth + 1
        return payload, 0

    def base_dist(self, col_a, col_b) -> int | None:
        if col_a == col_b:
            return 0
        dist = self._base_dist_cache.get(col_a)
        if dist is None:
            dist = self.spec.base.bfs(self.spec.base.index_of(col_a))
            self._base_dist_cache[col_a] = dist
        return dist.get(self.spec.base.index_of(col_b))

    def base_waypoints(self, col_a, col_b, span: int) -> list:
        base = self.spec.base
        gpath = base.geodesic(base.index_of(col_a), base.index_of(col_b))
        cols = [base.payload(i) for i in gpath.vertices()]
        stops = cols[::span]
        if stops[-1] != cols[-1]:
            stops.append(cols[-1])
        return stops


# -- the line-based instance with rigorous window certification ---------------


def line_base(half_width: int) -> SpaceGraph:
    """The Cayley graph of Z over one generator, truncated to [-n, n]."""
    builder = GraphBuilder(radius=2 * half_width, meta={"space": "z-line"})
    for i in range(-half_width, half_width + 1):
        builder.add_vertex(i)
    for i in range(-half_width, half_width):
        builder.add_edge(i, i + 1, EdgeKind.CAYLEY, "t")
    return builder.build(0)


class ZLineHoroball(Horoball):
    """Horoball over the truncated integer line, with exact certification.

    The closed form is the exact metric of the horoball over the full line,
    so a pair is certified once every vertex that could sit on one of its
    geodesics (checked against the closed form) lies inside the truncation.
    """

    def __init__(self, half_width: int, max_depth: int, cone_depth: int | None = None):
        self.half_width = half_width
        super().__init__(HoroballSpec(line_base(half_width), max_depth, cone_depth,
                                      tag=f"zline{half_width}"))
        self._window_cache: dict = {}

    def base_dist(self, col_a, col_b) -> int:
        return abs(col_a - col_b)

    def base_waypoints(self, col_a, col_b, span: int) -> list:
        step = span if col_b >= col_a else -span
        stops = list(range(col_a, col_b, step))
        stops.append(col_b)
        return stops

    def _full_line_dist(self, a, b) -> int:
        (ia, ka), (ib, kb) = a, b
        return closed_form_distance(abs(ia - ib), ka, kb, self.cone_depth)

    def _window(self, sep: int, ka: int, kb: int):
        """(depth_ok, overshoot) for the pair class at column separation sep."""
        key = (sep, min(ka, kb), max(ka, kb))
        hit = self._window_cache.get(key)
        if hit is not None:
            return hit
        total = self._full_line_dist((0, ka), (sep, kb))
        depth_ok = (total + ka + kb) // 2 <= self.spec.max_depth
        depth_cap = min(self.spec.max_depth, (total + ka + kb) // 2)
        if self.cone_depth is not None:
            depth_cap = max(depth_cap, min(self.spec.max_depth, self.cone_depth))

        def visitable(col: int) -> bool:
            return any(
                self._full_line_dist((0, ka), (col, m))
                + self._full_line_dist((col, m), (sep, kb)) <= total
                for m in range(depth_cap + 1)
            )

        over = 0
        while visitable(sep + over + 1):
            over += 1
        under = 0
        while visitable(-(under + 1)):
            under += 1
        result = (depth_ok, max(over, under))
        self._window_cache[key] = result
        return result

    def certified_pair(self, x: int, y: int) -> bool:
        """True when all full-line geodesics x..y fit inside the truncation."""
        (ca, ka), (cb, kb) = self.locate(x), self.locate(y)
        if ca is None or cb is None:
            return False
        depth_ok, slack = self._window(abs(ca - cb), ka, kb)
        lo, hi = min(ca, cb), max(ca, cb)
        return depth_ok and lo - slack >= -self.half_width and hi + slack <= self.half_width

    def certified_depth0_pairs(self):
        for i in range(-self.half_width, self.half_width + 1):
            for j in range(i + 1, self.half_width + 1):
                x, y = self.vertex(i, 0), self.vertex(j, 0)
                if self.certified_pair(x, y):
                    yield x, y
