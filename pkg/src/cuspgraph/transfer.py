"""Transfer maps between the cusped space and the coned-off Cayley graph.

pi collapses horoball depth >= q onto apexes and spreads depth (0, q) along
cone edges; iota is the reverse embedding.  Push-forwards, pullbacks and
extended pullbacks move paths across; the subgroup maps (coned and cusped)
embed a peripheral-respecting subgroup's spaces into the ambient ones.
Every quantitative bound is measured on the instance, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from cuspgraph import fastbfs
from cuspgraph.errors import SpecificationError
from cuspgraph.graphs import (
    ApexVertex,
    BaseVertex,
    EdgeKind,
    EdgePoint,
    HoroVertex,
    Path,
    SpaceGraph,
)
from cuspgraph.groups import CosetId, GroupElement, GroupSpec
from cuspgraph.spaces import ConedCayley, ConedCayleySpec, CuspedSpace, CuspedSpec


@dataclass(frozen=True)
class MapSpec:
    """Cone depth r and collapse depth q of one pi/iota pair."""

    r: int
    q: int

    def __post_init__(self):
        if not 1 <= self.q <= self.r - 1:
            raise SpecificationError("need 1 <= q <= r-1")


cached_row = fastbfs.cached_row


def det_geodesic(graph: SpaceGraph, x: int, y: int, flip: bool = False) -> Path:
    """Deterministic geodesic via cached BFS rows; flip reverses the
    tie-break, producing an independent second choice."""
    if x == y:
        return Path((x,))
    row = cached_row(graph, y)
    if row[x] < 0:
        raise SpecificationError("disconnected pair")
    pts = [x]
    cur = x
    while cur != y:
        d = row[cur]
        options = [e[2] for e in graph.adjacency[cur] if row[e[2]] == d - 1]
        cur = options[-1] if flip else options[0]
        pts.append(cur)
    return Path(tuple(pts))


class TransferInstance:
    """One group, one radius: the cusped space K_r and its coned companion,
    built over the same alphabet so the depth-0 layers coincide."""

    def __init__(self, group: GroupSpec, r: int, radius: int,
                 max_depth: int | None = None):
        for p in group.peripheral_indices:
            if not group.peripheral_letter_set(p):
                raise SpecificationError("transfer instance needs peripheral letters")
        self.group = group
        self.r = r
        self.radius = radius
        self.cusped = CuspedSpace(CuspedSpec(group, r, radius, max_depth))
        self.coned = ConedCayley(ConedCayleySpec(group, radius),
                                 alphabet=group.full_alphabet())

    def map_spec(self, q: int) -> MapSpec:
        return MapSpec(self.r, q)

    # -- point maps ----------------------------------------------------------

    def pi(self, spec: MapSpec, point):
        """K_r -> coned graph: depth 0 fixed, depth d in (0,q) to position d/q
        on the cone edge of its column, depth >= q to the apex."""
        q = spec.q
        cusped, coned = self.cusped, self.coned
        if isinstance(point, EdgePoint):
            pu = cusped.graph.payload(point.u)
            pv = cusped.graph.payload(point.v)
            if isinstance(pu, BaseVertex) and isinstance(pv, BaseVertex):
                cu, cv = coned.vertex(pu.element), coned.vertex(pv.element)
                return EdgePoint(cu, cv, point.position_from(point.u))
            kinds = cusped.graph.edge_kinds(point.u, point.v)
            if EdgeKind.HORIZONTAL in kinds:
                raise SpecificationError(
                    "pi on horizontal-edge interiors depends on traversal direction")
            du, dv = cusped.depth(point.u), cusped.depth(point.v)
            depth = Fraction(du) + (dv - du) * point.position_from(point.u)
            horo = pu if isinstance(pu, (HoroVertex, ApexVertex)) else pv
            cid = horo.coset
            if depth >= q:
                return coned.apex(cid)
            col = pv.column if isinstance(pv, HoroVertex) else pu.column
            return EdgePoint(coned.vertex(col), coned.apex(cid), depth / q)
        payload = cusped.graph.payload(point)
        if isinstance(payload, BaseVertex):
            return coned.vertex(payload.element)
        if isinstance(payload, ApexVertex):
            return coned.apex(payload.coset)
        if payload.depth >= q:
            return coned.apex(payload.coset)
        g = coned.vertex(payload.column)
        apex = coned.apex(payload.coset)
        t = Fraction(payload.depth, q)
        return EdgePoint(g, apex, t if g < apex else 1 - t)

    def iota(self, spec: MapSpec, point):
        """Coned graph -> K_r: cone-edge position t lands at depth t*q on the
        vertical ray of its column; apexes to horoball apexes."""
        q = spec.q
        cusped, coned = self.cusped, self.coned
        if isinstance(point, EdgePoint):
            pu, pv = coned.graph.payload(point.u), coned.graph.payload(point.v)
            if isinstance(pu, BaseVertex) and isinstance(pv, BaseVertex):
                cu, cv = cusped.vertex(pu.element), cusped.vertex(pv.element)
                t = point.position_from(point.u)
                return EdgePoint(cu, cv, t if cu < cv else 1 - t)
            if isinstance(pu, ApexVertex):
                cid, col = pu.coset, pv.element
                t = point.position_from(point.v)
            else:
                cid, col = pv.coset, pu.element
                t = point.position_from(point.u)
            return self._vertical_point(cid, col, t * q)
        payload = coned.graph.payload(point)
        if isinstance(payload, BaseVertex):
            return cusped.vertex(payload.element)
        return cusped.apex(payload.coset)

    def _vertical_point(self, cid: CosetId, col: GroupElement, depth: Fraction):
        depth = Fraction(depth)
        if depth == int(depth):
            return self.cusped.horo_vertex(cid, col, int(depth))
        lo = int(depth)
        a = self.cusped.horo_vertex(cid, col, lo)
        b = self.cusped.horo_vertex(cid, col, lo + 1)
        t = depth - lo
        return EdgePoint(a, b, t if a < b else 1 - t)

    def _vertical_run(self, cid: CosetId, col: GroupElement,
                      d_from: Fraction, d_to: Fraction) -> list:
        """Points of the vertical segment from depth d_from to d_to."""
        d_from, d_to = Fraction(d_from), Fraction(d_to)
        pts = [self._vertical_point(cid, col, d_from)]
        if d_to == d_from:
            return pts
        if d_to > d_from:
            ints = range(int(d_from) + 1, int(d_to) + 1)
        else:
            first = int(d_from) - (1 if d_from == int(d_from) else 0)
            last = int(d_to) + (0 if d_to == int(d_to) else 1)
            ints = range(first, last - 1, -1)
        for k in ints:
            pts.append(self.cusped.horo_vertex(cid, col, k))
        if d_to != int(d_to):
            pts.append(self._vertical_point(cid, col, d_to))
        return pts

    # -- push-forward ----------------------------------------------------------

    def _hat_end(self, spec: MapSpec, seg: tuple) -> list:
        """Image of an end segment inside one horoball: one or two (partial)
        cone edges through the apex."""
        pa, pb = self.pi(spec, seg[0]), self.pi(spec, seg[-1])
        if len(seg) == 1 or pa == pb:
            return [pa]
        cid = None
        for v in seg:
            cid = self.cusped.coset_of(v) or cid
        apex = self.coned.apex(cid)

        def column(p):
            if isinstance(p, EdgePoint):
                return p.u if p.v == apex else p.v
            return None if p == apex else p

        ca, cb = column(pa), column(pb)
        if pa == apex or pb == apex or ca == cb:
            return [pa, pb]
        return [pa, apex, pb]

    def push_forward(self, spec: MapSpec, path: Path) -> Path:
        """Continuous image of a cusped edge path: end segments become cone
        edges, interior horoball components become apex detours."""
        if not path.is_edge_path():
            raise SpecificationError("push-forward expects an edge path")
        cusped = self.cusped
        verts = path.vertices()
        n = len(verts)
        depth0 = [i for i, v in enumerate(verts) if cusped.depth(v) == 0]
        ui = depth0[0] if depth0 else n - 1
        vi = depth0[-1] if depth0 else n - 1

        pts: list = []

        def emit(p):
            if not pts or pts[-1] != p:
                pts.append(p)

        for p in self._hat_end(spec, verts[:ui + 1]):
            emit(p)
        i = ui
        while i < vi:
            if cusped.depth(verts[i + 1]) == 0:
                emit(self.pi(spec, verts[i]))
                emit(self.pi(spec, verts[i + 1]))
                i += 1
            else:
                cid = cusped.coset_of(verts[i + 1])
                j = i + 1
                while cusped.depth(verts[j]) != 0:
                    j += 1
                emit(self.pi(spec, verts[i]))
                emit(self.coned.apex(cid))
                emit(self.pi(spec, verts[j]))
                i = j
        for p in reversed(self._hat_end(spec, tuple(reversed(verts[vi:])))):
            emit(p)
        return Path(tuple(pts))

    # -- pullback ----------------------------------------------------------

    def _cone_edge_data(self, p_edge: EdgePoint):
        """(coset, column, position-from-column) when the point sits on a cone
        edge of the coned graph, else None."""
        pu = self.coned.graph.payload(p_edge.u)
        pv = self.coned.graph.payload(p_edge.v)
        if isinstance(pu, ApexVertex):
            return pu.coset, pv.element, p_edge.position_from(p_edge.v)
        if isinstance(pv, ApexVertex):
            return pv.coset, pu.element, p_edge.position_from(p_edge.u)
        return None

    def pullback(self, spec: MapSpec, path: Path) -> Path:
        """Coned path -> cusped path: cone edges become depth-q verticals,
        isolated apexes are dropped, consecutive components are joined by
        regular geodesics in the coned horoball."""
        q = spec.q
        cusped, coned = self.cusped, self.coned
        pts_in = path.points
        if len(pts_in) == 1:
            return Path((self.iota(spec, pts_in[0]),))
        out: list = []
        pending: tuple | None = None  # (cid, depth-q vertex) after entering an apex

        def emit(p):
            if not out or out[-1] != p:
                out.append(p)

        def is_apex(p) -> bool:
            return isinstance(p, int) and isinstance(coned.graph.payload(p), ApexVertex)

        def arrive_from_apex(cid: CosetId, col: GroupElement):
            nonlocal pending
            top = cusped.horo_vertex(cid, col, q)
            if pending is not None:
                pcid, pvert = pending
                if pcid != cid:
                    raise SpecificationError("pullback join across different horoballs")
                if pvert != top:
                    for p in cusped.chart(cid).regular_geodesic(pvert, top).points:
                        emit(p)
                pending = None
            emit(top)

        for a, b in zip(pts_in, pts_in[1:]):
            if isinstance(a, int) and isinstance(b, int):
                if is_apex(b):
                    col = coned.graph.payload(a).element
                    cid = coned.graph.payload(b).coset
                    for p in self._vertical_run(cid, col, Fraction(0), Fraction(q)):
                        emit(p)
                    pending = (cid, cusped.horo_vertex(cid, col, q))
                elif is_apex(a):
                    col = coned.graph.payload(b).element
                    cid = coned.graph.payload(a).coset
                    arrive_from_apex(cid, col)
                    for p in self._vertical_run(cid, col, Fraction(q), Fraction(0)):
                        emit(p)
                else:
                    emit(cusped.vertex(coned.graph.payload(a).element))
                    emit(cusped.vertex(coned.graph.payload(b).element))
                continue
            p_edge = a if isinstance(a, EdgePoint) else b
            data = self._cone_edge_data(p_edge)
            if data is None:
                emit(self.iota(spec, a))
                emit(self.iota(spec, b))
                continue
            cid, col, t = data
            depth = t * q
            if isinstance(a, EdgePoint) and isinstance(b, EdgePoint):
                d2 = self._cone_edge_data(b)[2] * q
                for p in self._vertical_run(cid, col, depth, d2):
                    emit(p)
            elif is_apex(b):
                for p in self._vertical_run(cid, col, depth, Fraction(q)):
                    emit(p)
                pending = (cid, cusped.horo_vertex(cid, col, q))
            elif isinstance(b, int) and not is_apex(b):
                if isinstance(a, EdgePoint):
                    for p in self._vertical_run(cid, col, depth, Fraction(0)):
                        emit(p)
                else:
                    raise SpecificationError("unreachable pullback case")
            elif is_apex(a):
                arrive_from_apex(cid, col)
                for p in self._vertical_run(cid, col, Fraction(q), depth):
                    emit(p)
            else:
                # vertex column -> interior point of its own cone edge
                for p in self._vertical_run(cid, col, Fraction(0), depth):
                    emit(p)
        return Path(tuple(out))

    # -- extended pullback ------------------------------------------------------

    def point_geodesic(self, pa, pb, flip: bool = False) -> Path:
        """Deterministic shortest coned path between points (vertices or
        cone-edge points)."""
        coned = self.coned.graph
        if pa == pb:
            return Path((pa,))
        if isinstance(pa, int) and isinstance(pb, int):
            return det_geodesic(coned, pa, pb, flip)

        def exits(p):
            if isinstance(p, int):
                return [(Fraction(0), p)]
            return [(p.t, p.u), (1 - p.t, p.v)]

        if isinstance(pa, EdgePoint) and isinstance(pb, EdgePoint) \
                and pa.endpoints() == pb.endpoints():
            return Path((pa, pb))
        best = None
        for ca, va in exits(pa):
            row = cached_row(coned, va)
            for cb, vb in exits(pb):
                if row[vb] < 0:
                    continue
                total = ca + row[vb] + cb
                if best is None or total < best[0]:
                    best = (total, va, vb)
        if best is None:
            raise SpecificationError("disconnected points")
        _, va, vb = best
        core = det_geodesic(coned, va, vb, flip)
        pts = list(core.points)
        if isinstance(pa, EdgePoint):
            pts = [pa] + pts
        if isinstance(pb, EdgePoint):
            pts = pts + [pb]
        dedup = [pts[0]]
        for p in pts[1:]:
            if p != dedup[-1]:
                dedup.append(p)
        return Path(tuple(dedup))

    def _cusped_depth(self, v: int) -> int:
        return self.cusped.depth(v)

    def extended_pullback(self, spec: MapSpec, x: int, y: int,
                          flip: bool = False) -> Path:
        """The four-case path family between cusped vertices at depth q."""
        q = spec.q
        cusped = self.cusped
        dx, dy = self._cusped_depth(x), self._cusped_depth(y)
        if dx < q and dy < q:
            eta = self.pullback(spec, self.point_geodesic(
                self.pi(spec, x), self.pi(spec, y), flip))
            if eta.start != x or eta.end != y:
                raise SpecificationError("pullback lost its endpoints")
            return eta
        if dx >= q and dy >= q and cusped.coset_of(x) == cusped.coset_of(y):
            return cusped.chart(cusped.coset_of(x)).regular_geodesic(x, y)
        if dx >= q and dy >= q:
            gamma = cusped.regularize(det_geodesic(cusped.graph, x, y, flip))
            u = self._last_at_depth_q(gamma, q, cusped.coset_of(x), from_start=True)
            v = self._last_at_depth_q(gamma, q, cusped.coset_of(y), from_start=False)
            eta0 = self.pullback(spec, self.point_geodesic(
                self.pi(spec, u), self.pi(spec, v), flip))
            u2, v2 = eta0.start, eta0.end
            cid_x, cid_y = cusped.coset_of(x), cusped.coset_of(y)
            gv = gamma.vertices()
            return Path.concat(
                Path(gv[:gv.index(u) + 1]),
                cusped.chart(cid_x).regular_geodesic(u, u2),
                eta0,
                cusped.chart(cid_y).regular_geodesic(v2, v),
                Path(gv[gv.index(v):]),
            )
        if dx < q:
            return self.extended_pullback(spec, y, x, flip).reversed()
        gamma = cusped.regularize(det_geodesic(cusped.graph, x, y, flip))
        u = self._last_at_depth_q(gamma, q, cusped.coset_of(x), from_start=True)
        eta0 = self.pullback(spec, self.point_geodesic(
            self.pi(spec, u), self.pi(spec, y), flip))
        u2 = eta0.start
        gv = gamma.vertices()
        return Path.concat(
            Path(gv[:gv.index(u) + 1]),
            cusped.chart(cusped.coset_of(x)).regular_geodesic(u, u2),
            eta0,
        )

    def _last_at_depth_q(self, gamma: Path, q: int, cid: CosetId,
                         from_start: bool) -> int:
        hits = [v for v in gamma.vertices()
                if self.cusped.coset_of(v) == cid and self._cusped_depth(v) == q]
        if not hits:
            raise SpecificationError("geodesic never crosses depth q in the horoball")
        return hits[-1] if from_start else hits[0]

    # -- composition checks ------------------------------------------------------

    def check_compositions(self, spec: MapSpec, cone_samples=(Fraction(1, 3),
                                                              Fraction(1, 2),
                                                              Fraction(3, 4))):
        """iota∘pi = id on cusped vertices of depth < q; pi∘iota = id on all
        coned vertices and sampled cone-edge points.  Returns violations."""
        bad = []
        for v in range(len(self.cusped.graph.vertices)):
            if self._cusped_depth(v) < spec.q:
                if self.iota(spec, self.pi(spec, v)) != v:
                    bad.append(("iota-pi", v))
        coned = self.coned.graph
        for v in range(len(coned.vertices)):
            if self.pi(spec, self.iota(spec, v)) != v:
                bad.append(("pi-iota-vertex", v))
        for u, v, kind, _label in sorted(coned.edges):
            if kind != EdgeKind.CONE:
                continue
            for t in cone_samples:
                p = EdgePoint(u, v, t)
                if self.pi(spec, self.iota(spec, p)) != p:
                    bad.append(("pi-iota-cone-point", (u, v, t)))
        return bad

    # -- geodesic decomposition ---------------------------------------------------

    def decompose_geodesic(self, gamma: Path, q: int):
        """Split a cusped geodesic into alternating q-shallow segments and
        deep segments living in single horoballs at depth >= q."""
        cusped = self.cusped
        verts = gamma.vertices()
        if len(verts) >= 2 and cusped.graph.distance(verts[0], verts[-1]) \
                != len(verts) - 1:
            raise SpecificationError("decompose expects a geodesic")
        segments = []
        cursor = 0
        i = 0
        while i < len(verts):
            if self._cusped_depth(verts[i]) <= q:
                i += 1
                continue
            cid = cusped.coset_of(verts[i])
            j = i
            while j + 1 < len(verts) and self._cusped_depth(verts[j + 1]) > q:
                if cusped.coset_of(verts[j + 1]) != cid:
                    raise SpecificationError("deep run crosses horoballs")
                j += 1
            lo = i - 1 if i > 0 else i
            hi = j + 1 if j + 1 < len(verts) else j
            if lo > cursor:
                segments.append(("shallow", Path(tuple(verts[cursor:lo + 1]))))
            segments.append(("deep", Path(tuple(verts[lo:hi + 1])), cid))
            cursor = hi
            i = j + 1
        if cursor < len(verts) - 1 or not segments:
            segments.append(("shallow", Path(tuple(verts[cursor:]))))
        return segments
