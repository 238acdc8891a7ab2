"""Finite labeled-graph substrate with brute-force metric oracles.

SpaceGraph is an immutable truncation (ball) of an infinite graph.  All
distances are computed by BFS; geodesic selection is deterministic; the
certified-pair rule marks the region where truncated distances can be
trusted as distances of the infinite space.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction

from cuspgraph.errors import SpecificationError, TruncationError
from cuspgraph.groups import CosetId, GroupElement


class EdgeKind(IntEnum):
    """Edge labels; the integer value is the geodesic tie-break rank."""

    CAYLEY = 0
    CONE = 1
    VERTICAL = 2
    HORIZONTAL = 3


@dataclass(frozen=True)
class BaseVertex:
    """A group element at depth 0 (or a plain Cayley-graph vertex)."""

    element: GroupElement


@dataclass(frozen=True)
class HoroVertex:
    """Horoball vertex: (coset, column, depth) with depth >= 1.

    Depth-0 horoball vertices are identified with the base-graph vertex of
    their column by the attaching map, so they never appear as HoroVertex.
    """

    coset: object
    column: object
    depth: int


@dataclass(frozen=True)
class ApexVertex:
    """The apex of a coset (coned-off Cayley graph) or of a horoball."""

    coset: object


@dataclass(frozen=True)
class AngleValue:
    """Exact distance, or a certified lower bound when truncation stops us.

    exact=True: the value is the distance.  exact=False: no path of length
    <= value exists in the truncation, so the distance is > value.
    """

    value: int
    exact: bool = True

    @staticmethod
    def of(value: int) -> "AngleValue":
        return AngleValue(value, True)

    @staticmethod
    def at_least(cutoff: int) -> "AngleValue":
        return AngleValue(cutoff, False)

    def definitely_le(self, bound: int) -> bool:
        return self.exact and self.value <= bound

    def definitely_gt(self, bound: int) -> bool:
        return (self.exact and self.value > bound) or (not self.exact and self.value >= bound)

    def __repr__(self) -> str:
        return f"Exact({self.value})" if self.exact else f"AtLeast({self.value})"


@dataclass(frozen=True)
class EdgePoint:
    """Interior point of the edge {u, v} at distance t from u (0 < t < 1).

    Normalized so u is the smaller vertex index; EdgePoint(u,v,t) and
    EdgePoint(v,u,1-t) denote the same point.
    """

    u: int
    v: int
    t: Fraction

    def __post_init__(self):
        if self.u == self.v:
            raise SpecificationError("edge point on a self-loop")
        t = Fraction(self.t)
        if not 0 < t < 1:
            raise SpecificationError(f"edge position {t} outside (0, 1)")
        if self.u > self.v:
            object.__setattr__(self, "u", self.v)
            object.__setattr__(self, "v", self.u)
            t = 1 - t
        object.__setattr__(self, "t", t)

    def position_from(self, vertex: int) -> Fraction:
        if vertex == self.u:
            return self.t
        if vertex == self.v:
            return 1 - self.t
        raise SpecificationError("vertex not an endpoint of this edge point")

    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)


Point = "int | EdgePoint"


def _segment_length(a, b) -> Fraction:
    if isinstance(a, int) and isinstance(b, int):
        if a == b:
            raise SpecificationError("zero-length segment between equal vertices")
        return Fraction(1)
    if isinstance(a, int) and isinstance(b, EdgePoint):
        return b.position_from(a)
    if isinstance(a, EdgePoint) and isinstance(b, int):
        return a.position_from(b)
    if isinstance(a, EdgePoint) and isinstance(b, EdgePoint):
        if a.endpoints() != b.endpoints():
            raise SpecificationError("edge points on different edges")
        return abs(a.t - b.t)
    raise SpecificationError(f"bad path points {a!r}, {b!r}")


@dataclass(frozen=True)
class Path:
    """A path as a sequence of points; fractional positions only on edges.

    Consecutive points span segments: two adjacent vertices (length 1), a
    vertex and a point on an incident edge, or two points of one edge.
    A single point is the trivial path.  Backtracking is allowed.
    """

    points: tuple

    def __post_init__(self):
        if not self.points:
            raise SpecificationError("empty path")

    @property
    def length(self) -> Fraction:
        total = Fraction(0)
        for a, b in zip(self.points, self.points[1:]):
            total += _segment_length(a, b)
        return total

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def is_edge_path(self) -> bool:
        return all(isinstance(p, int) for p in self.points)

    def vertices(self) -> tuple[int, ...]:
        return tuple(p for p in self.points if isinstance(p, int))

    def closure_vertices(self) -> tuple[int, ...]:
        """Vertices of the shortest edge path containing this path."""
        out: list[int] = []
        for p in self.points:
            if isinstance(p, int):
                out.append(p)
            else:
                out.extend(p.endpoints())
        seen, dedup = set(), []
        for v in out:
            if v not in seen:
                seen.add(v)
                dedup.append(v)
        return tuple(dedup)

    def reversed(self) -> "Path":
        return Path(tuple(reversed(self.points)))

    @staticmethod
    def of_vertices(*vertices: int) -> "Path":
        return Path(tuple(vertices))

    @staticmethod
    def concat(*paths: "Path") -> "Path":
        pts: list = []
        for p in paths:
            if pts and pts[-1] == p.points[0]:
                pts.extend(p.points[1:])
            else:
                pts.extend(p.points)
        return Path(tuple(pts))


def validate_path(graph: "SpaceGraph", path: Path) -> None:
    """Check that every segment of the path runs along an edge of graph."""
    for a, b in zip(path.points, path.points[1:]):
        if isinstance(a, int) and isinstance(b, int):
            if b not in graph.neighbor_set(a):
                raise SpecificationError(f"{a}-{b} is not an edge")
        else:
            pts = [p for p in (a, b) if isinstance(p, EdgePoint)]
            uv = pts[0].endpoints()
            if any(isinstance(p, EdgePoint) and p.endpoints() != uv for p in (a, b)):
                raise SpecificationError("segment spans two different edges")
            if any(isinstance(p, int) and p not in uv for p in (a, b)):
                raise SpecificationError("vertex not on the partial edge")
            if uv[1] not in graph.neighbor_set(uv[0]):
                raise SpecificationError(f"{uv} is not an edge")


class GraphBuilder:
    """Single-threaded builder; the result is immutable."""

    def __init__(self, radius: int, meta: dict | None = None):
        self.radius = radius
        self.meta = dict(meta or {})
        self._vertices: list = []
        self._index: dict = {}
        self._edges: set = set()

    def add_vertex(self, payload) -> int:
        idx = self._index.get(payload)
        if idx is None:
            idx = len(self._vertices)
            self._vertices.append(payload)
            self._index[payload] = idx
        return idx

    def has_vertex(self, payload) -> bool:
        return payload in self._index

    def add_edge(self, a, b, kind: EdgeKind, label: str | None = None) -> None:
        ia, ib = self.add_vertex(a), self.add_vertex(b)
        if ia == ib:
            raise SpecificationError(f"self-loop at {a!r}")
        self._edges.add((min(ia, ib), max(ia, ib), EdgeKind(kind), label))

    def build(self, basepoint) -> "SpaceGraph":
        base = self._index.get(basepoint)
        if base is None:
            raise SpecificationError("basepoint is not a vertex")
        return SpaceGraph(
            vertices=tuple(self._vertices),
            edges=frozenset(self._edges),
            basepoint=base,
            radius=self.radius,
            meta=self.meta,
        )


@dataclass(frozen=True)
class SpaceGraph:
    """Immutable finite truncation of a graph, with certified-pair metadata."""

    vertices: tuple
    edges: frozenset  # of (u, v, kind, label) with u < v
    basepoint: int
    radius: int
    meta: dict = field(default_factory=dict, compare=False)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    # -- structure ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.vertices)

    def index_of(self, payload) -> int:
        idx = self._lookup.get(payload)
        if idx is None:
            raise SpecificationError(f"vertex {payload!r} not in graph")
        return idx

    def contains(self, payload) -> bool:
        return payload in self._lookup

    def payload(self, idx: int):
        return self.vertices[idx]

    @property
    def _lookup(self) -> dict:
        tbl = self._cache.get("lookup")
        if tbl is None:
            tbl = {p: i for i, p in enumerate(self.vertices)}
            self._cache["lookup"] = tbl
        return tbl

    @property
    def adjacency(self) -> tuple:
        """adj[v] = sorted tuple of (kind, label_key, neighbor)."""
        adj = self._cache.get("adj")
        if adj is None:
            lists: list[list] = [[] for _ in self.vertices]
            for u, v, kind, label in self.edges:
                key = label or ""
                lists[u].append((int(kind), key, v))
                lists[v].append((int(kind), key, u))
            adj = tuple(tuple(sorted(l)) for l in lists)
            self._cache["adj"] = adj
        return adj

    def neighbor_set(self, v: int) -> frozenset:
        sets = self._cache.get("nbr")
        if sets is None:
            sets = [None] * len(self.vertices)
            self._cache["nbr"] = sets
        if sets[v] is None:
            sets[v] = frozenset(n for _, _, n in self.adjacency[v])
        return sets[v]

    def edge_kinds(self, u: int, v: int) -> tuple[EdgeKind, ...]:
        a, b = min(u, v), max(u, v)
        return tuple(
            EdgeKind(k) for (x, y, k, _l) in self.edges if (x, y) == (a, b)
        )

    def edge_count(self) -> int:
        return len(self.edges)

    def without_edge(self, u: int, v: int, kind: EdgeKind | None = None) -> "SpaceGraph":
        """A copy missing one edge; the deliberate-corruption hook for tests."""
        a, b = min(u, v), max(u, v)
        doomed = sorted(
            (e for e in self.edges
             if e[0] == a and e[1] == b and (kind is None or e[2] == kind)),
            key=repr,
        )
        if not doomed:
            raise SpecificationError(f"no edge {u}-{v} to remove")
        remaining = self.edges - {doomed[0]}
        meta = dict(self.meta)
        meta["corrupted"] = True
        return SpaceGraph(self.vertices, frozenset(remaining), self.basepoint,
                          self.radius, meta)

    # -- distances ------------------------------------------------------------

    def bfs(self, src: int, cutoff: int | None = None,
            forbidden: int | None = None) -> dict[int, int]:
        """Exact shortest-path distances within the truncation."""
        dist = {src: 0}
        queue = deque([src])
        adj = self.adjacency
        while queue:
            cur = queue.popleft()
            d = dist[cur]
            if cutoff is not None and d >= cutoff:
                continue
            for _, _, nxt in adj[cur]:
                if nxt == forbidden or nxt in dist:
                    continue
                dist[nxt] = d + 1
                queue.append(nxt)
        return dist

    def multi_source_distances(self, sources, cutoff: int | None = None) -> dict[int, int]:
        dist = {s: 0 for s in sources}
        queue = deque(dist)
        adj = self.adjacency
        while queue:
            cur = queue.popleft()
            d = dist[cur]
            if cutoff is not None and d >= cutoff:
                continue
            for _, _, nxt in adj[cur]:
                if nxt not in dist:
                    dist[nxt] = d + 1
                    queue.append(nxt)
        return dist

    @property
    def dist_from_base(self) -> dict[int, int]:
        d = self._cache.get("dist_base")
        if d is None:
            d = self.bfs(self.basepoint)
            self._cache["dist_base"] = d
        return d

    def distance(self, x: int, y: int, cutoff: int | None = None) -> int | None:
        if x == y:
            return 0
        return self.bfs(x, cutoff=cutoff).get(y)

    # -- certification ------------------------------------------------------------

    def certified_pair(self, x: int, y: int) -> bool:
        """True when every infinite-space geodesic x..y provably fits the ball."""
        db = self.dist_from_base
        dx, dy = db.get(x), db.get(y)
        if dx is None or dy is None:
            return False
        return 2 * dx + dy <= self.radius and 2 * dy + dx <= self.radius

    def certified_vertex(self, x: int) -> bool:
        d = self.dist_from_base.get(x)
        return d is not None and 3 * d <= self.radius

    def certified_pairs(self, candidates=None):
        """All certified (x, y) with x < y among candidates (default: all)."""
        pool = sorted(candidates) if candidates is not None else range(len(self.vertices))
        db = self.dist_from_base
        # 2*d(x) + d(y) <= R forces 2*d <= R for both members
        pool = [v for v in pool if db.get(v) is not None and 2 * db[v] <= self.radius]
        out = []
        for i, x in enumerate(pool):
            for y in pool[i + 1:]:
                if self.certified_pair(x, y):
                    out.append((x, y))
        return out

    # -- geodesics ------------------------------------------------------------

    def geodesic(self, x: int, y: int) -> Path | None:
        """Deterministic shortest edge path, or None if disconnected.

        Tie-break at every step: smallest (edge kind rank, label, target
        index) among edges that stay on a shortest path.
        """
        if x == y:
            return Path((x,))
        dist_y = self.bfs(y)
        if x not in dist_y:
            return None
        pts = [x]
        cur = x
        while cur != y:
            d = dist_y[cur]
            for _, _, nxt in self.adjacency[cur]:
                if dist_y.get(nxt) == d - 1:
                    pts.append(nxt)
                    cur = nxt
                    break
        return Path(tuple(pts))

    def all_geodesics(self, x: int, y: int, cap: int = 10_000):
        """Every shortest edge path x..y, up to cap; returns (paths, overflow)."""
        if x == y:
            return [Path((x,))], False
        dist_y = self.bfs(y)
        if x not in dist_y:
            return [], False
        paths: list[Path] = []
        overflow = False
        stack = [(x,)]
        while stack:
            prefix = stack.pop()
            cur = prefix[-1]
            if cur == y:
                paths.append(Path(prefix))
                if len(paths) > cap:
                    overflow = True
                    paths.pop()
                    break
                continue
            d = dist_y[cur]
            nxts = sorted(
                {n for _, _, n in self.adjacency[cur] if dist_y.get(n) == d - 1},
                reverse=True,
            )
            for nxt in nxts:
                stack.append(prefix + (nxt,))
        return paths, overflow

    def geodesic_support(self, x: int, y: int) -> set[int]:
        """All vertices lying on at least one geodesic from x to y."""
        dist_x = self.bfs(x)
        if y not in dist_x:
            return set()
        dist_y = self.bfs(y)
        d = dist_x[y]
        return {v for v, dv in dist_x.items()
                if dist_y.get(v) is not None and dv + dist_y[v] == d}

    # -- punctured distances (angles) ------------------------------------------

    def dist_avoiding(self, x: int, y: int, forbidden: int, cutoff: int,
                      strict: bool = True) -> AngleValue:
        """Shortest-path length from x to y in the graph minus `forbidden`.

        Exact(n) when a path of length n <= cutoff exists; AtLeast(cutoff)
        when the truncation contains none.  With strict=True the cutoff is
        refused if paths of that length could leave the ball.
        """
        if forbidden in (x, y):
            raise SpecificationError("endpoints must differ from the deleted vertex")
        if x == y:
            return AngleValue.of(0)
        if strict:
            db = self.dist_from_base
            unsafe = self.radius + 1
            anchor = min(db.get(x, unsafe), db.get(y, unsafe))
            if anchor + cutoff > self.radius:
                raise TruncationError(
                    f"cutoff {cutoff} unsafe at distance {anchor} from basepoint "
                    f"(radius {self.radius})"
                )
        dist = self.bfs(x, cutoff=cutoff, forbidden=forbidden)
        d = dist.get(y)
        if d is None or d > cutoff:
            return AngleValue.at_least(cutoff)
        return AngleValue.of(d)

    # -- Hausdorff ------------------------------------------------------------

    def hausdorff(self, a, b, cutoff: int | None = None) -> int:
        """Hausdorff distance between two nonempty vertex sets.

        A cutoff bounds the BFS exploration; when it proves too small the
        computation falls back to an unbounded search.
        """
        sa, sb = set(a), set(b)
        if not sa or not sb:
            raise SpecificationError("hausdorff of an empty set")
        worst = 0
        for src, dst in ((sa, sb), (sb, sa)):
            dist = self.multi_source_distances(dst, cutoff=cutoff)
            if cutoff is not None and any(v not in dist for v in src):
                dist = self.multi_source_distances(dst)
            for v in src:
                d = dist.get(v)
                if d is None:
                    raise SpecificationError("sets not connected inside truncation")
                worst = max(worst, d)
        return worst

    def path_hausdorff(self, p: Path, q: Path, cutoff: int | None = None) -> int:
        return self.hausdorff(p.closure_vertices(), q.closure_vertices(), cutoff)

    # -- exports ------------------------------------------------------------

    def describe_vertex(self, idx: int) -> dict:
        v = self.vertices[idx]
        if isinstance(v, BaseVertex):
            return {"kind": "base", "name": repr(v.element.syllables), "depth": 0}
        if isinstance(v, HoroVertex):
            return {"kind": "horoball", "coset": repr(v.coset),
                    "column": repr(v.column), "depth": v.depth}
        if isinstance(v, ApexVertex):
            return {"kind": "apex", "coset": repr(v.coset)}
        return {"kind": "plain", "name": repr(v)}

    def to_dot(self) -> str:
        lines = ["graph space {"]
        for i in range(len(self.vertices)):
            info = self.describe_vertex(i)
            label = f'{info["kind"]}:{info.get("name", info.get("coset", ""))}'
            depth = info.get("depth")
            if depth is not None:
                label += f"@{depth}"
            lines.append(f'  v{i} [label="{label}"];')
        for u, v, kind, label in sorted(self.edges):
            attr = f'kind={EdgeKind(kind).name.lower()}'
            if label:
                attr += f" label={label}"
            lines.append(f'  v{u} -- v{v} [comment="{attr}"];')
        lines.append("}")
        return "\n".join(lines)

    def to_adjacency_json(self) -> str:
        payload = {
            "radius": self.radius,
            "basepoint": self.basepoint,
            "meta": {k: repr(v) for k, v in sorted(self.meta.items())},
            "vertices": [self.describe_vertex(i) for i in range(len(self.vertices))],
            "edges": sorted(
                [u, v, EdgeKind(k).name.lower(), l or ""] for u, v, k, l in self.edges
            ),
        }
        return json.dumps(payload, sort_keys=True)
