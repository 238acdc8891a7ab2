"""Embedding a peripheral-respecting subgroup's spaces into the ambient ones.

The subgroup H is its own free product of cyclic factors, together with a
homomorphism into G given by factor images.  The coned map sends vertices
h -> phi(h) and apexes sD -> phi(s)c_D P; cone edges travel through the
connector path nu_D.  The cusped map preserves depth and shifts horoball
columns by the conjugator.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from cuspgraph.errors import SpecificationError
from cuspgraph.graphs import (
    ApexVertex,
    BaseVertex,
    EdgePoint,
    HoroVertex,
    Path,
    SpaceGraph,
)
from cuspgraph.groups import CosetId, GroupElement, GroupSpec
from cuspgraph.spaces import _sort_key
from cuspgraph.transfer import MapSpec, TransferInstance


@dataclass(frozen=True)
class PeripheralMap:
    """One subgroup peripheral, its ambient target, and the conjugator c
    with phi(D) <= c P c^-1."""

    sub_peripheral: int
    ambient_peripheral: int
    conjugator: GroupElement


@dataclass(frozen=True)
class SubgroupEmbeddingSpec:
    """A subgroup (as its own group spec) embedded by factor images."""

    subgroup: GroupSpec
    ambient: GroupSpec
    factor_images: tuple[GroupElement, ...]
    peripheral_maps: tuple[PeripheralMap, ...]
    connectors: tuple[tuple[int, tuple[GroupElement, ...]], ...] = ()

    def __post_init__(self):
        H, G = self.subgroup, self.ambient
        if len(self.factor_images) != len(H.factors):
            raise SpecificationError("one image per subgroup factor")
        for (sym, order), img in zip(H.factors, self.factor_images):
            if img.is_identity():
                raise SpecificationError(f"factor {sym!r} has trivial image")
            if order is not None and not G.power(img, order).is_identity():
                raise SpecificationError(f"image of {sym!r} breaks the factor order")
        mapped = {m.sub_peripheral for m in self.peripheral_maps}
        if mapped != set(H.peripheral_indices):
            raise SpecificationError("every subgroup peripheral needs a target")
        for m in self.peripheral_maps:
            if m.ambient_peripheral not in G.peripheral_indices:
                raise SpecificationError("target is not an ambient peripheral")
            img = self.apply(H.generator(m.sub_peripheral))
            moved = G.multiply(G.multiply(G.inverse(m.conjugator), img), m.conjugator)
            if not G.in_peripheral(moved, m.ambient_peripheral):
                raise SpecificationError(
                    "conjugated peripheral image leaves the target factor")

    def apply(self, h: GroupElement) -> GroupElement:
        """The homomorphism phi: H -> G."""
        out = self.ambient.identity()
        for i, e in h.syllables:
            out = self.ambient.multiply(out, self.ambient.power(self.factor_images[i], e))
        return out

    def peripheral_map(self, sub_peripheral: int) -> PeripheralMap:
        for m in self.peripheral_maps:
            if m.sub_peripheral == sub_peripheral:
                return m
        raise SpecificationError(f"no peripheral map for factor {sub_peripheral}")

    def check_alphabet_closure(self) -> None:
        """Construction guarantee that the subgroup alphabet sits inside the
        ambient alphabet, so the base graph embeds edge for edge."""
        ambient_letters = set(self.ambient.full_alphabet())
        for y in self.subgroup.full_alphabet():
            if self.apply(y) not in ambient_letters:
                raise SpecificationError(
                    f"image of letter {self.subgroup.format(y)!r} missing from "
                    "the ambient alphabet")


def _base_geodesic_elements(group: GroupSpec, target: GroupElement) -> tuple:
    """Deterministic geodesic word 1 -> target in the base Cayley graph."""
    alphabet = group.full_alphabet()
    if target.is_identity():
        return (target,)
    seen = {group.identity(): None}
    queue = deque([group.identity()])
    while queue:
        cur = queue.popleft()
        for x in sorted(alphabet, key=_sort_key):
            nxt = group.multiply(cur, x)
            if nxt not in seen:
                seen[nxt] = cur
                if nxt == target:
                    chain = [nxt]
                    while chain[-1] != group.identity():
                        chain.append(seen[chain[-1]])
                    return tuple(reversed(chain))
                queue.append(nxt)
    raise SpecificationError("connector target unreachable in the base graph")


class EmbeddedPair:
    """Paired sub/ambient instances with the coned and cusped subgroup maps."""

    def __init__(self, embed: SubgroupEmbeddingSpec, r: int, radius: int,
                 sub_radius: int | None = None, max_depth: int | None = None):
        embed.check_alphabet_closure()
        self.embed = embed
        self.r = r
        self.sub = TransferInstance(embed.subgroup, r, sub_radius or radius, max_depth)
        self.amb = TransferInstance(embed.ambient, r, radius, max_depth)
        overrides = dict(embed.connectors)
        self.connectors: dict[int, tuple[GroupElement, ...]] = {}
        for m in embed.peripheral_maps:
            nu = overrides.get(m.sub_peripheral)
            if nu is None:
                nu = _base_geodesic_elements(embed.ambient, m.conjugator)
            if nu[0] != embed.ambient.identity() or nu[-1] != m.conjugator:
                raise SpecificationError("connector must run from 1 to the conjugator")
            self.connectors[m.sub_peripheral] = tuple(nu)

    # -- vocabulary ----------------------------------------------------------

    def phi(self, h: GroupElement) -> GroupElement:
        return self.embed.apply(h)

    def image_coset(self, cid: CosetId) -> CosetId:
        m = self.embed.peripheral_map(cid.peripheral)
        g = self.embed.ambient.multiply(self.phi(cid.rep), m.conjugator)
        return self.embed.ambient.coset_rep(g, m.ambient_peripheral)

    def image_column(self, cid: CosetId, column: GroupElement) -> GroupElement:
        m = self.embed.peripheral_map(cid.peripheral)
        return self.embed.ambient.multiply(self.phi(column), m.conjugator)

    def lambda_phi(self) -> int:
        """Measured stretch of the coned subgroup map: the longest edge image."""
        return max([1] + [len(nu) for nu in self.connectors.values()])

    # -- coned map ----------------------------------------------------------

    def phi_hat_vertex(self, idx: int) -> int:
        payload = self.sub.coned.graph.payload(idx)
        if isinstance(payload, BaseVertex):
            return self.amb.coned.vertex(self.phi(payload.element))
        return self.amb.coned.apex(self.image_coset(payload.coset))

    def _cone_edge_image_profile(self, sub_peripheral: int, q: int):
        """Breakpoints of the reparametrized cone-edge image.

        Positions >= 1/q stretch onto the image cone edge; a sliver below 1/q
        covers the connector path, so the cusped subgroup map agrees with
        iota . phi_hat . pi on vertices of depth below q.
        """
        nu = self.connectors[sub_peripheral]
        ell = len(nu) - 1
        u = Fraction(1, q)
        v = u - Fraction(1, q * ell + q) if ell else Fraction(0)
        return u, v, nu

    def phi_hat_point(self, point, q: int):
        """The coned map on points, cone edges parametrized per the q-split."""
        sub_graph = self.sub.coned.graph
        if isinstance(point, int):
            return self.phi_hat_vertex(point)
        pu, pv = sub_graph.payload(point.u), sub_graph.payload(point.v)
        if isinstance(pu, BaseVertex) and isinstance(pv, BaseVertex):
            cu = self.phi_hat_vertex(point.u)
            cv = self.phi_hat_vertex(point.v)
            return EdgePoint(cu, cv, point.position_from(point.u))
        apex_payload, base_payload = ((pu, pv) if isinstance(pu, ApexVertex)
                                      else (pv, pu))
        h = base_payload.element
        cid = apex_payload.coset
        t = point.position_from(
            point.u if base_payload is pu else point.v)
        u_brk, v_brk, nu = self._cone_edge_image_profile(cid.peripheral, q)
        img_apex = self.amb.coned.apex(self.image_coset(cid))
        hc = self.image_column(cid, h)
        img_base = self.amb.coned.vertex(hc)
        if t >= u_brk:
            return EdgePoint(img_base, img_apex, t)
        if t >= v_brk:
            pos = (t - v_brk) / (u_brk - v_brk) * u_brk if u_brk != v_brk else u_brk
            if pos == 0:
                return img_base
            return EdgePoint(img_base, img_apex, pos)
        ell = len(nu) - 1
        amb = self.embed.ambient
        along = t / v_brk * ell if v_brk else Fraction(0)
        seg, frac = int(along), along - int(along)
        a = self.amb.coned.vertex(amb.multiply(self.phi(h), nu[seg]))
        if frac == 0:
            return a
        b = self.amb.coned.vertex(amb.multiply(self.phi(h), nu[seg + 1]))
        return EdgePoint(a, b, frac)

    def phi_hat_path(self, path: Path) -> Path:
        """Edge-path image under the coned map."""
        sub_graph = self.sub.coned.graph
        if not path.is_edge_path():
            raise SpecificationError("phi_hat_path expects an edge path")
        verts = path.vertices()
        pts: list = []

        def emit(p):
            if not pts or pts[-1] != p:
                pts.append(p)

        if len(verts) == 1:
            return Path((self.phi_hat_vertex(verts[0]),))
        amb = self.embed.ambient
        for a, b in zip(verts, verts[1:]):
            pa, pb = sub_graph.payload(a), sub_graph.payload(b)
            if isinstance(pa, BaseVertex) and isinstance(pb, BaseVertex):
                emit(self.phi_hat_vertex(a))
                emit(self.phi_hat_vertex(b))
                continue
            apex_payload, base_payload = ((pa, pb) if isinstance(pa, ApexVertex)
                                          else (pb, pa))
            h = base_payload.element
            nu = self.connectors[apex_payload.coset.peripheral]
            chain = [self.amb.coned.vertex(amb.multiply(self.phi(h), g)) for g in nu]
            chain.append(self.amb.coned.apex(self.image_coset(apex_payload.coset)))
            if isinstance(pa, ApexVertex):
                chain.reverse()
            for p in chain:
                emit(p)
        return Path(tuple(pts))

    # -- cusped map ----------------------------------------------------------

    def phi_r_vertex(self, idx: int) -> int:
        payload = self.sub.cusped.graph.payload(idx)
        if isinstance(payload, BaseVertex):
            return self.amb.cusped.vertex(self.phi(payload.element))
        if isinstance(payload, ApexVertex):
            return self.amb.cusped.apex(self.image_coset(payload.coset))
        return self.amb.cusped.horo_vertex(
            self.image_coset(payload.coset),
            self.image_column(payload.coset, payload.column),
            payload.depth,
        )

    def phi_r_path(self, path: Path) -> Path:
        """Edge-path image under the cusped map.

        Depth-0 edges map to base edges, the first vertical edge of a column
        travels through the connector, deeper horizontal edges become short
        horoball geodesics between the image columns.
        """
        sub_cusped, amb_cusped = self.sub.cusped, self.amb.cusped
        if not path.is_edge_path():
            raise SpecificationError("phi_r_path expects an edge path")
        verts = path.vertices()
        if len(verts) == 1:
            return Path((self.phi_r_vertex(verts[0]),))
        amb = self.embed.ambient
        pts: list = []

        def emit(p):
            if not pts or pts[-1] != p:
                pts.append(p)

        for a, b in zip(verts, verts[1:]):
            pa = sub_cusped.graph.payload(a)
            pb = sub_cusped.graph.payload(b)
            if isinstance(pa, BaseVertex) and isinstance(pb, BaseVertex):
                emit(self.phi_r_vertex(a))
                emit(self.phi_r_vertex(b))
                continue
            if isinstance(pa, BaseVertex) or isinstance(pb, BaseVertex):
                base, horo = (a, b) if isinstance(pa, BaseVertex) else (b, a)
                hp = sub_cusped.graph.payload(horo)
                nu = self.connectors[hp.coset.peripheral]
                h = sub_cusped.graph.payload(base).element
                chain = [amb_cusped.vertex(amb.multiply(self.phi(h), g)) for g in nu]
                chain.append(self.phi_r_vertex(horo))
                if base != a:
                    chain.reverse()
                for p in chain:
                    emit(p)
                continue
            ka = self.phi_r_vertex(a)
            kb = self.phi_r_vertex(b)
            if kb in amb_cusped.graph.neighbor_set(ka):
                emit(ka)
                emit(kb)
                continue
            cid = amb_cusped.coset_of(ka) or amb_cusped.coset_of(kb)
            for p in amb_cusped.chart(cid).regular_geodesic(ka, kb).points:
                emit(p)
        return Path(tuple(pts))

    def lambda_phi_cusped(self, sample_paths) -> Fraction:
        """Measured Lipschitz bound: max image length over sampled edges."""
        worst = Fraction(1)
        for p in sample_paths:
            if p.length:
                worst = max(worst, Fraction(self.phi_r_path(p).length, p.length))
        return worst

    # -- agreement with the composite map -----------------------------------------

    def composite_vertex(self, idx: int, q: int) -> int:
        """iota . phi_hat . pi applied to a cusped subgroup vertex."""
        spec_sub = MapSpec(self.r, q)
        spec_amb = MapSpec(self.r, q)
        hat = self.phi_hat_point(self.sub.pi(spec_sub, idx), q)
        out = self.amb.iota(spec_amb, hat)
        if not isinstance(out, int):
            raise SpecificationError("composite image is not a vertex")
        return out

    def check_composite_agreement(self, q: int, sample=None) -> list:
        """phi_r == iota . phi_hat . pi on vertices at depth < q (ball-wide)."""
        cusped = self.sub.cusped
        bad = []
        vertices = sample if sample is not None else range(len(cusped.graph.vertices))
        for v in vertices:
            if cusped.depth(v) >= q:
                continue
            try:
                direct = self.phi_r_vertex(v)
                composite = self.composite_vertex(v, q)
            except SpecificationError:
                continue
            if direct != composite:
                bad.append((v, direct, composite))
        return bad

    def image_vertices(self, min_region=None) -> list[int]:
        """Ambient cusped vertices hit by phi_r (those present in the ball)."""
        out = []
        for v in range(len(self.sub.cusped.graph.vertices)):
            try:
                out.append(self.phi_r_vertex(v))
            except SpecificationError:
                continue
        return sorted(set(out))

    def injectivity_violations(self) -> list:
        """phi_hat must be injective on vertices; report collisions."""
        seen: dict[int, int] = {}
        bad = []
        for v in range(len(self.sub.coned.graph.vertices)):
            try:
                img = self.phi_hat_vertex(v)
            except SpecificationError:
                continue
            if img in seen:
                bad.append((seen[img], v))
            else:
                seen[img] = v
        return bad
