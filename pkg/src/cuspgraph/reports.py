"""Measured constants and the lemma-check sweeps over transfer maps.

Every constant the theory asserts to exist (stretch factors, angle
expansion, big-angle thresholds, pullback closeness) is measured on a
concrete instance and pinned as a regression fixture; assertions compare
behavior against the measured values, never against assumed formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from cuspgraph import fastbfs
from cuspgraph.errors import SpecificationError
from cuspgraph.graphs import AngleValue, BaseVertex, Path
from cuspgraph.spaces import estimate_delta
from cuspgraph.transfer import MapSpec, TransferInstance, cached_row, det_geodesic


@dataclass
class MeasuredConstants:
    """Empirical stand-ins for the existential constants, with provenance."""

    instance: str
    r: int | None = None
    q: int | None = None
    radius: int | None = None
    lambda_phi: int | None = None
    lambda_phi_cusped: str | None = None
    angle_expansion: str | None = None
    big_angle_threshold: int | None = None
    deep_penetration_threshold: int | None = None
    pullback_closeness: int | None = None
    distortion: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "instance": self.instance,
            "r": self.r,
            "q": self.q,
            "radius": self.radius,
            "lambda_phi": self.lambda_phi,
            "lambda_phi_cusped": self.lambda_phi_cusped,
            "angle_expansion": self.angle_expansion,
            "big_angle_threshold": self.big_angle_threshold,
            "deep_penetration_threshold": self.deep_penetration_threshold,
            "pullback_closeness": self.pullback_closeness,
            "distortion": dict(sorted(self.distortion.items())),
        }


def _ratio(a, b) -> Fraction:
    return Fraction(a, b) if b else Fraction(0)


@dataclass
class DistortionReport:
    pi_max_ratio: Fraction
    iota_max_ratio: Fraction
    pi_bound: int
    iota_bound: int
    pairs_pi: int
    pairs_iota: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def distortion_report(inst: TransferInstance, q: int,
                      max_pairs: int = 4000) -> DistortionReport:
    """Empirical quasi-isometry ratios of pi and iota over certified pairs.

    pi: coned distance of images never exceeds the cusped distance, and the
    cusped distance is at most 2(r+1) times the coned one.  iota: cusped
    distance of images sits between the coned distance and (r+1) times it.
    """
    spec = MapSpec(inst.r, q)
    r = inst.r
    violations = []

    cusped, coned = inst.cusped.graph, inst.coned.graph
    pairs_k = cusped.certified_pairs()[:max_pairs]
    fastbfs.warm_rows(cusped, (y for _, y in pairs_k))
    exit_sources = set()
    for x, y in pairs_k:
        for p in (inst.pi(spec, x), inst.pi(spec, y)):
            exit_sources.update(p.endpoints() if hasattr(p, "endpoints") else (p,))
    fastbfs.warm_rows(coned, exit_sources)
    pi_max = Fraction(0)
    for x, y in pairs_k:
        dk = cached_row(cusped, y)[x]
        px, py = inst.pi(spec, x), inst.pi(spec, y)
        da = _point_distance(inst, px, py)
        if da > dk:
            violations.append(("pi-upper", x, y, dk, str(da)))
        if dk > 2 * (r + 1) * da and da > 0:
            violations.append(("pi-lower", x, y, dk, str(da)))
        if da:
            pi_max = max(pi_max, _ratio(dk, da))

    pairs_a = coned.certified_pairs()[:max_pairs]
    fastbfs.warm_rows(coned, (y for _, y in pairs_a))
    fastbfs.warm_rows(cusped, (inst.iota(spec, y) for _, y in pairs_a))
    iota_max = Fraction(0)
    for x, y in pairs_a:
        da = cached_row(coned, y)[x]
        ix, iy = inst.iota(spec, x), inst.iota(spec, y)
        dk = cached_row(cusped, iy)[ix]
        if dk < da:
            violations.append(("iota-lower", x, y, da, dk))
        if dk > (r + 1) * da:
            violations.append(("iota-upper", x, y, da, dk))
        if da:
            iota_max = max(iota_max, _ratio(dk, da))
    return DistortionReport(pi_max, iota_max, 2 * (r + 1), r + 1,
                            len(pairs_k), len(pairs_a), violations)


def _point_distance(inst: TransferInstance, pa, pb) -> Fraction:
    if pa == pb:
        return Fraction(0)
    return inst.point_geodesic(pa, pb).length


@dataclass
class PathLengthReport:
    checked: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def path_length_report(inst: TransferInstance, q: int,
                       max_pairs: int = 800) -> PathLengthReport:
    """Push-forward and pullback length bounds over certified-pair geodesics.

    Push-forwards of edge paths never grow (no partial horizontal edges, so
    the stronger bound applies, under the general factor-2 cap); pullbacks
    stay within [1, r+1] times the source length, and the composites fix the
    appropriate regions.
    """
    spec = MapSpec(inst.r, q)
    cusped, coned = inst.cusped, inst.coned
    violations = []
    checked = 0
    pairs_k = cusped.graph.certified_pairs()[:max_pairs]
    fastbfs.warm_rows(cusped.graph, (y for _, y in pairs_k))
    pairs_a = coned.graph.certified_pairs()[:max_pairs]
    fastbfs.warm_rows(coned.graph, (y for _, y in pairs_a))
    for x, y in pairs_k:
        gamma = cusped.regularize(det_geodesic(cusped.graph, x, y))
        hat = inst.push_forward(spec, gamma)
        checked += 1
        if hat.length > 2 * gamma.length:
            violations.append(("push-forward-2x", x, y))
        if hat.length > gamma.length:
            violations.append(("push-forward-no-partial", x, y))
        if not _continuous(hat):
            violations.append(("push-forward-broken", x, y))
    for x, y in pairs_a:
        c = det_geodesic(coned.graph, x, y)
        tilde = inst.pullback(spec, c)
        checked += 1
        if not (c.length <= tilde.length <= (inst.r + 1) * c.length):
            violations.append(("pullback-length", x, y, str(c.length),
                               str(tilde.length)))
    return PathLengthReport(checked, violations)


def _continuous(path: Path) -> bool:
    try:
        _ = path.length
        return True
    except SpecificationError:
        return False


@dataclass
class AngleTransferReport:
    rows: list
    big_angle_threshold: int | None
    deep_penetration_threshold: int | None
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def angle_transfer_report(inst: TransferInstance, q: int, peripheral: int = None,
                          exponent_bound: int = None,
                          geodesic_cap: int = 2000) -> AngleTransferReport:
    """Angle behavior across pi on one peripheral coset's pairs.

    For pairs u, v on the identity coset line: records the horoball
    penetration of their cusped geodesic, the coned angle at the apex and
    whether coned geodesics can avoid the apex.  Asserts the shallow bound
    (penetration <= q forces angle <= 2^(q+1)) and apex-forcing above the
    measured threshold; thresholds are measured, then pinned by fixtures.
    """
    group = inst.group
    if peripheral is None:
        peripheral = group.peripheral_indices[0]
    if exponent_bound is None:
        exponent_bound = max(2, inst.radius // 3)
    cid = group.coset_rep(group.identity(), peripheral)
    chart = inst.cusped.chart(cid)
    gen = group.generator(peripheral)
    cols = [group.power(gen, k) for k in range(-exponent_bound, exponent_bound + 1)]
    cols = [c for c in cols if inst.cusped.graph.contains(BaseVertex(c))]

    coned = inst.coned.graph
    apex = inst.coned.apex(cid)
    rows = []
    avoidable_angles = []
    small_angle_pens = []
    violations = []
    for i, cu in enumerate(cols):
        for cv in cols[i + 1:]:
            u, v = inst.cusped.vertex(cu), inst.cusped.vertex(cv)
            d_base = chart.base_dist(cu, cv)
            total = chart.distance(u, v)
            pen = _min_penetration(d_base, total, inst.r)
            au, av = inst.coned.vertex(cu), inst.coned.vertex(cv)
            angle = coned.dist_avoiding(au, av, apex, 1 << (q + 2), strict=False)
            geods, overflow = coned.all_geodesics(au, av, cap=geodesic_cap)
            passes = [apex in g.vertices() for g in geods]
            avoidable = not all(passes) and not overflow
            rows.append({
                "u": group.format(cu), "v": group.format(cv),
                "penetration": pen, "angle": repr(angle),
                "apex_avoidable": avoidable,
            })
            if pen <= q and not angle.definitely_le(1 << (q + 1)):
                violations.append(("shallow-angle-bound", cu, cv, pen, repr(angle)))
            if avoidable and angle.exact:
                avoidable_angles.append(angle.value)
            if angle.exact:
                small_angle_pens.append((angle.value, pen))
    big_d = max(avoidable_angles, default=None)
    if big_d is not None:
        for i, cu in enumerate(cols):
            for cv in cols[i + 1:]:
                au, av = inst.coned.vertex(cu), inst.coned.vertex(cv)
                angle = coned.dist_avoiding(au, av, apex, 1 << (q + 2), strict=False)
                if angle.definitely_gt(big_d):
                    geods, overflow = coned.all_geodesics(au, av, cap=geodesic_cap)
                    if not overflow and any(apex not in g.vertices() for g in geods):
                        violations.append(("apex-forcing", cu, cv))
    deep_threshold = max((pen for ang, pen in small_angle_pens
                          if big_d is None or ang <= big_d), default=None)
    return AngleTransferReport(rows, big_d, deep_threshold, violations)


def _min_penetration(d_base: int | None, total: int, r: int) -> int:
    """Smallest max-depth among geodesics of the closed-form length."""
    if d_base in (None, 0):
        return 0
    for m in range(0, max(d_base.bit_length() + 2, r + 2)):
        h = -(-d_base // (1 << m))
        if 2 * m + h == total:
            return m
    return r + 1  # only the apex route achieves the distance


@dataclass
class GuessingFamilyReport:
    bigon_max: int
    bigon_bound: int
    closeness: int
    thin_union: int
    pushforward_checked: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_guessing_family(inst: TransferInstance, q: int, delta_hat: int,
                           max_pairs: int = 400,
                           max_triples: int = 400) -> GuessingFamilyReport:
    """The extended-pullback family behaves like guessed geodesics.

    (a) two independently built extended pullbacks per pair stay within
    2*q*delta of each other; (b) extended pullbacks stay within a finite,
    measured Hausdorff distance of true geodesics (pinned as the closeness
    constant); (c) the family satisfies the thin-union containment; (d)
    push-forwards of shallow geodesics are quasi-geodesics with measured
    distortion.
    """
    spec = MapSpec(inst.r, q)
    cusped = inst.cusped
    graph = cusped.graph
    violations = []
    pairs = graph.certified_pairs()[:max_pairs]
    fastbfs.warm_rows(graph, (y for _, y in pairs))

    bigon_max = 0
    closeness = 0
    probe = 2 * q * delta_hat + 3
    etas = {}
    for x, y in pairs:
        eta1 = inst.extended_pullback(spec, x, y, flip=False)
        eta2 = inst.extended_pullback(spec, x, y, flip=True)
        etas[(x, y)] = eta1
        hd = graph.path_hausdorff(eta1, eta2, cutoff=probe)
        bigon_max = max(bigon_max, hd)
        if hd > 2 * q * delta_hat:
            violations.append(("bigon", x, y, hd))
        true_geo = cusped.regularize(det_geodesic(graph, x, y))
        closeness = max(closeness, graph.path_hausdorff(eta1, true_geo, cutoff=probe))

    pool = sorted({v for pair in pairs for v in pair})
    pool = [v for v in pool if graph.certified_vertex(v)]
    thin = 0
    triples = [(x, y, z) for i, x in enumerate(pool)
               for j, y in enumerate(pool[i + 1:], i + 1)
               for z in pool[j + 1:]][:max_triples]

    def eta_of(a, b):
        key = (min(a, b), max(a, b))
        if key not in etas:
            etas[key] = inst.extended_pullback(spec, *key)
        return etas[key]

    for x, y, z in triples:
        exy, exz, ezy = eta_of(x, y), eta_of(x, z), eta_of(z, y)
        union = set(exz.closure_vertices()) | set(ezy.closure_vertices())
        dist = graph.multi_source_distances(union, cutoff=probe)
        if any(v not in dist for v in exy.closure_vertices()):
            dist = graph.multi_source_distances(union)
        worst = max(dist.get(v, graph.radius) for v in exy.closure_vertices())
        thin = max(thin, worst)

    n_hat = closeness
    pushed = 0
    for x, y in pairs:
        gamma = cusped.regularize(det_geodesic(graph, x, y))
        d = cusped.penetration(gamma).max_depth
        if d > q or d == 0:
            continue
        hat = inst.push_forward(spec, gamma)
        verts = [p for p in hat.points if isinstance(p, int)]
        pushed += 1
        k = d + n_hat
        for i in range(len(verts)):
            row = cached_row(inst.coned.graph, verts[i])
            for j in range(i + 1, len(verts)):
                if j - i > k * max(row[verts[j]], 0) + k:
                    violations.append(("pushforward-quasigeodesic", x, y, i, j))
    return GuessingFamilyReport(bigon_max, 2 * q * delta_hat, closeness, thin,
                                pushed, violations)
