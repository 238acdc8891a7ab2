"""Dehn filling quotients, induced fillings, and conclusion-level checks.

Filling a cyclic peripheral <b> by its n-th powers turns the factor Z into
Z/n (or Z/m into Z/gcd(m, n)); the projection reduces syllable exponents
and renormalizes.  Everything stays exact because quotients remain free
products of cyclic factors.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import gcd

from cuspgraph.errors import SpecificationError
from cuspgraph.groups import GroupElement, GroupSpec, enumerate_ball
from cuspgraph.embedding import PeripheralMap, SubgroupEmbeddingSpec
from cuspgraph.spaces import CuspedSpace, CuspedSpec, _sort_key


@dataclass(frozen=True)
class FillingSpec:
    """Kernel exponents per peripheral index: n >= 1 fills by <gen^n>,
    absent or 0 leaves the factor alone."""

    kernels: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for idx, n in self.kernels:
            if n < 0:
                raise SpecificationError("kernel exponent must be >= 0")

    def exponent(self, index: int) -> int:
        for idx, n in self.kernels:
            if idx == index:
                return n
        return 0

    def is_trivial(self) -> bool:
        return all(n == 0 for _, n in self.kernels)


@dataclass(frozen=True)
class Projection:
    """The quotient homomorphism: reduce exponents, renormalize."""

    source: GroupSpec
    target: GroupSpec
    index_map: tuple  # source factor index -> target index or None (collapsed)

    def apply(self, g: GroupElement) -> GroupElement:
        out = self.target.identity()
        for i, e in g.syllables:
            j = self.index_map[i]
            if j is None:
                continue
            out = self.target.multiply(out, self.target.generator(j, e))
        return out


def _quotient_order(order: int | None, n: int) -> int | None:
    """Order of the factor after killing gen^n; None result keeps Z,
    1 collapses the factor."""
    if n == 0:
        return order
    if order is None:
        return n
    return gcd(order, n)


def fill(group: GroupSpec, filling: FillingSpec):
    """The filling quotient and its projection.

    Each filled peripheral factor is replaced by the cyclic group of the
    kernel index; exponent-1 kernels collapse their factor entirely.
    """
    for idx, n in filling.kernels:
        if idx not in group.peripheral_indices:
            raise SpecificationError(f"kernel on non-peripheral factor {idx}")
    new_factors = []
    index_map: list[int | None] = []
    for i, (sym, order) in enumerate(group.factors):
        new_order = _quotient_order(order, filling.exponent(i))
        if new_order == 1:
            index_map.append(None)
        else:
            index_map.append(len(new_factors))
            new_factors.append((sym, new_order))
    skeleton = GroupSpec(factors=tuple(new_factors))
    proj_skeleton = Projection(group, skeleton, tuple(index_map))

    def push_letters(letters):
        out = []
        for x in letters:
            y = proj_skeleton.apply(x)
            if not y.is_identity() and y not in out:
                out.append(y)
        return tuple(out)

    peripheral_indices = tuple(
        index_map[i] for i in group.peripheral_indices if index_map[i] is not None
    )
    peripheral_letters = tuple(
        (index_map[i], push_letters(letters))
        for i, letters in group.peripheral_letters
        if index_map[i] is not None
    )
    quotient = GroupSpec(
        factors=tuple(new_factors),
        peripheral_indices=peripheral_indices,
        gen_set_x=push_letters(group.gen_set_x),
        peripheral_letters=peripheral_letters,
    )
    return quotient, Projection(group, quotient, tuple(index_map))


def check_homomorphism(proj: Projection, elements) -> list:
    """pi(xy) = pi(x)pi(y) over all pairs from the given elements."""
    bad = []
    elems = list(elements)
    for x in elems:
        for y in elems:
            lhs = proj.apply(proj.source.multiply(x, y))
            rhs = proj.target.multiply(proj.apply(x), proj.apply(y))
            if lhs != rhs:
                bad.append((x, y))
    return bad


def induced_filling(embed: SubgroupEmbeddingSpec, filling: FillingSpec) -> FillingSpec:
    """Pull the ambient kernels back through the embedding.

    For cyclic data with phi(d) = c b^s c^-1 and ambient kernel <b^n>, the
    induced kernel is <d^(lcm(|s|, n)/|s|)>.
    """
    H, G = embed.subgroup, embed.ambient
    kernels = []
    for m in embed.peripheral_maps:
        n = filling.exponent(m.ambient_peripheral)
        if n == 0:
            kernels.append((m.sub_peripheral, 0))
            continue
        img = embed.apply(H.generator(m.sub_peripheral))
        moved = G.multiply(G.multiply(G.inverse(m.conjugator), img), m.conjugator)
        if len(moved.syllables) != 1 or moved.syllables[0][0] != m.ambient_peripheral:
            raise SpecificationError("peripheral image is not a power of the target")
        s = abs(moved.syllables[0][1])
        kernels.append((m.sub_peripheral, (s * n // gcd(s, n)) // s))
    return FillingSpec(tuple(kernels))


@dataclass
class HFillingVerdict:
    is_h_filling: bool
    witness: tuple | None
    conjugators_checked: int


def is_h_filling(embed: SubgroupEmbeddingSpec, filling: FillingSpec,
                 conj_radius: int = 3, membership_radius: int = 8,
                 power_bound: int = 12) -> HFillingVerdict:
    """Ball-bounded check of the compatibility condition for subgroup fillings.

    Over conjugators g in a ball: whenever the subgroup meets g P g^-1 in a
    nontrivial (hence infinite) cyclic subgroup, the conjugated kernel must
    land inside some conjugate of a subgroup peripheral.  First violation is
    returned as a witness.
    """
    G, H = embed.ambient, embed.subgroup
    support = G.symmetrize(list(G.full_alphabet()) or
                           [G.generator(i) for i in range(len(G.factors))])
    conj_ball = list(enumerate_ball(G, support, conj_radius))
    image_ball = {embed.apply(h) for h in
                  enumerate_ball(H, H.full_alphabet(), membership_radius)}
    sub_targets = [
        (m, embed.apply(H.generator(m.sub_peripheral)))
        for m in embed.peripheral_maps
    ]
    checked = 0
    for g in sorted(conj_ball, key=_sort_key):
        g_inv = G.inverse(g)
        for i in G.peripheral_indices:
            gen = G.generator(i)
            if G.coset_rep(g, i).rep != g:
                continue  # conjugators in one coset give the same subgroup pair
            checked += 1
            meets = any(
                G.multiply(G.multiply(g, G.power(gen, k)), g_inv) in image_ball
                for k in range(1, power_bound + 1)
            )
            if not meets:
                continue
            n = filling.exponent(i)
            if n == 0:
                continue
            w = G.multiply(G.multiply(g, G.power(gen, n)), g_inv)
            if not _lands_in_some_peripheral_conjugate(embed, sub_targets, w,
                                                       membership_radius,
                                                       power_bound):
                return HFillingVerdict(False, (g, i), checked)
    return HFillingVerdict(True, None, checked)


def _lands_in_some_peripheral_conjugate(embed, sub_targets, w: GroupElement,
                                        membership_radius: int,
                                        power_bound: int) -> bool:
    G, H = embed.ambient, embed.subgroup
    candidates = [embed.apply(s) for s in
                  enumerate_ball(H, H.full_alphabet(), membership_radius)]
    for m, d_img in sub_targets:
        powers = set()
        for k in range(-power_bound, power_bound + 1):
            powers.add(G.power(d_img, k))
        for s in candidates:
            u = G.multiply(G.multiply(G.inverse(s), w), s)
            if u in powers:
                return True
    return False


def build_quotient_cusped(quotient: GroupSpec, r: int, radius: int,
                          max_depth: int | None = None) -> CuspedSpace:
    """Cusped space of the filled pair; finite peripherals give cycle bases."""
    return CuspedSpace(CuspedSpec(quotient, r, radius, max_depth))


def quotient_embedding(embed: SubgroupEmbeddingSpec, filling: FillingSpec):
    """The induced embedding of the induced filling into the filled ambient.

    Returns (quotient subgroup spec, quotient ambient spec, embedding).
    """
    sub_filling = induced_filling(embed, filling)
    h_bar, proj_h = fill(embed.subgroup, sub_filling)
    g_bar, proj_g = fill(embed.ambient, filling)
    images = []
    for i, img in enumerate(embed.factor_images):
        j = proj_h.index_map[i]
        if j is None:
            continue
        images.append(proj_g.apply(img))
    maps = []
    for m in embed.peripheral_maps:
        j = proj_h.index_map[m.sub_peripheral]
        tgt = proj_g.index_map[m.ambient_peripheral]
        if j is None or tgt is None:
            continue
        maps.append(PeripheralMap(j, tgt, proj_g.apply(m.conjugator)))
    quotient_embed = SubgroupEmbeddingSpec(
        subgroup=h_bar,
        ambient=g_bar,
        factor_images=tuple(images),
        peripheral_maps=tuple(maps),
    )
    return h_bar, g_bar, quotient_embed, proj_h, proj_g


def kernel_cross_check(group: GroupSpec, filling: FillingSpec, radius: int,
                       conj_radius: int = 2) -> tuple[bool, dict]:
    """Two independent kernel detectors agree on the ball.

    Route one: normal-form projection is trivial.  Route two: reachability
    from the identity by conjugated kernel relators (normal-closure BFS),
    run inside the ball.  Route two certifies membership only, so the check
    asserts closure containment plus spot agreement for short elements.
    """
    quotient, proj = fill(group, filling)
    support = group.full_alphabet() or tuple(
        group.generator(i) for i in range(len(group.factors)))
    ball = enumerate_ball(group, support, radius)
    relators = []
    conj = enumerate_ball(group, support, conj_radius)
    for i, n in filling.kernels:
        if n == 0:
            continue
        base = group.power(group.generator(i), n)
        for t in conj:
            for rel in (base, group.inverse(base)):
                relators.append(group.conjugate(rel, t))
    closure = {group.identity()}
    queue = deque(closure)
    while queue:
        cur = queue.popleft()
        for rel in relators:
            nxt = group.multiply(cur, rel)
            if nxt in ball and nxt not in closure:
                closure.add(nxt)
                queue.append(nxt)
    bad_in_closure = [g for g in closure if not proj.apply(g).is_identity()]
    trivial = [g for g, d in ball.items()
               if proj.apply(g).is_identity() and not g.is_identity()]
    short_missed = [g for g in trivial
                    if ball[g] <= radius - 2 * conj_radius and g not in closure]
    ok = not bad_in_closure and not short_missed
    return ok, {
        "closure_size": len(closure),
        "trivial_in_ball": len(trivial),
        "bad_in_closure": len(bad_in_closure),
        "short_missed": len(short_missed),
    }


def injectivity_radius(group: GroupSpec, filling: FillingSpec,
                       radius: int) -> int | None:
    """Shortest nontrivial kernel element's word length in the ball."""
    quotient, proj = fill(group, filling)
    support = group.full_alphabet() or tuple(
        group.generator(i) for i in range(len(group.factors)))
    best = None
    for g, d in enumerate_ball(group, support, radius).items():
        if not g.is_identity() and proj.apply(g).is_identity():
            best = d if best is None else min(best, d)
    return best


@dataclass
class FillingConclusions:
    peripheral_injective: bool
    injective_on_ball: bool
    separation_violations: list
    induced_injective: bool
    homomorphism_ok: bool
    injectivity_radius: int | None
    details: dict

    @property
    def ok(self) -> bool:
        return (self.peripheral_injective and self.induced_injective
                and self.homomorphism_ok and not self.separation_violations)


def verify_filling_conclusions(group: GroupSpec, embed: SubgroupEmbeddingSpec | None,
                               filling: FillingSpec, radius: int = 6,
                               separation_length: int = 3,
                               expect_ball_injective: int | None = None,
                               ) -> FillingConclusions:
    """Conclusion-level checks of the filling theorems on a ball.

    (a) each filled peripheral injects into the quotient; (b) the projection
    is injective on the ball up to the expected radius; (c) elements outside
    the subgroup stay outside its image (subgroup checks only when an
    embedding is supplied); (d) the induced filling injects; plus the
    homomorphism property on a radius-2 ball and the injectivity radius.
    """
    quotient, proj = fill(group, filling)
    support = group.full_alphabet() or tuple(
        group.generator(i) for i in range(len(group.factors)))
    ball = enumerate_ball(group, support, radius)

    periph_ok = True
    for i, n in filling.kernels:
        if n == 0:
            continue
        seen = set()
        for t in range(n):
            img = proj.apply(group.power(group.generator(i), t))
            if img in seen:
                periph_ok = False
            seen.add(img)

    hom_bad = check_homomorphism(proj, list(enumerate_ball(group, support, 2)))

    inj_rad = injectivity_radius(group, filling, radius)
    expect = expect_ball_injective
    if expect is None:
        expect = (inj_rad - 1) if inj_rad is not None else radius
    images: dict[GroupElement, GroupElement] = {}
    ball_injective = True
    for g, d in ball.items():
        if d > expect:
            continue
        img = proj.apply(g)
        if img in images and images[img] != g:
            ball_injective = False
        images[img] = g

    separation_violations: list = []
    induced_ok = True
    details: dict = {}
    if embed is not None:
        h_ball = enumerate_ball(embed.subgroup, embed.subgroup.full_alphabet(),
                                radius + 2)
        phi_ball = {embed.apply(h) for h in h_ball}
        image_set = {proj.apply(x) for x in phi_ball}
        for g, d in sorted(ball.items(), key=lambda kv: (kv[1], _sort_key(kv[0]))):
            if d > separation_length or g in phi_ball:
                continue
            if proj.apply(g) in image_set:
                separation_violations.append(group.format(g))
        h_bar, g_bar, q_embed, proj_h, _ = quotient_embedding(embed, filling)
        seen_imgs: dict = {}
        for h in enumerate_ball(h_bar, h_bar.full_alphabet() or tuple(
                h_bar.generator(i) for i in range(len(h_bar.factors))), radius):
            img = q_embed.apply(h)
            if img in seen_imgs and seen_imgs[img] != h:
                induced_ok = False
            seen_imgs[img] = h
        details["induced_factors"] = [
            (sym, order) for sym, order in h_bar.factors]
    return FillingConclusions(
        peripheral_injective=periph_ok,
        injective_on_ball=ball_injective,
        separation_violations=separation_violations,
        induced_injective=induced_ok,
        homomorphism_ok=not hom_bad,
        injectivity_radius=inj_rad,
        details=details,
    )
