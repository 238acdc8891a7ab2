"""Exact arithmetic for free products of cyclic groups.

Elements are normal-form words: alternating syllables (factor, exponent)
with exponents reduced mod the factor order.  This covers every group the
toolkit needs (free groups, Z peripherals, and filling quotients Z * Z/n)
with an exact word problem and canonical coset representatives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from cuspgraph.errors import SpecificationError

Syllable = tuple[int, int]  # (factor index, nonzero exponent)


@dataclass(frozen=True)
class GroupElement:
    """Normal-form word in a free product of cyclic factors.

    Adjacent syllables have distinct factor indices and no exponent is
    congruent to zero mod its factor order; the empty tuple is the identity.
    """

    syllables: tuple[Syllable, ...] = ()

    def is_identity(self) -> bool:
        return not self.syllables

    def syllable_count(self) -> int:
        return len(self.syllables)

    def __repr__(self) -> str:
        return f"GroupElement({self.syllables!r})"


IDENTITY = GroupElement()

_WORD_TOKEN = re.compile(r"([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+))?")


@dataclass(frozen=True)
class CosetId:
    """Canonical name for a left coset g·P_i of a peripheral factor.

    The representative is the unique normal form with no trailing syllable
    in factor i, so two CosetIds are equal iff they name the same coset.
    """

    peripheral: int
    rep: GroupElement

    def __repr__(self) -> str:
        return f"CosetId({self.peripheral}, {self.rep.syllables!r})"


@dataclass(frozen=True)
class GroupSpec:
    """A free product of cyclic factors with peripheral bookkeeping.

    factors: ordered (symbol, order) pairs, order None meaning infinite.
    peripheral_indices: factor indices forming the peripheral collection.
    gen_set_x: the relative generating set X (not implicitly symmetrized).
    peripheral_letters: per peripheral index, the letters X_i of that factor.
    """

    factors: tuple[tuple[str, int | None], ...]
    peripheral_indices: tuple[int, ...] = ()
    gen_set_x: tuple[GroupElement, ...] = ()
    peripheral_letters: tuple[tuple[int, tuple[GroupElement, ...]], ...] = ()

    _symbol_index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        seen: dict[str, int] = {}
        for i, (symbol, order) in enumerate(self.factors):
            if symbol in seen:
                raise SpecificationError(f"duplicate factor symbol {symbol!r}")
            if order is not None and order < 2:
                raise SpecificationError(f"factor {symbol!r} has order {order} < 2")
            seen[symbol] = i
        self._symbol_index.update(seen)
        for i in self.peripheral_indices:
            if not 0 <= i < len(self.factors):
                raise SpecificationError(f"peripheral index {i} out of range")
        letters = dict(self.peripheral_letters)
        for i, elems in letters.items():
            if i not in self.peripheral_indices:
                raise SpecificationError(f"letters given for non-peripheral factor {i}")
            for x in elems:
                if x.is_identity() or any(f != i for f, _ in x.syllables):
                    raise SpecificationError(
                        f"peripheral letter {self.format(x)!r} not a nontrivial "
                        f"element of factor {i}"
                    )

    # -- element construction ------------------------------------------------

    def identity(self) -> GroupElement:
        return IDENTITY

    def generator(self, index: int, exponent: int = 1) -> GroupElement:
        if not 0 <= index < len(self.factors):
            raise SpecificationError(f"no factor {index}")
        e = self._reduce_exponent(index, exponent)
        if e == 0:
            return IDENTITY
        return GroupElement(((index, e),))

    def factor_index(self, symbol: str) -> int:
        try:
            return self._symbol_index[symbol]
        except KeyError:
            raise SpecificationError(f"unknown factor symbol {symbol!r}") from None

    def parse(self, word: str) -> GroupElement:
        """Parse words like 'a b^-2 a^3'; the empty string is the identity."""
        out = IDENTITY
        for chunk in word.split():
            m = _WORD_TOKEN.fullmatch(chunk)
            if not m:
                raise SpecificationError(f"bad word chunk {chunk!r}")
            sym, exp = m.group(1), int(m.group(2) or 1)
            out = self.multiply(out, self.generator(self.factor_index(sym), exp))
        return out

    def format(self, g: GroupElement) -> str:
        if g.is_identity():
            return "1"
        parts = []
        for i, e in g.syllables:
            sym = self.factors[i][0]
            parts.append(sym if e == 1 else f"{sym}^{e}")
        return " ".join(parts)

    # -- arithmetic ------------------------------------------------------------

    def _reduce_exponent(self, index: int, exponent: int) -> int:
        order = self.factors[index][1]
        if order is None:
            return exponent
        return exponent % order

    def check(self, g: GroupElement) -> GroupElement:
        """Validate that g is a normal form under this spec."""
        prev = -1
        for i, e in g.syllables:
            if not 0 <= i < len(self.factors):
                raise SpecificationError(f"element uses unknown factor {i}")
            if i == prev:
                raise SpecificationError("adjacent syllables share a factor")
            if e == 0 or self._reduce_exponent(i, e) != e:
                raise SpecificationError(f"syllable exponent {e} not reduced")
            prev = i
        return g

    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement:
        """Reduced normal form of a·b."""
        word = list(a.syllables)
        for syl in b.syllables:
            i, e = syl
            if word and word[-1][0] == i:
                merged = self._reduce_exponent(i, word[-1][1] + e)
                word.pop()
                if merged != 0:
                    word.append((i, merged))
            else:
                e = self._reduce_exponent(i, e)
                if e != 0:
                    word.append((i, e))
        return GroupElement(tuple(word))

    def inverse(self, g: GroupElement) -> GroupElement:
        return GroupElement(
            tuple((i, self._reduce_exponent(i, -e)) for i, e in reversed(g.syllables))
        )

    def power(self, g: GroupElement, n: int) -> GroupElement:
        if n < 0:
            return self.power(self.inverse(g), -n)
        out = IDENTITY
        for _ in range(n):
            out = self.multiply(out, g)
        return out

    def conjugate(self, g: GroupElement, by: GroupElement) -> GroupElement:
        """by · g · by^-1."""
        return self.multiply(self.multiply(by, g), self.inverse(by))

    # -- peripheral cosets ------------------------------------------------------

    def coset_rep(self, g: GroupElement, peripheral: int) -> CosetId:
        """Canonical id of the left coset g·P_i; constant on P_i-orbits."""
        if peripheral not in self.peripheral_indices:
            raise SpecificationError(f"factor {peripheral} is not peripheral")
        syls = g.syllables
        if syls and syls[-1][0] == peripheral:
            syls = syls[:-1]
        return CosetId(peripheral, GroupElement(syls))

    def in_peripheral(self, g: GroupElement, peripheral: int) -> bool:
        return self.coset_rep(g, peripheral).rep.is_identity()

    def peripheral_letter_set(self, peripheral: int) -> tuple[GroupElement, ...]:
        for i, elems in self.peripheral_letters:
            if i == peripheral:
                return elems
        return ()

    # -- generating sets ----------------------------------------------------------

    def symmetrize(self, gens) -> tuple[GroupElement, ...]:
        """Close a generating set under inverses, drop identities, dedupe."""
        out = []
        for g in gens:
            for h in (g, self.inverse(g)):
                if not h.is_identity() and h not in out:
                    out.append(h)
        return tuple(out)

    def full_alphabet(self) -> tuple[GroupElement, ...]:
        """The alphabet 𝒳 = X ∪ ⋃X_i, symmetrized."""
        letters = list(self.gen_set_x)
        for _, elems in self.peripheral_letters:
            letters.extend(elems)
        return self.symmetrize(letters)


def enumerate_ball(spec: GroupSpec, gens, radius: int) -> dict[GroupElement, int]:
    """All elements of word length <= radius over gens ∪ gens^-1.

    Returns element -> word length; the identity is present at length 0.
    """
    if radius < 0:
        raise SpecificationError("radius must be >= 0")
    alphabet = spec.symmetrize(gens)
    if not alphabet and radius > 0:
        alphabet = ()
    dist: dict[GroupElement, int] = {IDENTITY: 0}
    frontier = [IDENTITY]
    for depth in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for x in alphabet:
                h = spec.multiply(g, x)
                if h not in dist:
                    dist[h] = depth
                    nxt.append(h)
        frontier = nxt
    return dist


def free_group(*symbols: str) -> GroupSpec:
    """Convenience: the free group on the given symbols, no peripherals."""
    return GroupSpec(factors=tuple((s, None) for s in symbols))
