"""Z-graded commutative polynomial superalgebras over Q[x^1..x^n].

Generators live in a registry mapping a kind name (p, eta, lam, ...) to an
integer degree and an index range.  Monomials keep their generator factors in
one global canonical order (kind registration order, then index); the Koszul
sign picked up while sorting is absorbed into the coefficient, so equality of
polynomials is equality of representations.  Odd-degree generators square to
zero; even generators commute and may repeat.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .basecoeff import BaseCoeff


class Registry:
    """Table of generator kinds: name -> (degree, count).

    Registration order fixes the canonical sort rank of each kind.  The base
    coordinates x^1..x^n are not generators; they live inside BaseCoeff.
    """

    def __init__(self, n: int):
        self.n = n
        self.kinds: dict[str, tuple[int, int]] = {}
        self._rank: dict[str, int] = {}

    def register(self, kind: str, degree: int, count: int) -> "Registry":
        if kind in self.kinds:
            raise ValueError(f"kind {kind!r} already registered")
        self.kinds[kind] = (degree, count)
        self._rank[kind] = len(self._rank)
        return self

    def degree(self, kind: str) -> int:
        return self.kinds[kind][0]

    def count(self, kind: str) -> int:
        return self.kinds[kind][1]

    def rank(self, kind: str) -> int:
        return self._rank[kind]

    def is_odd(self, kind: str) -> bool:
        return self.kinds[kind][0] % 2 == 1

    def gens(self, kind: str):
        """All (kind, idx) pairs of one kind, idx 0-based."""
        return [(kind, i) for i in range(self.count(kind))]

    def all_gens(self):
        return [g for kind in self.kinds for g in self.gens(kind)]

    def sort_key(self, gen):
        kind, idx = gen
        return (self._rank[kind], idx)

    def check(self, gen):
        kind, idx = gen
        if kind not in self.kinds:
            raise KeyError(f"unregistered generator kind {kind!r}")
        if not 0 <= idx < self.count(kind):
            raise IndexError(f"index {idx} out of range for kind {kind!r}")


def _sort_factors(reg: Registry, factors: Sequence[tuple]) -> tuple[tuple, int]:
    """Sort generator factors into canonical order, returning (tuple, koszul_sign).

    Returns sign 0 if an odd generator repeats.
    """
    fs = list(factors)
    sign = 1
    # insertion sort, counting graded transpositions
    for i in range(1, len(fs)):
        j = i
        while j > 0 and reg.sort_key(fs[j - 1]) > reg.sort_key(fs[j]):
            d1 = reg.degree(fs[j - 1][0])
            d2 = reg.degree(fs[j][0])
            if d1 * d2 % 2:
                sign = -sign
            fs[j - 1], fs[j] = fs[j], fs[j - 1]
            j -= 1
    for a, b in zip(fs, fs[1:]):
        if a == b and reg.is_odd(a[0]):
            return (), 0
    return tuple(fs), sign


class GradedPoly:
    """Canonical sum of monomials coeff(x) * g1...gk over a Registry."""

    __slots__ = ("reg", "monomials")

    def __init__(self, reg: Registry, monomials: Mapping[tuple, BaseCoeff] | None = None):
        self.reg = reg
        self.monomials = {}
        if monomials:
            for fs, c in monomials.items():
                if c.is_zero():
                    continue
                self.monomials[fs] = c

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(reg: Registry) -> "GradedPoly":
        return GradedPoly(reg)

    @staticmethod
    def from_coeff(reg: Registry, c: BaseCoeff) -> "GradedPoly":
        return GradedPoly(reg, {(): c})

    @staticmethod
    def scalar(reg: Registry, c) -> "GradedPoly":
        return GradedPoly.from_coeff(reg, BaseCoeff.const(reg.n, c))

    @staticmethod
    def gen(reg: Registry, kind: str, idx: int) -> "GradedPoly":
        reg.check((kind, idx))
        return GradedPoly(reg, {((kind, idx),): BaseCoeff.one(reg.n)})

    @staticmethod
    def x(reg: Registry, i: int) -> "GradedPoly":
        return GradedPoly.from_coeff(reg, BaseCoeff.var(reg.n, i))

    def _check_same(self, other: "GradedPoly"):
        if self.reg is not other.reg:
            raise ValueError("operands built over different generator registries")

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.monomials

    def degree(self):
        """Total degree if homogeneous, else None (mixed)."""
        degs = {sum(self.reg.degree(k) for k, _ in fs) for fs in self.monomials}
        if not degs:
            return 0
        if len(degs) > 1:
            return None
        return degs.pop()

    def eta_count_parts(self, kind: str = "eta") -> dict[int, "GradedPoly"]:
        """Split by the number of factors of one kind (ghost-count bookkeeping)."""
        parts: dict[int, dict] = {}
        for fs, c in self.monomials.items():
            k = sum(1 for kk, _ in fs if kk == kind)
            parts.setdefault(k, {})[fs] = c
        return {k: GradedPoly(self.reg, m) for k, m in sorted(parts.items())}

    def degree_parts(self) -> dict[int, "GradedPoly"]:
        """Split into homogeneous parts by total degree."""
        parts: dict[int, dict] = {}
        for fs, c in self.monomials.items():
            d = sum(self.reg.degree(k) for k, _ in fs)
            parts.setdefault(d, {})[fs] = c
        return {d: GradedPoly(self.reg, m) for d, m in sorted(parts.items())}

    def coefficient(self, factors: Sequence[tuple]) -> BaseCoeff:
        fs, sign = _sort_factors(self.reg, factors)
        if sign == 0:
            return BaseCoeff.zero(self.reg.n)
        c = self.monomials.get(fs, BaseCoeff.zero(self.reg.n))
        return c if sign == 1 else -c

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, GradedPoly):
            self._check_same(other)
            return other
        if isinstance(other, BaseCoeff):
            return GradedPoly.from_coeff(self.reg, other)
        if isinstance(other, (int, Fraction)):
            return GradedPoly.scalar(self.reg, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        mon = dict(self.monomials)
        for fs, c in other.monomials.items():
            s = mon.get(fs)
            mon[fs] = c if s is None else s + c
        return GradedPoly(self.reg, mon)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly(self.reg, {fs: -c for fs, c in self.monomials.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        mon: dict[tuple, BaseCoeff] = {}
        for fs1, c1 in self.monomials.items():
            for fs2, c2 in other.monomials.items():
                fs, sign = _sort_factors(self.reg, fs1 + fs2)
                if sign == 0:
                    continue
                c = c1 * c2
                if sign < 0:
                    c = -c
                s = mon.get(fs)
                mon[fs] = c if s is None else s + c
        return GradedPoly(self.reg, mon)

    __rmul__ = __mul__

    def scale(self, c) -> "GradedPoly":
        c = Fraction(c)
        if not c:
            return GradedPoly.zero(self.reg)
        return GradedPoly(self.reg, {fs: m.scale(c) for fs, m in self.monomials.items()})

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.monomials == other.monomials

    def __hash__(self):
        return hash(frozenset(self.monomials.items()))

    # -- calculus ----------------------------------------------------------

    def derive(self, gen: tuple, side: str = "left") -> "GradedPoly":
        """Graded derivative with respect to one generator, with Koszul signs."""
        self.reg.check(gen)
        d = self.reg.degree(gen[0])
        mon: dict[tuple, BaseCoeff] = {}
        for fs, c in self.monomials.items():
            for pos, g in enumerate(fs):
                if g != gen:
                    continue
                if side == "left":
                    others = fs[:pos]
                else:
                    others = fs[pos + 1:]
                sgn_exp = d * sum(self.reg.degree(k) for k, _ in others)
                rest = fs[:pos] + fs[pos + 1:]
                cc = c if sgn_exp % 2 == 0 else -c
                s = mon.get(rest)
                mon[rest] = cc if s is None else s + cc
        return GradedPoly(self.reg, mon)

    def partial_x(self, i: int) -> "GradedPoly":
        """Differentiate the BaseCoeff parts with respect to x^{i+1} (0-based i)."""
        return GradedPoly(self.reg, {fs: c.diff(i) for fs, c in self.monomials.items()})

    # -- printing ----------------------------------------------------------

    def sorted_monomials(self):
        return sorted(
            self.monomials.items(),
            key=lambda kv: (len(kv[0]), tuple(self.reg.sort_key(g) for g in kv[0])),
        )

    def __str__(self):
        if not self.monomials:
            return "0"
        parts = []
        for fs, c in self.sorted_monomials():
            gens = "*".join(f"{k}{i + 1}" for k, i in fs)
            cs = str(c)
            if not gens:
                piece = cs
            elif cs == "1":
                piece = gens
            elif cs == "-1":
                piece = "-" + gens
            elif len(c.terms) > 1:
                piece = f"({cs})*{gens}"
            else:
                piece = f"{cs}*{gens}"
            parts.append(piece)
        out = parts[0]
        for piece in parts[1:]:
            out += " - " + piece[1:] if piece.startswith("-") else " + " + piece
        return out

    def __repr__(self):
        return f"GradedPoly({self})"


class Derivation:
    """A graded derivation determined by its images on generators and on x.

    ``images`` maps (kind, idx) -> GradedPoly; missing generators map to zero.
    ``x_images`` is a length-n list of GradedPoly (or None) for the action on
    the base coordinates.  Applied by the graded Leibniz rule as a left
    derivation of the stated degree.
    """

    def __init__(self, reg: Registry, degree: int,
                 images: Mapping[tuple, GradedPoly] | None = None,
                 x_images: Sequence[GradedPoly | None] | None = None):
        self.reg = reg
        self.degree = degree
        self.images = dict(images or {})
        self.x_images = list(x_images) if x_images is not None else [None] * reg.n

    def __call__(self, f: GradedPoly) -> GradedPoly:
        reg = self.reg
        out = GradedPoly.zero(reg)
        for fs, c in f.monomials.items():
            # action on the coefficient through the base coordinates
            for i, xi in enumerate(self.x_images):
                if xi is None or xi.is_zero():
                    continue
                dc = c.diff(i)
                if dc.is_zero():
                    continue
                out = out + xi * GradedPoly(reg, {fs: dc})
            # action on each generator factor
            for pos, g in enumerate(fs):
                img = self.images.get(g)
                if img is None or img.is_zero():
                    continue
                before = fs[:pos]
                sgn_exp = self.degree * sum(reg.degree(k) for k, _ in before)
                piece = GradedPoly(reg, {before: c if sgn_exp % 2 == 0 else -c})
                piece = piece * img
                piece = piece * GradedPoly(reg, {fs[pos + 1:]: BaseCoeff.one(reg.n)})
                out = out + piece
        return out

    def compose_square(self, gens: Iterable[tuple] | None = None) -> dict:
        """Apply the derivation twice to each generator; returns images."""
        gens = list(gens) if gens is not None else self.reg.all_gens()
        return {g: self(self(GradedPoly.gen(self.reg, *g))) for g in gens}


# spec-facing operation names

def gp_mul(a: GradedPoly, b: GradedPoly) -> GradedPoly:
    return a * b


def gp_derive(f: GradedPoly, gen: tuple, side: str = "left") -> GradedPoly:
    return f.derive(gen, side)


def gp_partial_x(f: GradedPoly, i: int) -> GradedPoly:
    return f.partial_x(i)


def gp_degree(f: GradedPoly):
    return f.degree()
