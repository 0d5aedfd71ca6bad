"""Exact multivariate polynomials over the rationals in the base coordinates x^1..x^n.

These are the coefficient functions carried by every tensor (anchor, structure
functions, metrics, connections, potentials).  Only polynomials are supported:
residuals must be provably zero, so there is no floating point and no
transcendental function anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping


class BaseCoeff:
    """A polynomial in x^1..x^n with Fraction coefficients, in canonical form.

    ``terms`` maps exponent tuples (length n) to nonzero Fractions.  The empty
    map is the zero polynomial.  Instances are immutable by convention and
    hashable.
    """

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Mapping[tuple, Fraction | int] | None = None):
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != n:
                    raise ValueError(f"exponent vector {exps} has length {len(exps)}, expected {n}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                c = Fraction(c)
                if c:
                    clean[exps] = clean.get(exps, Fraction(0)) + c
                    if not clean[exps]:
                        del clean[exps]
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("BaseCoeff is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(n: int) -> "BaseCoeff":
        return BaseCoeff(n)

    @staticmethod
    def const(n: int, c) -> "BaseCoeff":
        return BaseCoeff(n, {(0,) * n: Fraction(c)})

    @staticmethod
    def one(n: int) -> "BaseCoeff":
        return BaseCoeff.const(n, 1)

    @staticmethod
    def var(n: int, i: int) -> "BaseCoeff":
        """x^{i+1} as a polynomial; i is 0-based."""
        if not 0 <= i < n:
            raise ValueError(f"variable index {i} out of range for n={n}")
        exps = [0] * n
        exps[i] = 1
        return BaseCoeff(n, {tuple(exps): Fraction(1)})

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, BaseCoeff):
            if other.n != self.n:
                raise ValueError(f"mixing base dimensions {self.n} and {other.n}")
            return other
        if isinstance(other, (int, Fraction)):
            return BaseCoeff.const(self.n, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            terms[exps] = terms.get(exps, Fraction(0)) + c
        return BaseCoeff(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return BaseCoeff(self.n, {e: -c for e, c in self.terms.items()})

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
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return BaseCoeff(self.n, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = BaseCoeff.one(self.n)
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c) -> "BaseCoeff":
        c = Fraction(c)
        return BaseCoeff(self.n, {e: v * c for e, v in self.terms.items()})

    def diff(self, i: int) -> "BaseCoeff":
        """Partial derivative with respect to x^{i+1} (i is 0-based)."""
        terms = {}
        for exps, c in self.terms.items():
            if exps[i]:
                e = list(exps)
                e[i] -= 1
                terms[tuple(e)] = terms.get(tuple(e), Fraction(0)) + c * exps[i]
        return BaseCoeff(self.n, terms)

    def eval(self, point: Iterable) -> Fraction:
        """Evaluate at a rational point (length-n iterable)."""
        pt = [Fraction(v) for v in point]
        if len(pt) != self.n:
            raise ValueError("point has wrong length")
        total = Fraction(0)
        for exps, c in self.terms.items():
            v = c
            for x, e in zip(pt, exps):
                v *= x**e
            total += v
        return total

    # -- comparison / hashing ---------------------------------------------

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.n, frozenset(self.terms.items()))))
        return self._hash

    # -- printing ----------------------------------------------------------

    def sorted_terms(self):
        """Terms in graded-lex order: higher total degree first, then lex on exponents."""
        return sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), tuple(-e for e in kv[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            factors = []
            for i, e in enumerate(exps):
                if e == 1:
                    factors.append(f"x{i + 1}")
                elif e > 1:
                    factors.append(f"x{i + 1}^{e}")
            mono = "*".join(factors)
            if not mono:
                piece = str(c)
            elif c == 1:
                piece = mono
            elif c == -1:
                piece = "-" + mono
            else:
                piece = f"{c}*{mono}"
            parts.append(piece)
        out = parts[0]
        for piece in parts[1:]:
            out += " - " + piece[1:] if piece.startswith("-") else " + " + piece
        return out

    def __repr__(self):
        return f"BaseCoeff({self.n}, {self})"

    def __bool__(self):
        return bool(self.terms)
