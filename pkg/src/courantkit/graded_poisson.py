"""The degree -2 graded Poisson bracket on T*[2]E[1].

Coordinates: base x^i (degree 0, living in BaseCoeff), conjugate momenta p_i
(degree 2) and odd fiber coordinates eta^a (degree 1).  The bracket is the
uniform bi-derivation

    {f, g} = sum_ab (d_R f / d z^a) w^{ab} (d_L g / d z^b)

with elementary table

    {p_j, x^i} = +delta^i_j      (equivalently {x^i, p_j} = -delta^i_j)
    {eta^a, eta^b} = +k^{ab}
    {p_i, p_j} = +B_{ij}         (twisted sector, optional)

Sign normalization.  The constraint algebra {G_a,G_b} = k^{cd} f_{cab} G_d,
the master-charge identity {Theta,Theta} = 0 <=> Courant axioms, and
Q x^i = +rho^i_a eta^a jointly force {x^i, p_j} = -delta^i_j; the frequently
displayed {x^i, p_j} = +delta^i_j is incompatible with those identities under
any uniform bi-derivation convention (flipping it would flip the constraint
algebra sign).  The twist sign then follows from the shift p' = p + A with
B = dA: {p'_i, p'_j} = {p_i, A_j} + {A_i, p_j} = +B_{ij} (the -B display is
the one of the opposite elementary convention).  All other signs follow by
Leibniz.  Graded antisymmetry reads {f,g} = -(-1)^{|f||g|} {g,f}.

The fiber metric k_{ab} must be constant: an x-dependent k would add bracket
terms the symplectic form does not account for, so the constructor rejects it.
"""

from __future__ import annotations

from .basecoeff import BaseCoeff
from .graded_algebra import GradedPoly, Registry
from . import tensors


class PhaseSpace:
    """Graded Darboux chart: dimensions, fiber metric, optional {p,p} twist.

    n: base dimension, r: fiber rank.  k is an r x r constant symmetric
    invertible BaseCoeff matrix; twist (if given) is an antisymmetric n x n
    BaseCoeff matrix B_{ij}, entering as {p_i, p_j} = +B_{ij}.  A non-closed
    twist is accepted (needed as a Jacobi negative control) but flagged.
    """

    def __init__(self, n: int, r: int, k, twist=None, extra_kinds=()):
        self.n = n
        self.r = r
        if tensors.shape_of(k) != (r, r):
            raise ValueError(f"k has shape {tensors.shape_of(k)}, expected {(r, r)}")
        if not tensors.is_symmetric(k):
            raise ValueError("fiber metric k must be symmetric")
        if not tensors.is_constant_matrix(k):
            raise ValueError("fiber metric k must be constant: d_i k_ab != 0 is unsupported "
                             "(the symplectic form would produce bracket terms beyond the table)")
        self.k = k
        self.k_inv = tensors.invert_const_matrix(k)
        if twist is not None:
            if tensors.shape_of(twist) != (n, n):
                raise ValueError("twist B must be an n x n matrix")
            if not tensors.is_antisymmetric(twist):
                raise ValueError("twist B must be antisymmetric")
        self.twist = twist
        self.twist_closed = twist is None or self._twist_closure_holds()
        reg = Registry(n)
        reg.register("eta", 1, r)
        reg.register("p", 2, n)
        for kind, degree, count in extra_kinds:
            reg.register(kind, degree, count)
        self.reg = reg

    def _twist_closure_holds(self) -> bool:
        B = self.twist
        for i in range(self.n):
            for j in range(self.n):
                for l in range(self.n):
                    if not (B[j][l].diff(i) + B[l][i].diff(j) + B[i][j].diff(l)).is_zero():
                        return False
        return True

    # convenience constructors for coordinate polynomials
    def x(self, i: int) -> GradedPoly:
        return GradedPoly.x(self.reg, i)

    def p(self, i: int) -> GradedPoly:
        return GradedPoly.gen(self.reg, "p", i)

    def eta(self, a: int) -> GradedPoly:
        return GradedPoly.gen(self.reg, "eta", a)

    def coeff(self, c: BaseCoeff) -> GradedPoly:
        return GradedPoly.from_coeff(self.reg, c)

    def scalar(self, c) -> GradedPoly:
        return GradedPoly.scalar(self.reg, c)


def poisson_bracket(ps: PhaseSpace, f: GradedPoly, g: GradedPoly) -> GradedPoly:
    """Bi-derivation extension of the elementary bracket table."""
    if f.reg is not ps.reg or g.reg is not ps.reg:
        raise ValueError("arguments not built over this phase space's registry")
    out = GradedPoly.zero(ps.reg)
    # (p, x) and (x, p) sector: w^{p_i x^j} = +delta, w^{x^j p_i} = -delta
    for i in range(ps.n):
        df = f.derive(("p", i), "right")
        if not df.is_zero():
            dg = g.partial_x(i)
            if not dg.is_zero():
                out = out + df * dg
        df = f.partial_x(i)
        if not df.is_zero():
            dg = g.derive(("p", i), "left")
            if not dg.is_zero():
                out = out - df * dg
    # (eta, eta) sector: w = +k^{ab}
    for a in range(ps.r):
        df = f.derive(("eta", a), "right")
        if df.is_zero():
            continue
        for b in range(ps.r):
            kab = ps.k_inv[a][b]
            if kab.is_zero():
                continue
            dg = g.derive(("eta", b), "left")
            if dg.is_zero():
                continue
            out = out + df * kab * dg
    # twisted (p, p) sector: w = +B_{ij}
    if ps.twist is not None:
        for i in range(ps.n):
            df = f.derive(("p", i), "right")
            if df.is_zero():
                continue
            for j in range(ps.n):
                Bij = ps.twist[i][j]
                if Bij.is_zero():
                    continue
                dg = g.derive(("p", j), "left")
                if dg.is_zero():
                    continue
                out = out + df * Bij * dg
    return out


class hamiltonian_derivation:
    """The derivation {charge, -} of a homogeneous charge; degree |charge| - 2."""

    def __init__(self, ps: PhaseSpace, charge: GradedPoly):
        d = charge.degree()
        if d is None:
            raise ValueError("charge must be homogeneous")
        self.ps = ps
        self.charge = charge
        self.degree = d - 2

    def __call__(self, f: GradedPoly) -> GradedPoly:
        return poisson_bracket(self.ps, self.charge, f)


def jacobiator(ps: PhaseSpace, f: GradedPoly, g: GradedPoly, h: GradedPoly) -> GradedPoly:
    """{f,{g,h}} - {{f,g},h} - (-1)^{|f||g|} {g,{f,h}}; zero for a Poisson bracket."""
    df, dg = f.degree(), g.degree()
    if df is None or dg is None or h.degree() is None:
        raise ValueError("jacobiator needs homogeneous inputs")
    pb = poisson_bracket
    out = pb(ps, f, pb(ps, g, h)) - pb(ps, pb(ps, f, g), h)
    tail = pb(ps, g, pb(ps, f, h))
    if (df * dg) % 2:
        out = out + tail
    else:
        out = out - tail
    return out
