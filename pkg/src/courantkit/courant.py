"""Courant algebroid data and its verification.

Local data: fiber metric k_{ab}, anchor rho^i_a and totally antisymmetric
structure functions f_{abc} with [e_a, e_b]_D = k^{cd} f_{dab} e_c.  The three
local identities characterizing a Courant algebroid are

  (1)  k^{ab} rho^i_a rho^j_b = 0
  (2)  rho^j_b d_j rho^i_a - rho^j_a d_j rho^i_b + k^{ef} rho^i_e f_{fab} = 0
  (3)  rho^j_d d_j f_{abc} - rho^j_a d_j f_{bcd} + rho^j_b d_j f_{cda}
       - rho^j_c d_j f_{dab}
       + k^{ef} (f_{eab} f_{cdf} + f_{eac} f_{dbf} + f_{ead} f_{bcf}) = 0

and they hold iff the degree-3 charge Theta = eta^a rho^i_a p_i
- (1/3!) f_{abc} eta^a eta^b eta^c squares to zero under the graded Poisson
bracket.  The induced differential is {Theta, -} and the Dorfman bracket is
the derived bracket {{e1, Theta}, e2}.
"""

from __future__ import annotations

from fractions import Fraction

from .basecoeff import BaseCoeff
from .graded_algebra import GradedPoly
from .graded_poisson import PhaseSpace, poisson_bracket
from .report import CheckRecord, Report
from . import tensors


class CourantData:
    """k (r x r), rho (n x r, rho[i][a]), f (r x r x r totally antisymmetric)."""

    def __init__(self, n: int, r: int, k, rho, f):
        self.n = n
        self.r = r
        if tensors.shape_of(k) != (r, r):
            raise ValueError("k has wrong shape")
        if tensors.shape_of(rho) != (n, r):
            raise ValueError(f"rho has shape {tensors.shape_of(rho)}, expected {(n, r)}")
        if tensors.shape_of(f) != (r, r, r):
            raise ValueError("f has wrong shape")
        if not tensors.is_symmetric(k):
            raise ValueError("k must be symmetric")
        tensors.check_total_antisymmetry(f, "f")
        self.k = k
        self.k_inv = tensors.invert_const_matrix(k)
        self.rho = rho
        self.f = f

    def phase_space(self, twist=None) -> PhaseSpace:
        return PhaseSpace(self.n, self.r, self.k, twist=twist)

    def pairing(self, e1, e2) -> BaseCoeff:
        """<e1, e2> = k_ab e1^a e2^b for component vectors of length r."""
        s = BaseCoeff.zero(self.n)
        for a in range(self.r):
            for b in range(self.r):
                s = s + self.k[a][b] * e1[a] * e2[b]
        return s

    def anchor_apply(self, e, fn: BaseCoeff) -> BaseCoeff:
        """rho(e) fn = e^a rho^i_a d_i fn."""
        s = BaseCoeff.zero(self.n)
        for a in range(self.r):
            for i in range(self.n):
                s = s + e[a] * self.rho[i][a] * fn.diff(i)
        return s

    def anchor_vector(self, e) -> list:
        """Components of the vector field rho(e)."""
        return [sum((e[a] * self.rho[i][a] for a in range(self.r)),
                    BaseCoeff.zero(self.n)) for i in range(self.n)]

    def d_operator(self, fn: BaseCoeff) -> list:
        """D fn with <D fn, e> = rho(e) fn, i.e. (D fn)^a = k^{ab} rho^i_b d_i fn.

        Normalized so that [e, e]_D = (1/2) D <e, e> holds exactly for the
        derived Dorfman bracket (the factor of 2 sits in that identity, not
        in D; fixed empirically on the standard model).
        """
        out = []
        for a in range(self.r):
            s = BaseCoeff.zero(self.n)
            for b in range(self.r):
                for i in range(self.n):
                    s = s + self.k_inv[a][b] * self.rho[i][b] * fn.diff(i)
            out.append(s)
        return out


def verify_courant_axioms(cd: CourantData) -> Report:
    n, r = cd.n, cd.r
    res1 = tensors.zeros(n, n, n)
    for i in range(n):
        for j in range(n):
            s = BaseCoeff.zero(n)
            for a in range(r):
                for b in range(r):
                    s = s + cd.k_inv[a][b] * cd.rho[i][a] * cd.rho[j][b]
            res1[i][j] = s

    res2 = tensors.zeros(n, n, r, r)
    for i in range(n):
        for a in range(r):
            for b in range(r):
                s = BaseCoeff.zero(n)
                for j in range(n):
                    s = s + cd.rho[j][b] * cd.rho[i][a].diff(j) - cd.rho[j][a] * cd.rho[i][b].diff(j)
                for e in range(r):
                    for ff in range(r):
                        s = s + cd.k_inv[e][ff] * cd.rho[i][e] * cd.f[ff][a][b]
                res2[i][a][b] = s

    res3 = tensors.zeros(n, r, r, r, r)
    for a in range(r):
        for b in range(r):
            for c in range(r):
                for d in range(r):
                    s = BaseCoeff.zero(n)
                    for j in range(n):
                        s = (s + cd.rho[j][d] * cd.f[a][b][c].diff(j)
                             - cd.rho[j][a] * cd.f[b][c][d].diff(j)
                             + cd.rho[j][b] * cd.f[c][d][a].diff(j)
                             - cd.rho[j][c] * cd.f[d][a][b].diff(j))
                    for e in range(r):
                        for ff in range(r):
                            s = s + cd.k_inv[e][ff] * (cd.f[e][a][b] * cd.f[c][d][ff]
                                                       + cd.f[e][a][c] * cd.f[d][b][ff]
                                                       + cd.f[e][a][d] * cd.f[b][c][ff])
                    res3[a][b][c][d] = s

    rep = Report(title="courant-axioms")
    rep.add(CheckRecord.from_residuals(
        "courant.anchor-isotropy", "k^{ab} rho^i_a rho^j_b = 0", {"res1": res1}))
    rep.add(CheckRecord.from_residuals(
        "courant.anchor-bracket", "anchor homomorphism identity", {"res2": res2}))
    rep.add(CheckRecord.from_residuals(
        "courant.structure-jacobi", "four-term f identity", {"res3": res3}))
    return rep


def build_theta(cd: CourantData, ps: PhaseSpace | None = None) -> GradedPoly:
    ps = ps or cd.phase_space()
    reg = ps.reg
    theta = GradedPoly.zero(reg)
    for a in range(cd.r):
        for i in range(cd.n):
            if cd.rho[i][a].is_zero():
                continue
            theta = theta + ps.coeff(cd.rho[i][a]) * ps.eta(a) * ps.p(i)
    sixth = Fraction(1, 6)
    for a in range(cd.r):
        for b in range(cd.r):
            for c in range(cd.r):
                fa = cd.f[a][b][c]
                if fa.is_zero():
                    continue
                theta = theta - ps.coeff(fa.scale(sixth)) * ps.eta(a) * ps.eta(b) * ps.eta(c)
    return theta


def theta_square(cd: CourantData, ps: PhaseSpace | None = None) -> GradedPoly:
    ps = ps or cd.phase_space()
    theta = build_theta(cd, ps)
    return poisson_bracket(ps, theta, theta)


def e_differential(cd: CourantData, f: GradedPoly, ps: PhaseSpace | None = None,
                   theta: GradedPoly | None = None) -> GradedPoly:
    """{Theta, f}: the induced differential on functions of (x, eta, p)."""
    if ps is None:
        ps = cd.phase_space()
    if theta is None:
        theta = build_theta(cd, ps)
    return poisson_bracket(ps, theta, f)


def section_function(cd: CourantData, e, ps: PhaseSpace) -> GradedPoly:
    """The degree-1 function k_ab e^a eta^b representing a section of E."""
    out = GradedPoly.zero(ps.reg)
    for b in range(cd.r):
        c = sum((cd.k[a][b] * e[a] for a in range(cd.r)), BaseCoeff.zero(cd.n))
        if not c.is_zero():
            out = out + ps.coeff(c) * ps.eta(b)
    return out


def section_components(cd: CourantData, fn: GradedPoly) -> list:
    """Inverse of section_function for an eta-linear degree-1 function."""
    comps = []
    for a in range(cd.r):
        s = BaseCoeff.zero(cd.n)
        for b in range(cd.r):
            s = s + cd.k_inv[a][b] * fn.coefficient((("eta", b),))
        comps.append(s)
    # confirm fn is exactly eta-linear
    rebuilt = section_function(cd, comps, PhaseSpaceView(fn.reg, cd))
    if rebuilt != fn:
        raise ValueError("function is not a pure section (not eta-linear)")
    return comps


class PhaseSpaceView:
    """Adapter letting section_function run over an existing registry."""

    def __init__(self, reg, cd):
        self.reg = reg
        self.n = cd.n

    def coeff(self, c):
        return GradedPoly.from_coeff(self.reg, c)

    def eta(self, a):
        return GradedPoly.gen(self.reg, "eta", a)


def dorfman_bracket(cd: CourantData, e1, e2, ps: PhaseSpace | None = None,
                    theta: GradedPoly | None = None) -> list:
    """[e1, e2]_D = {{e1, Theta}, e2} as a component vector."""
    if ps is None:
        ps = cd.phase_space()
    if theta is None:
        theta = build_theta(cd, ps)
    f1 = section_function(cd, e1, ps)
    f2 = section_function(cd, e2, ps)
    inner = poisson_bracket(ps, poisson_bracket(ps, f1, theta), f2)
    return section_components(cd, inner)


def standard_courant(n: int, h) -> CourantData:
    """TM + T*M with h-flux: r = 2n, eta^a = (eta^i, xi_i), k off-diagonal identity.

    h is an n x n x n totally antisymmetric BaseCoeff tensor; it feeds the
    all-upper structure functions f_{ijk} = h_{ijk}.
    """
    tensors.check_total_antisymmetry(h, "h")
    r = 2 * n
    zero = BaseCoeff.zero(n)
    one = BaseCoeff.one(n)
    k = [[zero] * r for _ in range(r)]
    for i in range(n):
        k[i][n + i] = one
        k[n + i][i] = one
    rho = [[zero] * r for _ in range(n)]
    for i in range(n):
        rho[i][i] = one
    f = tensors.zeros(n, r, r, r)
    for i in range(n):
        for j in range(n):
            for l in range(n):
                f[i][j][l] = h[i][j][l]
    return CourantData(n, r, k, rho, f)


def action_algebroid(C, inner, rho) -> CourantData:
    """Action Lie algebroid data from structure constants C^c_{ab}, an
    ad-invariant inner product and an anchor realizing the action.

    C is r x r x r constant (C[c][a][b]); inner is the constant fiber metric.
    Validates the Lie Jacobi identity, ad-invariance, nondegeneracy and the
    anchor homomorphism [rho_a, rho_b] = C^c_{ab} rho_c.  Note the resulting
    data is a genuine Courant algebroid only when the anchor isotropy
    k^{ab} rho_a rho_b = 0 also holds (e.g. rho = 0); the constructor does not
    require that, matching the use of action algebroids as constraint data.
    """
    r = len(inner)
    n = len(rho)
    n_base = inner[0][0].n
    if tensors.shape_of(C) != (r, r, r):
        raise ValueError("C has wrong shape")
    for t in (C, inner):
        if not tensors.tensor_is_constant(t):
            raise ValueError("structure constants and inner product must be constant")
    # Lie Jacobi: C^e_{ab} C^d_{ec} + C^e_{bc} C^d_{ea} + C^e_{ca} C^d_{eb} = 0
    for a in range(r):
        for b in range(r):
            for c in range(r):
                for d in range(r):
                    s = BaseCoeff.zero(n_base)
                    for e in range(r):
                        s = (s + C[e][a][b] * C[d][e][c]
                             + C[e][b][c] * C[d][e][a]
                             + C[e][c][a] * C[d][e][b])
                    if not s.is_zero():
                        raise ValueError("structure constants fail the Jacobi identity")
    # f_{abc} = k_{cd} C^d_{ab}; ad-invariance <=> total antisymmetry of f
    f = tensors.zeros(n_base, r, r, r)
    for a in range(r):
        for b in range(r):
            for c in range(r):
                s = BaseCoeff.zero(n_base)
                for d in range(r):
                    s = s + inner[c][d] * C[d][a][b]
                f[a][b][c] = s
    try:
        tensors.check_total_antisymmetry(f, "f = kC")
    except ValueError as exc:
        raise ValueError(f"inner product is not ad-invariant: {exc}") from exc
    cd = CourantData(n, r, inner, rho, f)   # also validates invertibility of inner
    # anchor homomorphism = residual (2) of the axiom set
    rep = verify_courant_axioms(cd)
    if not rep.record("courant.anchor-bracket").passed:
        raise ValueError("anchor does not realize the Lie algebra action")
    return cd
