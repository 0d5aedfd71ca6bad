"""Constrained Hamiltonian mechanics: constraints G_a = rho^i_a p_i + alpha_a,
Hamiltonian H = (1/2) g^{ij} p_i p_j + beta^i p_i + V, and the change of
variables p' = p + A (A = g beta) that exposes the momentum section.

In the p' chart the data become G_a = rho^i_a p'_i + mu_a with
mu = alpha - rho(A), H = (1/2) g p'p' + V' with V' = V - (1/2) g A A, and the
bracket acquires the twist {p'_i, p'_j} = +B_{ij}, B = dA.

Residuals (our bracket convention, {x^i, p_j} = -delta^i_j):

  first_class[a][b] = {G_a, G_b} - k^{cd} f_{cab} G_d
  symmetry[a]       = {H, G_a} - g^{ij} Gamma^b_{aj} p'_i G_b

The plain p'-order parts of symmetry[a] carry fixed normalizations relative
to the geometric objects:

  order 2 coefficient tensor = -(1/2) (E-D_a g)^{jl}
  order 1 coefficient_k      = g^{ik} (D_i mu_a - gamma_{ia})
  order 0                    = -rho^i_a d_i V'

and the momentum-free part of first_class[a][b] is exactly the (H3) residual.
The normalized tensors are exposed on SymmetryResult for representation-equal
cross-checks against the geometry and momentum modules.
"""

from __future__ import annotations

from fractions import Fraction

from .basecoeff import BaseCoeff
from .courant import CourantData
from .geometry import ConnectionData, MetricData, PresymplecticData
from .graded_algebra import GradedPoly
from .graded_poisson import PhaseSpace, poisson_bracket
from .report import CheckRecord, Report
from . import momentum as momentum_mod
from . import tensors
from .geometry import e_connection_on_metric


class MechanicsData:
    """g: MetricData (g_upper is the kinetic tensor), alpha_a, beta^i, V."""

    def __init__(self, g: MetricData, alpha, beta=None, V=None):
        self.g = g
        self.n = g.n
        self.alpha = alpha
        self.r = len(alpha)
        n = self.n
        self.beta = beta
        self.V = V if V is not None else BaseCoeff.zero(n)
        if beta is not None and tensors.shape_of(beta) != (n,):
            raise ValueError("beta has wrong shape")


class AbsorbedData:
    """Result of the p -> p' = p + A change of variables."""

    def __init__(self, A, V_prime, mu, presymp: PresymplecticData):
        self.A = A
        self.V_prime = V_prime
        self.mu = mu
        self.presymp = presymp
        self.B = presymp.B


def absorb_beta(cd: CourantData, mech: MechanicsData) -> AbsorbedData:
    n, r = cd.n, cd.r
    if len(mech.alpha) != r:
        raise ValueError("alpha has wrong rank")
    if mech.beta is None or tensors.tensor_is_zero(mech.beta):
        A = [BaseCoeff.zero(n)] * n
        return AbsorbedData(A, mech.V, list(mech.alpha), PresymplecticData.zero(n))
    gl = mech.g.require_lower()
    A = [sum((gl[i][j] * mech.beta[j] for j in range(n)), BaseCoeff.zero(n))
         for i in range(n)]
    gu = mech.g.g_upper
    gaa = BaseCoeff.zero(n)
    for i in range(n):
        for j in range(n):
            gaa = gaa + gu[i][j] * A[i] * A[j]
    V_prime = mech.V - gaa.scale(Fraction(1, 2))
    mu = []
    for a in range(r):
        m = mech.alpha[a]
        for i in range(n):
            m = m - cd.rho[i][a] * A[i]
        mu.append(m)
    return AbsorbedData(A, V_prime, mu, PresymplecticData(n, A))


def tau_identity_residual(conn: ConnectionData, mech: MechanicsData,
                          absorbed: AbsorbedData):
    """tau^b_a = iota_beta Gamma vs g(Gamma, A): zero by construction when
    beta and A are exact g-duals; reported as a consistency record."""
    n, r = conn.n, conn.r
    beta = mech.beta if mech.beta is not None else [BaseCoeff.zero(n)] * n
    gu = mech.g.g_upper
    res = tensors.zeros(n, r, r)
    for b in range(r):
        for a in range(r):
            v1 = BaseCoeff.zero(n)
            v2 = BaseCoeff.zero(n)
            for i in range(n):
                v1 = v1 + beta[i] * conn.gamma[b][a][i]
                for j in range(n):
                    v2 = v2 + gu[i][j] * conn.gamma[b][a][i] * absorbed.A[j]
            res[b][a] = v1 - v2
    return res


def _phase_space(cd: CourantData, absorbed: AbsorbedData) -> PhaseSpace:
    twist = absorbed.B if not tensors.tensor_is_zero(absorbed.B) else None
    return cd.phase_space(twist=twist)


def constraints(cd: CourantData, absorbed: AbsorbedData, ps: PhaseSpace):
    out = []
    for a in range(cd.r):
        g = GradedPoly.zero(ps.reg)
        for i in range(cd.n):
            if not cd.rho[i][a].is_zero():
                g = g + ps.coeff(cd.rho[i][a]) * ps.p(i)
        if not absorbed.mu[a].is_zero():
            g = g + ps.coeff(absorbed.mu[a])
        out.append(g)
    return out


def hamiltonian(mech: MechanicsData, absorbed: AbsorbedData, ps: PhaseSpace):
    h = GradedPoly.zero(ps.reg)
    gu = mech.g.g_upper
    for i in range(ps.n):
        for j in range(ps.n):
            if not gu[i][j].is_zero():
                h = h + (ps.coeff(gu[i][j]) * ps.p(i) * ps.p(j)).scale(Fraction(1, 2))
    if not absorbed.V_prime.is_zero():
        h = h + ps.coeff(absorbed.V_prime)
    return h


class BracketResidual:
    """A (nested list of) GradedPoly residual(s) with its split by p'-order."""

    def __init__(self, residual):
        self.residual = residual
        self.by_p_order = tensors.tmap(
            lambda f: f.eta_count_parts("p"), residual) \
            if isinstance(residual, list) else residual.eta_count_parts("p")

    def is_zero(self) -> bool:
        if isinstance(self.residual, list):
            return all(f.is_zero() for f in _flatten(self.residual))
        return self.residual.is_zero()


def _flatten(t):
    if isinstance(t, list):
        for u in t:
            yield from _flatten(u)
    else:
        yield t


def first_class_residual(cd: CourantData, mech: MechanicsData,
                         absorbed: AbsorbedData | None = None) -> BracketResidual:
    if absorbed is None:
        absorbed = absorb_beta(cd, mech)
    ps = _phase_space(cd, absorbed)
    G = constraints(cd, absorbed, ps)
    r = cd.r
    res = [[None] * r for _ in range(r)]
    for a in range(r):
        for b in range(r):
            v = poisson_bracket(ps, G[a], G[b])
            for c in range(r):
                for d in range(r):
                    co = cd.k_inv[c][d] * cd.f[c][a][b]
                    if not co.is_zero():
                        v = v - ps.coeff(co) * G[d]
            res[a][b] = v
    out = BracketResidual(res)
    out.ps = ps
    out.G = G
    return out


def realized_jacobi_residual(cd: CourantData, mech: MechanicsData,
                             absorbed: AbsorbedData | None = None):
    """jacobiator(G_a, G_b, G_c) for all triples; zero for closed twists."""
    if absorbed is None:
        absorbed = absorb_beta(cd, mech)
    ps = _phase_space(cd, absorbed)
    G = constraints(cd, absorbed, ps)
    r = cd.r

    def jac(a, b, c):
        # all constraints are even, so the Koszul sign in the Jacobi
        # identity is +1 and the mixed-degree jacobiator reduces to this
        return (poisson_bracket(ps, G[a], poisson_bracket(ps, G[b], G[c]))
                - poisson_bracket(ps, poisson_bracket(ps, G[a], G[b]), G[c])
                - poisson_bracket(ps, G[b], poisson_bracket(ps, G[a], G[c])))

    return [[[jac(a, b, c) for c in range(r)]
             for b in range(r)] for a in range(r)]


class SymmetryResult(BracketResidual):
    """symmetry_residual output plus the normalized geometric tensors."""


def symmetry_residual(cd: CourantData, conn: ConnectionData, mech: MechanicsData,
                      absorbed: AbsorbedData | None = None) -> SymmetryResult:
    if absorbed is None:
        absorbed = absorb_beta(cd, mech)
    ps = _phase_space(cd, absorbed)
    G = constraints(cd, absorbed, ps)
    H = hamiltonian(mech, absorbed, ps)
    n, r = cd.n, cd.r
    gu = mech.g.g_upper
    res = []
    for a in range(r):
        v = poisson_bracket(ps, H, G[a])
        for b in range(r):
            for i in range(n):
                for j in range(n):
                    co = gu[i][j] * conn.gamma[b][a][j]
                    if not co.is_zero():
                        v = v - ps.coeff(co) * ps.p(i) * G[b]
        res.append(v)
    out = SymmetryResult(res)
    out.ps = ps
    # normalized extractions (see module docstring for the scale factors)
    out.eDg = tensors.zeros(n, r, n, n)
    out.h2 = None
    out.edv = tensors.zeros(n, r)
    for a in range(r):
        for j in range(n):
            for l in range(n):
                c = res[a].coefficient((("p", j), ("p", l)))
                if j != l:
                    c = c.scale(Fraction(1, 2))
                out.eDg[a][j][l] = c.scale(-2)
        out.edv[a] = -res[a].coefficient(())
    if mech.g.g_lower is not None:
        gl = mech.g.g_lower
        out.h2 = tensors.zeros(n, n, r)
        for a in range(r):
            for i in range(n):
                s = BaseCoeff.zero(n)
                for k in range(n):
                    s = s + gl[i][k] * res[a].coefficient((("p", k),))
                out.h2[i][a] = s
    return out


def full_consistency(cd: CourantData, conn: ConnectionData,
                     mech: MechanicsData) -> Report:
    """Runs the change of variables and all residuals; cross-checks the
    p'-order parts against the geometry and momentum modules."""
    absorbed = absorb_beta(cd, mech)
    rep = Report(title="mechanics-consistency")

    fc = first_class_residual(cd, mech, absorbed)
    rep.add(CheckRecord.from_residuals(
        "mechanics.first-class", "{G_a,G_b} = k^{cd} f_{cab} G_d",
        {"res": fc.residual}))

    sym = symmetry_residual(cd, conn, mech, absorbed)
    rep.add(CheckRecord.from_residuals(
        "mechanics.symmetry", "{H,G_a} = g^{ij} Gamma^b_{aj} p'_i G_b",
        {"res": sym.residual}))

    h2 = momentum_mod.check_H2(cd, conn, absorbed.presymp, absorbed.mu)
    rep.add(h2.record("momentum.H2"))
    h3 = momentum_mod.check_H3(cd, conn, absorbed.presymp, absorbed.mu)
    rep.add(h3.record("momentum.H3"))

    # cross-module representation equalities
    edg_geo = e_connection_on_metric(cd, conn, mech.g)
    rep.add(CheckRecord.from_residuals(
        "mechanics.cross-eDg",
        "p'^2 part of the symmetry residual equals -(1/2) E-D g",
        {"res": tensors.tensor_sub(sym.eDg, edg_geo)}))
    if sym.h2 is not None:
        h2_res = h2.record("momentum.H2").data["res"]
        rep.add(CheckRecord.from_residuals(
            "mechanics.cross-H2",
            "p'^1 part of the symmetry residual equals g (D mu - gamma)",
            {"res": tensors.tensor_sub(sym.h2, h2_res)}))
    edv_direct = tensors.zeros(cd.n, cd.r)
    for a in range(cd.r):
        s = BaseCoeff.zero(cd.n)
        for i in range(cd.n):
            s = s + cd.rho[i][a] * absorbed.V_prime.diff(i)
        edv_direct[a] = s
    rep.add(CheckRecord.from_residuals(
        "mechanics.cross-EdV",
        "p'^0 part of the symmetry residual equals -Ed V'",
        {"res": tensors.tensor_sub(sym.edv, edv_direct)}))
    rep.add(CheckRecord.from_residuals(
        "mechanics.tau-identity", "tau = iota_beta Gamma = g(Gamma, A)",
        {"res": tau_identity_residual(conn, mech, absorbed)}))
    rep.add(CheckRecord.from_residuals(
        "mechanics.EdV", "Ed V' = 0 (invariant potential)", {"res": edv_direct}))
    rep.add(CheckRecord.from_residuals(
        "mechanics.EDg", "E-D g = 0 (compatible metric)", {"res": edg_geo}))
    return rep
