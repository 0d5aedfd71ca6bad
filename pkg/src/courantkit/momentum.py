"""Momentum sections: the conditions (H1), (H2), (H3) and classification.

Conventions (component form):

  gamma_{ia} = -B_{ij} rho^j_a                       (the pairing form of B)
  (H2)  D_i mu_a - gamma_{ia} = 0                    (weakly Hamiltonian)
  (H3)  Ed mu(e_a, e_b) + rho^i_a B_{ij} rho^j_b = 0 (bracket compatible)
  (H1)  D_[i gamma_j]a = 0                           (presymplectically anchored)

Ed mu is not hand-coded: it is extracted from the charge as
{e_b^, {e_a^, {Theta, mu_a eta^a}}}, which eliminates sign drift between this
module and the constraint algebra; the (H3) residual is then exactly the
momentum-free part of {G_a, G_b} - k^{cd} f_{cab} G_d computed by the
mechanics module (with {p'_i, p'_j} = +B_{ij}).  The sign in front of the
rho-B-rho term follows from the same bracket convention.
"""

from __future__ import annotations

from .basecoeff import BaseCoeff
from .courant import CourantData, build_theta, section_function
from .geometry import ConnectionData, PresymplecticData, covariant_derivative
from .graded_algebra import GradedPoly
from .graded_poisson import poisson_bracket
from .report import CheckRecord, Report
from . import tensors


def gamma_from(cd: CourantData, presymp: PresymplecticData):
    """gamma[i][a] = -B_{ij} rho^j_a."""
    n, r = cd.n, cd.r
    out = tensors.zeros(n, n, r)
    for i in range(n):
        for a in range(r):
            s = BaseCoeff.zero(n)
            for j in range(n):
                s = s - presymp.B[i][j] * cd.rho[j][a]
            out[i][a] = s
    return out


def e_dmu_tensor(cd: CourantData, mu, ps=None, theta=None):
    """(Ed mu)(e_a, e_b) via double contraction of {Theta, mu_a eta^a};
    also returns the p-linear part of the bracket for the automatic identity."""
    if ps is None:
        ps = cd.phase_space()
    if theta is None:
        theta = build_theta(cd, ps)
    muhat = GradedPoly.zero(ps.reg)
    for a in range(cd.r):
        if not mu[a].is_zero():
            muhat = muhat + ps.coeff(mu[a]) * ps.eta(a)
    q = poisson_bracket(ps, theta, muhat)
    basis = [section_function(cd, [BaseCoeff.const(cd.n, int(c == a))
                                   for c in range(cd.r)], ps)
             for a in range(cd.r)]
    inner = [poisson_bracket(ps, basis[a], q) for a in range(cd.r)]
    out = tensors.zeros(cd.n, cd.r, cd.r)
    for a in range(cd.r):
        for b in range(cd.r):
            v = poisson_bracket(ps, basis[b], inner[a])
            out[a][b] = v.coefficient(())
    return out, q.eta_count_parts().get(0, GradedPoly.zero(ps.reg))


def check_H2(cd: CourantData, conn: ConnectionData, presymp: PresymplecticData,
             mu) -> Report:
    gamma = gamma_from(cd, presymp)
    res = tensors.zeros(cd.n, cd.n, cd.r)
    for i in range(cd.n):
        dmu = covariant_derivative(conn, mu, i, "down")
        for a in range(cd.r):
            res[i][a] = dmu[a] - gamma[i][a]
    rep = Report(title="momentum-H2")
    rep.add(CheckRecord.from_residuals(
        "momentum.H2", "D_i mu_a = gamma_ia (weakly Hamiltonian)", {"res": res}))
    return rep


def check_H3(cd: CourantData, conn: ConnectionData, presymp: PresymplecticData,
             mu) -> Report:
    ps = cd.phase_space()
    theta = build_theta(cd, ps)
    edmu, p_part = e_dmu_tensor(cd, mu, ps, theta)
    res = tensors.zeros(cd.n, cd.r, cd.r)
    for a in range(cd.r):
        for b in range(cd.r):
            v = edmu[a][b]
            for i in range(cd.n):
                for j in range(cd.n):
                    v = v + cd.rho[i][a] * presymp.B[i][j] * cd.rho[j][b]
            res[a][b] = v
    # p-linear part of {Theta, mu^}: always rho(mu*), reported for information
    expect = GradedPoly.zero(ps.reg)
    for i in range(cd.n):
        s = BaseCoeff.zero(cd.n)
        for a in range(cd.r):
            for b in range(cd.r):
                s = s + cd.rho[i][a] * cd.k_inv[a][b] * mu[b]
        if not s.is_zero():
            expect = expect + ps.coeff(s) * ps.p(i)
    rep = Report(title="momentum-H3")
    rec = CheckRecord.from_residuals(
        "momentum.H3", "Ed mu(e_a,e_b) + rho_a B rho_b = 0 (bracket compatible)",
        {"res": res})
    rec.data["edmu"] = edmu
    rep.add(rec)
    rep.add(CheckRecord.from_residuals(
        "momentum.H3-p-part", "p-linear part of {Theta, mu^} equals rho(mu*)",
        {"res": p_part - expect}))
    return rep


def check_H1(cd: CourantData, conn: ConnectionData,
             presymp: PresymplecticData) -> Report:
    """Covariant exterior derivative of gamma: antisymmetrized residual is the
    (H1) condition; the symmetric part is reported alongside for information."""
    gamma = gamma_from(cd, presymp)
    n, r = cd.n, cd.r
    dgam = tensors.zeros(n, n, n, r)
    for i in range(n):
        for j in range(n):
            row = covariant_derivative(conn, gamma[j], i, "down")
            for a in range(r):
                dgam[i][j][a] = row[a]
    anti = tensors.zeros(n, n, n, r)
    sym = tensors.zeros(n, n, n, r)
    for i in range(n):
        for j in range(n):
            for a in range(r):
                anti[i][j][a] = dgam[i][j][a] - dgam[j][i][a]
                sym[i][j][a] = dgam[i][j][a] + dgam[j][i][a]
    rep = Report(title="momentum-H1")
    rec = CheckRecord.from_residuals(
        "momentum.H1", "D_[i gamma_j]a = 0 (presymplectically anchored)",
        {"res": anti})
    rec.data["symmetric_part"] = sym
    rep.add(rec)
    return rep


def classify(cd: CourantData, conn: ConnectionData, presymp: PresymplecticData,
             mu):
    """-> (verdict in {"none", "weakly-Hamiltonian", "Hamiltonian"}, anchored)."""
    h2 = check_H2(cd, conn, presymp, mu).record("momentum.H2").passed
    h3 = check_H3(cd, conn, presymp, mu).record("momentum.H3").passed
    h1 = check_H1(cd, conn, presymp).record("momentum.H1").passed
    if h2 and h3:
        verdict = "Hamiltonian"
    elif h2:
        verdict = "weakly-Hamiltonian"
    else:
        verdict = "none"
    return verdict, h1
