"""BFV charge/Hamiltonian: covariant momentum, bracket table, residuals,
their ghost-degree localization, and the quartic-form equations."""

from fractions import Fraction
from itertools import combinations, permutations

import pytest

from courantkit import tensors
from courantkit.basecoeff import BaseCoeff
from courantkit.bfv import (BfvData, USolveResult, bfv_residuals, build_h_bfv,
                            build_s_bfv, build_s_bfv_covariant,
                            covariant_momentum, gamma_lower, h_first_order,
                            solve_u_linear, u_equations_residual)
from courantkit.courant import action_algebroid, build_theta, standard_courant
from courantkit.geometry import (ConnectionData, MetricData, PresymplecticData,
                                 basic_curvature, curvature)
from courantkit.graded_algebra import GradedPoly
from courantkit.graded_poisson import poisson_bracket
from courantkit.mechanics import constraints as mechanics_constraints
from courantkit.mechanics import AbsorbedData
from courantkit.momentum import check_H2, check_H3

from helpers import so2_angular_momentum, so3_quadratic, so3_rotations


def metric_conn(cd, entries):
    """Metric connection from a dict {(a,b,i): BaseCoeff} with a<b; k must be
    the identity so that the lowered symbol equals gamma itself."""
    assert tensors.tensor_eq(cd.k, tensors.identity_matrix(cd.n, cd.r))
    g = tensors.zeros(cd.n, cd.r, cd.r, cd.n)
    for (a, b, i), v in entries.items():
        g[a][b][i] = v
        g[b][a][i] = -v
    return ConnectionData(cd.n, cd.r, g)


def x_flux_courant(n=3):
    """Standard Courant algebroid with the closed x-dependent flux
    h = x^1 * (totally antisymmetric unit 3-tensor)."""
    h = tensors.zeros(n, n, n, n)
    for perm in permutations((0, 1, 2)):
        h[perm[0]][perm[1]][perm[2]] = BaseCoeff.var(n, 0).scale(
            Fraction(tensors.perm_sign_of_map((0, 1, 2), perm)))
    return standard_courant(n, h)


# ---------------------------------------------------------------------------
# covariant momentum and its bracket table

def test_covariant_momentum_flat_connection():
    cd = so3_rotations()
    ps = cd.phase_space()
    pn = covariant_momentum(cd, ConnectionData.zero(3, 3), ps)
    assert all(pn[i] == ps.p(i) for i in range(3))


def test_covariant_momentum_bracket_table():
    cd = so3_rotations()
    conn = metric_conn(cd, {(0, 1, 0): BaseCoeff.var(3, 2),
                            (1, 2, 1): BaseCoeff.const(3, 2)})
    ps = cd.phase_space()
    pn = covariant_momentum(cd, conn, ps)
    # {x^i, p^nabla_j} = -delta (global bracket convention: {x,p} = -delta)
    for i in range(3):
        for j in range(3):
            br = poisson_bracket(ps, ps.x(i), pn[j])
            assert br == ps.scalar(Fraction(-1 if i == j else 0))
    # {p^nabla_i, eta^a} = -Gamma^a_{bi} eta^b (sign fixed by the same
    # convention; the covariant charge identity below pins it)
    for i in range(3):
        for a in range(3):
            br = poisson_bracket(ps, pn[i], ps.eta(a))
            expect = GradedPoly.zero(ps.reg)
            for b in range(3):
                expect = expect - ps.coeff(conn.gamma[a][b][i]) * ps.eta(b)
            assert br == expect
    # {p^nabla_i, p^nabla_j} = -(1/2) R^b_{ija} k_{bc} eta^a eta^c
    R = curvature(conn)
    for i in range(3):
        for j in range(3):
            br = poisson_bracket(ps, pn[i], pn[j])
            expect = GradedPoly.zero(ps.reg)
            for a in range(3):
                for b in range(3):
                    for c in range(3):
                        co = R[b][i][j][a] * cd.k[b][c]
                        if not co.is_zero():
                            expect = expect + (ps.coeff(co) * ps.eta(a)
                                               * ps.eta(c)).scale(Fraction(-1, 2))
            assert br == expect


# ---------------------------------------------------------------------------
# the charge: flat vs covariant presentation

def test_charge_without_mu_is_theta():
    cd = so3_quadratic()
    ps = cd.phase_space()
    assert build_s_bfv(cd, ps) == build_theta(cd, ps)


def test_covariant_charge_reexpands_to_flat():
    cd = so3_rotations()
    conn = metric_conn(cd, {(0, 1, 0): BaseCoeff.var(3, 2),
                            (1, 2, 1): BaseCoeff.const(3, 2),
                            (0, 2, 2): BaseCoeff.var(3, 0)})
    ps = cd.phase_space()
    mu = [BaseCoeff.var(3, 0), BaseCoeff.zero(3), BaseCoeff.const(3, 2)]
    assert build_s_bfv(cd, ps) == build_s_bfv_covariant(cd, conn, ps)
    assert build_s_bfv(cd, ps, mu=mu) == build_s_bfv_covariant(cd, conn, ps, mu=mu)


# ---------------------------------------------------------------------------
# the Hamiltonian

def test_h_flat_trivial():
    cd = so3_rotations()
    g = MetricData.euclidean(3)
    ps = cd.phase_space()
    h = build_h_bfv(cd, ConnectionData.zero(3, 3), g, ps)
    expect = GradedPoly.zero(ps.reg)
    for i in range(3):
        expect = expect + (ps.p(i) * ps.p(i)).scale(Fraction(1, 2))
    assert h == expect


def test_h_first_order_term():
    cd = so3_rotations()
    conn = metric_conn(cd, {(0, 1, 0): BaseCoeff.var(3, 2)})
    g = MetricData.euclidean(3)
    ps = cd.phase_space()
    diff = build_h_bfv(cd, conn, g, ps) - build_h_bfv(
        cd, ConnectionData.zero(3, 3), g, ps)
    parts = diff.eta_count_parts()
    assert parts.get(2) == h_first_order(cd, conn, g, ps)
    assert set(parts) <= {2, 4}


def test_h_degree_four_and_bfv_data_invariants():
    cd = so3_rotations()
    conn = metric_conn(cd, {(0, 1, 0): BaseCoeff.var(3, 2)})
    g = MetricData.euclidean(3)
    ps = cd.phase_space()
    V = BaseCoeff.var(3, 0) ** 2
    h = build_h_bfv(cd, conn, g, ps, V_prime=V)
    parts = h.degree_parts()
    assert set(parts) == {0, 4} and parts[0] == ps.coeff(V)
    s = build_s_bfv(cd, ps, mu=[BaseCoeff.var(3, 0)] * 3)
    BfvData(S=s, H=h)                      # valid split
    with pytest.raises(ValueError, match="degree"):
        BfvData(S=s + ps.eta(0) * ps.eta(1), H=h)
    with pytest.raises(ValueError, match="degree"):
        BfvData(S=s, H=h + ps.p(0))


def test_h_rejects_nonantisymmetric_u():
    cd = so3_rotations()
    ps = cd.phase_space()
    U = tensors.zeros(3, 3, 3, 3, 3)
    U[0][0][1][2] = BaseCoeff.one(3)
    with pytest.raises(ValueError, match="antisym"):
        build_h_bfv(cd, ConnectionData.zero(3, 3), MetricData.euclidean(3),
                    ps, U=U)


# ---------------------------------------------------------------------------
# residuals on Cartan models

def test_cartan_models_all_residuals_zero():
    for cd in (so3_quadratic(), standard_courant(2, tensors.zeros(2, 2, 2, 2))):
        conn = ConnectionData.zero(cd.n, cd.r)
        g = MetricData.euclidean(cd.n)
        ps = cd.phase_space()
        S = build_s_bfv(cd, ps)
        H = build_h_bfv(cd, conn, g, ps)
        r1, r2, r3 = bfv_residuals(ps, S, H)
        assert r1.is_zero() and r2.is_zero() and r3.is_zero()


def test_r3_always_zero():
    cd = so3_rotations()
    ps = cd.phase_space()
    H = build_h_bfv(cd, ConnectionData.zero(3, 3), MetricData.euclidean(3), ps,
                    V_prime=BaseCoeff.var(3, 0))
    assert poisson_bracket(ps, H, H).is_zero()


# ---------------------------------------------------------------------------
# ghost-degree localization of the residuals

def test_r1_eta2_part_is_h3_residual():
    """Inhomogeneous charge with a constant (non-equivariant) mu: the 2-ghost
    part of {S,S} is the (H3) residual contracted with eta^a eta^b."""
    cd = so3_rotations()
    conn = ConnectionData.zero(3, 3)
    presymp = PresymplecticData.zero(3)
    mu = [BaseCoeff.const(3, 1), BaseCoeff.zero(3), BaseCoeff.zero(3)]
    ps = cd.phase_space()
    S = build_s_bfv(cd, ps, mu=mu)
    r1 = poisson_bracket(ps, S, S)
    h3 = check_H3(cd, conn, presymp, mu).record("momentum.H3").data["res"]
    part2 = r1.eta_count_parts().get(2, GradedPoly.zero(ps.reg))
    expect = GradedPoly.zero(ps.reg)
    for a in range(3):
        for b in range(3):
            if not h3[a][b].is_zero():
                expect = expect + ps.coeff(h3[a][b]) * ps.eta(a) * ps.eta(b)
    assert part2 == expect


def test_r1_eta0_part_is_weak_term():
    """The 0-ghost part of {S,S} is k^{ab} G_a G_b — the piece that vanishes
    only weakly (on the constraint surface); here with the twisted bracket."""
    cd, conn, presymp, mu = so2_angular_momentum()
    ps = cd.phase_space(twist=presymp.B)
    S = build_s_bfv(cd, ps, mu=mu)
    r1 = poisson_bracket(ps, S, S)
    absorbed = AbsorbedData([BaseCoeff.zero(2)] * 2, BaseCoeff.zero(2), mu,
                            presymp)
    G = mechanics_constraints(cd, absorbed, ps)
    expect = GradedPoly.zero(ps.reg)
    for a in range(cd.r):
        for b in range(cd.r):
            co = cd.k_inv[a][b]
            if not co.is_zero():
                expect = expect + ps.coeff(co) * G[a] * G[b]
    assert r1.eta_count_parts().get(0, GradedPoly.zero(ps.reg)) == expect


def test_r2_localizes_broken_h2():
    """Perturbed mu breaks (H2) only: {S,H} is nonzero exactly in its 1-ghost
    part, which equals -g^{ij}(D_j mu - gamma_j)_a eta^a p_i."""
    cd, conn, presymp, mu = so2_angular_momentum()
    bad_mu = [mu[0] + BaseCoeff.var(2, 0)]
    ps = cd.phase_space(twist=presymp.B)
    S = build_s_bfv(cd, ps, mu=bad_mu)
    g = MetricData.euclidean(2)
    H = build_h_bfv(cd, conn, g, ps)
    _, r2, _ = bfv_residuals(ps, S, H)
    parts = r2.eta_count_parts()
    assert set(k for k, v in parts.items() if not v.is_zero()) == {1}
    h2 = check_H2(cd, conn, presymp, bad_mu).record("momentum.H2").data["res"]
    expect = GradedPoly.zero(ps.reg)
    for i in range(2):
        for j in range(2):
            for a in range(1):
                co = g.g_upper[i][j] * h2[j][a]
                if not co.is_zero():
                    expect = expect - ps.coeff(co) * ps.eta(a) * ps.p(i)
    assert parts[1] == expect


def test_r2_localizes_broken_potential():
    """Non-invariant V': {S,H} picks up exactly the Ed V' term in the
    momentum-free 1-ghost sector."""
    cd, conn, presymp, mu = so2_angular_momentum()
    ps = cd.phase_space(twist=presymp.B)
    S = build_s_bfv(cd, ps, mu=mu)
    g = MetricData.euclidean(2)
    V = BaseCoeff.var(2, 0)
    _, r2, _ = bfv_residuals(ps, S, build_h_bfv(cd, conn, g, ps, V_prime=V))
    _, r2_zero, _ = bfv_residuals(ps, S, build_h_bfv(cd, conn, g, ps))
    diff = r2 - r2_zero
    edv = BaseCoeff.zero(2)
    for i in range(2):
        edv = edv + cd.rho[i][0] * V.diff(i)
    assert diff == ps.coeff(edv) * ps.eta(0)


def test_r2_localizes_broken_metric_compatibility():
    """x-dependent kinetic metric with a translation anchor: the 1-ghost
    p^2-part of {S,H} is +(1/2) (E-D g) contracted with eta p p (the opposite
    ordering convention to the mechanics symmetry residual)."""
    nb = 2
    C = tensors.zeros(nb, 1, 1, 1)
    rho = [[BaseCoeff.one(nb)], [BaseCoeff.zero(nb)]]
    cd = action_algebroid(C, tensors.identity_matrix(nb, 1), rho)
    gu = [[BaseCoeff.one(nb) + BaseCoeff.var(nb, 0), BaseCoeff.zero(nb)],
          [BaseCoeff.zero(nb), BaseCoeff.one(nb)]]
    g = MetricData(nb, gu)
    conn = ConnectionData.zero(nb, 1)
    ps = cd.phase_space()
    S = build_s_bfv(cd, ps)
    _, r2, _ = bfv_residuals(ps, S, build_h_bfv(cd, conn, g, ps))
    from courantkit.geometry import e_connection_on_metric
    edg = e_connection_on_metric(cd, conn, g)
    expect = GradedPoly.zero(ps.reg)
    for a in range(1):
        for j in range(nb):
            for l in range(nb):
                if not edg[a][j][l].is_zero():
                    expect = expect + (ps.coeff(edg[a][j][l]) * ps.eta(a)
                                       * ps.p(j) * ps.p(l)).scale(Fraction(1, 2))
    assert r2 == expect


# ---------------------------------------------------------------------------
# quartic-form equations and the exact solver

def test_u_equations_cartan_zero():
    cd = so3_quadratic()
    conn = ConnectionData.zero(cd.n, cd.r)
    g = MetricData.euclidean(cd.n)
    U = tensors.zeros(cd.n, cd.r, cd.r, cd.r, cd.r)
    res1, res2 = u_equations_residual(cd, conn, g, U)
    assert tensors.tensor_is_zero(res1) and tensors.tensor_is_zero(res2)
    sol = solve_u_linear(cd, conn, g)
    assert sol.feasible and tensors.tensor_is_zero(sol.U)


def test_solver_synthesized_instance():
    """x-dependent flux on the standard Courant algebroid: the basic curvature
    is nonzero, the solver finds a nonzero quartic form, and with it the full
    {S,H} residual vanishes exactly."""
    cd = x_flux_courant()
    conn = ConnectionData.zero(3, cd.r)
    g = MetricData.euclidean(3)
    assert not tensors.tensor_is_zero(basic_curvature(cd, conn))
    sol = solve_u_linear(cd, conn, g)
    assert sol.feasible and not tensors.tensor_is_zero(sol.U)
    res1, res2 = u_equations_residual(cd, conn, g, sol.U)
    assert tensors.tensor_is_zero(res1) and tensors.tensor_is_zero(res2)
    ps = cd.phase_space()
    S = build_s_bfv(cd, ps)
    H = build_h_bfv(cd, conn, g, ps, U=sol.U)
    r1, r2, r3 = bfv_residuals(ps, S, H)
    assert r1.is_zero() and r2.is_zero() and r3.is_zero()


def test_solver_infeasibility_certificate():
    """One-dimensional base kills the anchor image in the needed slots while
    an x-dependent connection keeps the basic curvature nonzero."""
    nb, r = 1, 4
    C = tensors.zeros(nb, r, r, r)
    rho = [[BaseCoeff.one(nb), BaseCoeff.zero(nb), BaseCoeff.zero(nb),
            BaseCoeff.zero(nb)]]
    cd = action_algebroid(C, tensors.identity_matrix(nb, r), rho)
    conn = metric_conn(cd, {(2, 3, 0): BaseCoeff.var(nb, 0)})
    g = MetricData.euclidean(nb)
    assert not tensors.tensor_is_zero(basic_curvature(cd, conn))
    sol = solve_u_linear(cd, conn, g)
    assert not sol.feasible
    assert "inconsistent" in sol.certificate


def test_random_u_on_curved_model_fails_res1():
    cd = x_flux_courant()
    conn = ConnectionData.zero(3, cd.r)
    g = MetricData.euclidean(3)
    U = tensors.zeros(3, cd.r, cd.r, cd.r, cd.r)
    for perm in permutations((0, 1, 2, 4)):
        U[perm[0]][perm[1]][perm[2]][perm[3]] = BaseCoeff.const(
            3, tensors.perm_sign_of_map((0, 1, 2, 4), perm))
    res1, _ = u_equations_residual(cd, conn, g, U)
    assert not tensors.tensor_is_zero(res1)


def test_r2_cubic_ghost_part_equals_res1():
    """For any quartic form, the eta^3 p part of {S,H} is the alternating
    projection of res1 contracted with eta^a eta^b eta^c p_i (scale 1)."""
    cd = x_flux_courant()
    conn = ConnectionData.zero(3, cd.r)
    g = MetricData.euclidean(3)
    U = tensors.zeros(3, cd.r, cd.r, cd.r, cd.r)
    for perm in permutations((0, 1, 2, 4)):
        U[perm[0]][perm[1]][perm[2]][perm[3]] = BaseCoeff.const(
            3, tensors.perm_sign_of_map((0, 1, 2, 4), perm))
    res1, _ = u_equations_residual(cd, conn, g, U)
    ps = cd.phase_space()
    S = build_s_bfv(cd, ps)
    _, r2, _ = bfv_residuals(ps, S, build_h_bfv(cd, conn, g, ps, U=U))
    p3 = r2.eta_count_parts().get(3, GradedPoly.zero(ps.reg))
    for i in range(3):
        for abc in combinations(range(cd.r), 3):
            co = p3.coefficient((("eta", abc[0]), ("eta", abc[1]),
                                 ("eta", abc[2]), ("p", i)))
            alt = BaseCoeff.zero(3)
            for perm in permutations(abc):
                alt = alt + res1[i][perm[0]][perm[1]][perm[2]].scale(
                    Fraction(tensors.perm_sign_of_map(abc, perm), 6))
            assert co == alt


def test_r2_quintic_ghost_part_tracks_res2():
    """An x-dependent perturbation of the solved quartic form excites the
    eta^5 sector of {S,H} if and only if res2 is nonzero, and the two match
    after alternating projection (scale -1/10)."""
    cd = x_flux_courant()
    conn = ConnectionData.zero(3, cd.r)
    g = MetricData.euclidean(3)
    sol = solve_u_linear(cd, conn, g)
    U = tensors.tmap(lambda c: c, sol.U)
    # support {1,2,5,6} with x^3-dependence: survives both the anchor
    # contraction (rho hits the missing lower index 3) and the alternation
    for perm in permutations((0, 1, 3, 4)):
        U[perm[0]][perm[1]][perm[2]][perm[3]] = \
            U[perm[0]][perm[1]][perm[2]][perm[3]] + (
                BaseCoeff.var(3, 2) ** 2).scale(
                Fraction(tensors.perm_sign_of_map((0, 1, 3, 4), perm)))
    res1, res2 = u_equations_residual(cd, conn, g, U)
    ps = cd.phase_space()
    S = build_s_bfv(cd, ps)
    _, r2, _ = bfv_residuals(ps, S, build_h_bfv(cd, conn, g, ps, U=U))
    p5 = r2.eta_count_parts().get(5, GradedPoly.zero(ps.reg))
    assert not tensors.tensor_is_zero(res2)
    assert not p5.is_zero()
    scale = None
    for abcde in combinations(range(cd.r), 5):
        co = p5.coefficient(tuple(("eta", a) for a in abcde))
        ref = res2[abcde[0]][abcde[1]][abcde[2]][abcde[3]][abcde[4]]
        if ref.is_zero():
            assert co.is_zero()
            continue
        # constant relative scale across all components
        if scale is None:
            items = sorted(co.terms.items())
            ref_items = sorted(ref.terms.items())
            assert [e for e, _ in items] == [e for e, _ in ref_items]
            scale = items[0][1] / ref_items[0][1]
        assert co == ref.scale(scale)
    assert scale is not None
