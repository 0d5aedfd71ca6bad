"""Tangent-prolongation calculus: the differential d, contractions iota_e,
Lie derivatives L_e, their graded bracket relations, the momentum-section
deformation of d, and the equivariant (Cartan-model) differential."""

import random
from fractions import Fraction
from itertools import permutations

import pytest

from courantkit import tensors
from courantkit.basecoeff import BaseCoeff
from courantkit.courant import dorfman_bracket, standard_courant
from courantkit.geometry import ConnectionData, PresymplecticData
from courantkit.graded_algebra import GradedPoly
from courantkit.graded_poisson import poisson_bracket
from courantkit.momentum import check_H2, check_H3
from courantkit.weil import (CartanSpace, WeilSpace, cartan_magic_residual,
                             check_bracket_relations, deformed_weil_d,
                             lie_on_section, weil_d, weil_iota, weil_lie)

from helpers import so3_quadratic, so3_rotations, standard_h0


def x_flux(n=3):
    """Standard Courant model with a linear-coefficient closed flux term."""
    h = tensors.zeros(n, n, n, n)
    for perm in permutations((0, 1, 2)):
        h[perm[0]][perm[1]][perm[2]] = BaseCoeff.var(n, 0).scale(
            Fraction(tensors.perm_sign_of_map((0, 1, 2), perm)))
    return standard_courant(n, h)


def basis_sections(n, r):
    return [[BaseCoeff.const(n, 1 if a == b else 0) for b in range(r)]
            for a in range(r)]


def all_weil_elements(ws):
    """x coordinates plus every registered generator of the prolongation."""
    return [ws.x(i) for i in range(ws.n)] + \
        [ws.gen(*g) for g in ws.reg.all_gens()]


# ---------------------------------------------------------------------------
# d


@pytest.mark.parametrize("make", [so3_quadratic, lambda: standard_h0(2), x_flux],
                         ids=["quadratic-so3", "standard-h0", "x-flux"])
def test_weil_d_squares_to_zero_on_all_generators(make):
    ws = WeilSpace(make())
    d = weil_d(ws)
    for g in all_weil_elements(ws):
        assert d(d(g)).is_zero()


def test_weil_d_rejects_non_homological_charge():
    # non-isotropic anchor: the charge does not square to zero
    with pytest.raises(ValueError, match="homological"):
        weil_d(WeilSpace(so3_rotations()))


def test_weil_d_on_x_is_tangent_plus_anchor_pairing():
    # d x^i = F_x^i + rho^i_a eta^a; for the standard model rho is the
    # projection onto the first factor.  (With the bracket convention used
    # here the anchor term enters with a plus sign.)
    ws = WeilSpace(x_flux())
    d = weil_d(ws)
    for i in range(ws.n):
        assert d(ws.x(i)) == ws.gen("Fx", i) + ws.gen("eta", i)


def test_weil_d_on_tangent_x_generator():
    # d F_x^i = -delta(Q x^i) = -rho^i_a F_eta^a for a constant anchor
    ws = WeilSpace(x_flux())
    d = weil_d(ws)
    for i in range(ws.n):
        assert d(ws.gen("Fx", i)) == ws.gen("Feta", i).scale(-1)


# ---------------------------------------------------------------------------
# iota


def test_iota_on_eta_is_pairing_constant():
    # the symbol of the basis section e_a is k_{ac} eta^c, so contracting
    # with eta^b returns the constant k_{ac} k^{cb} = delta_a^b
    cd = standard_h0(2)
    ws = WeilSpace(cd)
    for a, e in enumerate(basis_sections(2, cd.r)):
        for b in range(cd.r):
            got = weil_iota(ws, e, ws.gen("eta", b))
            want = GradedPoly.scalar(ws.reg, Fraction(1 if a == b else 0))
            assert got == want


@pytest.mark.parametrize("make", [lambda: standard_h0(2), x_flux],
                         ids=["standard-h0", "x-flux"])
def test_iota_horizontality_of_tangent_generators(make):
    cd = make()
    ws = WeilSpace(cd)
    tangent = [g for g in ws.reg.all_gens() if g[0] in ("Fx", "Feta", "Fp")]
    for e in basis_sections(cd.n, cd.r):
        op = weil_iota(ws, e)
        for g in tangent:
            assert op(ws.gen(*g)).is_zero()


def test_iota_rejects_inhomogeneous_argument():
    ws = WeilSpace(standard_h0(2))
    mixed = ws.ps.eta(0) + ws.ps.p(0)
    with pytest.raises(ValueError):
        weil_iota(ws, mixed)


def test_iota_nondegenerate_on_nonzero_degree_generators():
    ws = WeilSpace(x_flux())
    ps = ws.ps
    cands = [ps.x(0), ps.p(0), ps.eta(0), ps.eta(3)]
    cands += [ps.x(i) * ps.p(j) for i in range(3) for j in range(3)]
    cands += [ps.x(i) * ps.eta(a) for i in range(3) for a in range(6)]
    for g in ws.reg.all_gens():
        assert any(not weil_iota(ws, e, ws.gen(*g)).is_zero() for e in cands), \
            f"no contraction detects {g}"


# ---------------------------------------------------------------------------
# L and the magic formula


def test_lie_on_x_is_anchor_action():
    ws = WeilSpace(x_flux())
    for a, e in enumerate(basis_sections(ws.n, ws.r)):
        for i in range(ws.n):
            got = weil_lie(ws, e, ws.x(i))
            want = GradedPoly.from_coeff(ws.reg, ws.cd.rho[i][a])
            assert got == want


def _random_homogeneous(ws, rng):
    """Random nonzero product of generators, possibly with an x factor."""
    pool = [ws.gen(*g) for g in ws.reg.all_gens()]
    for _ in range(50):
        f = GradedPoly.scalar(ws.reg, Fraction(rng.randint(1, 3)))
        for _ in range(rng.randint(1, 3)):
            f = f * rng.choice(pool)
        if rng.random() < 0.4:
            f = f * ws.x(rng.randrange(ws.n))
        if not f.is_zero():
            return f
    raise AssertionError("could not build a nonzero random element")


def test_cartan_magic_formula_exact():
    ws = WeilSpace(standard_h0(2))
    d = weil_d(ws)
    ps = ws.ps
    secs = basis_sections(2, ws.r)
    secs.append([BaseCoeff.var(2, 0), BaseCoeff.zero(2),
                 BaseCoeff.zero(2), BaseCoeff.var(2, 1)])
    elems = [ws.section(e) for e in secs]
    # also non-section arguments of every parity
    elems += [ps.x(0) * ps.x(1), ps.p(0), ps.x(1) * ps.p(0),
              ps.eta(0) * ps.eta(1), ps.eta(0) * ps.p(1)]
    rng = random.Random(7)
    targets = all_weil_elements(ws)
    targets += [_random_homogeneous(ws, rng) for _ in range(100)]
    for e in elems:
        for f in targets:
            assert cartan_magic_residual(ws, e, f, d=d).is_zero()


def test_lie_on_sections_matches_dorfman_bracket():
    cd = x_flux()
    ws = WeilSpace(cd)
    secs = basis_sections(3, cd.r)[:3]
    secs.append([BaseCoeff.var(3, 1) if b == 0 else BaseCoeff.zero(3)
                 for b in range(cd.r)])
    for e1 in secs:
        for e2 in secs:
            assert lie_on_section(ws, e1, e2) == dorfman_bracket(cd, e1, e2)


# ---------------------------------------------------------------------------
# graded bracket relations


def test_bracket_relations_constant_sections():
    cd = so3_quadratic()
    rep = check_bracket_relations(WeilSpace(cd), basis_sections(1, 3),
                                  rng=random.Random(3))
    assert rep.passed


def test_bracket_relations_x_dependent_sections():
    cd = x_flux()
    secs = basis_sections(3, cd.r)[:2]
    secs.append([BaseCoeff.var(3, 1) if b == 0 else BaseCoeff.zero(3)
                 for b in range(cd.r)])
    rep = check_bracket_relations(WeilSpace(cd), secs, rng=random.Random(4),
                                  samples=3)
    assert rep.passed


def test_bracket_relations_fail_for_corrupted_charge():
    # an eta^3 term that is no structure-constant term of this model breaks
    # the closure of the charge (with r = 3 any corruption of the cubic term
    # would stay proportional to the invariant 3-form, so use r = 4)
    cd = standard_h0(2)
    ws = WeilSpace(cd)
    ws.theta = ws.theta + ws.ps.eta(0) * ws.ps.eta(1) * ws.ps.eta(2)
    rep = check_bracket_relations(ws, basis_sections(2, cd.r),
                                  rng=random.Random(3))
    assert not rep.passed
    failed = {r.name.split("[")[0] for r in rep.records if not r.passed}
    assert "weil.lie-lie" in failed


# ---------------------------------------------------------------------------
# momentum-section deformation


def test_deformed_d_with_zero_mu_reduces_to_weil_d():
    cd = standard_h0(2)
    mu0 = [BaseCoeff.zero(2)] * cd.r
    ws = WeilSpace(cd, mu=mu0)
    d = weil_d(WeilSpace(cd))
    dp = deformed_weil_d(ws)
    # the registries of the two spaces differ; compare monomial data
    for g_lbl in [("x", i) for i in range(2)] + list(ws.reg.all_gens()):
        if g_lbl[0] == "x":
            a, b = dp(ws.x(g_lbl[1])), d(ws.x(g_lbl[1]))
        else:
            a, b = dp(ws.gen(*g_lbl)), d(ws.gen(*g_lbl))
        assert {k: dict(c.terms) for k, c in a.monomials.items()} == \
            {k: dict(c.terms) for k, c in b.monomials.items()}


def _standard_mu_setup(mu):
    cd = standard_h0(2)
    conn = ConnectionData.zero(2, cd.r)
    presymp = PresymplecticData.zero(2)
    return cd, conn, presymp, mu


def test_deformed_d_momentum_section_model():
    """A constant section of E* on the flat standard model is a momentum
    section: the deformed differential squares to zero, the tangent
    generators stay horizontal, and the section-condition checks pass."""
    mu = [BaseCoeff.const(2, 1), BaseCoeff.const(2, 2),
          BaseCoeff.zero(2), BaseCoeff.zero(2)]
    cd, conn, presymp, mu = _standard_mu_setup(mu)
    ws = WeilSpace(cd, mu=mu)
    dp = deformed_weil_d(ws)
    for g in all_weil_elements(ws):
        assert dp(dp(g)).is_zero()
    for e in basis_sections(2, cd.r):
        op = weil_iota(ws, e)
        for g in ws.reg.all_gens():
            if g[0] in ("Fx", "Feta", "Fp"):
                assert op(ws.gen(*g)).is_zero()
    assert check_H2(cd, conn, presymp, mu).passed
    assert check_H3(cd, conn, presymp, mu).passed


def test_deformed_d_broken_mu_fails_with_momentum_checks():
    mu = [BaseCoeff.var(2, 1), BaseCoeff.zero(2),
          BaseCoeff.zero(2), BaseCoeff.zero(2)]
    cd, conn, presymp, mu = _standard_mu_setup(mu)
    ws = WeilSpace(cd, mu=mu)
    dp = deformed_weil_d(ws)
    bad = [g for g in all_weil_elements(ws) if not dp(dp(g)).is_zero()]
    assert bad, "broken section should obstruct d'^2 = 0"
    assert any(not dp(dp(ws.gen("eta", a))).is_zero() for a in range(cd.r))
    assert not check_H3(cd, conn, presymp, mu).passed
    assert not check_H2(cd, conn, presymp, mu).passed


def test_deformation_displays():
    """d' eta^a - d eta^a = k^{ab} mu_b,  d' x = d x,  and the deformation of
    d' p_i is the contraction of the derivative of mu with eta (the sign
    follows the bracket convention used throughout)."""
    mu = [BaseCoeff.var(2, 1), BaseCoeff.var(2, 0),
          BaseCoeff.zero(2), BaseCoeff.zero(2)]
    cd, _, _, mu = _standard_mu_setup(mu)
    ws = WeilSpace(cd, mu=mu)
    dp = deformed_weil_d(ws)
    from courantkit.bfv import build_s_bfv
    theta0 = build_s_bfv(cd, ws.ps)

    def undeformed(g_ps, tangent):
        return tangent + ws.to_weil(poisson_bracket(ws.ps, theta0, g_ps))

    for a in range(cd.r):
        shift = BaseCoeff.zero(2)
        for b in range(cd.r):
            shift = shift + cd.k_inv[a][b] * mu[b]
        got = dp(ws.gen("eta", a)) - undeformed(ws.ps.eta(a), ws.gen("Feta", a))
        assert got == GradedPoly.from_coeff(ws.reg, shift)
    for i in range(2):
        assert dp(ws.x(i)) == undeformed(ws.ps.x(i), ws.gen("Fx", i))
        got = dp(ws.gen("p", i)) - undeformed(ws.ps.p(i), ws.gen("Fp", i))
        want = GradedPoly.zero(ws.reg)
        for a in range(cd.r):
            want = want - ws.coeff(mu[a].diff(i)) * ws.gen("eta", a)
        assert got == want


def test_deformed_d_insensitive_to_connection_condition():
    """d'^2 sees only the bracket-compatibility condition: an exact gradient
    section keeps d'^2 = 0 even though the connection condition fails."""
    mu = [BaseCoeff.var(2, 1), BaseCoeff.var(2, 0),
          BaseCoeff.zero(2), BaseCoeff.zero(2)]   # components of d(x1 x2)
    cd, conn, presymp, mu = _standard_mu_setup(mu)
    ws = WeilSpace(cd, mu=mu)
    dp = deformed_weil_d(ws)
    for g in all_weil_elements(ws):
        assert dp(dp(g)).is_zero()
    assert check_H3(cd, conn, presymp, mu).passed
    assert not check_H2(cd, conn, presymp, mu).passed


# ---------------------------------------------------------------------------
# Cartan model


def test_cartan_d_on_second_factor_coordinates():
    # d_C xB^i = (1 tensor d) xB^i - F_x^i: the second-factor part is the
    # anchor pairing, the correction comes from the first factor.
    cs = CartanSpace(WeilSpace(x_flux()))
    for i in range(3):
        want = cs.gen("etaB", i) - cs.gen("Fx", i)
        assert cs.cartan_d()(cs.gen("xB", i)) == want


def _quadratic_cartan():
    ws = WeilSpace(so3_quadratic())
    cs = CartanSpace(ws)
    reps = [cs.gen("xB", 0), cs.gen("pB", 0),
            cs.gen("xB", 0) * cs.gen("pB", 0),
            cs.gen("xB", 0) * cs.gen("xB", 0)]
    return cs, reps


def test_cartan_d_squares_to_zero_on_basic_representatives():
    cs, reps = _quadratic_cartan()
    secs = basis_sections(1, 3)
    for t in reps:
        for e in secs:   # confirm the representatives really are basic
            assert cs.iota_total(e)(t).is_zero()
            assert cs.lie_total(e)(t).is_zero()
        assert cs.cartan_d()(cs.cartan_d()(t)).is_zero()


def test_cartan_d_square_obstruction_off_basic():
    # off the basic subspace d_C^2 is the curvature-weighted Lie action
    cs, _ = _quadratic_cartan()
    dc = cs.cartan_d()
    assert not dc(dc(cs.gen("etaB", 0))).is_zero()


def test_mq_conjugation_truncation_reproduces_cartan_d():
    cs, reps = _quadratic_cartan()
    dc = cs.cartan_d()
    mq = cs.mq_conjugated_d()
    for t in reps:
        assert (mq(t) - dc(t)).is_zero()
