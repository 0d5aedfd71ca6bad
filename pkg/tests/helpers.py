"""Shared builders and hypothesis strategies for the test suite."""

from fractions import Fraction
from itertools import permutations

from hypothesis import strategies as st

from courantkit import tensors
from courantkit.basecoeff import BaseCoeff
from courantkit.courant import CourantData, action_algebroid, standard_courant
from courantkit.graded_algebra import GradedPoly


def epsilon3(n_base: int):
    """Totally antisymmetric 3-tensor with eps_{123} = 1, entries over Q[x^1..x^n]."""
    t = tensors.zeros(n_base, 3, 3, 3)
    for perm in permutations((0, 1, 2)):
        t[perm[0]][perm[1]][perm[2]] = BaseCoeff.const(
            n_base, tensors.perm_sign_of_map((0, 1, 2), perm))
    return t


def const_h(n: int, c) -> list:
    """c * eps as an n x n x n tensor (n >= 3 uses only the first three slots)."""
    h = tensors.zeros(n, n, n, n)
    for perm in permutations((0, 1, 2)):
        h[perm[0]][perm[1]][perm[2]] = BaseCoeff.const(
            n, Fraction(c) * tensors.perm_sign_of_map((0, 1, 2), perm))
    return h


def nonclosed_h(n: int = 4) -> list:
    """h_{123} = x^4 antisymmetrized: dh has the single component d_4 h_{123} != 0."""
    h = tensors.zeros(n, n, n, n)
    for perm in permutations((0, 1, 2)):
        h[perm[0]][perm[1]][perm[2]] = BaseCoeff.var(n, 3).scale(
            Fraction(tensors.perm_sign_of_map((0, 1, 2), perm)))
    return h


def so3_quadratic() -> CourantData:
    """so(3) with k = delta, f = eps, anchor zero, over a 1-dimensional base."""
    nb = 1
    return action_algebroid(epsilon3(nb), tensors.identity_matrix(nb, 3),
                            [[BaseCoeff.zero(nb)] * 3])


def so3_rotations() -> CourantData:
    """so(3) acting by rotations on R^3: rho^i_a = eps_{aij} x^j, k = delta."""
    nb = 3
    rho = tensors.zeros(nb, nb, 3)
    for a in range(3):
        for i in range(3):
            s = BaseCoeff.zero(nb)
            for j in range(3):
                if len({a, i, j}) == 3:
                    s = s + BaseCoeff.var(nb, j).scale(
                        Fraction(tensors.perm_sign_of_map((0, 1, 2), (a, i, j))))
            rho[i][a] = s
    return action_algebroid(epsilon3(nb), tensors.identity_matrix(nb, 3), rho)


def so2_rotation() -> CourantData:
    """so(2) acting by rotation on R^2: one abelian generator, rho = (-x2, x1)."""
    nb = 2
    C = tensors.zeros(nb, 1, 1, 1)
    inner = tensors.identity_matrix(nb, 1)
    rho = [[BaseCoeff.var(nb, 1).scale(Fraction(-1))], [BaseCoeff.var(nb, 0)]]
    return action_algebroid(C, inner, rho)


def standard_h0(n: int = 3) -> CourantData:
    return standard_courant(n, tensors.zeros(n, n, n, n))


# ---------------------------------------------------------------------------
# hypothesis strategies

def fractions_st():
    return st.fractions(min_value=-4, max_value=4, max_denominator=3)


def basecoeff_st(n: int, max_deg: int = 2, max_terms: int = 3):
    exps = st.tuples(*[st.integers(min_value=0, max_value=max_deg) for _ in range(n)])

    def build(pairs):
        out = BaseCoeff.zero(n)
        for e, c in pairs:
            if sum(e) > max_deg or not c:
                continue
            term = BaseCoeff.const(n, c)
            for i, k in enumerate(e):
                for _ in range(k):
                    term = term * BaseCoeff.var(n, i)
            out = out + term
        return out

    return st.lists(st.tuples(exps, fractions_st()), max_size=max_terms).map(build)


def graded_poly_st(reg, max_factors: int = 3, max_monomials: int = 3, max_deg: int = 2):
    gens = reg.all_gens()

    def build(monos):
        out = GradedPoly.zero(reg)
        for fs, c in monos:
            if c.is_zero():
                continue
            m = GradedPoly.from_coeff(reg, c)
            for g in fs:
                m = m * GradedPoly.gen(reg, *g)
            out = out + m
        return out

    factor = st.sampled_from(gens)
    mono = st.tuples(st.lists(factor, max_size=max_factors), basecoeff_st(reg.n, max_deg))
    return st.lists(mono, max_size=max_monomials).map(build)


def homogeneous_poly_st(reg, degree: int, max_monomials: int = 3, max_deg: int = 2):
    """Random homogeneous GradedPoly of the given total degree."""
    gens = reg.all_gens()
    combos = _degree_combos(reg, gens, degree)
    if not combos:
        raise ValueError(f"no generator combination of degree {degree}")

    def build(monos):
        out = GradedPoly.zero(reg)
        for fs, c in monos:
            m = GradedPoly.from_coeff(reg, c)
            for g in fs:
                m = m * GradedPoly.gen(reg, *g)
            out = out + m
        return out

    mono = st.tuples(st.sampled_from(combos), basecoeff_st(reg.n, max_deg))
    return st.lists(mono, min_size=1, max_size=max_monomials).map(build)


def _degree_combos(reg, gens, degree, limit=400):
    """All factor tuples (sorted, odd-distinct) of the given total degree."""
    out = []

    def rec(start, left, acc):
        if len(out) >= limit:
            return
        if left == 0:
            out.append(tuple(acc))
            return
        for idx in range(start, len(gens)):
            g = gens[idx]
            d = reg.degree(g[0])
            if d == 0 or d > left:
                continue
            if reg.is_odd(g[0]) and acc and acc[-1] == g:
                continue
            nxt = idx if not reg.is_odd(g[0]) else idx + 1
            rec(nxt, left - d, acc + [g])

    rec(0, degree, [])
    return out


def so2_angular_momentum():
    """The classical angular-momentum setup on R^2: so(2) rotation anchor,
    B = dx^1 ^ dx^2 (from A = x^1 dx^2), mu = -(x1^2 + x2^2)/2, flat conn."""
    from courantkit.geometry import ConnectionData, PresymplecticData
    cd = so2_rotation()
    conn = ConnectionData.zero(2, 1)
    A = [BaseCoeff.zero(2), BaseCoeff.var(2, 0)]
    presymp = PresymplecticData(2, A)
    mu = [(BaseCoeff.var(2, 0) ** 2 + BaseCoeff.var(2, 1) ** 2).scale(Fraction(-1, 2))]
    return cd, conn, presymp, mu
