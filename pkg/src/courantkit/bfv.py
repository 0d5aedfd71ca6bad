"""BFV data on the graded phase space: the odd charge S (degree 3 + degree 1),
the even Hamiltonian H (degree 4 + degree 0), the covariant momentum, the
three bracket residuals, and the quartic-form equations.

Component conventions:

  Gamma_{abi} = k_{ac} Gamma^c_{bi}                   (lowering on the first slot)
  p^nabla_i   = p_i + (1/2) Gamma_{abi} eta^a eta^b
  S           = rho^i_a eta^a p^nabla_i - (1/3!) T_{abc} eta^a eta^b eta^c
                + mu_a eta^a
  H           = (1/2) g^{ij} p^nabla_i p^nabla_j + V'
                + (1/4!) U_{abcd} eta^a eta^b eta^c eta^d

The covariant form of S re-expands exactly to the flat form
rho eta p - (1/3!) f eta^3 + mu eta; this pins the 1/2 in p^nabla and the
absence of extra factors in T.  The residuals of {S,S}, {S,H}, {H,H}
decompose by eta-count into the tensors owned by the courant, momentum,
geometry and mechanics modules; tests assert those representation equalities.

The quartic-form equations (free indices on the left):

  res1[i][a][b][c] = sum_{d,e} rho^i_d k^{de} U_{eabc}
                     + sum_{j,d} g^{ij} S^d_{jab} k_{dc}

(the plus sign in res1 is fixed so that res1 = 0 is exactly the vanishing of
the cubic-ghost part of {S, H} in this bracket convention; the source display
carries the opposite relative sign, consistent with the global convention
flip documented in graded_poisson)
  res2[a..e]       = Alt( rho^i_a D_i U_{bcde}
                          + k^{fg} T_{fab} U_{cdeg} )

with Alt the weight-1/5! antisymmetrization projector over the five fiber
indices.  res1 = 0 is linear in U; solve_u_linear solves it exactly over the
rationals, coefficient by coefficient, or produces an inconsistent reduced
equation as an infeasibility certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .basecoeff import BaseCoeff
from .courant import CourantData, build_theta
from .geometry import (ConnectionData, MetricData, basic_curvature,
                       covariant_derivative, e_torsion)
from .graded_algebra import GradedPoly
from .graded_poisson import PhaseSpace, poisson_bracket
from . import tensors


def gamma_lower(cd: CourantData, conn: ConnectionData):
    """Gamma[a][b][i] = k_{ac} Gamma^c_{bi}."""
    n, r = cd.n, cd.r
    out = tensors.zeros(n, r, r, n)
    for a in range(r):
        for b in range(r):
            for i in range(n):
                s = BaseCoeff.zero(n)
                for c in range(r):
                    s = s + cd.k[a][c] * conn.gamma[c][b][i]
                out[a][b][i] = s
    return out


def covariant_momentum(cd: CourantData, conn: ConnectionData, ps: PhaseSpace):
    """[p^nabla_i] as GradedPoly, p^nabla_i = p_i + (1/2) Gamma_{abi} eta^a eta^b."""
    gl = gamma_lower(cd, conn)
    out = []
    for i in range(cd.n):
        v = ps.p(i)
        for a in range(cd.r):
            for b in range(cd.r):
                if not gl[a][b][i].is_zero():
                    v = v + (ps.coeff(gl[a][b][i]) * ps.eta(a)
                             * ps.eta(b)).scale(Fraction(1, 2))
        out.append(v)
    return out


def build_s_bfv(cd: CourantData, ps: PhaseSpace, mu=None) -> GradedPoly:
    """Flat form: the Courant charge, plus mu_a eta^a when mu is given."""
    s = build_theta(cd, ps)
    if mu is not None:
        for a in range(cd.r):
            if not mu[a].is_zero():
                s = s + ps.coeff(mu[a]) * ps.eta(a)
    return s


def build_s_bfv_covariant(cd: CourantData, conn: ConnectionData, ps: PhaseSpace,
                          mu=None) -> GradedPoly:
    """rho^i_a eta^a p^nabla_i - (1/3!) T eta^3 + mu eta; expands to the flat form."""
    pn = covariant_momentum(cd, conn, ps)
    T = e_torsion(cd, conn)
    s = GradedPoly.zero(ps.reg)
    for a in range(cd.r):
        for i in range(cd.n):
            if not cd.rho[i][a].is_zero():
                s = s + ps.coeff(cd.rho[i][a]) * ps.eta(a) * pn[i]
    for a in range(cd.r):
        for b in range(cd.r):
            for c in range(cd.r):
                if not T[a][b][c].is_zero():
                    s = s - (ps.coeff(T[a][b][c]) * ps.eta(a) * ps.eta(b)
                             * ps.eta(c)).scale(Fraction(1, 6))
    if mu is not None:
        for a in range(cd.r):
            if not mu[a].is_zero():
                s = s + ps.coeff(mu[a]) * ps.eta(a)
    return s


def build_h_bfv(cd: CourantData, conn: ConnectionData, g: MetricData,
                ps: PhaseSpace, V_prime=None, U=None) -> GradedPoly:
    """(1/2) g^{ij} p^nabla_i p^nabla_j + V' + (1/4!) U eta^4."""
    pn = covariant_momentum(cd, conn, ps)
    h = GradedPoly.zero(ps.reg)
    for i in range(cd.n):
        for j in range(cd.n):
            if not g.g_upper[i][j].is_zero():
                h = h + (ps.coeff(g.g_upper[i][j]) * pn[i]
                         * pn[j]).scale(Fraction(1, 2))
    if V_prime is not None and not V_prime.is_zero():
        h = h + ps.coeff(V_prime)
    if U is not None:
        tensors.check_total_antisymmetry(U, "U")
        for idx in itertools.product(range(cd.r), repeat=4):
            c = U[idx[0]][idx[1]][idx[2]][idx[3]]
            if not c.is_zero():
                m = ps.coeff(c)
                for a in idx:
                    m = m * ps.eta(a)
                h = h + m.scale(Fraction(1, 24))
    return h


def h_first_order(cd: CourantData, conn: ConnectionData, g: MetricData,
                  ps: PhaseSpace) -> GradedPoly:
    """The connection-dependent term (1/2) eta^a eta^b g^{ij} Gamma_{abi} p_j."""
    gl = gamma_lower(cd, conn)
    h = GradedPoly.zero(ps.reg)
    for a in range(cd.r):
        for b in range(cd.r):
            for i in range(cd.n):
                for j in range(cd.n):
                    c = g.g_upper[i][j] * gl[a][b][i]
                    if not c.is_zero():
                        h = h + (ps.coeff(c) * ps.eta(a) * ps.eta(b)
                                 * ps.p(j)).scale(Fraction(1, 2))
    return h


@dataclass
class BfvData:
    """The charge/Hamiltonian pair with its quartic form; validates the
    degree split (S in degrees {3,1}, H - V'-part in degrees {4,0})."""

    S: GradedPoly
    H: GradedPoly
    U: list = field(default=None)

    def __post_init__(self):
        s_degs = set(self.S.degree_parts())
        if not s_degs <= {1, 3}:
            raise ValueError(f"charge has degree parts {sorted(s_degs)}, "
                             "expected a subset of {1, 3}")
        h_degs = set(self.H.degree_parts())
        if not h_degs <= {0, 4}:
            raise ValueError(f"Hamiltonian has degree parts {sorted(h_degs)}, "
                             "expected a subset of {0, 4}")


def bfv_residuals(ps: PhaseSpace, S: GradedPoly, H: GradedPoly):
    """({S,S}, {S,H}, {H,H}); the last vanishes identically for even H."""
    r1 = poisson_bracket(ps, S, S)
    r2 = poisson_bracket(ps, S, H)
    r3 = poisson_bracket(ps, H, H)
    assert r3.is_zero(), "bracket of an even function with itself must vanish"
    return r1, r2, r3


# ---------------------------------------------------------------------------
# quartic-form equations

def u_equations_residual(cd: CourantData, conn: ConnectionData, g: MetricData,
                         U):
    """(res1[i][a][b][c], res2[a][b][c][d][e]); see the module docstring."""
    n, r = cd.n, cd.r
    tensors.check_total_antisymmetry(U, "U")
    S = basic_curvature(cd, conn)
    T = e_torsion(cd, conn)
    rho_k = tensors.zeros(n, n, r)
    for i in range(n):
        for e in range(r):
            s = BaseCoeff.zero(n)
            for d in range(r):
                s = s + cd.rho[i][d] * cd.k_inv[d][e]
            rho_k[i][e] = s
    res1 = tensors.zeros(n, n, r, r, r)
    for i in range(n):
        for a in range(r):
            for b in range(r):
                for c in range(r):
                    v = BaseCoeff.zero(n)
                    for e in range(r):
                        v = v + rho_k[i][e] * U[e][a][b][c]
                    for j in range(n):
                        for d in range(r):
                            v = v + g.g_upper[i][j] * S[d][j][a][b] * cd.k[d][c]
                    res1[i][a][b][c] = v

    # D_j U with four lower fiber indices
    DU = tensors.zeros(n, n, r, r, r, r)
    for j in range(n):
        for idx in itertools.product(range(r), repeat=4):
            a, b, c, d = idx
            v = U[a][b][c][d].diff(j)
            for f in range(r):
                v = (v - conn.gamma[f][a][j] * U[f][b][c][d]
                     - conn.gamma[f][b][j] * U[a][f][c][d]
                     - conn.gamma[f][c][j] * U[a][b][f][d]
                     - conn.gamma[f][d][j] * U[a][b][c][f])
            DU[j][a][b][c][d] = v

    def pre(a, b, c, d, e):
        v = BaseCoeff.zero(n)
        for i in range(n):
            v = v + cd.rho[i][a] * DU[i][b][c][d][e]
        for f in range(r):
            for gg in range(r):
                v = v + cd.k_inv[f][gg] * T[f][a][b] * U[c][d][e][gg]
        return v

    res2 = tensors.zeros(n, r, r, r, r, r)
    for combo in itertools.combinations(range(r), 5):
        v = BaseCoeff.zero(n)
        for perm in itertools.permutations(combo):
            sgn = tensors.perm_sign_of_map(combo, perm)
            v = v + pre(*perm).scale(Fraction(sgn, 120))
        for perm in itertools.permutations(combo):
            sgn = tensors.perm_sign_of_map(combo, perm)
            a, b, c, d, e = perm
            res2[a][b][c][d][e] = v.scale(sgn)
    return res1, res2


# ---------------------------------------------------------------------------
# exact linear solve of res1 = 0

@dataclass
class USolveResult:
    feasible: bool
    U: list = None                 # totally antisymmetric r^4 tensor if feasible
    res2: list = None              # second-equation residual at the solution
    certificate: str = None        # inconsistent reduced equation if infeasible


def _monomials_up_to(n: int, deg: int):
    out = []

    def rec(i, left, acc):
        if i == n:
            out.append(tuple(acc))
            return
        for k in range(left + 1):
            rec(i + 1, left - k, acc + [k])

    rec(0, deg, [])
    return sorted(out)


def _max_degree_of(*tensor_list):
    d = 0
    for t in tensor_list:
        for c in _leaves(t):
            for e in c.terms:
                d = max(d, sum(e))
    return d


def _leaves(t):
    if isinstance(t, list):
        for u in t:
            yield from _leaves(u)
    else:
        yield t


def solve_u_linear(cd: CourantData, conn: ConnectionData, g: MetricData,
                   max_degree: int = None) -> USolveResult:
    """Solve res1 = 0 for a totally antisymmetric quartic form with polynomial
    entries of degree <= max_degree (default: input degree + 1), exactly over
    the rationals; free coefficients are set to zero."""
    n, r = cd.n, cd.r
    if max_degree is None:
        max_degree = _max_degree_of(cd.rho, cd.f, conn.gamma, g.g_upper) + 1
    combos = list(itertools.combinations(range(r), 4))
    monos = _monomials_up_to(n, max_degree)
    var_index = {(c, m): idx for idx, (c, m) in
                 enumerate(itertools.product(combos, monos))}
    nvars = len(var_index)

    S = basic_curvature(cd, conn)
    rho_k = tensors.zeros(n, n, r)
    for i in range(n):
        for e in range(r):
            s = BaseCoeff.zero(n)
            for d in range(r):
                s = s + cd.rho[i][d] * cd.k_inv[d][e]
            rho_k[i][e] = s

    # Equations: for each (i, a<b<c) and each x-monomial, a linear relation.
    # (a,b,c) can be restricted to sorted triples: res1 is manifestly
    # antisymmetric in (a,b) via S and U, and the c slot ranges freely.
    rows = []       # (dict var -> Fraction, const Fraction, label)
    for i in range(n):
        for a in range(r):
            for b in range(a + 1, r):
                for c in range(r):
                    coeffs: dict[int, Fraction] = {}
                    const = BaseCoeff.zero(n)
                    for e in range(r):
                        idx4 = (e, a, b, c)
                        if len(set(idx4)) < 4:
                            continue
                        key = tuple(sorted(idx4))
                        sgn = tensors.perm_sign_of_map(key, idx4)
                        for exps, val in rho_k[i][e].terms.items():
                            for m in monos:
                                tgt = tuple(x + y for x, y in zip(exps, m))
                                vi = var_index[(key, m)]
                                coeffs.setdefault((tgt, vi), Fraction(0))
                                coeffs[(tgt, vi)] += sgn * val
                    for j in range(n):
                        for d in range(r):
                            const = const + g.g_upper[i][j] * S[d][j][a][b] \
                                * cd.k[d][c]
                    # regroup per target monomial
                    per_mono: dict[tuple, dict[int, Fraction]] = {}
                    for (tgt, vi), val in coeffs.items():
                        if val:
                            per_mono.setdefault(tgt, {})[vi] = val
                    for exps, val in const.terms.items():
                        per_mono.setdefault(exps, {})
                    # rows encode (coefficients) . u = rhs with rhs = -g S k part
                    for tgt, row in per_mono.items():
                        cst = -const.terms.get(tgt, Fraction(0))
                        if row or cst:
                            rows.append((row, cst,
                                         f"i={i + 1} (a,b,c)=({a + 1},{b + 1},"
                                         f"{c + 1}) monomial {tgt}"))

    sol, cert = _gauss_solve(rows, nvars)
    if sol is None:
        return USolveResult(feasible=False, certificate=cert)
    U = tensors.zeros(n, r, r, r, r)
    for (combo, m), vi in var_index.items():
        val = sol[vi]
        if not val:
            continue
        term = BaseCoeff(n, {m: val})
        for perm in itertools.permutations(combo):
            sgn = tensors.perm_sign_of_map(combo, perm)
            a, b, c, d = perm
            U[a][b][c][d] = U[a][b][c][d] + term.scale(sgn)
    res1, res2 = u_equations_residual(cd, conn, g, U)
    assert tensors.tensor_is_zero(res1)
    return USolveResult(feasible=True, U=U, res2=res2)


def _gauss_solve(rows, nvars):
    """Exact Gaussian elimination for sparse rows (dict var -> coeff, rhs).
    Returns (solution list with free vars = 0, None) or (None, certificate)."""
    pivots = {}                       # var -> (row dict, rhs)
    for row, rhs, label in rows:
        row = dict(row)
        while row:
            v = min(row)
            if v not in pivots:
                inv = 1 / row[v]
                row = {k: c * inv for k, c in row.items()}
                rhs = rhs * inv
                pivots[v] = (row, rhs)
                row = None
                break
            prow, prhs = pivots[v]
            f = row[v]
            for k, c in prow.items():
                row[k] = row.get(k, Fraction(0)) - f * c
                if not row[k]:
                    del row[k]
            rhs = rhs - f * prhs
        if row is not None and not row and rhs:
            return None, (f"equation from {label} reduces to 0 = {rhs}; "
                          "the linear system is inconsistent")
    # back-substitute with free variables set to zero
    sol = [Fraction(0)] * nvars
    for v in sorted(pivots, reverse=True):
        prow, prhs = pivots[v]
        s = prhs
        for k, c in prow.items():
            if k != v:
                s -= c * sol[k]
        sol[v] = s
    return sol, None
