"""Connections on the fiber bundle E and their derived tensors.

Conventions (component form, all indices explicit):

  D_i mu^a = d_i mu^a + Gamma^a_{bi} mu^b
  D_i mu_a = d_i mu_a - Gamma^b_{ai} mu_b
  R^b_{ija} = d_i Gamma^b_{aj} - d_j Gamma^b_{ai}
              - Gamma^c_{ai} Gamma^b_{cj} + Gamma^c_{aj} Gamma^b_{ci}
  T_{abc}   = f_{abc} - (rho^i_a Gamma^d_{bi} k_{dc} + Cycl(abc))
  S^c_{jab} = D_j T^c_{ab} + rho^i_a R^c_{ijb} - rho^i_b R^c_{ija}

The basic-curvature formula is the (a,b)-antisymmetric reading of its source
(whose displayed second rho-term repeats an index pattern); this is the only
reading antisymmetric in (a,b), matching the stated symmetry of S.  "Cycl" is
the plain 3-cycle sum without a 1/3 prefactor.  Total antisymmetry of T
requires a metric connection (k_{ac}Gamma^c_{bi} antisymmetric in (a,b));
e_torsion checks and reports this.
"""

from __future__ import annotations

from .basecoeff import BaseCoeff
from .courant import CourantData
from . import tensors


class ConnectionData:
    """Connection coefficients Gamma^b_{ai}, stored as gamma[b][a][i]."""

    def __init__(self, n: int, r: int, gamma):
        if tensors.shape_of(gamma) != (r, r, n):
            raise ValueError(f"Gamma has shape {tensors.shape_of(gamma)}, "
                             f"expected {(r, r, n)}")
        self.n = n
        self.r = r
        self.gamma = gamma

    @staticmethod
    def zero(n: int, r: int) -> "ConnectionData":
        return ConnectionData(n, r, tensors.zeros(n, r, r, n))

    def is_zero(self) -> bool:
        return tensors.tensor_is_zero(self.gamma)


class MetricData:
    """Inverse metric g^{ij} (the kinetic-term tensor), optionally its exact
    inverse g_{ij} for checks that need to lower base indices."""

    def __init__(self, n: int, g_upper, g_lower=None):
        if tensors.shape_of(g_upper) != (n, n):
            raise ValueError("g^{ij} has wrong shape")
        if not tensors.is_symmetric(g_upper):
            raise ValueError("metric must be symmetric")
        if g_lower is not None:
            if not tensors.is_symmetric(g_lower):
                raise ValueError("inverse metric must be symmetric")
            prod = tensors.mat_mul(g_upper, g_lower)
            if not tensors.tensor_eq(prod, tensors.identity_matrix(n, n)):
                raise ValueError("g_lower is not the exact inverse of g_upper")
        self.n = n
        self.g_upper = g_upper
        self.g_lower = g_lower

    @staticmethod
    def euclidean(n: int) -> "MetricData":
        eye = tensors.identity_matrix(n, n)
        return MetricData(n, eye, eye)

    def require_lower(self):
        if self.g_lower is None:
            raise ValueError("this check needs the exact inverse g_{ij}; "
                             "supply it explicitly")
        return self.g_lower


class PresymplecticData:
    """Potential 1-form A_i with its derived closed 2-form B = dA."""

    def __init__(self, n: int, A):
        if tensors.shape_of(A) != (n,):
            raise ValueError("A has wrong shape")
        self.n = n
        self.A = A
        self.B = exterior_d(A)
        assert tensors.is_antisymmetric(self.B)
        assert tensors.tensor_is_zero(exterior_d(self.B))  # dB = d^2 A = 0

    @staticmethod
    def zero(n: int) -> "PresymplecticData":
        return PresymplecticData(n, [BaseCoeff.zero(n)] * n)


def covariant_derivative(conn: ConnectionData, s, i: int, variance: str = "down"):
    """D_i of a section: variance "up" for mu^a in E, "down" for mu_a in E*."""
    r = conn.r
    out = []
    for a in range(r):
        v = s[a].diff(i)
        for b in range(r):
            if variance == "up":
                v = v + conn.gamma[a][b][i] * s[b]
            elif variance == "down":
                v = v - conn.gamma[b][a][i] * s[b]
            else:
                raise ValueError("variance must be 'up' or 'down'")
        out.append(v)
    return out


def curvature(conn: ConnectionData):
    """R^b_{ija} as R[b][i][j][a]."""
    n, r, G = conn.n, conn.r, conn.gamma
    R = tensors.zeros(n, r, n, n, r)
    for b in range(r):
        for i in range(n):
            for j in range(n):
                for a in range(r):
                    v = G[b][a][j].diff(i) - G[b][a][i].diff(j)
                    for c in range(r):
                        v = v - G[c][a][i] * G[b][c][j] + G[c][a][j] * G[b][c][i]
                    R[b][i][j][a] = v
    return R


def is_metric_connection(cd: CourantData, conn: ConnectionData) -> bool:
    """Whether the connection preserves k: k_{ac}Gamma^c_{bi} + k_{bc}Gamma^c_{ai} = 0."""
    for a in range(cd.r):
        for b in range(cd.r):
            for i in range(cd.n):
                s = BaseCoeff.zero(cd.n)
                for c in range(cd.r):
                    s = s + cd.k[a][c] * conn.gamma[c][b][i] \
                        + cd.k[b][c] * conn.gamma[c][a][i]
                if not s.is_zero():
                    return False
    return True


def e_torsion(cd: CourantData, conn: ConnectionData):
    """Gualtieri torsion T_{abc}; totally antisymmetric for metric connections."""
    n, r = cd.n, cd.r
    T = tensors.zeros(n, r, r, r)
    for a in range(r):
        for b in range(r):
            for c in range(r):
                v = cd.f[a][b][c]
                for cyc in ((a, b, c), (b, c, a), (c, a, b)):
                    aa, bb, cc = cyc
                    for i in range(n):
                        for d in range(r):
                            v = v - cd.rho[i][aa] * conn.gamma[d][bb][i] * cd.k[d][cc]
                T[a][b][c] = v
    try:
        tensors.check_total_antisymmetry(T, "T")
    except ValueError as exc:
        raise ValueError(
            f"E-torsion is not totally antisymmetric ({exc}); "
            "the connection does not preserve the fiber metric k") from exc
    return T


def basic_curvature(cd: CourantData, conn: ConnectionData, T=None, R=None):
    """S^c_{jab} as S[c][j][a][b]; antisymmetric in (a, b)."""
    n, r = cd.n, cd.r
    if T is None:
        T = e_torsion(cd, conn)
    if R is None:
        R = curvature(conn)
    # T^c_{ab} = k^{cd} T_{dab}
    Tup = tensors.zeros(n, r, r, r)
    for c in range(r):
        for a in range(r):
            for b in range(r):
                v = BaseCoeff.zero(n)
                for d in range(r):
                    v = v + cd.k_inv[c][d] * T[d][a][b]
                Tup[c][a][b] = v
    S = tensors.zeros(n, r, n, r, r)
    G = conn.gamma
    for c in range(r):
        for j in range(n):
            for a in range(r):
                for b in range(r):
                    # covariant derivative on E tensor wedge^2 E*
                    v = Tup[c][a][b].diff(j)
                    for d in range(r):
                        v = (v + G[c][d][j] * Tup[d][a][b]
                             - G[d][a][j] * Tup[c][d][b]
                             - G[d][b][j] * Tup[c][a][d])
                    for i in range(n):
                        v = v + cd.rho[i][a] * R[c][i][j][b] \
                            - cd.rho[i][b] * R[c][i][j][a]
                    S[c][j][a][b] = v
    return S


def e_connection_on_metric(cd: CourantData, conn: ConnectionData, g: MetricData):
    """(E-D_{e_a} g)^{jl} for the contravariant metric, via
    E-D_e v = L_{rho(e)} v + rho(D_v e); zero iff the metric is compatible."""
    n, r = cd.n, cd.r
    gu = g.g_upper
    out = tensors.zeros(n, r, n, n)
    for a in range(r):
        for j in range(n):
            for l in range(n):
                v = BaseCoeff.zero(n)
                for i in range(n):
                    v = v + cd.rho[i][a] * gu[j][l].diff(i)
                    v = v - gu[i][l] * cd.rho[j][a].diff(i)
                    v = v - gu[j][i] * cd.rho[l][a].diff(i)
                    for b in range(r):
                        v = v + gu[i][l] * conn.gamma[b][a][i] * cd.rho[j][b]
                        v = v + gu[j][i] * conn.gamma[b][a][i] * cd.rho[l][b]
                out[a][j][l] = v
    return out


def exterior_d(form):
    """d of a totally antisymmetric p-form given as a nested list (0-form:
    bare BaseCoeff); returns the (p+1)-form (dA)_{i0..ip} =
    sum_k (-1)^k d_{ik} A_{i0..ik^..ip}."""
    if isinstance(form, BaseCoeff):
        n = form.n
        return [form.diff(i) for i in range(n)]
    shape = tensors.shape_of(form)
    p = len(shape)
    n = shape[0]

    def entry(form, idx):
        v = form
        for i in idx:
            v = v[i]
        return v

    def build(idx):
        s = BaseCoeff.zero(n)
        for k in range(p + 1):
            rest = idx[:k] + idx[k + 1:]
            term = entry(form, rest).diff(idx[k])
            s = s + (term if k % 2 == 0 else -term)
        return s

    out = tensors.zeros(n, *([n] * (p + 1)))

    def fill(t, idx):
        for i in range(n):
            if len(idx) + 1 == p + 1:
                t[i] = build(idx + (i,))
            else:
                fill(t[i], idx + (i,))

    fill(out, ())
    return out
