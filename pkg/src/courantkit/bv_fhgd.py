"""BV theory generated from BFV data by superfield extension.

Construction: each phase-space coordinate z (x^i, p_i, eta^a) gets an odd
super-time theta and a partner field w of opposite parity,

    X^i = x^i + theta ps^i      (ps odd)
    P_i = p_i - theta xs_i      (xs odd)
    Y^a = eta^a - theta lam^a   (lam even)

and the action functional is the Berezin integral

    S_BV = int dtheta [ theta_I(Z) dZ^I - S_BFV(Z) - theta H_BFV(Z) ],

with dZ := (d/dt Z) * theta and int dtheta theta = 1.  With these conventions
the component expansion reproduces the source term list verbatim:

    p x' - (1/2) k eta eta' + lam G + xs rho eta - ps drho p eta
    - (1/2) f lam eta eta - (1/3!) df ps eta^3 - (1/2) g p p - ...

Sign pinning.  The kinetic ordering (partner on the right, dZ = Z' theta) is
forced term-by-term by that expansion; the partner signs of the odd partners
(+theta ps, -theta xs) are opposite to a theta-on-the-left display, which is
the same (x,p)-sector orientation flip documented in graded_poisson.  The
Liouville form theta_BFV = (p_i - A_i) dx^i - (1/2) k_ab eta^a d eta^b is
verified against the bracket table symbolically: the matrix of -delta(theta)
times the elementary bracket matrix must be exactly -Id; this check also pins
the global sign of the A-term (the boundary form of the twist; a 2-dimensional
Wess-Zumino presentation of the same data is not modelled).

Local functionals are polynomials in the fields, their first and second
t-derivatives, and x; equality holds modulo total t-derivatives.  The
normal form reduces modulo the exact linear span of D_t applied to every
monomial in the weight class of the input (reduced-echelon reduction, hence
canonical and independent of traversal order).

The antibracket is the canonical odd pairing of (x, xs), (p, ps) and
(eta^a, lam^b) ~ k^{ab} through Euler-Lagrange derivatives; when the phase
space carries a twist B = dA the raw antifield xs is not Darboux and the
bracket is computed by conjugation with xs -> xs - B ps (valid since dB = 0),
which reproduces the field-dependent pairing terms of the expanded odd
symplectic form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .basecoeff import BaseCoeff
from .graded_algebra import Derivation, GradedPoly, Registry
from .graded_poisson import PhaseSpace, poisson_bracket
from . import tensors


# field kinds: (name, degree); parity = degree mod 2.  The degree is parity
# bookkeeping for the sign engine, not a ghost-number assignment.
_FIELDS = (("eta", 1), ("p", 2), ("lam", 2), ("xs", 1), ("ps", 1))
_DOT = {"x": "xd", "eta": "etad", "p": "pd", "lam": "lamd",
        "xs": "xsd", "ps": "psd",
        "xd": "xdd", "etad": "etadd", "pd": "pdd", "lamd": "lamdd",
        "xsd": "xsdd", "psd": "psdd"}
_UNDOT = {v: k for k, v in _DOT.items()}


class BvSpace:
    """Field/antifield polynomial algebra over a BFV phase space.

    Kinds: theta, the BFV fields (eta, p), the Lagrange multiplier lam and the
    antifields xs (of p), ps (of x), plus first (suffix d) and second (dd)
    formal t-derivatives of every field; x-derivatives are the kinds xd, xdd
    since x itself lives in the coefficients.
    """

    def __init__(self, ps: PhaseSpace):
        self.ps = ps
        self.n, self.r = ps.n, ps.r
        self.k, self.k_inv = ps.k, ps.k_inv
        self.twist = ps.twist
        reg = Registry(ps.n)
        reg.register("theta", 1, 1)
        counts = {"eta": ps.r, "p": ps.n, "lam": ps.r, "xs": ps.n, "ps": ps.n}
        for name, deg in _FIELDS:
            reg.register(name, deg, counts[name])
        reg.register("xd", 0, ps.n)
        for name, deg in _FIELDS:
            reg.register(_DOT[name], deg, counts[name])
        reg.register("xdd", 0, ps.n)
        for name, deg in _FIELDS:
            reg.register(_DOT[_DOT[name]], deg, counts[name])
        self.reg = reg

    # -- coordinate polynomials -------------------------------------------
    def gen(self, kind, idx):
        return GradedPoly.gen(self.reg, kind, idx)

    def x(self, i):
        return GradedPoly.x(self.reg, i)

    def coeff(self, c: BaseCoeff) -> GradedPoly:
        return GradedPoly.from_coeff(self.reg, c)

    def scalar(self, c) -> GradedPoly:
        return GradedPoly.scalar(self.reg, c)

    def theta(self):
        return self.gen("theta", 0)

    def from_bfv(self, f: GradedPoly) -> GradedPoly:
        """Re-express a BFV polynomial (kinds eta, p) over this registry."""
        if f.reg is not self.ps.reg:
            raise ValueError("polynomial not built over the underlying phase space")
        return GradedPoly(self.reg, dict(f.monomials))


def total_derivative(bv: BvSpace, f: GradedPoly) -> GradedPoly:
    """Formal d/dt: dots every field factor once and differentiates the
    x-dependence of coefficients against xd.  Rejects second derivatives."""
    for fs in f.monomials:
        for kind, _ in fs:
            if kind.endswith("dd"):
                raise ValueError("density already carries a second t-derivative; "
                                 "reduce by parts before differentiating again")
    images = {}
    for kind in _DOT:
        if kind == "x" or kind not in bv.reg.kinds:
            continue
        for idx in range(bv.reg.count(kind)):
            images[(kind, idx)] = bv.gen(_DOT[kind], idx)
    xd = [bv.gen("xd", i) for i in range(bv.n)]
    return Derivation(bv.reg, 0, images, xd)(f)


# ---------------------------------------------------------------------------
# superfields and Berezin integration

@dataclass
class Superfields:
    """Component expansions of the superfields over a BvSpace."""

    bv: BvSpace
    X: list          # X^i = x^i + theta ps^i
    P: list          # P_i = p_i - theta xs_i
    Y: list          # Y^a = eta^a - theta lam^a


def superfield_extend(ps: PhaseSpace, bv: BvSpace | None = None) -> Superfields:
    bv = bv or BvSpace(ps)
    th = bv.theta()
    X = [bv.x(i) + th * bv.gen("ps", i) for i in range(bv.n)]
    P = [bv.gen("p", i) - th * bv.gen("xs", i) for i in range(bv.n)]
    Y = [bv.gen("eta", a) - th * bv.gen("lam", a) for a in range(bv.r)]
    return Superfields(bv, X, P, Y)


def substitute_superfields(bv: BvSpace, f: GradedPoly) -> GradedPoly:
    """Evaluate a BFV polynomial on the superfields: the algebra homomorphism
    x -> X, p -> P, eta -> Y (exact; theta^2 = 0 truncates the Taylor tail)."""
    if f.reg is not bv.ps.reg:
        raise ValueError("polynomial not built over the underlying phase space")
    th = bv.theta()
    out = GradedPoly.zero(bv.reg)
    for fs, c in f.monomials.items():
        m = bv.coeff(c)
        for i in range(bv.n):
            dc = c.diff(i)
            if not dc.is_zero():
                m = m + th * bv.gen("ps", i) * bv.coeff(dc)
        for kind, idx in fs:
            if kind == "p":
                m = m * (bv.gen("p", idx) - th * bv.gen("xs", idx))
            elif kind == "eta":
                m = m * (bv.gen("eta", idx) - th * bv.gen("lam", idx))
            else:
                raise ValueError(f"unexpected phase-space kind {kind!r}")
        out = out + m
    return out


def berezin_integrate(bv: BvSpace, f: GradedPoly) -> GradedPoly:
    """int dtheta: the theta-linear coefficient (int dtheta theta = 1)."""
    parts = f.eta_count_parts("theta")
    if any(k > 1 for k in parts):
        raise ValueError("integrand has theta-degree > 1")
    return f.derive(("theta", 0), "left")


# ---------------------------------------------------------------------------
# Liouville form and exactness

def liouville_exactness_check(ps: PhaseSpace, A=None):
    """Verify omega = -delta(theta_BFV) for theta = (p - A) dx - (1/2) k eta d eta:
    the graded exterior-derivative matrix of theta times the elementary bracket
    matrix must be exactly -Id (this couples the A-term to the {p,p} twist)."""
    n, r = ps.n, ps.r
    if A is None:
        A = [BaseCoeff.zero(n)] * n
    coords = [("x", i) for i in range(n)] + [("p", i) for i in range(n)] \
        + [("eta", a) for a in range(r)]
    parity = {"x": 0, "p": 0, "eta": 1}

    def comp(c):   # theta_I
        kind, idx = c
        if kind == "x":
            return ps.p(idx) - ps.coeff(A[idx])
        if kind == "p":
            return GradedPoly.zero(ps.reg)
        v = GradedPoly.zero(ps.reg)
        for b in range(r):
            if not ps.k[idx][b].is_zero():
                v = v - (ps.coeff(ps.k[idx][b]) * ps.eta(b)).scale(Fraction(1, 2))
        return v

    def d(c, f):   # left derivative along coordinate c
        kind, idx = c
        return f.partial_x(idx) if kind == "x" else f.derive((kind, idx), "left")

    def zpoly(c):
        kind, idx = c
        return ps.x(idx) if kind == "x" else GradedPoly.gen(ps.reg, kind, idx)

    th = {c: comp(c) for c in coords}
    for ci in coords:
        for ck in coords:
            # (delta theta)_{IJ} = d_I theta_J - (-1)^{|I||J|} d_J theta_I
            acc = GradedPoly.zero(ps.reg)
            for cj in coords:
                m = d(ci, th[cj])
                tail = d(cj, th[ci])
                if (parity[ci[0]] * parity[cj[0]]) % 2:
                    m = m + tail
                else:
                    m = m - tail
                if m.is_zero():
                    continue
                w = poisson_bracket(ps, zpoly(cj), zpoly(ck))
                if not w.is_zero():
                    acc = acc + m * w
            want = GradedPoly.scalar(ps.reg, -1 if ci == ck else 0)
            if acc != want:
                raise ValueError(
                    "Liouville form does not satisfy omega = -delta(theta): "
                    f"component ({ci}, {ck}) of -delta(theta) * bracket-matrix is "
                    f"{acc}, expected {want}; check the A-term against the twist")


# ---------------------------------------------------------------------------
# local functionals modulo total derivatives

def _parents(bv: BvSpace, fs, exps):
    """Monomials whose total derivative can produce (fs, exps)."""
    out = []
    for pos, (kind, idx) in enumerate(fs):
        if kind in ("xd", "xdd"):
            if kind == "xd":
                # came from differentiating the coefficient
                out.append((fs[:pos] + fs[pos + 1:],
                            tuple(e + (1 if i == idx else 0)
                                  for i, e in enumerate(exps))))
            else:
                out.append((fs[:pos] + (("xd", idx),) + fs[pos + 1:], exps))
        elif kind in _UNDOT:
            out.append((fs[:pos] + ((_UNDOT[kind], idx),) + fs[pos + 1:], exps))
    return out


def _canon(bv: BvSpace, fs, exps):
    """Canonical polynomial for a possibly unsorted factor tuple (the Koszul
    sort is applied by multiplying the factors out; zero if an odd factor
    repeats)."""
    q = GradedPoly.from_coeff(bv.reg, BaseCoeff(bv.n, {exps: Fraction(1)}))
    for g in fs:
        q = q * GradedPoly.gen(bv.reg, *g)
    return q


def _mono_order_key(bv: BvSpace, key):
    fs, exps = key
    return (len(fs), tuple(bv.reg.sort_key(g) for g in fs), exps)


def _poly_vector(f: GradedPoly):
    out = {}
    for fs, c in f.monomials.items():
        for exps, val in c.terms.items():
            out[(fs, exps)] = val
    return out


def _vector_poly(bv: BvSpace, vec):
    mon = {}
    for (fs, exps), val in vec.items():
        if not val:
            continue
        c = mon.get(fs, BaseCoeff.zero(bv.n))
        mon[fs] = c + BaseCoeff(bv.n, {exps: val})
    return GradedPoly(bv.reg, mon)


def ibp_normal_form(bv: BvSpace, f: GradedPoly, row_shuffle=None) -> GradedPoly:
    """Reduce modulo the span of total derivatives of every monomial in the
    weight classes touched by f.  The reducing basis is brought to reduced
    echelon form under a fixed monomial order, so the result is canonical
    (row_shuffle, a random.Random, only permutes the rows fed to the
    echelonizer and must not change the result; the confluence test
    exercises exactly that)."""
    vec = _poly_vector(f)
    if not vec:
        return GradedPoly.zero(bv.reg)

    # closure: discover all reachable monomials and their IBP parents
    seen_monos = set(vec)
    seen_parents = set()
    rows = []
    frontier = list(vec)
    while frontier:
        fs, exps = frontier.pop()
        for pfs, pexps in _parents(bv, fs, exps):
            if any(kind.endswith("dd") for kind, _ in pfs):
                continue     # its total derivative would need a third dot
            canon = _canon(bv, pfs, pexps)
            if canon.is_zero():
                continue
            (cfs, cc), = canon.monomials.items()
            (cexps, _), = cc.terms.items()
            if (cfs, cexps) in seen_parents:
                continue
            seen_parents.add((cfs, cexps))
            row = total_derivative(bv, canon)
            rvec = _poly_vector(row)
            if not rvec:
                continue
            rows.append(rvec)
            for key in rvec:
                if key not in seen_monos:
                    seen_monos.add(key)
                    frontier.append(key)

    if row_shuffle is not None:
        row_shuffle.shuffle(rows)

    # reduced echelon basis keyed by leading monomial
    order = lambda k: _mono_order_key(bv, k)
    pivots: dict = {}

    def reduce_vec(v):
        v = dict(v)
        changed = True
        while changed:
            changed = False
            for key in sorted(v, key=order):
                if not v[key]:
                    del v[key]
                    continue
                piv = pivots.get(key)
                if piv is None:
                    continue
                coef = v[key]
                for k2, c2 in piv.items():
                    v[k2] = v.get(k2, Fraction(0)) - coef * c2
                    if not v[k2]:
                        del v[k2]
                changed = True
                break
        return v

    for row in rows:
        row = reduce_vec(row)
        if not row:
            continue
        lead = min(row, key=order)
        inv = 1 / row[lead]
        row = {k: c * inv for k, c in row.items()}
        # back-reduce existing pivots against the new row
        for lk, pv in list(pivots.items()):
            c = pv.get(lead)
            if c:
                for k2, c2 in row.items():
                    pv[k2] = pv.get(k2, Fraction(0)) - c * c2
                    if not pv[k2]:
                        del pv[k2]
        pivots[lead] = row

    return _vector_poly(bv, reduce_vec(vec))


def euler_lagrange(bv: BvSpace, f: GradedPoly, side: str = "left") -> dict:
    """EL_z(f) = d f / d z - D_t (d f / d z-dot) for every field z and for x.
    Complete on first-derivative densities: all components vanish and the
    field-free constant term is zero iff f is a total derivative.  Densities
    with second derivatives are rejected (the formula would need a D_t^2 term
    and third-derivative symbols); reduce them with ibp_normal_form instead."""
    for fs in f.monomials:
        if any(kind.endswith("dd") for kind, _ in fs):
            raise ValueError("Euler-Lagrange test is implemented for densities "
                             "with first t-derivatives only")
    out = {}
    for i in range(bv.n):
        out[("x", i)] = f.partial_x(i) - total_derivative(bv, f.derive(("xd", i), side))
    for name, _ in _FIELDS:
        for idx in range(bv.reg.count(name)):
            out[(name, idx)] = f.derive((name, idx), side) \
                - total_derivative(bv, f.derive((_DOT[name], idx), side))
    return out


@dataclass
class LocalFunctional:
    """A density over a BvSpace, compared modulo total t-derivatives."""

    bv: BvSpace
    density: GradedPoly

    def __post_init__(self):
        if self.density.reg is not self.bv.reg:
            raise ValueError("density not built over this field algebra")

    def normal_form(self) -> GradedPoly:
        return ibp_normal_form(self.bv, self.density)

    def is_null(self) -> bool:
        return self.normal_form().is_zero()

    def __eq__(self, other):
        if isinstance(other, LocalFunctional):
            if other.bv is not self.bv:
                raise ValueError("functionals over different field algebras")
            other = other.density
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return ibp_normal_form(self.bv, self.density - other).is_zero()

    def substituted(self, images: dict) -> "LocalFunctional":
        return LocalFunctional(self.bv, substitute_fields(self.bv, self.density, images))


def substitute_fields(bv: BvSpace, f: GradedPoly, images: dict) -> GradedPoly:
    """Algebra endomorphism: generators in `images` are replaced, others kept."""
    out = GradedPoly.zero(bv.reg)
    for fs, c in f.monomials.items():
        m = bv.coeff(c)
        for g in fs:
            m = m * images.get(g, GradedPoly.gen(bv.reg, *g))
        out = out + m
    return out


def _zero_images(bv: BvSpace, kinds):
    images = {}
    z = GradedPoly.zero(bv.reg)
    for kind in kinds:
        for variant in (kind, _DOT[kind], _DOT[_DOT[kind]]):
            for idx in range(bv.reg.count(variant)):
                images[(variant, idx)] = z
    return images


# ---------------------------------------------------------------------------
# the BV action

@dataclass
class BvData:
    """The BV action with its field algebra and the twist data that shape
    the antibracket (B = dA enters the antifield pairing when nonzero)."""

    space: BvSpace
    action: LocalFunctional
    A: list | None = None


def build_s_bv(ps: PhaseSpace, S_bfv: GradedPoly, H_bfv: GradedPoly,
               A=None) -> BvData:
    """Berezin integral of theta_I(Z) dZ^I - S_BFV(Z) - theta H_BFV(Z).

    The Liouville form theta = (p - A) dx - (1/2) k eta d eta is checked to
    satisfy omega = -delta(theta) against the bracket table (this requires the
    phase-space twist to equal dA and k to be constant)."""
    liouville_exactness_check(ps, A)
    bv = BvSpace(ps)
    th = bv.theta()
    sf = superfield_extend(ps, bv)
    kinetic = GradedPoly.zero(bv.reg)
    for i in range(bv.n):
        dX = total_derivative(bv, sf.X[i]) * th
        lead = sf.P[i]
        if A is not None and not A[i].is_zero():
            AX = bv.coeff(A[i])
            for j in range(bv.n):
                dc = A[i].diff(j)
                if not dc.is_zero():
                    AX = AX + th * bv.gen("ps", j) * bv.coeff(dc)
            lead = lead - AX
        kinetic = kinetic + lead * dX
    for a in range(bv.r):
        dY = total_derivative(bv, sf.Y[a]) * th
        for b in range(bv.r):
            if not bv.k[a][b].is_zero():
                kinetic = kinetic - (bv.coeff(bv.k[a][b]) * sf.Y[b]
                                     * dY).scale(Fraction(1, 2))
    integrand = kinetic - substitute_superfields(bv, S_bfv) \
        - th * substitute_superfields(bv, H_bfv)
    density = berezin_integrate(bv, integrand)
    return BvData(bv, LocalFunctional(bv, density), A)


def classical_limit(data: BvData) -> LocalFunctional:
    """Antifields and ghosts to zero (the multiplier lam survives)."""
    return data.action.substituted(_zero_images(data.space, ("eta", "xs", "ps")))


def antifield_free_part(data: BvData, f: LocalFunctional | None = None) -> LocalFunctional:
    f = f if f is not None else data.action
    return f.substituted(_zero_images(data.space, ("xs", "ps")))


# ---------------------------------------------------------------------------
# antibracket and master equation

def _el_pair(bv, f, g, fgen, ggen, weight, sign, out):
    df = _el_single(bv, f, fgen, "right")
    if df.is_zero():
        return out
    dg = _el_single(bv, g, ggen, "left")
    if dg.is_zero():
        return out
    term = df * bv.coeff(weight) * dg if weight is not None else df * dg
    return out + (term if sign > 0 else -term)


def _el_single(bv, f, gen, side):
    kind, idx = gen
    if kind == "x":
        d0 = f.partial_x(idx)
        d1 = f.derive(("xd", idx), side)
    else:
        d0 = f.derive(gen, side)
        d1 = f.derive((_DOT[kind], idx), side)
    if d1.is_zero():
        return d0
    return d0 - total_derivative(bv, d1)


def _antibracket_canonical(bv: BvSpace, f: GradedPoly, g: GradedPoly) -> GradedPoly:
    # Sector signs (+1,-1) for (x,xs) and (p,ps), (-1,+1) for (eta,lam) are
    # pinned jointly by: (x, xs) pairing = +delta, master residual = 0 on the
    # standard Courant model and on the x-flux model with its quartic form,
    # and master residual != 0 on an equivariance-breaking perturbation.
    out = GradedPoly.zero(bv.reg)
    for i in range(bv.n):
        out = _el_pair(bv, f, g, ("x", i), ("xs", i), None, +1, out)
        out = _el_pair(bv, f, g, ("xs", i), ("x", i), None, -1, out)
        out = _el_pair(bv, f, g, ("p", i), ("ps", i), None, +1, out)
        out = _el_pair(bv, f, g, ("ps", i), ("p", i), None, -1, out)
    for a in range(bv.r):
        for b in range(bv.r):
            kab = bv.k_inv[a][b]
            if kab.is_zero():
                continue
            out = _el_pair(bv, f, g, ("eta", a), ("lam", b), kab, -1, out)
            out = _el_pair(bv, f, g, ("lam", a), ("eta", b), kab, +1, out)
    return out


def _twist_conjugations(bv: BvSpace):
    """xs -> xs +/- B ps as mutually inverse endomorphisms (dB = 0).

    The direction (+B ps into the Darboux frame) is pinned by the reduction
    identity (S_BV, S_BV) = int dtheta {S,S}(Z) - 2 {S,H} modulo total
    derivatives, checked on the twisted rotation-invariant model; the opposite
    direction leaves uncancelled anchor terms there."""
    def images(sign):
        img = {}
        for i in range(bv.n):
            shift = GradedPoly.zero(bv.reg)
            for j in range(bv.n):
                if not bv.twist[i][j].is_zero():
                    shift = shift + bv.coeff(bv.twist[i][j]) * bv.gen("ps", j)
            if shift.is_zero():
                continue
            img[("xs", i)] = bv.gen("xs", i) + shift.scale(sign)
            dshift = total_derivative(bv, shift)
            img[("xsd", i)] = bv.gen("xsd", i) + dshift.scale(sign)
        return img
    return images(Fraction(1)), images(Fraction(-1))


def antibracket(data: BvData, f: LocalFunctional, g: LocalFunctional) -> LocalFunctional:
    """The odd variational bracket; field-dependent antifield pairing terms of
    a twisted phase space are produced by the Darboux conjugation."""
    bv = data.space
    if bv.twist is None or tensors.tensor_is_zero(bv.twist):
        return LocalFunctional(bv, _antibracket_canonical(bv, f.density, g.density))
    fwd, back = _twist_conjugations(bv)
    fd = substitute_fields(bv, f.density, fwd)
    gd = substitute_fields(bv, g.density, fwd)
    res = _antibracket_canonical(bv, fd, gd)
    return LocalFunctional(bv, substitute_fields(bv, res, back))


def master_equation_residual(data: BvData) -> LocalFunctional:
    """(S_BV, S_BV) modulo total derivatives; vanishes whenever the three
    BFV bracket residuals vanish."""
    return antibracket(data, data.action, data.action)


def bfv_residual_extension(data: BvData, r1: GradedPoly, r2: GradedPoly) -> LocalFunctional:
    """The reduction of the master residual to phase-space data:

        (S_BV, S_BV) = int dtheta {S,S}(Z) - 2 {S,H}   mod total derivatives,

    so the returned functional equals master_equation_residual on every model
    (and makes the soundness claim manifest: zero whenever r1 = r2 = 0)."""
    bv = data.space
    ext = berezin_integrate(bv, substitute_superfields(bv, r1))
    return LocalFunctional(bv, ext - bv.from_bfv(r2).scale(2))
