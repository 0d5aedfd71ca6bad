"""Weil-algebra calculus on the tangent prolongation of the graded phase space.

The graded phase space with coordinates (x, eta, p) of degree (0, 1, 2) is
prolonged by tangent generators (F_x, F_eta, F_p) of degree (1, 2, 3), one
for each coordinate.  On functions of the prolonged space three derivations
are defined from the homological charge Theta (Q = {Theta, -}):

    d e      = F_e + Q e            on base coordinates e,
    d F_e    = -delta(Q e)          on tangent generators,
    iota_e f = {e, f}               on base coordinates,
    iota_e F_g = (-1)^{|e|} delta({e, g}),
    L_e f    = {{e, Theta}, f}      on base coordinates,
    L_e F_g  = -(-1)^{|e|} delta({{e, Theta}, g}),

where delta is the tangent map (the derivation e -> F_e, F -> 0).  The
tangent-rule signs are the unique choice (verified by exhaustive scan) under
which d^2 = 0 whenever {Theta, Theta} = 0 and the Cartan magic formula holds
in its graded-commutator form

    L_e = iota_e d - (-1)^{|e|} d iota_e = [iota_e, d]

(iota_e has degree |e| - 2, so (-1)^{|iota_e|} = (-1)^{|e|}; for a section,
|e| = 1, this is the anticommutator of the two odd operators).  (d, iota, L)
close into a graded Lie algebra whose L-bracket on section symbols is the
Dorfman bracket.

Supplying the inhomogeneous charge (mu term) deforms d exactly as the
momentum-section displays predict; d'^2 = 0 if and only if the momentum
section conditions hold, which the deformed operator makes checkable on any
model.

The Cartan model lives on W tensor B where B is a second copy of the
polynomial algebra on the phase-space coordinates (kinds xB, etaB, pB).  The
equivariant differential is d_C = 1 tensor d - A with the curvature term

    A = sum_i F_x^i iota^B_{p_i} + sum_i F_p_i iota^B_{x^i}
        + 1/2 sum_{ab} k_{ab} F_eta^a iota^B_{eta^b}

(the tangent generator of each coordinate paired with the interior product
along its symplectically dual coordinate).  The Mathai-Quillen generator
h tensor iota is the even, degree-0 derivation with the base coordinates in
place of their tangent generators,

    G = sum_i x^i iota^B_{p_i} + sum_i p_i iota^B_{x^i}
        + 1/2 sum_{ab} k_{ab} eta^a iota^B_{eta^b},

and the truncated adjoint expansion D + [G, D] + 1/2 [G, [G, D]] of the
conjugation phi D phi^{-1}, phi = exp(G), D = d tensor 1 + 1 tensor d,
reproduces d_C exactly on basic representatives ([G, [G, [G, D]]] vanishes
there; off the basic subspace the leftover is the expected theta tensor L
term).  d_C^2 = 0 on basic representatives; off the basic subspace it equals
the curvature-weighted Lie action and need not vanish.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .basecoeff import BaseCoeff
from .bfv import build_s_bfv
from .courant import CourantData, section_components, section_function
from .graded_algebra import Derivation, GradedPoly, Registry
from .graded_poisson import PhaseSpace, poisson_bracket
from .report import CheckRecord, Report

_BASE = (("eta", 1), ("p", 2))
_TANGENT = {"x": "Fx", "eta": "Feta", "p": "Fp"}


class WeilSpace:
    """Prolonged registry, charge and tangent map for one model."""

    def __init__(self, cd: CourantData, ps: PhaseSpace | None = None, mu=None):
        self.cd = cd
        self.ps = ps or PhaseSpace(cd.n, cd.r, cd.k)
        self.mu = mu
        self.theta = build_s_bfv(cd, self.ps, mu=mu)
        self.n, self.r = cd.n, cd.r
        reg = Registry(self.n)
        # base kinds first, mirroring the phase-space registration order so
        # phase-space monomial keys stay canonical under re-keying
        reg.register("eta", 1, self.r)
        reg.register("p", 2, self.n)
        reg.register("Fx", 1, self.n)
        reg.register("Feta", 2, self.r)
        reg.register("Fp", 3, self.n)
        self.reg = reg
        self.tangent_map = Derivation(
            reg, 1,
            images={**{("eta", a): self.gen("Feta", a) for a in range(self.r)},
                    **{("p", i): self.gen("Fp", i) for i in range(self.n)}},
            x_images=[self.gen("Fx", i) for i in range(self.n)])

    def gen(self, kind, idx):
        return GradedPoly.gen(self.reg, kind, idx)

    def x(self, i):
        return GradedPoly.x(self.reg, i)

    def coeff(self, c: BaseCoeff) -> GradedPoly:
        return GradedPoly.from_coeff(self.reg, c)

    def scalar(self, c) -> GradedPoly:
        return GradedPoly.scalar(self.reg, c)

    def to_weil(self, f: GradedPoly) -> GradedPoly:
        """Re-express a phase-space polynomial over the prolonged registry."""
        if f.reg is not self.ps.reg:
            raise ValueError("polynomial not built over the underlying phase space")
        return GradedPoly(self.reg, dict(f.monomials))

    def section(self, e) -> GradedPoly:
        """Degree-1 phase-space symbol of a section component vector."""
        return section_function(self.cd, e, self.ps)

    def _coerce_base(self, e) -> GradedPoly:
        if isinstance(e, GradedPoly):
            if e.reg is not self.ps.reg:
                raise ValueError("element not built over the underlying phase space")
            return e
        return self.section(e)

    def q_of(self, g: GradedPoly) -> GradedPoly:
        """Q g = {Theta, g} as a phase-space polynomial."""
        return poisson_bracket(self.ps, self.theta, g)

    def base_gens(self):
        """(label-poly pairs) of all base coordinates, x included."""
        out = [(("x", i), self.ps.x(i)) for i in range(self.n)]
        out += [(g, GradedPoly.gen(self.ps.reg, *g)) for g in self.ps.reg.all_gens()]
        return out


def weil_d(ws: WeilSpace, f: GradedPoly | None = None, check: bool = True):
    """The Weil differential; raises if the charge is not homological."""
    if check:
        tt = poisson_bracket(ws.ps, ws.theta, ws.theta)
        if not tt.is_zero():
            raise ValueError("charge is not homological: {Theta,Theta} != 0")
    images = {}
    x_images = []
    for label, g in ws.base_gens():
        kind, idx = label
        q = ws.to_weil(ws.q_of(g))
        if kind == "x":
            x_images.append(ws.gen("Fx", idx) + q)
        else:
            images[label] = ws.gen(_TANGENT[kind], idx) + q
        images[(_TANGENT[kind], idx)] = -ws.tangent_map(q)
    d = Derivation(ws.reg, 1, images=images, x_images=x_images)
    return d if f is None else d(f)


def deformed_weil_d(ws: WeilSpace, f: GradedPoly | None = None):
    """The momentum-section deformation: the same construction driven by the
    inhomogeneous charge, without requiring {Theta,Theta} = 0, so that
    d'^2 = 0 can be *tested* (it holds iff mu is a momentum section)."""
    return weil_d(ws, f, check=False)


def weil_iota(ws: WeilSpace, e, f: GradedPoly | None = None):
    """Interior product iota_e = {e, -} with the horizontal tangent rule."""
    ef = ws._coerce_base(e)
    deg = ef.degree()
    if deg is None:
        raise ValueError("iota needs a homogeneous argument")
    sgn = 1 if deg % 2 == 0 else -1            # (-1)^{|e|}
    images = {}
    x_images = []
    for label, g in ws.base_gens():
        kind, idx = label
        br = ws.to_weil(poisson_bracket(ws.ps, ef, g))
        if kind == "x":
            x_images.append(br)
        else:
            images[label] = br
        images[(_TANGENT[kind], idx)] = ws.tangent_map(br).scale(sgn)
    op = Derivation(ws.reg, deg - 2, images=images, x_images=x_images)
    return op if f is None else op(f)


def weil_lie(ws: WeilSpace, e, f: GradedPoly | None = None):
    """Lie derivative L_e = {{e, Theta}, -} with the tangent rule."""
    ef = ws._coerce_base(e)
    deg = ef.degree()
    if deg is None:
        raise ValueError("Lie derivative needs a homogeneous argument")
    ham = poisson_bracket(ws.ps, ef, ws.theta)
    sgn = -1 if deg % 2 == 0 else 1            # -(-1)^{|e|}
    images = {}
    x_images = []
    for label, g in ws.base_gens():
        kind, idx = label
        br = ws.to_weil(poisson_bracket(ws.ps, ham, g))
        if kind == "x":
            x_images.append(br)
        else:
            images[label] = br
        images[(_TANGENT[kind], idx)] = ws.tangent_map(br).scale(sgn)
    op = Derivation(ws.reg, deg - 1, images=images, x_images=x_images)
    return op if f is None else op(f)


def lie_on_section(ws: WeilSpace, e1, e2) -> list:
    """L_{e1} e2 on section symbols, returned as a component vector; equals
    the Dorfman bracket computed independently by the algebroid layer."""
    inner = poisson_bracket(
        ws.ps, poisson_bracket(ws.ps, ws.section(e1), ws.theta), ws.section(e2))
    return section_components(ws.cd, inner)


def cartan_magic_residual(ws: WeilSpace, e, f: GradedPoly,
                          d: Derivation | None = None) -> GradedPoly:
    """L_e f - (iota_e d - (-1)^{|e|} d iota_e) f: the graded-commutator
    magic formula [iota_e, d] (iota_e has degree |e| - 2)."""
    ef = ws._coerce_base(e)
    deg = ef.degree()
    d = d or weil_d(ws, check=False)
    i = weil_iota(ws, ef)
    sgn = -1 if deg % 2 == 0 else 1
    rhs = i(d(f)) + d(i(f)).scale(sgn)
    return weil_lie(ws, ef, f) - rhs


def _graded_commutator(a, b, pa: int, pb: int):
    """[a, b] = a b - (-1)^{pa pb} b a as a callable."""
    s = -1 if (pa * pb) % 2 else 1

    def op(f):
        return a(b(f)) - (b(a(f))).scale(s)
    return op


def _probe_elements(ws: WeilSpace, rng=None, samples: int = 6):
    """All generators plus (optionally) random degree-2 products."""
    out = [ws.x(i) for i in range(ws.n)]
    out += [ws.gen(*g) for g in ws.reg.all_gens()]
    if rng is not None:
        deg2 = []
        gens = [ws.gen(*g) for g in ws.reg.all_gens()]
        degs = [ws.reg.degree(g[0]) for g in ws.reg.all_gens()]
        pool1 = [g for g, d in zip(gens, degs) if d == 1]
        pool2 = [g for g, d in zip(gens, degs) if d == 2]
        for _ in range(samples):
            if pool2 and rng.random() < 0.5:
                c = BaseCoeff.var(ws.n, rng.randrange(ws.n))
                deg2.append(ws.coeff(c) * rng.choice(pool2))
            else:
                a, b = rng.choice(pool1), rng.choice(pool1)
                v = a * b
                if not v.is_zero():
                    deg2.append(v)
        out += deg2
    return out


def check_bracket_relations(ws: WeilSpace, sections, rng=None,
                            samples: int = 6) -> Report:
    """Graded Lie-algebra relations of (iota, L) over all pairs of the given
    sections, evaluated on every generator and on random degree-2 elements:

        [iota_{e1}, iota_{e2}] = iota_{{e1,e2}}
        [L_{e1}, iota_{e2}]    = iota_{L_{e1} e2}
        [L_{e1}, L_{e2}]       = L_{L_{e1} e2}

    (graded commutators with |iota_e| = |e| - 2 and |L_e| = |e| - 1; the
    mixed relation is stated L-first, its iota-first form picks up the
    graded-antisymmetry sign -(-1)^{|e2|(|e1|+1)}).
    """
    rep = Report(title="Weil operator bracket relations")
    targets = _probe_elements(ws, rng=rng, samples=samples)
    fns = [ws.section(e) for e in sections]
    for ai, e1 in enumerate(fns):
        for bi, e2 in enumerate(fns):
            i1, i2 = weil_iota(ws, e1), weil_iota(ws, e2)
            l1, l2 = weil_lie(ws, e1), weil_lie(ws, e2)
            p1, p2 = e1.degree(), e2.degree()
            ii = _graded_commutator(i1, i2, p1, p2)
            li = _graded_commutator(l1, i2, p1 - 1, p2)
            ll = _graded_commutator(l1, l2, p1 - 1, p2 - 1)
            le12 = poisson_bracket(
                ws.ps, poisson_bracket(ws.ps, e1, ws.theta), e2)
            rhs_ii = weil_iota(ws, poisson_bracket(ws.ps, e1, e2))
            rhs_li = weil_iota(ws, le12)
            rhs_ll = weil_lie(ws, le12)
            res = {
                "iota-iota": [ii(t) - rhs_ii(t) for t in targets],
                "lie-iota": [li(t) - rhs_li(t) for t in targets],
                "lie-lie": [ll(t) - rhs_ll(t) for t in targets],
            }
            for key, vals in res.items():
                rep.add(CheckRecord.from_residuals(
                    f"weil.{key}[{ai + 1},{bi + 1}]",
                    f"[{key}] relation for section pair ({ai + 1},{bi + 1})",
                    {key: vals}))
    return rep


# ---------------------------------------------------------------------------
# Cartan model


@dataclass
class CartanSpace:
    """W tensor B with B a second copy of the phase-space polynomials."""

    ws: WeilSpace

    def __post_init__(self):
        ws = self.ws
        reg = Registry(ws.n)
        reg.register("eta", 1, ws.r)
        reg.register("p", 2, ws.n)
        reg.register("Fx", 1, ws.n)
        reg.register("Feta", 2, ws.r)
        reg.register("Fp", 3, ws.n)
        reg.register("xB", 0, ws.n)
        reg.register("etaB", 1, ws.r)
        reg.register("pB", 2, ws.n)
        self.reg = reg

    def gen(self, kind, idx):
        return GradedPoly.gen(self.reg, kind, idx)

    def to_w(self, f: GradedPoly) -> GradedPoly:
        """Embed a Weil-factor polynomial (its x-dependence stays in the
        coefficients, which belong to the first factor)."""
        if f.reg is not self.ws.reg:
            raise ValueError("polynomial not built over the Weil factor")
        return GradedPoly(self.reg, dict(f.monomials))

    def to_b(self, f: GradedPoly) -> GradedPoly:
        """Embed a phase-space polynomial into the second factor: eta -> etaB,
        p -> pB, and every coefficient x^e becomes a product of xB gens."""
        if f.reg is not self.ws.ps.reg:
            raise ValueError("polynomial not built over the underlying phase space")
        out = GradedPoly.zero(self.reg)
        ren = {"eta": "etaB", "p": "pB"}
        for fs, c in f.monomials.items():
            head = GradedPoly(self.reg, {tuple((ren[k], i) for k, i in fs):
                                         BaseCoeff.one(self.reg.n)})
            for exps, q in c.terms.items():
                m = GradedPoly.scalar(self.reg, q)
                for i, e in enumerate(exps):
                    for _ in range(e):
                        m = m * self.gen("xB", i)
                out = out + m * head
        return out

    def _b_images(self, value_of):
        """Images on all B generators from a phase-space valued rule."""
        ws = self.ws
        images = {}
        for i in range(ws.n):
            images[("xB", i)] = value_of(ws.ps.x(i))
        for g in ws.ps.reg.all_gens():
            kind, idx = g
            images[({"eta": "etaB", "p": "pB"}[kind], idx)] = \
                value_of(GradedPoly.gen(ws.ps.reg, *g))
        return images

    def d_w(self) -> Derivation:
        """d tensor 1: the Weil differential acting on the first factor."""
        ws = self.ws
        base = weil_d(ws, check=False)
        images = {g: self.to_w(img) for g, img in base.images.items()}
        x_images = [self.to_w(v) for v in base.x_images]
        return Derivation(self.reg, 1, images=images, x_images=x_images)

    def d_b(self) -> Derivation:
        """1 tensor d: B carries the module action d_B = Q."""
        ws = self.ws
        return Derivation(self.reg, 1,
                          images=self._b_images(lambda g: self.to_b(ws.q_of(g))))

    def iota_b(self, e) -> Derivation:
        """1 tensor iota_e on the second factor."""
        ws = self.ws
        ef = ws._coerce_base(e)
        deg = ef.degree()
        return Derivation(self.reg, deg - 2, images=self._b_images(
            lambda g: self.to_b(poisson_bracket(ws.ps, ef, g))))

    def lie_b(self, e) -> Derivation:
        """1 tensor L_e on the second factor."""
        ws = self.ws
        ef = ws._coerce_base(e)
        ham = poisson_bracket(ws.ps, ef, ws.theta)
        return Derivation(self.reg, ef.degree() - 1, images=self._b_images(
            lambda g: self.to_b(poisson_bracket(ws.ps, ham, g))))

    def lie_total(self, e):
        """L_e tensor 1 + 1 tensor L_e (used for basicness checks)."""
        ws = self.ws
        lw = weil_lie(ws, e)
        images = {g: self.to_w(img) for g, img in lw.images.items()}
        x_images = [self.to_w(v) for v in lw.x_images]
        wpart = Derivation(self.reg, lw.degree, images=images, x_images=x_images)
        bpart = self.lie_b(e)

        def op(f):
            return wpart(f) + bpart(f)
        return op

    def iota_total(self, e):
        """iota_e tensor 1 + 1 tensor iota_e."""
        ws = self.ws
        iw = weil_iota(ws, e)
        images = {g: self.to_w(img) for g, img in iw.images.items()}
        x_images = [self.to_w(v) for v in iw.x_images]
        wpart = Derivation(self.reg, iw.degree, images=images, x_images=x_images)
        bpart = self.iota_b(e)

        def op(f):
            return wpart(f) + bpart(f)
        return op

    def curvature_contraction(self) -> Derivation:
        """Each tangent generator of the first factor paired with the
        interior product along its symplectic dual on the second; this is the
        degree-1 correction term appearing in the equivariant differential."""
        ws = self.ws

        def value_of(g):
            out = GradedPoly.zero(self.reg)
            for i in range(ws.n):
                out = out + self.gen("Fx", i) * self.to_b(
                    poisson_bracket(ws.ps, ws.ps.p(i), g))
                out = out + self.gen("Fp", i) * self.to_b(
                    poisson_bracket(ws.ps, ws.ps.x(i), g))
            for a in range(ws.r):
                for b in range(ws.r):
                    kab = ws.cd.k[a][b]
                    if kab.is_zero():
                        continue
                    out = out + (self.gen("Feta", a) * self.to_b(
                        poisson_bracket(ws.ps, ws.ps.eta(b), g))
                        * GradedPoly.from_coeff(self.reg, kab)).scale(Fraction(1, 2))
            return out

        return Derivation(self.reg, 1, images=self._b_images(value_of))

    def cartan_d(self) -> Derivation:
        """d_C = 1 tensor d minus the tangent-generator contraction term:
        acts on the second factor with curvature corrections from the first."""
        db = self.d_b()
        corr = self.curvature_contraction()
        images = {g: db.images.get(g, GradedPoly.zero(self.reg))
                  - corr.images.get(g, GradedPoly.zero(self.reg))
                  for g in set(db.images) | set(corr.images)}
        return Derivation(self.reg, 1, images=images)

    def mq_generator(self) -> Derivation:
        """h tensor iota: each base generator of the first factor paired with
        the interior product along its symplectic dual on the second (degree
        0, so the conjugation below preserves degree).  The eta term carries
        the same 1/2 k-weight as the contraction term of d_C."""
        ws = self.ws

        def value_of(g):
            out = GradedPoly.zero(self.reg)
            for i in range(ws.n):
                xw = GradedPoly.from_coeff(self.reg, BaseCoeff.var(ws.n, i))
                out = out + xw * self.to_b(
                    poisson_bracket(ws.ps, ws.ps.p(i), g))
                out = out + self.gen("p", i) * self.to_b(
                    poisson_bracket(ws.ps, ws.ps.x(i), g))
            for a in range(ws.r):
                for b in range(ws.r):
                    kab = ws.cd.k[a][b]
                    if kab.is_zero():
                        continue
                    out = out + (self.gen("eta", a) * self.to_b(
                        poisson_bracket(ws.ps, ws.ps.eta(b), g))
                        * GradedPoly.from_coeff(self.reg, kab)
                        ).scale(Fraction(1, 2))
            return out

        return Derivation(self.reg, 0, images=self._b_images(value_of))

    def mq_conjugated_d(self):
        """Truncated adjoint expansion phi D phi^{-1} with phi = exp(G),
        G = h tensor iota (even, degree 0), D = d tensor 1 + 1 tensor d:
        D + [G, D] + 1/2 [G, [G, D]].  The next adjoint term vanishes, and
        the truncation agrees with cartan_d on basic elements."""
        g_op = self.mq_generator()
        dw, db = self.d_w(), self.d_b()

        def big_d(f):
            return dw(f) + db(f)

        def ad1(f):             # [G, D], G even: commutator
            return g_op(big_d(f)) - big_d(g_op(f))

        def ad2(f):             # [G, [G, D]]
            return g_op(ad1(f)) - ad1(g_op(f))

        def op(f):
            return big_d(f) + ad1(f) + ad2(f).scale(Fraction(1, 2))
        return op
