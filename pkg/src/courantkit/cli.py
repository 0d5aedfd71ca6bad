"""Command-line entry point orchestrating the checks on model files.

Subcommands (all take one or more model files; see doc/model_format.md):

  verify-courant   Courant axioms + exact vanishing of {Theta,Theta}
  check-momentum   (H1), (H2), (H3) and the classification verdict
  check-mechanics  full constrained-mechanics consistency report
  bfv-check        {S,S}, {S,H}, {H,H}; --solve-u solves the quartic form
  bv-expand        prints the BV action density (--classical: its limit)
  bv-master        master-equation residual modulo total derivatives
  weil-check       d^2, magic formula, bracket relations, Cartan d_C^2;
                   --with-momentum adds the deformed differential

Global flags: --machine (byte-stable report format), --jobs N (worker pool
for independent checks), --max-degree D (bound for the linear U-solver).
Exit status: 0 all verdicts pass, 1 a check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import random
import sys
from concurrent.futures import ThreadPoolExecutor

from .basecoeff import BaseCoeff
from .bfv import (bfv_residuals, build_h_bfv, build_s_bfv_covariant,
                  solve_u_linear)
from .bv_fhgd import build_s_bv, classical_limit, master_equation_residual
from .courant import theta_square, verify_courant_axioms
from .mechanics import absorb_beta, full_consistency
from .momentum import check_H1, check_H2, check_H3, classify
from .report import CheckRecord, Report
from .spec_io import ModelSpec, SpecError, emit_report, parse_spec
from . import tensors
from .weil import (CartanSpace, WeilSpace, cartan_magic_residual,
                   check_bracket_relations, deformed_weil_d, weil_d)


def _basis_sections(n, r):
    return [[BaseCoeff.const(n, 1 if a == b else 0) for b in range(r)]
            for a in range(r)]


def _primed_chart(spec: ModelSpec):
    """(mu, presymp, V_prime): direct data, or absorbed from beta."""
    if spec.has("beta"):
        absorbed = absorb_beta(spec.courant(), spec.mechanics())
        return absorbed.mu, absorbed.presymp, absorbed.V_prime
    return spec.block("mu"), spec.presymplectic(), spec.block("V")


def _bfv_pair(spec: ModelSpec):
    cd = spec.courant()
    conn = spec.connection()
    g = spec.metric()
    mu, presymp, v_prime = _primed_chart(spec)
    twist = presymp.B if not tensors.tensor_is_zero(presymp.B) else None
    ps = cd.phase_space(twist=twist)
    mu_arg = None if tensors.tensor_is_zero(mu) else mu
    S = build_s_bfv_covariant(cd, conn, ps, mu=mu_arg)
    U = spec.blocks.get("U")
    H = build_h_bfv(cd, conn, g, ps, V_prime=v_prime, U=U)
    return cd, conn, g, ps, S, H, presymp


# ---------------------------------------------------------------------------
# subcommand handlers: spec -> list of report thunks

def _cmd_verify_courant(spec, args):
    def run():
        cd = spec.courant()
        rep = verify_courant_axioms(cd)
        rep.add(CheckRecord.from_residuals(
            "courant.theta-square", "{Theta, Theta} = 0",
            {"res": theta_square(cd)}))
        rep.title = "verify-courant"
        return rep
    return [run]


def _cmd_check_momentum(spec, args):
    def run():
        cd = spec.courant()
        conn = spec.connection()
        mu, presymp, _ = _primed_chart(spec)
        rep = Report(title="check-momentum")
        rep.add(check_H1(cd, conn, presymp).record("momentum.H1"))
        rep.add(check_H2(cd, conn, presymp, mu).record("momentum.H2"))
        h3 = check_H3(cd, conn, presymp, mu)
        rep.add(h3.record("momentum.H3"))
        rep.add(h3.record("momentum.H3-p-part"))
        verdict, anchored = classify(cd, conn, presymp, mu)
        info = CheckRecord(name="momentum.classify",
                           subject=f"classification: {verdict}"
                                   f"{', anchored' if anchored else ''}")
        rep.add(info)
        return rep
    return [run]


def _cmd_check_mechanics(spec, args):
    def run():
        rep = full_consistency(spec.courant(), spec.connection(),
                               spec.mechanics())
        rep.title = "check-mechanics"
        return rep
    return [run]


def _cmd_bfv_check(spec, args):
    def run():
        cd, conn, g, ps, S, H, _ = _bfv_pair(spec)
        r1, r2, r3 = bfv_residuals(ps, S, H)
        rep = Report(title="bfv-check")
        rep.add(CheckRecord.from_residuals("bfv.S-S", "{S, S} = 0", {"res": r1}))
        rep.add(CheckRecord.from_residuals("bfv.S-H", "{S, H} = 0", {"res": r2}))
        rep.add(CheckRecord.from_residuals("bfv.H-H", "{H, H} = 0", {"res": r3}))
        if args.solve_u:
            sol = solve_u_linear(cd, conn, g, max_degree=args.max_degree)
            if sol.feasible:
                rep.add(CheckRecord(name="bfv.u-solve",
                                    subject="first quartic-form equation "
                                            "solved exactly for U"))
                rep.add(CheckRecord.from_residuals(
                    "bfv.u-res2", "second quartic-form equation at the "
                    "solved U", {"res": sol.res2}))
            else:
                rec = CheckRecord(name="bfv.u-solve",
                                  subject="first quartic-form equation is "
                                          "inconsistent",
                                  entries=[("certificate", sol.certificate)],
                                  passed=False)
                rep.add(rec)
        return rep
    return [run]


def _cmd_bv_expand(spec, args):
    def run():
        _, _, _, ps, S, H, presymp = _bfv_pair(spec)
        A = presymp.A if not tensors.tensor_is_zero(presymp.A) else None
        data = build_s_bv(ps, S, H, A=A)
        rep = Report(title="bv-expand")
        if args.classical:
            rec = CheckRecord(name="bv.classical-density",
                              subject="classical limit of the BV density "
                                      "(antifields and ghosts to zero)")
            rec.entries = [("density", str(classical_limit(data).density))]
        else:
            rec = CheckRecord(name="bv.density", subject="BV action density")
            rec.entries = [("density", str(data.action.density))]
        rep.add(rec)
        return rep
    return [run]


def _cmd_bv_master(spec, args):
    def run():
        _, _, _, ps, S, H, presymp = _bfv_pair(spec)
        A = presymp.A if not tensors.tensor_is_zero(presymp.A) else None
        data = build_s_bv(ps, S, H, A=A)
        res = master_equation_residual(data)
        rep = Report(title="bv-master")
        rep.add(CheckRecord.from_residuals(
            "bv.master", "(S_BV, S_BV) = 0 modulo total derivatives",
            {"res": res.normal_form()}))
        return rep
    return [run]


def _cmd_weil_check(spec, args):
    def run():
        cd = spec.courant()
        rep = Report(title="weil-check")
        try:
            ws = WeilSpace(cd)
            d = weil_d(ws)
        except ValueError as exc:
            rep.add(CheckRecord(name="weil.homological", subject=str(exc),
                                passed=False))
            return rep
        elements = [ws.x(i) for i in range(ws.n)] + \
            [ws.gen(*g) for g in ws.reg.all_gens()]
        rep.add(CheckRecord.from_residuals(
            "weil.d-squared", "d^2 = 0 on every generator",
            {"res": [d(d(g)) for g in elements]}))
        secs = _basis_sections(cd.n, cd.r)
        rep.add(CheckRecord.from_residuals(
            "weil.magic", "L_e = [iota_e, d] on every generator",
            {"res": [[cartan_magic_residual(ws, e, f, d=d) for f in elements]
                     for e in secs]}))
        for rec in check_bracket_relations(ws, secs,
                                           rng=random.Random(0)).records:
            rep.add(rec)
        cs = CartanSpace(ws)
        cands = [cs.gen("xB", i) for i in range(cd.n)] + \
            [cs.gen("pB", i) for i in range(cd.n)]
        basic = [t for t in cands
                 if all(cs.iota_total(e)(t).is_zero()
                        and cs.lie_total(e)(t).is_zero() for e in secs)]
        dc = cs.cartan_d()
        rep.add(CheckRecord.from_residuals(
            "weil.cartan-d-squared",
            f"d_C^2 = 0 on the {len(basic)} basic generator(s)",
            {"res": [dc(dc(t)) for t in basic]}))
        if args.with_momentum:
            mu, presymp, _ = _primed_chart(spec)
            wsm = WeilSpace(cd, mu=mu)
            dp = deformed_weil_d(wsm)
            elements_m = [wsm.x(i) for i in range(wsm.n)] + \
                [wsm.gen(*g) for g in wsm.reg.all_gens()]
            rep.add(CheckRecord.from_residuals(
                "weil.deformed-d-squared", "d'^2 = 0 on every generator",
                {"res": [dp(dp(g)) for g in elements_m]}))
            conn = spec.connection()
            rep.add(check_H2(cd, conn, presymp, mu).record("momentum.H2"))
            rep.add(check_H3(cd, conn, presymp, mu).record("momentum.H3"))
        return rep
    return [run]


_COMMANDS = {
    "verify-courant": _cmd_verify_courant,
    "check-momentum": _cmd_check_momentum,
    "check-mechanics": _cmd_check_mechanics,
    "bfv-check": _cmd_bfv_check,
    "bv-expand": _cmd_bv_expand,
    "bv-master": _cmd_bv_master,
    "weil-check": _cmd_weil_check,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="courantkit",
        description="Exact symbolic checks on Courant-algebroid model files.")
    parser.add_argument("--machine", action="store_true",
                        help="emit the byte-stable machine report format")
    parser.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="worker pool size for independent checks")
    parser.add_argument("--max-degree", type=int, default=None, metavar="D",
                        help="polynomial degree bound for the U-solver")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("paths", nargs="+", metavar="MODEL.spec")
        if name == "bfv-check":
            p.add_argument("--solve-u", action="store_true")
        if name == "bv-expand":
            p.add_argument("--classical", action="store_true")
        if name == "weil-check":
            p.add_argument("--with-momentum", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = _COMMANDS[args.command]
    thunks = []
    try:
        for path in args.paths:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
            spec = parse_spec(text)
            for thunk in handler(spec, args):
                thunks.append((path, thunk))
    except (OSError, SpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    jobs = max(1, args.jobs)
    try:
        if jobs == 1:
            reports = [(path, thunk()) for path, thunk in thunks]
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [(path, pool.submit(thunk)) for path, thunk in thunks]
                reports = [(path, fut.result()) for path, fut in futures]
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    all_passed = True
    fmt = "machine" if args.machine else "human"
    out = []
    for path, rep in reports:
        rep.title = f"{rep.title} {path}"
        out.append(emit_report(rep, fmt))
        all_passed = all_passed and rep.passed
    sys.stdout.write("".join(out))
    return 0 if all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
