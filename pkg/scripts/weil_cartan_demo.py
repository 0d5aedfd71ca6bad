#!/usr/bin/env python3
"""Demonstrate the differential calculus on a quadratic Lie algebra model.

Shows the Weil-type differential, contraction and Lie derivative for a
basis section, the Cartan-model differential on second-factor coordinates,
and the agreement of the truncated conjugation operator with the Cartan
differential on basic representatives.
"""

from courantkit.basecoeff import BaseCoeff
from courantkit.weil import CartanSpace, WeilSpace, \
    cartan_magic_residual, weil_d

from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from helpers import so3_quadratic  # noqa: E402


def main():
    cd = so3_quadratic()
    ws = WeilSpace(cd)
    d = weil_d(ws)

    print("== differential on generators ==")
    for label, t in [("eta^1", ws.gen("eta", 0)),
                     ("F_eta^1", ws.gen("Feta", 0))]:
        print(f"  d {label:8s} = {d(t)}")

    e1 = [BaseCoeff.const(cd.n, 1 if b == 0 else 0) for b in range(cd.r)]
    print("== magic formula for the basis section e_1 ==")
    for label, t in [("eta^2", ws.gen("eta", 1)), ("x", ws.x(0))]:
        res = cartan_magic_residual(ws, e1, t, d=d)
        print(f"  (L_e - [iota_e, d]) {label} = {res}   (zero = exact)")

    cs = CartanSpace(ws)
    dc = cs.cartan_d()
    print("== Cartan differential on second-factor coordinates ==")
    for label, t in [("x_B", cs.gen("xB", 0)), ("p_B", cs.gen("pB", 0))]:
        print(f"  d_C {label} = {dc(t)}")

    mq = cs.mq_conjugated_d()
    print("== truncated conjugation vs d_C on basic representatives ==")
    for label, t in [("x_B", cs.gen("xB", 0)),
                     ("x_B p_B", cs.gen("xB", 0) * cs.gen("pB", 0))]:
        diff = mq(t) - dc(t)
        print(f"  (conjugated D - d_C) {label} = {diff}   (zero = exact)")


if __name__ == "__main__":
    main()
