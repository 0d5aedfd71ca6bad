#!/usr/bin/env python3
"""Run every bundled model through every applicable check and summarize.

Usage: python scripts/run_all_models.py [--machine]

Exit status 0 means every model produced its expected verdict (negatives
are expected to fail their designated checks).
"""

import argparse
import contextlib
import importlib.resources
import io
import sys

from courantkit.cli import main as cli_main

# (subcommand, model file, expected exit code)
PLAN = [
    ("verify-courant", "standard_h0.spec", 0),
    ("verify-courant", "standard_const_h.spec", 0),
    ("verify-courant", "standard_nonclosed_h.spec", 1),
    ("verify-courant", "so3_quadratic.spec", 0),
    ("verify-courant", "so3_rot.spec", 1),
    ("check-momentum", "standard_h0.spec", 0),
    ("check-momentum", "standard_h0_bad_mu.spec", 1),
    ("check-momentum", "so2_angular_momentum.spec", 0),
    ("check-mechanics", "so3_rot.spec", 0),
    ("check-mechanics", "so2_angular_momentum.spec", 0),
    ("check-mechanics", "so2_noninv_V.spec", 1),
    ("bfv-check", "so3_quadratic.spec", 0),
    ("bfv-check", "so3_quadratic_bad_mu.spec", 1),
    ("bv-master", "so3_quadratic.spec", 0),
    ("bv-master", "standard_h0.spec", 0),
    ("weil-check", "so3_quadratic.spec", 0),
    ("weil-check", "so3_rot.spec", 1),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--machine", action="store_true",
                        help="print the full machine reports, not a summary")
    args = parser.parse_args()
    models = importlib.resources.files("courantkit") / "models"

    all_ok = True
    for cmd, name, expected in PLAN:
        argv = (["--machine"] if args.machine else []) \
            + [cmd, str(models / name)]
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = cli_main(argv)
        if args.machine:
            sys.stdout.write(buf.getvalue())
        ok = code == expected
        all_ok = all_ok and ok
        verdict = {0: "pass", 1: "FAIL"}.get(code, f"error({code})")
        note = "as expected" if ok else f"UNEXPECTED (wanted exit {expected})"
        print(f"{cmd:16s} {name:28s} {verdict:9s} {note}")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
