"""Convert Netlib problems stored as ``.npz`` arrays into free-format MPS.

The input files hold ``c``, ``A_ub``, ``b_ub``, ``A_eq``, ``b_eq`` and an
optimal objective ``obj``; all variables are nonnegative. Inequality rows are
written as ``L`` rows and equality rows as ``E`` rows.

    python3 scripts/netlib_npz_to_mps.py SRC_DIR OUT_DIR afiro adlittle ...
"""

import argparse
import os

import numpy as np

from innerlp.mps import LpProblem, write_mps
from innerlp.sparse import CsrMatrix


def convert(npz_path, name):
    d = np.load(npz_path)
    if d["bounds"].size:
        raise SystemExit(f"{name}: explicit bounds are not handled by this script")
    blocks = [(d["A_ub"], d["b_ub"], "L"), (d["A_eq"], d["b_eq"], "E")]
    blocks = [(np.atleast_2d(A), b, t) for A, b, t in blocks if np.size(b)]
    A = np.vstack([A for A, _, _ in blocks])
    b = np.concatenate([b for _, b, _ in blocks])
    types = [t for A, _, t in blocks for _ in range(A.shape[0])]
    prob = LpProblem(CsrMatrix.from_dense(A), b, d["c"], types, name=name.upper())
    return prob, float(d["obj"])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("src")
    ap.add_argument("out")
    ap.add_argument("names", nargs="+")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for name in args.names:
        prob, obj = convert(os.path.join(args.src, name.upper() + ".npz"), name)
        with open(os.path.join(args.out, name + ".mps"), "w") as fh:
            write_mps(prob, fh)
        print(f"{name}: rows={prob.A.nrows} cols={prob.A.ncols} optimal objective {obj!r}")


if __name__ == "__main__":
    main()
