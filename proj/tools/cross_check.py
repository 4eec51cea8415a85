#!/usr/bin/env python3
"""Re-solve dumped conic programs with an independent solver.

Each dump holds  minimize c'u  subject to  A u + s = b,  s in K,
where K is a product of zero, nonneg, second-order and PSD cones. PSD
blocks store the column-major upper triangle with off-diagonals scaled by
sqrt(2). Prints one JSON object per input file with the optimal value.
"""

import argparse
import json
import math
import sys

import cvxpy as cp
import numpy as np


def read_dump(path):
    with open(path) as f:
        tokens = f.read().split()
    pos = 0

    def take():
        nonlocal pos
        pos += 1
        return tokens[pos - 1]

    def expect(word):
        got = take()
        if got != word:
            raise ValueError(f"{path}: expected {word!r}, got {got!r}")

    expect("conic-program")
    if take() != "1":
        raise ValueError(f"{path}: unsupported version")
    expect("n")
    n = int(take())
    expect("m")
    m = int(take())
    expect("cones")
    cones = [(take(), int(take())) for _ in range(int(take()))]
    expect("c")
    c = np.array([float(take()) for _ in range(n)])
    expect("b")
    b = np.array([float(take()) for _ in range(m)])
    expect("A")
    A = np.array([float(take()) for _ in range(m * n)]).reshape(m, n)
    return c, A, b, cones


def svec_matrix(e, side):
    """Symmetric matrix expression whose svec equals the expression e."""
    entries = [[None] * side for _ in range(side)]
    idx = 0
    for j in range(side):
        for i in range(j + 1):
            v = e[idx] if i == j else e[idx] / math.sqrt(2.0)
            entries[i][j] = v
            entries[j][i] = v
            idx += 1
    return cp.bmat([[entries[i][j] for j in range(side)] for i in range(side)])


def solve(path, solver, tol):
    c, A, b, cones = read_dump(path)
    u = cp.Variable(c.size)
    slack = b - A @ u
    constraints = []
    off = 0
    for kind, d in cones:
        dim = d * (d + 1) // 2 if kind == "psd" else d
        e = slack[off:off + dim]
        if kind == "zero":
            constraints.append(e == 0)
        elif kind == "nonneg":
            constraints.append(e >= 0)
        elif kind == "soc":
            constraints.append(cp.SOC(e[0], e[1:]))
        elif kind == "psd":
            M = svec_matrix(e, d)
            constraints.append(M >> 0)
        else:
            raise ValueError(f"{path}: unknown cone {kind!r}")
        off += dim
    if off != b.size:
        raise ValueError(f"{path}: cone dimensions do not add up to m")
    prob = cp.Problem(cp.Minimize(c @ u), constraints)
    # The encoder's objectives can be O(1e-4), where the default absolute gap
    # tolerance of 1e-8 would already be a 1e-4 relative error.
    opts = {}
    if solver == "CLARABEL":
        opts = {"tol_gap_abs": tol, "tol_gap_rel": tol, "tol_feas": tol, "max_iter": 500}
    prob.solve(solver=solver, **opts)
    return {"file": path, "status": prob.status, "value": prob.value}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dumps", nargs="+")
    ap.add_argument("--solver", default="CLARABEL")
    ap.add_argument("--tol", type=float, default=1e-10, help="gap and feasibility tolerance (CLARABEL only)")
    args = ap.parse_args()
    failed = False
    for path in args.dumps:
        try:
            out = solve(path, args.solver, args.tol)
        except Exception as exc:  # report and keep going with the other files
            out = {"file": path, "status": "error", "value": None, "error": str(exc)}
        failed |= out["status"] not in ("optimal", "optimal_inaccurate")
        print(json.dumps(out))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
