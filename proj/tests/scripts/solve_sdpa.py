#!/usr/bin/env python3
"""Solve an exported SDPA file with an external conic solver and compare it
with the built-in solver. Exit 77 when cvxpy is unavailable."""
import csv
import io
import os
import subprocess
import sys

try:
    import cvxpy as cp
    import numpy as np
except ImportError:
    sys.exit(77)

TOL = 1e-5


def read_sdpa(path):
    tokens = []
    with open(path) as f:
        for line in f:
            if line.startswith("*") or line.startswith('"'):
                continue
            for ch in ",{}()":
                line = line.replace(ch, " ")
            tokens.extend(line.split())
    it = iter(tokens)
    m = int(next(it))
    nblocks = int(next(it))
    sizes = [int(next(it)) for _ in range(nblocks)]
    c = np.array([float(next(it)) for _ in range(m)])
    F = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    rest = list(it)
    for i in range(0, len(rest), 5):
        k, b, r, col, v = rest[i:i + 5]
        k, b, r, col, v = int(k), int(b) - 1, int(r) - 1, int(col) - 1, float(v)
        F[k][b][r, col] = v
        F[k][b][col, r] = v
    return c, sizes, F


def solve(path):
    c, sizes, F = read_sdpa(path)
    x = cp.Variable(len(c))
    cons = []
    for b, s in enumerate(sizes):
        expr = sum(F[k + 1][b] * x[k] for k in range(len(c)) if F[k + 1][b].any()) - F[0][b]
        if s > 0:
            S = cp.Variable((s, s), symmetric=True)
            cons += [S == expr, S >> 0]
        else:
            cons += [cp.diag(expr) >= 0]
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise SystemExit(f"external solver status {prob.status}")
    return -prob.value


def main():
    exe, work = sys.argv[1], sys.argv[2]
    os.makedirs(work, exist_ok=True)
    worst = 0.0
    for variant, extra in (("strict", []), ("relaxed", ["--xi", "0.005"]), ("qkd", [])):
        path = os.path.join(work, f"bb84-{variant}.dat-s")
        common = ["--variant", variant, "--level", "1", "--p-err", "0.05", "--no-cache"] + extra
        subprocess.run([exe, "export-sdpa", *common, "-o", path], check=True)
        ours = subprocess.run([exe, "sweep", *common, "--pad", "0"], check=True,
                              capture_output=True, text=True).stdout
        row = next(csv.DictReader(io.StringIO(ours)))
        external = solve(path)
        diff = abs(float(row["p_ans_upper"]) - external)
        print(f"{variant}: built-in {row['p_ans_upper']} external {external:.8f} diff {diff:.2e}")
        worst = max(worst, diff)
    if worst > TOL:
        sys.exit(f"disagreement {worst:.2e} above {TOL}")


if __name__ == "__main__":
    main()
