#!/usr/bin/env python3
"""Solve an SDPA sparse (.dat-s) file with cvxpy and print the optimum.

Usage: solve_sdpa.py FILE [SOLVER]

The program is  min c^T x  s.t.  sum_i x_i F_i - F_0 >= 0  (block diagonal).
The last line of output is the optimal value.
"""
import re
import sys

import cvxpy as cp
import numpy as np


def parse(path):
    with open(path) as f:
        lines = [re.sub(r"[,(){}]", " ", l).strip() for l in f]
    lines = [l for l in lines if l]
    while lines and lines[0][0] in "\"*":
        lines.pop(0)
    m = int(lines[0].split()[0])
    nblocks = int(lines[1].split()[0])
    pos = 2
    sizes = []
    if nblocks:
        sizes = [int(t) for t in lines[pos].split()[:nblocks]]
        pos += 1
    c = np.zeros(m)
    if m:
        c = np.array([float(t) for t in lines[pos].split()[:m]])
        pos += 1
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    for l in lines[pos:]:
        k, b, i, j, v = l.split()[:5]
        k, b, i, j, v = int(k), int(b) - 1, int(i) - 1, int(j) - 1, float(v)
        mats[k][b][i, j] = v
        mats[k][b][j, i] = v
    return c, sizes, mats


def main():
    path = sys.argv[1]
    solver = sys.argv[2] if len(sys.argv) > 2 else "CVXOPT"
    c, sizes, mats = parse(path)
    x = cp.Variable(len(c))
    cons = []
    for b, s in enumerate(sizes):
        expr = -mats[0][b]
        for k in range(len(c)):
            if np.any(mats[k + 1][b]):
                expr = expr + x[k] * mats[k + 1][b]
        if s < 0:
            cons.append(cp.diag(expr) >= 0)
        else:
            cons.append(0.5 * (expr + expr.T) >> 0)
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    prob.solve(solver=solver)
    print(prob.status)
    print(repr(float(prob.value)))


if __name__ == "__main__":
    main()
