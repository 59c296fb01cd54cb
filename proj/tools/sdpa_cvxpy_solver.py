#!/usr/bin/env python3
"""Solve an SDPA sparse problem with cvxpy and write a CSDP-style solution.

Usage: sdpa_cvxpy_solver.py problem.dat-s solution

The problem is read in CSDP primal form: maximize tr(C X) subject to
tr(A_k X) = b_k, X block diagonal and positive semidefinite.  Negative block
sizes denote diagonal (nonnegative) blocks.
"""
import sys

import numpy as np
import scipy.sparse as sp
import cvxpy as cp


def read_sdpa(path):
    toks = []
    with open(path) as f:
        for line in f:
            if line.startswith(('*', '"')):
                continue
            for ch in ',{}()':
                line = line.replace(ch, ' ')
            toks.extend(line.split())
    pos = 0
    m = int(toks[pos]); pos += 1
    nb = int(toks[pos]); pos += 1
    sizes = [int(t) for t in toks[pos:pos + nb]]; pos += nb
    b = np.array([float(t) for t in toks[pos:pos + m]]); pos += m
    entries = []
    while pos + 5 <= len(toks):
        k, blk, i, j = (int(t) for t in toks[pos:pos + 4])
        entries.append((k, blk, i, j, float(toks[pos + 4])))
        pos += 5
    return m, sizes, b, entries


def feasible(A, b, z, sizes, blocks, tol=1e-7):
    if z.value is None:
        return False
    if np.max(np.abs(A @ z.value - b), initial=0.0) > tol:
        return False
    for s, var in zip(sizes, blocks):
        val = var.value
        if s > 0:
            if np.linalg.eigvalsh(0.5 * (val + val.T)).min() < -tol:
                return False
        elif val.min() < -tol:
            return False
    return True


def main():
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    m, sizes, b, entries = read_sdpa(sys.argv[1])
    blocks = []
    for s in sizes:
        if s > 0:
            blocks.append(cp.Variable((s, s), PSD=True))
        else:
            blocks.append(cp.Variable(-s, nonneg=True))

    offsets = []
    total = 0
    for s in sizes:
        offsets.append(total)
        total += s * s if s > 0 else -s

    rows, cols, vals = [], [], []
    for k, blk, i, j, v in entries:
        s = sizes[blk - 1]
        off = offsets[blk - 1]
        if s > 0:
            if i == j:
                rows.append(k); cols.append(off + (i - 1) * s + (j - 1)); vals.append(v)
            else:
                rows.append(k); cols.append(off + (i - 1) * s + (j - 1)); vals.append(v)
                rows.append(k); cols.append(off + (j - 1) * s + (i - 1)); vals.append(v)
        else:
            rows.append(k); cols.append(off + i - 1); vals.append(v)
    M = sp.csr_matrix((vals, (rows, cols)), shape=(m + 1, total))

    parts = []
    for s, var in zip(sizes, blocks):
        parts.append(cp.vec(var, order='C') if s > 0 else var)
    z = cp.hstack(parts)
    c = M[0]
    A = M[1:]
    prob = cp.Problem(cp.Maximize(c @ z), [A @ z == b])
    attempts = [
        ('CLARABEL', {}),
        ('CLARABEL', {'static_regularization_constant': 1e-7}),
        ('CVXOPT', {}),
        ('SCS', {'eps': 1e-9, 'max_iters': 200000}),
    ]
    installed = cp.installed_solvers()
    for name, opts in attempts:
        if name not in installed:
            continue
        try:
            prob.solve(solver=name, **opts)
        except cp.error.SolverError as exc:
            print('%s failed: %s' % (name, exc), file=sys.stderr)
            continue
        if prob.status == 'optimal':
            break
        if prob.status == 'optimal_inaccurate' and feasible(A, b, z, sizes, blocks):
            break
    print('status:', prob.status)
    print('objective:', prob.value)
    if prob.status not in ('optimal', 'optimal_inaccurate'):
        return 1

    y = prob.constraints[0].dual_value
    if y is None:
        y = np.zeros(m)
    with open(sys.argv[2], 'w') as f:
        f.write(' '.join('%.17g' % v for v in np.atleast_1d(y)) + '\n')
        for n, (s, var) in enumerate(zip(sizes, blocks), start=1):
            val = var.value
            if s > 0:
                val = 0.5 * (val + val.T)
                for i in range(s):
                    for j in range(i, s):
                        if val[i, j] != 0.0:
                            f.write('2 %d %d %d %.17g\n' % (n, i + 1, j + 1, val[i, j]))
            else:
                for i in range(-s):
                    if val[i] != 0.0:
                        f.write('2 %d %d %d %.17g\n' % (n, i + 1, i + 1, val[i]))
    return 0 if prob.status == 'optimal' else 3


if __name__ == '__main__':
    sys.exit(main())
