#!/usr/bin/env python3
"""Solve a free-format MPS file with scipy's MILP solver.

Usage: milp_solve.py MODEL.mps SOLUTION.txt [TIME_LIMIT_SECONDS]

Writes `# status <optimal|time_limit|infeasible>` and one `name value`
line per variable, the format read by `sscflp solve --solver external:...`.
"""

import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix


def read_mps(path):
    rows, senses, objective = [], {}, None
    cols, col_index, integer = [], {}, []
    entries, rhs, bounds = [], {}, {}
    section, in_int = None, False
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            w = line.split()
            if section == "ROWS":
                if w[0] == "N":
                    objective = objective or w[1]
                else:
                    senses[w[1]] = w[0]
                    rows.append(w[1])
            elif section == "COLUMNS":
                if len(w) >= 3 and w[1] == "'MARKER'":
                    in_int = w[2] == "'INTORG'"
                    continue
                name = w[0]
                if name not in col_index:
                    col_index[name] = len(cols)
                    cols.append(name)
                    integer.append(in_int)
                for k in range(1, len(w) - 1, 2):
                    entries.append((w[k], col_index[name], float(w[k + 1])))
            elif section == "RHS":
                for k in range(1, len(w) - 1, 2):
                    rhs[w[k]] = float(w[k + 1])
            elif section == "BOUNDS":
                kind, name = w[0], w[2]
                value = float(w[3]) if len(w) > 3 else None
                bounds.setdefault(name, []).append((kind, value))
    return objective, rows, senses, cols, col_index, integer, entries, rhs, bounds


def main():
    model, out = sys.argv[1], sys.argv[2]
    limit = float(sys.argv[3]) if len(sys.argv) > 3 else None
    objective, rows, senses, cols, col_index, integer, entries, rhs, bounds = read_mps(model)
    row_index = {r: i for i, r in enumerate(rows)}
    c = np.zeros(len(cols))
    data, ri, ci = [], [], []
    for row, col, value in entries:
        if row == objective:
            c[col] += value
        else:
            data.append(value)
            ri.append(row_index[row])
            ci.append(col)
    a = coo_matrix((data, (ri, ci)), shape=(len(rows), len(cols))).tocsr()
    lo = np.full(len(rows), -np.inf)
    hi = np.full(len(rows), np.inf)
    for r, i in row_index.items():
        b = rhs.get(r, 0.0)
        if senses[r] in ("E", "G"):
            lo[i] = b
        if senses[r] in ("E", "L"):
            hi[i] = b
    lb = np.zeros(len(cols))
    ub = np.full(len(cols), np.inf)
    for name, items in bounds.items():
        j = col_index[name]
        for kind, value in items:
            if kind == "BV":
                lb[j], ub[j] = 0.0, 1.0
            elif kind == "FX":
                lb[j] = ub[j] = value
            elif kind == "UP":
                ub[j] = value
            elif kind == "LO":
                lb[j] = value
    options = {"time_limit": limit} if limit else {}
    res = milp(
        c,
        constraints=[LinearConstraint(a, lo, hi)] if rows else [],
        integrality=np.array(integer, dtype=int),
        bounds=Bounds(lb, ub),
        options=options,
    )
    with open(out, "w") as fh:
        if res.status == 2:
            fh.write("# status infeasible\n")
            return
        if res.x is None:
            sys.exit(f"no solution: {res.message}")
        fh.write("# status %s\n" % ("optimal" if res.status == 0 else "time_limit"))
        for name, value in zip(cols, res.x):
            fh.write(f"{name} {value:.9g}\n")


if __name__ == "__main__":
    main()
