#!/usr/bin/env python3
"""Solve an LP-format MILP file with scipy's HiGHS backend.

Reads the subset of the CPLEX LP format emitted by the allocator's model
export: an objective section, `Subject To` rows, `Bounds`, `Generals`,
`Binaries` and `End`. Prints `objective <value>` on success, or exits with a
message on stderr.

Usage: solve_lp.py MODEL.lp
"""

import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp


def tokenize_terms(text):
    """Parse 'a_1 + 2 b_2 - 3.5e-1 c_3' into [(coef, var), ...]."""
    tokens = text.split()
    terms = []
    sign = 1.0
    coef = None
    for tok in tokens:
        if tok == "+":
            sign, coef = 1.0, None
            continue
        if tok == "-":
            sign, coef = -1.0, None
            continue
        try:
            value = float(tok)
            coef = value if coef is None else coef * value
            continue
        except ValueError:
            pass
        terms.append((sign * (1.0 if coef is None else coef), tok))
        sign, coef = 1.0, None
    return terms


def parse(path):
    sense = 1.0
    objective = []
    rows = []  # (terms, op, rhs)
    bounds = {}  # var -> [lo, hi]
    integers = set()
    binaries = set()

    section = None
    pending = ""  # objective/constraint text may wrap lines in general LP
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in ("maximize", "minimize"):
            sense = -1.0 if low == "maximize" else 1.0
            section = "objective"
            continue
        if low == "subject to":
            section = "rows"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low == "generals":
            section = "generals"
            continue
        if low == "binaries":
            section = "binaries"
            continue
        if low == "end":
            break

        if section == "objective":
            body = line.split(":", 1)[1] if ":" in line else line
            objective.extend(tokenize_terms(body))
        elif section == "rows":
            body = line.split(":", 1)[1] if ":" in line else line
            for op in ("<=", ">=", "="):
                if f" {op} " in body:
                    lhs, rhs = body.rsplit(f" {op} ", 1)
                    rows.append((tokenize_terms(lhs), op, float(rhs)))
                    break
            else:
                raise ValueError(f"constraint without comparator: {line}")
        elif section == "bounds":
            parts = line.split()
            if "<=" in parts:
                # lo <= var <= hi
                lo, var, hi = float(parts[0]), parts[2], float(parts[4])
                bounds[var] = [lo, hi]
            elif "=" in parts:
                var, val = parts[0], float(parts[2])
                bounds[var] = [val, val]
            else:
                raise ValueError(f"unparsed bound: {line}")
        elif section == "generals":
            integers.update(line.split())
        elif section == "binaries":
            binaries.update(line.split())
    _ = pending
    return sense, objective, rows, bounds, integers, binaries


def main():
    if len(sys.argv) != 2:
        sys.exit("usage: solve_lp.py MODEL.lp")
    sense, objective, rows, bounds, integers, binaries = parse(sys.argv[1])

    names = []
    index = {}

    def var_id(name):
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    for _, name in objective:
        var_id(name)
    for terms, _, _ in rows:
        for _, name in terms:
            var_id(name)
    for name in list(bounds) + list(integers) + list(binaries):
        var_id(name)

    n = len(names)
    c = np.zeros(n)
    for coef, name in objective:
        c[index[name]] += sense * coef

    a = np.zeros((len(rows), n))
    lo = np.full(len(rows), -np.inf)
    hi = np.full(len(rows), np.inf)
    for k, (terms, op, rhs) in enumerate(rows):
        for coef, name in terms:
            a[k, index[name]] += coef
        if op in ("<=", "="):
            hi[k] = rhs
        if op in (">=", "="):
            lo[k] = rhs

    vlo = np.zeros(n)
    vhi = np.full(n, np.inf)
    for name, (b_lo, b_hi) in bounds.items():
        vlo[index[name]] = b_lo
        vhi[index[name]] = b_hi
    for name in binaries:
        if name not in bounds:
            vlo[index[name]] = 0.0
            vhi[index[name]] = 1.0
        else:
            vlo[index[name]] = max(vlo[index[name]], 0.0)
            vhi[index[name]] = min(vhi[index[name]], 1.0)

    integrality = np.zeros(n)
    for name in integers | binaries:
        integrality[index[name]] = 1

    result = milp(
        c,
        constraints=LinearConstraint(a, lo, hi),
        integrality=integrality,
        bounds=Bounds(vlo, vhi),
    )
    if not result.success:
        sys.exit(f"milp failed: {result.message}")
    print(f"objective {sense * result.fun:.12e}")


if __name__ == "__main__":
    main()
