#!/usr/bin/env python3
"""Freezes paired t-test / Cohen's d_z reference values computed with scipy.

Usage: stats_reference.py <out.json>
"""
import json
import random
import sys

import numpy as np
from scipy import stats


def case(a, b):
    d = np.array(b) - np.array(a)
    res = stats.ttest_rel(b, a)
    return {
        "a": a,
        "b": b,
        "t": float(res.statistic),
        "p": float(res.pvalue),
        "dof": len(a) - 1,
        "d": float(np.mean(d) / np.std(d, ddof=1)),
    }


def main():
    rng = random.Random(20240611)
    cases = [case([1.0, 2.0, 3.0, 4.0], [2.0, 3.0, 5.0, 6.0]),
             case([0.2, 0.3, 0.1], [0.8, 0.9, 0.85])]
    while len(cases) < 22:
        n = rng.randint(3, 30)
        shift = rng.uniform(-0.3, 0.3)
        a = [round(rng.random(), 6) for _ in range(n)]
        b = [round(min(1.0, max(0.0, x + shift + rng.gauss(0, 0.15))), 6) for x in a]
        if len({round(y - x, 12) for x, y in zip(a, b)}) < 2:
            continue
        cases.append(case(a, b))
    with open(sys.argv[1], "w", encoding="utf-8") as out:
        json.dump({"generator": "scipy.stats.ttest_rel " + __import__("scipy").__version__,
                   "cases": cases}, out, indent=2)
        out.write("\n")


if __name__ == "__main__":
    main()
