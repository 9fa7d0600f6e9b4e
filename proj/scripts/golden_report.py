#!/usr/bin/env python3
"""Brute-force reference evaluation of an evaluation suite.

Usage: golden_report.py <suite.toml> <out_dir>

Writes report.json, cells.csv and plot.csv computed with plain set
arithmetic and scipy, sharing no code with the C++ implementation.
Only macro averaging is supported.
"""
import json
import re
import sys
from pathlib import Path

import numpy as np
import tomli
from scipy import stats

SOURCES = ["biosample", "geo"]
COHORTS = ["lung", "liver", "ovarian"]
CONDITIONS = ["baseline", "dd", "cedar"]
ORGAN = {"lung": "lung", "liver": "liver", "ovarian": "ovary"}


def canonical(value):
    value = "".join(chr(ord(c) + 32) if "A" <= c <= "Z" else c for c in value)
    return " ".join(p for p in re.split(r"[ \t\n\r\f\v]+", value) if p)


def first_value(record, name):
    for field in record["fields"]:
        if field["name"] == name:
            return field["value"]
    return None


def gold_label(record):
    tissue = first_value(record, "tissue")
    if tissue is None:
        return "unknown"
    t = canonical(tissue)
    if "lung" in t:
        return "lung"
    if "liver" in t or "hcc" in t:
        return "liver"
    if "ovary" in t or "ovarian" in t:
        return "ovary"
    if "pbmc" in t or "blood" in t:
        return "blood"
    if "plasma" in t:
        return "plasma"
    if "lymph" in t:
        return "lymph"
    return "unknown"


def read_corpus(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [json.loads(line) for line in lines[1:] if line.strip()]


def ratio(num, den):
    return num / den if den else 0.0


def prf(tp, fp, fn):
    p = ratio(tp, tp + fp)
    r = ratio(tp, tp + fn)
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


def mean(xs):
    return sum(xs) / len(xs)


def r10(x):
    return float(format(x, ".10g"))


def main():
    suite_path = Path(sys.argv[1])
    out_dir = Path(sys.argv[2])
    suite = tomli.loads(suite_path.read_text(encoding="utf-8"))
    base = suite_path.parent
    grid = {}
    for source, cohorts in suite["corpora"].items():
        for cohort, conditions in cohorts.items():
            for condition, rel in conditions.items():
                grid[(source, cohort, condition)] = read_corpus(base / rel)

    cells, footnotes = [], []
    for source in SOURCES:
        for cohort in COHORTS:
            if (source, cohort, "baseline") not in grid:
                continue
            baseline = grid[(source, cohort, "baseline")]
            for value in (ORGAN[cohort], "blood"):
                relevant = {r["id"] for r in baseline if gold_label(r) == value}
                for condition in CONDITIONS:
                    corpus = grid[(source, cohort, condition)]
                    retrieved = {
                        r["id"] for r in corpus
                        if first_value(r, "tissue") is not None
                        and canonical(first_value(r, "tissue")) == value
                    }
                    tp = len(retrieved & relevant)
                    fp = len(retrieved - relevant)
                    fn = len(relevant - retrieved)
                    p, r, f = prf(tp, fp, fn)
                    query = f"tissue:{value}"
                    path = f"{source}/{cohort}/{condition}/{query}"
                    if tp + fp == 0:
                        footnotes.append("precision zero denominator set to 0: " + path)
                    if tp + fn == 0:
                        footnotes.append("recall zero denominator set to 0: " + path)
                    cells.append(dict(source=source, cohort=cohort, condition=condition, query=query,
                                      tp=tp, fp=fp, fn=fn, precision=p, recall=r, f1=f))

    by_source = []
    for source in SOURCES:
        if not any(c["source"] == source for c in cells):
            continue
        for condition in CONDITIONS:
            per_cohort = []
            for cohort in COHORTS:
                sel = [c for c in cells if (c["source"], c["cohort"], c["condition"]) == (source, cohort, condition)]
                if sel:
                    per_cohort.append([mean([c[k] for c in sel]) for k in ("precision", "recall", "f1")])
            vals = [mean([row[i] for row in per_cohort]) for i in range(3)]
            by_source.append(dict(source=source, condition=condition, precision=vals[0], recall=vals[1], f1=vals[2]))

    overall = []
    for condition in CONDITIONS:
        rows = [s for s in by_source if s["condition"] == condition]
        overall.append(dict(condition=condition, **{k: mean([s[k] for s in rows]) for k in ("precision", "recall", "f1")}))

    comparisons = []
    for a_cond, b_cond in (("baseline", "dd"), ("dd", "cedar"), ("baseline", "cedar")):
        a = np.array([c["recall"] for c in cells if c["condition"] == a_cond])
        b = np.array([c["recall"] for c in cells if c["condition"] == b_cond])
        d = b - a
        entry = dict(condition_a=a_cond, condition_b=b_cond, metric="recall", n_pairs=len(a))
        note = ""
        if len(a) < 2:
            t = p = dz = None
            note = "too few pairs"
        elif np.all(d == d[0]):
            if d[0] == 0:
                t, p, dz = 0.0, 1.0, 0.0
            else:
                t = p = dz = None
                note = "degenerate variance: every paired difference is identical"
        else:
            res = stats.ttest_rel(b, a)
            t, p = float(res.statistic), float(res.pvalue)
            dz = float(np.mean(d) / np.std(d, ddof=1))
        entry.update(t_statistic=None if t is None else r10(t), p_value=None if p is None else r10(p),
                     degrees_of_freedom=len(a) - 1, cohens_d=None if dz is None else r10(dz), note=note)
        comparisons.append(entry)

    def rounded(rows):
        return [{k: (r10(v) if isinstance(v, float) else v) for k, v in row.items()} for row in rows]

    report = dict(averaging="macro", cells=rounded(cells), by_source=rounded(by_source),
                  overall=rounded(overall), comparisons=comparisons, footnotes=footnotes)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    g = lambda x: format(x, ".10g")
    lines = ["source,cohort,condition,query,tp,fp,fn,precision,recall,f1"]
    lines += [f"{c['source']},{c['cohort']},{c['condition']},{c['query']},{c['tp']},{c['fp']},{c['fn']},"
              f"{g(c['precision'])},{g(c['recall'])},{g(c['f1'])}" for c in cells]
    (out_dir / "cells.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    lines = ["condition,source,precision,recall,f1"]
    lines += [f"{s['condition']},{s['source']},{g(s['precision'])},{g(s['recall'])},{g(s['f1'])}" for s in by_source]
    lines += [f"{s['condition']},overall,{g(s['precision'])},{g(s['recall'])},{g(s['f1'])}" for s in overall]
    (out_dir / "plot.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
