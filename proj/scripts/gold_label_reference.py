#!/usr/bin/env python3
"""Freezes 1,000 generated tissue strings with their keyword-rule tissue labels.

Usage: gold_label_reference.py <out.tsv>
Each line: <label>\t<json-encoded tissue string>
"""
import json
import random
import sys

RULES = [("lung", ["lung"]), ("liver", ["liver", "hcc"]), ("ovary", ["ovary", "ovarian"]),
         ("blood", ["pbmc", "blood"]), ("plasma", ["plasma"]), ("lymph", ["lymph"])]
KEYWORDS = ["lung", "Lung", "LUNG", "liver", "HCC", "hcc", "ovary", "Ovarian", "PBMC", "pbmcs",
            "blood", "Whole Blood", "plasma", "lymph", "lymphocyte", "lungs", "non-lung"]
FILLER = ["tissue", "tumor", "normal", "sample", "cells", "biopsy", "primary", "metastasis", "NA",
          "serum", "bone marrow", "skin", "colon", "brain", "-", "_", "(", ")", "1", "ü", "  "]


def label(text):
    lowered = "".join(chr(ord(c) + 32) if "A" <= c <= "Z" else c for c in text)
    for name, words in RULES:
        if any(w in lowered for w in words):
            return name
    return "unknown"


def main():
    rng = random.Random(7)
    out = []
    for _ in range(1000):
        parts = [rng.choice(FILLER + KEYWORDS if rng.random() < 0.4 else FILLER)
                 for _ in range(rng.randint(1, 4))]
        glue = rng.choice([" ", "", "-", "_", ", "])
        text = glue.join(parts)
        if text.strip().upper() == "NA":
            text = "NA tissue"
        out.append(f"{label(text)}\t{json.dumps(text, ensure_ascii=False)}")
    with open(sys.argv[1], "w", encoding="utf-8") as f:
        f.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
