#!/usr/bin/env python3
"""Regenerates tests/fixtures/suite from hand-written tissue values.

Usage: make_fixture_suite.py <path to fairmeta binary>

Raw payloads are written first, then the CLI samples them into baseline
corpora and standardizes those under DD and CEDAR with the rule backend while
capturing a replay cache. The golden report is produced separately by
golden_report.py.
"""
import json
import random
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "tests" / "fixtures" / "suite"

# 20 tissue values per (source, cohort); None means the record has no tissue field.
TISSUES = {
    ("biosample", "lung"): [
        "lung", "Lung", "lung cancer", "lung adenocarcinoma", "normal lung tissue", "lung tissue",
        "Lung tumor", "left lung lobe",
        "blood", "PBMC", "whole blood", "peripheral blood", "blood sample", "blood plasma",
        "NSCLC tumor", "plasma", "lymph node", None, "pleural effusion", "tumor",
    ],
    ("biosample", "liver"): [
        "liver", "Liver", "liver tissue", "HCC", "liver cancer", "normal liver", "HCC tumor tissue",
        "liver biopsy",
        "blood", "whole blood", "PBMCs", "Peripheral blood mononuclear cells",
        "hepatocellular carcinoma", "tumor", None, "plasma", "bile duct", "cell line", "serum",
        "adipose tissue",
    ],
    ("biosample", "ovarian"): [
        "ovary", "ovarian tumor", "ovarian cancer", "normal ovary tissue", "Ovary", "ovarian tissue",
        "high grade serous ovarian carcinoma", "ovary tissue",
        "blood", "whole blood", "PBMC", "blood sample",
        "ascites", "tumor", None, "plasma", "fallopian tube", "lymph node metastasis", "omentum",
        "cell line",
    ],
    ("geo", "lung"): [
        "lung", "primary tumor from lung adenocarcinoma patient", "lung tissue", "Lung tumor tissue",
        "non-small cell lung cancer tissue", "human lung fibroblasts", "normal lung", "lung biopsy",
        "peripheral blood", "PBMC", "whole blood", "blood",
        "NSCLC tumor", "A549 cell line", "bronchial epithelial cells", None, "tumor", "plasma",
        "lymph node", "sputum",
    ],
    ("geo", "liver"): [
        "liver", "HCC", "liver tumor tissue", "normal liver tissue", "HCC patient liver biopsy",
        "liver cancer", "Liver", "adjacent non-tumor liver",
        "whole blood", "blood", "PBMCs", "peripheral blood mononuclear cells",
        "serum", "hepatocellular carcinoma", "HepG2 cells", None, "tumor", "plasma", "bile duct",
        "blood plasma",
    ],
    ("geo", "ovarian"): [
        "ovary", "ovarian cancer tissue", "ovarian tumor", "normal ovary", "ovarian surface epithelium",
        "serous ovarian cancer", "ovary tissue", "OVCAR-3 ovarian cancer cell line",
        "blood", "whole blood", "PBMC", "peripheral blood",
        "ascites", "tumor", None, "plasma", "fallopian tube", "omentum", "SKOV3 cells", "lymph node",
    ],
}

SEEDS = {
    ("biosample", "lung"): 11, ("biosample", "liver"): 12, ("biosample", "ovarian"): 13,
    ("geo", "lung"): 21, ("geo", "liver"): 22, ("geo", "ovarian"): 23,
}


def biosample_payload(accession, attrs):
    rows = "".join(
        f"    <Attribute attribute_name={quoteattr(name)}>{escape(value)}</Attribute>\n"
        for name, value in attrs
    )
    return (
        f'<BioSample accession="{accession}">\n'
        '  <Organism taxonomy_name="Homo sapiens"/>\n'
        f"  <Attributes>\n{rows}  </Attributes>\n"
        "</BioSample>\n"
    )


def geo_payload(accession, attrs, title):
    lines = [f"accession: {accession}", f"title: {title}", "  (fixture sample)"]
    lines += [f"{name}: {value}" for name, value in attrs]
    return "\n".join(lines) + "\n"


def build_raw(source, cohort, raw_dir):
    rng = random.Random(SEEDS[(source, cohort)])
    cohort_code = {"lung": 1, "liver": 2, "ovarian": 3}[cohort]
    payloads = []
    for i, tissue in enumerate(TISSUES[(source, cohort)]):
        serial = cohort_code * 1000 + i + 1
        attrs = []
        if source == "biosample":
            accession = f"SAMN{serial:08d}"
            name = f"TN_{i + 1}" if cohort == "lung" else f"S{serial}"
            attrs.append(("sample name", name))
        else:
            accession = f"GSM{serial:07d}"
        attrs.append(("age", str(rng.randint(25, 85))))
        attrs.append(("sex", rng.choice(["female", "male", "Female", "M"])))
        if tissue is not None:
            field = "tissue_type" if (source, cohort, i) == ("biosample", "liver", 1) else "tissue"
            attrs.append((field, tissue))
        if rng.random() < 0.3:
            attrs.append(("treatment", rng.choice(["none", "cisplatin", "untreated"])))
        if source == "biosample":
            payloads.append((accession, biosample_payload(accession, attrs)))
        else:
            payloads.append((accession, geo_payload(accession, attrs, f"{cohort} sample {i + 1}")))

    # The record from the motivating example: age 67, female, tissue "lung cancer".
    if (source, cohort) == ("biosample", "lung"):
        idx = TISSUES[(source, cohort)].index("lung cancer")
        accession = payloads[idx][0]
        payloads[idx] = (accession, biosample_payload(
            accession, [("sample name", "TN_32"), ("age", "67"), ("sex", "female"), ("tissue", "lung cancer")]))

    # Two payloads the parser must reject.
    if source == "biosample":
        payloads.append((f"SAMN{cohort_code * 1000 + 901:08d}", "<BioSample accession='x'><Attributes>\n"))
        payloads.append((f"SAMN{cohort_code * 1000 + 902:08d}",
                         '<BioSample accession="SAMN99"><Attributes></Attributes></BioSample>\n'))
    else:
        payloads.append((f"GSM{cohort_code * 1000 + 901:07d}", "\n\n"))
        payloads.append((f"GSM{cohort_code * 1000 + 902:07d}", "free text without any separator\n"))

    rng.shuffle(payloads)
    cohort_dir = raw_dir / source / cohort
    cohort_dir.mkdir(parents=True, exist_ok=True)
    for accession, text in payloads:
        (cohort_dir / accession).write_text(text, encoding="utf-8")
    (raw_dir / source / f"{cohort}.ids").write_text(
        "".join(a + "\n" for a, _ in payloads), encoding="utf-8")
    return cohort_dir


def run(binary, *args):
    subprocess.run([str(binary), *args], check=True, stdout=subprocess.DEVNULL)


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    binary = Path(sys.argv[1]).resolve()
    if OUT.exists():
        shutil.rmtree(OUT)
    corpora = OUT / "corpora"
    corpora.mkdir(parents=True)
    raw_dir = OUT / "raw"
    replay = OUT / "replay"

    suite = ['[suite]', 'name = "fixture"', 'averaging = "macro"', 'match_mode = "canonical"', '']
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for (source, cohort) in TISSUES:
            name = f"{source}_{cohort}"
            cohort_dir = build_raw(source, cohort, raw_dir)
            run(binary, "sample", "--source", source, "--cohort", cohort, "--raw-dir", cohort_dir,
                "--initial", "22", "--target", "20", "--seed", str(SEEDS[(source, cohort)]),
                "--name", name, "--out-dir", tmp / "sample" / name)
            baseline = corpora / f"{name}.baseline.jsonl"
            shutil.copy(tmp / "sample" / name / f"{name}.baseline.jsonl", baseline)
            for condition in ("dd", "cedar"):
                out = tmp / "standardize" / name / condition
                run(binary, "standardize", "--corpus", baseline, "--condition", condition,
                    "--backend", "replay", "--replay-mode", "capture", "--cache", replay,
                    "--out-dir", out)
                shutil.copy(out / f"{name}.{condition}.jsonl", corpora)
            suite += [f"[corpora.{source}.{cohort}]"]
            suite += [f'{c} = "corpora/{name}.{c}.jsonl"' for c in ("baseline", "dd", "cedar")]
            suite += [""]
    (OUT / "suite.toml").write_text("\n".join(suite), encoding="utf-8")


if __name__ == "__main__":
    main()
