#!/usr/bin/env python3
"""End-to-end checks of the plg command line tool."""

import argparse
import csv
import json
import math
import os
import random
import subprocess
import sys
import tempfile

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

FAILURES = []


def check(cond, what):
    print(("ok    " if cond else "FAIL  ") + what)
    if not cond:
        FAILURES.append(what)


def run(plg, *args, cwd=None):
    return subprocess.run([plg, *args], cwd=cwd, capture_output=True, text=True)


def write_data(path, n, p, seed):
    rng = random.Random(seed)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["y"] + [f"x{j + 1}" for j in range(p)])
        for _ in range(n):
            xs = [rng.gauss(0, 1) for _ in range(p)]
            y = xs[0] - 0.5 * xs[min(1, p - 1)] + rng.gauss(0, 1)
            w.writerow([repr(v) for v in [y] + xs])


def read_samples(path):
    with open(path) as f:
        rows = list(csv.reader(f))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def validate(doc, schemas, name):
    if jsonschema is None:
        print("skip  schema " + name + " (jsonschema not installed)")
        return
    with open(os.path.join(schemas, name + ".schema.json")) as f:
        schema = json.load(f)
    try:
        jsonschema.validate(doc, schema)
        check(True, "schema " + name)
    except jsonschema.ValidationError as e:
        check(False, "schema " + name + ": " + e.message)


def batch_means_mcse(col):
    n = len(col)
    b = int(math.floor(math.sqrt(n)))
    a = n // b
    means = [sum(col[k * b:(k + 1) * b]) / b for k in range(a)]
    g = sum(means) / a
    var = b * sum((m - g) ** 2 for m in means) / (a - 1)
    return math.sqrt(var / n)


def test_fit(plg, schemas, tmp):
    data = os.path.join(tmp, "d52.csv")
    write_data(data, 5, 2, 1)
    out = os.path.join(tmp, "fit1")
    r = run(plg, "fit", "--model", "bfl", "--data", data, "--iters", "10", "--burnin", "0", "--out", out)
    check(r.returncode == 0, "fit exits 0")
    header, rows = read_samples(os.path.join(out, "samples_0.csv"))
    check(len(rows) == 10, "fit: 10 rows")
    check(header == ["beta.1", "beta.2", "tau2.1", "tau2.2", "w2.1", "sigma2"], "fit: bfl header")

    out2 = os.path.join(tmp, "fit2")
    run(plg, "fit", "--model", "bfl", "--data", data, "--iters", "10", "--burnin", "0", "--out", out2)
    with open(os.path.join(out, "samples_0.csv"), "rb") as a, open(os.path.join(out2, "samples_0.csv"), "rb") as b:
        check(a.read() == b.read(), "fit: same seed gives byte-identical samples")

    data105 = os.path.join(tmp, "d105.csv")
    write_data(data105, 10, 5, 2)
    out3 = os.path.join(tmp, "fit3")
    r = run(plg, "fit", "--model", "bfl", "--data", data105, "--alpha", "1", "--iters", "400",
            "--chains", "2", "--out", out3)
    check(r.returncode == 0, "fit with two chains exits 0")
    with open(os.path.join(out3, "drift.json")) as f:
        drift = json.load(f)
    check(drift["phi"] == 0.5, "drift.json phi = 0.5 for n=10, p=5, alpha=1")
    validate(drift, schemas, "drift")
    with open(os.path.join(out3, "summary.json")) as f:
        summary = json.load(f)
    check(len(summary["chains"]) == 2 and summary["multi_chain"] is not None, "summary covers two chains")
    validate(summary, schemas, "summary")

    for model, groups, ncol in (("bgl", "2,3", 5 + 2 + 1), ("bsgl", "2,3", 5 + 2 + 5 + 1)):
        o = os.path.join(tmp, "fit_" + model)
        r = run(plg, "fit", "--model", model, "--data", data105, "--groups", groups, "--iters", "50",
                "--fast-np", "--out", o)
        check(r.returncode == 0, f"fit {model} exits 0")
        header, _ = read_samples(os.path.join(o, "samples_0.csv"))
        check(len(header) == ncol, f"fit {model}: {ncol} columns")
        with open(os.path.join(o, "drift.json")) as f:
            validate(json.load(f), schemas, "drift")

    r = run(plg, "fit", "--model", "bgl", "--data", data105, "--groups", "2,2", "--out", os.path.join(tmp, "bad"))
    check(r.returncode == 1, "fit: group sizes not summing to p exit 1")
    r = run(plg, "fit", "--model", "lasso", "--data", data105)
    check(r.returncode == 2, "fit: unknown model exits 2")
    r = run(plg, "fit", "--model", "bfl")
    check(r.returncode == 2, "fit: missing --data exits 2")

    bad = os.path.join(tmp, "bad.csv")
    with open(bad, "w") as f:
        f.write("y,x1\n1,2\n3,abc\n")
    r = run(plg, "fit", "--model", "bfl", "--data", bad, "--out", os.path.join(tmp, "bad2"))
    check(r.returncode == 1 and 'row 3, column "x1"' in r.stderr, "fit: parse error names row and column")
    return out3


def test_diagnose(plg, schemas, tmp, fit_dir):
    s0 = os.path.join(fit_dir, "samples_0.csv")
    out = os.path.join(tmp, "diag.json")
    r = run(plg, "diagnose", s0, "--out", out)
    check(r.returncode == 0, "diagnose exits 0")
    with open(out) as f:
        single = json.load(f)
    validate(single, schemas, "summary")
    check(single["multi_chain"] is None, "diagnose: single chain has no multi-chain block")

    _, rows = read_samples(s0)
    ok = True
    for j, p in enumerate(single["chains"][0]["parameters"]):
        col = [r[j] for r in rows]
        ref = batch_means_mcse(col)
        ok = ok and abs(p["mcse"] - ref) <= 1e-9 * max(ref, 1e-300)
        ok = ok and abs(p["mean"] - sum(col) / len(col)) <= 1e-12 * max(1.0, abs(p["mean"]))
    check(ok, "diagnose: MCSE matches an independent batch-means computation")

    r = run(plg, "diagnose", s0, s0, "--out", "-")
    check(r.returncode == 0, "diagnose duplicated chain exits 0")
    dup = json.loads(r.stdout)
    a, b = dup["chains"]
    strip = lambda c: {k: v for k, v in c.items() if k not in ("chain",)}
    check(strip(a) == strip(b), "diagnose: duplicated chain gives identical rows")
    check(all(v == 0 for v in dup["multi_chain"]["between"]), "diagnose: duplicated chain has zero between-variance")
    validate(dup, schemas, "summary")

    r = run(plg, "diagnose", os.path.join(tmp, "missing.csv"))
    check(r.returncode == 2, "diagnose: missing file exits 2")


def test_verify(plg, schemas, tmp):
    out = os.path.join(tmp, "report.json")
    r = run(plg, "verify", "--suite", "all", "--out", out)
    check(r.returncode == 0, "verify all exits 0")
    with open(out) as f:
        rep = json.load(f)
    check(rep["passed"] is True, "verify all passes")
    validate(rep, schemas, "verify")

    out2 = os.path.join(tmp, "report_mut.json")
    r = run(plg, "verify", "--suite", "geweke", "--mutation", "missing-xi", "--out", out2)
    check(r.returncode == 1, "verify with a mutation exits 1")
    with open(out2) as f:
        validate(json.load(f), schemas, "verify")

    r = run(plg, "verify", "--suite", "nonsense")
    check(r.returncode == 2, "verify unknown suite exits 2")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plg", required=True)
    ap.add_argument("--schemas", required=True)
    args = ap.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        fit_dir = test_fit(args.plg, args.schemas, tmp)
        test_diagnose(args.plg, args.schemas, tmp, fit_dir)
        test_verify(args.plg, args.schemas, tmp)
    print(f"{len(FAILURES)} failure(s)")
    return 1 if FAILURES else 0


if __name__ == "__main__":
    sys.exit(main())
