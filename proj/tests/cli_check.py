#!/usr/bin/env python3
"""End-to-end checks of the funflir CLI: schema-valid output, exit codes, determinism.

usage: cli_check.py <funflir executable> <source dir>
"""

import json
import os
import subprocess
import sys
import tempfile

import jsonschema

EXE, SRC = sys.argv[1], sys.argv[2]
DATA = os.path.join(SRC, "data")
SCHEMA = json.load(open(os.path.join(SRC, "docs", "output.schema.json")))
failures = []


def run(*args, env=None):
    return subprocess.run([EXE, *args], capture_output=True, text=True, env=env)


def check(name, ok, detail=""):
    print(("PASS " if ok else "FAIL ") + name + (f" ({detail})" if detail and not ok else ""))
    if not ok:
        failures.append(name)


def load_ok(name, proc):
    if proc.returncode != 0:
        check(name, False, f"exit {proc.returncode}: {proc.stderr.strip()}")
        return None
    doc = json.loads(proc.stdout)
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as e:
        check(name, False, e.message)
        return None
    return doc


null_args = ["--Z", f"{DATA}/null_Z.csv", "--X", f"{DATA}/null_X.csv", "--y", f"{DATA}/null_y.csv"]
test_args = ["test", *null_args, "--variant", "plain", "--weight", "endpoint", "--kernel", "bartlett",
             "--alpha", "0.05", "--theta0", "zero", "--seed", "11"]

doc = load_ok("test: schema", run(*test_args))
if doc:
    check("test: schema", True)
    p = doc["result"]["p_value"]
    check("test: p-value in (0,1)", 0.0 < p < 1.0, f"p = {p}")
    again = load_ok("test: deterministic", run(*test_args))
    check("test: deterministic",
          again is not None and again["manifest"]["output_digests"] == doc["manifest"]["output_digests"])

env = dict(os.environ, FUNFLIR_SEED="11")
via_env = load_ok("test: seed from environment", run(*test_args[:-2], env=env))
check("test: seed from environment",
      doc is not None and via_env is not None and via_env["result"] == doc["result"])

with tempfile.TemporaryDirectory() as tmp:
    cfg = os.path.join(tmp, "run.cfg")
    with open(cfg, "w") as f:
        f.write("variant = plain\nweight = endpoint\nkernel = bartlett\nalpha = 0.05\nseed = 11\n")
    via_cfg = load_ok("test: config file", run("test", *null_args, "--config", cfg))
    check("test: config file", doc is not None and via_cfg is not None and via_cfg["result"] == doc["result"])

    bad_cfg = os.path.join(tmp, "bad.cfg")
    with open(bad_cfg, "w") as f:
        f.write("no_such_key = 1\n")
    check("exit 2 on invalid config key", run("test", *null_args, "--config", bad_cfg).returncode == 2)
    check("exit 2 on unknown flag", run(*test_args, "--no-such-flag").returncode == 2)
    check("exit 2 on bad weight", run(*test_args[:6], "--weight", "p=x").returncode == 2)

    bad_y = os.path.join(tmp, "y.csv")
    with open(bad_y, "w") as f:
        f.write("y\n1.0\n2.0\n")
    proc = run("test", "--Z", f"{DATA}/null_Z.csv", "--X", f"{DATA}/null_X.csv", "--y", bad_y)
    check("exit 1 on mismatched lengths", proc.returncode == 1, f"exit {proc.returncode}")

    # One sample size keeps this under a minute; every cell must still be filled.
    sim = load_ok("simulate: schema", run("simulate", "--table", "2", "--reps", "200", "--seed", "1", "--T", "100"))
    if sim:
        check("simulate: schema", True)
        cells = sim["result"]["cells"]
        check("simulate: all cells populated",
              len(cells) > 0 and all(c["completed"] == 200 and c["errors"] == 0 for c in cells))

    pw = load_ok("power: schema", run("power", "--weights", "p0,p7,endpoint", "--seed", "1"))
    if pw:
        check("power: schema", True)
        curves = sorted(pw["result"]["curves"], key=lambda c: c["drift_factor"])
        ordered = all(curves[i]["power"][k] <= curves[i + 1]["power"][k] + 0.005
                      for i in range(len(curves) - 1) for k in range(len(pw["result"]["kappas"])))
        check("power: ordering follows D_w at every kappa", ordered)

    out1, out2 = os.path.join(tmp, "clr1.csv"), os.path.join(tmp, "clr2.csv")
    t1 = load_ok("transform: manifest", run("transform", "--input", f"{DATA}/densities.csv", "--kind", "clr",
                                             "--out", out1))
    t2 = load_ok("transform: manifest", run("transform", "--input", f"{DATA}/densities.csv", "--kind", "clr",
                                             "--out", out2))
    if t1 and t2:
        check("transform: manifest", True)
        check("transform: deterministic", open(out1).read() == open(out2).read())

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
