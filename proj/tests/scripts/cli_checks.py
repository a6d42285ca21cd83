#!/usr/bin/env python3
"""End-to-end checks of the lossmoe executable: exit codes and output schemas."""
import csv
import io
import json
import os
import subprocess
import sys

exe, work = sys.argv[1], sys.argv[2]
os.makedirs(work, exist_ok=True)
failures = []


def run(*args):
    return subprocess.run([exe, *args], capture_output=True, text=True)


def check(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name + (f" ({detail})" if detail and not cond else ""))
    if not cond:
        failures.append(name)


# Config errors exit with 1.
bad = os.path.join(work, "bad.json")
with open(bad, "w") as f:
    json.dump({"p_er": 0.1}, f)
r = run("-c", bad, "sweep")
check("unknown config key exits 1", r.returncode == 1, r.stderr)
check("missing config file exits 1", run("-c", os.path.join(work, "nope.json"), "sweep").returncode == 1)
check("bad level exits 1", run("sweep", "--level", "5").returncode == 1)
check("no subcommand exits 1", run().returncode == 1)

# Sweep CSV schema, with a config file and a flag override.
good = os.path.join(work, "good.json")
with open(good, "w") as f:
    json.dump({"level": "1", "p_err_start": 0.0, "p_err_stop": 0.04, "p_err_step": 0.01,
               "workers": 1}, f)
out = os.path.join(work, "sweep.csv")
r = run("-c", good, "sweep", "--variant", "relaxed", "-o", out)
check("sweep exits 0", r.returncode == 0, r.stderr)
with open(out) as f:
    rows = list(csv.DictReader(f))
with open(out) as f:
    header = f.readline().strip()
check("sweep header", header == "p_err,p_ans_upper,level,variant,m,m_theta,m_phi,xi,solver_status",
      header)
check("sweep row count", len(rows) == 5, str(len(rows)))
check("sweep metadata", all(r["variant"] == "relaxed" and r["xi"] == "0.005" and r["level"] == "1"
                            for r in rows), str(rows[:1]))
check("sweep monotone", all(float(a["p_ans_upper"]) <= float(b["p_ans_upper"]) + 1e-6
                            for a, b in zip(rows, rows[1:])))
check("cache written", os.path.isdir(os.path.join(work, ".lossmoe-cache")))

# Bases.
r = run("dump-bases", "--m-theta", "2", "--m-phi", "2")
lines = r.stdout.strip().splitlines()
check("dump-bases m=3", r.returncode == 0 and len(lines) == 4, r.stdout)
check("dump-bases header", lines[0] == "x,theta,phi,bloch_x,bloch_y,bloch_z", lines[0])

# QKD crossing at level 1.
r = run("pwin", "--variant", "qkd", "--level", "1")
vals = dict(l.split("=") for l in r.stdout.split())
check("pwin qkd", r.returncode == 0 and abs(float(vals.get("p_err_star", "nan")) - 0.2929) < 2e-3,
      r.stdout + r.stderr)

# Below-threshold eta is refused.
r = run("bounds", "--eta", "0.4", "--level", "1", "--no-cache")
check("bounds below threshold exits 1", r.returncode == 1, r.stdout + r.stderr)

# A secure-regime report.
r = run("bounds", "--eta", "0.9", "-n", "20", "-q", "5", "--no-cache")
report = dict(l.split("=", 1) for l in r.stdout.split())
check("bounds report", r.returncode == 0 and report.get("qubit_condition") in ("true", "1")
      and "counting_margin_log2" in report, r.stdout + r.stderr)

if failures:
    sys.exit(f"{len(failures)} check(s) failed")
