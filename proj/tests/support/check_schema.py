#!/usr/bin/env python3
"""Runs `shapegam fit` on a few synthetic datasets and validates every
summary.json against the shipped schema."""

import json
import math
import random
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema


def write_data(path: Path) -> None:
    rng = random.Random(11)
    with path.open("w") as f:
        f.write("y,x1,x2,z,g,cnt,bin,dose\n")
        for i in range(90):
            x1, x2, z = rng.random(), rng.random(), rng.gauss(0, 1)
            g = "abc"[i % 3]
            y = x1 * x1 + 2 * x2 + 0.3 * z + rng.gauss(0, 0.3)
            lam = math.exp(0.2 + x1)
            cnt, p, limit = 0, rng.random(), math.exp(-lam)
            while p > limit:
                cnt += 1
                p *= rng.random()
            b = 1 if rng.random() < 1 / (1 + math.exp(-(3 * x1 - 1.5))) else 0
            f.write(f"{y!r},{x1!r},{x2!r},{z!r},{g},{cnt},{b},{i % 5 - 2}\n")


RUNS = [
    ["--model", "y ~ s.incr.conv(x1) + s(x2) + z + factor(g)", "--nsim", "10", "--seed", "3"],
    ["--model", "y ~ incr(x1)"],
    ["--model", "cnt ~ s.incr(x1) + z", "--family", "poisson", "--nsim", "5"],
    ["--model", "bin ~ s.incr(x1) + tree(dose)", "--family", "binomial"],
    ["--model", "y ~ umbrella(dose) + s.conc(x2)"],
    ["--model", "y ~ ii(x1, x2) + z", "--lambda-grid", "0,0.5,5"],
    ["--model", "y ~ di(x1, x2, numknots = c(3, 4), space = c(\"Q\", \"E\"))"],
]


def main() -> int:
    binary, schema_path, work = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    data = work / "data.csv"
    write_data(data)
    failures = 0
    for k, args in enumerate(RUNS):
        out = work / f"run{k}"
        cmd = [binary, "fit", "--data", str(data), "--out", str(out)] + args
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"FAIL {args}: exit {proc.returncode}: {proc.stderr.strip()}")
            failures += 1
            continue
        summary = json.loads((out / "summary.json").read_text())
        errors = sorted(validator.iter_errors(summary), key=lambda e: list(e.path))
        for e in errors:
            print(f"FAIL {args}: {list(e.path)}: {e.message}")
        failures += len(errors) > 0
        if not errors:
            print(f"ok   {' '.join(args)}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
