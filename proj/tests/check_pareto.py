#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Post-hoc check of explore/exhaustive outputs.

Every pareto.csv row must be feasible, appear verbatim in evaluations.csv and
not be dominated by any feasible evaluations.csv row under the objectives
listed in selected.json. Plain O(n^2) comparison, no shared code with the tool.
"""
import csv
import json
import pathlib
import sys

COLUMNS = {
    "latency": ("latency_s", 1.0),
    "energy": ("energy_j", 1.0),
    "throughput": ("throughput_fps", -1.0),
    "bandwidth": ("link_bits_total", 1.0),
    "accuracy": ("top1", -1.0),
}


def read_rows(path):
    with open(path, newline="") as f:
        lines = f.read().splitlines()
    rows = list(csv.DictReader(lines, delimiter=";"))
    return lines[1:], rows


def vector(row, objectives):
    out = []
    for name in objectives:
        if name == "memory":
            out.append(max(float(v) for k, v in row.items() if k.startswith("mem_")))
        else:
            column, sign = COLUMNS[name]
            out.append(sign * float(row[column]))
    return out


def dominates(a, b):
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def check(directory):
    directory = pathlib.Path(directory)
    objectives = json.loads((directory / "selected.json").read_text())["objectives"]
    pareto_lines, pareto = read_rows(directory / "pareto.csv")
    eval_lines, evaluations = read_rows(directory / "evaluations.csv")
    known = set(eval_lines)
    feasible = [vector(r, objectives) for r in evaluations if r["feasible"] == "1"]
    problems = []
    for line, row in zip(pareto_lines, pareto):
        if row["feasible"] != "1":
            problems.append(f"infeasible pareto row {row['cuts']}")
        if line not in known:
            problems.append(f"pareto row {row['cuts']} missing from evaluations.csv")
        v = vector(row, objectives)
        for other in feasible:
            if dominates(other, v):
                problems.append(f"pareto row {row['cuts']} is dominated by {other}")
                break
    print(f"{directory}: {len(pareto)} pareto rows vs {len(evaluations)} evaluated "
          f"on {','.join(objectives)}: {len(problems)} problems")
    for p in problems:
        print("  " + p)
    return not problems


def main(argv):
    if len(argv) < 2:
        print("usage: check_pareto.py OUTPUT_DIR...", file=sys.stderr)
        return 2
    ok = all([check(d) for d in argv[1:]])
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))
