"""Run the full pipeline on every problem in problems/ and print a summary table.

Usage: python3 scripts/run_corpus.py [--json-dir DIR]
"""

import argparse
import time
from pathlib import Path

from voptkkt.model import load_problem
from voptkkt.pipeline import run_pipeline
from voptkkt.report import dumps

ROOT = Path(__file__).resolve().parents[1]

# candidate point per problem file
POINTS = {
    "oscillating": (0.0, 0.0),
    "oscillating_override": (0.0, 0.0),
    "threeobj": (0.0, 0.0),
    "threeobj_trivial": (0.0, 0.0),
    "circle": (-1.0, 0.0),
    "bowl3": (0.5, 0.0, 0.0),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--json-dir", type=Path, help="also write each report as JSON here")
    args = parser.parse_args()
    if args.json_dir:
        args.json_dir.mkdir(parents=True, exist_ok=True)
    print(f"{'problem':22s} {'classification':28s} {'sfkkt':8s} {'geoffrion':20s} {'time':>7s}")
    for name, x0 in POINTS.items():
        P = load_problem(ROOT / "problems" / f"{name}.json")
        start = time.perf_counter()
        report = run_pipeline(P, x0)
        elapsed = time.perf_counter() - start
        r = report["result"]
        sf = "yes" if r["strong_fkkt"] else "no"
        geo = r["efficiency"]["geoffrion"]["status"]
        print(f"{name:22s} {r['classification']:28s} {sf:8s} {geo:20s} {elapsed:6.2f}s")
        if args.json_dir:
            (args.json_dir / f"{name}.json").write_text(dumps(report))


if __name__ == "__main__":
    main()
