"""Run every reproduction check and write the results to a JSON file."""
import argparse
import json
import sys
import time

from diagop.reproduce import reproduce_suite


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output", default="reproduce_results.json")
    args = parser.parse_args()
    start = time.perf_counter()
    results = reproduce_suite()
    for r in results:
        print(r.line())
    payload = {"checks": [r.to_json() for r in results], "seconds": round(time.perf_counter() - start, 2)}
    with open(args.output, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
