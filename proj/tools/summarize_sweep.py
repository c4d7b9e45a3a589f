#!/usr/bin/env python3
"""Summarize a sweep/coordcheck output directory as an aligned text table.

Reads the summary JSON written by `widthlab sweep --out DIR` or
`widthlab coordcheck --out DIR` and prints one row per fitted quantity with
the measured exponent, the symbolic prediction (when defined), and the
per-fit verdict, followed by run health. Exit codes follow the CLI: 0 all
checks pass (or nothing to check), 1 unreadable input, 3 a fit outside its
tolerance.
"""

import argparse
import json
import sys
from pathlib import Path

SUMMARY_NAMES = ("sweep_summary.json", "coordcheck_summary.json")


def find_summary(path: Path) -> Path:
    if path.is_file():
        return path
    if path.is_dir():
        candidates = [path / name for name in SUMMARY_NAMES if (path / name).is_file()]
        if len(candidates) == 1:
            return candidates[0]
        if len(candidates) > 1:
            raise FileNotFoundError(
                f"{path} contains both {SUMMARY_NAMES[0]} and {SUMMARY_NAMES[1]}; "
                "pass the file explicitly"
            )
    raise FileNotFoundError(f"no sweep summary under {path}")


def fmt(value, digits=4):
    if value is None:
        return "-"
    return f"{value:.{digits}g}"


def render(rows, header):
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
             for row in [header] + rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("path", type=Path,
                        help="sweep output directory or summary JSON file")
    args = parser.parse_args(argv)

    try:
        summary_path = find_summary(args.path)
        summary = json.loads(summary_path.read_text())
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1

    param = summary.get("parameterization", {})
    name = param.get("name") or "custom"
    print(f"sweep summary: {summary_path}")
    print(f"parameterization: {name}")

    rows = []
    any_fail = False
    any_checked = False
    for fit in summary.get("fits", []):
        predicted = fit.get("predicted_exponent")
        verdict = ""
        if "pass" in fit:
            any_checked = True
            verdict = "PASS" if fit["pass"] else "FAIL"
            any_fail = any_fail or not fit["pass"]
        rows.append([
            fit.get("quantity", "?"),
            fit.get("layer", "?"),
            fit.get("role", "?"),
            fmt(fit.get("fit", {}).get("exponent")),
            fmt(predicted),
            fmt(fit.get("within")),
            fmt(fit.get("tolerance", None)),
            verdict,
        ])
    if rows:
        print()
        print(render(rows, ["quantity", "layer", "role", "measured",
                            "predicted", "|diff|", "tol", "verdict"]))

    runs = summary.get("runs", [])
    diverged = [r for r in runs if r.get("diverged")]
    print()
    print(f"runs: {len(runs)} total, {len(diverged)} diverged")
    for r in diverged:
        print(f"  diverged: width {r.get('width')}, seed {r.get('seed')}")

    if any_fail:
        return 3
    if not any_checked and rows:
        print("note: no fits carried a symbolic prediction; nothing to check")
    return 0


if __name__ == "__main__":
    sys.exit(main())
