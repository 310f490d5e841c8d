"""Command line: ``ellqg --suite all --n 3``.

Exit status 0 when every check passes, 1 when one fails, 2 on usage or
sampling errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import CapError, SamplingError
from .harness import SUITES, SuiteConfig, emit_report, run_suite

# flag name -> (config field, type)
_FIELDS = {
    "suite": ("suite", str),
    "n": ("n", int),
    "k-max": ("k_max", int),
    "k_max": ("k_max", int),
    "trials": ("trials", int),
    "seed": ("seed", int),
    "tol": ("tol", float),
    "guard": ("guard", float),
    "jobs": ("jobs", int),
    "format": ("format", str),
    "out": ("out", str),
}


def read_config(path: str) -> dict:
    """key=value lines; blank lines and # comments are ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        name, typ = _FIELDS[key]
        out[name] = typ(value)
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ellqg", description="Run numerical identity suites.")
    ap.add_argument("--suite", choices=SUITES + ("all",))
    ap.add_argument("--n", type=int, help="number of evaluation points (<= 8)")
    ap.add_argument("--k-max", dest="k_max", type=int, help="largest weight-function degree (<= 4)")
    ap.add_argument("--trials", type=int, help="seeded parameter points per check")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--tol", type=float, help="override every check's tolerance")
    ap.add_argument("--guard", type=float, help="genericity guard for sampling")
    ap.add_argument("--jobs", type=int, help="worker threads")
    ap.add_argument("--format", choices=("json", "text"))
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--config", help="key=value file; flags take precedence")
    ap.add_argument("--timing", action="store_true", help="include wall time in the report")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        settings = read_config(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        print(f"ellqg: {exc}", file=sys.stderr)
        return 2
    for key in ("suite", "n", "k_max", "trials", "seed", "tol", "guard", "jobs", "format", "out"):
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    fmt = settings.pop("format", "json")
    out = settings.pop("out", None)
    if fmt not in ("json", "text"):
        print(f"ellqg: unknown format {fmt!r}", file=sys.stderr)
        return 2
    try:
        cfg = SuiteConfig(**settings)
        report = run_suite(cfg)
    except (CapError, ValueError, SamplingError) as exc:
        print(f"ellqg: {exc}", file=sys.stderr)
        return 2
    text = emit_report(report, fmt, timing=args.timing)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"ellqg: {len(report.records)} checks, {len(report.failures())} failed, "
          f"{report.wall_time:.1f}s", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
