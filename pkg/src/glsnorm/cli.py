"""Command line surface: generate, plan, verify, freq, project, extract,
tree, delta, multi.

Configuration comes from one optional JSON file plus flag overrides (flags
win).  Rationals cross the boundary as "p/q" strings; decimals appear only
in rendered report columns.  All outputs are byte-identical across runs with
identical configuration; data files carry no timestamps, and summary JSON
records a hash of the effective configuration.

Exit codes: 0 on success or a passing verification, 1 on a verification
failure, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import analyzer, genseq, multigls, prob, scheduler, words
from .gls import GlsSystem
from .prob import format_rational, parse_rational
from .words import format_word, parse_word

DEPTH_WARNING = 11


class ConfigError(ValueError):
    """Bad configuration or arguments; maps to exit code 2."""


def system_fragment(value: str) -> dict:
    """Resolve a --system value to a config fragment.

    Accepts the shorthands ``luroth``, ``dyadic`` and ``geometric:p/q``,
    inline JSON starting with ``{``, or a path to a JSON file.
    """
    value = value.strip()
    if value == "luroth":
        return {"kind": "luroth"}
    if value == "dyadic":
        return {"kind": "geometric", "ratio": "1/2"}
    if value.startswith("geometric:"):
        return {"kind": "geometric", "ratio": value.split(":", 1)[1]}
    if value.startswith("{"):
        try:
            return json.loads(value)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid system JSON: {exc}") from exc
    path = Path(value)
    if path.exists():
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid system file {value}: {exc}") from exc
    raise ConfigError(f"unrecognized system: {value!r}")


def build_sequence(fragment: dict) -> prob.ProbabilitySequence:
    try:
        return prob.from_config(fragment)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_gls(fragment: dict) -> GlsSystem:
    seq = build_sequence(fragment)
    signs = fragment.get("signs", ())
    try:
        return GlsSystem(seq=seq, sign_prefix=tuple(int(s) for s in signs))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def systems_fragments(value: str) -> list[dict]:
    """Resolve a --systems value (file path or inline JSON) to a list of
    coordinate system fragments."""
    value = value.strip()
    if value.startswith("[") or value.startswith("{"):
        try:
            data = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid systems JSON: {exc}") from exc
    else:
        path = Path(value)
        if not path.exists():
            raise ConfigError(f"systems file not found: {value}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid systems file {value}: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("systems")
    if not isinstance(data, list) or not data:
        raise ConfigError("systems config must be a nonempty list of fragments")
    return data


def parse_margin(value, name: str, strict_above: int) -> Fraction:
    try:
        margin = parse_rational(value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if margin <= strict_above:
        raise ConfigError(f"{name} must be > {strict_above}, got {margin}")
    return margin


def parse_patterns(values) -> list[words.Word]:
    if not values:
        raise ConfigError("at least one pattern is required")
    try:
        return [parse_word(str(v)) for v in values]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_hash(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _apply_config(args: argparse.Namespace) -> None:
    """Fill unset flags from the --config JSON file; flags win."""
    if not getattr(args, "config", None):
        return
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {args.config}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid config file: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, value)


def _resolve_system(args) -> tuple[dict, prob.ProbabilitySequence]:
    if getattr(args, "system", None) is None:
        raise ConfigError("a --system (or config 'system') is required")
    fragment = (
        args.system if isinstance(args.system, dict) else system_fragment(args.system)
    )
    return fragment, build_sequence(fragment)


def _write_text(path_or_none, text: str) -> None:
    if path_or_none:
        Path(path_or_none).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    fragment, seq = _resolve_system(args)
    max_depth = int(args.max_depth) if args.max_depth is not None else None
    if not max_depth or max_depth < 1:
        raise ConfigError("--max-depth must be a positive integer")
    if not args.out:
        raise ConfigError("--out is required")
    if max_depth > DEPTH_WARNING:
        print(
            f"warning: depth {max_depth} emits "
            f"{sum(math.factorial(n) for n in range(1, max_depth + 1))} words; "
            f"depth {DEPTH_WARNING} is the practical ceiling",
            file=sys.stderr,
        )
    digest = config_hash(
        {"command": "gen", "system": fragment, "max_depth": max_depth}
    )
    ledger = genseq.write_dump(
        seq,
        max_depth,
        args.out,
        summary_path=args.summary,
        config_sha256=digest,
    )
    print(
        json.dumps(
            {
                "dump": str(args.out),
                "total_words": ledger.total_words,
                "total_digits": ledger.total_digits,
                "config_sha256": digest,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_plan(args) -> int:
    _, seq = _resolve_system(args)
    n = int(args.n)
    plan = scheduler.plan_depth(seq, n)
    doc = {
        "n": n,
        "counts": [[format_word(w), plan.counts[w]] for w in plan.words],
        "groups": [[format_word(w) for w in grp] for grp in plan.groups()],
    }
    _write_text(args.out, json.dumps(doc, sort_keys=True) + "\n")
    return 0


def cmd_verify(args) -> int:
    _, seq = _resolve_system(args)
    k1 = parse_margin(args.k1 if args.k1 is not None else "2", "k1", 1)
    k2 = parse_margin(args.k2 if args.k2 is not None else "5", "k2", 4)
    if not args.dump:
        raise ConfigError("--dump is required")
    report = analyzer.verify_tree_properties(args.dump, seq, k1=k1, k2=k2)
    for d in report.depths:
        group = (
            f" max|group err|={d.max_group_error}"
            if d.max_group_error is not None
            else ""
        )
        status = "ok" if d.passed else "FAIL"
        print(
            f"depth {d.n}: {d.received_words} words,"
            f" max|err|={d.max_count_error}{group} [{status}]"
        )
    for line in report.failures():
        print(f"failure: {line}")
    if args.json:
        doc = {
            "passed": report.passed,
            "k1": format_rational(k1),
            "k2": format_rational(k2),
            "failures": report.failures(),
            "depths": [
                {
                    "n": d.n,
                    "words": d.received_words,
                    "depth_mismatches": d.depth_mismatches,
                    "max_count_error": format_rational(d.max_count_error),
                    "max_group_error": (
                        format_rational(d.max_group_error)
                        if d.max_group_error is not None
                        else None
                    ),
                    "passed": d.passed,
                }
                for d in report.depths
            ],
        }
        Path(args.json).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    if args.fig:
        from . import figures

        figures.save_error_margin_figure(report, args.fig)
    print("verdict:", "pass" if report.passed else "fail")
    return 0 if report.passed else 1


def cmd_freq(args) -> int:
    _, seq = _resolve_system(args)
    if not args.dump:
        raise ConfigError("--dump is required")
    patterns = parse_patterns(args.patterns)
    group_depths = [int(n) for n in (args.group_depths or [])]
    extra = [int(m) for m in (args.checkpoints or [])]
    threads = int(args.threads) if args.threads is not None else 1
    cumulative, groups = analyzer.checkpoint_report(
        args.dump, seq, patterns, group_depths=group_depths, extra_checkpoints=extra
    )
    if threads > 1:
        # Shard-wise recount with deterministic merge; replaces the
        # single-pass cumulative counts.
        shards, total = _dump_shards(args.dump, patterns)
        cumulative = analyzer.count_blocks_sharded(
            shards,
            patterns,
            [(pt.label, pt.position) for pt in cumulative[0].points],
            seq,
            threads=threads,
            total_length=total,
        )
    reports = cumulative + groups
    if args.out:
        analyzer.write_frequency_csv(reports, args.out)
    else:
        writer = csv.DictWriter(
            sys.stdout, fieldnames=analyzer.CSV_COLUMNS, lineterminator="\n"
        )
        writer.writeheader()
        for row in analyzer.frequency_rows(reports):
            writer.writerow(row)
    if args.json:
        Path(args.json).write_text(
            json.dumps(analyzer.frequency_json(reports), indent=2) + "\n"
        )
    fig_path = args.fig
    if fig_path is None and args.out and not args.no_fig:
        fig_path = str(args.out) + ".png"
    if fig_path:
        from . import figures

        figures.save_deviation_figure(cumulative, fig_path)
    return 0


def _dump_shards(path, patterns) -> tuple[list[analyzer.Shard], int]:
    """Split a dump into per-level shards with window overlap carried
    across.  Materializes the digit stream; meant for moderate depths."""
    width = max(len(p) for p in patterns)
    blocks: list[list[int]] = []
    n = 0
    word_iter = genseq.read_dump_words(path)
    while True:
        n += 1
        expected = math.factorial(n)
        received = 0
        block: list[int] = []
        for w in word_iter:
            received += 1
            block.extend(w)
            if received == expected:
                break
        if block:
            blocks.append(block)
        if received < expected:
            break
    shards = []
    start = 0
    for i, block in enumerate(blocks):
        carry = blocks[i - 1][-(width - 1) :] if i > 0 and width > 1 else []
        spill = blocks[i + 1][: width - 1] if i + 1 < len(blocks) and width > 1 else []
        shards.append(
            analyzer.Shard(
                digits=carry + block + spill,
                first_index=start - len(carry) + 1,
                owned_lo=start,
                owned_hi=start + len(block),
            )
        )
        start += len(block)
    return shards, start


def cmd_project(args) -> int:
    fragment, _ = _resolve_system(args)
    system = build_gls(fragment)
    if not args.dump:
        raise ConfigError("--dump is required")
    places = int(args.places) if args.places is not None else 10
    result = system.project(genseq.read_dump_digits(args.dump))
    text, certified = result.decimal(places)
    print(
        json.dumps(
            {
                "lower": format_rational(result.lower),
                "width": format_rational(result.width),
                "decimal": text,
                "certified_places": certified,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_extract(args) -> int:
    fragment, _ = _resolve_system(args)
    system = build_gls(fragment)
    if args.x is None:
        raise ConfigError("--x is required")
    try:
        x = parse_rational(args.x)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    k = int(args.k) if args.k is not None else None
    if not k or k < 1:
        raise ConfigError("--k must be a positive integer")
    run = system.extract_digits(x, k)
    lines = ["#mode extract"]
    lines.extend(str(d) for d in run.digits)
    _write_text(args.out, "\n".join(lines) + "\n")
    if args.out:
        print(
            json.dumps(
                {"digits": len(run), "stop_reason": run.stop_reason},
                sort_keys=True,
            )
        )
    return 0


def cmd_tree(args) -> int:
    _, seq = _resolve_system(args)
    n = int(args.n)
    rows = []
    for w in words.generation(n):
        rows.append(
            {
                "word": format_word(w),
                "weight": format_rational(words.path_weight(seq, w)),
                "mu": format_rational(words.word_measure(seq, w)),
                "length": len(w),
            }
        )
    out = args.out
    fieldnames = ["word", "weight", "mu", "length"]
    if out:
        with open(out, "w", encoding="ascii", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    else:
        writer = csv.DictWriter(
            sys.stdout, fieldnames=fieldnames, lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(rows)
    return 0


def cmd_delta(args) -> int:
    _, seq = _resolve_system(args)
    n = int(args.n)
    print(format_rational(words.mean_word_length(seq, n)))
    return 0


def _build_product(args) -> multigls.ProductSystem:
    if not args.systems:
        raise ConfigError("--systems is required")
    fragments = (
        args.systems
        if isinstance(args.systems, list)
        else systems_fragments(args.systems)
    )
    systems = [build_gls(f) for f in fragments]
    if args.dims is not None and int(args.dims) != len(systems):
        raise ConfigError(
            f"--dims {args.dims} does not match {len(systems)} systems"
        )
    return multigls.ProductSystem(systems)


def cmd_multi_map(args) -> int:
    product = _build_product(args)
    count = int(args.count) if args.count is not None else None
    if not count or count < 1:
        raise ConfigError("--count must be a positive integer")
    entries = product.entries(count)
    lines = ["# tie_break: lexicographically smallest index vector first"]
    header = ["d"] + [f"i_{k + 1}" for k in range(product.dims)] + ["product"]
    lines.append(",".join(header))
    for d, (vec, value) in enumerate(entries, start=1):
        lines.append(
            ",".join([str(d)] + [str(i) for i in vec] + [format_rational(value)])
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_multi_project(args) -> int:
    product = _build_product(args)
    if not args.dump:
        raise ConfigError("--dump is required")
    places = int(args.places) if args.places is not None else 10
    results = product.project(genseq.read_dump_digits(args.dump))
    docs = []
    for res in results:
        text, certified = res.decimal(places)
        docs.append(
            {
                "lower": format_rational(res.lower),
                "width": format_rational(res.width),
                "decimal": text,
                "certified_places": certified,
            }
        )
    print(json.dumps(docs, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glsnorm",
        description=(
            "Construct, verify, and project digit sequences with prescribed "
            "block frequencies"
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument(
            "--system",
            help="luroth | dyadic | geometric:p/q | inline JSON | path to JSON",
        )

    p = sub.add_parser("gen", help="generate a scheduled sequence dump")
    common(p)
    p.add_argument("--max-depth", type=int, dest="max_depth")
    p.add_argument("--out")
    p.add_argument("--summary", help="summary JSON path (default: OUT.summary.json)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("plan", help="emit one level's plan as JSON")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="check block layout and count margins")
    common(p)
    p.add_argument("--dump")
    p.add_argument("--k1", help="word count margin, rational > 1 (default 2)")
    p.add_argument("--k2", help="group count margin, rational > 4 (default 5)")
    p.add_argument("--json", help="write the full report as JSON")
    p.add_argument("--fig", help="render the error margins to this image file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("freq", help="block frequencies at structural checkpoints")
    common(p)
    p.add_argument("--dump")
    p.add_argument(
        "--patterns", nargs="+", help="patterns as comma-separated digits"
    )
    p.add_argument("--group-depths", nargs="*", type=int, dest="group_depths")
    p.add_argument("--checkpoints", nargs="*", type=int)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--json", help="JSON mirror path")
    p.add_argument(
        "--fig",
        help="deviation plot path (default: OUT.png when --out is given)",
    )
    p.add_argument(
        "--no-fig",
        action="store_true",
        dest="no_fig",
        help="skip the deviation plot",
    )
    p.add_argument(
        "--threads",
        type=int,
        help="shard the count by level with a deterministic merge",
    )
    p.set_defaults(func=cmd_freq)

    p = sub.add_parser("project", help="project a dump through a GLS system")
    common(p)
    p.add_argument("--dump")
    p.add_argument("--places", type=int, help="decimal places to attempt (10)")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("extract", help="digit expansion of a rational point")
    common(p)
    p.add_argument("--x", help='point in [0,1] as "p/q"')
    p.add_argument("--k", type=int, help="number of digits to extract")
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("tree", help="dump one level: word, weight, mu, length")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("delta", help="weight-averaged word length of a level")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("multi", help="multidimensional systems")
    msub = p.add_subparsers(dest="multi_command")

    mp = msub.add_parser("map", help="composite digit enumeration as CSV")
    mp.add_argument("--config", help="JSON config file; flags override it")
    mp.add_argument("--systems", help="coordinate systems: JSON file or inline")
    mp.add_argument("--dims", type=int)
    mp.add_argument("--count", type=int)
    mp.add_argument("--out")
    mp.set_defaults(func=cmd_multi_map)

    mp = msub.add_parser("project", help="project a composite dump per coordinate")
    mp.add_argument("--config", help="JSON config file; flags override it")
    mp.add_argument("--systems", help="coordinate systems: JSON file or inline")
    mp.add_argument("--dims", type=int)
    mp.add_argument("--dump")
    mp.add_argument("--places", type=int)
    mp.set_defaults(func=cmd_multi_project)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        _apply_config(args)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
