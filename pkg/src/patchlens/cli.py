"""Command-line entry points: analyze, rank, gen, eval, serve.

Exit status: 0 success, 1 domain error, 2 usage error. Diagnostic verbosity
comes from the PATCHLENS_LOG environment variable (DEBUG/INFO/WARNING/...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .bench import (
    CorpusError, GenConfig, NoPlausiblePatch, evaluate_ranking, generate_patches,
    load_bug, load_corpus,
)
from .cluster import sample
from .minilang import ParseError
from .patchmodel import PatchParseError, patches_to_json
from .pipeline import PipelineError, compare_versions
from .tracealign import ComparisonTable, tables_to_json

log = logging.getLogger("patchlens")

_COLOR_TAGS = {
    "red": "[R]",
    "green_1": "[G1]",
    "green_2": "[G2]",
    "green_3": "[G3]",
    "green_4": "[G4]",
    "neutral": "",
}


def render_tables_text(tables: list[ComparisonTable]) -> str:
    """Terminal-independent text rendering; colors become cell-prefix tags."""
    out = []
    for table in tables:
        out.append(f"== {table.frame} ==")
        header = ["Line#", "Runtime Value", *table.columns]
        rows = []
        for r in table.rows:
            line = f"{r.line}#{r.occurrence}" if r.occurrence_count > 1 else str(r.line)
            cells = []
            for value, color in zip(r.values, r.colors):
                text = "—" if value is None else value
                cells.append(f"{_COLOR_TAGS[color]}{text}")
            rows.append([line, r.display_name, *cells])
        widths = [
            max(len(row[i]) for row in [header, *rows]) if rows else len(header[i])
            for i in range(len(header))
        ]
        out.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for row in rows:
            out.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
        out.append("")
    return "\n".join(out)


def _write_out(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    bug = load_bug(Path(args.bug), Path(args.patches) if args.patches else None)
    reps, _ = sample(bug.patches, bug.buggy_context(), max_k=args.max_reps)
    patches = [bug.patches.by_id(pid) for pid in reps.ids()]
    tables = compare_versions(
        bug.program, bug.tests, bug.buggy_line, patches,
        source_file=f"{bug.id}/program.mini",
    )
    if args.format == "json":
        _write_out(tables_to_json(tables), args.out)
    else:
        _write_out(render_tables_text(tables), args.out)
    return 0


def cmd_rank(args) -> int:
    bug = load_bug(Path(args.bug), Path(args.patches) if args.patches else None)
    reps, clusters = sample(bug.patches, bug.buggy_context(), max_k=args.max_reps)
    entries = []
    for (pid, distance), cluster in zip(reps.entries, clusters):
        patch = bug.patches.by_id(pid)
        entries.append({
            "patch_id": pid,
            "replacement": patch.replacement_text,
            "distance_to_buggy": distance,
            "original_rank": patch.original_rank,
            "cluster_size": len(cluster.members),
        })
    if args.format == "json":
        _write_out(json.dumps({"bug": bug.id, "representatives": entries}, indent=2) + "\n", args.out)
    else:
        lines = [f"{bug.id}: {len(bug.patches)} plausible patches, "
                 f"{len(entries)} representatives"]
        for i, e in enumerate(entries, start=1):
            lines.append(
                f"{i}. {e['patch_id']} (distance {e['distance_to_buggy']}, "
                f"cluster of {e['cluster_size']}, APR rank {e['original_rank']}): "
                f"{e['replacement']}"
            )
        _write_out("\n".join(lines) + "\n", args.out)
    return 0


def cmd_gen(args) -> int:
    from .bench import combine_sources
    from .minilang import parse, test_cases

    bug_dir = Path(args.bug)
    program_text = (bug_dir / "program.mini").read_text(encoding="utf-8")
    tests_text = (bug_dir / "tests.mini").read_text(encoding="utf-8")
    meta = json.loads((bug_dir / "meta.json").read_text(encoding="utf-8"))
    program = parse(combine_sources(program_text, tests_text))
    gen_meta = meta.get("gen", {})
    config = GenConfig(
        extra_candidates=tuple(gen_meta.get("extra_candidates", ())),
        max_candidates=args.max_candidates,
    )
    seed = args.seed if args.seed is not None else int(gen_meta.get("seed", 0))
    patches = generate_patches(
        program, int(meta["buggy_line"]), test_cases(program), config, seed
    )
    _write_out(patches_to_json(patches), args.out)
    log.info("generated %d plausible patches", len(patches))
    return 0


def cmd_eval(args) -> int:
    corpus = load_corpus(Path(args.corpus))
    report = evaluate_ranking(corpus)
    if args.format == "json":
        _write_out(report.to_json(), args.out)
    else:
        _write_out(report.to_text(), args.out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(Path(args.corpus), static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="patchlens", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="emit comparison tables for a bug")
    analyze.add_argument("--bug", required=True, help="bug directory")
    analyze.add_argument("--patches", help="patches.json overriding the bug's own")
    analyze.add_argument("--out", help="output file (stdout when omitted)")
    analyze.add_argument("--format", choices=("json", "text"), default="json")
    analyze.add_argument("--max-reps", type=int, default=5)
    analyze.set_defaults(func=cmd_analyze)

    rank = sub.add_parser("rank", help="rank representative patches for a bug")
    rank.add_argument("--bug", required=True)
    rank.add_argument("--patches", help="patches.json overriding the bug's own")
    rank.add_argument("--out")
    rank.add_argument("--format", choices=("json", "text"), default="text")
    rank.add_argument("--max-reps", type=int, default=5)
    rank.set_defaults(func=cmd_rank)

    gen = sub.add_parser("gen", help="generate plausible patches for a bug")
    gen.add_argument("--bug", required=True)
    gen.add_argument("--out", help="patches.json destination (stdout when omitted)")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--max-candidates", type=int, default=200)
    gen.set_defaults(func=cmd_gen)

    ev = sub.add_parser("eval", help="run the ranking experiment over a corpus")
    ev.add_argument("--corpus", required=True)
    ev.add_argument("--out")
    ev.add_argument("--format", choices=("json", "text"), default="json")
    ev.set_defaults(func=cmd_eval)

    serve = sub.add_parser("serve", help="serve the session API")
    serve.add_argument("--corpus", required=True)
    serve.add_argument("--port", type=int, default=7380)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--static", help="directory of web UI assets to mount")
    serve.set_defaults(func=cmd_serve)
    return ap


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("PATCHLENS_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, PipelineError, NoPlausiblePatch, PatchParseError,
            ParseError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
