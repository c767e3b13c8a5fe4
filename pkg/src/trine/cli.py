"""Command-line surface.

Exit codes: 0 success, 2 a mask verdict came back Incorrect (so shell
scripts can branch on it), 1 any error including bad usage.

    trine trace --mask 1,1 --L 3 --start ABA
    trine check-mask --n 1 --m 5 --lmin 3 --lmax 12
    trine grid --max 19 --out grid.csv
    trine rt extract --n 1 --m 3 --lmax 8 --out 1_3.rt
    trine rt intersect a.rt b.rt --out both.rt
    trine bundle --out report/

All searches are seeded; rerunning any command with the same
configuration reproduces its outputs byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

from . import __version__, ac23, rt
from .ac23 import GRID_CSV_COLUMNS, Mask, MaskVerdict, build_graph, classify_mask, parse_mask, verdict_grid
from .config import Config, resolve_threads
from .dynamics import run_to_mirror
from .errors import IncompatibleTables, TrineError
from .graph import MixedGraph, complement
from .ipf import check_ipf

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCORRECT = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the exit-code contract
    reserves 2 for Incorrect verdicts, so remap usage errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--lmin", type=int)
    parser.add_argument("--lmax", type=int)
    parser.add_argument("--cutoff", type=int, dest="exhaustive_cutoff",
                        help="largest L swept exhaustively")
    parser.add_argument("--samples", type=int, dest="samples_per_L",
                        help="start samples per L beyond the cutoff")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--level", choices=("light", "full"), dest="check_level")
    parser.add_argument("--max-steps", type=int, dest="max_steps")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--cond1", choices=("raw", "complemented"),
                        dest="cond1_interpretation")
    parser.add_argument("--time-origin", type=int, choices=(0, 1),
                        dest="time_origin")


def _config_from_args(args) -> Config:
    base = Config.load(args.config) if args.config else Config()
    overrides = {
        name: getattr(args, name)
        for name in (
            "lmin", "lmax", "exhaustive_cutoff", "samples_per_L", "seed",
            "check_level", "max_steps", "threads", "cond1_interpretation",
            "time_origin",
        )
        if getattr(args, name, None) is not None
    }
    cfg = base.with_overrides(**overrides)
    if "threads" not in overrides:
        cfg = cfg.with_overrides(threads=resolve_threads(cfg.threads))
    return cfg


def _write_json(path: Path, data) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(data, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(path: Path, header: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# -- trace ---------------------------------------------------------------


def cmd_trace(args) -> int:
    cfg = _config_from_args(args)
    if args.graph:
        g = MixedGraph.load(args.graph)
        label = Path(args.graph).stem
    elif args.mask:
        mask = parse_mask(args.mask)
        if args.L is None:
            print("--L is required with --mask", file=sys.stderr)
            return EXIT_ERROR
        g = build_graph(mask, args.L)
        label = f"{mask.n}_{mask.m}_L{args.L}"
    else:
        print("need --mask n,m --L <size> or --graph file", file=sys.stderr)
        return EXIT_ERROR

    start = args.start
    run = run_to_mirror(g, start, cfg.max_steps)
    print(f"start {start}: T={run.period}" + (" (degenerate)" if run.degenerate else ""))
    if run.degenerate:
        print("degenerate trajectory (period <= 2); no invariant check")
        if args.out:
            outdir = Path(args.out)
            outdir.mkdir(parents=True, exist_ok=True)
            with open(outdir / "trace.csv", "w", encoding="utf-8", newline="") as fh:
                run.write_trace_csv(fh)
        return EXIT_OK

    comp_run = run_to_mirror(g, complement(start), cfg.max_steps)
    report = check_ipf(
        run,
        comp_run,
        level=args.check_level or "full",
        cond1_interpretation=cfg.cond1_interpretation,
        time_origin=cfg.time_origin,
    )
    for t, state in enumerate(run.states, 1):
        print(f"  t={t:<4d} {state}")
    print(f"mirror {run.mirror_state}")
    print(f"lambda per node: {list(run.lambda_per_node)}")
    print(
        f"invariant: T={report.T} Tbar={report.Tbar} K={report.K} "
        f"light={report.light_ok} full={report.full_ok}"
    )
    if report.first_failed_condition:
        print(f"FAILED condition: {report.first_failed_condition}")
        for witness in report.witnesses[:4]:
            print(f"  witness: {witness}")

    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "trace.csv", "w", encoding="utf-8", newline="") as fh:
            run.write_trace_csv(fh)
        with open(outdir / "complement_trace.csv", "w", encoding="utf-8", newline="") as fh:
            comp_run.write_trace_csv(fh)
        _write_json(outdir / "run.json", {
            "graph": g.to_json_dict(),
            "label": label,
            "run": run.to_json_dict(),
            "complementRun": comp_run.to_json_dict(),
        })
        _write_json(outdir / "ipf.json", report.to_json_dict())
    return EXIT_OK


# -- mask checking ---------------------------------------------------------


def cmd_check_mask(args) -> int:
    cfg = _config_from_args(args)
    mask = Mask(args.n, args.m)
    verdict = classify_mask(mask, cfg, budget=args.budget)
    print(f"mask {mask}: {verdict.status}")
    if verdict.witness:
        w = verdict.witness
        print(f"witness: L={w['L']} start={w['start']} condition={w['condition']}")
    tested = sum(b.get("tested", 0) for b in verdict.tested)
    print(f"tested {tested} start pairs over L={cfg.lmin}..{cfg.lmax}"
          + (" (budget exhausted)" if verdict.budget_exhausted else ""))
    if args.json:
        _write_json(Path(args.json), verdict.to_json_dict())
    return EXIT_INCORRECT if verdict.status == ac23.INCORRECT else EXIT_OK


def _load_resume_rows(path: Path) -> dict:
    rows = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != GRID_CSV_COLUMNS:
            raise TrineError(f"{path}: not a grid CSV (columns {reader.fieldnames})")
        for record in reader:
            mask = Mask(int(record["n"]), int(record["m"]))
            witness = None
            if record["status"] == ac23.INCORRECT:
                witness = {
                    "L": int(record["witnessL"]),
                    "start": record["witnessStart"],
                    "condition": record["conditionFailed"],
                }
            rows[(mask.n, mask.m)] = MaskVerdict(mask, record["status"], witness)
    return rows


def _cr_annotations_from(directory: str) -> dict:
    """Row counts of <n>_<m>.rt files in a directory, for grid cells."""
    annotations = {}
    for path in sorted(Path(directory).glob("*.rt")):
        table = rt.load_table(path)
        if table.mask is not None:
            annotations[(table.mask.n, table.mask.m)] = table.row_count
    return annotations


def cmd_grid(args) -> int:
    cfg = _config_from_args(args)
    if args.max % 2 == 0:
        print("--max must be odd", file=sys.stderr)
        return EXIT_ERROR
    out = Path(args.out)
    resume_rows = None
    if args.resume and out.exists():
        resume_rows = _load_resume_rows(out)
        print(f"resuming: {len(resume_rows)} cells already done")
    annotations = _cr_annotations_from(args.cr_from) if args.cr_from else None

    out.parent.mkdir(parents=True, exist_ok=True)
    mode = "a" if resume_rows else "w"
    with open(out, mode, encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if not resume_rows:
            writer.writerow(GRID_CSV_COLUMNS)

        def on_cell(verdict: MaskVerdict) -> None:
            writer.writerow(verdict.csv_row())
            fh.flush()

        grid = verdict_grid(
            args.max, args.max, cfg, resume_rows=resume_rows, on_cell=on_cell,
            cr_annotations=annotations,
        )
    incorrect = sum(1 for v in grid.cells.values() if v.status == ac23.INCORRECT)
    print(f"grid {args.max}x{args.max}: {len(grid.cells)} cells, "
          f"{incorrect} incorrect, written to {out}")
    if args.json:
        _write_json(Path(args.json), grid.to_json_dict())
    return EXIT_OK


# -- resolution tables -------------------------------------------------------


def _load_tables(paths) -> list:
    return [rt.load_table(p) for p in paths]


def cmd_rt_extract(args) -> int:
    cfg = _config_from_args(args)
    if args.check_level is None:
        # extraction reads slot data, so the full check is the useful default
        cfg = cfg.with_overrides(check_level="full")
    mask = Mask(args.n, args.m)
    table = rt.extract_rows(
        mask,
        rt.extraction_run_pairs(mask, cfg),
        level=cfg.check_level,
        cond1_interpretation=cfg.cond1_interpretation,
        time_origin=cfg.time_origin,
    )
    rt.save_table(table, args.out)
    print(f"extracted {table.tag()}: C_R={table.row_count} "
          f"class={rt.classify(table)} kind={rt.kind(table)} "
          f"[EXPERIMENTAL hypothesis={table.hypothesis}] -> {args.out}")
    return EXIT_OK


def cmd_rt_expand(args) -> int:
    table = rt.load_table(args.table)
    expanded = rt.expand_subtables(table)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for target, sub in expanded.items():
        name = "sub_" + target.replace("=", "").replace("-", "m") + ".rt"
        rt.save_table(sub, outdir / name)
    print(f"wrote six sub-tables to {outdir}")
    return EXIT_OK


def cmd_rt_classify(args) -> int:
    for path in args.tables:
        table = rt.load_table(path)
        print(f"{path}: {rt.classify(table)} / {rt.kind(table)} C_R={table.row_count}")
    return EXIT_OK


def cmd_rt_scounts(args) -> int:
    tables = _load_tables(args.tables)
    rows = [rt.scounts_csv_row(t) for t in tables]
    if args.csv:
        _write_csv(Path(args.csv), rt.SCOUNTS_CSV_COLUMNS, rows)
        print(f"wrote {args.csv}")
    else:
        print(",".join(rt.SCOUNTS_CSV_COLUMNS))
        for row in rows:
            print(",".join(str(x) for x in row))
    return EXIT_OK


def _binary_setop(args, op) -> int:
    a, b = rt.load_table(args.a), rt.load_table(args.b)
    result = op(a, b)
    if isinstance(result, bool):
        print(str(result).lower())
        return EXIT_OK
    print(f"C_R={result.row_count}")
    if args.out:
        rt.save_table(result, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_rt_integral(args) -> int:
    tables = _load_tables(args.tables)
    try:
        integral = rt.compatibility(tables)
    except IncompatibleTables as exc:
        print(f"incompatible: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for tag, cumulative in integral.steps:
        print(f"  + {tag:<12} -> C_R={cumulative}")
    print(f"integral C_R={integral.table.row_count}")
    if args.out:
        rt.save_table(integral.table, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_rt_coincide(args) -> int:
    tables = _load_tables(args.tables)
    matrix = rt.coincidence_matrix(tables)
    header = ["a", "b", "relation", "intersectionCR", "group"]
    rows = matrix.csv_rows()
    if args.csv:
        _write_csv(Path(args.csv), header, rows)
        print(f"wrote {args.csv}")
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(str(x) for x in row))
    return EXIT_OK


def cmd_rt_build(args) -> int:
    if args.step_table == "builtin:all-combos":
        step_table = rt.ALL_COMBOS_STEP_TABLE
        hypothesis = rt.ALL_COMBOS_STEP_TABLE_ID
    else:
        with open(args.step_table, encoding="utf-8") as fh:
            step_table = rt.parse_step_table(json.load(fh))
        hypothesis = f"step-table:{Path(args.step_table).name}"
    table = rt.build_1_2k1(args.k, step_table, hypothesis=hypothesis)
    rt.save_table(table, args.out)
    print(f"built {table.tag()}: C_R={table.row_count} kind={rt.kind(table)} -> {args.out}")
    return EXIT_OK


def cmd_rt_reflect(args) -> int:
    table = rt.load_table(args.table)
    result = rt.reflect(table)
    rt.save_table(result, args.out)
    print(f"reflected {table.tag()} -> {result.tag()} ({args.out})")
    return EXIT_OK


# -- report bundle -----------------------------------------------------------


def build_bundle(outdir: Path, cfg: Config, grid_max: int, rt_masks: list[Mask],
                 trace_specs: list[tuple[Mask, int, str]]) -> dict:
    """Produce the full report bundle: grid CSV, extracted tables,
    summary CSVs, fixture traces, and a manifest with the semantic
    config hash and a digest per file.  Same config, same bytes."""
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "rt").mkdir(exist_ok=True)
    (outdir / "traces").mkdir(exist_ok=True)

    grid = verdict_grid(grid_max, grid_max, cfg)
    _write_csv(outdir / "grid.csv", GRID_CSV_COLUMNS, grid.csv_rows())

    extract_cfg = cfg.with_overrides(check_level="full")
    tables = []
    for mask in rt_masks:
        table = rt.extract_rows(
            mask,
            rt.extraction_run_pairs(mask, extract_cfg),
            level="full",
            cond1_interpretation=cfg.cond1_interpretation,
            time_origin=cfg.time_origin,
        )
        tables.append(table)
        rt.save_table(table, outdir / "rt" / f"{mask.n}_{mask.m}.rt")
    _write_csv(outdir / "scounts.csv", rt.SCOUNTS_CSV_COLUMNS,
               [rt.scounts_csv_row(t) for t in tables])

    coincide_rows = []
    by_width: dict[int, list] = {}
    for table in tables:
        by_width.setdefault(table.N, []).append(table)
    for width in sorted(by_width):
        group = by_width[width]
        if len(group) >= 2:
            coincide_rows.extend(rt.coincidence_matrix(group).csv_rows())
    _write_csv(outdir / "coincidence.csv",
               ["a", "b", "relation", "intersectionCR", "group"], coincide_rows)

    for mask, L, start in trace_specs:
        g = build_graph(mask, L)
        run = run_to_mirror(g, start, cfg.max_steps)
        name = f"trace_{mask.n}_{mask.m}_L{L}_{start}"
        with open(outdir / "traces" / f"{name}.csv", "w", encoding="utf-8",
                  newline="") as fh:
            run.write_trace_csv(fh)
        if not run.degenerate:
            comp_run = run_to_mirror(g, complement(start), cfg.max_steps)
            report = check_ipf(run, comp_run, level="full",
                               cond1_interpretation=cfg.cond1_interpretation,
                               time_origin=cfg.time_origin)
            _write_json(outdir / "traces" / f"{name}_ipf.json",
                        report.to_json_dict())

    files = {}
    for path in sorted(outdir.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            files[path.relative_to(outdir).as_posix()] = digest
    manifest = {
        "tool": {"name": "trine", "version": __version__},
        "config": cfg.semantic_dict(),
        "configHash": cfg.semantic_hash(),
        "bundleParams": {
            "gridMax": grid_max,
            "rtMasks": [[m.n, m.m] for m in rt_masks],
            "traces": [[m.n, m.m, L, start] for m, L, start in trace_specs],
        },
        "files": files,
    }
    _write_json(outdir / "manifest.json", manifest)
    return manifest


def cmd_bundle(args) -> int:
    cfg = _config_from_args(args)
    rt_masks = [parse_mask(text) for text in args.rt_masks]
    trace_specs = []
    for spec in args.trace:
        mask_text, L_text, start = spec.split(":")
        trace_specs.append((parse_mask(mask_text), int(L_text), start))
    manifest = build_bundle(Path(args.out), cfg, args.grid_max, rt_masks, trace_specs)
    print(f"bundle written to {args.out} ({len(manifest['files'])} files, "
          f"config {manifest['configHash'][:12]})")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="trine", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"trine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="run one start to its mirror and check the invariant")
    p.add_argument("--mask", help="mask as n,m")
    p.add_argument("--L", type=int, help="circle size")
    p.add_argument("--graph", help="graph JSON file instead of a mask")
    p.add_argument("--start", required=True, help="two-color start, e.g. ABA")
    p.add_argument("--out", help="directory for trace/report files")
    _add_config_flags(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("check-mask", help="search a mask for invariant violations")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--budget", type=int, help="cap on start pairs examined")
    p.add_argument("--json", help="write the verdict as JSON")
    _add_config_flags(p)
    p.set_defaults(func=cmd_check_mask)

    p = sub.add_parser("grid", help="verdicts for all odd masks up to a bound")
    p.add_argument("--max", type=int, default=19, help="odd bound for n and m")
    p.add_argument("--out", required=True, help="output CSV (written incrementally)")
    p.add_argument("--resume", action="store_true",
                   help="continue an interrupted grid from the CSV")
    p.add_argument("--json", help="also write the grid as JSON")
    p.add_argument("--cr-from", dest="cr_from",
                   help="directory of .rt files whose row counts annotate "
                        "the JSON cells")
    _add_config_flags(p)
    p.set_defaults(func=cmd_grid)

    prt = sub.add_parser("rt", help="resolution-table algebra")
    rtsub = prt.add_subparsers(dest="rt_command", required=True)

    p = rtsub.add_parser("extract", help="EXPERIMENTAL: table from verified runs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_rt_extract)

    p = rtsub.add_parser("expand", help="derive all six sub-tables")
    p.add_argument("table")
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_rt_expand)

    p = rtsub.add_parser("classify", help="value class and correctness kind")
    p.add_argument("tables", nargs="+")
    p.set_defaults(func=cmd_rt_classify)

    p = rtsub.add_parser("scounts", help="value occurrence summary")
    p.add_argument("tables", nargs="+")
    p.add_argument("--csv", help="write as CSV instead of stdout")
    p.set_defaults(func=cmd_rt_scounts)

    p = rtsub.add_parser("intersect", help="rows common to two tables")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out")
    p.set_defaults(func=lambda args: _binary_setop(args, rt.intersect))

    p = rtsub.add_parser("union", help="rows of either table")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out")
    p.set_defaults(func=lambda args: _binary_setop(args, rt.union))

    p = rtsub.add_parser("includes", help="does table a contain table b?")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=lambda args: _binary_setop(args, rt.includes), out=None)

    p = rtsub.add_parser("integral", help="compatibility check and union fold")
    p.add_argument("tables", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rt_integral)

    p = rtsub.add_parser("coincide", help="pairwise coincidence matrix")
    p.add_argument("tables", nargs="+")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_rt_coincide)

    p = rtsub.add_parser("build-1-2k1", help="inductive table for masks (1, 2^k-1)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--step-table", required=True,
                   help="JSON step-table file or builtin:all-combos")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rt_build)

    p = rtsub.add_parser("reflect", help="re-express a table for the mirrored mask")
    p.add_argument("table")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rt_reflect)

    p = sub.add_parser("bundle", help="full deterministic report bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--grid-max", type=int, default=7)
    p.add_argument("--rt-masks", nargs="*", default=["1,1", "1,3"],
                   help="masks to extract tables for, as n,m")
    p.add_argument("--trace", nargs="*", default=["1,1:3:ABA"],
                   help="traces as n,m:L:start")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bundle)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        return args.func(args)
    except (TrineError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
