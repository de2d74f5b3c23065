"""Batch command line over directories of label maps.

Subcommands: eval, stats, edges, weights, merge, loss, bokeh, report.
Shared flags: --jobs N, --classes table.json, --out PATH,
--format {md,csv,json}.

Inputs are processed at native resolution; nothing is resized on load.
Filename stems pair predictions with references, and a stem present on
only one side fails the run up front rather than being dropped. Images
that fail mid-run are listed on standard error and the rest proceed.

Determinism contract: worker results are reduced in sorted-stem order
and JSON is dumped with sorted keys, so repeated runs and different
--jobs values produce byte-identical output.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 some images
failed (offenders on standard error).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import multiprocessing
import os
import shutil
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ClassTable, ValidationError
from .curation import MergePolicy, StatsAccumulator, emit_training_weights, merge_pseudo
from .io import (
    find_prob_stems,
    load_class_table,
    load_label_map,
    load_mask_png,
    load_prob_map,
    load_prob_stack,
    load_rgb_png,
    save_class_table,
    save_label_map,
    save_mask_png,
    save_rgb_png,
    write_pfm,
)
from .losses import LossConfig, new_class_bce, total_loss
from .metrics import ClassScores, MetricAccumulator, MetricConfig
from .morphology import semantic_edges

__all__ = ["main", "build_parser", "JobSpec"]


# ---------------------------------------------------------------------------
# shared plumbing


def _load_table(args) -> ClassTable:
    if args.classes:
        return load_class_table(args.classes)
    return ClassTable.canonical()


def _png_files(directory: str) -> dict[str, Path]:
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"{d}: not a directory")
    files = {p.stem: p for p in sorted(d.glob("*.png"))}
    if not files:
        raise ValidationError(f"{d}: no .png files found")
    return files


def _align_stems(left: set[str], right: set[str], left_name: str, right_name: str) -> list[str]:
    """Stems common to both sides; any one-sided stem fails the run."""
    only_left = sorted(left - right)
    only_right = sorted(right - left)
    if only_left or only_right:
        parts = []
        if only_left:
            parts.append(f"only in {left_name}: {', '.join(only_left)}")
        if only_right:
            parts.append(f"only in {right_name}: {', '.join(only_right)}")
        raise ValidationError("filename stems do not align; " + "; ".join(parts))
    return sorted(left)


def _run_jobs(worker, jobs: list, workers: int) -> list[tuple[str, str, object]]:
    """Map per-image jobs and return results sorted by stem.

    The sorted reduce is what keeps output independent of --jobs.
    """
    if not jobs:
        return []
    if workers <= 1 or len(jobs) == 1:
        results = [worker(job) for job in jobs]
    else:
        with multiprocessing.Pool(processes=min(workers, len(jobs))) as pool:
            results = list(pool.imap_unordered(worker, jobs, chunksize=1))
    return sorted(results, key=lambda r: r[0])


def _split_results(results) -> tuple[list[tuple[str, object]], list[str]]:
    ok: list[tuple[str, object]] = []
    failed: list[str] = []
    for stem, status, payload in results:
        if status == "ok":
            ok.append((stem, payload))
        else:
            failed.append(stem)
            print(f"failed: {stem}: {payload}", file=sys.stderr)
    return ok, failed


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _deliver(artifact: dict, rendered: str | None, args) -> None:
    """Artifact JSON to --out (or stdout); rendered table to stdout."""
    if args.out:
        Path(args.out).write_text(_dump_json(artifact), encoding="utf-8")
        if args.fmt != "json" and rendered is not None:
            sys.stdout.write(rendered)
    elif args.fmt == "json" or rendered is None:
        sys.stdout.write(_dump_json(artifact))
    else:
        sys.stdout.write(rendered)


def _require_out_dir(args, command: str) -> Path:
    if not args.out:
        raise ValidationError(f"{command} requires --out DIR for its exported files")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# report table rendering


@dataclass
class ReportRow:
    method: str
    per_class: dict[int, ClassScores]
    means: dict


@dataclass
class ReportTable:
    """Rows of per-class and mean scores; IoU and BIoU render in
    percent (2 decimals), BF1 as a 0-1 fraction (4 decimals). The
    aggregate row is recomputed from raw counts, never from cells."""

    class_columns: list[tuple[int, str]]
    rows: list[ReportRow]
    aggregate: ReportRow


def _column_spec(table: ReportTable) -> list[tuple[str, object, bool]]:
    """(header, getter, render-as-percent) triples for every column."""
    cols: list[tuple[str, object, bool]] = []
    for cid, name in table.class_columns:
        cols.append((f"{name} IoU", lambda r, c=cid: _score(r, c, "iou"), True))
        cols.append((f"{name} BIoU", lambda r, c=cid: _score(r, c, "biou"), True))
        cols.append((f"{name} BF1", lambda r, c=cid: _score(r, c, "bf1"), False))
    cols.append(("mIoU", lambda r: r.means["miou"], True))
    cols.append(("mBIoU", lambda r: r.means["mbiou"], True))
    cols.append(("mBF1", lambda r: r.means["mbf1"], False))
    return cols


def _score(row: ReportRow, cid: int, field: str) -> float | None:
    scores = row.per_class.get(cid)
    return getattr(scores, field) if scores is not None else None


def _fmt_cell(value: float | None, percent: bool) -> str:
    if value is None:
        return "-"
    return f"{100.0 * value:.2f}" if percent else f"{value:.4f}"


def _grid(table: ReportTable) -> tuple[list[str], list[list[str]], list[str], list[list[float | None]]]:
    cols = _column_spec(table)
    headers = ["method"] + [h for h, _g, _p in cols]
    raw = [[g(row) for _h, g, _p in cols] for row in table.rows]
    cells = [
        [row.method] + [_fmt_cell(v, p) for v, (_h, _g, p) in zip(vals, cols)]
        for row, vals in zip(table.rows, raw)
    ]
    agg_vals = [g(table.aggregate) for _h, g, _p in cols]
    agg = [table.aggregate.method] + [
        _fmt_cell(v, p) for v, (_h, _g, p) in zip(agg_vals, cols)
    ]
    return headers, cells, agg, raw


def render_markdown(table: ReportTable) -> str:
    """Markdown table; best cell per column bold, second-best italic.

    Ties share a flag; ranking needs at least two data rows and skips
    the aggregate row.
    """
    headers, cells, agg, raw = _grid(table)
    if len(cells) >= 2:
        for j in range(len(headers) - 1):
            vals = sorted({v for row in raw if (v := row[j]) is not None}, reverse=True)
            if not vals:
                continue
            best = vals[0]
            second = vals[1] if len(vals) > 1 else None
            for i, row in enumerate(raw):
                if row[j] == best:
                    cells[i][j + 1] = f"**{cells[i][j + 1]}**"
                elif second is not None and row[j] == second:
                    cells[i][j + 1] = f"_{cells[i][j + 1]}_"
    lines = [
        "| " + " | ".join(headers) + " |",
        "|" + "|".join(" --- " for _ in headers) + "|",
    ]
    for row in cells + [agg]:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def render_csv(table: ReportTable) -> str:
    headers, cells, agg, _raw = _grid(table)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    for row in cells + [agg]:
        writer.writerow(row)
    return buf.getvalue()


def _row_json(row: ReportRow) -> dict:
    return {
        "method": row.method,
        "per_class": {str(cid): s.to_json_dict() for cid, s in sorted(row.per_class.items())},
        "means": row.means,
    }


def render_table_json(table: ReportTable) -> dict:
    return {
        "classes": [{"id": cid, "name": name} for cid, name in table.class_columns],
        "rows": [_row_json(r) for r in table.rows],
        "aggregate": _row_json(table.aggregate),
    }


def _render(table: ReportTable, fmt: str) -> str:
    if fmt == "csv":
        return render_csv(table)
    if fmt == "json":
        return _dump_json(render_table_json(table))
    return render_markdown(table)


def _row_from_accumulator(method: str, acc: MetricAccumulator) -> ReportRow:
    fin = acc.finalize()
    return ReportRow(method, fin["per_class"], fin["means"])


# ---------------------------------------------------------------------------
# eval


@dataclass
class JobSpec:
    """One evaluation run: aligned directories plus its configuration."""

    pred_dir: str
    gt_dir: str
    out_path: str | None
    table: ClassTable
    workers: int
    config: MetricConfig
    fmt: str


def _eval_worker(job):
    stem, pred_path, gt_path, table, config = job
    try:
        pred = load_label_map(pred_path, table)
        gt = load_label_map(gt_path, table)
        acc = MetricAccumulator()
        record = acc.update(pred, gt, config, image_id=stem)
        return stem, "ok", {
            "record": record.to_json_dict(),
            "counts": {str(cid): c.to_json_dict() for cid, c in acc.counts.items()},
        }
    except Exception as exc:
        return stem, "err", f"{type(exc).__name__}: {exc}"


def cmd_eval(spec: JobSpec) -> tuple[dict, ReportTable, list[str]]:
    pred_files = _png_files(spec.pred_dir)
    gt_files = _png_files(spec.gt_dir)
    stems = _align_stems(set(pred_files), set(gt_files), "predictions", "references")
    jobs = [
        (stem, str(pred_files[stem]), str(gt_files[stem]), spec.table, spec.config)
        for stem in stems
    ]
    results = _run_jobs(_eval_worker, jobs, spec.workers)
    ok, failed = _split_results(results)

    acc = MetricAccumulator()
    per_image = []
    for _stem, payload in ok:
        per_image.append(payload["record"])
        acc = acc.merge(
            MetricAccumulator.from_json_dict(
                {"images_seen": 1, "per_class": payload["counts"]}
            )
        )
    fin = acc.finalize()
    artifact = {
        "config": spec.config.to_json_dict(),
        "per_image": per_image,
        "per_class": {
            str(cid): {
                "name": spec.table.name_of(cid),
                "counts": acc.counts[cid].to_json_dict(),
                "scores": fin["per_class"][cid].to_json_dict(),
            }
            for cid in sorted(fin["per_class"])
        },
        "means": fin["means"],
    }
    columns = [(cid, spec.table.name_of(cid)) for cid in sorted(fin["per_class"])]
    row = _row_from_accumulator("eval", acc)
    table = ReportTable(columns, [row], row)
    return artifact, table, failed


def _cmd_eval(args) -> int:
    table = _load_table(args)
    config = MetricConfig(
        biou_fraction=args.biou_fraction,
        biou_min_d=args.biou_min_d,
        bf1_tolerance=args.bf1_tolerance,
        classes=table,
    )
    spec = JobSpec(
        pred_dir=args.pred_dir,
        gt_dir=args.gt_dir,
        out_path=args.out,
        table=table,
        workers=args.jobs,
        config=config,
        fmt=args.fmt,
    )
    artifact, report_table, failed = cmd_eval(spec)
    _deliver(artifact, _render(report_table, args.fmt), args)
    return 3 if failed else 0


# ---------------------------------------------------------------------------
# stats


def _stats_worker(job):
    stem, path, table = job
    try:
        acc = StatsAccumulator()
        acc.update(load_label_map(path, table))
        return stem, "ok", acc.to_json_dict()
    except Exception as exc:
        return stem, "err", f"{type(exc).__name__}: {exc}"


def _cmd_stats(args) -> int:
    table = _load_table(args)
    files = _png_files(args.label_dir)
    jobs = [(stem, str(path), table) for stem, path in sorted(files.items())]
    results = _run_jobs(_stats_worker, jobs, args.jobs)
    ok, failed = _split_results(results)
    if not ok:
        raise ValidationError(f"{args.label_dir}: no label map could be read")

    acc = StatsAccumulator()
    for _stem, payload in ok:
        acc = acc.merge(StatsAccumulator.from_json_dict(payload))
    stats = acc.finalize()
    artifact = stats.to_json_dict()

    rows = [
        ("image_count", str(stats.image_count)),
        ("diag_mean", f"{stats.diag_mean:.2f}"),
        ("diag_std", f"{stats.diag_std:.2f}"),
        ("mipq_mean", f"{stats.mipq_mean:.4f}"),
        ("mipq_std", f"{stats.mipq_std:.4f}"),
    ]
    for cid, frac in sorted(stats.pixel_fraction.items()):
        name = table.name_of(cid) if cid in table else str(cid)
        rows.append((f"pixel_fraction[{name}]", f"{frac:.4f}"))
    for count, n in sorted(stats.class_count_hist.items()):
        rows.append((f"images_with_{count}_classes", str(n)))
    if args.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("field", "value"))
        writer.writerows(rows)
        rendered = buf.getvalue()
    else:
        lines = ["| field | value |", "| --- | --- |"]
        lines += [f"| {k} | {v} |" for k, v in rows]
        rendered = "\n".join(lines) + "\n"
    _deliver(artifact, rendered, args)
    return 3 if failed else 0


# ---------------------------------------------------------------------------
# edges / weights exporters


def _edges_worker(job):
    stem, path, table, radius, out_dir = job
    try:
        label_map = load_label_map(path, table)
        edges = semantic_edges(label_map, radius)
        save_mask_png(edges, Path(out_dir) / f"{stem}.edge.png")
        return stem, "ok", None
    except Exception as exc:
        return stem, "err", f"{type(exc).__name__}: {exc}"


def _cmd_edges(args) -> int:
    table = _load_table(args)
    out_dir = _require_out_dir(args, "edges")
    files = _png_files(args.label_dir)
    jobs = [(stem, str(path), table, args.radius, str(out_dir)) for stem, path in sorted(files.items())]
    _ok, failed = _split_results(_run_jobs(_edges_worker, jobs, args.jobs))
    return 3 if failed else 0


def _weights_worker(job):
    stem, path, table, config, out_dir = job
    try:
        label_map = load_label_map(path, table)
        for cid, factor in emit_training_weights(label_map, config):
            write_pfm(factor.astype(np.float32), Path(out_dir) / f"{stem}.w{cid}.pfm")
        return stem, "ok", None
    except Exception as exc:
        return stem, "err", f"{type(exc).__name__}: {exc}"


def _cmd_weights(args) -> int:
    table = _load_table(args)
    out_dir = _require_out_dir(args, "weights")
    config = LossConfig(k=args.k, lam1=args.lam1, lam2=args.lam2).for_table(table)
    files = _png_files(args.label_dir)
    jobs = [(stem, str(path), table, config, str(out_dir)) for stem, path in sorted(files.items())]
    _ok, failed = _split_results(_run_jobs(_weights_worker, jobs, args.jobs))
    return 3 if failed else 0


# ---------------------------------------------------------------------------
# merge


def _merge_worker(job):
    stem, gt_path, pseudo_path, table, policy, out_dir = job
    try:
        gt = load_label_map(gt_path, table)
        pseudo = load_mask_png(pseudo_path)
        merged, report = merge_pseudo(gt, pseudo, policy)
        save_label_map(merged, Path(out_dir) / f"{stem}.png")
        return stem, "ok", report.to_json_dict()
    except Exception as exc:
        return stem, "err", f"{type(exc).__name__}: {exc}"


def _parse_new_class(text: str) -> tuple[str, int | None]:
    name, sep, cid = text.partition(":")
    if not sep:
        return name, None
    try:
        return name, int(cid)
    except ValueError:
        raise ValidationError(f"--new-class expects NAME or NAME:ID, got {text!r}")


def _cmd_merge(args) -> int:
    table = _load_table(args)
    out_dir = _require_out_dir(args, "merge")
    name, cid = _parse_new_class(args.new_class)
    if cid is None:
        cid = table.next_free_id()
    try:
        replaceable = frozenset(int(c) for c in args.replaceable.split(",") if c != "")
    except ValueError:
        raise ValidationError(f"--replaceable expects comma-separated ids, got {args.replaceable!r}")
    policy = MergePolicy(
        new_class_id=cid,
        new_class_name=name,
        replaceable=replaceable,
        conflict_handling=args.on_conflict,
    )

    gt_files = _png_files(args.gt_dir)
    pseudo_files = _png_files(args.pseudo_dir)
    stems = _align_stems(set(gt_files), set(pseudo_files), "references", "pseudo masks")
    jobs = [
        (stem, str(gt_files[stem]), str(pseudo_files[stem]), table, policy, str(out_dir))
        for stem in stems
    ]
    ok, failed = _split_results(_run_jobs(_merge_worker, jobs, args.jobs))

    with open(out_dir / "manifest.jsonl", "w", encoding="utf-8") as fh:
        for stem, payload in ok:
            record = {
                "image": stem,
                "assigned": payload["assigned"],
                "conflicts": payload["conflicts"],
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    save_class_table(
        table if cid in table else table.with_new_class(name, cid),
        out_dir / "table.json",
    )
    return 3 if failed else 0


# ---------------------------------------------------------------------------
# loss


def _loss_worker(job):
    stem, pred_dir, gt_path, table, config, mode = job
    try:
        gt = load_label_map(gt_path, table)
        stack = load_prob_stack(pred_dir, table, stem)
        if mode == "new":
            report = new_class_bce(stack, gt, config)
        else:
            edge_path = Path(pred_dir) / f"{stem}.edge.pfm"
            pred_edge = load_prob_map(edge_path) if edge_path.exists() else None
            report = total_loss(stack, pred_edge, gt, config)
        payload = report.to_json_dict()
        payload["image"] = stem
        return stem, "ok", payload
    except Exception as exc:
        return stem, "err", f"{type(exc).__name__}: {exc}"


def _cmd_loss(args) -> int:
    table = _load_table(args)
    config = LossConfig(
        k=args.k,
        lam=args.lam,
        lam1=args.lam1,
        lam2=args.lam2,
        epsilon=args.epsilon,
        edge_radius=args.edge_radius,
    ).for_table(table)
    gt_files = _png_files(args.gt_dir)
    pred_dir = Path(args.pred_dir)
    if not pred_dir.is_dir():
        raise FileNotFoundError(f"{pred_dir}: not a directory")
    pred_stems = set(find_prob_stems(pred_dir))
    stems = _align_stems(pred_stems, set(gt_files), "predictions", "references")
    jobs = [
        (stem, str(pred_dir), str(gt_files[stem]), table, config, args.mode)
        for stem in stems
    ]
    ok, failed = _split_results(_run_jobs(_loss_worker, jobs, args.jobs))

    per_image = [payload for _stem, payload in ok]
    means = {}
    if per_image:
        for key in ("bce_weighted", "dice", "edge", "total_partial"):
            means[key] = sum(r[key] for r in per_image) / len(per_image)
    artifact = {
        "config": config.to_json_dict(),
        "mode": args.mode,
        "per_image": per_image,
        "means": means,
    }

    headers = ("image", "bce_weighted", "dice", "edge", "total_partial")
    body = [
        (r["image"], f"{r['bce_weighted']:.6f}", f"{r['dice']:.6f}",
         f"{r['edge']:.6f}", f"{r['total_partial']:.6f}")
        for r in per_image
    ]
    if means:
        body.append(
            ("mean", f"{means['bce_weighted']:.6f}", f"{means['dice']:.6f}",
             f"{means['edge']:.6f}", f"{means['total_partial']:.6f}")
        )
    if args.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(headers)
        writer.writerows(body)
        rendered = buf.getvalue()
    else:
        lines = [
            "| " + " | ".join(headers) + " |",
            "|" + "|".join(" --- " for _ in headers) + "|",
        ]
        lines += ["| " + " | ".join(row) + " |" for row in body]
        rendered = "\n".join(lines) + "\n"
    _deliver(artifact, rendered, args)
    return 3 if failed else 0


# ---------------------------------------------------------------------------
# bokeh


def _cmd_bokeh(args) -> int:
    if not args.out:
        raise ValidationError("bokeh requires --out FILE for the composited image")
    if args.sigma < 0:
        raise ValidationError("sigma must be non-negative")
    if args.feather < 0:
        raise ValidationError("feather must be non-negative")
    if args.sigma == 0:
        # blur-free composite equals the input; copy preserves the bytes
        if not Path(args.image).is_file():
            raise FileNotFoundError(f"{args.image}: no such file")
        shutil.copyfile(args.image, args.out)
        return 0

    from scipy.ndimage import gaussian_filter

    image = load_rgb_png(args.image)
    mask = load_mask_png(args.mask)
    if mask.shape != image.shape[:2]:
        raise ValidationError(
            f"mask dimensions {mask.shape} differ from image {image.shape[:2]}"
        )
    if mask.all() and args.feather == 0:
        # everything is foreground, so the composite is the input; copy
        # the file instead of re-encoding it
        shutil.copyfile(args.image, args.out)
        return 0
    img = image.astype(np.float64)
    blurred = gaussian_filter(img, sigma=(args.sigma, args.sigma, 0.0), mode="nearest")
    if args.feather > 0:
        alpha = gaussian_filter(mask.astype(np.float64), sigma=args.feather, mode="nearest")
    else:
        alpha = mask.astype(np.float64)
    composite = alpha[..., None] * img + (1.0 - alpha[..., None]) * blurred
    out = np.clip(np.rint(composite), 0, 255).astype(np.uint8)
    save_rgb_png(out, args.out)
    return 0


# ---------------------------------------------------------------------------
# report


def _cmd_report(args) -> int:
    artifacts = []
    for path in args.artifacts:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                artifacts.append((Path(path).stem, json.load(fh)))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: invalid artifact JSON: {exc}")

    tables = [ClassTable.from_json_dict(a["config"]["classes"]) for _m, a in artifacts]
    for (method, _a), table in zip(artifacts[1:], tables[1:]):
        if table != tables[0]:
            raise ValidationError(
                f"artifact {method!r} uses a different class table than {artifacts[0][0]!r}"
            )
    shared = tables[0]

    rows = []
    merged = MetricAccumulator()
    for method, artifact in artifacts:
        acc = MetricAccumulator.from_json_dict(
            {
                "images_seen": len(artifact["per_image"]),
                "per_class": {
                    cid: entry["counts"] for cid, entry in artifact["per_class"].items()
                },
            }
        )
        rows.append(_row_from_accumulator(method, acc))
        merged = merged.merge(acc)

    cids = sorted({cid for row in rows for cid in row.per_class})
    columns = [(cid, shared.name_of(cid)) for cid in cids]
    table = ReportTable(columns, rows, _row_from_accumulator("all", merged))
    rendered = _render(table, args.fmt)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--jobs", "-j", type=int, default=os.cpu_count() or 1,
        help="worker processes (default: logical CPU count)",
    )
    common.add_argument(
        "--classes", metavar="TABLE_JSON", default=None,
        help="class table JSON (default: the built-in 7-class table)",
    )
    common.add_argument("--out", "-o", default=None, help="output file or directory")
    common.add_argument(
        "--format", dest="fmt", choices=("md", "csv", "json"), default="md",
        help="rendering for tables printed to stdout",
    )

    parser = argparse.ArgumentParser(
        prog="maskeval",
        description="Boundary-aware mask evaluation, dataset curation, and loss reporting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="score predictions against references")
    p.add_argument("pred_dir")
    p.add_argument("gt_dir")
    p.add_argument("--biou-fraction", type=float, default=0.001)
    p.add_argument("--biou-min-d", type=int, default=1)
    p.add_argument("--bf1-tolerance", type=float, default=2.0)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("stats", parents=[common], help="corpus statistics over label maps")
    p.add_argument("label_dir")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("edges", parents=[common], help="export class-contour PNGs")
    p.add_argument("label_dir")
    p.add_argument("--radius", type=int, default=0)
    p.set_defaults(func=_cmd_edges)

    p = sub.add_parser("weights", parents=[common], help="export per-class factor PFMs")
    p.add_argument("label_dir")
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--lam1", type=float, default=1.0)
    p.add_argument("--lam2", type=float, default=1.0)
    p.set_defaults(func=_cmd_weights)

    p = sub.add_parser("merge", parents=[common], help="merge pseudo masks as a new class")
    p.add_argument("gt_dir")
    p.add_argument("pseudo_dir")
    p.add_argument("--new-class", required=True, metavar="NAME[:ID]")
    p.add_argument("--replaceable", default="0", metavar="IDS")
    p.add_argument("--on-conflict", choices=("skip", "override", "error"), default="skip")
    p.set_defaults(func=_cmd_merge)

    p = sub.add_parser("loss", parents=[common], help="loss reports over probability stacks")
    p.add_argument("pred_dir")
    p.add_argument("gt_dir")
    p.add_argument("--mode", choices=("total", "new"), default="total")
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--lam1", type=float, default=1.0)
    p.add_argument("--lam2", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=1e-7)
    p.add_argument("--edge-radius", type=int, default=0)
    p.set_defaults(func=_cmd_loss)

    p = sub.add_parser("bokeh", parents=[common], help="composite a blurred background")
    p.add_argument("image")
    p.add_argument("mask")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--feather", type=float, default=0.0)
    p.set_defaults(func=_cmd_bokeh)

    p = sub.add_parser("report", parents=[common], help="render tables from eval artifacts")
    p.add_argument("artifacts", nargs="+")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
