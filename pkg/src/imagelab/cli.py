"""Headless pipeline runner.

Exit codes: 0 success, 1 usage or I/O problem, 2 validation failure,
3 runtime failure inside an operator.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import operators as ops
from .blocks import catalog, spec_for
from .codecs import decode_png, decode_ppm, encode_png, encode_ppm
from .engine import (
    PipelineState,
    WriteArtifact,
    contours_document,
    execute,
    histogram_document,
    pipeline_from_doc,
    stage_kind,
)
from .errors import ImageLabError, TemplateError, UnknownOperatorError
from .raster import Image
from .rules import validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


class _UsageError(Exception):
    pass


def _read_image(path: Path) -> Image:
    suffix = path.suffix.lower()
    try:
        if suffix == ".png":
            return decode_png(path.read_bytes())
        if suffix in (".ppm", ".pgm"):
            return decode_ppm(path.read_bytes())
    except ImageLabError as exc:
        raise _UsageError(f"{path}: {exc}") from exc
    raise _UsageError(f"unsupported input extension {suffix!r} (use .png or .ppm)")


def _write_image(path: Path, img: Image) -> None:
    suffix = path.suffix.lower()
    if suffix == ".png":
        path.write_bytes(encode_png(img))
    elif suffix in (".ppm", ".pgm"):
        path.write_bytes(encode_ppm(img))
    else:
        raise _UsageError(f"unsupported output extension {suffix!r} (use .png or .ppm)")


def _load_pipeline_doc(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise _UsageError(f"{path}: not valid JSON: {exc}") from exc


def _product_document(output):
    if isinstance(output.product, ops.Histogram):
        return histogram_document(output.product)
    if isinstance(output.product, ops.ContourSet):
        return contours_document(output.product)
    return None


def _cmd_run(args) -> int:
    pipeline_doc = _load_pipeline_doc(Path(args.pipeline))
    output_path = Path(args.output)
    if output_path.suffix.lower() not in (".png", ".ppm", ".pgm"):
        raise _UsageError(f"unsupported output extension {output_path.suffix!r}")
    source = _read_image(Path(args.input))

    try:
        pipeline = pipeline_from_doc(pipeline_doc)
    except (TemplateError, UnknownOperatorError) as exc:
        print(f"invalid pipeline document: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    violations = validate(list(pipeline.blocks))
    if violations:
        for v in violations:
            print(f"{v.code} at {v.block_index}: {v.message}")
        return EXIT_VALIDATION
    if not pipeline.blocks:
        print("pipeline is empty: nothing to run", file=sys.stderr)
        return EXIT_VALIDATION

    dump_dir = Path(args.dump_stages) if args.dump_stages else None
    if dump_dir:
        dump_dir.mkdir(parents=True, exist_ok=True)

    state = execute(PipelineState(pipeline), source)
    stages = []
    failed = False
    for index, output in enumerate(state.outputs):
        kind = stage_kind(output)
        record = {"index": index, "op": output.op,
                  "elapsed_ms": round(output.elapsed_ms, 3), "kind": kind}
        if output.error is not None:
            record["error"] = output.error
            stages.append(record)
            print(f"stage {index:02d} {output.op}: ERROR: {output.error}")
            failed = True
            break
        if dump_dir:
            stage_png = dump_dir / f"stage-{index:02d}-{output.op.lower()}.png"
            stage_png.write_bytes(encode_png(output.image))
            record["path"] = str(stage_png)
            doc = _product_document(output)
            if doc is not None:
                (dump_dir / f"stage-{index:02d}-{output.op.lower()}.json").write_text(
                    json.dumps(doc, indent=2) + "\n"
                )
        if isinstance(output.product, WriteArtifact):
            artifact_path = output_path.parent / output.product.filename
            artifact_path.write_bytes(output.product.data)
            record["artifact"] = str(artifact_path)
        stages.append(record)
        line = f"stage {index:02d} {output.op} {kind} {record['elapsed_ms']}ms"
        if "path" in record:
            line += f" -> {record['path']}"
        print(line)

    report = {"status": "error" if failed else "ok", "stages": stages}
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    if failed:
        return EXIT_RUNTIME

    _write_image(output_path, state.outputs[-1].image)
    print(f"wrote {output_path}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    doc = _load_pipeline_doc(Path(args.pipeline))
    try:
        pipeline = pipeline_from_doc(doc)
    except (TemplateError, UnknownOperatorError) as exc:
        print(f"invalid pipeline document: {exc}")
        return EXIT_VALIDATION
    violations = validate(list(pipeline.blocks))
    if violations:
        for v in violations:
            print(f"{v.code} at {v.block_index}: {v.message}")
        return EXIT_VALIDATION
    print("ok")
    return EXIT_OK


def _cmd_ops_list(_args) -> int:
    for spec in catalog():
        print(f"{spec.op:<20} {spec.category}")
    return EXIT_OK


def _cmd_ops_describe(args) -> int:
    try:
        spec = spec_for(args.op)
    except UnknownOperatorError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    print(f"{spec.op} ({spec.display_name}) - {spec.category}")
    print(f"  {spec.description}")
    print(f"  input: {spec.input_format}   output: {spec.output_format}"
          + ("   source block" if spec.is_source else ""))
    if spec.params:
        print("  parameters:")
        for p in spec.params:
            bounds = []
            if p.minimum is not None:
                bounds.append((">" if p.exclusive_min else ">=") + f" {p.minimum}")
            if p.maximum is not None:
                bounds.append(f"<= {p.maximum}")
            if p.odd:
                bounds.append("odd")
            if p.choices:
                bounds.append("one of " + "/".join(str(c) for c in p.choices))
            detail = f" ({', '.join(bounds)})" if bounds else ""
            note = f" - {p.description}" if p.description else ""
            print(f"    {p.name}: {p.type} = {p.default!r}{detail}{note}")
    else:
        print("  parameters: none")
    print(f"  example: {spec.example}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imagelab",
                                     description="Validate and run image pipelines headlessly.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="validate and execute a pipeline on an image")
    run.add_argument("--pipeline", required=True, help="pipeline JSON document")
    run.add_argument("--input", required=True, help="source image (.png/.ppm)")
    run.add_argument("--output", required=True, help="final image path (.png/.ppm)")
    run.add_argument("--dump-stages", help="directory for per-stage artifacts")
    run.add_argument("--report", help="write the run report as JSON here")
    run.set_defaults(handler=_cmd_run)

    val = sub.add_parser("validate", help="check a pipeline document against the rules")
    val.add_argument("pipeline", help="pipeline JSON document")
    val.set_defaults(handler=_cmd_validate)

    ops_parser = sub.add_parser("ops", help="inspect the operator catalog")
    ops_sub = ops_parser.add_subparsers(dest="ops_command", required=True)
    ops_list = ops_sub.add_parser("list", help="list operator ids")
    ops_list.set_defaults(handler=_cmd_ops_list)
    ops_desc = ops_sub.add_parser("describe", help="describe one operator")
    ops_desc.add_argument("op", help="operator id, e.g. BOX_BLUR")
    ops_desc.set_defaults(handler=_cmd_ops_describe)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ImageLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
