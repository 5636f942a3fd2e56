"""Command-line interface: encode, decode, repair, verify, simulate.

Defaults: field GF(2^8) with polynomial 0x11D, beta 1, variant c1 (stored
systematically, so nodes 1..k hold the raw bytes).  The enumeration budget
for transfer-schedule searches can be overridden with MBRREPAIR_BUDGET.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .blockio import (
    FormatError,
    Manifest,
    block_name,
    bytes_to_symbols,
    read_block,
    read_manifest,
    sha256,
    symbols_to_bytes,
    write_block,
    write_manifest,
)
from .codec import Codec
from .codes import VARIANT_ORDER, Variant, admissible_variants
from .field import FieldError, parse_field
from .harness import compare_variants, parse_workload, random_message, run_workload, summaries_to_csv
from .params import ParameterError, make_params
from .recovery import METRICS_FIELDS, RepairError, check_metrics_bounds, designated_helpers
from .search import (
    BudgetExceededError,
    all_pairs,
    default_budget,
    enumeration_size,
    schedule_feasible,
    verify_theorem_witness,
)

MANIFEST_NAME = "manifest.json"


class CLIError(Exception):
    pass


def _add_param_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--n", type=int, required=required, help="number of nodes")
    p.add_argument("--k", type=int, required=required, help="nodes needed to decode")
    p.add_argument("--d", type=int, required=required, help="helpers per repair")
    p.add_argument("--field", default="gf256", help="gf256 (default) or a prime such as 257")
    p.add_argument("--beta", type=int, default=1, help="symbols per helper per repair (default 1)")


def _params(args):
    return make_params(args.n, args.k, args.d, parse_field(args.field), args.beta)


def _metrics_csv(metrics, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=METRICS_FIELDS, lineterminator="\n")
    if header:
        w.writeheader()
    w.writerow(metrics.to_record())
    return buf.getvalue()


def cmd_encode(args) -> int:
    params = _params(args)
    variant = Variant(args.variant)
    codec = Codec(params, variant, systematic=variant is Variant.C1 and not args.no_systematic)
    data = Path(args.input).read_bytes()
    message, stripes = bytes_to_symbols(data, params)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    blocks = {}
    for c in codec.encode(message):
        blocks[c.node_id] = block_name(c.node_id)
        write_block(out / blocks[c.node_id], c, params, codec.systematic)
    manifest = Manifest(params, variant, len(data), stripes, blocks, sha256(data), codec.systematic)
    write_manifest(out / MANIFEST_NAME, manifest)
    print(f"encoded {len(data)} bytes into {stripes} stripes on {params.n} nodes ({variant}) in {out}")
    return 0


def _load_blocks(manifest: Manifest, paths) -> dict:
    out = {}
    for path in paths:
        header, content = read_block(path)
        if (header.params != manifest.params or header.variant != manifest.variant
                or header.stripes != manifest.stripes or header.systematic != manifest.systematic):
            raise FormatError(f"{path} does not belong to this object")
        if content.node_id in out:
            raise CLIError(f"duplicate block for node {content.node_id}")
        out[content.node_id] = content
    return out


def _available_blocks(manifest: Manifest, base: Path) -> list[Path]:
    return [base / name for _, name in sorted(manifest.blocks.items()) if (base / name).exists()]


def cmd_decode(args) -> int:
    mpath = Path(args.manifest)
    manifest = read_manifest(mpath)
    paths = [Path(b) for b in args.blocks] or _available_blocks(manifest, mpath.parent)
    contents = _load_blocks(manifest, paths)
    k = manifest.params.k
    if len(contents) < k:
        raise CLIError(f"need {k} blocks to decode, found {len(contents)}")
    codec = Codec(manifest.params, manifest.variant, manifest.systematic)
    message = codec.decode({i: contents[i] for i in list(contents)[:k]})
    data = symbols_to_bytes(message, manifest.length)
    if sha256(data) != manifest.checksum:
        raise CLIError("checksum mismatch: decoded data differs from the original")
    Path(args.output).write_bytes(data)
    print(f"decoded {len(data)} bytes from nodes {sorted(list(contents)[:k])}", file=sys.stderr)
    return 0


def _pick_helpers(args, manifest: Manifest, base: Path) -> tuple[int, ...]:
    p = manifest.params
    failed = args.failed
    if args.helpers:
        return tuple(args.helpers)
    if manifest.variant is Variant.C2:
        return tuple(sorted(designated_helpers(failed, p)))
    present = [i for i, name in sorted(manifest.blocks.items()) if i != failed and (base / name).exists()]
    if manifest.variant is Variant.COMPLETE_GRAPH:
        return tuple(present)
    return tuple(present[: p.d])


def cmd_repair(args) -> int:
    mpath = Path(args.manifest)
    base = mpath.parent
    manifest = read_manifest(mpath)
    p = manifest.params
    if not 1 <= args.failed <= p.n:
        raise CLIError(f"failed node must be in 1..{p.n}")
    helpers = _pick_helpers(args, manifest, base)
    for h in helpers:
        if h not in manifest.blocks or not (base / manifest.blocks[h]).exists():
            raise CLIError(f"block of helper {h} is missing")
    contents = _load_blocks(manifest, [base / manifest.blocks[h] for h in helpers])
    codec = Codec(p, manifest.variant, manifest.systematic)
    if args.mode == "compute":
        content, metrics = codec.repair(args.failed, helpers, contents, mode="compute")
    elif codec.transfer_admissible(args.failed, helpers):
        content, metrics = codec.repair(args.failed, helpers, contents, mode="transfer")
    else:
        budget = default_budget()
        if enumeration_size(p.unit()) > budget:
            raise BudgetExceededError(f"schedule search for one repair exceeds the budget of {budget}")
        schedule = schedule_feasible(codec.forms, args.failed, tuple(sorted(helpers)))
        if schedule is None:
            raise CLIError(
                f"node {args.failed} cannot be repaired by transfer from helpers {sorted(helpers)} "
                f"under {manifest.variant}: no choice of stored symbols determines it. "
                f"With d={p.d} != n-1={p.n - 1}, no code repairs every node from every helper set by "
                f"pure transfer at minimum download; use --mode compute"
                if p.d != p.n - 1 else
                f"node {args.failed} cannot be repaired by transfer from helpers {sorted(helpers)} "
                f"under {manifest.variant}; use --mode compute"
            )
        content, metrics = codec.repair_with_schedule(schedule, contents)
    check_metrics_bounds(metrics, p)
    name = manifest.blocks.get(args.failed, block_name(args.failed))
    write_block(base / name, content, p, manifest.systematic)
    text = _metrics_csv(metrics)
    sys.stdout.write(text)
    if args.metrics:
        Path(args.metrics).write_text(text)
    return 0


def _bound_checks(codec: Codec, seed: int = 0) -> dict:
    """Repair every node from every helper set on a random stripe; check the download and read bounds."""
    p = codec.params
    message = random_message(p, 1, seed)
    contents = {c.node_id: c for c in codec.encode(message)}
    checked = transfer = 0
    for failed, helpers in all_pairs(p):
        for mode in ("compute", "transfer"):
            if mode == "compute" and codec.variant is Variant.COMPLETE_GRAPH:
                continue
            if mode == "transfer" and not codec.transfer_admissible(failed, helpers):
                continue
            content, metrics = codec.repair(failed, helpers, contents, mode=mode)
            if content != contents[failed]:
                raise AssertionError(f"repair of node {failed} from {helpers} produced wrong content")
            check_metrics_bounds(metrics, p)
            checked += 1
            transfer += metrics.pure_transfer
    return {"repairs_checked": checked, "transfer_repairs": transfer, "download_equals_bound": True}


def cmd_verify(args) -> int:
    params = _params(args)
    variants = [Variant(v) for v in args.variant] if args.variant else admissible_variants(params)
    for v in variants:
        if v not in admissible_variants(params):
            raise CLIError(f"{v} is not available at these parameters")
    reports, doc, ok = [], [], True
    for v in variants:
        codec = Codec(params, v)
        report = verify_theorem_witness(params, v, vectors=codec.vectors, budget=args.budget)
        bounds = _bound_checks(codec)
        reports.append(report)
        if params.d != params.n - 1:
            expected = False
        elif v is Variant.COMPLETE_GRAPH:
            expected = True
        else:
            expected = None
        consistent = expected is None or report.overall == expected
        ok &= consistent
        entry = report.to_dict()
        entry.update(bounds=bounds, expected_overall=expected, consistent=consistent)
        doc.append(entry)
        verdict = "all pairs repairable by transfer" if report.overall else "NOT repairable by transfer for every pair"
        print(f"{v:>15}: {report.feasible_count}/{len(report.pairs)} (failed, helpers) pairs have a transfer "
              f"schedule -> {verdict}; {bounds['repairs_checked']} repairs meet the download bound"
              + ("" if consistent else "  [UNEXPECTED]"))
    result = {"n": params.n, "k": params.k, "d": params.d, "field": params.field.name, "beta": params.beta,
              "ok": bool(ok), "reports": doc}
    if args.json:
        Path(args.json).write_text(json.dumps(result, indent=2) + "\n")
    if args.figure:
        from .plotting import plot_feasibility
        plot_feasibility(reports, args.figure)
    return 0 if ok else 1


def cmd_simulate(args) -> int:
    workload = parse_workload(Path(args.workload).read_text())
    if args.manifest:
        mpath = Path(args.manifest)
        manifest = read_manifest(mpath)
        contents = _load_blocks(manifest, _available_blocks(manifest, mpath.parent))
        codec = Codec(manifest.params, manifest.variant, manifest.systematic)
        if len(contents) < manifest.params.k:
            raise CLIError("not enough blocks to reconstruct the object")
        message = codec.decode({i: contents[i] for i in list(contents)[: manifest.params.k]})
        summaries = [run_workload(manifest.variant, manifest.params, message, workload, manifest.systematic)]
    else:
        if None in (args.n, args.k, args.d):
            raise CLIError("give --manifest or all of --n --k --d")
        params = _params(args)
        message = random_message(params, args.stripes, workload.seed)
        variants = [Variant(v) for v in args.variant] if args.variant else None
        summaries = compare_variants(params, message, workload, systematic=True, variants=variants)
    text = summaries_to_csv(summaries)
    sys.stdout.write(text)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.csv").write_text(text)
        (out / "summary.json").write_text(json.dumps([s.to_dict() for s in summaries], indent=2) + "\n")
        from .plotting import plot_traffic
        plot_traffic(summaries, out / "traffic.png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbrrepair", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    variants = [str(v) for v in VARIANT_ORDER]

    p = sub.add_parser("encode", help="encode a file into n block files and a manifest")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="output directory")
    _add_param_flags(p)
    p.add_argument("--variant", choices=variants, default="c1", help="code variant (default c1)")
    p.add_argument("--no-systematic", action="store_true", help="skip systematic precoding for c1")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="rebuild the file from any k blocks")
    p.add_argument("manifest")
    p.add_argument("blocks", nargs="*", help="block files (default: all present next to the manifest)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("repair", help="regenerate one block from d helpers")
    p.add_argument("manifest")
    p.add_argument("--failed", type=int, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--helpers", type=int, nargs="+")
    g.add_argument("--designated", action="store_true", help="use the variant's preferred helpers")
    p.add_argument("--mode", choices=["transfer", "compute"], default="transfer")
    p.add_argument("--metrics", help="also write the metrics CSV record here")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("verify", help="exhaustive transfer-schedule search and bound checks")
    _add_param_flags(p)
    p.add_argument("--variant", choices=variants, action="append")
    p.add_argument("--budget", type=int, default=None, help="max schedule checks per report")
    p.add_argument("--json", help="write the structured report here")
    p.add_argument("--figure", help="write a feasibility bar chart here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="replay a workload and summarise traffic as CSV")
    p.add_argument("workload")
    p.add_argument("--manifest")
    _add_param_flags(p, required=False)
    p.add_argument("--stripes", type=int, default=4, help="stripes of random data (params mode)")
    p.add_argument("--variant", choices=variants, action="append")
    p.add_argument("--out-dir", help="write summary.csv, summary.json and traffic.png here")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, FormatError, FieldError, ParameterError, RepairError, BudgetExceededError,
            ValueError, OSError) as e:
        print(f"mbrrepair {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
