"""Single entry-point command: ingest, serve, query, similar, stats.

JSON output mode emits exactly one document on stdout, byte-compatible with
the corresponding HTTP endpoint bodies; human mode prints plain text. Exit
codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .catalog import QueryValidationError
from .hashing import load_head
from .ingest import IngestConfig, ManifestError, build_archive, generate_synthetic, load_manifest
from .labels import UnknownLabel
from .server import SimilarRequestError, run_query, run_similar, run_stats
from .store import load_store

STORE_ENV = "HASHCUBE_STORE"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _dump(doc) -> str:
    # Same serialization starlette's JSONResponse uses, so CLI output matches
    # endpoint bodies byte for byte.
    return json.dumps(doc, ensure_ascii=False, allow_nan=False, separators=(",", ":"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hashcube", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--output", choices=("human", "json"), default="human", help="output mode"
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_ingest = sub.add_parser("ingest", help="build an archive store")
    source = p_ingest.add_mutually_exclusive_group(required=True)
    source.add_argument("--manifest", help="JSONL manifest to ingest")
    source.add_argument("--synthetic", type=int, metavar="N", help="generate N synthetic entries")
    p_ingest.add_argument("--out", required=True, help="store output directory")
    p_ingest.add_argument("--head", help="pre-trained head file (skips training)")
    p_ingest.add_argument("--seed", type=int, default=0)
    p_ingest.add_argument("--clusters", type=int, default=4, help="synthetic cluster count")
    p_ingest.add_argument("--dim", type=int, default=128, help="synthetic feature dimension")
    p_ingest.add_argument(
        "--with-bands", action="store_true", help="generate band grids for synthetic entries"
    )

    p_serve = sub.add_parser("serve", help="serve the HTTP API")
    _add_store_arg(p_serve)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--frontend", help="directory of built frontend assets to serve at /")

    p_query = sub.add_parser("query", help="run a metadata query")
    _add_store_arg(p_query)
    p_query.add_argument("--filter", default="{}", help="query JSON (same schema as POST /api/query)")

    p_similar = sub.add_parser("similar", help="similarity search")
    _add_store_arg(p_similar)
    ref = p_similar.add_mutually_exclusive_group(required=True)
    ref.add_argument("--name", help="archive patch name")
    ref.add_argument("--features", help="feature vector file (.npy or JSON list)")
    mode = p_similar.add_mutually_exclusive_group()
    mode.add_argument("--radius", type=int)
    mode.add_argument("--k", type=int)

    p_stats = sub.add_parser("stats", help="label statistics for a query")
    _add_store_arg(p_stats)
    p_stats.add_argument("--filter", default="{}", help="query JSON")

    return parser


def _add_store_arg(parser) -> None:
    parser.add_argument(
        "--store",
        default=os.environ.get(STORE_ENV),
        help=f"store directory (default: ${STORE_ENV})",
    )


def _require_store(args) -> Path:
    if not args.store:
        raise QueryValidationError({"store": f"--store or ${STORE_ENV} is required"})
    return Path(args.store)


def _parse_filter(raw: str) -> dict:
    try:
        doc = json.loads(raw)
    except ValueError as exc:
        raise QueryValidationError({"filter": f"not valid JSON: {exc}"})
    if not isinstance(doc, dict):
        raise QueryValidationError({"filter": "must be a JSON object"})
    return doc


def _cmd_ingest(args) -> int:
    head = load_head(args.head) if args.head else None
    if args.synthetic is not None:
        manifest = generate_synthetic(
            seed=args.seed,
            n=args.synthetic,
            clusters=args.clusters,
            dim=head.dim if head else args.dim,
            with_bands=args.with_bands,
        )
    else:
        manifest = load_manifest(args.manifest)
    config = IngestConfig(seed=args.seed)
    archive = build_archive(manifest, args.out, head=head, config=config)
    if args.output == "json":
        print(_dump({"store": str(archive.root), "patches": archive.size}))
    else:
        print(f"ingested {archive.size} patches into {archive.root}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    store = load_store(_require_store(args))
    app = create_app(store, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_query(args) -> int:
    store = load_store(_require_store(args))
    body = run_query(store, _parse_filter(args.filter))
    if args.output == "json":
        print(_dump(body))
    else:
        print(f"total: {body['total']}")
        for record in body["page"]:
            labels = ", ".join(record["labels"])
            print(
                f"{record['patch_name']}  {record['acquisition_date']}  "
                f"{record['season']:<6}  {record['satellite']}  {record['country']}: {labels}"
            )
    return 0


def _cmd_similar(args) -> int:
    store = load_store(_require_store(args))
    payload: dict = {}
    if args.name:
        payload["patch_name"] = args.name
    else:
        payload["payload"] = {"features": _load_features(args.features)}
    if args.radius is not None:
        payload["radius"] = args.radius
    if args.k is not None:
        payload["k"] = args.k
    body = run_similar(store, payload)
    if args.output == "json":
        print(_dump(body))
    else:
        print(f"query: {body['query_ref']}")
        for nb in body["neighbors"]:
            print(f"{nb['patch_name']}  distance={nb['distance']}")
    return 0


def _load_features(path: str) -> list[float]:
    p = Path(path)
    if p.suffix == ".npy":
        return [float(v) for v in np.load(p)]
    with open(p, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _cmd_stats(args) -> int:
    store = load_store(_require_store(args))
    body = run_stats(store, _parse_filter(args.filter))
    if args.output == "json":
        print(_dump(body))
    else:
        print(f"total: {body['total']}")
        for label, entry in body["stats"].items():
            print(f"{entry['count']:>8}  {entry['color']}  {label}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "serve": _cmd_serve,
    "query": _cmd_query,
    "similar": _cmd_similar,
    "stats": _cmd_stats,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (QueryValidationError, SimilarRequestError, ManifestError, UnknownLabel) as exc:
        print(f"hashcube {args.command}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"hashcube {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"hashcube {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
