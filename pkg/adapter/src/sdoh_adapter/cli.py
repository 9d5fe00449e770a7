"""sdoh-adapter command line: batch generation and a local HTTP server."""

from __future__ import annotations

import argparse
import sys

from .inference import AdapterError, Seq2SeqGenerator, generate_batch
from .server import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdoh-adapter",
        description="Run a seq2seq checkpoint over section texts, emitting the "
        "predictions JSONL consumed by the decoding toolkit.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("batch", help="generate one prediction per input record")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-new-tokens", type=int, default=256)
    p.add_argument("--sample", action="store_true", help="sample instead of greedy decoding")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="local HTTP mode (POST /generate, GET /healthz)")
    p.add_argument("--model", required=True)
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--max-new-tokens", type=int, default=256)

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.subcommand == "batch":
            responses = generate_batch(
                args.in_path,
                args.out,
                args.model,
                max_new_tokens=args.max_new_tokens,
                do_sample=args.sample,
                seed=args.seed,
            )
            failed = sum(1 for response in responses if response.error)
            print(f"wrote {len(responses)} records ({failed} with errors) to {args.out}")
            return 0
        serve(
            lambda: Seq2SeqGenerator(args.model, max_new_tokens=args.max_new_tokens),
            args.port,
            host=args.host,
        )
        return 0
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
