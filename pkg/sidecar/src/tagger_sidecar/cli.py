"""`tagger-sidecar`: serve a token-classification model over HTTP."""

from __future__ import annotations

import argparse
import sys


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tagger-sidecar",
        description="Serve word-level NER label distributions over HTTP.")
    parser.add_argument("--model", required=True,
                        help="model id or local checkpoint directory")
    parser.add_argument("--port", type=int, default=8571)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--deterministic", action="store_true",
                        help="pin seeds and thread count so identical "
                             "requests yield identical responses")
    args = parser.parse_args(argv)

    from .model import WordTagger

    try:
        tagger = WordTagger(args.model, deterministic=args.deterministic)
    except Exception as exc:  # model resolution/load failures end the process
        print(f"tagger-sidecar: cannot load model {args.model!r}: {exc}",
              file=sys.stderr)
        return 1

    import uvicorn

    from .app import create_app

    uvicorn.run(create_app(tagger), host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
