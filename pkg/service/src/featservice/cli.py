"""featservice command line: print layer shapes or serve the protocol."""

import argparse
import logging
import sys

from .errors import LayerNameError, ModelSpecError
from .model import build_model, describe_text
from .server import FeatureServer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="featservice", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="seeded:0",
                        help="seeded:<seed> or torchvision:<name>")
    common.add_argument("--layers", default="stage1,stage2,stage3",
                        help="comma-separated layer names, served in order")
    common.add_argument("--patch-size", type=int, default=224,
                        help="expected request width and height")

    sub.add_parser("describe", parents=[common],
                   help="print k and each layer's (v, h, d)")

    p_serve = sub.add_parser("serve", parents=[common],
                             help="serve requests until interrupted")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=9400)
    p_serve.add_argument("--workers", type=int, default=1,
                         help="parallel connections handled")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    layers = [name.strip() for name in args.layers.split(",") if name.strip()]
    try:
        model = build_model(args.model, layers, args.patch_size)
        if args.command == "describe":
            sys.stdout.write(describe_text(model))
            return 0
        model.shapes()  # warm up and fail fast before binding the port
    except (ModelSpecError, LayerNameError) as exc:
        print(f"featservice: {exc}", file=sys.stderr)
        return 2

    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    server = FeatureServer(model, host=args.host, port=args.port,
                           workers=args.workers)
    with server:
        print(f"listening on {args.host}:{server.port}", file=sys.stderr, flush=True)
        try:
            server.wait()
        except KeyboardInterrupt:
            pass
    return 0
