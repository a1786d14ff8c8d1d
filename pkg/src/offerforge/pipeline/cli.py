"""Command-line entry point: ``offerforge <subcommand> [flags]``.

Exit codes: 0 ok, 2 input error, 3 missing artifact, 4 parameter error.
The config file comes from ``--config`` or the OFFERFORGE_CONFIG variable;
``--seed``, ``--epsilon``, ``--phi``, ``--input`` and ``--output`` override it.
``--input`` is the customers CSV for segment, train-tree and offers, the
event file for stream, the item stream for entropy and the synthetic spec
JSON for gen-data.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import ConfigError, OfferforgeError
from . import commands
from .config import load_config
from .synth import SyntheticSpec, generate


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--phi", type=float)
    common.add_argument("--input", help="primary input file (meaning depends on the subcommand)")
    common.add_argument("--output", help="output directory")

    parser = argparse.ArgumentParser(prog="offerforge", description="Customer segmentation and offer targeting.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-data", parents=[common], help="write a synthetic dataset")
    sub.add_parser("segment", parents=[common], help="GA segmentation of customers")
    sub.add_parser("train-tree", parents=[common], help="train the offer-response tree")
    stream = sub.add_parser("stream", parents=[common], help="replay rule firings, promote/retire rules")
    stream.add_argument("events", nargs="?", help="JSON-lines event file (or --input)")
    sub.add_parser("offers", parents=[common], help="assign offers from the promoted rules")
    entropy = sub.add_parser("entropy", parents=[common], help="estimate the entropy of an item stream")
    entropy.add_argument("stream", nargs="?", help="one item per line (or --input)")
    entropy.add_argument("--exact", action="store_true", help="also compute the exact entropy")
    return parser


def _gen_data(args) -> dict:
    data = {}
    if args.input:
        try:
            data = json.loads(Path(args.input).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"synthetic spec {args.input} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"synthetic spec {args.input}: {exc}") from None
    if args.seed is not None:
        data["seed"] = args.seed
    spec = SyntheticSpec.from_dict(data)
    paths = generate(spec, Path(args.output or "data"))
    return {k: str(v) for k, v in paths.items()}


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "gen-data":
            result = _gen_data(args)
        else:
            cli = {"seed": args.seed, "epsilon": args.epsilon, "phi": args.phi, "output": args.output}
            config = load_config(args.config, **cli)
            if args.command == "stream":
                source = args.events or args.input
                if not source:
                    raise ConfigError("stream needs an event file")
                result = commands.cmd_stream(config, source)
            elif args.command == "entropy":
                source = args.stream or args.input
                if not source:
                    raise ConfigError("entropy needs a stream file")
                result = commands.cmd_entropy(config, source, args.exact)
            else:
                if args.input:
                    config.paths["customers"] = Path(args.input).resolve()
                result = {
                    "segment": commands.cmd_segment,
                    "train-tree": commands.cmd_train_tree,
                    "offers": commands.cmd_offers,
                }[args.command](config)
                if args.command == "segment":
                    result = {k: result[k] for k in ("fitness", "generations", "segment_count", "targeted", "targeted_ltv")}
    except OfferforgeError as exc:
        print(f"offerforge: {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"offerforge: {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return 2
    print(json.dumps(result, sort_keys=True))
    return 0


def _one_line(exc: Exception) -> str:
    text = " ".join(str(exc).split())
    prefix = f"{type(exc).__name__}: "
    return text[len(prefix):] if text.startswith(prefix) else text


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
