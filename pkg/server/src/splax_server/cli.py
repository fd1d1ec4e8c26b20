"""splax-server command line: train and serve."""

from __future__ import annotations

import argparse
import logging
import sys

from .train import TrainConfig, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splax-server")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune a span model on a feature JSONL file")
    p.add_argument("--features", required=True, help="feature JSONL from `splax features --with-labels`")
    p.add_argument("--out", required=True, help="checkpoint directory to create")
    p.add_argument("--base-model", required=True,
                   help="pretrained model name, or a config dir/JSON for random init")
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--lr", type=float, default=3e-5)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--highway", action="store_true", help="insert a highway layer before the head")
    p.add_argument("--no-mixed-precision", action="store_true")
    p.add_argument("--device")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="serve a checkpoint over the scoring protocol")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "train":
        kwargs = dict(
            base_model=args.base_model,
            epochs=args.epochs,
            batch_size=args.batch_size,
            learning_rate=args.lr,
            highway_layer=args.highway,
            mixed_precision=not args.no_mixed_precision,
            max_steps=args.max_steps,
            seed=args.seed,
        )
        if args.device:
            kwargs["device"] = args.device
        result = train(args.features, TrainConfig(**kwargs), args.out)
        print(
            f"trained {len(result.step_losses)} steps in {result.wall_time_s:.1f}s; "
            f"final loss {result.step_losses[-1]:.4f}; checkpoint at {result.checkpoint_dir}"
        )
        return 0
    if args.command == "serve":
        from .serve import serve

        serve(args.checkpoint, host=args.host, port=args.port, device=args.device)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
