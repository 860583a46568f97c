"""Trainer command line.

``train`` fits one codec per bit budget on the exported corpus and saves
checkpoints plus loss logs; ``calibrate`` measures word error rates on
held-out chunks and writes the calibration CSV for the simulator.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .calibrate import calibrate, write_calibration
from .data import load_corpus_chunks, load_vocabulary, split_heldout
from .model import load_checkpoint, save_checkpoint
from .train import TrainConfig, train, word_error_rate


def _prepare_chunks(args):
    vocabulary = load_vocabulary(args.vocab)
    corpus = load_corpus_chunks(args.corpus, vocabulary, args.words_per_chunk)
    train_pool, heldout = split_heldout(corpus, fraction=0.15, seed=args.seed)
    return vocabulary, train_pool, heldout


def cmd_train(args) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    vocabulary, pool, heldout = _prepare_chunks(args)
    os.makedirs(args.out, exist_ok=True)
    for n_bits in args.n_bits:
        config = TrainConfig(n_bits=n_bits, words_per_chunk=args.words_per_chunk,
                             soft_steps=args.soft_steps,
                             hard_steps=args.hard_steps,
                             batch_size=args.batch_size, seed=args.seed)
        print(f"training {n_bits}-bit codec: {config.soft_steps} soft + "
              f"{config.hard_steps} hard steps, {len(pool)} corpus chunks, "
              f"vocab {vocabulary.size}")
        model, losses = train(pool, vocabulary, config)
        wer10 = word_error_rate(model, heldout, 10.0, seed=args.seed)
        print(f"  held-out word error at 10 dB: {wer10:.4f}")
        path = os.path.join(args.out, f"codec_{n_bits}.pt")
        save_checkpoint(model, path, extra={"losses": losses,
                                            "heldout_wer_10db": wer10})
        with open(os.path.join(args.out, f"loss_{n_bits}.json"), "w") as fh:
            json.dump(losses, fh)
        print(f"  checkpoint -> {path}")
    return 0


def cmd_calibrate(args) -> int:
    vocabulary, _, heldout = _prepare_chunks(args)
    models = {}
    for path in args.checkpoints:
        model = load_checkpoint(path)
        if model.spec.vocab_sha256 != vocabulary.sha256:
            print(f"error: checkpoint {path} was trained on a different "
                  f"vocabulary", file=sys.stderr)
            return 2
        models[model.spec.n_bits] = model
    rows = calibrate(models, heldout, args.esnr_db, trials=args.trials,
                     seed=args.seed)
    write_calibration(rows, args.out)
    for n_bits, esnr_db, wer in rows:
        print(f"n={n_bits} esnr={esnr_db:g} dB wer={wer:.4f}")
    print(f"calibration -> {args.out}")
    return 0


def _add_common(p):
    p.add_argument("--vocab", required=True,
                   help="vocabulary JSON exported by the simulator")
    p.add_argument("--corpus", required=True,
                   help="corpus text exported by the simulator")
    p.add_argument("--words-per-chunk", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="codec-trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    train_p = sub.add_parser("train", help="train codecs and save checkpoints")
    _add_common(train_p)
    train_p.add_argument("--n-bits", type=int, nargs="+", default=[1000, 2000])
    train_p.add_argument("--soft-steps", type=int, default=400)
    train_p.add_argument("--hard-steps", type=int, default=1600)
    train_p.add_argument("--batch-size", type=int, default=48)
    train_p.add_argument("--out", default="trained")

    cal_p = sub.add_parser("calibrate", help="measure WER and write the CSV")
    _add_common(cal_p)
    cal_p.add_argument("--checkpoints", nargs="+", required=True)
    cal_p.add_argument("--esnr-db", type=float, nargs="+",
                       default=[0.0, 5.0, 10.0])
    cal_p.add_argument("--trials", type=int, default=20_000)
    cal_p.add_argument("--out", default="calibration_trained.csv")

    args = parser.parse_args(argv)
    if args.command == "train":
        return cmd_train(args)
    return cmd_calibrate(args)


if __name__ == "__main__":
    sys.exit(main())
