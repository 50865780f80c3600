"""Command-line interface: train, eval, stream, augment.

Exit codes: 0 success, 1 usage or configuration problem, 2 bad or
unreadable data, 3 training failure.  Results go to standard output,
diagnostics to standard error.
"""

import argparse
import os
import sys

from ferlite import checkpoint as ckpt
from ferlite import config as cfgfile
from ferlite import dataset, gate, pgm
from ferlite import rng as _rng
from ferlite.augment import AugmentConfig, augment
from ferlite.errors import ConfigError, DataError, FerliteError, TrainingError
from ferlite.imgproc import resize_bilinear
from ferlite.model import ModelConfig, build_fer_cnn
from ferlite.train import (TrainConfig, evaluate, fine_tune_stage2, train,
                           write_history_csv)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TRAINING = 3

DEFAULTS = {
    "seed": 0,
    "epochs": 10,
    "batch_size": 32,
    "lr": 0.01,
    "momentum": 0.9,
    "conv_channels": (64, 128, 512, 512),
    "dense_sizes": (256, 256, 7),
    "dropout": 0.3,
    "kernel_size": 3,
    "aug_rotation": 15.0,
    "aug_brightness": (0.6, 1.4),
    "aug_flip": 0.5,
    "finetune_epochs": None,  # falls back to epochs
    "trainable_dense": 2,
    "target_train_acc": None,
    "report_interval": 1,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the documented contract is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    value = int(text, 10)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def build_parser():
    parser = _Parser(prog="ferlite", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model on a FER2013-format CSV")
    p_train.add_argument("--data", required=True, help="path to the labeled CSV")
    p_train.add_argument("--out", required=True, help="checkpoint output path")
    p_train.add_argument("--config", help="flat key=value config file; flags win")
    p_train.add_argument("--history", help="history CSV path (default: <out>.history.csv)")
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--epochs", type=_positive_int)
    p_train.add_argument("--batch-size", type=_positive_int, dest="batch_size")
    p_train.add_argument("--lr", type=float)
    p_train.add_argument("--momentum", type=float)
    p_train.add_argument("--conv-channels", type=cfgfile.parse_int_list,
                         dest="conv_channels", metavar="C1,C2,C3,C4")
    p_train.add_argument("--dense-sizes", type=cfgfile.parse_int_list,
                         dest="dense_sizes", metavar="D1,D2,D3")
    p_train.add_argument("--dropout", type=float)
    p_train.add_argument("--kernel-size", type=_positive_int, dest="kernel_size")
    p_train.add_argument("--no-augment", action="store_true",
                         help="disable training-time augmentation")
    p_train.add_argument("--aug-rotation", type=float, dest="aug_rotation",
                         help="max rotation in degrees")
    p_train.add_argument("--aug-brightness", type=cfgfile.parse_float_pair,
                         dest="aug_brightness", metavar="LO,HI")
    p_train.add_argument("--aug-flip", type=float, dest="aug_flip",
                         help="horizontal flip probability")
    p_train.add_argument("--finetune", action="store_true",
                         help="run the frozen-feature second stage after training")
    p_train.add_argument("--finetune-epochs", type=_positive_int, dest="finetune_epochs")
    p_train.add_argument("--trainable-dense", type=_positive_int, dest="trainable_dense",
                         help="dense layers (from the output) left trainable in stage 2")
    p_train.add_argument("--target-train-acc", type=float, dest="target_train_acc",
                         help="stop early once training accuracy reaches this")
    p_train.add_argument("--report-interval", type=int, dest="report_interval")
    p_train.add_argument("--use-csv-split", action="store_true",
                         help="split by the CSV Usage column instead of the seeded split")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on labeled data")
    p_eval.add_argument("--model", required=True, help="checkpoint path")
    p_eval.add_argument("--data", required=True, help="path to the labeled CSV")
    p_eval.add_argument("--split", choices=("train", "validate", "test", "all"),
                        default="test", help="which portion to score (default test)")
    p_eval.add_argument("--seed", type=int, default=0,
                        help="seed for the 8:1:1 split (must match training)")
    p_eval.add_argument("--use-csv-split", action="store_true")
    p_eval.add_argument("--report", help="write the confusion matrix as CSV here")
    p_eval.set_defaults(func=cmd_eval)

    p_stream = sub.add_parser("stream", help="gated inference over a directory of PGM frames")
    p_stream.add_argument("--model", required=True, help="checkpoint path")
    p_stream.add_argument("--frames", required=True, help="directory of .pgm frames")
    p_stream.add_argument("--thr", type=float, default=gate.DEFAULT_TAU,
                          help="scene-change threshold in gray levels per pixel "
                               "(total threshold = thr * width * height)")
    p_stream.add_argument("--no-denoise", action="store_true",
                          help="skip the 3x3 Gaussian filter")
    p_stream.add_argument("--out", help="report CSV path (default: standard output)")
    p_stream.set_defaults(func=cmd_stream)

    p_aug = sub.add_parser("augment", help="write augmented variants of one PGM image")
    p_aug.add_argument("--in", required=True, dest="input", help="source PGM image")
    p_aug.add_argument("--out", required=True, help="output directory")
    p_aug.add_argument("--seed", type=int, default=0)
    p_aug.add_argument("--count", type=_positive_int, default=8)
    p_aug.add_argument("--aug-rotation", type=float, dest="aug_rotation",
                       default=DEFAULTS["aug_rotation"])
    p_aug.add_argument("--aug-brightness", type=cfgfile.parse_float_pair,
                       dest="aug_brightness", default=DEFAULTS["aug_brightness"],
                       metavar="LO,HI")
    p_aug.add_argument("--aug-flip", type=float, dest="aug_flip",
                       default=DEFAULTS["aug_flip"])
    p_aug.set_defaults(func=cmd_augment)
    return parser


def _resolver(args, file_values):
    """Flag if given, else config-file value, else the built-in default."""

    def pick(name):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        if name in file_values:
            return file_values[name]
        return DEFAULTS[name]

    return pick


def _print_progress(stats):
    val = "" if stats.val_acc is None else f" val_acc={stats.val_acc:.4f}"
    print(f"epoch {stats.epoch}: train_acc={stats.train_acc:.4f}{val} "
          f"loss={stats.loss:.4f} lr={stats.lr:g}")


def cmd_train(args):
    file_values = cfgfile.load_config(args.config) if args.config else {}
    pick = _resolver(args, file_values)
    seed = pick("seed")

    augment_on = False if args.no_augment else file_values.get("augment", True)
    aug_cfg = None
    if augment_on:
        aug_cfg = AugmentConfig(
            rotation_degrees=pick("aug_rotation"),
            brightness_range=tuple(pick("aug_brightness")),
            flip_probability=pick("aug_flip"),
            seed=seed,
        )
    model_cfg = ModelConfig(
        conv_channels=tuple(pick("conv_channels")),
        dense_sizes=tuple(pick("dense_sizes")),
        kernel_size=pick("kernel_size"),
        dropout_p=pick("dropout"),
        seed=seed,
    )
    train_cfg = TrainConfig(
        epochs=pick("epochs"),
        batch_size=pick("batch_size"),
        lr=pick("lr"),
        momentum=pick("momentum"),
        seed=seed,
        augment=aug_cfg,
        report_interval=pick("report_interval"),
        target_train_acc=pick("target_train_acc"),
    )

    data = dataset.load_fer_csv(args.data)
    if args.use_csv_split:
        splits = dataset.split_by_usage(data)
        if not splits.train:
            raise DataError(f"{args.data}: no rows tagged Training")
    else:
        splits = dataset.split(data, seed=seed)

    model = build_fer_cnn(model_cfg)
    history = train(model, splits.train, splits.validate, train_cfg,
                    progress=_print_progress)

    if args.finetune or file_values.get("finetune", False):
        stage2_epochs = pick("finetune_epochs") or train_cfg.epochs
        stage2_cfg = TrainConfig(
            epochs=stage2_epochs,
            batch_size=train_cfg.batch_size,
            lr=train_cfg.lr,  # divided by 10 inside fine_tune_stage2
            momentum=train_cfg.momentum,
            seed=seed,
            augment=aug_cfg,
            report_interval=train_cfg.report_interval,
            target_train_acc=train_cfg.target_train_acc,
        )
        history += fine_tune_stage2(
            model, splits.train, splits.validate, stage2_cfg,
            trainable_dense=pick("trainable_dense"),
            start_epoch=history[-1].epoch, progress=_print_progress)

    ckpt.save_checkpoint(model, args.out)
    history_path = args.history or args.out + ".history.csv"
    with open(history_path, "w", encoding="utf-8") as fh:
        write_history_csv(history, fh)

    if splits.test:
        acc, cm, _ = evaluate(model, splits.test)
        print(f"test accuracy {acc:.3f}")
        print(cm.format_per_class(), end="")
    return EXIT_OK


def cmd_eval(args):
    model = ckpt.load_checkpoint(args.model)
    data = dataset.load_fer_csv(args.data)
    if args.split == "all":
        rows = data
    elif args.use_csv_split:
        rows = getattr(dataset.split_by_usage(data), args.split)
    else:
        rows = getattr(dataset.split(data, seed=args.seed), args.split)
    if not rows:
        raise DataError(f"{args.data}: split {args.split!r} is empty")

    acc, cm, _ = evaluate(model, rows)
    print(f"accuracy {acc:.3f}")
    print("counts:")
    print(cm.format_matrix(), end="")
    print("row-normalized:")
    print(cm.format_matrix(normalized=True), end="")
    print(cm.format_per_class(), end="")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            cm.write_csv(fh)
    return EXIT_OK


def cmd_stream(args):
    model = ckpt.load_checkpoint(args.model)
    frames = pgm.list_frames(args.frames)
    records, _ = gate.run_stream(
        frames, lambda x: model.predict(x)[0],
        tau=args.thr, denoise=not args.no_denoise)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            gate.write_stream_report(records, fh)
    else:
        gate.write_stream_report(records, sys.stdout)
    return EXIT_OK


def cmd_augment(args):
    image = pgm.read_pgm(args.input)
    if image.shape != (48, 48):
        image = resize_bilinear(image, 48, 48)
    aug_cfg = AugmentConfig(
        rotation_degrees=args.aug_rotation,
        brightness_range=tuple(args.aug_brightness),
        flip_probability=args.aug_flip,
        seed=args.seed,
    )
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.count):
        variant = augment(image, aug_cfg, _rng.make_rng(args.seed, _rng.AUGMENT, i))
        pgm.write_pgm(os.path.join(args.out, f"aug_{i:04d}.pgm"), variant)
    print(f"wrote {args.count} variants to {args.out}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except FerliteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
