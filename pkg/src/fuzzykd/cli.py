"""Command-line interface.

Every flag can also be set through an environment variable with the
FUZZYKD_ prefix (e.g. FUZZYKD_SEED=3 mirrors --seed 3); explicit flags win.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .data import load_csv, normalize
from .distill import DistillConfig, distill, trace_lines, vanilla_kd_distill
from .harness import (GridSpec, format_report, run_method, rule_readout,
                      sweep)
from .rules import build_rule_base
from .serialize import load_model, save_model
from .student import TrainConfig, init_student, onehot_encode, train_student
from .teacher import fit_teacher, predict_teacher

ENV_PREFIX = "FUZZYKD_"


def _env_default(flag: str, fallback):
    return os.environ.get(ENV_PREFIX + flag.upper().replace("-", "_"),
                          fallback)


def _add_common(p):
    p.add_argument("--data", required=True, help="input CSV file")
    p.add_argument("--label-col", type=int,
                   default=int(_env_default("label-col", -1)),
                   help="label column index (default: last)")
    p.add_argument("--header", action="store_true",
                   help="first CSV row is a header")
    p.add_argument("--seed", type=int, default=int(_env_default("seed", 0)))
    p.add_argument("--out", default=_env_default("out", None),
                   help="output path (default: stdout)")


def _add_train(p):
    p.add_argument("--rules", type=int,
                   default=int(_env_default("rules", 8)))
    p.add_argument("--width", type=float,
                   default=float(_env_default("width", 0.5)))
    p.add_argument("--lr", type=float, default=float(_env_default("lr", 0.01)))
    p.add_argument("--epochs", type=int,
                   default=int(_env_default("epochs", 30)))
    p.add_argument("--xi", type=float,
                   default=float(_env_default("xi", 1e-5)))
    p.add_argument("--reg-L", type=float, dest="reg_l",
                   default=float(_env_default("reg-L", 100.0)))


def _add_distill(p):
    p.add_argument("--temp", type=float,
                   default=float(_env_default("temp", 2.0)))
    p.add_argument("--zeta", type=float,
                   default=float(_env_default("zeta", 1.0)))
    p.add_argument("--lambda", type=float, dest="lam",
                   default=float(_env_default("lambda", 2.0)))
    p.add_argument("--phi", type=float, default=float(_env_default("phi", 1.0)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzykd",
        description="TSK fuzzy classifiers with decoupled knowledge "
                    "distillation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-teacher",
                       help="closed-form fit of the high-order model")
    _add_common(p)
    _add_train(p)
    p.add_argument("--order", type=int, choices=range(4),
                   default=int(_env_default("order", 3)))

    p = sub.add_parser("train-student",
                       help="gradient training of the low-order model")
    _add_common(p)
    _add_train(p)
    p.add_argument("--order", type=int, choices=range(4),
                   default=int(_env_default("order", 1)))

    p = sub.add_parser("distill", help="distill the teacher into the student")
    _add_common(p)
    _add_train(p)
    _add_distill(p)
    p.add_argument("--vanilla", action="store_true",
                   help="use the coupled KL loss instead of the "
                        "decoupled one")
    p.add_argument("--trace-out", default=None,
                   help="write the per-epoch loss trace to this file")

    p = sub.add_parser("evaluate", help="cross-validated evaluation")
    _add_common(p)
    _add_train(p)
    _add_distill(p)
    p.add_argument("--method", default="distill-dkd",
                   help="teacher-only, student-only, distill-kd, "
                        "distill-dkd, tsk-order-N-llm or tsk-order-N-gd")
    p.add_argument("--folds", type=int,
                   default=int(_env_default("folds", 10)))
    p.add_argument("--global-normalize", action="store_true")
    p.add_argument("--no-time", action="store_true",
                   help="omit wall-time fields (byte-stable reports)")

    p = sub.add_parser("gridsearch",
                       help="evaluation with inner-CV hyperparameter search")
    _add_common(p)
    p.add_argument("--method", default="distill-dkd")
    p.add_argument("--folds", type=int,
                   default=int(_env_default("folds", 10)))
    p.add_argument("--grid", choices=("full", "coarse"), default="coarse")
    p.add_argument("--global-normalize", action="store_true")
    p.add_argument("--no-time", action="store_true")

    p = sub.add_parser("sweep", help="vary one distillation parameter")
    _add_common(p)
    _add_train(p)
    _add_distill(p)
    p.add_argument("--param", required=True,
                   help="tau, zeta, lambda, phi, lambda/zeta or "
                        "(lambda+zeta)/phi")
    p.add_argument("--folds", type=int,
                   default=int(_env_default("folds", 10)))

    p = sub.add_parser("explain", help="linguistic rule readout of a model")
    p.add_argument("--model", required=True, help="serialized model file")
    p.add_argument("--sample", required=True,
                   help="comma-separated feature values")
    p.add_argument("--out", default=None)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _load(args):
    ds = load_csv(args.data, header=args.header, label_col=args.label_col)
    return ds


def _cmd_train_teacher(args) -> None:
    ds = _load(args)
    X, _, _ = normalize(ds.X)
    rb = build_rule_base(args.rules, X.shape[1], args.width, args.seed)
    tm = fit_teacher(rb, X, ds.y.astype(float), args.reg_l,
                     np.arange(ds.n_classes, dtype=float), args.order)
    if not args.out:
        raise SystemExit("train-teacher requires --out for the model file")
    save_model(tm, args.out)
    resid = float(np.mean((predict_teacher(tm, X) - ds.y) ** 2))
    print(f"saved teacher to {args.out} (train MSE {resid:.6f})")


def _cmd_train_student(args) -> None:
    ds = _load(args)
    X, _, _ = normalize(ds.X)
    rb = build_rule_base(args.rules, X.shape[1], args.width, args.seed)
    sm = init_student(rb, ds.n_classes, args.order)
    cfg = TrainConfig(args.lr, args.epochs, args.xi)
    sm, trace = train_student(sm, X, onehot_encode(ds.y, ds.n_classes), cfg)
    if not args.out:
        raise SystemExit("train-student requires --out for the model file")
    save_model(sm, args.out)
    print(f"saved student to {args.out} "
          f"(final loss {trace[-1]['total']:.6f}, {len(trace)} epochs)")


def _cmd_distill(args) -> None:
    ds = _load(args)
    X, _, _ = normalize(ds.X)
    labels = np.arange(ds.n_classes, dtype=float)
    rb_t = build_rule_base(args.rules, X.shape[1], args.width, args.seed + 7)
    tm = fit_teacher(rb_t, X, ds.y.astype(float), args.reg_l, labels)
    t_out = predict_teacher(tm, X)
    rb = build_rule_base(args.rules, X.shape[1], args.width, args.seed)
    sm = init_student(rb, ds.n_classes)
    Y = onehot_encode(ds.y, ds.n_classes)
    cfg = DistillConfig(args.lr, args.epochs, args.xi,
                        temperature=args.temp, target_weight=args.zeta,
                        non_target_weight=args.lam, ce_weight=args.phi)
    if args.vanilla:
        sm, trace = vanilla_kd_distill(t_out, sm, X, Y, cfg,
                                       kd_weight=args.lam,
                                       class_labels=labels)
    else:
        sm, trace = distill(t_out, sm, X, Y, cfg, labels)
    if not args.out:
        raise SystemExit("distill requires --out for the model file")
    save_model(sm, args.out)
    if args.trace_out:
        _emit("\n".join(trace_lines(trace)), args.trace_out)
    print(f"saved distilled student to {args.out} "
          f"(final loss {trace[-1]['total']:.6f}, {len(trace)} epochs)")


def _cmd_evaluate(args) -> None:
    ds = _load(args)
    grid = GridSpec.fixed(n_rules=args.rules, temperature=args.temp,
                          target_weight=args.zeta,
                          non_target_weight=args.lam, ce_weight=args.phi,
                          reg=args.reg_l, max_epochs=args.epochs,
                          tol=args.xi, lr=args.lr, folds=args.folds,
                          width=args.width)
    rep = run_method(args.method, ds, grid, args.seed,
                     dataset_name=os.path.basename(args.data),
                     global_normalize=args.global_normalize)
    _emit(format_report([rep], include_time=not args.no_time), args.out)


def _cmd_gridsearch(args) -> None:
    ds = _load(args)
    cls = GridSpec if args.grid == "full" else GridSpec.coarse
    grid = cls(folds=args.folds)
    rep = run_method(args.method, ds, grid, args.seed,
                     dataset_name=os.path.basename(args.data),
                     global_normalize=args.global_normalize)
    _emit(format_report([rep], include_time=not args.no_time), args.out)


def _cmd_sweep(args) -> None:
    ds = _load(args)
    grid = GridSpec(rule_counts=(args.rules,), temperatures=(args.temp,),
                    target_weights=(args.zeta,),
                    non_target_weights=(args.lam,), ce_weights=(args.phi,),
                    reg=args.reg_l, max_epochs=args.epochs, tol=args.xi,
                    lr=args.lr, folds=args.folds, width=args.width)
    records = sweep(args.param, ds, grid, args.seed,
                    dataset_name=os.path.basename(args.data))
    lines = [f"sweep parameter={r['parameter']} value={r['value']:g} "
             f"acc_mean={r['mean_accuracy']:.9f} "
             f"acc_std={r['std_accuracy']:.9f}" for r in records]
    _emit("\n".join(lines), args.out)


def _cmd_explain(args) -> None:
    model = load_model(args.model)
    sample = np.array([float(v) for v in args.sample.split(",")])
    _emit(rule_readout(model, sample), args.out)


_COMMANDS = {
    "train-teacher": _cmd_train_teacher,
    "train-student": _cmd_train_student,
    "distill": _cmd_distill,
    "evaluate": _cmd_evaluate,
    "gridsearch": _cmd_gridsearch,
    "sweep": _cmd_sweep,
    "explain": _cmd_explain,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except SystemExit:
        raise
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"fuzzykd: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
