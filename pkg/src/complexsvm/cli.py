"""Command-line entry point: ``complexsvm {gen,fit,predict,crossval,exp}``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from .csvm import CsvmModel, label_to_str
from .datasets import (
    BlobConfig,
    SincGridConfig,
    channel_equalization_data,
    channel_identification_data,
    equalization_config,
    gen_quaternary_blobs,
    gen_sinc_grid,
    identification_config,
)
from .experiments import (
    EXPERIMENTS,
    METHODS,
    ConfigError,
    GridSearchConfig,
    NoConvergedCellError,
    TaskSpec,
    crossval,
    fit_method,
    load_config,
    run_experiment,
    t_from_sigma,
)
from .io import (
    CsvFormatError,
    config_hash,
    load_model,
    read_complex_csv,
    read_labeled_csv,
    save_model,
    write_complex_csv,
    write_labeled_csv,
    write_table,
)
from .kernels import KernelError
from .qp import ConvergenceWarning

_KERNEL_FOR = {"csvr": "complex_gaussian", "csvm": "complex_gaussian", "drc": "real_gaussian",
               "complexified": "real_gaussian"}


class CliError(Exception):
    pass


def _common(parser, suppress):
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--seed", type=int, help="random seed (data generation / fold split)",
                        **(kw or {"default": None}))
    parser.add_argument("--threads", type=int, help="worker threads for grid cells", **(kw or {"default": 1}))
    parser.add_argument("--out-dir", type=Path, help="directory for output files", **(kw or {"default": Path(".")}))


def _kernel_flags(parser, multi=False):
    group = parser.add_mutually_exclusive_group()
    nargs = {"nargs": "+"} if multi else {}
    group.add_argument("--t", type=float, **nargs, help="Gaussian kernel parameter t")
    group.add_argument("--sigma", type=float, **nargs, help="kernel width; t = 1/sigma^2")
    parser.add_argument("--kernel", choices=["complex_gaussian", "real_gaussian"],
                        help="kernel family (must match the model kind)")


def build_parser():
    parser = argparse.ArgumentParser(prog="complexsvm", description="Complex SVR and quaternary SVM toolkit")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic dataset as CSV")
    _common(gen, suppress=True)
    gen.add_argument("dataset", choices=["sinc", "chanid", "chaneq", "blobs"])
    gen.add_argument("--snr-db", type=float)
    gen.add_argument("--rho", type=float)
    gen.add_argument("--spread", type=float)
    gen.add_argument("--n-per-class", type=int)
    gen.add_argument("--n-train", type=int)
    gen.add_argument("--n-test", type=int)

    fit = sub.add_parser("fit", help="fit a model on a CSV dataset")
    _common(fit, suppress=True)
    fit.add_argument("method", choices=METHODS)
    fit.add_argument("data", type=Path)
    _kernel_flags(fit)
    fit.add_argument("--C", type=float, default=1.0, help="trade-off; box bound of each dual coefficient is C/N")
    fit.add_argument("--epsilon", type=float, default=0.1)
    fit.add_argument("--kkt-tol", type=float, default=1e-3)
    fit.add_argument("--model-out", type=Path, help="model JSON path (default OUT_DIR/model.json)")

    pred = sub.add_parser("predict", help="predict with a saved model")
    _common(pred, suppress=True)
    pred.add_argument("model", type=Path)
    pred.add_argument("data", type=Path)
    pred.add_argument("--output", type=Path, help="prediction CSV path (default OUT_DIR/predictions.csv)")

    cv = sub.add_parser("crossval", help="grid search over (C, t)")
    _common(cv, suppress=True)
    cv.add_argument("method", choices=METHODS)
    cv.add_argument("data", type=Path)
    _kernel_flags(cv, multi=True)
    cv.add_argument("--C", type=float, nargs="+", default=[1.0])
    cv.add_argument("--epsilon", type=float, default=0.1)
    cv.add_argument("--kkt-tol", type=float, default=1e-3)
    split = cv.add_mutually_exclusive_group()
    split.add_argument("--folds", type=int, default=5)
    split.add_argument("--holdout", type=float, help="validation fraction instead of k folds")

    exp = sub.add_parser("exp", help="run a named experiment")
    _common(exp, suppress=True)
    exp.add_argument("name", choices=EXPERIMENTS)
    exp.add_argument("--config", type=Path, help="JSON config overriding the defaults")
    return parser


def _resolve_t(args, method, multi=False):
    expected = _KERNEL_FOR[method]
    if args.kernel is not None and args.kernel != expected:
        raise CliError(f"kernel/model mismatch: {method} requires {expected}, got {args.kernel}")
    if args.t is not None:
        return args.t
    if args.sigma is not None:
        return [t_from_sigma(s) for s in args.sigma] if multi else t_from_sigma(args.sigma)
    return [1.0] if multi else 1.0


def _read_training(method, path):
    if method == "csvm":
        return read_labeled_csv(path)
    return read_complex_csv(path)


def cmd_gen(args):
    out = args.out_dir
    seed = args.seed
    meta_cfg = {k: v for k, v in vars(args).items() if k not in ("out_dir", "command") and v is not None}
    meta = {"dataset": args.dataset, "schema": 1, "config_sha256": config_hash({**meta_cfg, "out_dir": None})}
    if args.dataset == "sinc":
        kw = {} if seed is None else {"seed": seed}
        if args.snr_db is not None:
            kw["noise_snr_db"] = args.snr_db
        train, clean = gen_sinc_grid(SincGridConfig(**kw))
        write_complex_csv(out / "train.csv", train.inputs, train.targets, meta)
        write_complex_csv(out / "test.csv", clean.inputs, clean.targets, meta)
    elif args.dataset in ("chanid", "chaneq"):
        kw = {k: v for k, v in (("seed", seed), ("snr_db", args.snr_db), ("rho", args.rho),
                                ("n_train", args.n_train), ("n_test", args.n_test)) if v is not None}
        if args.dataset == "chanid":
            train, test = channel_identification_data(identification_config(**kw))
        else:
            train, test = channel_equalization_data(equalization_config(**kw))
        write_complex_csv(out / "train.csv", train.inputs, train.targets, meta)
        write_complex_csv(out / "test.csv", test.inputs, test.clean, meta)
    else:
        kw = {k: v for k, v in (("spread", args.spread), ("n_per_class", args.n_per_class)) if v is not None}
        base = 0 if seed is None else seed
        train = gen_quaternary_blobs(BlobConfig(seed=base, **kw))
        test = gen_quaternary_blobs(BlobConfig(seed=base + 10_000, **kw))
        write_labeled_csv(out / "train.csv", train.inputs, train.labels, meta)
        write_labeled_csv(out / "test.csv", test.inputs, test.labels, meta)
    print(f"wrote {out / 'train.csv'} and {out / 'test.csv'}")


def cmd_fit(args):
    t = _resolve_t(args, args.method)
    z, d = _read_training(args.method, args.data)
    task = TaskSpec(args.method, args.epsilon, args.kkt_tol)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        model = fit_method(task, z, d, args.C, t)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    path = args.model_out or args.out_dir / "model.json"
    save_model(model, path)
    print(f"wrote {path} (converged={model.converged})")


def predict_rows(model, z):
    """Prediction CSV header and rows for ``model`` at inputs ``z``."""
    header = [c for k in range(z.shape[1]) for c in (f"re_{k}", f"im_{k}")]
    pred = model.predict(z)
    cells = [[v for c in row for v in (float(c.real), float(c.imag))] for row in z]
    if isinstance(model, CsvmModel):
        return header + ["label"], [c + [label_to_str(p)] for c, p in zip(cells, pred)]
    return header + ["pred_re", "pred_im"], [c + [float(p.real), float(p.imag)] for c, p in zip(cells, pred)]


def cmd_predict(args):
    model = load_model(args.model)
    z, _ = read_complex_csv(args.data, require_targets=False)
    header, rows = predict_rows(model, z)
    path = args.output or args.out_dir / "predictions.csv"
    write_table(path, header, rows, {"model": args.model.name, "schema": 1})
    print(f"wrote {path}")


def cmd_crossval(args):
    t_values = _resolve_t(args, args.method, multi=True)
    z, d = _read_training(args.method, args.data)
    metric = "error_rate" if args.method == "csvm" else "mse_db"
    grid = GridSearchConfig(args.C, t_values, folds=args.folds, holdout=args.holdout, metric=metric,
                            seed=0 if args.seed is None else args.seed)
    task = TaskSpec(args.method, args.epsilon, args.kkt_tol)
    result = crossval(task, z, d, grid, threads=args.threads)
    cfg = {"method": args.method, "C": list(grid.c_values), "t": list(grid.t_values), "folds": grid.folds,
           "holdout": grid.holdout, "epsilon": args.epsilon, "kkt_tol": args.kkt_tol, "seed": grid.seed}
    meta = {"command": "crossval", "schema": 1, "config_sha256": config_hash(cfg)}
    result.report.write_csv(args.out_dir / "report.csv", meta)
    result.report.write_timings(args.out_dir / "timings.csv", meta)
    save_model(result.model, args.out_dir / "model.json")
    print(json.dumps({"best_C": result.best_C, "best_t": result.best_t, metric: result.best_value}))


def cmd_exp(args):
    config = load_config(args.config) if args.config else None
    if args.seed is not None:
        config = {**(config or {}), "seed": args.seed}
    result = run_experiment(args.name, config, out_dir=args.out_dir, threads=args.threads)
    for row in result.report.rows:
        flag = "" if row.converged else "  (not converged)"
        print(f"{row.method:>6}  C={row.C:<8g} t={row.t:<10.6g} {row.metric}={row.value:.4f}{flag}")
    print(f"wrote {len(result.files)} files to {args.out_dir}")


_COMMANDS = {"gen": cmd_gen, "fit": cmd_fit, "predict": cmd_predict, "crossval": cmd_crossval, "exp": cmd_exp}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except NoConvergedCellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CliError, ConfigError, CsvFormatError, KernelError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
