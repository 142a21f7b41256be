"""Grid search and reproduction of the regression/channel/classification experiments."""

from __future__ import annotations

import copy
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .csvm import fit_csvm, fit_one_vs_all, label_to_str
from .csvr import fit_complexified_svr, fit_csvr, fit_drc_svr, mse_db
from .datasets import (
    BlobConfig,
    ChannelConfig,
    SincGridConfig,
    channel_equalization_data,
    channel_identification_data,
    config_from_dict,
    equalization_config,
    gen_quaternary_blobs,
    gen_sinc_grid,
    identification_config,
)
from .io import config_hash, save_model, write_table
from .kernels import ComplexGaussian, RealGaussian
from .qp import ConvergenceWarning, SvcParams, SvrParams, count_solves

__all__ = [
    "METHODS",
    "SCHEMA_VERSION",
    "TaskSpec",
    "GridSearchConfig",
    "ReportRow",
    "ExperimentReport",
    "CrossvalResult",
    "ExperimentResult",
    "NoConvergedCellError",
    "ConfigError",
    "fit_method",
    "evaluate",
    "crossval",
    "sweep",
    "run_experiment",
    "default_config",
    "load_config",
    "t_from_sigma",
]

METHODS = ("csvr", "drc", "complexified", "csvm")
SCHEMA_VERSION = 1
EXPERIMENTS = ("sinc", "chanid", "chaneq", "quaternary")


class NoConvergedCellError(RuntimeError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class ConfigError(ValueError):
    pass


def t_from_sigma(sigma):
    """Kernel parameter for a width given as ``t = 1 / sigma**2``."""
    return 1.0 / float(sigma) ** 2


@dataclass(frozen=True)
class TaskSpec:
    method: str
    epsilon: float = 0.1
    kkt_tol: float = 1e-3
    max_passes: Optional[int] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")

    @property
    def classifier(self):
        return self.method == "csvm"


@dataclass(frozen=True)
class GridSearchConfig:
    c_values: tuple
    t_values: tuple
    folds: int = 5
    holdout: Optional[float] = None
    metric: str = "mse_db"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "c_values", tuple(float(c) for c in self.c_values))
        object.__setattr__(self, "t_values", tuple(float(t) for t in self.t_values))
        if not self.c_values or not self.t_values:
            raise ValueError("grid needs at least one C and one t value")
        if any(c <= 0 for c in self.c_values) or any(t <= 0 for t in self.t_values):
            raise ValueError("grid values must be positive")
        if self.metric not in ("mse_db", "error_rate"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.holdout is None and self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.holdout is not None and not 0.0 < self.holdout < 1.0:
            raise ValueError("holdout fraction must lie in (0, 1)")


@dataclass(frozen=True)
class ReportRow:
    method: str
    C: float
    t: float
    metric: str
    value: float
    wall_time_s: float
    converged: bool


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)

    def best_per_c(self, method):
        """``{C: row}`` with the best (lowest) value over t for each C."""
        out = {}
        for row in self.rows:
            if row.method != method:
                continue
            cur = out.get(row.C)
            if cur is None or (row.value, -row.t) < (cur.value, -cur.t):
                out[row.C] = row
        return dict(sorted(out.items()))

    def write_csv(self, path, meta=None):
        write_table(path, ["method", "C", "t", "metric", "value", "converged"],
                    ([r.method, r.C, r.t, r.metric, r.value, int(r.converged)] for r in self.rows), meta)

    def write_timings(self, path, meta=None):
        write_table(path, ["method", "C", "t", "wall_time_s"],
                    ([r.method, r.C, r.t, r.wall_time_s] for r in self.rows), meta)


def fit_method(task: TaskSpec, inputs, targets, C, t):
    if task.method == "csvm":
        return fit_csvm(inputs, targets, ComplexGaussian(t), SvcParams(C, task.kkt_tol, task.max_passes))
    params = SvrParams(C, task.epsilon, task.kkt_tol, task.max_passes)
    if task.method == "csvr":
        return fit_csvr(inputs, targets, ComplexGaussian(t), params)
    if task.method == "drc":
        return fit_drc_svr(inputs, targets, RealGaussian(t), params)
    return fit_complexified_svr(inputs, targets, RealGaussian(t), params)


def evaluate(metric, predictions, truth):
    if metric == "mse_db":
        return mse_db(predictions, truth)
    p = np.asarray(predictions).reshape(-1)
    return float(np.mean(p != np.asarray(truth).reshape(-1)))


def _splits(n, grid):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(grid.seed), 7])))
    perm = rng.permutation(n)
    if grid.holdout is not None:
        n_val = max(1, int(math.ceil(grid.holdout * n)))
        if n_val >= n:
            raise ValueError("holdout leaves no training data")
        return [(np.sort(perm[n_val:]), np.sort(perm[:n_val]))]
    if grid.folds > n:
        raise ValueError(f"{grid.folds} folds for only {n} samples")
    chunks = np.array_split(perm, grid.folds)
    return [(np.sort(np.concatenate(chunks[:k] + chunks[k + 1:])), np.sort(chunks[k])) for k in range(grid.folds)]


def _run_cells(cells, func, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, cells))
    return [func(cell) for cell in cells]


@dataclass
class CrossvalResult:
    best_C: float
    best_t: float
    best_value: float
    report: ExperimentReport
    model: object


def _select(report):
    ok = [r for r in report.rows if r.converged]
    if not ok:
        raise NoConvergedCellError("no grid cell converged", report)
    # ties: smaller C, then larger t
    return min(ok, key=lambda r: (r.value, r.C, -r.t))


def crossval(task: TaskSpec, inputs, targets, grid: GridSearchConfig, threads=1):
    """Evaluate every (C, t) cell by k-fold or holdout validation and refit the best.

    Validation predictions are pooled across folds before the metric is
    taken.  Only converged cells are eligible; ties go to smaller C, then
    larger t.
    """
    z = np.asarray(inputs)
    d = np.asarray(targets)
    if z.shape[0] == 0:
        raise ValueError("empty data")
    splits = _splits(z.shape[0], grid)
    cells = [(C, t) for C in grid.c_values for t in grid.t_values]

    def run(cell):
        C, t = cell
        preds = np.empty(d.shape, dtype=d.dtype)
        converged = True
        start = time.perf_counter()
        for train, val in splits:
            model = fit_method(task, z[train], d[train], C, t)
            converged &= model.converged
            preds[val] = model.predict(z[val])
        elapsed = time.perf_counter() - start
        held = np.concatenate([val for _, val in splits])
        return ReportRow(task.method, C, t, grid.metric, evaluate(grid.metric, preds[held], d[held]),
                         elapsed, bool(converged))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        report = ExperimentReport(_run_cells(cells, run, threads))
        best = _select(report)
        model = fit_method(task, z, d, best.C, best.t)
    return CrossvalResult(best.C, best.t, best.value, report, model)


def sweep(tasks, train_inputs, train_targets, test_inputs, test_truth, c_values, t_values,
          metric="mse_db", threads=1):
    """Fit every task on every (C, t) cell and score on a fixed test set.

    ``t_values`` may be a sequence shared by all tasks or a ``{method: seq}``
    mapping.  Rows are ordered by task, then C, then t.
    """
    cells = []
    for task in tasks:
        ts = t_values[task.method] if isinstance(t_values, dict) else t_values
        cells += [(task, float(C), float(t)) for C in c_values for t in ts]

    def run(cell):
        task, C, t = cell
        start = time.perf_counter()
        model = fit_method(task, train_inputs, train_targets, C, t)
        elapsed = time.perf_counter() - start
        value = evaluate(metric, model.predict(test_inputs), test_truth)
        return ReportRow(task.method, C, t, metric, value, elapsed, bool(model.converged))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        return ExperimentReport(_run_cells(cells, run, threads))


# ---------------------------------------------------------------------------
# named experiments

_IDENT_SIGMAS = [4, 5, 6, 7, 8, 9, 10, 11, 13]
_EQUAL_SIGMAS = [1.5, 1.75, 2.25, 2.5, 3, 4.5, 5.5, 6, 7, 7.5, 9]

_DEFAULTS = {
    "sinc": {
        "schema": SCHEMA_VERSION,
        "seed": 1,
        "grid": {"rows": 33, "cols": 9, "x_range": [-4.0, 4.0], "y_range": [-1.0, 1.0],
                 "noise_snr_db": 15.0, "impulse_prob": 0.05, "impulse_scale": 5.0},
        "C": 1000.0,
        "epsilon": 0.1,
        "kkt_tol": 1e-3,
        "csvr_t": 0.25,
        "drc_t": 4.0,
    },
    "chanid": {
        "schema": SCHEMA_VERSION,
        "seed": 1,
        "channel": {"rho": math.sqrt(2) / 2, "snr_db": 15.0, "filter_len": 5, "n_train": 150, "n_test": 600},
        "c_values": [1000, 2000, 5000, 10000, 20000, 50000],
        "sigma_values": _IDENT_SIGMAS,
        "epsilon": 0.1,
        "kkt_tol": 1e-3,
    },
    "chaneq": {
        "schema": SCHEMA_VERSION,
        "seed": 1,
        "channel": {"rho": math.sqrt(2) / 2, "snr_db": 15.0, "filter_len": 5, "delay": 2,
                    "n_train": 150, "n_test": 600},
        "c_values": [1, 2, 5, 10, 50, 100, 200, 500, 1000],
        "sigma_values": _EQUAL_SIGMAS,
        "epsilon": 0.05,
        "kkt_tol": 1e-3,
    },
    "quaternary": {
        "schema": SCHEMA_VERSION,
        "seed": 1,
        "blobs": {"spread": 0.3, "n_per_class": 40},
        "test_per_class": 100,
        "C": 100.0,
        "t": 0.05,
        "kkt_tol": 1e-3,
    },
}

_TOP_KEYS = {
    "sinc": {"schema", "seed", "grid", "C", "epsilon", "kkt_tol", "csvr_t", "drc_t"},
    "chanid": {"schema", "seed", "channel", "c_values", "t_values", "sigma_values", "epsilon", "kkt_tol"},
    "chaneq": {"schema", "seed", "channel", "c_values", "t_values", "sigma_values", "epsilon", "kkt_tol"},
    "quaternary": {"schema", "seed", "blobs", "test_per_class", "C", "t", "kkt_tol"},
}


def default_config(name):
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; expected one of {EXPERIMENTS}")
    return copy.deepcopy(_DEFAULTS[name])


def load_config(path):
    """Read a JSON config file, reporting syntax errors with line and column."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _merge(name, config):
    cfg = default_config(name)
    if config is None:
        return cfg
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(config) - _TOP_KEYS[name])
    if unknown:
        raise ConfigError(f"{name} config: unknown field(s) {', '.join(unknown)}")
    if config.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"{name} config: unsupported schema {config['schema']!r}, expected {SCHEMA_VERSION}")
    for key, value in config.items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key] = {**cfg[key], **value}
        else:
            cfg[key] = value
    if "t_values" in config:
        cfg.pop("sigma_values", None)
    return cfg


def _number(cfg, key, positive=True):
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field {key!r}: expected a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"field {key!r}: must be positive, got {value!r}")
    return float(value)


def _grid_t(cfg):
    if "t_values" in cfg:
        values = cfg["t_values"]
        key = "t_values"
    else:
        values = cfg["sigma_values"]
        key = "sigma_values"
    if not isinstance(values, list) or not values:
        raise ConfigError(f"field {key!r}: expected a nonempty list")
    try:
        out = [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"field {key!r}: expected numbers, got {values!r}") from None
    if any(v <= 0 for v in out):
        raise ConfigError(f"field {key!r}: values must be positive")
    return out if key == "t_values" else [t_from_sigma(s) for s in out]


def _c_values(cfg):
    values = cfg["c_values"]
    if not isinstance(values, list) or not values:
        raise ConfigError("field 'c_values': expected a nonempty list")
    try:
        out = [float(c) for c in values]
    except (TypeError, ValueError):
        raise ConfigError(f"field 'c_values': expected numbers, got {values!r}") from None
    if any(c <= 0 for c in out):
        raise ConfigError("field 'c_values': values must be positive")
    return out


@dataclass
class ExperimentResult:
    name: str
    config: dict
    report: ExperimentReport
    summary: dict
    files: list


def _cfg_obj(cls, obj, where, **extra):
    try:
        return config_from_dict(cls, {**obj, **extra}, where)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def run_experiment(name, config=None, out_dir=None, threads=1):
    """Generate data, fit, evaluate and (optionally) write CSV/JSON artifacts.

    ``config`` overrides the defaults of :func:`default_config` field by
    field.  With ``out_dir`` set, writes ``report.csv``, ``timings.csv``,
    ``predictions.csv`` and model JSONs (plus ``best_curve.csv`` for the
    channel experiments).
    """
    cfg = _merge(name, config)
    meta = {"experiment": name, "schema": SCHEMA_VERSION, "config_sha256": config_hash(cfg)}
    runner = {"sinc": _run_sinc, "chanid": _run_channel, "chaneq": _run_channel, "quaternary": _run_quaternary}[name]
    report, summary, artifacts = runner(name, cfg, threads)
    files = []
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write_csv(out / "report.csv", meta)
        report.write_timings(out / "timings.csv", meta)
        files += [out / "report.csv", out / "timings.csv"]
        for fname, (header, rows) in artifacts.get("tables", {}).items():
            write_table(out / fname, header, rows, meta)
            files.append(out / fname)
        for fname, model in artifacts.get("models", {}).items():
            save_model(model, out / fname)
            files.append(out / fname)
        (out / "config.json").write_text(json.dumps(cfg, indent=1, sort_keys=True) + "\n")
        files.append(out / "config.json")
    return ExperimentResult(name, cfg, report, summary, files)


def _complex_cols(prefix, values):
    return [f"{prefix}_re", f"{prefix}_im"], [(float(v.real), float(v.imag)) for v in values]


def _run_sinc(name, cfg, threads):
    grid_cfg = _cfg_obj(SincGridConfig, cfg["grid"], "grid", seed=int(cfg["seed"]))
    train, clean = gen_sinc_grid(grid_cfg)
    C, eps, tol = _number(cfg, "C"), _number(cfg, "epsilon", positive=False), _number(cfg, "kkt_tol")
    cells = [("csvr", _number(cfg, "csvr_t")), ("drc", _number(cfg, "drc_t"))]
    rows, models, preds = [], {}, {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for method, t in cells:
            task = TaskSpec(method, eps, tol)
            start = time.perf_counter()
            model = fit_method(task, train.inputs, train.targets, C, t)
            elapsed = time.perf_counter() - start
            preds[method] = model.predict(clean.inputs)
            rows.append(ReportRow(method, C, t, "mse_db", mse_db(preds[method], clean.clean), elapsed,
                                  bool(model.converged)))
            models[f"{method}_model.json"] = model
    report = ExperimentReport(rows)
    z = clean.inputs[:, 0]
    table = [
        (float(zz.real), float(zz.imag), float(c.real), float(c.imag), float(y.real), float(y.imag),
         float(a.real), float(a.imag), float(b.real), float(b.imag))
        for zz, c, y, a, b in zip(z, clean.clean, train.targets, preds["csvr"], preds["drc"])
    ]
    header = ["re_0", "im_0", "clean_re", "clean_im", "noisy_re", "noisy_im", "csvr_re", "csvr_im", "drc_re", "drc_im"]
    summary = {r.method: r.value for r in rows}
    return report, summary, {"tables": {"predictions.csv": (header, table)}, "models": models}


def _run_channel(name, cfg, threads):
    make, gen = ((identification_config, channel_identification_data) if name == "chanid"
                 else (equalization_config, channel_equalization_data))
    try:
        base = make(seed=int(cfg["seed"]))
        chan = _cfg_obj(ChannelConfig, {**_channel_fields(base), **cfg["channel"]}, "channel")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    train, test = gen(chan)
    eps, tol = _number(cfg, "epsilon", positive=False), _number(cfg, "kkt_tol")
    c_values, t_values = _c_values(cfg), _grid_t(cfg)
    tasks = [TaskSpec("csvr", eps, tol), TaskSpec("drc", eps, tol)]
    report = sweep(tasks, train.inputs, train.targets, test.inputs, test.clean, c_values, t_values, threads=threads)

    curve_rows, summary, models, preds = [], {}, {}, {}
    for task in tasks:
        best = report.best_per_c(task.method)
        summary[task.method] = {C: row.value for C, row in best.items()}
        curve_rows += [(task.method, C, row.t, row.value, int(row.converged)) for C, row in best.items()]
        overall = min(best.values(), key=lambda r: (r.value, r.C, -r.t))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            model = fit_method(task, train.inputs, train.targets, overall.C, overall.t)
        models[f"{task.method}_model.json"] = model
        preds[task.method] = model.predict(test.inputs)
    nu = test.inputs.shape[1]
    header = [c for k in range(nu) for c in (f"re_{k}", f"im_{k}")] + [
        "truth_re", "truth_im", "csvr_re", "csvr_im", "drc_re", "drc_im"]
    table = []
    for k in range(len(test)):
        row = [v for c in test.inputs[k] for v in (float(c.real), float(c.imag))]
        for v in (test.clean[k], preds["csvr"][k], preds["drc"][k]):
            row += [float(v.real), float(v.imag)]
        table.append(row)
    tables = {
        "best_curve.csv": (["method", "C", "best_t", "mse_db", "converged"], curve_rows),
        "predictions.csv": (header, table),
    }
    return report, summary, {"tables": tables, "models": models}


def _channel_fields(cfg):
    d = asdict(cfg)
    d["taps"] = [[h.real, h.imag] for h in cfg.taps]
    d["nonlin"] = [cfg.nonlin.real, cfg.nonlin.imag]
    return d


def _run_quaternary(name, cfg, threads):
    seed = int(cfg["seed"])
    train = gen_quaternary_blobs(_cfg_obj(BlobConfig, cfg["blobs"], "blobs", seed=seed))
    n_test = cfg["test_per_class"]
    if isinstance(n_test, bool) or not isinstance(n_test, int) or n_test < 1:
        raise ConfigError(f"field 'test_per_class': expected a positive integer, got {n_test!r}")
    test_blobs = {**cfg["blobs"], "n_per_class": n_test}
    test = gen_quaternary_blobs(_cfg_obj(BlobConfig, test_blobs, "blobs", seed=seed + 10_000))
    C, t, tol = _number(cfg, "C"), _number(cfg, "t"), _number(cfg, "kkt_tol")
    params = SvcParams(C, tol)
    kernel = ComplexGaussian(t)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        start = time.perf_counter()
        with count_solves() as csvm_calls:
            csvm = fit_csvm(train.inputs, train.labels, kernel, params)
        t_csvm = time.perf_counter() - start
        start = time.perf_counter()
        with count_solves() as ova_calls:
            ova = fit_one_vs_all(train.inputs, train.labels, kernel, params)
        t_ova = time.perf_counter() - start
    pred_csvm = csvm.predict(test.inputs)
    pred_ova = ova.predict(test.inputs)
    rows = [
        ReportRow("csvm", C, t, "error_rate", evaluate("error_rate", pred_csvm, test.labels), t_csvm,
                  bool(csvm.converged)),
        ReportRow("ova", C, t, "error_rate", evaluate("error_rate", pred_ova, test.labels), t_ova,
                  all(task.converged for task in ova.tasks)),
    ]
    header = ["re_0", "im_0", "label", "csvm_label", "ova_label"]
    table = [(float(z.real), float(z.imag), label_to_str(a), label_to_str(b), label_to_str(c))
             for z, a, b, c in zip(test.inputs[:, 0], test.labels, pred_csvm, pred_ova)]
    summary = {
        "csvm": rows[0].value,
        "ova": rows[1].value,
        "csvm_dual_solves": csvm_calls["svc"],
        "ova_dual_solves": ova_calls["svc"],
    }
    return ExperimentReport(rows), summary, {"tables": {"predictions.csv": (header, table)},
                                             "models": {"csvm_model.json": csvm}}
