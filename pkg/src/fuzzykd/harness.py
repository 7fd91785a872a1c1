"""Cross-validated evaluation, grid search, parameter sweeps and rule readout."""
from __future__ import annotations

import itertools
import math
import re
import time
from dataclasses import dataclass, field

import numpy as np

from .basis import basis_labels, expand_basis
from .data import Dataset, normalize, stratified_folds
from .distill import (DistillConfig, distill, teacher_logits,
                      vanilla_kd_distill)
from .rules import PARTITION, PARTITION_LABELS, build_rule_base
from .student import (StudentModel, TrainConfig, TrainingDiverged,
                      init_student, onehot_encode, predict_student,
                      student_logits, train_student)
from .teacher import TeacherModel, fit_teacher, predict_teacher

METHODS = ("teacher-only", "student-only", "distill-kd", "distill-dkd")
_ORDER_METHOD = re.compile(r"^tsk-order-([0-3])-(llm|gd)$")


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter candidates and fixed training constants."""

    rule_counts: tuple = tuple(range(1, 21))
    reg: float = 100.0
    temperatures: tuple = (1, 2, 5, 10, 20, 100)
    target_weights: tuple = (1, 2, 5, 10, 20, 100)
    non_target_weights: tuple = (1, 2, 5, 10, 20, 100)
    ce_weights: tuple = (1, 2, 5, 10, 20, 100)
    max_epochs: int = 30
    tol: float = 1e-5
    lr: float = 0.01
    folds: int = 10
    width: float = 0.5

    def __post_init__(self):
        for name in ("rule_counts", "temperatures", "target_weights",
                     "non_target_weights", "ce_weights"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"{name} must be non-empty")

    @classmethod
    def coarse(cls, **overrides) -> "GridSpec":
        """Reduced grid: target weight pinned to 1."""
        return cls(target_weights=(1,), **overrides)

    @classmethod
    def fixed(cls, n_rules=8, temperature=2, target_weight=1,
              non_target_weight=2, ce_weight=1, **overrides) -> "GridSpec":
        """Degenerate single-candidate grid (no inner search)."""
        return cls(rule_counts=(n_rules,), temperatures=(temperature,),
                   target_weights=(target_weight,),
                   non_target_weights=(non_target_weight,),
                   ce_weights=(ce_weight,), **overrides)


@dataclass
class FoldRecord:
    fold: int
    params: dict
    accuracy: float = math.nan
    weighted_f: float = math.nan
    n_rules: int = 0
    seconds: float = math.nan
    error: str | None = None


@dataclass
class MethodReport:
    method: str
    dataset: str
    seed: int
    records: list[FoldRecord] = field(default_factory=list)

    def _ok(self) -> list[FoldRecord]:
        return [r for r in self.records if r.error is None]

    def mean_accuracy(self) -> float:
        ok = self._ok()
        return float(np.mean([r.accuracy for r in ok])) if ok else math.nan

    def std_accuracy(self) -> float:
        ok = self._ok()
        vals = [r.accuracy for r in ok]
        return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0

    def mean_weighted_f(self) -> float:
        ok = self._ok()
        return float(np.mean([r.weighted_f for r in ok])) if ok else math.nan

    def std_weighted_f(self) -> float:
        ok = self._ok()
        vals = [r.weighted_f for r in ok]
        return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0

    def mean_rules(self) -> float:
        ok = self._ok()
        return float(np.mean([r.n_rules for r in ok])) if ok else math.nan

    def mean_seconds(self) -> float:
        ok = self._ok()
        return float(np.mean([r.seconds for r in ok])) if ok else math.nan

    def n_failed(self) -> int:
        return len(self.records) - len(self._ok())


def accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of correctly predicted samples."""
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.size != truth.size:
        raise ValueError("pred and truth must have equal length")
    if pred.size == 0:
        raise ValueError("need at least one sample")
    return float((pred == truth).mean())


def weighted_f(pred: np.ndarray, truth: np.ndarray, n_classes: int) -> float:
    """Support-weighted mean of per-class F1 scores."""
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.size != truth.size:
        raise ValueError("pred and truth must have equal length")
    if pred.size == 0:
        raise ValueError("need at least one sample")
    total = 0.0
    for c in range(n_classes):
        support = int((truth == c).sum())
        if support == 0:
            continue
        tp = int(((pred == c) & (truth == c)).sum())
        fp = int(((pred == c) & (truth != c)).sum())
        fn = support - tp
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / support
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        total += support / truth.size * f1
    return total


def _rb_seed(seed: int, fold: int, student_side: bool) -> int:
    # Same (seed, fold) -> same student rule base across methods, so that
    # per-fold deltas between student-only and the distilled runs isolate
    # the loss change. The teacher draws an independent base by default.
    return (seed * 1_000_003 + fold * 101 + (0 if student_side else 7)) % 2**31


def _parse_method(method: str) -> tuple[str, int]:
    if method in METHODS:
        return method, 3 if method == "teacher-only" else 1
    m = _ORDER_METHOD.match(method)
    if m:
        return f"tsk-{m.group(2)}", int(m.group(1))
    raise ValueError(f"unknown method {method!r}")


def _candidates(method: str, grid: GridSpec) -> list[dict]:
    kind, _ = _parse_method(method)
    if kind in ("teacher-only", "student-only", "tsk-llm", "tsk-gd"):
        return [{"K": k} for k in grid.rule_counts]
    if kind == "distill-dkd":
        combos = itertools.product(grid.rule_counts, grid.temperatures,
                                   grid.target_weights,
                                   grid.non_target_weights, grid.ce_weights)
        return [{"K": k, "tau": t, "zeta": z, "lam": lam, "phi": p}
                for k, t, z, lam, p in combos]
    combos = itertools.product(grid.rule_counts, grid.temperatures,
                               grid.non_target_weights, grid.ce_weights)
    return [{"K": k, "tau": t, "lam": lam, "phi": p}
            for k, t, lam, p in combos]


def _fit_predict(method: str, params: dict, grid: GridSpec,
                 Xtr, ytr, Xte, n_classes: int, seed: int, fold: int,
                 share_rule_base: bool):
    kind, order = _parse_method(method)
    k = params["K"]
    class_labels = np.arange(n_classes, dtype=float)
    teacher_seed = _rb_seed(seed, fold, student_side=share_rule_base)
    student_seed = _rb_seed(seed, fold, student_side=True)

    if kind in ("teacher-only", "tsk-llm"):
        rb = build_rule_base(k, Xtr.shape[1], grid.width, teacher_seed)
        tm = fit_teacher(rb, Xtr, ytr.astype(float), grid.reg,
                         class_labels, order)
        return teacher_logits(predict_teacher(tm, Xte),
                              class_labels).argmax(axis=1)

    rb = build_rule_base(k, Xtr.shape[1], grid.width, student_seed)
    Y = onehot_encode(ytr, n_classes)
    if kind in ("student-only", "tsk-gd"):
        sm = init_student(rb, n_classes, order)
        cfg = TrainConfig(grid.lr, grid.max_epochs, grid.tol)
        sm, _ = train_student(sm, Xtr, Y, cfg)
        return predict_student(sm, Xte)

    rb_t = build_rule_base(k, Xtr.shape[1], grid.width, teacher_seed)
    tm = fit_teacher(rb_t, Xtr, ytr.astype(float), grid.reg, class_labels)
    t_out = predict_teacher(tm, Xtr)
    sm = init_student(rb, n_classes)
    if kind == "distill-dkd":
        cfg = DistillConfig(grid.lr, grid.max_epochs, grid.tol,
                            temperature=params["tau"],
                            target_weight=params["zeta"],
                            non_target_weight=params["lam"],
                            ce_weight=params["phi"])
        sm, _ = distill(t_out, sm, Xtr, Y, cfg, class_labels)
    else:
        cfg = DistillConfig(grid.lr, grid.max_epochs, grid.tol,
                            temperature=params["tau"], target_weight=0.0,
                            non_target_weight=0.0, ce_weight=params["phi"])
        sm, _ = vanilla_kd_distill(t_out, sm, Xtr, Y, cfg,
                                   kd_weight=params["lam"],
                                   class_labels=class_labels)
    return predict_student(sm, Xte)


def _select_params(method, candidates, grid, Xtr, ytr, n_classes, seed, fold):
    """Inner 3-fold CV on the training split, max mean accuracy.

    Candidates are enumerated smallest-K-then-smallest-temperature first,
    so ties resolve toward the simpler model.
    """
    if len(candidates) == 1:
        return candidates[0]
    inner = stratified_folds(ytr, 3, seed=seed * 7919 + fold)
    best, best_acc = None, -1.0
    for params in candidates:
        accs = []
        for i in range(inner.k):
            tr, te = inner.split(i)
            try:
                pred = _fit_predict(method, params, grid, Xtr[tr], ytr[tr],
                                    Xtr[te], n_classes, seed, fold,
                                    share_rule_base=False)
                accs.append(accuracy(pred, ytr[te]))
            except TrainingDiverged:
                accs.append(0.0)
        mean_acc = float(np.mean(accs))
        if mean_acc > best_acc:
            best, best_acc = params, mean_acc
    return best


def run_method(method: str, ds: Dataset, grid: GridSpec, seed: int,
               dataset_name: str = "data", share_rule_base: bool = False,
               global_normalize: bool = False) -> MethodReport:
    """Outer CV evaluation of one method; one record per fold.

    A diverged fold is recorded with its error message and excluded from the
    aggregates, never silently dropped. Wall time covers the final fit and
    prediction, not data handling or the inner search.
    """
    _parse_method(method)
    report = MethodReport(method, dataset_name, seed)
    plan = stratified_folds(ds.y, grid.folds, seed)
    X = ds.X
    if global_normalize:
        X, _, _ = normalize(X)
    for fold in range(grid.folds):
        tr, te = plan.split(fold)
        if global_normalize:
            Xtr, Xte = X[tr], X[te]
        else:
            Xtr, Xte, _ = normalize(X[tr], X[te])
        ytr, yte = ds.y[tr], ds.y[te]
        params = _select_params(method, _candidates(method, grid), grid,
                                Xtr, ytr, ds.n_classes, seed, fold)
        record = FoldRecord(fold, params, n_rules=params["K"])
        t0 = time.perf_counter()
        try:
            pred = _fit_predict(method, params, grid, Xtr, ytr, Xte,
                                ds.n_classes, seed, fold, share_rule_base)
            record.seconds = time.perf_counter() - t0
            record.accuracy = accuracy(pred, yte)
            record.weighted_f = weighted_f(pred, yte, ds.n_classes)
        except TrainingDiverged as exc:
            record.seconds = time.perf_counter() - t0
            record.error = str(exc)
        report.records.append(record)
    return report


SWEEP_PARAMETERS = ("tau", "zeta", "lambda", "phi", "lambda/zeta",
                    "(lambda+zeta)/phi")


def sweep(parameter: str, ds: Dataset, grid: GridSpec, seed: int,
          dataset_name: str = "data") -> list[dict]:
    """Vary one distillation parameter (or ratio) over the candidate set.

    The base configuration is the first entry of each GridSpec candidate
    set; emits one (value, mean accuracy, std) record per candidate.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    base = {"K": grid.rule_counts[0], "tau": grid.temperatures[0],
            "zeta": grid.target_weights[0],
            "lam": grid.non_target_weights[0], "phi": grid.ce_weights[0]}
    values = {"tau": grid.temperatures, "zeta": grid.target_weights,
              "phi": grid.ce_weights}.get(parameter,
                                          grid.non_target_weights)
    records = []
    for value in values:
        params = dict(base)
        if parameter == "tau":
            params["tau"] = value
        elif parameter == "zeta":
            params["zeta"] = value
        elif parameter == "lambda":
            params["lam"] = value
        elif parameter == "phi":
            params["phi"] = value
        elif parameter == "lambda/zeta":
            params["lam"] = value * params["zeta"]
        else:  # (lambda+zeta)/phi
            params["phi"] = (params["lam"] + params["zeta"]) / value
        point = GridSpec.fixed(n_rules=params["K"], temperature=params["tau"],
                               target_weight=params["zeta"],
                               non_target_weight=params["lam"],
                               ce_weight=params["phi"], reg=grid.reg,
                               max_epochs=grid.max_epochs, tol=grid.tol,
                               lr=grid.lr, folds=grid.folds,
                               width=grid.width)
        rep = run_method("distill-dkd", ds, point, seed, dataset_name)
        records.append({"parameter": parameter, "value": value,
                        "mean_accuracy": rep.mean_accuracy(),
                        "std_accuracy": rep.std_accuracy()})
    return records


def _linguistic(center: float) -> str:
    return PARTITION_LABELS[int(np.argmin(np.abs(PARTITION - center)))]


def rule_readout(model, sample: np.ndarray) -> str:
    """Linguistic IF/THEN dump of every rule, evaluated at one sample."""
    x = np.asarray(sample, dtype=float).ravel()
    rb = model.rule_base
    if x.size != rb.n_features:
        raise ValueError("sample length must match the model's feature count")
    labels = basis_labels(model.order, rb.n_features)
    d = len(labels)
    bx = expand_basis(x, model.order)
    lines = []
    for k in range(rb.n_rules):
        lines.append(f"Rule {k + 1}:")
        lines.append("IF:")
        for i in range(rb.n_features):
            lines.append(f"  feature {i + 1} is {_linguistic(rb.centers[k, i])}")
        lines.append("THEN:")
        if isinstance(model, StudentModel):
            block = model.coeffs[k * d:(k + 1) * d, :]
            for c in range(model.n_classes):
                expr = " + ".join(f"{block[j, c]:.4f}*{labels[j]}"
                                  for j in range(d))
                lines.append(f"  output {c + 1} = {expr} "
                             f"= {float(bx @ block[:, c]):.4f}")
        elif isinstance(model, TeacherModel):
            block = model.coeffs[k * d:(k + 1) * d]
            lines.append(f"  output = {float(bx @ block):.4f}")
        else:
            raise TypeError(f"cannot explain {type(model).__name__}")
    if isinstance(model, StudentModel):
        pred = int(student_logits(model, x[None, :]).argmax())
    else:
        y = predict_teacher(model, x[None, :])
        pred = int(teacher_logits(y, model.class_labels).argmax())
    lines.append(f"Predicted class: {pred}")
    return "\n".join(lines)


def format_report(reports: list[MethodReport],
                  include_time: bool = True) -> str:
    """Line-oriented structured text: fold records plus aggregate lines.

    With include_time=False the wall-time fields are omitted, which makes
    the output byte-stable across runs with identical flags and seed.
    """
    lines = []
    for rep in reports:
        for r in rep.records:
            params = ",".join(f"{k}:{v:g}" for k, v in sorted(r.params.items()))
            parts = [f"fold dataset={rep.dataset} method={rep.method}",
                     f"seed={rep.seed} fold={r.fold} params={params}"]
            if r.error is None:
                parts.append(f"acc={r.accuracy:.9f} wf={r.weighted_f:.9f}")
            else:
                parts.append(f"error={r.error!r}")
            parts.append(f"rules={r.n_rules}")
            if include_time:
                parts.append(f"time={r.seconds:.4f}")
            lines.append(" ".join(parts))
    for rep in reports:
        parts = [f"aggregate dataset={rep.dataset} method={rep.method}",
                 f"seed={rep.seed}",
                 f"acc_mean={rep.mean_accuracy():.9f}",
                 f"acc_std={rep.std_accuracy():.9f}",
                 f"wf_mean={rep.mean_weighted_f():.9f}",
                 f"wf_std={rep.std_weighted_f():.9f}",
                 f"rules_mean={rep.mean_rules():.4f}",
                 f"failed={rep.n_failed()}"]
        if include_time:
            parts.append(f"time_mean={rep.mean_seconds():.4f}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
