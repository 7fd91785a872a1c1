"""Versioned JSON serialization of teacher and student models."""
from __future__ import annotations

import json

import numpy as np

from .rules import RuleBase
from .student import StudentModel
from .teacher import TeacherModel

MAGIC = "fuzzykd-model"
VERSION = 1


def _rule_base_record(rb: RuleBase) -> dict:
    return {"n_rules": rb.n_rules, "n_features": rb.n_features,
            "centers": rb.centers.tolist(), "widths": rb.widths.tolist()}


def save_model(model, path) -> None:
    record = {"magic": MAGIC, "version": VERSION,
              "rule_base": _rule_base_record(model.rule_base),
              "order": model.order}
    if isinstance(model, TeacherModel):
        record["kind"] = "teacher"
        record["coeffs"] = model.coeffs.tolist()
        record["reg"] = model.reg
        record["class_labels"] = model.class_labels.tolist()
    elif isinstance(model, StudentModel):
        record["kind"] = "student"
        record["coeffs"] = model.coeffs.tolist()
        record["n_classes"] = model.n_classes
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        record = json.load(fh)
    if record.get("magic") != MAGIC:
        raise ValueError(f"{path}: not a fuzzykd model file")
    if record.get("version") != VERSION:
        raise ValueError(f"{path}: unsupported model version "
                         f"{record.get('version')}")
    rb = RuleBase(np.array(record["rule_base"]["centers"]),
                  np.array(record["rule_base"]["widths"]))
    if record["kind"] == "teacher":
        return TeacherModel(rb, np.array(record["coeffs"]), record["reg"],
                            np.array(record["class_labels"]),
                            record["order"])
    if record["kind"] == "student":
        return StudentModel(rb, np.array(record["coeffs"]),
                            record["n_classes"], record["order"])
    raise ValueError(f"{path}: unknown model kind {record['kind']!r}")
