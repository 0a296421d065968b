"""Classifiers, PCA and evaluation, plus the versioned JSON model document."""

from __future__ import annotations

import json

from ..errors import DataError
from ..features import Standardization
from .logreg import LogRegModel, predict_logreg, train_logreg
from .metrics import ConfusionMatrix, EvaluationReport, confusion, dice, evaluate
from .pca import PcaModel, pca_fit, pca_project
from .svm import SvmModel, predict_svm, train_svm

MODEL_FORMAT_VERSION = 1
_TYPES = {"logreg": LogRegModel, "svm": SvmModel}


def model_document(model, feature_names, standardization: Standardization | None, patch: int = 11) -> dict:
    kind = "logreg" if isinstance(model, LogRegModel) else "svm"
    return {
        "type": kind,
        "version": MODEL_FORMAT_VERSION,
        "feature_names": list(feature_names),
        "standardization": None if standardization is None else standardization.to_dict(),
        "parameters": model.to_params(),
        "patch": patch,
    }


def save_model(path, model, feature_names, standardization=None, patch: int = 11) -> None:
    with open(path, "w") as fh:
        json.dump(model_document(model, feature_names, standardization, patch), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path):
    """``(model, feature_names, standardization, patch)`` from a model JSON file."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != MODEL_FORMAT_VERSION or doc.get("type") not in _TYPES:
        raise DataError(f"{path}: unsupported model document (type={doc.get('type')}, version={doc.get('version')})")
    model = _TYPES[doc["type"]].from_params(doc["parameters"])
    std = doc.get("standardization")
    return (model, tuple(doc["feature_names"]), None if std is None else Standardization.from_dict(std),
            int(doc.get("patch", 11)))


__all__ = [
    "ConfusionMatrix", "EvaluationReport", "LogRegModel", "PcaModel", "SvmModel", "confusion", "dice",
    "evaluate", "load_model", "model_document", "pca_fit", "pca_project", "predict_logreg", "predict_svm",
    "save_model", "train_logreg", "train_svm",
]
