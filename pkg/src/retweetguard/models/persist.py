"""Versioned JSON model files.

Layout (format_version 1):
  {"format_version": 1, "spec": {...}, "classes": [...],
   "scaler_mean": [...], "scaler_std": [...],
   "imputed_influence": float | null, "trained_at": "...",
   "learner": {... per-kind parameters ...}}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .base import ModelSpec, TrainedModel, learner_class

FORMAT_VERSION = 1


class ModelFileError(ValueError):
    pass


def model_to_payload(model: TrainedModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "spec": model.spec.to_dict(),
        "classes": list(model.classes),
        "scaler_mean": model.scaler_mean.tolist(),
        "scaler_std": model.scaler_std.tolist(),
        "imputed_influence": model.imputed_influence,
        "trained_at": model.trained_at,
        "learner": model.learner.to_dict(),
    }


def model_from_payload(obj: dict) -> TrainedModel:
    try:
        version = obj["format_version"]
        if version > FORMAT_VERSION:
            raise ModelFileError(
                f"model file format_version {version} is newer than "
                f"supported version {FORMAT_VERSION}")
        spec = ModelSpec.from_dict(obj["spec"])
        learner = learner_class(spec.kind).from_dict(obj["learner"])
        return TrainedModel(
            spec=spec,
            classes=tuple(obj["classes"]),
            scaler_mean=np.array(obj["scaler_mean"], dtype=np.float64),
            scaler_std=np.array(obj["scaler_std"], dtype=np.float64),
            learner=learner,
            imputed_influence=obj["imputed_influence"],
            trained_at=obj["trained_at"],
        )
    except ModelFileError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"corrupt model file: {exc}") from exc


def save_model(model: TrainedModel, path) -> None:
    payload = model_to_payload(model)
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_model(path) -> TrainedModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"corrupt model file: {exc}") from exc
    if not isinstance(obj, dict):
        raise ModelFileError("corrupt model file: expected a JSON object")
    return model_from_payload(obj)
