"""Scoring service: label retweeters, gate feedback, retrain on demand.

Human feedback flags a prediction as wrong. If the current model is
still confident in that prediction (strictly above the threshold) the
flag is logged and ignored; otherwise the corrected label joins the
feedback buffer. Once the buffer reaches the retrain trigger, the model
is retrained from scratch on the base labels merged with all buffered
corrections (latest correction per user wins) and swapped in atomically.
Ignored flags never reach the buffer, so they can never change a model.

State (model, unconsumed buffer, audit log) persists under ``state_dir``
and is restored on restart.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from .corpus import (
    BINARY_CLASSES,
    CUSTOMER,
    CUSTOMER_CLASSES,
    Corpus,
    FOUR_CLASSES,
    GENUINE,
    LabelMap,
    UserRecord,
    format_timestamp,
    load_corpus,
    load_labels,
    record_from_dict,
)
from .evaluation import fit_on_dataset
from .features import ExtractionConfig, build_dataset, extract_matrix
from .models import ModelSpec, TrainedModel, load_model, predict_batch, save_model

log = logging.getLogger(__name__)

ACCEPTED = "Accepted"
IGNORED = "IgnoredHighConfidence"
REJECTED = "RejectedUnknownUser"


@dataclass(frozen=True)
class FeedbackPolicy:
    confidence_threshold: float = 0.75
    retrain_trigger: int = 25

    def __post_init__(self):
        if not 0.0 < self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must be in (0, 1]")
        if self.retrain_trigger < 1:
            raise ValueError("retrain_trigger must be at least 1")


@dataclass(frozen=True)
class FeedbackEvent:
    user_id: str
    predicted_label: str
    corrected_label: str
    submitted_at: str
    client_id: str = ""

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "predicted_label": self.predicted_label,
            "corrected_label": self.corrected_label,
            "submitted_at": self.submitted_at,
            "client_id": self.client_id,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FeedbackEvent":
        return cls(
            user_id=obj["user_id"],
            predicted_label=obj["predicted_label"],
            corrected_label=obj["corrected_label"],
            submitted_at=obj["submitted_at"],
            client_id=obj.get("client_id", ""),
        )


class ThreadStoreFetcher:
    """Resolve tweet references to retweeter ids from a loaded thread list."""

    def __init__(self, threads: Sequence = ()):
        self._by_id = {t.tweet_id: t.retweeter_ids for t in threads}

    def __call__(self, tweet_ref: str) -> list[str]:
        if tweet_ref not in self._by_id:
            raise KeyError(f"unknown tweet reference: {tweet_ref!r}")
        return self._by_id[tweet_ref]


class ScoringService:
    """Holds the active model, corpus store, feedback buffer, and audit log.

    Concurrent scorers read one model reference per request; retrains
    happen under a lock and swap the reference atomically.
    """

    def __init__(self, corpus: Corpus, base_labels: LabelMap,
                 spec: Optional[ModelSpec] = None,
                 model: Optional[TrainedModel] = None,
                 policy: FeedbackPolicy = FeedbackPolicy(),
                 cfg: Optional[ExtractionConfig] = None,
                 state_dir=None,
                 tweet_fetcher: Optional[Callable[[str], list[str]]] = None,
                 clock: Optional[Callable[[], datetime]] = None):
        self.corpus = corpus
        self.base_labels = base_labels
        self.policy = policy
        self.cfg = cfg or ExtractionConfig(snapshot_time=corpus.snapshot_time)
        self.state_dir = Path(state_dir) if state_dir is not None else None
        self.tweet_fetcher = tweet_fetcher or ThreadStoreFetcher()
        self._clock = clock or (lambda: datetime.now(timezone.utc)
                                .replace(microsecond=0))
        self._lock = threading.RLock()
        self._buffer: list[FeedbackEvent] = []
        self.version = 1

        restored = self._restore_state()
        if restored is not None:
            self._model = restored
        elif model is not None:
            self._model = model
            self._persist_model()
        else:
            if spec is None:
                raise ValueError("need a spec, a model, or persisted state")
            if not len(base_labels):
                raise ValueError("cannot train an initial model without labels")
            self._model = self._fit(spec, base_labels.by_user)
            self._persist_model()

    # -- state persistence --------------------------------------------------

    def _state_paths(self):
        d = self.state_dir
        return (d / "model.json", d / "state.json",
                d / "feedback_buffer.jsonl", d / "audit.jsonl")

    def _restore_state(self) -> Optional[TrainedModel]:
        if self.state_dir is None:
            return None
        self.state_dir.mkdir(parents=True, exist_ok=True)
        model_path, state_path, buffer_path, _ = self._state_paths()
        if not model_path.exists():
            return None
        model = load_model(model_path)
        if state_path.exists():
            self.version = json.loads(state_path.read_text())["model_version"]
        if buffer_path.exists():
            with open(buffer_path, "r", encoding="utf-8") as fh:
                self._buffer = [FeedbackEvent.from_dict(json.loads(line))
                                for line in fh if line.strip()]
        return model

    def _persist_model(self) -> None:
        if self.state_dir is None:
            return
        self.state_dir.mkdir(parents=True, exist_ok=True)
        model_path, state_path, _, _ = self._state_paths()
        tmp = model_path.with_suffix(".json.tmp")
        save_model(self._model, tmp)
        os.replace(tmp, model_path)
        state_path.write_text(json.dumps({"model_version": self.version}) + "\n")

    def _append_buffer_line(self, event: FeedbackEvent) -> None:
        if self.state_dir is None:
            return
        _, _, buffer_path, _ = self._state_paths()
        with open(buffer_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event.to_dict()) + "\n")

    def _clear_buffer_file(self) -> None:
        if self.state_dir is None:
            return
        _, _, buffer_path, _ = self._state_paths()
        if buffer_path.exists():
            buffer_path.unlink()

    def _audit(self, **fields) -> None:
        if self.state_dir is None:
            return
        _, _, _, audit_path = self._state_paths()
        entry = {"at": format_timestamp(self._clock()), **fields}
        with open(audit_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry) + "\n")

    # -- training -----------------------------------------------------------

    def _fit(self, spec: ModelSpec, label_map: dict[str, str]) -> TrainedModel:
        dataset = build_dataset(self.corpus, LabelMap(by_user=dict(label_map)),
                                mode=spec.class_mode, cfg=self.cfg)
        return fit_on_dataset(spec, dataset,
                              trained_at=format_timestamp(self._clock()))

    # -- scoring ------------------------------------------------------------

    @property
    def model(self) -> TrainedModel:
        return self._model

    @property
    def buffer_size(self) -> int:
        return len(self._buffer)

    def _resolve_records(self, user_ids: Optional[Sequence[str]],
                         inline_records: Optional[Sequence[dict]],
                         tweet_ref: Optional[str]):
        """Yield (user_id, UserRecord or None) pairs for one request."""
        pairs = []
        if tweet_ref is not None:
            user_ids = list(user_ids or []) + list(self.tweet_fetcher(tweet_ref))
        for uid in user_ids or []:
            pairs.append((uid, self.corpus.get(uid)))
        for obj in inline_records or []:
            record = record_from_dict(obj)
            pairs.append((record.user_id, record))
        return pairs

    @staticmethod
    def _binary_view(classes: Sequence[str], proba: np.ndarray):
        names = list(classes)
        p_gen = proba[:, names.index(GENUINE)] if GENUINE in names else \
            np.zeros(len(proba))
        customer_cols = [names.index(c) for c in names
                         if c in CUSTOMER_CLASSES or c == CUSTOMER]
        p_cust = proba[:, customer_cols].sum(axis=1) if customer_cols else \
            np.zeros(len(proba))
        labels = [CUSTOMER if c > g else GENUINE for g, c in zip(p_gen, p_cust)]
        conf = np.maximum(p_gen, p_cust)
        return labels, conf

    def score(self, user_ids: Optional[Sequence[str]] = None,
              inline_records: Optional[Sequence[dict]] = None,
              tweet_ref: Optional[str] = None,
              class_mode: Optional[str] = None) -> list[dict]:
        """Label each resolvable user; unknown users get error entries."""
        model = self._model  # one version for the whole request
        if model is None:
            raise RuntimeError("no active model")
        mode = class_mode or "binary"
        if mode not in ("binary", "four_class"):
            raise ValueError(f"unknown class mode {mode!r}")
        if mode == "four_class" and model.spec.class_mode != "four_class":
            raise ValueError("four-class labels need a four-class model")

        pairs = self._resolve_records(user_ids, inline_records, tweet_ref)
        results: list[dict] = []
        scorable: list[tuple[int, UserRecord]] = []
        for uid, record in pairs:
            if record is None:
                results.append({"user_id": uid, "error": "unknown user"})
            else:
                results.append({"user_id": uid})
                scorable.append((len(results) - 1, record))
        if not scorable:
            return results

        records = [r for _, r in scorable]
        _, X, _ = extract_matrix(records, self.cfg,
                                 imputed_influence=model.imputed_influence)
        labels, proba = predict_batch(model, X)
        if mode == "binary":
            labels, conf = self._binary_view(model.classes, proba)
        else:
            conf = proba.max(axis=1)
        for (slot, _), label, c in zip(scorable, labels, conf):
            results[slot]["label"] = label
            results[slot]["confidence"] = float(c)
        return results

    # -- feedback -----------------------------------------------------------

    def _label_confidence(self, record: UserRecord, label: str) -> float:
        """Probability the current model gives to a (possibly binary) label."""
        model = self._model
        _, X, _ = extract_matrix([record], self.cfg,
                                 imputed_influence=model.imputed_influence)
        _, proba = predict_batch(model, X)
        names = list(model.classes)
        if label in names:
            return float(proba[0, names.index(label)])
        if label == CUSTOMER:
            cols = [names.index(c) for c in names if c in CUSTOMER_CLASSES]
            return float(proba[0, cols].sum()) if cols else 0.0
        if label == GENUINE:
            return 0.0  # model never saw a genuine class
        raise ValueError(f"label {label!r} is not scored by this model")

    def _corrected_label(self, predicted_label: str,
                         corrected_label: Optional[str]) -> str:
        if self._model.spec.class_mode == "binary":
            if predicted_label not in BINARY_CLASSES:
                raise ValueError(
                    f"binary feedback needs a label in {BINARY_CLASSES}")
            if corrected_label is not None:
                if corrected_label not in BINARY_CLASSES:
                    raise ValueError(
                        f"corrected label must be in {BINARY_CLASSES}")
                return corrected_label
            return GENUINE if predicted_label == CUSTOMER else CUSTOMER
        if corrected_label is None:
            raise ValueError("four-class feedback must name the corrected label")
        if corrected_label not in FOUR_CLASSES:
            raise ValueError(f"corrected label must be in {FOUR_CLASSES}")
        return corrected_label

    def submit_feedback(self, user_id: str, predicted_label: str,
                        corrected_label: Optional[str] = None,
                        client_id: str = "") -> str:
        """Apply the confidence gate; returns the resulting status."""
        with self._lock:
            record = self.corpus.get(user_id)
            if record is None:
                self._audit(action="feedback", user_id=user_id, status=REJECTED)
                return REJECTED
            corrected = self._corrected_label(predicted_label, corrected_label)
            confidence = self._label_confidence(record, predicted_label)
            if confidence > self.policy.confidence_threshold:
                self._audit(action="feedback", user_id=user_id, status=IGNORED,
                            confidence=confidence)
                return IGNORED
            event = FeedbackEvent(
                user_id=user_id, predicted_label=predicted_label,
                corrected_label=corrected,
                submitted_at=format_timestamp(self._clock()),
                client_id=client_id)
            self._buffer.append(event)
            self._append_buffer_line(event)
            self._audit(action="feedback", user_id=user_id, status=ACCEPTED,
                        confidence=confidence, corrected_label=corrected)
            return ACCEPTED

    def retrain_if_due(self) -> Optional[TrainedModel]:
        """Retrain on base plus buffered corrections once the trigger is hit."""
        with self._lock:
            if len(self._buffer) < self.policy.retrain_trigger:
                return None
            merged = dict(self.base_labels.by_user)
            if self._model.spec.class_mode == "binary":
                merged = self.base_labels.binary_view()
            for event in self._buffer:  # latest correction per user wins
                merged[event.user_id] = event.corrected_label
            try:
                new_model = self._fit(self._model.spec, merged)
            except Exception:
                log.exception("retrain failed; keeping model and buffer")
                self._audit(action="retrain_failed", version=self.version)
                return None
            consumed = len(self._buffer)
            self._model = new_model
            self.version += 1
            self._buffer = []
            self._clear_buffer_file()
            self._persist_model()
            self._audit(action="retrain", version=self.version,
                        feedback_rows=consumed)
            return new_model

    def model_info(self) -> dict:
        model = self._model
        return {
            "version": self.version,
            "spec": model.spec.to_dict(),
            "trained_at": model.trained_at,
            "threshold": self.policy.confidence_threshold,
        }


# -- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    corpus_path: str = ""
    labels_path: str = ""
    threads_path: str = ""
    model_path: str = ""
    state_dir: str = ""
    threshold: float = 0.75
    retrain_trigger: int = 25
    class_mode: str = "binary"
    model_kind: str = "linear_svm"
    seed: int = 7
    cors_origins: str = "*"  # comma-separated; empty disables CORS

    def policy(self) -> FeedbackPolicy:
        return FeedbackPolicy(confidence_threshold=self.threshold,
                              retrain_trigger=self.retrain_trigger)


_ENV_FIELDS = {
    "RETWEETGUARD_HOST": ("host", str),
    "RETWEETGUARD_PORT": ("port", int),
    "RETWEETGUARD_CORPUS": ("corpus_path", str),
    "RETWEETGUARD_LABELS": ("labels_path", str),
    "RETWEETGUARD_THREADS": ("threads_path", str),
    "RETWEETGUARD_MODEL": ("model_path", str),
    "RETWEETGUARD_STATE_DIR": ("state_dir", str),
    "RETWEETGUARD_THRESHOLD": ("threshold", float),
    "RETWEETGUARD_RETRAIN_TRIGGER": ("retrain_trigger", int),
    "RETWEETGUARD_CLASS_MODE": ("class_mode", str),
    "RETWEETGUARD_MODEL_KIND": ("model_kind", str),
    "RETWEETGUARD_SEED": ("seed", int),
    "RETWEETGUARD_CORS_ORIGINS": ("cors_origins", str),
}


def load_service_config(path=None, env=None) -> ServiceConfig:
    """Config file (JSON object of ServiceConfig fields) plus env overrides."""
    values: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        if not isinstance(obj, dict):
            raise ValueError("service config must be a JSON object")
        unknown = set(obj) - set(ServiceConfig.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(obj)
    env = os.environ if env is None else env
    for var, (name, cast) in _ENV_FIELDS.items():
        if var in env:
            values[name] = cast(env[var])
    return ServiceConfig(**values)


def service_from_config(config: ServiceConfig,
                        clock: Optional[Callable[[], datetime]] = None
                        ) -> ScoringService:
    from .analysis import load_threads

    if not config.corpus_path:
        raise ValueError("config needs corpus_path")
    corpus = load_corpus(config.corpus_path)
    labels = (load_labels(config.labels_path, corpus)
              if config.labels_path else LabelMap())
    fetcher = None
    if config.threads_path:
        fetcher = ThreadStoreFetcher(load_threads(config.threads_path))
    model = load_model(config.model_path) if config.model_path else None
    spec = None
    if model is None:
        spec = ModelSpec(kind=config.model_kind, class_mode=config.class_mode,
                         random_seed=config.seed)
    return ScoringService(
        corpus=corpus, base_labels=labels, spec=spec, model=model,
        policy=config.policy(), state_dir=config.state_dir or None,
        tweet_fetcher=fetcher, clock=clock)


# -- HTTP layer ---------------------------------------------------------------


class ScoreRequest(BaseModel):
    tweet_ref: Optional[str] = None
    retweeter_ids: Optional[list[str]] = None
    inline_records: Optional[list[dict]] = None
    class_mode: Optional[str] = None


class FeedbackRequest(BaseModel):
    user_id: str
    predicted_label: str
    corrected_label: Optional[str] = None
    client_id: str = ""


def create_app(service: ScoringService, cors_origins: str = "*"):
    """FastAPI wrapper exposing /score, /feedback, /model, /health."""
    from fastapi import FastAPI, HTTPException

    app = FastAPI(title="retweetguard")
    app.state.service = service
    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        # browser review panels are served from their own origin
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[o.strip() for o in cors_origins.split(",")],
            allow_methods=["*"], allow_headers=["*"])

    @app.post("/score")
    def score(request: ScoreRequest):
        if (request.tweet_ref is None and request.retweeter_ids is None
                and request.inline_records is None):
            raise HTTPException(
                status_code=400,
                detail="provide tweet_ref, retweeter_ids, or inline_records")
        try:
            results = service.score(
                user_ids=request.retweeter_ids,
                inline_records=request.inline_records,
                tweet_ref=request.tweet_ref,
                class_mode=request.class_mode)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0]))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except RuntimeError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        return {"results": results, "model_version": service.version}

    @app.post("/feedback")
    def feedback(request: FeedbackRequest):
        try:
            status = service.submit_feedback(
                user_id=request.user_id,
                predicted_label=request.predicted_label,
                corrected_label=request.corrected_label,
                client_id=request.client_id)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        retrained = service.retrain_if_due() is not None if status == ACCEPTED \
            else False
        return {"status": status, "buffer_size": service.buffer_size,
                "retrained": retrained, "model_version": service.version}

    @app.get("/model")
    def model_info():
        return service.model_info()

    @app.get("/health")
    def health():
        return {"status": "ok"}

    return app
