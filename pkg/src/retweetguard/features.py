"""Fixed-order 64-dimensional behavioral feature vectors.

Families and layout (feature names are the export header tokens):

* PF1-PF5    profile: account age (whole days), screen-name length,
             has-description flag, description length, has-URL flag
* SNF1-SNF4  social graph: followees, followers, followee/follower ratio,
             influence score (imputed with the training-split median)
* UAF1-UAF8  activity: status total, mean mentions/URLs/hashtags per post,
             originals per day, retweets per day, retweets per original,
             bot score (0.5 when unknown)
* LF1-LF44   likelihood: per-weekday tweet/retweet shares, per-weekday
             hourly regularity (entropy), tweet/retweet steadiness,
             per-weekday shares of the busiest weekday
* FF1-FF3    fluctuation: spread of received retweet counts, mean and
             spread of log inter-retweet gaps

All day/hour bucketing is in UTC.  Every function here is pure and never
emits NaN or infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Sequence

import numpy as np

from .corpus import Corpus, LabelMap, Profile, UserRecord, ORIGINAL_TWEET

SECONDS_PER_DAY = 86400.0

FEATURE_NAMES: tuple[str, ...] = tuple(
    [f"PF{i}" for i in range(1, 6)]
    + [f"SNF{i}" for i in range(1, 5)]
    + [f"UAF{i}" for i in range(1, 9)]
    + [f"LF{i}" for i in range(1, 45)]
    + [f"FF{i}" for i in range(1, 4)]
)

FAMILY_SLICES: dict[str, slice] = {
    "PF": slice(0, 5),
    "SNF": slice(5, 9),
    "UAF": slice(9, 17),
    "LF": slice(17, 61),
    "FF": slice(61, 64),
}

N_FEATURES = len(FEATURE_NAMES)
SNF4_INDEX = FEATURE_NAMES.index("SNF4")


@dataclass(frozen=True)
class ExtractionConfig:
    """Constants behind the feature formulas.

    Inter-arrival gaps are measured in seconds; steadiness smooths the
    standard deviation with ``steadiness_epsilon`` and log-gap features use
    ln(gap + 1) so zero gaps stay defined.
    """

    snapshot_time: datetime
    entropy_log_base: float = 2.0
    steadiness_epsilon: float = 1.0
    bot_score_default: float = 0.5
    influence_fallback: float = 50.5

    def __post_init__(self):
        if self.entropy_log_base <= 1.0:
            raise ValueError("entropy_log_base must exceed 1")
        if self.steadiness_epsilon <= 0.0:
            raise ValueError("steadiness_epsilon must be positive")


@dataclass(frozen=True)
class FeatureVector:
    user_id: str
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (N_FEATURES,):
            raise ValueError(f"expected {N_FEATURES} features, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature vector contains non-finite entries")


def _to_epoch(timestamps) -> np.ndarray:
    if isinstance(timestamps, np.ndarray):
        return timestamps.astype(np.float64)
    return np.array([t.timestamp() for t in timestamps], dtype=np.float64)


def _weekdays(epoch: np.ndarray) -> np.ndarray:
    # 1970-01-01 was a Thursday; index Monday=0 like datetime.weekday().
    return ((np.floor_divide(epoch, SECONDS_PER_DAY).astype(np.int64)) + 3) % 7


def _hours(epoch: np.ndarray) -> np.ndarray:
    return (np.mod(epoch, SECONDS_PER_DAY) // 3600.0).astype(np.int64)


def hourly_entropy(timestamps, log_base: float = 2.0) -> float:
    """Entropy of the UTC hour-of-day distribution of the given events.

    Empty input gives 0; a uniform spread over all 24 hours gives
    log2(24) when ``log_base`` is 2.
    """
    epoch = _to_epoch(timestamps)
    if epoch.size == 0:
        return 0.0
    counts = np.bincount(_hours(epoch), minlength=24)
    p = counts[counts > 0] / epoch.size
    h = float(-(p * np.log2(p)).sum())
    if log_base != 2.0:
        h /= math.log2(log_base)
    return h


def steadiness(timestamps, epsilon: float = 1.0) -> float:
    """Reciprocal spread of consecutive inter-event gaps: 1 / (sigma + epsilon).

    sigma is the population standard deviation of the gaps in seconds.
    Fewer than two gaps (under three events) gives 0.
    """
    epoch = _to_epoch(timestamps)
    if epoch.size < 3:
        return 0.0
    gaps = np.diff(epoch)
    return float(1.0 / (gaps.std() + epsilon))


def profile_features(profile: Profile, cfg: ExtractionConfig) -> np.ndarray:
    age_seconds = (cfg.snapshot_time - profile.created_at).total_seconds()
    if age_seconds < 0:
        raise ValueError(
            f"user {profile.user_id!r} created after the corpus snapshot time"
        )
    return np.array(
        [
            float(math.floor(age_seconds / SECONDS_PER_DAY)),
            float(len(profile.screen_name)),
            1.0 if profile.description else 0.0,
            float(len(profile.description)),
            1.0 if profile.has_url else 0.0,
        ]
    )


def social_features(record: UserRecord, cfg: ExtractionConfig,
                    imputed_influence: float) -> np.ndarray:
    p = record.profile
    influence = record.influence_score
    return np.array(
        [
            float(p.followee_count),
            float(p.follower_count),
            p.followee_count / max(p.follower_count, 1),
            float(influence) if influence is not None else float(imputed_influence),
        ]
    )


@dataclass(frozen=True)
class _TimelineArrays:
    epoch: np.ndarray
    is_original: np.ndarray
    mentions: np.ndarray
    urls: np.ndarray
    hashtags: np.ndarray
    received: np.ndarray


def _timeline_arrays(record: UserRecord) -> _TimelineArrays:
    posts = record.timeline
    return _TimelineArrays(
        epoch=np.array([p.timestamp.timestamp() for p in posts], dtype=np.float64),
        is_original=np.array([p.kind == ORIGINAL_TWEET for p in posts], dtype=bool),
        mentions=np.array([p.mention_count for p in posts], dtype=np.float64),
        urls=np.array([p.url_count for p in posts], dtype=np.float64),
        hashtags=np.array([p.hashtag_count for p in posts], dtype=np.float64),
        received=np.array([p.received_retweet_count for p in posts], dtype=np.float64),
    )


def _active_span_days(epoch: np.ndarray) -> float:
    if epoch.size == 0:
        return 1.0
    return max(1.0, math.ceil((epoch[-1] - epoch[0]) / SECONDS_PER_DAY))


def _activity(arr: _TimelineArrays, record: UserRecord, cfg: ExtractionConfig) -> np.ndarray:
    n = arr.epoch.size
    declared = record.profile.declared_status_count
    total = float(declared) if declared is not None else float(n)
    if n == 0:
        rates = np.zeros(6)
    else:
        span = _active_span_days(arr.epoch)
        n_orig = float(arr.is_original.sum())
        n_rt = float(n - n_orig)
        rates = np.array(
            [
                arr.mentions.mean(),
                arr.urls.mean(),
                arr.hashtags.mean(),
                n_orig / span,
                n_rt / span,
                n_rt / max(n_orig, 1.0),
            ]
        )
    bot = record.bot_score
    bot = float(bot) if bot is not None else cfg.bot_score_default
    return np.concatenate([[total], rates, [bot]])


def activity_features(record: UserRecord, cfg: ExtractionConfig) -> np.ndarray:
    return _activity(_timeline_arrays(record), record, cfg)


def _weekday_hour_counts(epoch: np.ndarray) -> np.ndarray:
    """7x24 matrix of event counts by (UTC weekday, UTC hour)."""
    counts = np.zeros((7, 24), dtype=np.int64)
    if epoch.size:
        flat = _weekdays(epoch) * 24 + _hours(epoch)
        counts = np.bincount(flat, minlength=7 * 24).reshape(7, 24)
    return counts


def _row_entropies(counts: np.ndarray, log_base: float) -> np.ndarray:
    out = np.zeros(counts.shape[0])
    for i, row in enumerate(counts):
        total = row.sum()
        if total == 0:
            continue
        p = row[row > 0] / total
        h = float(-(p * np.log2(p)).sum())
        if log_base != 2.0:
            h /= math.log2(log_base)
        out[i] = h
    return out


def _likelihood(arr: _TimelineArrays, cfg: ExtractionConfig) -> np.ndarray:
    orig_epoch = arr.epoch[arr.is_original]
    rt_epoch = arr.epoch[~arr.is_original]

    orig_grid = _weekday_hour_counts(orig_epoch)
    rt_grid = _weekday_hour_counts(rt_epoch)
    orig_per_day = orig_grid.sum(axis=1).astype(np.float64)
    rt_per_day = rt_grid.sum(axis=1).astype(np.float64)

    def share_of_total(per_day):
        total = per_day.sum()
        return per_day / total if total > 0 else np.zeros(7)

    def share_of_peak(per_day):
        peak = per_day.max()
        return per_day / peak if peak > 0 else np.zeros(7)

    return np.concatenate(
        [
            share_of_total(orig_per_day),                      # LF1-7
            share_of_total(rt_per_day),                        # LF8-14
            _row_entropies(orig_grid, cfg.entropy_log_base),   # LF15-21
            _row_entropies(rt_grid, cfg.entropy_log_base),     # LF22-28
            [steadiness(orig_epoch, cfg.steadiness_epsilon)],  # LF29
            [steadiness(rt_epoch, cfg.steadiness_epsilon)],    # LF30
            share_of_peak(orig_per_day),                       # LF31-37
            share_of_peak(rt_per_day),                         # LF38-44
        ]
    )


def likelihood_features(record: UserRecord, cfg: ExtractionConfig) -> np.ndarray:
    return _likelihood(_timeline_arrays(record), cfg)


def _fluctuation(arr: _TimelineArrays, cfg: ExtractionConfig) -> np.ndarray:
    received = arr.received[arr.is_original]
    ff1 = float(received.std()) if received.size >= 2 else 0.0

    rt_epoch = arr.epoch[~arr.is_original]
    if rt_epoch.size >= 2:
        log_gaps = np.log(np.diff(rt_epoch) + 1.0)
        ff2, ff3 = float(log_gaps.mean()), float(log_gaps.std())
    else:
        ff2, ff3 = 0.0, 0.0
    return np.array([ff1, ff2, ff3])


def fluctuation_features(record: UserRecord, cfg: ExtractionConfig) -> np.ndarray:
    return _fluctuation(_timeline_arrays(record), cfg)


def extract_all(record: UserRecord, cfg: ExtractionConfig,
                imputed_influence: float) -> FeatureVector:
    """Concatenate all five families in the fixed PF|SNF|UAF|LF|FF order."""
    arr = _timeline_arrays(record)
    values = np.concatenate(
        [
            profile_features(record.profile, cfg),
            social_features(record, cfg, imputed_influence),
            _activity(arr, record, cfg),
            _likelihood(arr, cfg),
            _fluctuation(arr, cfg),
        ]
    )
    return FeatureVector(user_id=record.user_id, values=values)


def median_influence(records: Sequence[UserRecord]) -> Optional[float]:
    """Median of the influence scores present among ``records``; None if absent."""
    values = [r.influence_score for r in records if r.influence_score is not None]
    if not values:
        return None
    return float(np.median(values))


def extract_matrix(records: Sequence[UserRecord], cfg: ExtractionConfig,
                   imputed_influence: Optional[float] = None):
    """Feature matrix for a batch of records.

    When ``imputed_influence`` is omitted it falls back to the median of the
    influence scores present in the batch (or the config fallback if none).
    Returns ``(user_ids, X, influence_missing)``.
    """
    if imputed_influence is None:
        med = median_influence(records)
        imputed_influence = med if med is not None else cfg.influence_fallback
    ids = [r.user_id for r in records]
    X = np.empty((len(records), N_FEATURES))
    missing = np.zeros(len(records), dtype=bool)
    for i, record in enumerate(records):
        X[i] = extract_all(record, cfg, imputed_influence).values
        missing[i] = record.influence_score is None
    return ids, X, missing


@dataclass
class LabeledDataset:
    """Feature matrix plus class labels, ready for training and evaluation.

    ``influence_missing`` marks rows whose SNF4 entry was imputed; the
    cross-validation driver re-imputes those entries from each training
    fold's median (``snf4_column`` is None when SNF4 was sliced away, in
    which case no re-imputation applies).
    """

    user_ids: list[str]
    X: np.ndarray
    y: list[str]
    feature_names: list[str] = field(default_factory=lambda: list(FEATURE_NAMES))
    influence_missing: Optional[np.ndarray] = None
    influence_fallback: float = 50.5

    def __post_init__(self):
        if self.X.shape[0] != len(self.y) or self.X.shape[0] != len(self.user_ids):
            raise ValueError("feature matrix, labels, and user ids disagree on length")
        if self.X.shape[1] != len(self.feature_names):
            raise ValueError("feature matrix width does not match feature names")

    @property
    def classes(self) -> list[str]:
        return sorted(set(self.y))

    @property
    def snf4_column(self) -> Optional[int]:
        try:
            return self.feature_names.index("SNF4")
        except ValueError:
            return None

    def __len__(self) -> int:
        return len(self.y)

    def subset_features(self, names: Sequence[str]) -> "LabeledDataset":
        indices = [self.feature_names.index(n) for n in names]
        return LabeledDataset(
            user_ids=self.user_ids,
            X=self.X[:, indices].copy(),
            y=list(self.y),
            feature_names=list(names),
            influence_missing=(
                None if self.influence_missing is None else self.influence_missing.copy()
            ),
            influence_fallback=self.influence_fallback,
        )


def build_dataset(corpus: Corpus, labels: LabelMap, mode: str = "binary",
                  cfg: Optional[ExtractionConfig] = None) -> LabeledDataset:
    """Extract features for every labelled user.

    ``mode`` is ``"binary"`` (customer vs genuine) or ``"four_class"``.
    SNF4 is provisionally imputed with the whole-corpus median; the
    evaluation driver overrides it per training fold.
    """
    if mode not in ("binary", "four_class"):
        raise ValueError(f"unknown label mode {mode!r}")
    if cfg is None:
        cfg = ExtractionConfig(snapshot_time=corpus.snapshot_time)
    label_view = labels.binary_view() if mode == "binary" else labels.by_user
    records = [r for r in corpus.records if r.user_id in label_view]
    ids, X, missing = extract_matrix(records, cfg)
    return LabeledDataset(
        user_ids=ids,
        X=X,
        y=[label_view[uid] for uid in ids],
        influence_missing=missing,
        influence_fallback=cfg.influence_fallback,
    )


def impute_influence(dataset: LabeledDataset, train_indices: np.ndarray) -> tuple[np.ndarray, float]:
    """Fill imputed SNF4 entries with the training rows' median influence.

    Returns a patched copy of the matrix and the median used.  Datasets
    without an SNF4 column (or with no imputed rows) come back unchanged
    with the median that training-time extraction would use.
    """
    col = dataset.snf4_column
    if col is None or dataset.influence_missing is None:
        return dataset.X, dataset.influence_fallback
    train_mask = np.zeros(len(dataset), dtype=bool)
    train_mask[train_indices] = True
    observed = dataset.X[train_mask & ~dataset.influence_missing, col]
    median = float(np.median(observed)) if observed.size else dataset.influence_fallback
    if not dataset.influence_missing.any():
        return dataset.X, median
    X = dataset.X.copy()
    X[dataset.influence_missing, col] = median
    return X, median


def save_feature_matrix(path, user_ids: Sequence[str], X: np.ndarray,
                        feature_names: Sequence[str] = FEATURE_NAMES) -> None:
    """Write the delimited feature matrix: header row, then one user per row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("user_id\t" + "\t".join(feature_names) + "\n")
        for uid, row in zip(user_ids, X):
            fh.write(uid + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def load_feature_matrix(path):
    """Read a matrix written by :func:`save_feature_matrix`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header[0] != "user_id":
            raise ValueError("feature matrix must start with a user_id column")
        names = header[1:]
        ids, rows = [], []
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            ids.append(parts[0])
            rows.append([float(v) for v in parts[1:]])
    X = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(names)))
    return ids, X, names
