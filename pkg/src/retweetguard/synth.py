"""Seeded synthetic corpus generation for tests and demos.

Each preset encodes one behavioral archetype with simple distributions:
Poisson event counts, categorical weekday/hour placement, uniform score
ranges. Customer-like presets retweet heavily with a Tuesday/Friday
emphasis and carry high bot scores; genuine presets spread activity
diurnally with balanced follow graphs. Every user draws from its own
spawned generator, so corpora are byte-identical for a fixed seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from .corpus import (
    BOT,
    Corpus,
    FOUR_CLASSES,
    GENUINE,
    LabelMap,
    MAX_TIMELINE_LENGTH,
    NORMAL,
    ORIGINAL_TWEET,
    PROMOTIONAL,
    Post,
    Profile,
    RETWEET_ACTION,
    UserRecord,
    records_from_iterable,
)

SNAPSHOT = datetime(2020, 1, 1, tzinfo=timezone.utc)
_SECONDS_PER_DAY = 86400

# hour profiles: waking-hours spread vs a tight burst window
_DIURNAL_HOURS = tuple(
    [0.2] * 7 + [1.0, 1.5, 1.5, 1.2, 1.0, 1.2, 1.0, 1.0, 1.2, 1.5, 1.8,
                 2.0, 1.8, 1.2, 0.8, 0.5, 0.3])
_BURST_HOURS = tuple(
    [0.05] * 10 + [4.0, 4.0, 0.05, 0.05, 4.0, 0.05, 0.05, 0.05, 0.05,
                   0.05, 0.05, 0.05, 0.05, 0.05])
_FLAT_WEEK = (1.0,) * 7
# Monday=0 ... Sunday=6; blackmarket refresh days are Tuesday and Friday
_TUE_FRI_WEEK = (0.4, 5.0, 0.4, 0.4, 5.0, 0.4, 0.4)


@dataclass(frozen=True)
class BehaviorPreset:
    label: str
    followee_mean: float = 200.0
    follower_mean: float = 200.0
    originals_per_day: float = 2.0
    retweets_per_day: float = 1.0
    hour_weights: tuple = _DIURNAL_HOURS
    weekday_weights: tuple = _FLAT_WEEK
    retweet_weekday_weights: tuple = _FLAT_WEEK
    received_mean: float = 1.0
    bot_score_low: float = 0.0
    bot_score_high: float = 0.2
    influence_low: float = 20.0
    influence_high: float = 80.0
    influence_missing_rate: float = 0.1
    bot_score_missing_rate: float = 0.0
    declared_missing_rate: float = 0.1
    description_rate: float = 0.8
    url_rate: float = 0.4
    mention_mean: float = 0.5
    url_mean: float = 0.3
    hashtag_mean: float = 0.5

    def __post_init__(self):
        if self.label not in FOUR_CLASSES:
            raise ValueError(f"label must be one of {FOUR_CLASSES}")
        for name in ("followee_mean", "follower_mean", "originals_per_day",
                     "retweets_per_day", "received_mean", "mention_mean",
                     "url_mean", "hashtag_mean"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name, size in (("hour_weights", 24), ("weekday_weights", 7),
                           ("retweet_weekday_weights", 7)):
            w = np.asarray(getattr(self, name), dtype=np.float64)
            if w.shape != (size,) or (w < 0).any() or w.sum() <= 0:
                raise ValueError(f"{name} must be {size} non-negative weights "
                                 "with positive sum")
        for name in ("influence_missing_rate", "bot_score_missing_rate",
                     "declared_missing_rate", "description_rate", "url_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not 0.0 <= self.bot_score_low <= self.bot_score_high <= 1.0:
            raise ValueError("bot score range must satisfy 0 <= low <= high <= 1")
        if not 1.0 <= self.influence_low <= self.influence_high <= 100.0:
            raise ValueError("influence range must satisfy 1 <= low <= high <= 100")


def genuine_preset() -> BehaviorPreset:
    return BehaviorPreset(label=GENUINE)


def bot_preset() -> BehaviorPreset:
    return BehaviorPreset(
        label=BOT, followee_mean=1500.0, follower_mean=150.0,
        originals_per_day=0.2, retweets_per_day=15.0,
        hour_weights=_BURST_HOURS, retweet_weekday_weights=_TUE_FRI_WEEK,
        received_mean=0.1, bot_score_low=0.75, bot_score_high=1.0,
        influence_low=1.0, influence_high=20.0, influence_missing_rate=0.3,
        description_rate=0.3, mention_mean=2.0, url_mean=1.5,
        hashtag_mean=2.5)


def promotional_preset() -> BehaviorPreset:
    return BehaviorPreset(
        label=PROMOTIONAL, followee_mean=1000.0, follower_mean=200.0,
        originals_per_day=4.0, retweets_per_day=8.0,
        hour_weights=_BURST_HOURS, retweet_weekday_weights=_TUE_FRI_WEEK,
        received_mean=25.0, bot_score_low=0.5, bot_score_high=0.85,
        influence_low=10.0, influence_high=40.0, url_rate=0.95,
        mention_mean=1.5, url_mean=1.8, hashtag_mean=2.0)


def normal_customer_preset() -> BehaviorPreset:
    return BehaviorPreset(
        label=NORMAL, followee_mean=600.0, follower_mean=250.0,
        originals_per_day=1.0, retweets_per_day=5.0,
        retweet_weekday_weights=_TUE_FRI_WEEK, received_mean=6.0,
        bot_score_low=0.35, bot_score_high=0.65, influence_low=15.0,
        influence_high=50.0, url_rate=0.6, hashtag_mean=1.0)


DEFAULT_PRESETS = {
    GENUINE: genuine_preset,
    BOT: bot_preset,
    PROMOTIONAL: promotional_preset,
    NORMAL: normal_customer_preset,
}


def _sample_day_epochs(rng: np.random.Generator, n: int, day_epochs: np.ndarray,
                       weekday_weights, hour_weights) -> np.ndarray:
    """Place n events on candidate days weighted by weekday, then by hour."""
    if n == 0:
        return np.array([], dtype=np.int64)
    wd = (day_epochs // _SECONDS_PER_DAY + 3) % 7
    day_p = np.asarray(weekday_weights, dtype=np.float64)[wd]
    day_p = day_p / day_p.sum()
    days = rng.choice(day_epochs, size=n, p=day_p)
    hour_p = np.asarray(hour_weights, dtype=np.float64)
    hours = rng.choice(24, size=n, p=hour_p / hour_p.sum())
    seconds = rng.integers(0, 3600, size=n)
    return days + hours * 3600 + seconds


def _generate_user(preset: BehaviorPreset, user_id: str, span_days: int,
                   rng: np.random.Generator) -> UserRecord:
    snapshot_epoch = int(SNAPSHOT.timestamp())
    first_day = snapshot_epoch - span_days * _SECONDS_PER_DAY
    day_epochs = first_day + _SECONDS_PER_DAY * np.arange(span_days)

    n_orig = int(rng.poisson(preset.originals_per_day * span_days))
    n_rt = int(rng.poisson(preset.retweets_per_day * span_days))
    total = n_orig + n_rt
    if total > MAX_TIMELINE_LENGTH:
        n_orig = n_orig * MAX_TIMELINE_LENGTH // total
        n_rt = MAX_TIMELINE_LENGTH - n_orig

    orig_times = _sample_day_epochs(rng, n_orig, day_epochs,
                                    preset.weekday_weights, preset.hour_weights)
    rt_times = _sample_day_epochs(rng, n_rt, day_epochs,
                                  preset.retweet_weekday_weights,
                                  preset.hour_weights)
    received = rng.poisson(preset.received_mean, size=n_orig)

    posts = []
    for i, t in enumerate(orig_times):
        posts.append(Post(
            post_id=f"{user_id}-o{i}",
            timestamp=datetime.fromtimestamp(int(t), tz=timezone.utc),
            kind=ORIGINAL_TWEET,
            mention_count=int(rng.poisson(preset.mention_mean)),
            url_count=int(rng.poisson(preset.url_mean)),
            hashtag_count=int(rng.poisson(preset.hashtag_mean)),
            received_retweet_count=int(received[i])))
    for i, t in enumerate(rt_times):
        posts.append(Post(
            post_id=f"{user_id}-r{i}",
            timestamp=datetime.fromtimestamp(int(t), tz=timezone.utc),
            kind=RETWEET_ACTION,
            mention_count=int(rng.poisson(preset.mention_mean)),
            url_count=int(rng.poisson(preset.url_mean)),
            hashtag_count=int(rng.poisson(preset.hashtag_mean)),
            received_retweet_count=0))

    age_days = int(rng.integers(30, 2000))
    created_at = datetime.fromtimestamp(
        first_day - age_days * _SECONDS_PER_DAY, tz=timezone.utc)
    has_description = rng.random() < preset.description_rate
    profile = Profile(
        user_id=user_id,
        screen_name=f"{preset.label[:4]}_{user_id[-6:]}",
        created_at=created_at,
        description=("synthetic account " + "x" * int(rng.integers(0, 80))
                     if has_description else ""),
        has_url=bool(rng.random() < preset.url_rate),
        followee_count=int(rng.poisson(preset.followee_mean)),
        follower_count=int(rng.poisson(preset.follower_mean)),
        declared_status_count=(
            None if rng.random() < preset.declared_missing_rate
            else len(posts) + int(rng.integers(0, 50))),
        verified=False)

    bot_score = (None if rng.random() < preset.bot_score_missing_rate
                 else float(rng.uniform(preset.bot_score_low,
                                        preset.bot_score_high)))
    influence = (None if rng.random() < preset.influence_missing_rate
                 else float(rng.uniform(preset.influence_low,
                                        preset.influence_high)))
    return UserRecord(profile=profile, timeline=tuple(posts),
                      bot_score=bot_score, influence_score=influence)


def generate(presets: Sequence[tuple[BehaviorPreset, int]],
             span_days: int = 60, seed: int = 0) -> tuple[Corpus, LabelMap]:
    """Build a corpus of len = sum of counts, labeled per preset."""
    if span_days < 7:
        raise ValueError("span_days must be at least 7")
    if not presets or any(count < 1 for _, count in presets):
        raise ValueError("every preset needs a count of at least 1")
    total = sum(count for _, count in presets)
    seeds = np.random.SeedSequence(seed).spawn(total)
    records = []
    labels = {}
    n = 0
    for preset, count in presets:
        for _ in range(count):
            user_id = f"u{n:06d}"
            rng = np.random.default_rng(seeds[n])
            records.append(_generate_user(preset, user_id, span_days, rng))
            labels[user_id] = preset.label
            n += 1
    corpus = records_from_iterable(records, snapshot_time=SNAPSHOT)
    return corpus, LabelMap(by_user=labels)


def load_presets(path) -> tuple[list[tuple[BehaviorPreset, int]], int]:
    """Read a JSON preset file: {"span_days": n, "presets": [{...}, ...]}.

    Each preset object holds BehaviorPreset fields plus a "count". Tuple
    fields accept JSON arrays. Returns (presets, span_days).
    """
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    span_days = int(obj.get("span_days", 60))
    presets = []
    for entry in obj["presets"]:
        entry = dict(entry)
        count = int(entry.pop("count"))
        for name in ("hour_weights", "weekday_weights", "retweet_weekday_weights"):
            if name in entry:
                entry[name] = tuple(entry[name])
        presets.append((BehaviorPreset(**entry), count))
    return presets, span_days


def save_presets(presets: Sequence[tuple[BehaviorPreset, int]], path,
                 span_days: int = 60) -> None:
    entries = []
    for preset, count in presets:
        entry = asdict(preset)
        for name in ("hour_weights", "weekday_weights", "retweet_weekday_weights"):
            entry[name] = list(entry[name])
        entry["count"] = count
        entries.append(entry)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"span_days": span_days, "presets": entries}, fh, indent=2)
        fh.write("\n")
