"""User records, labels, and enrichment scores: domain types and file I/O.

A corpus is a newline-delimited UTF-8 file, one self-contained user object
per line.  Each record carries the profile fields, optional enrichment
scores and a ``posts`` array; all timestamps are RFC 3339 UTC.  Labels and
enrichment scores live in separate tab-delimited files so the same corpus
can be re-labelled or re-scored without rewriting timelines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Mapping, Optional

ORIGINAL_TWEET = "original_tweet"
RETWEET_ACTION = "retweet_action"
POST_KINDS = (ORIGINAL_TWEET, RETWEET_ACTION)

GENUINE = "genuine"
BOT = "bot"
PROMOTIONAL = "promotional"
NORMAL = "normal"
CUSTOMER = "customer"

FOUR_CLASSES = (GENUINE, BOT, PROMOTIONAL, NORMAL)
CUSTOMER_CLASSES = (BOT, PROMOTIONAL, NORMAL)
BINARY_CLASSES = (GENUINE, CUSTOMER)

MAX_TIMELINE_LENGTH = 3200


class CorpusError(ValueError):
    """Raised for malformed corpus, label, or score files."""


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    try:
        ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except (ValueError, TypeError, AttributeError):
        raise CorpusError(f"invalid timestamp: {value!r}") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class Post:
    post_id: str
    timestamp: datetime
    kind: str
    mention_count: int = 0
    url_count: int = 0
    hashtag_count: int = 0
    received_retweet_count: int = 0


@dataclass(frozen=True)
class Profile:
    user_id: str
    screen_name: str
    created_at: datetime
    description: str = ""
    has_url: bool = False
    followee_count: int = 0
    follower_count: int = 0
    declared_status_count: Optional[int] = None
    verified: bool = False


@dataclass(frozen=True)
class UserRecord:
    profile: Profile
    timeline: tuple[Post, ...] = ()
    bot_score: Optional[float] = None
    influence_score: Optional[float] = None

    @property
    def user_id(self) -> str:
        return self.profile.user_id


@dataclass(frozen=True)
class Corpus:
    records: tuple[UserRecord, ...]
    snapshot_time: datetime

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def get(self, user_id: str) -> Optional[UserRecord]:
        return self._index.get(user_id)

    @property
    def _index(self) -> dict[str, UserRecord]:
        idx = getattr(self, "_index_cache", None)
        if idx is None:
            idx = {r.user_id: r for r in self.records}
            object.__setattr__(self, "_index_cache", idx)
        return idx

    @property
    def user_ids(self) -> list[str]:
        return [r.user_id for r in self.records]


@dataclass
class LabelMap:
    """user_id -> class name, plus the derived customer/genuine view."""

    by_user: dict[str, str] = field(default_factory=dict)

    def counts(self) -> dict[str, int]:
        out = {name: 0 for name in FOUR_CLASSES}
        for cls in self.by_user.values():
            out[cls] = out.get(cls, 0) + 1
        return out

    def binary_view(self) -> dict[str, str]:
        return {
            uid: (GENUINE if cls == GENUINE else CUSTOMER)
            for uid, cls in self.by_user.items()
        }

    def __len__(self) -> int:
        return len(self.by_user)


def _require(mapping: Mapping, key: str, line_no: int):
    if key not in mapping:
        raise CorpusError(f"line {line_no}: missing field {key!r}")
    return mapping[key]


def _check_count(value, name: str, line_no: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise CorpusError(f"line {line_no}: {name} must be a non-negative integer, got {value!r}")
    return value


def _check_bot_score(value, line_no: int) -> float:
    score = float(value)
    if not 0.0 <= score <= 1.0:
        raise CorpusError(f"line {line_no}: bot_score {score} outside [0, 1]")
    return score


def _check_influence(value, line_no: int) -> float:
    score = float(value)
    if not 1.0 <= score <= 100.0:
        raise CorpusError(f"line {line_no}: influence_score {score} outside [1, 100]")
    return score


def _parse_post(obj: dict, line_no: int) -> Post:
    kind = _require(obj, "kind", line_no)
    if kind not in POST_KINDS:
        raise CorpusError(f"line {line_no}: unknown post kind {kind!r}")
    return Post(
        post_id=str(_require(obj, "post_id", line_no)),
        timestamp=parse_timestamp(_require(obj, "timestamp", line_no)),
        kind=kind,
        mention_count=_check_count(obj.get("mention_count", 0), "mention_count", line_no),
        url_count=_check_count(obj.get("url_count", 0), "url_count", line_no),
        hashtag_count=_check_count(obj.get("hashtag_count", 0), "hashtag_count", line_no),
        received_retweet_count=_check_count(
            obj.get("received_retweet_count", 0), "received_retweet_count", line_no
        ),
    )


def _parse_record(line: str, line_no: int) -> UserRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"line {line_no}: malformed record: {exc}") from None
    if not isinstance(obj, dict):
        raise CorpusError(f"line {line_no}: record must be an object")

    declared = obj.get("declared_status_count")
    if declared is not None:
        declared = _check_count(declared, "declared_status_count", line_no)
    profile = Profile(
        user_id=str(_require(obj, "user_id", line_no)),
        screen_name=str(_require(obj, "screen_name", line_no)),
        created_at=parse_timestamp(_require(obj, "created_at", line_no)),
        description=str(obj.get("description", "")),
        has_url=bool(obj.get("has_url", False)),
        followee_count=_check_count(obj.get("followee_count", 0), "followee_count", line_no),
        follower_count=_check_count(obj.get("follower_count", 0), "follower_count", line_no),
        declared_status_count=declared,
        verified=bool(obj.get("verified", False)),
    )

    posts_raw = obj.get("posts", [])
    if not isinstance(posts_raw, list):
        raise CorpusError(f"line {line_no}: posts must be an array")
    if len(posts_raw) > MAX_TIMELINE_LENGTH:
        raise CorpusError(
            f"line {line_no}: timeline of {len(posts_raw)} posts exceeds {MAX_TIMELINE_LENGTH}"
        )
    posts = [_parse_post(p, line_no) for p in posts_raw]
    for post in posts:
        if post.timestamp < profile.created_at:
            raise CorpusError(
                f"line {line_no}: post {post.post_id} predates account creation"
            )
    posts.sort(key=lambda p: p.timestamp)

    bot_score = obj.get("bot_score")
    if bot_score is not None:
        bot_score = _check_bot_score(bot_score, line_no)
    influence = obj.get("influence_score")
    if influence is not None:
        influence = _check_influence(influence, line_no)

    return UserRecord(
        profile=profile,
        timeline=tuple(posts),
        bot_score=bot_score,
        influence_score=influence,
    )


def load_corpus(path, snapshot_time: Optional[datetime] = None) -> Corpus:
    """Load a newline-delimited corpus file.

    Timelines are sorted ascending by timestamp.  ``snapshot_time`` defaults
    to the maximum observed post timestamp (falling back to the newest
    account creation when every timeline is empty); an explicit value must
    not precede any observed timestamp.
    """
    records: list[UserRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = _parse_record(line, line_no)
            if record.user_id in seen:
                raise CorpusError(f"line {line_no}: duplicate user_id {record.user_id!r}")
            seen.add(record.user_id)
            records.append(record)

    observed = [p.timestamp for r in records for p in r.timeline]
    created = [r.profile.created_at for r in records]
    if snapshot_time is None:
        if observed:
            snapshot_time = max(observed)
        elif created:
            snapshot_time = max(created)
        else:
            snapshot_time = datetime.fromtimestamp(0, tz=timezone.utc)
    else:
        snapshot_time = snapshot_time.astimezone(timezone.utc)
        latest = max(observed + created, default=snapshot_time)
        if snapshot_time < latest:
            raise CorpusError(
                f"snapshot_time {format_timestamp(snapshot_time)} precedes observed "
                f"timestamp {format_timestamp(latest)}"
            )
    return Corpus(records=tuple(records), snapshot_time=snapshot_time)


def record_to_dict(record: UserRecord) -> dict:
    p = record.profile
    return {
        "user_id": p.user_id,
        "screen_name": p.screen_name,
        "created_at": format_timestamp(p.created_at),
        "description": p.description,
        "has_url": p.has_url,
        "followee_count": p.followee_count,
        "follower_count": p.follower_count,
        "declared_status_count": p.declared_status_count,
        "verified": p.verified,
        "bot_score": record.bot_score,
        "influence_score": record.influence_score,
        "posts": [
            {
                "post_id": post.post_id,
                "timestamp": format_timestamp(post.timestamp),
                "kind": post.kind,
                "mention_count": post.mention_count,
                "url_count": post.url_count,
                "hashtag_count": post.hashtag_count,
                "received_retweet_count": post.received_retweet_count,
            }
            for post in record.timeline
        ],
    }


def record_from_dict(obj: dict) -> UserRecord:
    return _parse_record(json.dumps(obj), 0)


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in corpus.records:
            fh.write(json.dumps(record_to_dict(record)) + "\n")


def load_labels(path, corpus: Corpus) -> LabelMap:
    """Load ``user_id<TAB>class`` labels; every id must exist in the corpus."""
    known = set(corpus.user_ids)
    by_user: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusError(f"line {line_no}: expected 'user_id<TAB>class', got {line!r}")
            uid, cls = parts[0].strip(), parts[1].strip().lower()
            if uid not in known:
                raise CorpusError(f"line {line_no}: unknown user_id {uid!r}")
            if cls not in FOUR_CLASSES:
                raise CorpusError(f"line {line_no}: unknown class {cls!r}")
            by_user[uid] = cls
    return LabelMap(by_user=by_user)


def save_labels(labels: LabelMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for uid, cls in labels.by_user.items():
            fh.write(f"{uid}\t{cls}\n")


class FileScoreProvider:
    """Enrichment scores from ``user_id<TAB>bot_score<TAB>influence_score``.

    A ``-`` in either score column marks a missing value.  This is the only
    provider shipped; anything talking to a remote scoring API should expose
    the same ``resolve`` interface.
    """

    def __init__(self, path):
        self._scores: dict[str, tuple[Optional[float], Optional[float]]] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise CorpusError(
                        f"line {line_no}: expected 'user_id<TAB>bot_score<TAB>influence_score'"
                    )
                uid = parts[0].strip()
                bot = None if parts[1].strip() == "-" else _check_bot_score(parts[1], line_no)
                infl = None if parts[2].strip() == "-" else _check_influence(parts[2], line_no)
                self._scores[uid] = (bot, infl)

    def resolve(self, user_id: str) -> Optional[tuple[Optional[float], Optional[float]]]:
        return self._scores.get(user_id)


class RemoteScoreProvider:
    """Placeholder for a live scoring API; not implemented, file-backed only."""

    def __init__(self, endpoint: str):
        self.endpoint = endpoint

    def resolve(self, user_id: str):
        raise NotImplementedError(
            "remote score lookup is not implemented; use FileScoreProvider"
        )


def attach_scores(corpus: Corpus, provider) -> Corpus:
    """Return a new corpus with provider scores attached where available."""
    out = []
    for record in corpus.records:
        resolved = provider.resolve(record.user_id)
        if resolved is None:
            out.append(record)
            continue
        bot, infl = resolved
        out.append(
            replace(
                record,
                bot_score=record.bot_score if bot is None else bot,
                influence_score=record.influence_score if infl is None else infl,
            )
        )
    return Corpus(records=tuple(out), snapshot_time=corpus.snapshot_time)


def records_from_iterable(records: Iterable[UserRecord],
                          snapshot_time: Optional[datetime] = None) -> Corpus:
    """Build an in-memory corpus, sorting timelines and checking id uniqueness."""
    fixed = []
    seen: set[str] = set()
    for record in records:
        if record.user_id in seen:
            raise CorpusError(f"duplicate user_id {record.user_id!r}")
        seen.add(record.user_id)
        timeline = tuple(sorted(record.timeline, key=lambda p: p.timestamp))
        fixed.append(replace(record, timeline=timeline))
    if snapshot_time is None:
        observed = [p.timestamp for r in fixed for p in r.timeline]
        created = [r.profile.created_at for r in fixed]
        snapshot_time = max(observed + created, default=datetime.fromtimestamp(0, tz=timezone.utc))
    return Corpus(records=tuple(fixed), snapshot_time=snapshot_time.astimezone(timezone.utc))
