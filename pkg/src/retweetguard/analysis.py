"""Retweet-thread timing statistics and customer-filtered re-ranking flows.

A thread's lifespan is the gap between its first and last retweet;
arr_mad is the mean absolute deviation of consecutive inter-arrival
gaps about their mean. Popularity re-ranking subtracts known customer
retweeters from each tweet's count and tallies how tweets move between
five equal-width popularity bins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import CorpusError, format_timestamp, parse_timestamp


@dataclass(frozen=True)
class RetweetThread:
    """Time-ordered retweet events observed for one tweet.

    ``declared_count`` may exceed the number of captured events.
    """

    tweet_id: str
    events: tuple = ()  # (user_id, datetime) pairs, time-ordered
    declared_count: int = 0

    def __post_init__(self):
        times = [t for _, t in self.events]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError(f"thread {self.tweet_id}: events not time-ordered")
        if self.declared_count < 0:
            raise ValueError(f"thread {self.tweet_id}: negative declared count")

    @property
    def retweeter_ids(self) -> list[str]:
        return [uid for uid, _ in self.events]


def thread_stats(thread: RetweetThread) -> tuple[Optional[float], Optional[float]]:
    """(lifespan seconds, inter-arrival MAD seconds); (None, None) under 2 events."""
    if len(thread.events) < 2:
        return None, None
    times = np.array([t.timestamp() for _, t in thread.events], dtype=np.float64)
    lifespan = float(times[-1] - times[0])
    gaps = np.diff(times)
    arr_mad = float(np.abs(gaps - gaps.mean()).mean())
    return lifespan, arr_mad


def heatmap_bins(threads: Sequence[RetweetThread],
                 bin_width: float = 0.5) -> tuple[np.ndarray, int]:
    """2-D histogram of (lifespan, arr_mad) on log10(x+1) axes.

    Returns (grid, n_binned) where grid[i, j] counts threads whose
    log-lifespan falls in bin i and log-MAD in bin j; threads with
    fewer than 2 events are skipped.
    """
    points = []
    for thread in threads:
        lifespan, arr_mad = thread_stats(thread)
        if lifespan is None:
            continue
        points.append((np.log10(lifespan + 1.0), np.log10(arr_mad + 1.0)))
    if not points:
        return np.zeros((1, 1), dtype=np.int64), 0
    pts = np.array(points)
    li = np.floor(pts[:, 0] / bin_width).astype(np.int64)
    mi = np.floor(pts[:, 1] / bin_width).astype(np.int64)
    grid = np.zeros((int(li.max()) + 1, int(mi.max()) + 1), dtype=np.int64)
    np.add.at(grid, (li, mi), 1)
    return grid, len(points)


@dataclass(frozen=True)
class FlowMatrix:
    """5x5 tally of tweets moving from before-filter to after-filter bins."""

    matrix: np.ndarray
    bin_edges: np.ndarray  # shared by both axes: [0, w, 2w, 3w, 4w, max]

    def __post_init__(self):
        if self.matrix.shape != (5, 5):
            raise ValueError("flow matrix must be 5x5")
        if (self.matrix < 0).any():
            raise ValueError("flow matrix entries must be non-negative")

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def before_populations(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def after_populations(self) -> np.ndarray:
        return self.matrix.sum(axis=0)


def _bin_of(count: float, edges: np.ndarray) -> int:
    # last bin takes its right edge; everything else is half-open
    if count >= edges[-1]:
        return 4
    idx = int(np.searchsorted(edges, count, side="right")) - 1
    return min(max(idx, 0), 4)


def filter_and_rebin(tweets: Sequence[tuple[str, Sequence[str], int]],
                     customers: set) -> FlowMatrix:
    """Tweets are (tweet_id, retweeter user_ids, count) triples.

    The filtered count removes retweeters found in ``customers``. Both
    raw and filtered counts are binned into five equal-width bins over
    [0, max raw count]; the matrix cell (i, j) counts tweets that
    moved from raw bin i to filtered bin j.
    """
    if not tweets:
        return FlowMatrix(matrix=np.zeros((5, 5), dtype=np.int64),
                          bin_edges=np.linspace(0.0, 1.0, 6))
    before = []
    after = []
    for tweet_id, retweeters, count in tweets:
        removed = len(set(retweeters) & customers)
        filtered = count - removed
        if filtered < 0:
            raise CorpusError(
                f"tweet {tweet_id}: {removed} customer retweeters exceed "
                f"declared count {count}")
        before.append(count)
        after.append(filtered)
    top = max(max(before), 1)
    edges = np.linspace(0.0, float(top), 6)
    matrix = np.zeros((5, 5), dtype=np.int64)
    for b, a in zip(before, after):
        matrix[_bin_of(b, edges), _bin_of(a, edges)] += 1
    return FlowMatrix(matrix=matrix, bin_edges=edges)


def load_threads(path) -> list[RetweetThread]:
    """Read threads from JSON lines: {tweet_id, count, events: [[user_id, ts],..]}."""
    threads = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                events = tuple(
                    (str(uid), parse_timestamp(ts)) for uid, ts in obj["events"])
                threads.append(RetweetThread(
                    tweet_id=str(obj["tweet_id"]),
                    events=events,
                    declared_count=int(obj.get("count", len(events)))))
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad thread record: {exc}") from exc
    return threads


def save_threads(threads: Sequence[RetweetThread], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for thread in threads:
            obj = {
                "tweet_id": thread.tweet_id,
                "count": thread.declared_count,
                "events": [[uid, format_timestamp(ts)] for uid, ts in thread.events],
            }
            fh.write(json.dumps(obj) + "\n")


def save_heatmap_csv(grid: np.ndarray, path, bin_width: float = 0.5) -> None:
    """CSV with log-bin lower edges as row/column labels."""
    with open(path, "w", encoding="utf-8") as fh:
        header = ["lifespan_log10_bin"] + [
            repr(j * bin_width) for j in range(grid.shape[1])]
        fh.write(",".join(header) + "\n")
        for i in range(grid.shape[0]):
            row = [repr(i * bin_width)] + [str(int(v)) for v in grid[i]]
            fh.write(",".join(row) + "\n")


def save_flow_csv(flow: FlowMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("before_bin,after_bin,tweets\n")
        for i in range(5):
            for j in range(5):
                fh.write(f"{i},{j},{int(flow.matrix[i, j])}\n")


def thread_stats_rows(threads: Sequence[RetweetThread]) -> list[dict]:
    """Per-thread stats for tabular export; undefined stats become None."""
    rows = []
    for thread in threads:
        lifespan, arr_mad = thread_stats(thread)
        rows.append({
            "tweet_id": thread.tweet_id,
            "events": len(thread.events),
            "declared_count": thread.declared_count,
            "lifespan_seconds": lifespan,
            "inter_arrival_mad_seconds": arr_mad,
        })
    return rows
