from datetime import datetime, timezone

import pytest

from retweetguard.corpus import (
    ORIGINAL_TWEET,
    Post,
    Profile,
    RETWEET_ACTION,
    UserRecord,
)


def ts(seconds):
    return datetime.fromtimestamp(seconds, tz=timezone.utc)


def make_post(t, kind=ORIGINAL_TWEET, received=0, mentions=0, urls=0,
              hashtags=0, post_id=None):
    return Post(
        post_id=post_id or f"p{int(t)}",
        timestamp=ts(t),
        kind=kind,
        mention_count=mentions,
        url_count=urls,
        hashtag_count=hashtags,
        received_retweet_count=received if kind == ORIGINAL_TWEET else 0,
    )


def make_profile(user_id="u1", created=0, screen_name="abc12",
                 description="", has_url=False, followees=10, followers=10,
                 declared=None, verified=False):
    return Profile(
        user_id=user_id,
        screen_name=screen_name,
        created_at=ts(created),
        description=description,
        has_url=has_url,
        followee_count=followees,
        follower_count=followers,
        declared_status_count=declared,
        verified=verified,
    )


def make_record(posts=(), user_id="u1", bot_score=None, influence=None,
                **profile_kwargs):
    posts = tuple(sorted(posts, key=lambda p: p.timestamp))
    created = min([p.timestamp.timestamp() for p in posts], default=86400) - 86400
    profile_kwargs.setdefault("created", created)
    return UserRecord(
        profile=make_profile(user_id=user_id, **profile_kwargs),
        timeline=posts,
        bot_score=bot_score,
        influence_score=influence,
    )


@pytest.fixture
def tiny_record():
    posts = [
        make_post(0, ORIGINAL_TWEET, received=5),
        make_post(3600, RETWEET_ACTION),
        make_post(7200, ORIGINAL_TWEET, received=2, mentions=3),
    ]
    return make_record(posts, declared=42, bot_score=0.3, influence=60.0)
