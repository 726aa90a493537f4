import json

import pytest

from retweetguard.analysis import RetweetThread
from retweetguard.corpus import (
    GENUINE,
    LabelMap,
    NORMAL,
    ORIGINAL_TWEET,
    RETWEET_ACTION,
    format_timestamp,
    record_to_dict,
    records_from_iterable,
    save_corpus,
    save_labels,
)
from retweetguard.models import ModelSpec, model_to_payload
from retweetguard.service import (
    ACCEPTED,
    IGNORED,
    REJECTED,
    FeedbackEvent,
    FeedbackPolicy,
    ScoringService,
    ServiceConfig,
    ThreadStoreFetcher,
    create_app,
    load_service_config,
    service_from_config,
)

from conftest import make_post, make_record, ts

DAY = 86400
SNAPSHOT_DAY = 2000

# Every record shares one timeline and profile except created_at, so the
# standardized feature space is effectively the single account-age axis.
# With k=10 neighborhoods the vote fractions below are exact:
#   age 100 sits in a 10-user cluster voting 9:1 customer -> confidence 0.9
#   age 300 sits in a 10-user cluster voting 6:4 customer -> confidence 0.6
IGNORED_USER = "age0100"
ACCEPTED_USER = "age0300"
FAR_USER = "age1500"

SPEC = ModelSpec(kind="knn", class_mode="binary", random_seed=0,
                 hyperparameters={"n_neighbors": 10})


def shared_posts():
    base = (SNAPSHOT_DAY - 2) * DAY
    return [
        make_post(base, ORIGINAL_TWEET, received=2, post_id="a"),
        make_post(base + 3600, RETWEET_ACTION, post_id="b"),
        make_post(base + 7200, ORIGINAL_TWEET, received=1, post_id="c"),
    ]


def aged_record(age_days):
    return make_record(
        shared_posts(), user_id=f"age{age_days:04d}", bot_score=0.5,
        influence=50.0, created=(SNAPSHOT_DAY - age_days) * DAY, declared=10)


def build_fixture():
    plan = []
    # cluster around IGNORED_USER: 9 customers, 1 genuine
    plan.append((100, NORMAL))
    for age in (96, 97, 98, 99, 101, 102, 103, 104):
        plan.append((age, NORMAL))
    plan.append((105, GENUINE))
    # cluster around ACCEPTED_USER: 6 customers, 4 genuine
    plan.append((300, NORMAL))
    for age in (296, 297, 298, 299, 301):
        plan.append((age, NORMAL))
    for age in (302, 303, 304, 305):
        plan.append((age, GENUINE))
    # distant genuine users keep the clusters isolated
    for age in (1500, 1600, 1700, 1800, 1900):
        plan.append((age, GENUINE))
    records = [aged_record(age) for age, _ in plan]
    corpus = records_from_iterable(records, snapshot_time=ts(SNAPSHOT_DAY * DAY))
    labels = LabelMap(by_user={f"age{age:04d}": label for age, label in plan})
    return corpus, labels


@pytest.fixture(scope="module")
def fixture():
    return build_fixture()


def make_service(fixture, **kwargs):
    corpus, labels = fixture
    kwargs.setdefault("spec", SPEC)
    return ScoringService(corpus, labels, **kwargs)


def payload_json(model):
    return json.dumps(model_to_payload(model), sort_keys=True)


FIXED_NOW = ts(SNAPSHOT_DAY * DAY + 3600)


def fixed_clock():
    return FIXED_NOW


class TestPolicy:
    def test_bad_threshold_rejected(self):
        with pytest.raises(ValueError, match="confidence_threshold"):
            FeedbackPolicy(confidence_threshold=0.0)
        with pytest.raises(ValueError, match="confidence_threshold"):
            FeedbackPolicy(confidence_threshold=1.5)

    def test_bad_trigger_rejected(self):
        with pytest.raises(ValueError, match="retrain_trigger"):
            FeedbackPolicy(retrain_trigger=0)

    def test_event_round_trip(self):
        event = FeedbackEvent(user_id="u1", predicted_label="customer",
                              corrected_label="genuine",
                              submitted_at="2020-01-01T00:00:00Z",
                              client_id="cli")
        assert FeedbackEvent.from_dict(event.to_dict()) == event


class TestScoring:
    def test_engineered_confidences(self, fixture):
        svc = make_service(fixture)
        results = svc.score(user_ids=[IGNORED_USER, ACCEPTED_USER])
        assert results[0]["label"] == "customer"
        assert results[0]["confidence"] == 0.9
        assert results[1]["label"] == "customer"
        assert results[1]["confidence"] == 0.6

    def test_unknown_users_get_error_entries(self, fixture):
        svc = make_service(fixture)
        results = svc.score(user_ids=["ghost", IGNORED_USER])
        assert results[0] == {"user_id": "ghost", "error": "unknown user"}
        assert results[1]["user_id"] == IGNORED_USER
        assert "label" in results[1]

    def test_inline_records_are_scored_without_corpus(self, fixture):
        svc = make_service(fixture)
        fresh = aged_record(101)  # same cluster, new identity
        obj = record_to_dict(fresh)
        obj["user_id"] = "fresh1"
        results = svc.score(inline_records=[obj])
        assert results[0]["user_id"] == "fresh1"
        assert results[0]["label"] == "customer"

    def test_tweet_ref_resolves_thread_retweeters(self, fixture):
        thread = RetweetThread(
            tweet_id="tw1",
            events=((IGNORED_USER, ts(0)), (ACCEPTED_USER, ts(10))))
        svc = make_service(fixture, tweet_fetcher=ThreadStoreFetcher([thread]))
        results = svc.score(tweet_ref="tw1")
        assert [r["user_id"] for r in results] == [IGNORED_USER, ACCEPTED_USER]
        with pytest.raises(KeyError):
            svc.score(tweet_ref="missing")

    def test_four_class_mode_needs_four_class_model(self, fixture):
        svc = make_service(fixture)
        with pytest.raises(ValueError, match="four-class"):
            svc.score(user_ids=[IGNORED_USER], class_mode="four_class")
        with pytest.raises(ValueError, match="class mode"):
            svc.score(user_ids=[IGNORED_USER], class_mode="nonsense")


class TestFeedbackGate:
    def test_statuses(self, fixture):
        svc = make_service(fixture)
        assert svc.submit_feedback(IGNORED_USER, "customer") == IGNORED
        assert svc.buffer_size == 0
        assert svc.submit_feedback(ACCEPTED_USER, "customer") == ACCEPTED
        assert svc.buffer_size == 1
        assert svc.submit_feedback("ghost", "customer") == REJECTED
        assert svc.buffer_size == 1

    def test_gate_is_strictly_greater_than(self, fixture):
        svc = make_service(
            fixture, policy=FeedbackPolicy(confidence_threshold=0.6,
                                           retrain_trigger=100))
        # confidence 0.6 equals the threshold, so the event is kept
        assert svc.submit_feedback(ACCEPTED_USER, "customer") == ACCEPTED

    def test_binary_labels_validated(self, fixture):
        svc = make_service(fixture)
        with pytest.raises(ValueError, match="binary feedback"):
            svc.submit_feedback(ACCEPTED_USER, "bot")
        with pytest.raises(ValueError, match="corrected label"):
            svc.submit_feedback(ACCEPTED_USER, "customer",
                                corrected_label="promotional")

    def test_retrain_fires_exactly_at_trigger(self, fixture):
        svc = make_service(fixture)  # default trigger of 25
        for i in range(24):
            assert svc.submit_feedback(ACCEPTED_USER, "customer") == ACCEPTED
            assert svc.retrain_if_due() is None
            assert svc.version == 1
        assert svc.submit_feedback(ACCEPTED_USER, "customer") == ACCEPTED
        assert svc.buffer_size == 25
        assert svc.retrain_if_due() is not None
        assert svc.version == 2
        assert svc.buffer_size == 0

    def test_latest_correction_wins(self, fixture):
        for final_label in ("customer", "genuine"):
            first_label = "genuine" if final_label == "customer" else "customer"
            svc = make_service(
                fixture,
                spec=ModelSpec(kind="knn", class_mode="binary", random_seed=0,
                               hyperparameters={"n_neighbors": 1}),
                policy=FeedbackPolicy(retrain_trigger=2))
            # claimed customer on a deep-genuine user scores 0.0, so both pass
            assert svc.submit_feedback(FAR_USER, "customer",
                                       corrected_label=first_label) == ACCEPTED
            assert svc.submit_feedback(FAR_USER, "customer",
                                       corrected_label=final_label) == ACCEPTED
            assert svc.retrain_if_due() is not None
            got = svc.score(user_ids=[FAR_USER])[0]
            assert got["label"] == final_label

    def test_failed_retrain_keeps_model_and_buffer(self, tmp_path):
        records = [aged_record(100), aged_record(200), aged_record(300)]
        corpus = records_from_iterable(records,
                                       snapshot_time=ts(SNAPSHOT_DAY * DAY))
        labels = LabelMap(by_user={"age0100": NORMAL, "age0200": GENUINE,
                                   "age0300": NORMAL})
        svc = ScoringService(
            corpus, labels,
            spec=ModelSpec(kind="knn", class_mode="binary", random_seed=0,
                           hyperparameters={"n_neighbors": 1}),
            policy=FeedbackPolicy(retrain_trigger=1),
            state_dir=tmp_path, clock=fixed_clock)
        before = payload_json(svc.model)
        # correcting the only genuine user leaves a single training class
        assert svc.submit_feedback("age0200", "customer",
                                   corrected_label="customer") == ACCEPTED
        assert svc.retrain_if_due() is None
        assert svc.version == 1
        assert svc.buffer_size == 1
        assert payload_json(svc.model) == before
        actions = [json.loads(line)["action"]
                   for line in (tmp_path / "audit.jsonl").read_text().splitlines()]
        assert "retrain_failed" in actions


class TestFourClassFeedback:
    SPEC4 = ModelSpec(kind="knn", class_mode="four_class", random_seed=0,
                      hyperparameters={"n_neighbors": 10})

    def test_four_class_scores_and_binary_view(self, fixture):
        svc = make_service(fixture, spec=self.SPEC4)
        four = svc.score(user_ids=[IGNORED_USER], class_mode="four_class")[0]
        assert four["label"] == NORMAL
        assert four["confidence"] == 0.9
        binary = svc.score(user_ids=[IGNORED_USER])[0]
        assert binary["label"] == "customer"
        assert binary["confidence"] == 0.9

    def test_correction_required(self, fixture):
        svc = make_service(fixture, spec=self.SPEC4)
        with pytest.raises(ValueError, match="corrected label"):
            svc.submit_feedback(ACCEPTED_USER, "customer")
        assert svc.submit_feedback(
            ACCEPTED_USER, "customer",
            corrected_label="promotional") == ACCEPTED

    def test_high_confidence_still_ignored(self, fixture):
        svc = make_service(fixture, spec=self.SPEC4)
        assert svc.submit_feedback(IGNORED_USER, NORMAL,
                                   corrected_label=GENUINE) == IGNORED


class TestPersistence:
    def test_state_survives_restart(self, fixture, tmp_path):
        svc1 = make_service(fixture, state_dir=tmp_path, clock=fixed_clock)
        for _ in range(3):
            assert svc1.submit_feedback(ACCEPTED_USER, "customer") == ACCEPTED
        for name in ("model.json", "state.json", "feedback_buffer.jsonl",
                     "audit.jsonl"):
            assert (tmp_path / name).exists()

        svc2 = make_service(fixture, state_dir=tmp_path, clock=fixed_clock)
        assert svc2.version == 1
        assert svc2.buffer_size == 3
        assert payload_json(svc2.model) == payload_json(svc1.model)

    def test_retrain_bumps_version_and_clears_buffer_file(self, fixture,
                                                          tmp_path):
        policy = FeedbackPolicy(retrain_trigger=3)
        svc = make_service(fixture, state_dir=tmp_path, policy=policy,
                           clock=fixed_clock)
        for _ in range(3):
            svc.submit_feedback(ACCEPTED_USER, "customer")
        assert svc.retrain_if_due() is not None
        assert not (tmp_path / "feedback_buffer.jsonl").exists()

        svc2 = make_service(fixture, state_dir=tmp_path, policy=policy,
                            clock=fixed_clock)
        assert svc2.version == 2
        assert svc2.buffer_size == 0

    def test_replay_without_ignored_events_is_identical(self, fixture):
        policy = FeedbackPolicy(retrain_trigger=4)
        full = make_service(fixture, policy=policy, clock=fixed_clock)
        replay = make_service(fixture, policy=policy, clock=fixed_clock)

        session = [(IGNORED_USER, IGNORED), (ACCEPTED_USER, ACCEPTED),
                   (IGNORED_USER, IGNORED), (ACCEPTED_USER, ACCEPTED),
                   (ACCEPTED_USER, ACCEPTED), (IGNORED_USER, IGNORED),
                   (ACCEPTED_USER, ACCEPTED)]
        for user, expected in session:
            assert full.submit_feedback(user, "customer") == expected
            full.retrain_if_due()
        for user, expected in session:
            if expected == IGNORED:
                continue
            assert replay.submit_feedback(user, "customer") == expected
            replay.retrain_if_due()

        assert full.version == replay.version == 2
        assert payload_json(full.model) == payload_json(replay.model)

    def test_model_info_fields(self, fixture):
        svc = make_service(fixture, clock=fixed_clock)
        info = svc.model_info()
        assert info["version"] == 1
        assert info["spec"]["kind"] == "knn"
        assert info["threshold"] == 0.75
        assert info["trained_at"] == format_timestamp(FIXED_NOW)

    def test_needs_spec_model_or_state(self, fixture):
        corpus, labels = fixture
        with pytest.raises(ValueError, match="spec"):
            ScoringService(corpus, labels)
        with pytest.raises(ValueError, match="labels"):
            ScoringService(corpus, LabelMap(), spec=SPEC)


class TestHttp:
    @pytest.fixture()
    def client(self, fixture):
        from fastapi.testclient import TestClient
        svc = make_service(fixture, policy=FeedbackPolicy(retrain_trigger=2),
                           clock=fixed_clock)
        return TestClient(create_app(svc))

    def test_score_endpoint(self, client):
        resp = client.post("/score", json={
            "retweeter_ids": [IGNORED_USER, "ghost"]})
        assert resp.status_code == 200
        body = resp.json()
        assert body["model_version"] == 1
        assert len(body["results"]) == 2
        assert body["results"][0]["label"] == "customer"
        assert body["results"][1]["error"] == "unknown user"

    def test_score_requires_some_input(self, client):
        assert client.post("/score", json={}).status_code == 400

    def test_score_unknown_thread_is_404(self, client):
        resp = client.post("/score", json={"tweet_ref": "nope"})
        assert resp.status_code == 404

    def test_score_bad_mode_is_400(self, client):
        resp = client.post("/score", json={
            "retweeter_ids": [IGNORED_USER], "class_mode": "four_class"})
        assert resp.status_code == 400

    def test_feedback_endpoint_gates_and_retrains(self, client):
        resp = client.post("/feedback", json={
            "user_id": IGNORED_USER, "predicted_label": "customer"})
        assert resp.json() == {"status": IGNORED, "buffer_size": 0,
                               "retrained": False, "model_version": 1}
        resp = client.post("/feedback", json={
            "user_id": ACCEPTED_USER, "predicted_label": "customer"})
        assert resp.json()["status"] == ACCEPTED
        assert resp.json()["buffer_size"] == 1
        resp = client.post("/feedback", json={
            "user_id": ACCEPTED_USER, "predicted_label": "customer"})
        assert resp.json()["retrained"] is True
        assert resp.json()["model_version"] == 2
        assert resp.json()["buffer_size"] == 0

    def test_feedback_unknown_user(self, client):
        resp = client.post("/feedback", json={
            "user_id": "ghost", "predicted_label": "customer"})
        assert resp.json()["status"] == REJECTED

    def test_feedback_bad_label_is_400(self, client):
        resp = client.post("/feedback", json={
            "user_id": ACCEPTED_USER, "predicted_label": "bot"})
        assert resp.status_code == 400

    def test_model_and_health(self, client):
        info = client.get("/model").json()
        assert set(info) == {"version", "spec", "trained_at", "threshold"}
        assert client.get("/health").json() == {"status": "ok"}

    def test_cors_headers_for_browser_panels(self, client, fixture):
        resp = client.get("/health", headers={"Origin": "http://panel.test"})
        assert resp.headers["access-control-allow-origin"] == "*"

        from fastapi.testclient import TestClient
        svc = make_service(fixture)
        closed = TestClient(create_app(svc, cors_origins=""))
        resp = closed.get("/health", headers={"Origin": "http://panel.test"})
        assert "access-control-allow-origin" not in resp.headers


class TestConfig:
    def test_file_plus_env_overrides(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"port": 9000, "threshold": 0.5}))
        config = load_service_config(path, env={
            "RETWEETGUARD_PORT": "9100",
            "RETWEETGUARD_MODEL_KIND": "knn",
        })
        assert config.port == 9100  # env wins over the file
        assert config.threshold == 0.5
        assert config.model_kind == "knn"
        assert config.host == "127.0.0.1"

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"prot": 9000}))
        with pytest.raises(ValueError, match="unknown config keys"):
            load_service_config(path, env={})

    def test_non_object_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValueError, match="JSON object"):
            load_service_config(path, env={})

    def test_defaults_without_file(self):
        config = load_service_config(env={})
        assert config == ServiceConfig()

    def test_service_from_config(self, fixture, tmp_path):
        corpus, labels = fixture
        corpus_path = tmp_path / "corpus.jsonl"
        labels_path = tmp_path / "labels.jsonl"
        save_corpus(corpus, corpus_path)
        save_labels(labels, labels_path)
        config = ServiceConfig(corpus_path=str(corpus_path),
                               labels_path=str(labels_path),
                               model_kind="knn", seed=0,
                               state_dir=str(tmp_path / "state"))
        svc = service_from_config(config, clock=fixed_clock)
        results = svc.score(user_ids=[IGNORED_USER])
        assert results[0]["label"] == "customer"
        assert (tmp_path / "state" / "model.json").exists()

    def test_config_without_corpus_is_an_error(self):
        with pytest.raises(ValueError, match="corpus_path"):
            service_from_config(ServiceConfig())
