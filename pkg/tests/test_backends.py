from __future__ import annotations

import io
import json
import threading
import urllib.error

import pytest

from streetpoll.annotate import (
    BackendConfig,
    BackendTransportError,
    Cassette,
    ChatTurn,
    LiveBackend,
    LiveBackendDisabled,
    MissingFixture,
    ReplayBackend,
    TokenBucket,
    make_backend,
    request_digest,
)
from streetpoll.annotate.backends import extract_content, fetch_url

TURNS = [ChatTurn("user", "How many citizens?")]


class FakeClock:
    def __init__(self):
        self.now = 0.0
        self.sleeps: list[float] = []

    def __call__(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        self.sleeps.append(seconds)
        self.now += seconds


def test_digest_is_stable_and_model_sensitive():
    assert request_digest("m", TURNS) == request_digest("m", list(TURNS))
    assert request_digest("m", TURNS) != request_digest("n", TURNS)
    assert request_digest("m", TURNS) != request_digest("m", TURNS + [ChatTurn("assistant", "x")])


def test_cassette_first_record_wins(tmp_path):
    path = tmp_path / "c.jsonl"
    c = Cassette(path)
    c.append("d1", "first")
    c.append("d1", "second")
    path.write_text(path.read_text() + json.dumps({"request": "d1", "response": "third"}) + "\n")
    reloaded = Cassette(path)
    assert reloaded.get("d1") == "first" and len(reloaded) == 1


def test_bad_cassette_line(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text("not json\n")
    with pytest.raises(ValueError, match=":1: bad cassette record"):
        Cassette(path)


def test_replay_hit_and_miss(tmp_path):
    c = Cassette(tmp_path / "c.jsonl")
    c.append(request_digest("gpt", TURNS), "Answer 1: 0")
    backend = ReplayBackend(c, "gpt")
    assert backend.complete(TURNS) == "Answer 1: 0"
    with pytest.raises(MissingFixture) as exc:
        backend.complete(TURNS + [ChatTurn("user", "more")])
    assert exc.value.code == "MISSING_FIXTURE"


def test_live_refused_offline():
    cfg = BackendConfig(kind="live", endpoint="http://127.0.0.1:9/v1/chat")
    with pytest.raises(LiveBackendDisabled):
        LiveBackend(cfg)
    with pytest.raises(LiveBackendDisabled):
        make_backend(cfg)
    with pytest.raises(LiveBackendDisabled):
        fetch_url("http://127.0.0.1:9/captions.txt")


class FakeResponse(io.BytesIO):
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _online_live(monkeypatch, tmp_path, opener):
    monkeypatch.delenv("STREETPOLL_OFFLINE")
    monkeypatch.setenv("TEST_KEY", "secret")
    cfg = BackendConfig(kind="live", endpoint="http://example.invalid/v1", model_name="gpt", api_key_env="TEST_KEY", retries=1)
    monkeypatch.setattr("streetpoll.annotate.backends.time.sleep", lambda s: None)
    return LiveBackend(cfg, cassette=Cassette(tmp_path / "rec.jsonl"), opener=opener)


def test_live_records_to_cassette_with_injected_transport(monkeypatch, tmp_path):
    seen = []

    def opener(req, timeout):
        seen.append((req.full_url, req.get_header("Authorization"), json.loads(req.data)))
        return FakeResponse(json.dumps({"choices": [{"message": {"content": "Answer 1: 0"}}]}).encode())

    backend = _online_live(monkeypatch, tmp_path, opener)
    assert backend.complete(TURNS) == "Answer 1: 0"
    assert seen[0][1] == "Bearer secret"
    assert seen[0][2]["messages"] == [{"role": "user", "content": "How many citizens?"}]
    assert Cassette(tmp_path / "rec.jsonl").get(request_digest("gpt", TURNS)) == "Answer 1: 0"


def test_live_retries_then_fails(monkeypatch, tmp_path):
    calls = []

    def opener(req, timeout):
        calls.append(1)
        raise urllib.error.URLError("down")

    backend = _online_live(monkeypatch, tmp_path, opener)
    with pytest.raises(BackendTransportError):
        backend.complete(TURNS)
    assert len(calls) == 2


def test_live_needs_credential_env(monkeypatch):
    monkeypatch.delenv("STREETPOLL_OFFLINE")
    monkeypatch.delenv("NO_SUCH_KEY", raising=False)
    cfg = BackendConfig(kind="live", endpoint="http://example.invalid", api_key_env="NO_SUCH_KEY")
    with pytest.raises(ValueError, match="NO_SUCH_KEY"):
        LiveBackend(cfg)


def test_extract_content_shape():
    assert extract_content({"choices": [{"message": {"content": "hi"}}]}) == "hi"
    with pytest.raises(BackendTransportError):
        extract_content({"error": "quota"})


@pytest.mark.parametrize(
    "kwargs",
    [dict(kind="bogus"), dict(kind="live"), dict(kind="replay"), dict(concurrency_cap=0), dict(max_continuations=-1)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        BackendConfig(**kwargs)


def test_default_live_rate():
    assert BackendConfig(kind="live", endpoint="x").effective_rate_limit == 3.0
    assert BackendConfig().effective_rate_limit is None
    assert BackendConfig(rate_limit=0).effective_rate_limit is None


def test_token_bucket_spacing_on_fake_clock():
    clock = FakeClock()
    bucket = TokenBucket(6, clock=clock, sleep=clock.sleep)  # one token per 10 s
    waits = [bucket.acquire() for _ in range(4)]
    assert waits == [0.0, pytest.approx(10.0), pytest.approx(10.0), pytest.approx(10.0)]
    assert clock.now == pytest.approx(30.0)
    assert not bucket.try_acquire()
    clock.now += 10
    assert bucket.try_acquire()


def test_token_bucket_burst_capacity():
    clock = FakeClock()
    bucket = TokenBucket(60, capacity=3, clock=clock, sleep=clock.sleep)
    assert [bucket.try_acquire() for _ in range(4)] == [True, True, True, False]


def test_token_bucket_threads_never_exceed_rate():
    clock = FakeClock()
    lock = threading.Lock()

    def sleep(s):
        with lock:
            clock.now += s

    bucket = TokenBucket(60, clock=clock, sleep=sleep)
    grants = []

    def worker():
        for _ in range(5):
            bucket.acquire()
            with lock:
                grants.append(clock.now)

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(grants) == 20
    # one token per second: 20 grants need at least 19 seconds of fake time
    assert clock.now >= 19 - 1e-9
