from __future__ import annotations

import os
import socket

import pytest

# set before any streetpoll import so module-level checks see it too
os.environ["STREETPOLL_OFFLINE"] = "1"

NETWORK_ATTEMPTS: list[tuple] = []


def _refuse(self, address, *args, **kwargs):
    NETWORK_ATTEMPTS.append(address)
    raise RuntimeError(f"network access attempted during tests: {address!r}")


def pytest_configure(config):
    # AF_UNIX sockets are harmless; everything else is refused
    original = socket.socket.connect

    def guarded(self, address, *args, **kwargs):
        if self.family == getattr(socket, "AF_UNIX", None):
            return original(self, address, *args, **kwargs)
        return _refuse(self, address)

    socket.socket.connect = guarded
    socket.socket.connect_ex = guarded
    socket.create_connection = lambda address, *a, **k: _refuse(None, address)


@pytest.fixture(autouse=True)
def _offline(monkeypatch):
    monkeypatch.setenv("STREETPOLL_OFFLINE", "1")


@pytest.fixture(scope="session")
def demo_corpus():
    from streetpoll.cli import demo_root
    from streetpoll.corpus import load_corpus

    return load_corpus(demo_root())


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (ok, detail)
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    if NETWORK_ATTEMPTS:
        terminalreporter.write_line(f"network attempts during session: {NETWORK_ATTEMPTS}")


def pytest_sessionfinish(session, exitstatus):
    # any refused connection anywhere in the run fails the session
    if NETWORK_ATTEMPTS and exitstatus == 0:
        session.exitstatus = 1
