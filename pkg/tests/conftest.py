import os

import pytest

from forge.api import Forge


@pytest.fixture
def store(tmp_path):
    return tmp_path / "store"


@pytest.fixture
def forge(store):
    return Forge(store)


@pytest.fixture
def frozen_clock(monkeypatch):
    """Pin the wall clock so every timestamp in the test is 1700000000."""
    monkeypatch.setenv("FORGE_FAKE_TIME", "1700000000")
    yield 1700000000
    monkeypatch.delenv("FORGE_FAKE_TIME", raising=False)


@pytest.fixture(autouse=True)
def _isolate_default_store(monkeypatch, tmp_path):
    # Nothing in the suite may touch ~/.forge by accident.
    monkeypatch.setenv("FORGE_STORE", str(tmp_path / "fallback-store"))


def drain(forge, timeout=10.0):
    """Poll the monitor until no job is active; returns elapsed seconds."""
    import time

    start = time.monotonic()
    while time.monotonic() - start < timeout:
        forge.monitor_poll()
        if not forge.active_jobs():
            return time.monotonic() - start
        time.sleep(0.05)
    raise AssertionError(f"jobs still active after {timeout}s: "
                         f"{[j.id for j in forge.active_jobs()]}")


if os.environ.get("FORGE_FAKE_TIME"):
    raise RuntimeError("FORGE_FAKE_TIME leaked into the test environment")
