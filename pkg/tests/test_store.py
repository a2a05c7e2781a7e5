import hashlib
import threading

import pytest

from rboard.errors import ImmutableRecord, NotFound
from rboard.store import Store


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path)


class TestRecords:
    def test_round_trip(self, store):
        store.put("submission", "sub-1", {"author": "a", "status": "pending"})
        assert store.get("submission", "sub-1") == {"author": "a", "status": "pending"}

    def test_get_unknown(self, store):
        with pytest.raises(NotFound):
            store.get("run", "missing")

    def test_overwrite_visible(self, store):
        store.put("submission", "s", {"status": "pending"})
        store.put("submission", "s", {"status": "running"})
        assert store.get("submission", "s")["status"] == "running"

    def test_terminal_run_immutable(self, store):
        store.put("run", "run-1", {"status": "queued"})
        store.put("run", "run-1", {"status": "running"})
        store.put("run", "run-1", {"status": "succeeded"})
        for status in ("running", "succeeded", "queued"):
            with pytest.raises(ImmutableRecord):
                store.put("run", "run-1", {"status": status})
        assert store.get("run", "run-1")["status"] == "succeeded"

    def test_all_terminal_statuses_guard(self, store):
        for i, status in enumerate(("failed", "timeout", "output_invalid")):
            key = f"run-{i}"
            store.put("run", key, {"status": status})
            with pytest.raises(ImmutableRecord):
                store.put("run", key, {"status": "queued"})

    def test_list_sorted_and_filtered(self, store):
        store.put("run", "run-b", {"submission_id": "s1", "status": "queued"})
        store.put("run", "run-a", {"submission_id": "s1", "status": "queued"})
        store.put("run", "run-c", {"submission_id": "s2", "status": "queued"})
        all_runs = store.list("run")
        assert [r["submission_id"] for r in all_runs] == ["s1", "s1", "s2"]
        assert len(store.list("run", {"submission_id": "s1"})) == 2

    def test_bad_kind_or_key(self, store):
        with pytest.raises(ValueError):
            store.put("nope", "k", {})
        with pytest.raises(ValueError):
            store.put("run", "../escape", {})
        with pytest.raises(ValueError):
            store.get("run", "UPPER")

    def test_no_torn_reads_under_concurrency(self, store):
        stop = threading.Event()
        errors = []

        def writer():
            i = 0
            while not stop.is_set():
                store.put("result", "shared", {"value": i, "mirror": i})
                i += 1

        def reader():
            while not stop.is_set():
                try:
                    rec = store.get("result", "shared")
                    if rec["value"] != rec["mirror"]:
                        errors.append(rec)
                except NotFound:
                    pass

        store.put("result", "shared", {"value": -1, "mirror": -1})
        threads = [threading.Thread(target=writer), threading.Thread(target=reader)]
        for t in threads:
            t.start()
        threading.Event().wait(0.4)
        stop.set()
        for t in threads:
            t.join()
        assert errors == []


class TestArchives:
    def test_content_addressed_round_trip(self, store):
        data = b"PK\x03\x04 pretend zip"
        checksum = store.put_archive(data)
        assert checksum == hashlib.sha256(data).hexdigest()
        assert store.get_archive(checksum) == data
        # identical resubmission deduplicates onto the same key
        assert store.put_archive(data) == checksum

    def test_missing_archive(self, store):
        with pytest.raises(NotFound):
            store.get_archive("0" * 64)

    def test_corruption_detected(self, store, tmp_path):
        checksum = store.put_archive(b"original")
        (store.archives_dir / f"{checksum}.zip").write_bytes(b"tampered")
        with pytest.raises(NotFound):
            store.get_archive(checksum)
