"""File-based workspace: recordings, jobs, and artifacts as plain files.

Layout under the root directory:

    index.json                  recording index + id counter
    recordings/<id>.json        uploaded recordings (full sample streams)
    jobs/<job id>.json          analysis jobs keyed by their cache identity
    artifacts/<name>            rendered bytes / large results

Everything is written atomically (temp file + rename), so concurrent
readers always see complete documents.  Writes are serialized per
recording via in-process locks; the index has its own lock.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from pathlib import Path

from gazekit.errors import NotFound
from gazekit.ingest import Recording, recording_from_dict, recording_to_dict


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, doc: dict) -> None:
    _atomic_write(path, json.dumps(doc, indent=1).encode("utf-8"))


class Workspace:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("recordings", "jobs", "artifacts"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._index_lock = threading.Lock()
        self._recording_locks: dict[str, threading.Lock] = {}

    # --- index --------------------------------------------------------------

    @property
    def _index_path(self) -> Path:
        return self.root / "index.json"

    def _load_index(self) -> dict:
        if not self._index_path.exists():
            return {"next_seq": 1, "recordings": {}}
        return json.loads(self._index_path.read_text("utf-8"))

    def recording_ids(self) -> list[str]:
        with self._index_lock:
            return sorted(self._load_index()["recordings"])

    def lock_for(self, rec_id: str) -> threading.Lock:
        with self._index_lock:
            return self._recording_locks.setdefault(rec_id, threading.Lock())

    # --- recordings -----------------------------------------------------------

    def add_recording(self, rec: Recording, extra: dict | None = None) -> str:
        """Persist a recording under a fresh id (duplicates are not deduped)."""
        with self._index_lock:
            index = self._load_index()
            rec_id = f"r{index['next_seq']:06d}"
            index["next_seq"] += 1
            index["recordings"][rec_id] = {"samples": len(rec.samples)}
            rec.id = rec_id
            doc = recording_to_dict(rec)
            if extra:
                doc.update(extra)
            _write_json(self.root / "recordings" / f"{rec_id}.json", doc)
            _write_json(self._index_path, index)
        return rec_id

    def recording_doc(self, rec_id: str) -> dict:
        path = self.root / "recordings" / f"{rec_id}.json"
        if not path.exists():
            raise NotFound(f"unknown recording {rec_id!r}")
        return json.loads(path.read_text("utf-8"))

    def get_recording(self, rec_id: str) -> Recording:
        return recording_from_dict(self.recording_doc(rec_id))

    # --- jobs ----------------------------------------------------------------

    def load_job(self, job_id: str) -> dict | None:
        path = self.root / "jobs" / f"{job_id}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text("utf-8"))

    def require_job(self, job_id: str) -> dict:
        job = self.load_job(job_id)
        if job is None:
            raise NotFound(f"unknown job {job_id!r}")
        return job

    def save_job(self, job: dict) -> None:
        _write_json(self.root / "jobs" / f"{job['id']}.json", job)

    # --- artifacts -------------------------------------------------------------

    def artifact_path(self, name: str) -> Path:
        return self.root / "artifacts" / name

    def write_artifact(self, name: str, data: bytes) -> str:
        """Write once; existing artifacts are left untouched (cache identity)."""
        path = self.artifact_path(name)
        if not path.exists():
            _atomic_write(path, data)
        return f"artifacts/{name}"

    def read_artifact(self, name: str) -> bytes:
        path = self.artifact_path(name)
        if not path.exists():
            raise NotFound(f"unknown artifact {name!r}")
        return path.read_bytes()
