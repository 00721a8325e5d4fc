"""Quiz sessions: sampling, answer collection, scoring, persistence.

Every session is 20 items.  Labels are sampled without replacement and
never repeat across a user's sessions within one protocol.  Attempts go
to an append-only JSONL log (fsynced before the caller sees success) and
sessions to JSON snapshots written by atomic rename; on restart the log
is replayed over the snapshots, so an attempt that was acknowledged can
never be lost and every score is recomputable from the log alone.

Client-facing serializations are built exclusively by the *_client_view
helpers, which never include correct answers or the dataset_tag (whether
a quiz runs on real or synthetic footage is hidden from the learner).
"""

from __future__ import annotations

import json
import os
import random
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .lexicon import (
    GradingConfig,
    InsufficientPool,
    VocabEntry,
    generate_distractors,
    grade_free_text,
)
from .synth import DatasetManifest

ITEMS_PER_SESSION = 20
OPTIONS_PER_ITEM = 5
VIDEO_REF_LEN = 16  # hex chars of the artifact checksum; carries no label info

__all__ = [
    "ITEMS_PER_SESSION",
    "OPTIONS_PER_ITEM",
    "QuizItem",
    "AttemptRecord",
    "QuizSession",
    "ScoreSummary",
    "SessionStore",
    "InsufficientFreshLabels",
    "ManifestIncomplete",
    "OutOfOrderSubmission",
    "DuplicateSubmission",
    "SessionComplete",
    "SessionIncomplete",
    "UnknownSession",
    "StoreCorruption",
    "scores_from_log",
]


class InsufficientFreshLabels(ValueError):
    pass


class ManifestIncomplete(ValueError):
    pass


class OutOfOrderSubmission(ValueError):
    pass


class DuplicateSubmission(ValueError):
    pass


class SessionComplete(ValueError):
    pass


class SessionIncomplete(ValueError):
    pass


class UnknownSession(KeyError):
    pass


class StoreCorruption(RuntimeError):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class QuizItem:
    """One question.  correct_answer, label_id and video_path stay
    server-side; clients only ever see client_view()."""

    item_id: str
    protocol: str
    label_id: str
    video_ref: str
    video_path: str
    correct_answer: str
    options: tuple[str, ...] = ()
    masked_text: str = ""
    context_tag: str = ""

    def client_view(self) -> dict:
        view: dict = {
            "item_id": self.item_id,
            "protocol": self.protocol,
            "video_url": f"/videos/{self.video_ref}",
        }
        if self.protocol in ("WL", "SL"):
            view["options"] = list(self.options)
        if self.protocol == "SL":
            view["context_tag"] = self.context_tag
        if self.protocol == "MWIS":
            view["masked_text"] = self.masked_text
        return view

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "protocol": self.protocol,
            "label_id": self.label_id,
            "video_ref": self.video_ref,
            "video_path": self.video_path,
            "correct_answer": self.correct_answer,
            "options": list(self.options),
            "masked_text": self.masked_text,
            "context_tag": self.context_tag,
        }

    @classmethod
    def from_dict(cls, d: dict) -> QuizItem:
        return cls(
            item_id=d["item_id"],
            protocol=d["protocol"],
            label_id=d["label_id"],
            video_ref=d["video_ref"],
            video_path=d["video_path"],
            correct_answer=d["correct_answer"],
            options=tuple(d.get("options", ())),
            masked_text=d.get("masked_text", ""),
            context_tag=d.get("context_tag", ""),
        )


@dataclass(frozen=True)
class AttemptRecord:
    item_id: str
    submitted: str
    correct: bool
    points: int
    answered_at: str

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "submitted": self.submitted,
            "correct": self.correct,
            "points": self.points,
            "answered_at": self.answered_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AttemptRecord:
        return cls(
            item_id=d["item_id"],
            submitted=d["submitted"],
            correct=bool(d["correct"]),
            points=int(d["points"]),
            answered_at=d["answered_at"],
        )


@dataclass
class QuizSession:
    session_id: str
    user_id: str
    protocol: str
    dataset_tag: str
    items: tuple[QuizItem, ...]
    attempts: list[AttemptRecord] = field(default_factory=list)
    created_at: str = field(default_factory=_now)
    updated_at: str = field(default_factory=_now)

    @property
    def cursor(self) -> int:
        return len(self.attempts)

    @property
    def state(self) -> str:
        return "complete" if self.cursor >= len(self.items) else "active"

    def client_view(self) -> dict:
        """Session summary for clients: no dataset_tag, no answers."""
        return {
            "session_id": self.session_id,
            "user_id": self.user_id,
            "protocol": self.protocol,
            "cursor": self.cursor,
            "total": len(self.items),
            "state": self.state,
        }

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "user_id": self.user_id,
            "protocol": self.protocol,
            "dataset_tag": self.dataset_tag,
            "items": [i.to_dict() for i in self.items],
            "attempts": [a.to_dict() for a in self.attempts],
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> QuizSession:
        return cls(
            session_id=d["session_id"],
            user_id=d["user_id"],
            protocol=d["protocol"],
            dataset_tag=d["dataset_tag"],
            items=tuple(QuizItem.from_dict(i) for i in d["items"]),
            attempts=[AttemptRecord.from_dict(a) for a in d["attempts"]],
            created_at=d["created_at"],
            updated_at=d["updated_at"],
        )


@dataclass(frozen=True)
class ScoreSummary:
    session_id: str
    score: int
    total: int = ITEMS_PER_SESSION

    def to_dict(self) -> dict:
        return {"session_id": self.session_id, "score": self.score, "total": self.total}


def scores_from_log(log_path) -> dict[str, int]:
    """Recompute every session's score from the attempt log alone."""
    scores: dict[str, int] = {}
    path = Path(log_path)
    if not path.exists():
        return scores
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            scores[rec["session_id"]] = scores.get(rec["session_id"], 0) + int(rec["points"])
    return scores


class SessionStore:
    """Durable session registry rooted at a directory.

    Layout: <root>/sessions/<id>.json snapshots, <root>/attempts.log.
    All mutating operations are serialized per session; creation and
    index updates take the store lock.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.sessions_dir = self.root / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.root / "attempts.log"
        self._lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}
        self._sessions: dict[str, QuizSession] = {}
        self._load()

    # ------------------------------------------------------------- loading

    def _load(self) -> None:
        for path in sorted(self.sessions_dir.glob("*.json")):
            try:
                with open(path, encoding="utf-8") as fh:
                    session = QuizSession.from_dict(json.load(fh))
            except (json.JSONDecodeError, KeyError) as exc:
                raise StoreCorruption(f"unreadable session snapshot {path}: {exc}") from exc
            self._sessions[session.session_id] = session
        self._replay_log()

    def _replay_log(self) -> None:
        """Re-apply attempts that were logged but not yet snapshotted."""
        if not self.log_path.exists():
            return
        with open(self.log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                session = self._sessions.get(rec["session_id"])
                if session is None:
                    continue
                answered = {a.item_id for a in session.attempts}
                if rec["item_id"] in answered:
                    continue
                if (session.cursor < len(session.items)
                        and session.items[session.cursor].item_id == rec["item_id"]):
                    session.attempts.append(AttemptRecord(
                        item_id=rec["item_id"],
                        submitted=rec["submitted"],
                        correct=bool(rec["correct"]),
                        points=int(rec["points"]),
                        answered_at=rec["answered_at"],
                    ))
        for session in self._sessions.values():
            self._write_snapshot(session)

    # ------------------------------------------------------------ plumbing

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._lock:
            if session_id not in self._session_locks:
                self._session_locks[session_id] = threading.Lock()
            return self._session_locks[session_id]

    def _write_snapshot(self, session: QuizSession) -> None:
        path = self.sessions_dir / f"{session.session_id}.json"
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(session.to_dict(), fh)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    def _append_attempt(self, session_id: str, record: AttemptRecord) -> None:
        line = json.dumps({"session_id": session_id, **record.to_dict()})
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def used_labels(self, user_id: str, protocol: str) -> set[str]:
        out: set[str] = set()
        for s in self._sessions.values():
            if s.user_id == user_id and s.protocol == protocol:
                out.update(i.label_id for i in s.items)
        return out

    def resolve_video(self, video_ref: str) -> Path:
        for s in self._sessions.values():
            for item in s.items:
                if item.video_ref == video_ref:
                    return Path(item.video_path)
        raise FileNotFoundError(f"unknown video ref {video_ref!r}")

    # ----------------------------------------------------------- operations

    def create_session(self, user_id: str, protocol: str, dataset_tag: str,
                       manifest: DatasetManifest, vocab: list[VocabEntry],
                       pron_dict: dict, viseme_map: dict, rng_seed: int) -> QuizSession:
        if manifest.protocol != protocol:
            raise ValueError(
                f"manifest is for {manifest.protocol}, session wants {protocol}")
        by_label: dict[str, list] = {}
        for e in manifest.entries:
            if e.status == "done":
                by_label.setdefault(e.label_id, []).append(e)
        if len(by_label) < ITEMS_PER_SESSION:
            raise ManifestIncomplete(
                f"manifest has {len(by_label)} labels with generated videos, "
                f"needs {ITEMS_PER_SESSION}")

        with self._lock:
            fresh = sorted(set(by_label) - self.used_labels(user_id, protocol))
            if len(fresh) < ITEMS_PER_SESSION:
                raise InsufficientFreshLabels(
                    f"user {user_id!r} has {len(fresh)} unseen labels in "
                    f"{protocol}, needs {ITEMS_PER_SESSION}")
            rng = random.Random(rng_seed)
            chosen = rng.sample(fresh, ITEMS_PER_SESSION)
            entries_by_id = {e.label_id: e for e in vocab}
            items = []
            for k, label_id in enumerate(chosen):
                candidates = sorted(by_label[label_id], key=lambda e: e.variation_id)
                entry = rng.choice(candidates)
                vocab_entry = entries_by_id[label_id]
                items.append(self._build_item(
                    f"q{k + 1:02d}", vocab_entry, entry, vocab, pron_dict,
                    viseme_map, rng))
            session = QuizSession(
                session_id=uuid.uuid4().hex[:12],
                user_id=user_id,
                protocol=protocol,
                dataset_tag=dataset_tag,
                items=tuple(items),
            )
            self._sessions[session.session_id] = session
            self._write_snapshot(session)
            return session

    @staticmethod
    def _build_item(item_id: str, vocab_entry: VocabEntry, manifest_entry,
                    vocab: list[VocabEntry], pron_dict: dict, viseme_map: dict,
                    rng: random.Random) -> QuizItem:
        protocol = vocab_entry.protocol
        options: tuple[str, ...] = ()
        masked_text = ""
        context_tag = vocab_entry.context_tag or ""
        if protocol == "WL":
            answer = vocab_entry.text
            pool = [e.text for e in vocab if e.protocol == "WL" and e.label_id != vocab_entry.label_id]
            distractors = generate_distractors(
                answer, OPTIONS_PER_ITEM - 1, pool, rng.randrange(2 ** 32),
                pron_dict, viseme_map)
            opts = [answer, *distractors]
            rng.shuffle(opts)
            options = tuple(opts)
        elif protocol == "SL":
            answer = vocab_entry.text
            pool = [e.text for e in vocab
                    if e.protocol == "SL" and e.label_id != vocab_entry.label_id
                    and e.context_tag == vocab_entry.context_tag]
            if len(pool) < OPTIONS_PER_ITEM - 1:
                raise InsufficientPool(
                    f"context {vocab_entry.context_tag!r} has {len(pool)} other "
                    f"sentences, needs {OPTIONS_PER_ITEM - 1}")
            distractors = generate_distractors(
                answer, OPTIONS_PER_ITEM - 1, pool, rng.randrange(2 ** 32),
                pron_dict, viseme_map)
            opts = [answer, *distractors]
            rng.shuffle(opts)
            options = tuple(opts)
        else:  # MWIS
            answer = vocab_entry.masked_word
            masked_text = vocab_entry.masked_text
        return QuizItem(
            item_id=item_id,
            protocol=protocol,
            label_id=vocab_entry.label_id,
            video_ref=manifest_entry.checksum[:VIDEO_REF_LEN],
            video_path=manifest_entry.generated_video_path,
            correct_answer=answer,
            options=options,
            masked_text=masked_text,
            context_tag=context_tag,
        )

    def submit_answer(self, session_id: str, item_id: str, answer: str,
                      grading: GradingConfig = GradingConfig()) -> AttemptRecord:
        with self._session_lock(session_id):
            session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSession(session_id)
            if session.state == "complete":
                raise SessionComplete(f"session {session_id} already has all answers")
            current = session.items[session.cursor]
            if item_id != current.item_id:
                answered = {a.item_id for a in session.attempts}
                if item_id in answered:
                    raise DuplicateSubmission(f"item {item_id} was already answered")
                raise OutOfOrderSubmission(
                    f"expected answer for {current.item_id}, got {item_id}")
            if current.protocol == "MWIS":
                correct = grade_free_text(answer, current.correct_answer, grading)
            else:
                correct = answer.strip() == current.correct_answer
            record = AttemptRecord(
                item_id=item_id,
                submitted=answer,
                correct=correct,
                points=1 if correct else 0,
                answered_at=_now(),
            )
            # log first (the durable truth), then snapshot
            self._append_attempt(session_id, record)
            session.attempts.append(record)
            session.updated_at = record.answered_at
            self._write_snapshot(session)
            return record

    def resume_session(self, session_id: str) -> QuizSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    def score_session(self, session_id: str) -> ScoreSummary:
        session = self.resume_session(session_id)
        if session.state != "complete":
            raise SessionIncomplete(
                f"session {session_id} has {session.cursor}/{len(session.items)} answers")
        return ScoreSummary(
            session_id=session_id,
            score=sum(a.points for a in session.attempts),
            total=len(session.items),
        )

    def cohort_scores(self, protocol: str, dataset_tag: str) -> list[int]:
        """Scores of all completed sessions in one (protocol, dataset) cell."""
        out = []
        for s in self._sessions.values():
            if (s.protocol == protocol and s.dataset_tag == dataset_tag
                    and s.state == "complete"):
                out.append(sum(a.points for a in s.attempts))
        return out

    def all_sessions(self) -> list[QuizSession]:
        return list(self._sessions.values())
