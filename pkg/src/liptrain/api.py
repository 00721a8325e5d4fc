"""HTTP JSON API tying the platform together: manifest registration,
quiz delivery, attempt collection, video serving, statistics reports.

Every state-mutating request is durable (fsynced) before its 2xx
response.  Errors come back as {"code", "message"}.  Client-facing
payloads are built from the quiz module's client views, which carry no
correct answers and no real/synthetic marker.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from . import lexicon, quiz, synth
from .stats import (
    DegenerateSample,
    McmcConfig,
    ScoreSample,
    best_compare,
    boxplot_summary,
    sem,
    t_test,
    z_test,
)

__all__ = ["ApiConfig", "InsufficientData", "create_app"]


class InsufficientData(ValueError):
    pass


@dataclass
class ApiConfig:
    store_root: Path
    # dataset_tag -> manifest path(s); one tag covers one manifest per protocol
    manifests: dict[str, list[Path]] = field(default_factory=dict)
    vocab_path: Path | None = None
    dict_path: Path | None = None
    viseme_map_path: Path | None = None
    alpha: float = 0.1
    default_seed: int | None = None  # fixed seed for session sampling; None = random

    def __post_init__(self) -> None:
        self.store_root = Path(self.store_root)
        self.manifests = {
            tag: [Path(p) for p in ([paths] if isinstance(paths, (str, Path)) else paths)]
            for tag, paths in self.manifests.items()
        }


_ERROR_STATUS = {
    quiz.UnknownSession: 404,
    quiz.InsufficientFreshLabels: 409,
    quiz.ManifestIncomplete: 409,
    quiz.OutOfOrderSubmission: 409,
    quiz.DuplicateSubmission: 409,
    quiz.SessionComplete: 409,
    quiz.SessionIncomplete: 409,
    lexicon.InsufficientPool: 409,
    InsufficientData: 409,
    DegenerateSample: 409,
    FileNotFoundError: 404,
    KeyError: 404,
    ValueError: 400,
}


def _status_for(exc: Exception) -> int:
    for cls in type(exc).__mro__:
        if cls in _ERROR_STATUS:
            return _ERROR_STATUS[cls]
    return 500


def _error_payload(exc: Exception) -> dict:
    message = str(exc)
    if isinstance(exc, KeyError) and exc.args:
        message = str(exc.args[0])
    return {"code": type(exc).__name__, "message": message}


def create_app(config: ApiConfig) -> FastAPI:
    config.store_root.mkdir(parents=True, exist_ok=True)
    store = quiz.SessionStore(config.store_root)  # raises StoreCorruption on bad snapshots

    vocab = (lexicon.load_vocab(config.vocab_path) if config.vocab_path
             else lexicon.default_vocab())
    pron_dict = (lexicon.load_pron_dict(config.dict_path) if config.dict_path
                 else lexicon.default_pron_dict())
    viseme_map = (lexicon.load_viseme_map(config.viseme_map_path)
                  if config.viseme_map_path else lexicon.default_viseme_map())
    # dataset_tag -> protocol -> manifest
    manifests: dict[str, dict[str, synth.DatasetManifest]] = {}

    def register(tag: str, path) -> synth.DatasetManifest:
        manifest = synth.DatasetManifest.load(path)
        manifests.setdefault(tag, {})[manifest.protocol] = manifest
        return manifest

    for tag, paths in config.manifests.items():
        for path in paths:
            register(tag, path)

    app = FastAPI(title="liptrain", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.manifests = manifests

    async def on_error(request: Request, exc: Exception):
        return JSONResponse(status_code=_status_for(exc), content=_error_payload(exc))

    for exc_type in _ERROR_STATUS:
        app.add_exception_handler(exc_type, on_error)
    app.add_exception_handler(Exception, on_error)

    @app.exception_handler(RequestValidationError)
    async def on_validation(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "ValidationError", "message": str(exc.errors()[:1])},
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/manifests", status_code=201)
    def register_manifest(body: dict):
        tag = body.get("dataset_tag")
        path = body.get("path")
        if not tag or not path:
            raise ValueError("body needs dataset_tag and path")
        if not Path(path).exists():
            raise FileNotFoundError(f"manifest file {path} does not exist")
        manifest = register(tag, path)
        return {"dataset_tag": tag, "protocol": manifest.protocol,
                "counts": manifest.counts()}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        for key in ("user_id", "protocol", "dataset_tag"):
            if key not in body:
                raise ValueError(f"body needs {key}")
        tag = body["dataset_tag"]
        protocol = str(body["protocol"])
        if tag not in manifests:
            raise KeyError(f"no manifest registered for dataset_tag {tag!r}")
        if protocol not in manifests[tag]:
            raise KeyError(f"dataset_tag {tag!r} has no {protocol} manifest")
        seed = body.get("seed")
        if seed is None:
            seed = config.default_seed
        if seed is None:
            seed = int.from_bytes(os.urandom(4), "big")
        session = store.create_session(
            user_id=str(body["user_id"]),
            protocol=protocol,
            dataset_tag=tag,
            manifest=manifests[tag][protocol],
            vocab=vocab,
            pron_dict=pron_dict,
            viseme_map=viseme_map,
            rng_seed=int(seed),
        )
        return {"session": session.client_view(),
                "items": [i.client_view() for i in session.items]}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return store.resume_session(session_id).client_view()

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str):
        session = store.resume_session(session_id)
        if session.state == "complete":
            return {"complete": True,
                    "score": store.score_session(session_id).to_dict()}
        item = session.items[session.cursor]
        return {"complete": False,
                "progress": {"answered": session.cursor, "total": len(session.items)},
                "item": item.client_view()}

    @app.post("/sessions/{session_id}/answers", status_code=201)
    def submit_answer(session_id: str, body: dict):
        for key in ("item_id", "answer"):
            if key not in body:
                raise ValueError(f"body needs {key}")
        record = store.submit_answer(session_id, str(body["item_id"]), str(body["answer"]))
        session = store.resume_session(session_id)
        return {"attempt": record.to_dict(),
                "progress": {"answered": session.cursor, "total": len(session.items)}}

    @app.get("/sessions/{session_id}/score")
    def get_score(session_id: str):
        return store.score_session(session_id).to_dict()

    @app.get("/stats/compare")
    def stats_compare(protocol: str, a: str, b: str, test: str = "z",
                      alpha: float | None = None, seed: int = 1234):
        sample_a = store.cohort_scores(protocol, a)
        sample_b = store.cohort_scores(protocol, b)
        if len(sample_a) < 2 or len(sample_b) < 2:
            raise InsufficientData(
                f"cohorts need >= 2 completed sessions each, got "
                f"{len(sample_a)} and {len(sample_b)}")
        sa = ScoreSample(a, tuple(float(x) for x in sample_a))
        sb = ScoreSample(b, tuple(float(x) for x in sample_b))
        if test == "z":
            result = z_test(sa, sb, alpha if alpha is not None else config.alpha).to_dict()
        elif test == "t":
            result = t_test(sa, sb).to_dict()
        elif test == "best":
            result = best_compare(sa, sb, McmcConfig(seed=seed)).to_dict()
        else:
            raise ValueError(f"unknown test {test!r}; expected z, t or best")
        return {"protocol": protocol, "a": a, "b": b, "test": test,
                "n_a": sa.n, "n_b": sb.n, "result": result}

    @app.get("/stats/summary")
    def stats_summary(protocol: str, dataset_tag: str):
        values = store.cohort_scores(protocol, dataset_tag)
        if len(values) < 2:
            raise InsufficientData(
                f"cohort ({protocol}, {dataset_tag}) has {len(values)} completed sessions")
        sample = ScoreSample(dataset_tag, tuple(float(x) for x in values))
        return {"protocol": protocol, "dataset_tag": dataset_tag, "n": sample.n,
                "mean": sample.mean(), "sem": sem(sample),
                "boxplot": boxplot_summary(sample).to_dict()}

    @app.get("/videos/{video_ref}")
    def get_video(video_ref: str, request: Request):
        path = store.resolve_video(video_ref)
        if not path.exists():
            raise FileNotFoundError(f"video file for {video_ref} is missing")
        return _file_response(path, request.headers.get("range"))

    return app


_MEDIA_TYPES = {".mp4": "video/mp4", ".webm": "video/webm",
                ".mockvid": "application/octet-stream"}


def _file_response(path: Path, range_header: str | None) -> Response:
    """Static file serving with single-range request support."""
    data = path.read_bytes()
    size = len(data)
    media_type = _MEDIA_TYPES.get(path.suffix, "application/octet-stream")
    base = {"Accept-Ranges": "bytes"}
    if not range_header:
        return Response(content=data, media_type=media_type, headers=base)

    unsatisfiable = Response(
        status_code=416, media_type=media_type,
        headers={**base, "Content-Range": f"bytes */{size}"})
    spec = range_header.strip().lower()
    if not spec.startswith("bytes=") or "," in spec:
        return unsatisfiable
    spec = spec[len("bytes="):]
    start_s, _, end_s = spec.partition("-")
    try:
        if start_s == "":
            n = int(end_s)  # suffix form: last n bytes
            if n <= 0:
                return unsatisfiable
            start, end = max(size - n, 0), size - 1
        else:
            start = int(start_s)
            end = int(end_s) if end_s else size - 1
    except ValueError:
        return unsatisfiable
    if start >= size or end < start:
        return unsatisfiable
    end = min(end, size - 1)
    return Response(
        status_code=206,
        content=data[start:end + 1],
        media_type=media_type,
        headers={**base, "Content-Range": f"bytes {start}-{end}/{size}"},
    )
