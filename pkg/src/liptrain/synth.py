"""Dataset generation: drive external TTS and lip-sync tools through
adapter contracts to materialize per-protocol manifests.

Adapters are small shell or HTTP programs, not imported models:
  - TTS adapter: given {text, voice, speed}, writes 16 kHz mono PCM WAV
  - lip-sync adapter: given {video, audio} paths, writes a video
Mock adapters (sine-tone speech, copy-through video) exercise the whole
pipeline without a GPU or network.  Mock videos are JSON containers
{"format": "mockvid", "video_stream": hex, "audio_streams": [hex...],
"duration_s": s}, which makes audio stripping observable in tests.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import shlex
import shutil
import socket
import subprocess
import tempfile
import threading
import time
import urllib.error
import urllib.parse
import urllib.request
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import alignment, audio, landmarks
from .lexicon import VocabEntry

ALLOWED_SPEEDS = (1.0, 1.5, 1.7, 2.0)
MOCK_SECONDS_PER_CHAR = 0.06
MOCKVID_FORMAT = "mockvid"

__all__ = [
    "ALLOWED_SPEEDS",
    "AdapterSpec",
    "AdapterError",
    "AdapterTimeout",
    "AdapterNonZeroExit",
    "AdapterUnreachable",
    "ChecksumMismatch",
    "MediaToolFailure",
    "EmptyVocabulary",
    "NoDrivingVideos",
    "ManifestEntry",
    "DatasetManifest",
    "MediaStore",
    "MockMediaTool",
    "FfmpegMediaTool",
    "build_manifest",
    "run_generation",
    "run_tts",
    "run_lipsync",
    "strip_audio",
    "sha256_file",
    "write_mock_video",
    "read_mock_video",
]


class AdapterError(RuntimeError):
    pass


class AdapterTimeout(AdapterError):
    pass


class AdapterNonZeroExit(AdapterError):
    pass


class AdapterUnreachable(AdapterError):
    pass


class ChecksumMismatch(RuntimeError):
    pass


class MediaToolFailure(RuntimeError):
    pass


class EmptyVocabulary(ValueError):
    pass


class NoDrivingVideos(ValueError):
    pass


@dataclass(frozen=True)
class AdapterSpec:
    """External generator contract.

    transport 'subprocess' runs `command` with placeholders substituted
    ({text}/{out}/{voice}/{speed} for TTS, {video}/{audio}/{out} for
    lip-sync); exit 0 means success.  transport 'http' POSTs JSON to
    `url` and expects 200 with {"path": ...}.  transport 'mock' needs no
    external program at all.
    """

    kind: str  # "tts" | "lipsync"
    transport: str  # "subprocess" | "http" | "mock"
    command: str = ""
    url: str = ""
    voice: str = ""
    accent_tag: str = ""
    speed: float = 1.0
    timeout_s: float = 60.0

    def __post_init__(self) -> None:
        if self.kind not in ("tts", "lipsync"):
            raise ValueError(f"adapter kind must be tts or lipsync, got {self.kind!r}")
        if self.transport not in ("subprocess", "http", "mock"):
            raise ValueError(f"unknown transport {self.transport!r}")
        if self.speed not in ALLOWED_SPEEDS:
            raise ValueError(f"speed {self.speed} not in allowed set {ALLOWED_SPEEDS}")
        if self.transport == "subprocess":
            required = ("{text}", "{out}") if self.kind == "tts" else ("{video}", "{audio}", "{out}")
            missing = [p for p in required if p not in self.command]
            if missing:
                raise ValueError(f"command template missing placeholders {missing}")
        if self.transport == "http" and not self.url:
            raise ValueError("http transport needs a url")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_mock_video(path, video_stream: bytes, audio_streams: list[bytes],
                     duration_s: float) -> None:
    doc = {
        "format": MOCKVID_FORMAT,
        "video_stream": video_stream.hex(),
        "audio_streams": [a.hex() for a in audio_streams],
        "duration_s": duration_s,
    }
    _atomic_write_text(Path(path), json.dumps(doc))


def read_mock_video(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise MediaToolFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MediaToolFailure(f"{path} is not a mock video container") from exc
    if doc.get("format") != MOCKVID_FORMAT:
        raise MediaToolFailure(f"{path} is not a mock video container")
    return doc


# ---------------------------------------------------------------- adapters


def run_tts(spec: AdapterSpec, text: str, out_path) -> Path:
    """Synthesize speech for `text` into out_path (16 kHz mono WAV)."""
    out_path = Path(out_path)
    if spec.transport == "mock":
        duration = max(MOCK_SECONDS_PER_CHAR * len(text) / spec.speed, 0.05)
        audio.write_wav(out_path, audio.sine_tone(duration))
        return out_path
    if spec.transport == "subprocess":
        cmd = spec.command.format(text=text, out=str(out_path),
                                  voice=spec.voice, speed=spec.speed)
        _run_subprocess(cmd, spec.timeout_s)
    else:
        _post_json(spec, {"text": text, "voice": spec.voice, "speed": spec.speed}, out_path)
    if not out_path.exists():
        raise AdapterNonZeroExit(f"tts adapter reported success but {out_path} is missing")
    return out_path


def run_lipsync(spec: AdapterSpec, video_path, audio_path, out_path) -> Path:
    """Re-articulate the driving video to the given audio."""
    out_path = Path(out_path)
    if spec.transport == "mock":
        try:
            doc = read_mock_video(video_path)
            video_stream = bytes.fromhex(doc["video_stream"])
        except MediaToolFailure:
            with open(video_path, "rb") as fh:  # raw driving file, any format
                video_stream = fh.read()
        samples, rate = audio.read_wav(audio_path)
        with open(audio_path, "rb") as fh:
            audio_bytes = fh.read()
        write_mock_video(out_path, video_stream, [audio_bytes], samples.size / rate)
        return out_path
    if spec.transport == "subprocess":
        cmd = spec.command.format(video=str(video_path), audio=str(audio_path),
                                  out=str(out_path))
        _run_subprocess(cmd, spec.timeout_s)
    else:
        _post_json(spec, {"video": str(video_path), "audio": str(audio_path)}, out_path)
    if not out_path.exists():
        raise AdapterNonZeroExit(f"lip-sync adapter reported success but {out_path} is missing")
    return out_path


def _run_subprocess(cmd: str, timeout_s: float) -> None:
    argv = shlex.split(cmd)
    try:
        proc = subprocess.run(argv, capture_output=True, timeout=timeout_s)
    except subprocess.TimeoutExpired as exc:
        raise AdapterTimeout(f"{argv[0]} exceeded {timeout_s}s") from exc
    except OSError as exc:
        raise AdapterUnreachable(f"cannot run {argv[0]}: {exc}") from exc
    if proc.returncode != 0:
        tail = proc.stderr.decode("utf-8", "replace").strip()[-200:]
        raise AdapterNonZeroExit(f"{argv[0]} exited {proc.returncode}: {tail}")


def _post_json(spec: AdapterSpec, payload: dict, out_path: Path) -> None:
    req = urllib.request.Request(
        spec.url,
        data=json.dumps(payload).encode("utf-8"),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req, timeout=spec.timeout_s) as resp:
            body = json.loads(resp.read().decode("utf-8"))
    except TimeoutError as exc:
        raise AdapterTimeout(f"{spec.url} timed out after {spec.timeout_s}s") from exc
    except urllib.error.HTTPError as exc:
        raise AdapterNonZeroExit(f"{spec.url} returned {exc.code}") from exc
    except (urllib.error.URLError, OSError) as exc:
        raise AdapterUnreachable(f"cannot reach {spec.url}: {exc}") from exc
    produced = body.get("path")
    if not produced:
        raise AdapterNonZeroExit(f"{spec.url} response carries no output path")
    if Path(produced) != out_path:
        shutil.copyfile(produced, out_path)


def probe_adapter(spec: AdapterSpec) -> None:
    """Cheap reachability check before a long run."""
    if spec.transport == "mock":
        return
    if spec.transport == "subprocess":
        argv0 = shlex.split(spec.command)[0]
        if shutil.which(argv0) is None and not Path(argv0).exists():
            raise AdapterUnreachable(f"adapter program {argv0!r} not found")
        return
    parsed = urllib.parse.urlparse(spec.url)
    port = parsed.port or (443 if parsed.scheme == "https" else 80)
    try:
        socket.create_connection((parsed.hostname, port), timeout=5.0).close()
    except OSError as exc:
        raise AdapterUnreachable(f"cannot reach {spec.url}: {exc}") from exc


# ---------------------------------------------------------------- media tools


class MockMediaTool:
    """Audio stripping for the JSON mock container."""

    def strip_audio(self, src, dst) -> None:
        doc = read_mock_video(src)
        doc["audio_streams"] = []
        _atomic_write_text(Path(dst), json.dumps(doc))


class FfmpegMediaTool:
    """Audio stripping via ffmpeg stream copy (video bits untouched)."""

    def __init__(self, binary: str = "ffmpeg"):
        self.binary = binary

    def strip_audio(self, src, dst) -> None:
        if not Path(src).exists():
            raise MediaToolFailure(f"{src} does not exist")
        cmd = [self.binary, "-y", "-loglevel", "error", "-i", str(src),
               "-c:v", "copy", "-an", str(dst)]
        try:
            proc = subprocess.run(cmd, capture_output=True)
        except OSError as exc:
            raise MediaToolFailure(f"cannot run {self.binary}: {exc}") from exc
        if proc.returncode != 0:
            raise MediaToolFailure(proc.stderr.decode("utf-8", "replace").strip()[-200:])


def strip_audio(video_path, tool=None) -> Path:
    """Rewrite the container at video_path without audio streams, in place.

    Idempotent: an already-silent video keeps its stream layout.
    """
    video_path = Path(video_path)
    if not video_path.exists():
        raise MediaToolFailure(f"{video_path} does not exist")
    if tool is None:
        tool = MockMediaTool() if video_path.suffix == ".mockvid" else FfmpegMediaTool()
    tmp = video_path.with_name(video_path.name + ".strip.tmp")
    try:
        tool.strip_audio(video_path, tmp)
        os.replace(tmp, video_path)
    finally:
        if tmp.exists():
            tmp.unlink()
    return video_path


# ---------------------------------------------------------------- manifests


@dataclass
class ManifestEntry:
    label_id: str
    variation_id: str
    driving_video_id: str
    generated_video_path: str = ""
    checksum: str = ""
    status: str = "pending"  # pending | done | failed
    error: str = ""

    def to_dict(self) -> dict:
        return {
            "label_id": self.label_id,
            "variation_id": self.variation_id,
            "driving_video_id": self.driving_video_id,
            "generated_video_path": self.generated_video_path,
            "checksum": self.checksum,
            "status": self.status,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ManifestEntry:
        return cls(**{k: d.get(k, "") for k in (
            "label_id", "variation_id", "driving_video_id",
            "generated_video_path", "checksum", "status", "error")})


@dataclass
class DatasetManifest:
    manifest_id: str
    protocol: str
    accent_tag: str
    entries: list[ManifestEntry] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        out = {"pending": 0, "done": 0, "failed": 0}
        for e in self.entries:
            out[e.status] = out.get(e.status, 0) + 1
        return out

    def to_dict(self) -> dict:
        return {
            "manifest_id": self.manifest_id,
            "protocol": self.protocol,
            "accent_tag": self.accent_tag,
            "entries": [e.to_dict() for e in self.entries],
        }

    @classmethod
    def from_dict(cls, d: dict) -> DatasetManifest:
        return cls(
            manifest_id=d["manifest_id"],
            protocol=d["protocol"],
            accent_tag=d["accent_tag"],
            entries=[ManifestEntry.from_dict(e) for e in d["entries"]],
        )

    def save(self, path) -> None:
        _atomic_write_text(Path(path), json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> DatasetManifest:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def build_manifest(vocab: list[VocabEntry], driving_videos: list[str],
                   variations: int, accent_tag: str, rng_seed: int) -> DatasetManifest:
    """Pair every label with `variations` driving videos.

    Sampling is without replacement while variations <= |driving_videos|,
    with replacement (and a warning) beyond that.  Deterministic for a
    given seed.
    """
    if not vocab:
        raise EmptyVocabulary("no vocabulary entries")
    if not driving_videos:
        raise NoDrivingVideos("no driving videos")
    protocols = {e.protocol for e in vocab}
    if len(protocols) != 1:
        raise ValueError(f"vocabulary mixes protocols {sorted(protocols)}")
    if variations < 1:
        raise ValueError("variations must be >= 1")
    protocol = protocols.pop()
    if variations > len(driving_videos):
        warnings.warn(
            f"{variations} variations but only {len(driving_videos)} driving "
            f"videos; sampling with replacement", stacklevel=2)
    rng = random.Random(rng_seed)
    entries = []
    for entry in vocab:
        if variations <= len(driving_videos):
            chosen = rng.sample(driving_videos, variations)
        else:
            chosen = [rng.choice(driving_videos) for _ in range(variations)]
        for v, video_id in enumerate(chosen):
            entries.append(ManifestEntry(
                label_id=entry.label_id,
                variation_id=f"v{v:02d}",
                driving_video_id=video_id,
            ))
    return DatasetManifest(
        manifest_id=f"{protocol.lower()}-{accent_tag.lower()}-s{rng_seed}",
        protocol=protocol,
        accent_tag=accent_tag,
        entries=entries,
    )


@dataclass
class MediaStore:
    """Directory layout for driving media: tracks/<id>.jsonl plus
    videos/<id>.<ext>."""

    root: Path

    def __post_init__(self) -> None:
        self.root = Path(self.root)

    def track_path(self, video_id: str) -> Path:
        return self.root / "tracks" / f"{video_id}.jsonl"

    def video_path(self, video_id: str) -> Path:
        matches = sorted((self.root / "videos").glob(f"{video_id}.*"))
        if not matches:
            raise FileNotFoundError(f"no driving video file for {video_id!r}")
        return matches[0]

    def load_track(self, video_id: str) -> landmarks.LandmarkTrack:
        with open(self.track_path(video_id), encoding="utf-8") as fh:
            return landmarks.parse_track(fh)


def run_generation(manifest: DatasetManifest, adapters: dict[str, AdapterSpec],
                   media: MediaStore, vocab: list[VocabEntry], out_dir,
                   workers: int = 1, max_retries: int = 1, backoff_s: float = 2.0,
                   manifest_path=None, media_tool=None, mute: bool = True,
                   activity_cfg: alignment.ActivityConfig | None = None,
                   verify_done: bool = False) -> DatasetManifest:
    """Execute tts -> align -> lipsync for every pending entry.

    Idempotent: done entries are skipped (with verify_done, their files
    are re-hashed first and demoted to failed on ChecksumMismatch).
    Adapter failures are retried per stage with exponential backoff, then
    recorded on the entry; one bad entry never aborts the run.  With
    mute=True the generated container is stripped of audio before its
    checksum is recorded, so the manifest describes exactly what learners
    will be served.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tmp_dir = out_dir / "tmp"
    tmp_dir.mkdir(exist_ok=True)
    texts = {e.label_id: e.text for e in vocab}
    cfg = activity_cfg or alignment.ActivityConfig()

    for spec in adapters.values():
        probe_adapter(spec)

    lock = threading.Lock()
    track_cache: dict[str, tuple] = {}

    def plan_for(video_id: str):
        with lock:
            cached = track_cache.get(video_id)
        if cached is not None:
            return cached
        track = media.load_track(video_id)
        signal = alignment.mouth_motion_signal(track)
        segment = alignment.detect_mouth_activity(signal, track.fps, cfg)
        result = (track, segment)
        with lock:
            track_cache[video_id] = result
        return result

    def save() -> None:
        if manifest_path is not None:
            manifest.save(manifest_path)

    def attempt_stage(stage_name: str, fn):
        last: Exception | None = None
        for attempt in range(max_retries + 1):
            try:
                return fn()
            except (AdapterError, MediaToolFailure) as exc:
                last = exc
                if attempt < max_retries:
                    time.sleep(backoff_s * (2 ** attempt))
        raise AdapterError(f"{stage_name}: {last}") from last

    def process(entry: ManifestEntry) -> None:
        if entry.status == "done":
            if not verify_done:
                return
            ok = (entry.generated_video_path
                  and Path(entry.generated_video_path).exists()
                  and sha256_file(entry.generated_video_path) == entry.checksum)
            if ok:
                return
            with lock:
                entry.status = "failed"
                entry.error = "ChecksumMismatch: stored file differs from manifest"
                save()
            return
        stem = f"{entry.label_id}-{entry.variation_id}"
        speech_wav = tmp_dir / f"{stem}.speech.wav"
        padded_wav = tmp_dir / f"{stem}.padded.wav"
        suffix = ".mockvid" if adapters["lipsync"].transport == "mock" else ".mp4"
        out_path = out_dir / f"{stem}{suffix}"
        try:
            attempt_stage("tts", lambda: run_tts(adapters["tts"], texts[entry.label_id], speech_wav))
            track, segment = plan_for(entry.driving_video_id)
            samples, rate = audio.read_wav(speech_wav)
            plan = alignment.build_alignment_plan(
                segment, samples.size / rate, track.duration_s, track.video_id)
            audio.write_wav(padded_wav, alignment.render_padded_audio(plan, samples, rate))
            driving = media.video_path(entry.driving_video_id)
            attempt_stage("lipsync", lambda: run_lipsync(
                adapters["lipsync"], driving, padded_wav, out_path))
            if mute:
                attempt_stage("strip", lambda: strip_audio(out_path, media_tool))
            checksum = sha256_file(out_path)
        except (AdapterError, MediaToolFailure, alignment.SpeechLongerThanVideo,
                alignment.NoMouthActivity, landmarks.TrackError, KeyError,
                FileNotFoundError, audio.AudioFormatError) as exc:
            with lock:
                entry.status = "failed"
                entry.error = f"{type(exc).__name__}: {exc}"
                save()
            return
        with lock:
            entry.status = "done"
            entry.error = ""
            entry.generated_video_path = str(out_path)
            entry.checksum = checksum
            save()

    if workers <= 1:
        for entry in manifest.entries:
            process(entry)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(process, manifest.entries))
    save()
    return manifest
