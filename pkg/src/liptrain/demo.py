"""Self-contained demo dataset: synthetic talking-head landmark tracks,
mock driving videos, and a fully generated manifest per protocol.  Runs
in seconds with no GPU or network; used by `liptrain demo` and tests."""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

from . import alignment, landmarks, lexicon, synth

__all__ = ["synthetic_face", "synthetic_track", "build_demo_media", "build_demo_dataset"]


def synthetic_face(mouth_open_px: float = 0.0, cx: float = 100.0, cy: float = 100.0,
                   scale: float = 1.0) -> list[list[float]]:
    """A plausible frontal ibug-68 layout.

    Eye centers land at (70, 80) and (130, 80) for scale 1, so the
    inter-ocular distance is exactly 60 px; mouth_open_px displaces the
    lower-lip points downward.
    """
    pts: list[list[float]] = []
    for i in range(48):
        ang = 2.0 * math.pi * i / 48.0
        pts.append([cx + 40.0 * scale * math.cos(ang), cy + 40.0 * scale * math.sin(ang)])
    for i in range(36, 42):  # left eye cluster, centroid (70, 80)
        pts[i] = [cx + scale * (-30.0 + (i - 36) % 3 - 1.0), cy + scale * (-20.0 + (i - 36) // 3 - 0.5)]
    for i in range(42, 48):  # right eye cluster, centroid (130, 80)
        pts[i] = [cx + scale * (30.0 + (i - 42) % 3 - 1.0), cy + scale * (-20.0 + (i - 42) // 3 - 0.5)]
    pts[30] = [cx, cy + 15.0 * scale]  # nose tip
    # mouth: corners stay put, upper points rise and lower points drop by the
    # same amount, so opening the mouth never moves its centroid
    upper = {1, 2, 3, 4, 5, 13, 14, 15}
    lower = {7, 8, 9, 10, 11, 17, 18, 19}
    for i in range(20):
        if i in upper:
            dy = -0.5 * mouth_open_px
        elif i in lower:
            dy = 0.5 * mouth_open_px
        else:
            dy = 0.0
        pts.append([cx + scale * (-10.0 + i), cy + scale * 35.0 + dy])
    return pts


def synthetic_track(video_id: str, fps: float = 25.0, duration_s: float = 4.0,
                    active_start_f: int | None = None, active_end_f: int | None = None,
                    amplitude_px: float = 16.0, seed: int = 0) -> landmarks.LandmarkTrack:
    """A track whose mouth moves only between the given frames (defaults
    to the middle half of the video)."""
    n = round(fps * duration_s)
    if active_start_f is None:
        active_start_f = n // 4
    if active_end_f is None:
        active_end_f = 3 * n // 4
    rng = random.Random(seed)
    phase = rng.random() * math.pi
    frames = []
    for k in range(n):
        if active_start_f <= k <= active_end_f:
            mouth = amplitude_px * 0.5 * (1.0 - math.cos(2.0 * math.pi * (k + phase) / 6.0))
        else:
            mouth = 0.0
        frames.append(landmarks.LandmarkFrame(
            frame_index=k,
            timestamp_s=k / fps,
            face_id=0,
            points=tuple(tuple(p) for p in synthetic_face(mouth_open_px=mouth)),
        ))
    return landmarks.LandmarkTrack(video_id, fps, duration_s, tuple(frames))


def build_demo_media(root, n_videos: int = 3, fps: float = 25.0,
                     duration_s: float = 4.0, seed: int = 0) -> list[str]:
    """Write tracks/<id>.jsonl and videos/<id>.mockvid; returns video ids."""
    root = Path(root)
    (root / "tracks").mkdir(parents=True, exist_ok=True)
    (root / "videos").mkdir(parents=True, exist_ok=True)
    ids = []
    for i in range(n_videos):
        video_id = f"drv{i:02d}"
        track = synthetic_track(video_id, fps, duration_s, seed=seed + i)
        (root / "tracks" / f"{video_id}.jsonl").write_text(
            landmarks.serialize_track(track), encoding="utf-8")
        synth.write_mock_video(
            root / "videos" / f"{video_id}.mockvid",
            video_stream=f"raw-frames-of-{video_id}".encode() * 4,
            audio_streams=[],
            duration_s=duration_s,
        )
        ids.append(video_id)
    return ids


def build_demo_dataset(root, vocab: list[lexicon.VocabEntry] | None = None,
                       n_videos: int = 3, variations: int = 3, seed: int = 0,
                       accent_tag: str = "AE", workers: int = 1) -> dict[str, Path]:
    """Generate a complete mock dataset under root.

    Returns protocol -> manifest path.  Layout: media/ (driving inputs),
    generated/<protocol>/ (outputs), manifests/<protocol>.json.
    """
    root = Path(root)
    vocab = vocab if vocab is not None else lexicon.default_vocab()
    video_ids = build_demo_media(root / "media", n_videos=n_videos, seed=seed)
    media = synth.MediaStore(root / "media")
    adapters = {
        "tts": synth.AdapterSpec(kind="tts", transport="mock", accent_tag=accent_tag),
        "lipsync": synth.AdapterSpec(kind="lipsync", transport="mock"),
    }
    (root / "manifests").mkdir(parents=True, exist_ok=True)
    out = {}
    for protocol in lexicon.PROTOCOLS:
        entries = [e for e in vocab if e.protocol == protocol]
        if not entries:
            continue
        manifest = synth.build_manifest(
            entries, video_ids, variations, accent_tag, rng_seed=seed + len(protocol))
        path = root / "manifests" / f"{protocol.lower()}.json"
        synth.run_generation(
            manifest, adapters, media, entries, root / "generated" / protocol.lower(),
            workers=workers, backoff_s=0.0, manifest_path=path)
        out[protocol] = path
    return out
