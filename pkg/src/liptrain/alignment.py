"""Audio-video alignment: find the mouth-movement region of a talking-head
video from the lip-landmark rate of change, place the speech utterance over
it, and pad the remainder with digital silence."""

from __future__ import annotations

import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .audio import SAMPLE_RATE
from .landmarks import (
    MOUTH_RANGE,
    EmptyTrack,
    LandmarkTrack,
    inter_ocular_distance,
)

# Motion is normalized by inter-ocular distance, then expressed in pixels
# at this reference face size so thresholds are face-scale invariant.
REFERENCE_IOD = 60.0

__all__ = [
    "REFERENCE_IOD",
    "ActivityConfig",
    "MouthActivitySegment",
    "AlignmentPlan",
    "NoMouthActivity",
    "SpeechLongerThanVideo",
    "DurationMismatch",
    "mouth_motion_signal",
    "detect_mouth_activity",
    "build_alignment_plan",
    "render_padded_audio",
]


class NoMouthActivity(ValueError):
    pass


class SpeechLongerThanVideo(ValueError):
    pass


class DurationMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ActivityConfig:
    """Mouth-activity detector settings.

    threshold is in signal units (pixels per frame at the reference face
    size); the default is 0.02 x the reference inter-ocular distance.
    """

    window_frames: int = 5
    threshold: float = 0.02 * REFERENCE_IOD
    merge_gap_frames: int = 10
    min_frames: int = 15

    @classmethod
    def from_toml(cls, path) -> ActivityConfig:
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        table = data.get("activity", data)
        kwargs = {}
        for key, cast in (("window_frames", int), ("threshold", float),
                          ("merge_gap_frames", int), ("min_frames", int)):
            if key in table:
                kwargs[key] = cast(table[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class MouthActivitySegment:
    """Frame span (inclusive) judged to contain the mouth movement."""

    start_frame: int
    end_frame: int
    start_s: float
    end_s: float
    peak_motion: float
    ambiguous: bool = False  # True when disjoint bursts remained after merging

    @property
    def midpoint_s(self) -> float:
        return 0.5 * (self.start_s + self.end_s)


@dataclass(frozen=True)
class AlignmentPlan:
    video_id: str
    speech_duration_s: float
    speech_start_s: float
    lead_silence_s: float
    trail_silence_s: float

    @property
    def video_duration_s(self) -> float:
        return self.lead_silence_s + self.speech_duration_s + self.trail_silence_s

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "speech_duration_s": self.speech_duration_s,
            "speech_start_s": self.speech_start_s,
            "lead_silence_s": self.lead_silence_s,
            "trail_silence_s": self.trail_silence_s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AlignmentPlan:
        return cls(
            video_id=d["video_id"],
            speech_duration_s=float(d["speech_duration_s"]),
            speech_start_s=float(d["speech_start_s"]),
            lead_silence_s=float(d["lead_silence_s"]),
            trail_silence_s=float(d["trail_silence_s"]),
        )


def mouth_motion_signal(track: LandmarkTrack) -> np.ndarray:
    """Per-frame mouth motion in pixels/frame at the reference face size.

    Each face-bearing frame scores the mean Euclidean displacement of the
    20 mouth landmarks from the previous face-bearing frame, measured
    after subtracting the centroid of the non-mouth landmarks (so rigid
    head translation cancels), normalized by inter-ocular distance and
    rescaled to REFERENCE_IOD.  The first frame, and frames without a
    face, score 0.
    """
    if not track.frames:
        raise EmptyTrack(f"track {track.video_id!r} has no frames")
    lo, hi = MOUTH_RANGE

    # one frame per index; first face wins when a frame repeats
    seen: dict[int, int] = {}
    order: list[int] = []
    for i, f in enumerate(track.frames):
        if f.frame_index not in seen or (
            track.frames[seen[f.frame_index]].points is None and f.points is not None
        ):
            if f.frame_index not in seen:
                order.append(f.frame_index)
            seen[f.frame_index] = i
    order.sort()

    signal = np.zeros(len(order))
    prev = None
    for pos, idx in enumerate(order):
        f = track.frames[seen[idx]]
        if f.points is None:
            continue
        pts = np.asarray(f.points)
        anchor = pts[:lo].mean(axis=0)  # centroid of the 48 non-mouth landmarks
        mouth = pts[lo:hi] - anchor
        if prev is not None:
            prev_mouth, prev_iod = prev
            disp = float(np.mean(np.linalg.norm(mouth - prev_mouth, axis=1)))
            iod = 0.5 * (inter_ocular_distance(f.points) + prev_iod)
            if iod > 0:
                signal[pos] = disp / iod * REFERENCE_IOD
        prev = (mouth, inter_ocular_distance(f.points))
    return signal


def detect_mouth_activity(signal: np.ndarray, fps: float,
                          cfg: ActivityConfig = ActivityConfig()) -> MouthActivitySegment:
    """The maximal frame span whose sliding windows clear the threshold.

    A window of cfg.window_frames qualifies when its mean motion is >= the
    threshold; active frames are the union of qualifying windows.  Bursts
    separated by fewer than cfg.merge_gap_frames inactive frames are
    merged; if several bursts survive merging, the longest is returned
    with ambiguous=True and a warning.
    """
    signal = np.asarray(signal, dtype=float)
    n = signal.size
    if n < cfg.min_frames:
        raise ValueError(f"signal has {n} frames, below min_frames={cfg.min_frames}")
    w = cfg.window_frames
    if w < 1 or w > n:
        raise ValueError(f"window_frames={w} out of range for signal of {n}")

    # mean over each window [i, i+w)
    means = np.convolve(signal, np.ones(w) / w, mode="valid")
    active = np.zeros(n, dtype=bool)
    for i in np.nonzero(means >= cfg.threshold)[0]:
        active[i:i + w] = True
    if not active.any():
        raise NoMouthActivity("no window reaches the motion threshold")

    segments: list[list[int]] = []
    for i in np.nonzero(active)[0]:
        i = int(i)
        if segments and i <= segments[-1][1] + 1:
            segments[-1][1] = i
        else:
            segments.append([i, i])

    merged = [segments[0]]
    for seg in segments[1:]:
        gap = seg[0] - merged[-1][1] - 1
        if gap < cfg.merge_gap_frames:
            merged[-1][1] = seg[1]
        else:
            merged.append(seg)

    ambiguous = len(merged) > 1
    if ambiguous:
        warnings.warn(
            f"{len(merged)} disjoint mouth-activity bursts; keeping the longest",
            stacklevel=2,
        )
    start, end = max(merged, key=lambda s: s[1] - s[0])
    return MouthActivitySegment(
        start_frame=start,
        end_frame=end,
        start_s=start / fps,
        end_s=end / fps,
        peak_motion=float(signal[start:end + 1].max()),
        ambiguous=ambiguous,
    )


def build_alignment_plan(segment: MouthActivitySegment, speech_duration_s: float,
                         video_duration_s: float, video_id: str = "") -> AlignmentPlan:
    """Center the speech on the activity midpoint, clamped into the video.

    lead + speech + trail always equals the video duration exactly.
    """
    if speech_duration_s <= 0:
        raise ValueError(f"speech duration must be positive, got {speech_duration_s}")
    if speech_duration_s > video_duration_s:
        raise SpeechLongerThanVideo(
            f"speech {speech_duration_s} s does not fit in video {video_duration_s} s")
    start = segment.midpoint_s - 0.5 * speech_duration_s
    start = min(max(start, 0.0), video_duration_s - speech_duration_s)
    return AlignmentPlan(
        video_id=video_id,
        speech_duration_s=speech_duration_s,
        speech_start_s=start,
        lead_silence_s=start,
        trail_silence_s=video_duration_s - speech_duration_s - start,
    )


def render_padded_audio(plan: AlignmentPlan, speech: np.ndarray,
                        rate: int = SAMPLE_RATE) -> np.ndarray:
    """Silence-pad the speech to the video timeline: zeros outside
    [speech_start, speech_start + speech_duration], samples inside."""
    speech = np.asarray(speech)
    actual_s = speech.size / rate
    if abs(actual_s - plan.speech_duration_s) > 1e-3:
        raise DurationMismatch(
            f"speech is {actual_s:.4f} s but plan says {plan.speech_duration_s:.4f} s")
    total = round(plan.video_duration_s * rate)
    lead = round(plan.lead_silence_s * rate)
    out = np.zeros(total, dtype=np.int16)
    n = min(speech.size, total - lead)  # rounding can overshoot by < 1 ms
    out[lead:lead + n] = speech[:n]
    return out
