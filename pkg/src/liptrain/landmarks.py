"""Per-frame facial-landmark tracks: parsing, serialization, validity gating.

File format is JSON Lines.  Line 1 is a header object
{"video_id", "fps", "duration_s", "points_schema": "ibug-68"}; every later
line is a frame object {"frame", "t", "face_id", "points": [[x, y] * 68]}
or just {"frame", "t"} when no face was detected.  UTF-8, LF endings.

A valid video is a single-identity, front-facing talking head with no
drastic pose changes.  All gates are computed from the 68-point landmarks
alone, so any detector that can emit this file can feed the pipeline.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field

POINTS_SCHEMA = "ibug-68"
N_POINTS = 68
MOUTH_RANGE = (48, 68)  # indices 48-67 are the mouth
LEFT_EYE_RANGE = (36, 42)
RIGHT_EYE_RANGE = (42, 48)
NOSE_TIP = 30

__all__ = [
    "LandmarkFrame",
    "LandmarkTrack",
    "GateConfig",
    "ValidityReport",
    "TrackError",
    "MalformedRecord",
    "MissingHeader",
    "NonMonotonicTimestamps",
    "EmptyTrack",
    "parse_track",
    "serialize_track",
    "validate_video",
    "inter_ocular_distance",
    "yaw_proxy",
    "mouth_centroid",
]


class TrackError(ValueError):
    """Base class for landmark-file problems."""


class MalformedRecord(TrackError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class MissingHeader(TrackError):
    pass


class NonMonotonicTimestamps(TrackError):
    pass


class EmptyTrack(TrackError):
    pass


@dataclass(frozen=True)
class LandmarkFrame:
    """One video frame; points is None when no face was detected."""

    frame_index: int
    timestamp_s: float
    face_id: int | None = None
    points: tuple[tuple[float, float], ...] | None = None

    @property
    def has_face(self) -> bool:
        return self.points is not None


@dataclass(frozen=True)
class LandmarkTrack:
    video_id: str
    fps: float
    duration_s: float
    frames: tuple[LandmarkFrame, ...]

    @property
    def frame_count(self) -> int:
        """Number of distinct frame indices (multi-face lines share one)."""
        return len({f.frame_index for f in self.frames})


def _eye_center(points, lo: int, hi: int) -> tuple[float, float]:
    xs = [points[i][0] for i in range(lo, hi)]
    ys = [points[i][1] for i in range(lo, hi)]
    return sum(xs) / len(xs), sum(ys) / len(ys)


def inter_ocular_distance(points) -> float:
    """Distance between the two eye centers (mean of each eye's 6 points)."""
    lx, ly = _eye_center(points, *LEFT_EYE_RANGE)
    rx, ry = _eye_center(points, *RIGHT_EYE_RANGE)
    return math.hypot(rx - lx, ry - ly)


def yaw_proxy(points) -> float:
    """Left-eye-to-nose-tip distance over right-eye-to-nose-tip distance.

    About 1.0 for a frontal face, drifting off as the head turns.
    """
    nx, ny = points[NOSE_TIP]
    lx, ly = _eye_center(points, *LEFT_EYE_RANGE)
    rx, ry = _eye_center(points, *RIGHT_EYE_RANGE)
    right = math.hypot(rx - nx, ry - ny)
    if right == 0.0:
        return math.inf
    return math.hypot(lx - nx, ly - ny) / right


def mouth_centroid(points) -> tuple[float, float]:
    lo, hi = MOUTH_RANGE
    xs = [points[i][0] for i in range(lo, hi)]
    ys = [points[i][1] for i in range(lo, hi)]
    return sum(xs) / len(xs), sum(ys) / len(ys)


def _parse_points(raw, line_no: int) -> tuple[tuple[float, float], ...]:
    if not isinstance(raw, list) or len(raw) != N_POINTS:
        got = len(raw) if isinstance(raw, list) else type(raw).__name__
        raise MalformedRecord(f"expected {N_POINTS} points, got {got}", line_no)
    out = []
    for pt in raw:
        if not isinstance(pt, list) or len(pt) != 2:
            raise MalformedRecord("each point must be an [x, y] pair", line_no)
        x, y = float(pt[0]), float(pt[1])
        if not (math.isfinite(x) and math.isfinite(y)) or x < 0 or y < 0:
            raise MalformedRecord(f"coordinate ({x}, {y}) not finite and non-negative", line_no)
        out.append((x, y))
    return tuple(out)


def parse_track(stream) -> LandmarkTrack:
    """Parse a JSON-Lines landmark file into a LandmarkTrack.

    Accepts a binary or text stream, bytes, or str.  Frames come back
    sorted by frame_index.  Repeated frame indices are kept (they encode
    multiple faces in one frame and are judged by validate_video), but
    their timestamps must agree, and timestamps must strictly increase
    across distinct frames.
    """
    if isinstance(stream, (bytes, bytearray)):
        text = bytes(stream).decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    else:
        data = stream.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data

    header = None
    frames: list[LandmarkFrame] = []
    line_no = 0
    for line in text.splitlines():
        line_no += 1
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"invalid JSON: {exc.msg}", line_no) from exc
        if header is None:
            for key in ("video_id", "fps", "duration_s", "points_schema"):
                if key not in obj:
                    raise MissingHeader(f"header missing field {key!r} (line {line_no})")
            if obj["points_schema"] != POINTS_SCHEMA:
                raise MalformedRecord(
                    f"unsupported points_schema {obj['points_schema']!r}", line_no)
            fps = float(obj["fps"])
            duration = float(obj["duration_s"])
            if fps <= 0 or duration < 0:
                raise MalformedRecord("fps must be > 0 and duration_s >= 0", line_no)
            header = (str(obj["video_id"]), fps, duration)
            continue
        if "frame" not in obj or "t" not in obj:
            raise MalformedRecord("frame line needs 'frame' and 't'", line_no)
        idx = obj["frame"]
        if not isinstance(idx, int) or idx < 0:
            raise MalformedRecord(f"frame index {idx!r} must be a non-negative integer", line_no)
        t = float(obj["t"])
        if not math.isfinite(t):
            raise MalformedRecord("timestamp must be finite", line_no)
        points = None
        face_id = None
        if "points" in obj:
            points = _parse_points(obj["points"], line_no)
            face_id = obj.get("face_id")
            if face_id is not None and not isinstance(face_id, int):
                raise MalformedRecord("face_id must be an integer", line_no)
        frames.append(LandmarkFrame(idx, t, face_id, points))

    if header is None:
        raise MissingHeader("stream has no header line")
    video_id, fps, duration = header

    frames.sort(key=lambda f: f.frame_index)
    for prev, cur in zip(frames, frames[1:]):
        if cur.frame_index == prev.frame_index:
            if cur.timestamp_s != prev.timestamp_s:
                raise NonMonotonicTimestamps(
                    f"frame {cur.frame_index} repeats with different timestamps")
        elif cur.timestamp_s <= prev.timestamp_s:
            raise NonMonotonicTimestamps(
                f"timestamp {cur.timestamp_s} at frame {cur.frame_index} does not "
                f"increase past {prev.timestamp_s}")

    track = LandmarkTrack(video_id, fps, duration, tuple(frames))
    n = track.frame_count
    if n:
        expected = fps * duration
        if abs(n - expected) > 1.0:
            raise MalformedRecord(
                f"frame count {n} inconsistent with fps*duration = {expected:.2f}")
    return track


def serialize_track(track: LandmarkTrack) -> str:
    """Inverse of parse_track: JSON Lines text with LF endings."""
    lines = [json.dumps({
        "video_id": track.video_id,
        "fps": track.fps,
        "duration_s": track.duration_s,
        "points_schema": POINTS_SCHEMA,
    }, separators=(",", ":"))]
    for f in track.frames:
        obj: dict = {"frame": f.frame_index, "t": f.timestamp_s}
        if f.points is not None:
            if f.face_id is not None:
                obj["face_id"] = f.face_id
            obj["points"] = [[x, y] for x, y in f.points]
        lines.append(json.dumps(obj, separators=(",", ":")))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GateConfig:
    """Validity gate thresholds.  Defaults are calibration choices, all
    overridable via TOML: [gates] min_face_coverage = 0.9 etc."""

    min_face_coverage: float = 0.95
    max_centroid_jump_iod: float = 0.1  # fraction of inter-ocular distance, per frame
    yaw_band: tuple[float, float] = (0.6, 1.6)
    max_yaw_delta: float = 0.05  # per frame

    @classmethod
    def from_toml(cls, path) -> GateConfig:
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        table = data.get("gates", data)
        kwargs = {}
        for key in ("min_face_coverage", "max_centroid_jump_iod", "max_yaw_delta"):
            if key in table:
                kwargs[key] = float(table[key])
        if "yaw_band" in table:
            lo, hi = table["yaw_band"]
            kwargs["yaw_band"] = (float(lo), float(hi))
        return cls(**kwargs)


@dataclass(frozen=True)
class ValidityReport:
    """All gate measurements, computed even when the track fails."""

    video_id: str
    valid: bool
    face_coverage: float
    max_identity_jump: float  # pixels per frame, mouth centroid
    yaw_proxy_range: tuple[float, float]
    reasons: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "valid": self.valid,
            "face_coverage": self.face_coverage,
            "max_identity_jump": self.max_identity_jump,
            "yaw_proxy_range": list(self.yaw_proxy_range),
            "reasons": list(self.reasons),
        }


# Failure codes
LOW_FACE_COVERAGE = "LowFaceCoverage"
MULTIPLE_FACES = "MultipleFaces"
IDENTITY_JUMP = "IdentityJump"
POSE_CHANGE = "PoseChange"


def validate_video(track: LandmarkTrack, gates: GateConfig = GateConfig()) -> ValidityReport:
    """Gate a track: coverage, single identity, frontal pose, smooth pose.

    Pure and deterministic: the same track and gates always produce the
    same report.  PoseChange covers both a yaw proxy outside the allowed
    band and a per-frame proxy delta above the limit (a profile turn
    trips it either way).
    """
    if not track.frames:
        raise EmptyTrack(f"track {track.video_id!r} has no frames")

    by_index: dict[int, list[LandmarkFrame]] = {}
    for f in track.frames:
        by_index.setdefault(f.frame_index, []).append(f)

    reasons: list[str] = []
    n_frames = len(by_index)
    face_frames = []  # first face per index, in frame order
    multiple = False
    for idx in sorted(by_index):
        faces = [f for f in by_index[idx] if f.has_face]
        if len(faces) > 1:
            multiple = True
        if faces:
            face_frames.append(faces[0])
    coverage = len(face_frames) / n_frames

    if multiple:
        reasons.append(MULTIPLE_FACES)
    if coverage < gates.min_face_coverage:
        reasons.append(LOW_FACE_COVERAGE)

    max_jump_px = 0.0
    identity_jump = False
    ids = {f.face_id for f in face_frames if f.face_id is not None}
    if len(ids) > 1:
        identity_jump = True
    for prev, cur in zip(face_frames, face_frames[1:]):
        gap = cur.frame_index - prev.frame_index
        px, py = mouth_centroid(prev.points)
        cx, cy = mouth_centroid(cur.points)
        jump = math.hypot(cx - px, cy - py) / gap
        max_jump_px = max(max_jump_px, jump)
        iod = 0.5 * (inter_ocular_distance(prev.points) + inter_ocular_distance(cur.points))
        if iod > 0 and jump > gates.max_centroid_jump_iod * iod:
            identity_jump = True
    if identity_jump:
        reasons.append(IDENTITY_JUMP)

    pose_change = False
    proxies = [yaw_proxy(f.points) for f in face_frames]
    if proxies:
        band_lo, band_hi = gates.yaw_band
        if any(not band_lo <= p <= band_hi for p in proxies):
            pose_change = True
        for (pf, pp), (cf, cp) in zip(
            zip(face_frames, proxies), zip(face_frames[1:], proxies[1:])
        ):
            gap = cf.frame_index - pf.frame_index
            if abs(cp - pp) / gap > gates.max_yaw_delta:
                pose_change = True
                break
        yaw_range = (min(proxies), max(proxies))
    else:
        yaw_range = (0.0, 0.0)
    if pose_change:
        reasons.append(POSE_CHANGE)

    return ValidityReport(
        video_id=track.video_id,
        valid=not reasons,
        face_coverage=coverage,
        max_identity_jump=max_jump_px,
        yaw_proxy_range=yaw_range,
        reasons=tuple(reasons),
    )
