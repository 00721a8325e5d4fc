"""Tests for mouth-activity detection, alignment planning, audio padding."""

from __future__ import annotations

import numpy as np
import pytest

from liptrain import landmarks as lm
from liptrain.alignment import (
    REFERENCE_IOD,
    ActivityConfig,
    AlignmentPlan,
    DurationMismatch,
    MouthActivitySegment,
    NoMouthActivity,
    SpeechLongerThanVideo,
    build_alignment_plan,
    detect_mouth_activity,
    mouth_motion_signal,
    render_padded_audio,
)
from liptrain.audio import AudioFormatError, read_wav, sine_tone, write_wav
from liptrain.demo import synthetic_face, synthetic_track

FPS = 25.0
THRESH = ActivityConfig().threshold  # 1.2 px/frame at the reference face


def static_track(n=60, fps=FPS, face=None):
    face = face or synthetic_face()
    frames = tuple(
        lm.LandmarkFrame(k, k / fps, 0, tuple(tuple(p) for p in face))
        for k in range(n)
    )
    return lm.LandmarkTrack("static", fps, n / fps, frames)


def burst_signal(n, bursts, level):
    """Zeros except `level` on each inclusive (start, end) frame range."""
    sig = np.zeros(n)
    for start, end in bursts:
        sig[start:end + 1] = level
    return sig


# ------------------------------------------------------------- motion signal


def test_motion_signal_static_mouth_is_zero():
    sig = mouth_motion_signal(static_track())
    assert sig.shape == (60,)
    assert np.all(sig == 0.0)


def test_motion_signal_head_bob_cancels():
    # Whole face translating rigidly: anchor subtraction kills the motion.
    frames = []
    for k in range(60):
        face = synthetic_face(cx=100.0 + 3.0 * np.sin(k / 5.0),
                              cy=100.0 + 2.0 * np.cos(k / 7.0))
        frames.append(lm.LandmarkFrame(k, k / FPS, 0, tuple(tuple(p) for p in face)))
    track = lm.LandmarkTrack("bob", FPS, 60 / FPS, tuple(frames))
    sig = mouth_motion_signal(track)
    assert np.max(np.abs(sig)) < 1e-6


def test_motion_signal_oscillation_window():
    track = synthetic_track("osc", fps=FPS, duration_s=6.0,
                            active_start_f=30, active_end_f=90)
    sig = mouth_motion_signal(track)
    assert np.all(sig[:25] == 0.0)
    assert np.all(sig[97:] == 0.0)
    assert sig[31:90].max() > 0.0


def test_motion_signal_scale_invariant():
    # Doubling face size and displacement leaves the normalized signal alone.
    def track_at(scale):
        frames = []
        for k in range(40):
            mouth = (6.0 * scale) if 10 <= k <= 30 and k % 2 else 0.0
            face = synthetic_face(mouth_open_px=mouth, scale=scale)
            frames.append(lm.LandmarkFrame(k, k / FPS, 0, tuple(tuple(p) for p in face)))
        return lm.LandmarkTrack(f"s{scale}", FPS, 40 / FPS, tuple(frames))

    sig1 = mouth_motion_signal(track_at(1.0))
    sig2 = mouth_motion_signal(track_at(2.0))
    assert np.allclose(sig1, sig2, atol=1e-9)


def test_motion_signal_first_frame_zero_and_faceless_skipped():
    face = tuple(tuple(p) for p in synthetic_face())
    open_face = tuple(tuple(p) for p in synthetic_face(mouth_open_px=8.0))
    frames = (
        lm.LandmarkFrame(0, 0.00, 0, face),
        lm.LandmarkFrame(1, 0.04, None, None),
        lm.LandmarkFrame(2, 0.08, 0, open_face),
    )
    sig = mouth_motion_signal(lm.LandmarkTrack("gap", FPS, 3 / FPS, frames))
    assert sig[0] == 0.0
    assert sig[1] == 0.0  # no face, no score
    assert sig[2] > 0.0   # displacement measured against frame 0


def test_motion_signal_empty_track():
    with pytest.raises(lm.EmptyTrack):
        mouth_motion_signal(lm.LandmarkTrack("none", FPS, 0.0, ()))


# ------------------------------------------------------------- detection


def test_detect_exact_window():
    # Motion above threshold exactly on frames 30..90 of 150.
    sig = burst_signal(150, [(30, 90)], 1.25)
    seg = detect_mouth_activity(sig, FPS)
    assert (seg.start_frame, seg.end_frame) == (30, 90)
    assert seg.start_s == pytest.approx(1.2)
    assert seg.end_s == pytest.approx(3.6)
    assert seg.peak_motion == pytest.approx(1.25)
    assert not seg.ambiguous


def test_detect_merges_close_bursts():
    cfg = ActivityConfig(merge_gap_frames=5)
    sig = burst_signal(150, [(10, 40), (44, 80)], 1.25)
    seg = detect_mouth_activity(sig, FPS, cfg)
    assert (seg.start_frame, seg.end_frame) == (10, 80)
    assert not seg.ambiguous


def test_detect_keeps_longest_disjoint_burst():
    cfg = ActivityConfig(merge_gap_frames=5)
    sig = burst_signal(150, [(10, 30), (60, 120)], 1.25)
    with pytest.warns(UserWarning):
        seg = detect_mouth_activity(sig, FPS, cfg)
    assert (seg.start_frame, seg.end_frame) == (60, 120)
    assert seg.ambiguous


def test_detect_all_zero_signal():
    with pytest.raises(NoMouthActivity):
        detect_mouth_activity(np.zeros(100), FPS)


def test_detect_below_threshold_everywhere():
    with pytest.raises(NoMouthActivity):
        detect_mouth_activity(np.full(100, 0.9 * THRESH), FPS)


def test_detect_short_signal_rejected():
    with pytest.raises(ValueError):
        detect_mouth_activity(np.ones(10) * 2 * THRESH, FPS)


def test_detect_on_synthetic_track_brackets_activity():
    track = synthetic_track("demo", fps=FPS, duration_s=6.0,
                            active_start_f=40, active_end_f=100, seed=2)
    sig = mouth_motion_signal(track)
    seg = detect_mouth_activity(sig, FPS)
    w = ActivityConfig().window_frames
    assert abs(seg.start_frame - 40) <= w
    assert abs(seg.end_frame - 100) <= w + 1  # trailing edge scores one frame late


def test_activity_config_defaults_and_toml(tmp_path):
    cfg = ActivityConfig()
    assert cfg.window_frames == 5
    assert cfg.threshold == pytest.approx(0.02 * REFERENCE_IOD)
    assert cfg.merge_gap_frames == 10
    assert cfg.min_frames == 15
    path = tmp_path / "activity.toml"
    path.write_text("[activity]\nwindow_frames = 3\nthreshold = 0.5\n")
    loaded = ActivityConfig.from_toml(path)
    assert loaded.window_frames == 3
    assert loaded.threshold == 0.5
    assert loaded.merge_gap_frames == 10


# ------------------------------------------------------------- planning


SEGMENT = MouthActivitySegment(start_frame=30, end_frame=90,
                               start_s=1.2, end_s=3.6, peak_motion=2.0)


def test_plan_centered():
    plan = build_alignment_plan(SEGMENT, speech_duration_s=2.0, video_duration_s=6.0)
    assert plan.speech_start_s == pytest.approx(1.4)
    assert plan.lead_silence_s == pytest.approx(1.4)
    assert plan.trail_silence_s == pytest.approx(2.6)


def test_plan_clamped_to_video_start():
    plan = build_alignment_plan(SEGMENT, speech_duration_s=5.0, video_duration_s=6.0)
    assert plan.speech_start_s == 0.0
    assert plan.lead_silence_s == 0.0
    assert plan.trail_silence_s == pytest.approx(1.0)


def test_plan_clamped_to_video_end():
    late = MouthActivitySegment(130, 145, 5.2, 5.8, 2.0)
    plan = build_alignment_plan(late, speech_duration_s=2.0, video_duration_s=6.0)
    assert plan.speech_start_s == pytest.approx(4.0)
    assert plan.trail_silence_s == pytest.approx(0.0)


def test_plan_speech_longer_than_video():
    with pytest.raises(SpeechLongerThanVideo):
        build_alignment_plan(SEGMENT, speech_duration_s=7.0, video_duration_s=6.0)
    with pytest.raises(ValueError):
        build_alignment_plan(SEGMENT, speech_duration_s=0.0, video_duration_s=6.0)


def test_plan_timeline_conservation():
    rng = np.random.default_rng(14)
    for _ in range(200):
        video = float(rng.uniform(2.0, 12.0))
        speech = float(rng.uniform(0.2, video))
        mid = float(rng.uniform(0.0, video))
        seg = MouthActivitySegment(0, 1, mid, mid, 1.0)
        plan = build_alignment_plan(seg, speech, video)
        total = plan.lead_silence_s + plan.speech_duration_s + plan.trail_silence_s
        assert total == pytest.approx(video, abs=1e-9)
        assert plan.lead_silence_s >= 0.0
        assert plan.trail_silence_s >= -1e-12
        assert plan.speech_start_s + speech <= video + 1e-9


def test_plan_dict_round_trip():
    plan = build_alignment_plan(SEGMENT, 2.0, 6.0, video_id="v1")
    again = AlignmentPlan.from_dict(plan.to_dict())
    assert again == plan


# ------------------------------------------------------------- rendering


def test_render_sample_counts():
    plan = AlignmentPlan("v", speech_duration_s=2.0, speech_start_s=1.4,
                         lead_silence_s=1.4, trail_silence_s=2.6)
    speech = sine_tone(2.0)
    out = render_padded_audio(plan, speech)
    assert out.size == 96_000
    assert np.all(out[:22_400] == 0)
    assert np.array_equal(out[22_400:22_400 + speech.size], speech)
    assert np.all(out[22_400 + speech.size:] == 0)


def test_render_zero_lead():
    plan = AlignmentPlan("v", 1.0, 0.0, 0.0, 1.0)
    speech = sine_tone(1.0, freq_hz=200.0)
    out = render_padded_audio(plan, speech)
    assert out[0] == speech[0]
    assert np.array_equal(out[:speech.size], speech)


def test_render_duration_mismatch():
    plan = AlignmentPlan("v", 2.0, 1.0, 1.0, 1.0)
    with pytest.raises(DurationMismatch):
        render_padded_audio(plan, sine_tone(2.5))


def test_render_tolerates_sub_ms_mismatch():
    plan = AlignmentPlan("v", 2.0, 1.0, 1.0, 1.0)
    speech = sine_tone(2.0)[:-8]  # half a millisecond short
    out = render_padded_audio(plan, speech)
    assert out.size == 64_000


def test_render_silence_is_digital_zero():
    plan = AlignmentPlan("v", 0.5, 2.0, 2.0, 1.5)
    speech = sine_tone(0.5)
    out = render_padded_audio(plan, speech)
    start = round(plan.speech_start_s * 16_000)
    outside = np.r_[out[:start], out[start + speech.size:]]
    assert np.count_nonzero(outside) == 0


# ------------------------------------------------------------- pipeline


def test_aligned_beats_naive_placement():
    """Speech must land on the mouth-activity region, which a plan that
    always starts at t=0 misses."""
    track = synthetic_track("pipe", fps=FPS, duration_s=4.0,
                            active_start_f=25, active_end_f=75, seed=4)
    t0, t1 = 25 / FPS, 75 / FPS  # mouth moves only inside [1.0, 3.0] s
    sig = mouth_motion_signal(track)
    seg = detect_mouth_activity(sig, FPS)
    plan = build_alignment_plan(seg, speech_duration_s=1.0,
                                video_duration_s=track.duration_s)

    def overlap(a0, a1, b0, b1):
        return max(0.0, min(a1, b1) - max(a0, b0))

    aligned = overlap(plan.speech_start_s, plan.speech_start_s + 1.0, t0, t1)
    naive = overlap(0.0, 1.0, t0, t1)
    assert aligned > 0.8
    assert naive < 0.05
    assert aligned > naive


# ------------------------------------------------------------- wav helpers


def test_wav_round_trip(tmp_path):
    path = tmp_path / "tone.wav"
    tone = sine_tone(0.25, freq_hz=330.0)
    write_wav(path, tone)
    back, rate = read_wav(path)
    assert rate == 16_000
    assert np.array_equal(back, tone)


def test_wav_rejects_wrong_dtype(tmp_path):
    with pytest.raises(AudioFormatError):
        write_wav(tmp_path / "bad.wav", np.zeros(10, dtype=np.float64))


def test_wav_rejects_stereo(tmp_path):
    import wave

    path = tmp_path / "stereo.wav"
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(2)
        wf.setsampwidth(2)
        wf.setframerate(16_000)
        wf.writeframes(b"\x00\x00" * 64)
    with pytest.raises(AudioFormatError):
        read_wav(path)


def test_sine_tone_shape():
    tone = sine_tone(1.5)
    assert tone.size == 24_000
    assert tone.dtype == np.int16
    assert np.max(np.abs(tone)) <= round(0.3 * 32767)
