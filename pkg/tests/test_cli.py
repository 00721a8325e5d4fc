"""Command-line interface tests.

Commands run in-process through cli.main so exit codes and printed JSON
are asserted directly; no subprocesses except where the command itself
spawns them.
"""
from __future__ import annotations

import json

import pytest

from liptrain import audio, cli, demo, landmarks, lexicon, synth


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run_cli(capsys, *argv)
    return code, json.loads(out)


@pytest.fixture()
def track_file(tmp_path):
    track = demo.synthetic_track("clip", fps=25.0, duration_s=4.0, seed=0)
    path = tmp_path / "clip.jsonl"
    path.write_text(landmarks.serialize_track(track), encoding="utf-8")
    return path


@pytest.fixture()
def sparse_track_file(tmp_path, track_file):
    """Same track with every other frame lacking a face."""
    lines = track_file.read_text().splitlines()
    out = [lines[0]]
    for line in lines[1:]:
        rec = json.loads(line)
        if rec["frame"] % 2:
            rec = {"frame": rec["frame"], "t": rec["t"]}
        out.append(json.dumps(rec))
    path = tmp_path / "sparse.jsonl"
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def vocab_file(tmp_path):
    entries = [lexicon.VocabEntry(f"w{k}", w, "WL")
               for k, w in enumerate(["mat", "bat", "pat", "cat", "hat", "sat"])]
    path = tmp_path / "vocab.json"
    path.write_text(json.dumps([e.to_dict() for e in entries]))
    return path


# ------------------------------------------------------------------ ingest


def test_ingest_validate_valid_track(capsys, track_file):
    code, doc = run_json(capsys, "ingest", "validate", str(track_file))
    assert code == 0
    assert doc["valid"] is True
    assert doc["video_id"] == "clip"
    assert doc["reasons"] == []


def test_ingest_validate_invalid_track_exits_2(capsys, sparse_track_file):
    code, doc = run_json(capsys, "ingest", "validate", str(sparse_track_file))
    assert code == 2
    assert doc["valid"] is False
    assert landmarks.LOW_FACE_COVERAGE in doc["reasons"]


def test_ingest_validate_custom_gates(capsys, tmp_path, track_file):
    gates = tmp_path / "gates.toml"
    gates.write_text("[gates]\nmin_face_coverage = 2.0\n")
    code, doc = run_json(capsys, "ingest", "validate", str(track_file),
                         "--gates", str(gates))
    assert code == 2
    assert doc["reasons"] == [landmarks.LOW_FACE_COVERAGE]


# ------------------------------------------------------------------- align


def test_align_plan_prints_plan_with_segment(capsys, track_file):
    code, doc = run_json(capsys, "align", "plan", str(track_file),
                         "--speech-duration", "2.0")
    assert code == 0
    assert doc["video_id"] == "clip"
    assert doc["speech_duration_s"] == 2.0
    total = doc["lead_silence_s"] + doc["speech_duration_s"] + doc["trail_silence_s"]
    assert total == pytest.approx(4.0, abs=1 / 25.0)
    assert doc["segment"]["end_frame"] > doc["segment"]["start_frame"]


def test_align_plan_writes_file(capsys, tmp_path, track_file):
    out = tmp_path / "plan.json"
    code, stdout = run_cli(capsys, "align", "plan", str(track_file),
                           "--speech-duration", "1.5", "-o", str(out))
    assert code == 0 and stdout == ""
    doc = json.loads(out.read_text())
    assert doc["speech_duration_s"] == 1.5


def test_align_render_pads_to_video_length(capsys, tmp_path, track_file):
    plan_path = tmp_path / "plan.json"
    run_cli(capsys, "align", "plan", str(track_file),
            "--speech-duration", "2.0", "-o", str(plan_path))
    speech_path = tmp_path / "speech.wav"
    audio.write_wav(speech_path, audio.sine_tone(2.0))
    out_path = tmp_path / "padded.wav"
    code, stdout = run_cli(capsys, "align", "render", str(plan_path),
                           str(speech_path), "-o", str(out_path))
    assert code == 0
    assert "wrote" in stdout
    padded, rate = audio.read_wav(out_path)
    assert padded.size == pytest.approx(4.0 * rate, abs=rate / 25)


# ----------------------------------------------------------------- lexicon


def test_lexicon_clusters_from_vocab(capsys, vocab_file):
    code, doc = run_json(capsys, "lexicon", "clusters", "--vocab", str(vocab_file))
    assert code == 0
    members = [c["members"] for c in doc["clusters"]]
    assert ["bat", "mat", "pat"] in members
    assert all(len(m) > 1 for m in members)
    assert doc["singletons"] >= 1
    assert doc["skipped"] == []


def test_lexicon_clusters_all_includes_singletons(capsys, vocab_file):
    code, doc = run_json(capsys, "lexicon", "clusters", "--vocab", str(vocab_file),
                         "--all")
    sizes = sorted(len(c["members"]) for c in doc["clusters"])
    assert sizes[0] == 1  # singletons now listed
    total = sum(len(c["members"]) for c in doc["clusters"])
    assert total == 6


def test_lexicon_distractors(capsys, vocab_file):
    code, doc = run_json(capsys, "lexicon", "distractors", "mat", "-k", "2",
                         "--seed", "3", "--pool", str(vocab_file))
    assert code == 0
    assert doc["answer"] == "mat"
    assert len(doc["distractors"]) == 2
    assert set(doc["distractors"]) <= {"bat", "pat", "cat", "hat", "sat"}
    # homophenes of "mat" outrank everything else
    assert set(doc["distractors"]) == {"bat", "pat"}


# ------------------------------------------------------------------- synth


@pytest.fixture()
def media_root(tmp_path):
    root = tmp_path / "media"
    demo.build_demo_media(root, n_videos=2, seed=0)
    return root


def test_synth_manifest_run_status(capsys, tmp_path, vocab_file, media_root):
    manifest_path = tmp_path / "wl.json"
    code, stdout = run_cli(capsys, "synth", "manifest", str(vocab_file),
                           "--videos", "drv00,drv01", "--variations", "2",
                           "--seed", "4", "-o", str(manifest_path))
    assert code == 0
    assert "12 entries" in stdout

    code, doc = run_json(capsys, "synth", "status", str(manifest_path))
    assert code == 0
    assert doc["counts"] == {"pending": 12, "done": 0, "failed": 0}
    assert doc["protocol"] == "WL"

    code, stdout = run_cli(capsys, "synth", "run", str(manifest_path),
                           "--media", str(media_root), "--out", str(tmp_path / "gen"),
                           "--vocab", str(vocab_file), "--mock")
    assert code == 0
    assert "done 12, failed 0, pending 0" in stdout

    # run rewrote the manifest in place
    code, doc = run_json(capsys, "synth", "status", str(manifest_path))
    assert doc["counts"]["done"] == 12
    assert doc["failed"] == []
    manifest = synth.DatasetManifest.load(manifest_path)
    assert all(e.checksum for e in manifest.entries)


def test_synth_run_without_adapters_exits_2(capsys, tmp_path, vocab_file, media_root):
    manifest_path = tmp_path / "wl.json"
    run_cli(capsys, "synth", "manifest", str(vocab_file), "--videos", "drv00",
            "--variations", "1", "-o", str(manifest_path))
    code = cli.main(["synth", "run", str(manifest_path), "--media", str(media_root),
                     "--out", str(tmp_path / "gen"), "--vocab", str(vocab_file)])
    assert code == 2


def test_synth_manifest_protocol_filter(capsys, tmp_path):
    entries = [lexicon.VocabEntry("w1", "mat", "WL"),
               lexicon.VocabEntry("s1", "how are you", "SL", context_tag="intro")]
    vocab_path = tmp_path / "mixed.json"
    vocab_path.write_text(json.dumps([e.to_dict() for e in entries]))
    out = tmp_path / "m.json"
    code, stdout = run_cli(capsys, "synth", "manifest", str(vocab_path),
                           "--videos", "drv00", "--variations", "1",
                           "--protocol", "WL", "-o", str(out))
    assert code == 0
    manifest = synth.DatasetManifest.load(out)
    assert [e.label_id for e in manifest.entries] == ["w1"]


# ------------------------------------------------------------------- stats


@pytest.fixture()
def score_files(tmp_path):
    a = tmp_path / "synth.json"
    a.write_text(json.dumps([14, 16, 12, 18, 15, 13, 17, 14]))
    b = tmp_path / "real.json"
    b.write_text(json.dumps({"label": "real-cohort",
                             "values": [11, 13, 10, 15, 12, 11, 14, 12]}))
    return a, b


def test_stats_compare_z(capsys, score_files):
    a, b = score_files
    code, doc = run_json(capsys, "stats", "compare", str(a), str(b),
                         "--test", "z", "--alpha", "0.1")
    assert code == 0
    assert doc["test"] == "z" and doc["n_a"] == 8 and doc["n_b"] == 8
    assert set(doc["result"]) == {"z", "p", "alpha", "accepted_range", "reject_null"}
    assert doc["result"]["alpha"] == 0.1


def test_stats_compare_t(capsys, score_files):
    a, b = score_files
    code, doc = run_json(capsys, "stats", "compare", str(a), str(b), "--test", "t")
    assert code == 0
    assert set(doc["result"]) == {"t", "df", "p"}


def test_stats_compare_best_is_seed_deterministic(capsys, score_files):
    a, b = score_files
    code, doc1 = run_json(capsys, "stats", "compare", str(a), str(b),
                          "--test", "best", "--seed", "77")
    assert code == 0
    assert doc1["result"]["converged"] in (True, False)
    _, doc2 = run_json(capsys, "stats", "compare", str(a), str(b),
                       "--test", "best", "--seed", "77")
    assert doc1 == doc2


def test_stats_summary_list_and_labeled_files(capsys, score_files):
    a, b = score_files
    code, doc = run_json(capsys, "stats", "summary", str(a))
    assert code == 0
    assert doc["label"] == "synth"  # falls back to the file stem
    assert doc["n"] == 8
    assert set(doc["boxplot"]) == {"median", "q1", "q3", "whisker_low",
                                   "whisker_high", "outliers"}
    _, doc = run_json(capsys, "stats", "summary", str(b))
    assert doc["label"] == "real-cohort"


# -------------------------------------------------------------------- demo


def test_demo_no_serve_builds_dataset(capsys, tmp_path):
    root = tmp_path / "demo"
    code, stdout = run_cli(capsys, "demo", "--root", str(root), "--no-serve",
                           "--seed", "1")
    assert code == 0
    assert str(root) in stdout
    for name in ("wl", "sl", "mwis"):
        manifest = synth.DatasetManifest.load(root / "manifests" / f"{name}.json")
        counts = manifest.counts()
        assert counts["failed"] == 0 and counts["pending"] == 0


# ------------------------------------------------------------------ parser


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        cli.main([])


def test_parser_requires_speech_duration(track_file):
    with pytest.raises(SystemExit):
        cli.main(["align", "plan", str(track_file)])


def test_serve_parser_collects_manifest_pairs():
    args = cli.build_parser().parse_args(
        ["serve", "--store", "s", "--manifest", "synth=wl.json",
         "--manifest", "synth=sl.json", "--manifest", "real=r.json"])
    assert args.func is cli.cmd_serve
    pairs = cli._parse_manifest_args(args.manifest)
    assert {tag: [str(p) for p in paths] for tag, paths in pairs.items()} == {
        "synth": ["wl.json", "sl.json"], "real": ["r.json"]}


def test_serve_parser_rejects_bad_manifest_pair():
    with pytest.raises(SystemExit):
        cli._parse_manifest_args(["missing-equals"])


def test_synth_run_rejects_bad_speed():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(
            ["synth", "run", "m.json", "--media", "m", "--out", "o",
             "--vocab", "v.json", "--speed", "1.25"])
