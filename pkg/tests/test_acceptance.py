"""Release acceptance suite.

One test per criterion, run in order; each prints a single
[PASS]/[FAIL] line directly to the terminal (bypassing capture) so the
outcome of every criterion is visible in any pytest run:

  C01  z-based p-values and the alpha=0.1 accepted range
  C02  two-sided t p-value band across plausible degrees of freedom
  C03  BEST calibration: null coverage, gap recovery, convergence
  C04  HDI endpoints on 200k standard-normal draws
  C05  alignment boundaries, timeline conservation, digital silence
  C06  homophene equality and 1000-word clustering partition
  C07  manifest size arithmetic
  C08  end-to-end mock pipeline with log-reproducible scores
  C09  response blinding for unanswered items
  C10  crash durability across 50 randomized kill points
"""
from __future__ import annotations

import hashlib
import json
import multiprocessing
import random
import socket
import time
import urllib.error
import urllib.request
import warnings
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from liptrain import api, demo, lexicon, quiz, synth
from liptrain.alignment import (
    ActivityConfig,
    build_alignment_plan,
    detect_mouth_activity,
    mouth_motion_signal,
    render_padded_audio,
)
from liptrain.audio import SAMPLE_RATE, sine_tone
from liptrain.stats import (
    McmcConfig,
    ScoreSample,
    SmallSampleWarning,
    best_compare,
    hdi,
    p_from_z,
    student_t_sf_two_sided,
    z_test,
)


@pytest.fixture()
def check(capsys):
    """Report one [PASS]/[FAIL] line per criterion on the real terminal,
    bypassing output capture, then assert."""

    def _check(ok: bool, label: str, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}"
        if detail:
            line += f": {detail}"
        with capsys.disabled():
            print("\n" + line, flush=True)
        assert ok, line

    return _check


def make_entries(protocol: str, n: int) -> list[lexicon.VocabEntry]:
    if protocol == "WL":
        return [lexicon.VocabEntry(f"w{i:03d}", f"word{i:03d}", "WL")
                for i in range(n)]
    if protocol == "SL":
        return [lexicon.VocabEntry(f"s{i:03d}", f"sentence number {i} here", "SL",
                                   context_tag="general") for i in range(n)]
    return [lexicon.VocabEntry(f"m{i:03d}", f"speaker {i} says the word now",
                               "MWIS", masked_index=4) for i in range(n)]


# ------------------------------------------------------------ C01, C02


def test_c01_z_pvalues_and_accepted_range(check):
    t0 = time.perf_counter()
    targets = [(1.758, 0.0786), (2.384, 0.0171), (0.378, 0.705)]
    errs = [abs(p_from_z(z) - want) for z, want in targets]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallSampleWarning)
        result = z_test(ScoreSample("a", (1.0, 2.0, 3.0, 4.0)),
                        ScoreSample("b", (2.0, 3.0, 4.0, 5.0)), alpha=0.1)
    lo, hi = result.accepted_range
    range_ok = abs(lo + 1.645) <= 0.001 and abs(hi - 1.645) <= 0.001
    elapsed = time.perf_counter() - t0
    check(all(e <= 0.001 for e in errs) and range_ok and elapsed < 1.0,
          "C01 z p-values and accepted range",
          f"max p err {max(errs):.2e}, range ({lo:.4f}, {hi:.4f}), {elapsed:.2f} s")


def test_c02_t_pvalue_band(check):
    t0 = time.perf_counter()
    ps = [student_t_sf_two_sided(1.676, df) for df in range(45, 99)]
    in_band = all(0.095 <= p <= 0.115 for p in ps)
    elapsed = time.perf_counter() - t0
    check(in_band and elapsed < 1.0, "C02 t p-value band",
          f"p in [{min(ps):.4f}, {max(ps):.4f}] over df 45..98, {elapsed:.2f} s")


# ------------------------------------------------------------------ C03


def test_c03_best_calibration(check):
    t0 = time.perf_counter()
    null_hits = 0
    for r in range(100):
        rng = np.random.default_rng([10, r])
        # identical groups: both receive the same sample, so the true
        # difference is exactly zero rather than merely zero in expectation
        values = tuple(10.0 + 2.0 * rng.standard_normal(50))
        lo, hi = best_compare(ScoreSample("a", values), ScoreSample("b", values),
                              McmcConfig(seed=r)).hdi95
        if lo <= 0.0 <= hi:
            null_hits += 1

    gap_hits = 0
    for r in range(100):
        rng = np.random.default_rng([20, r])
        a = ScoreSample("a", tuple(4.0 + rng.standard_normal(50)))
        b = ScoreSample("b", tuple(rng.standard_normal(50)))
        lo, hi = best_compare(a, b, McmcConfig(seed=1000 + r)).hdi95
        excludes_zero = lo > 0.0 or hi < 0.0
        if excludes_zero and lo - 0.3 <= 4.0 <= hi + 0.3:
            gap_hits += 1

    rng = np.random.default_rng(99)
    a = ScoreSample("a", tuple(12.0 + 3.0 * rng.standard_normal(50)))
    b = ScoreSample("b", tuple(10.0 + 3.0 * rng.standard_normal(50)))
    big = best_compare(a, b, McmcConfig(seed=7, chains=4, draws=50_000))
    max_rhat = max(big.rhat.values())

    elapsed = time.perf_counter() - t0
    check(null_hits >= 99 and gap_hits >= 95 and max_rhat < 1.05
          and elapsed < 300.0,
          "C03 BEST calibration",
          f"null coverage {null_hits}/100, gap recovery {gap_hits}/100, "
          f"max rhat {max_rhat:.4f} at 4x50k, {elapsed:.1f} s")


# ------------------------------------------------------------------ C04


def test_c04_hdi_oracle(check):
    draws = np.random.default_rng(2024).standard_normal(200_000)
    lo, hi = hdi(draws, 0.95)
    check(abs(lo + 1.96) <= 0.05 and abs(hi - 1.96) <= 0.05,
          "C04 HDI on 200k normal draws", f"({lo:.4f}, {hi:.4f})")


# ------------------------------------------------------------------ C05


def test_c05_alignment_exactness(check):
    cfg = ActivityConfig()
    rng = random.Random(5050)
    boundary_ok = conserve_ok = silence_ok = 0
    runs = 100
    for r in range(runs):
        fps = rng.choice([24.0, 25.0, 30.0])
        duration_s = rng.uniform(3.0, 6.0)
        n = round(fps * duration_s)
        length = rng.randint(25, max(26, n - 20))
        start = rng.randint(6, max(7, n - 8 - length))
        end = start + length
        track = demo.synthetic_track(f"t{r}", fps=fps, duration_s=duration_s,
                                     active_start_f=start, active_end_f=end,
                                     seed=r)
        segment = detect_mouth_activity(mouth_motion_signal(track), fps, cfg)
        if (abs(segment.start_frame - start) <= cfg.window_frames
                and abs(segment.end_frame - end) <= cfg.window_frames):
            boundary_ok += 1

        speech_s = rng.uniform(0.3, duration_s - 0.2)
        plan = build_alignment_plan(segment, speech_s, track.duration_s,
                                    track.video_id)
        if abs(plan.video_duration_s - track.duration_s) <= 1.0 / fps:
            conserve_ok += 1

        speech = sine_tone(speech_s)
        padded = render_padded_audio(plan, speech, SAMPLE_RATE)
        lead_n = round(plan.lead_silence_s * SAMPLE_RATE)
        if (not padded[:lead_n].any()
                and not padded[lead_n + speech.size:].any()
                and padded[lead_n:lead_n + speech.size].any()):
            silence_ok += 1

    check(boundary_ok == runs and conserve_ok == runs and silence_ok == runs,
          "C05 alignment exactness",
          f"boundaries {boundary_ok}/{runs}, timeline {conserve_ok}/{runs}, "
          f"silence {silence_ok}/{runs}")


# ------------------------------------------------------------------ C06


def test_c06_homophenes_and_partition(check):
    pron = lexicon.default_pron_dict()
    vmap = lexicon.default_viseme_map()
    seq = {w: lexicon.viseme_sequence(w, pron, vmap)
           for w in ("mat", "bat", "pat", "cat")}
    equality = (seq["mat"] == seq["bat"] == seq["pat"]
                and seq["mat"] != seq["cat"])

    words = sorted(pron)[:1000]
    clusters, skipped = lexicon.cluster_homophenes(words, pron, vmap)
    sizes = [len(c.members) for c in clusters]
    union = set()
    for c in clusters:
        union.update(c.members)
    partition = (not skipped and sum(sizes) == 1000 and union == set(words))

    check(equality and partition, "C06 homophene semantics",
          f"mat=bat=pat != cat; {len(clusters)} clusters partition 1000 words")


# ------------------------------------------------------------------ C07


def test_c07_manifest_arithmetic(check):
    vids = [f"drv{i:02d}" for i in range(10)]
    sizes = {}
    for protocol, n_labels in (("WL", 80), ("SL", 60), ("MWIS", 70)):
        manifest = synth.build_manifest(make_entries(protocol, n_labels), vids,
                                        10, "AE", rng_seed=1)
        sizes[protocol] = len(manifest.entries)
    total = sum(sizes.values())
    check(sizes == {"WL": 800, "SL": 600, "MWIS": 700} and total == 2100,
          "C07 manifest arithmetic",
          f"WL {sizes['WL']}, SL {sizes['SL']}, MWIS {sizes['MWIS']}, "
          f"total {total}")


# ------------------------------------------------------------------ C08


def test_c08_end_to_end_mock_pipeline(tmp_path, check):
    t0 = time.perf_counter()
    vocab = [e for e in lexicon.default_vocab() if e.protocol == "WL"]
    assert len(vocab) == 30
    video_ids = demo.build_demo_media(tmp_path / "media", n_videos=3, seed=0)
    manifest = synth.build_manifest(vocab, video_ids, 3, "AE", rng_seed=2)
    synth.run_generation(
        manifest, {"tts": synth.AdapterSpec(kind="tts", transport="mock"),
                   "lipsync": synth.AdapterSpec(kind="lipsync", transport="mock")},
        synth.MediaStore(tmp_path / "media"), vocab, tmp_path / "gen",
        backoff_s=0.0)
    counts = manifest.counts()
    complete = counts == {"pending": 0, "done": 90, "failed": 0}

    manifest_path = tmp_path / "wl.json"
    manifest.save(manifest_path)
    vocab_path = tmp_path / "vocab.json"
    vocab_path.write_text(json.dumps([e.to_dict() for e in vocab]))
    config = api.ApiConfig(store_root=tmp_path / "store",
                           manifests={"mockbatch": [manifest_path]},
                           vocab_path=vocab_path, default_seed=None)
    sessions_ok = True
    scores = {}
    with TestClient(api.create_app(config)) as client:
        store = client.app.state.store
        for k, n_correct in enumerate((20, 10, 0)):
            resp = client.post("/sessions", json={
                "user_id": f"user{k}", "protocol": "WL",
                "dataset_tag": "mockbatch", "seed": 100 + k})
            sid = resp.json()["session"]["session_id"]
            items = store.resume_session(sid).items
            sessions_ok &= resp.status_code == 201 and len(items) == 20
            sessions_ok &= len({i.label_id for i in items}) == 20
            for j, item in enumerate(items):
                answer = item.correct_answer if j < n_correct else "wrong"
                r = client.post(f"/sessions/{sid}/answers",
                                json={"item_id": item.item_id, "answer": answer})
                sessions_ok &= r.status_code == 201
            scores[sid] = client.get(f"/sessions/{sid}/score").json()["score"]

    replayed = quiz.scores_from_log(tmp_path / "store" / "attempts.log")
    reproducible = replayed == scores and sorted(scores.values()) == [0, 10, 20]
    elapsed = time.perf_counter() - t0
    check(complete and sessions_ok and reproducible and elapsed < 60.0,
          "C08 end-to-end mock pipeline",
          f"90/90 generated, 3 sessions, log replay matches "
          f"{sorted(scores.values())}, {elapsed:.1f} s")


# ------------------------------------------------------------------ C09


def mwis_blinding_vocab() -> list[lexicon.VocabEntry]:
    words = ["kitchen", "window", "garden", "bottle", "doctor", "yellow",
             "summer", "winter", "market", "ticket", "jacket", "pillow",
             "carpet", "mirror", "candle", "basket", "button", "hammer",
             "ladder", "pencil", "rocket", "saddle", "tunnel", "wallet"]
    return [lexicon.VocabEntry(f"m{i:03d}", f"please point to the {w} now",
                               "MWIS", masked_index=4)
            for i, w in enumerate(words)]


def test_c09_response_blinding(tmp_path, check):
    tag = "batch-synthetic"
    vocab = make_entries("WL", 40) + make_entries("SL", 24) + mwis_blinding_vocab()
    vocab_path = tmp_path / "vocab.json"
    vocab_path.write_text(json.dumps([e.to_dict() for e in vocab]))
    vids = tmp_path / "vids"
    vids.mkdir()
    paths = []
    for protocol in ("WL", "SL", "MWIS"):
        entries = []
        for e in vocab:
            if e.protocol != protocol:
                continue
            p = vids / f"{e.label_id}.mockvid"
            p.write_bytes(b"\x00" * 32)
            entries.append(synth.ManifestEntry(
                e.label_id, "v00", "drv00", generated_video_path=str(p),
                checksum=hashlib.sha256(e.label_id.encode()).hexdigest(),
                status="done"))
        manifest = synth.DatasetManifest(f"{protocol.lower()}-x", protocol,
                                         "AE", entries)
        mp_path = tmp_path / f"{protocol.lower()}.json"
        manifest.save(mp_path)
        paths.append(mp_path)

    config = api.ApiConfig(store_root=tmp_path / "store",
                           manifests={tag: paths}, vocab_path=vocab_path,
                           default_seed=3)
    leaks = []
    with TestClient(api.create_app(config)) as client:
        for protocol in ("WL", "SL", "MWIS"):
            resp = client.post("/sessions", json={
                "user_id": f"b-{protocol}", "protocol": protocol,
                "dataset_tag": tag})
            sid = resp.json()["session"]["session_id"]
            store = client.app.state.store
            answers = [i.correct_answer for i in store.resume_session(sid).items]
            for text in (resp.text, client.get(f"/sessions/{sid}/next").text,
                         client.get(f"/sessions/{sid}").text):
                for marker in (tag, "dataset_tag", "label_id", "video_path",
                               '"real"', '"synthetic"', "correct"):
                    if marker in text:
                        leaks.append(f"{protocol}: marker {marker!r}")
                if protocol == "MWIS":
                    leaks += [f"MWIS: answer {a!r}" for a in answers if a in text]
    check(not leaks, "C09 response blinding",
          "no answer strings, no provenance markers" if not leaks
          else "; ".join(leaks[:4]))


# ------------------------------------------------------------------ C10


def _serve_store(store_root, manifest_path, vocab_path, port):
    import uvicorn

    config = api.ApiConfig(store_root=store_root,
                           manifests={"batch": [manifest_path]},
                           vocab_path=vocab_path, default_seed=None)
    uvicorn.run(api.create_app(config), host="127.0.0.1", port=port,
                log_level="critical")


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _request(port, method, path, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(f"http://127.0.0.1:{port}{path}", data=data,
                                 method=method,
                                 headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req, timeout=5) as resp:
        return resp.status, json.loads(resp.read().decode())


def _start_server(args) -> tuple:
    ctx = multiprocessing.get_context("fork")
    for _ in range(3):
        port = _free_port()
        proc = ctx.Process(target=_serve_store, args=(*args, port), daemon=True)
        proc.start()
        deadline = time.monotonic() + 15.0
        while time.monotonic() < deadline:
            try:
                if _request(port, "GET", "/health")[0] == 200:
                    return proc, port
            except (urllib.error.URLError, OSError):
                time.sleep(0.05)
        proc.kill()
        proc.join()
    raise RuntimeError("server failed to start")


def test_c10_crash_durability(tmp_path, check):
    vocab = make_entries("WL", 40)
    vocab_path = tmp_path / "vocab.json"
    vocab_path.write_text(json.dumps([e.to_dict() for e in vocab]))
    vids = tmp_path / "vids"
    vids.mkdir()
    entries = []
    for e in vocab:
        p = vids / f"{e.label_id}.mockvid"
        p.write_bytes(b"\x00" * 16)
        entries.append(synth.ManifestEntry(
            e.label_id, "v00", "drv00", generated_video_path=str(p),
            checksum=hashlib.sha256(e.label_id.encode()).hexdigest(),
            status="done"))
    manifest_path = tmp_path / "wl.json"
    synth.DatasetManifest("wl-x", "WL", "AE", entries).save(manifest_path)
    server_args = (tmp_path / "store", manifest_path, vocab_path)

    rng = random.Random(77)
    expected: dict[str, list[str]] = {}
    current_sid = None
    next_user = 0
    kill_points = 50
    survived = 0

    for cycle in range(kill_points + 1):
        proc, port = _start_server(server_args)
        try:
            # every previously acknowledged attempt must have survived the kill
            ok = True
            for sid, item_ids in expected.items():
                status, doc = _request(port, "GET", f"/sessions/{sid}")
                ok &= status == 200 and doc["cursor"] == len(item_ids)
            if cycle > 0 and ok:
                survived += 1
            if cycle == kill_points:
                break
            for _ in range(rng.randint(1, 3)):
                if current_sid is None or len(expected[current_sid]) == 20:
                    status, doc = _request(port, "POST", "/sessions", {
                        "user_id": f"u{next_user}", "protocol": "WL",
                        "dataset_tag": "batch"})
                    assert status == 201
                    next_user += 1
                    current_sid = doc["session"]["session_id"]
                    expected[current_sid] = []
                status, doc = _request(port, "GET",
                                       f"/sessions/{current_sid}/next")
                item_id = doc["item"]["item_id"]
                status, _ = _request(port, "POST",
                                     f"/sessions/{current_sid}/answers",
                                     {"item_id": item_id, "answer": "x"})
                assert status == 201  # acknowledged: must survive the kill
                expected[current_sid].append(item_id)
        finally:
            proc.kill()
            proc.join(timeout=10)

    total = sum(len(v) for v in expected.values())
    log_lines = (tmp_path / "store" / "attempts.log").read_text().splitlines()
    check(survived == kill_points and len(log_lines) == total,
          "C10 crash durability",
          f"{survived}/{kill_points} kill points recovered, "
          f"{total} acknowledged attempts, {len(log_lines)} log records")
