"""Command-line interface: ingest | align | lexicon | synth | serve | stats | demo."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import alignment, api, audio, demo, landmarks, lexicon, synth
from .stats import McmcConfig, ScoreSample, best_compare, boxplot_summary, sem, t_test, z_test


def _print_json(obj) -> None:
    json.dump(obj, sys.stdout, indent=1)
    sys.stdout.write("\n")


def _load_score_sample(path: str) -> ScoreSample:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, list):
        return ScoreSample(Path(path).stem, tuple(float(x) for x in raw))
    return ScoreSample(raw.get("label", Path(path).stem),
                       tuple(float(x) for x in raw["values"]))


# ------------------------------------------------------------------ ingest


def cmd_ingest_validate(args) -> int:
    with open(args.track, encoding="utf-8") as fh:
        track = landmarks.parse_track(fh)
    gates = landmarks.GateConfig.from_toml(args.gates) if args.gates else landmarks.GateConfig()
    report = landmarks.validate_video(track, gates)
    _print_json(report.to_dict())
    return 0 if report.valid else 2


# ------------------------------------------------------------------- align


def cmd_align_plan(args) -> int:
    with open(args.track, encoding="utf-8") as fh:
        track = landmarks.parse_track(fh)
    cfg = alignment.ActivityConfig.from_toml(args.activity) if args.activity \
        else alignment.ActivityConfig()
    signal = alignment.mouth_motion_signal(track)
    segment = alignment.detect_mouth_activity(signal, track.fps, cfg)
    plan = alignment.build_alignment_plan(
        segment, args.speech_duration, track.duration_s, track.video_id)
    out = plan.to_dict()
    out["segment"] = {"start_frame": segment.start_frame, "end_frame": segment.end_frame,
                      "start_s": segment.start_s, "end_s": segment.end_s}
    if args.out:
        Path(args.out).write_text(json.dumps(out, indent=1), encoding="utf-8")
    else:
        _print_json(out)
    return 0


def cmd_align_render(args) -> int:
    with open(args.plan, encoding="utf-8") as fh:
        plan = alignment.AlignmentPlan.from_dict(json.load(fh))
    samples, rate = audio.read_wav(args.speech)
    padded = alignment.render_padded_audio(plan, samples, rate)
    audio.write_wav(args.out, padded, rate)
    print(f"wrote {args.out}: {padded.size} samples at {rate} Hz")
    return 0


# ----------------------------------------------------------------- lexicon


def _lexicon_tables(args):
    pron = lexicon.load_pron_dict(args.dict) if args.dict else lexicon.default_pron_dict()
    vmap = lexicon.load_viseme_map(args.map) if args.map else lexicon.default_viseme_map()
    return pron, vmap


def cmd_lexicon_clusters(args) -> int:
    pron, vmap = _lexicon_tables(args)
    if args.vocab:
        words = [e.text for e in lexicon.load_vocab(args.vocab) if e.protocol == "WL"]
    else:
        words = sorted(pron)
    clusters, skipped = lexicon.cluster_homophenes(words, pron, vmap)
    _print_json({
        "clusters": [{"viseme_key": c.viseme_key, "members": sorted(c.members)}
                     for c in clusters if len(c.members) > 1 or args.all],
        "singletons": sum(1 for c in clusters if len(c.members) == 1),
        "skipped": skipped,
    })
    return 0


def cmd_lexicon_distractors(args) -> int:
    pron, vmap = _lexicon_tables(args)
    if args.pool:
        pool = [e.text for e in lexicon.load_vocab(args.pool) if e.protocol == "WL"]
    else:
        pool = sorted(pron)
    picked = lexicon.generate_distractors(args.word, args.k, pool, args.seed, pron, vmap)
    _print_json({"answer": args.word, "distractors": picked})
    return 0


# ------------------------------------------------------------------- synth


def cmd_synth_manifest(args) -> int:
    vocab = lexicon.load_vocab(args.vocab)
    if args.protocol:
        vocab = [e for e in vocab if e.protocol == args.protocol]
    manifest = synth.build_manifest(
        vocab, args.videos.split(","), args.variations, args.accent, args.seed)
    manifest.save(args.out)
    print(f"wrote {args.out}: {len(manifest.entries)} entries "
          f"({manifest.protocol}, accent {manifest.accent_tag})")
    return 0


def cmd_synth_run(args) -> int:
    manifest = synth.DatasetManifest.load(args.manifest)
    vocab = lexicon.load_vocab(args.vocab)
    if args.mock:
        adapters = {
            "tts": synth.AdapterSpec(kind="tts", transport="mock", speed=args.speed),
            "lipsync": synth.AdapterSpec(kind="lipsync", transport="mock"),
        }
    else:
        if not (args.tts_cmd and args.lipsync_cmd):
            print("need --tts-cmd and --lipsync-cmd (or --mock)", file=sys.stderr)
            return 2
        adapters = {
            "tts": synth.AdapterSpec(kind="tts", transport="subprocess",
                                     command=args.tts_cmd, speed=args.speed),
            "lipsync": synth.AdapterSpec(kind="lipsync", transport="subprocess",
                                         command=args.lipsync_cmd),
        }
    synth.run_generation(
        manifest, adapters, synth.MediaStore(args.media), vocab, args.out,
        workers=args.workers, manifest_path=args.manifest)
    counts = manifest.counts()
    print(f"done {counts['done']}, failed {counts['failed']}, pending {counts['pending']}")
    return 0 if counts["failed"] == 0 else 1


def cmd_synth_status(args) -> int:
    manifest = synth.DatasetManifest.load(args.manifest)
    counts = manifest.counts()
    _print_json({"manifest_id": manifest.manifest_id, "protocol": manifest.protocol,
                 "accent_tag": manifest.accent_tag, "entries": len(manifest.entries),
                 "counts": counts,
                 "failed": [e.to_dict() for e in manifest.entries if e.status == "failed"]})
    return 0


# ------------------------------------------------------------------- stats


def cmd_stats_compare(args) -> int:
    a = _load_score_sample(args.a)
    b = _load_score_sample(args.b)
    if args.test == "z":
        result = z_test(a, b, args.alpha).to_dict()
    elif args.test == "t":
        result = t_test(a, b).to_dict()
    else:
        result = best_compare(a, b, McmcConfig(seed=args.seed)).to_dict()
    _print_json({"test": args.test, "n_a": a.n, "n_b": b.n, "result": result})
    return 0


def cmd_stats_summary(args) -> int:
    sample = _load_score_sample(args.scores)
    _print_json({"label": sample.label, "n": sample.n, "mean": sample.mean(),
                 "sem": sem(sample), "boxplot": boxplot_summary(sample).to_dict()})
    return 0


# ------------------------------------------------------------------- serve


def _parse_manifest_args(pairs: list[str]) -> dict[str, list[Path]]:
    out: dict[str, list[Path]] = {}
    for pair in pairs:
        tag, _, path = pair.partition("=")
        if not path:
            raise SystemExit(f"--manifest expects TAG=PATH, got {pair!r}")
        out.setdefault(tag, []).append(Path(path))
    return out


def cmd_serve(args) -> int:
    import uvicorn

    config = api.ApiConfig(
        store_root=Path(args.store),
        manifests=_parse_manifest_args(args.manifest or []),
        vocab_path=Path(args.vocab) if args.vocab else None,
        alpha=args.alpha,
        default_seed=args.seed,
    )
    app = api.create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_demo(args) -> int:
    root = Path(args.root)
    manifest_paths = demo.build_demo_dataset(root, seed=args.seed, workers=2)
    tags = {}
    for tag in ("SynthAE", "SynthIE"):
        tags[tag] = [manifest_paths[p] for p in sorted(manifest_paths)]
    print(f"demo dataset under {root}: "
          + ", ".join(f"{p}={manifest_paths[p]}" for p in sorted(manifest_paths)))
    if args.no_serve:
        return 0
    import uvicorn

    config = api.ApiConfig(
        store_root=root / "store",
        manifests=tags,
        default_seed=args.seed,
    )
    app = api.create_app(config)
    print(f"serving on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liptrain",
        description="Lipreading training platform: dataset generation, quiz delivery, analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="landmark track tools")
    ingest_sub = p.add_subparsers(dest="subcommand", required=True)
    v = ingest_sub.add_parser("validate", help="gate a track; exit 0 valid, 2 invalid")
    v.add_argument("track")
    v.add_argument("--gates", help="TOML file with a [gates] table")
    v.set_defaults(func=cmd_ingest_validate)

    p = sub.add_parser("align", help="speech-to-video alignment")
    align_sub = p.add_subparsers(dest="subcommand", required=True)
    a = align_sub.add_parser("plan", help="detect mouth activity and place speech")
    a.add_argument("track")
    a.add_argument("--speech-duration", type=float, required=True)
    a.add_argument("--activity", help="TOML file with an [activity] table")
    a.add_argument("-o", "--out")
    a.set_defaults(func=cmd_align_plan)
    r = align_sub.add_parser("render", help="silence-pad speech to the video timeline")
    r.add_argument("plan")
    r.add_argument("speech")
    r.add_argument("-o", "--out", required=True)
    r.set_defaults(func=cmd_align_render)

    p = sub.add_parser("lexicon", help="viseme and vocabulary tools")
    lex_sub = p.add_subparsers(dest="subcommand", required=True)
    c = lex_sub.add_parser("clusters", help="homophene clusters")
    c.add_argument("--vocab", help="vocabulary JSON; defaults to whole dictionary")
    c.add_argument("--dict")
    c.add_argument("--map")
    c.add_argument("--all", action="store_true", help="include singleton clusters")
    c.set_defaults(func=cmd_lexicon_clusters)
    d = lex_sub.add_parser("distractors", help="pick wrong options for a word")
    d.add_argument("word")
    d.add_argument("-k", type=int, default=4)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--pool", help="vocabulary JSON to draw from")
    d.add_argument("--dict")
    d.add_argument("--map")
    d.set_defaults(func=cmd_lexicon_distractors)

    p = sub.add_parser("synth", help="dataset generation")
    synth_sub = p.add_subparsers(dest="subcommand", required=True)
    m = synth_sub.add_parser("manifest", help="build a label x variation manifest")
    m.add_argument("vocab")
    m.add_argument("--videos", required=True, help="comma-separated driving video ids")
    m.add_argument("--variations", type=int, default=10)
    m.add_argument("--accent", default="AE")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--protocol", choices=lexicon.PROTOCOLS)
    m.add_argument("-o", "--out", required=True)
    m.set_defaults(func=cmd_synth_manifest)
    r = synth_sub.add_parser("run", help="execute tts -> align -> lipsync per entry")
    r.add_argument("manifest")
    r.add_argument("--media", required=True, help="root with tracks/ and videos/")
    r.add_argument("--out", required=True)
    r.add_argument("--vocab", required=True)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--speed", type=float, default=1.0, choices=synth.ALLOWED_SPEEDS)
    r.add_argument("--mock", action="store_true", help="use built-in mock adapters")
    r.add_argument("--tts-cmd", help="subprocess template with {text} {out}")
    r.add_argument("--lipsync-cmd", help="subprocess template with {video} {audio} {out}")
    r.set_defaults(func=cmd_synth_run)
    s = synth_sub.add_parser("status", help="manifest progress")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_synth_status)

    p = sub.add_parser("stats", help="score statistics")
    stats_sub = p.add_subparsers(dest="subcommand", required=True)
    c = stats_sub.add_parser("compare", help="two-group test")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--test", choices=("z", "t", "best"), default="z")
    c.add_argument("--alpha", type=float, default=0.1)
    c.add_argument("--seed", type=int, default=1234, help="sampler seed for --test best")
    c.set_defaults(func=cmd_stats_compare)
    su = stats_sub.add_parser("summary", help="SEM and boxplot summary")
    su.add_argument("scores")
    su.set_defaults(func=cmd_stats_summary)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store", required=True)
    p.add_argument("--manifest", action="append", metavar="TAG=PATH",
                   help="register a manifest under a dataset tag (repeatable)")
    p.add_argument("--vocab")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--seed", type=int, help="fix session sampling for reproducible demos")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("demo", help="build a mock dataset and serve it")
    p.add_argument("--root", default="liptrain-demo")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-serve", action="store_true", help="build the dataset only")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
