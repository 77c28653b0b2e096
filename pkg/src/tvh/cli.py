"""Command-line front end: ``tvh <subcommand> ...``.

stdout carries machine-readable ``key=value`` lines; diagnostics go to
stderr. Exit codes: 0 success, 2 usage, 3 data, 4 compute.
"""
from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import attacks, evaluation, store, synthetic
from .config import build_config
from .distance_boost import BoostModel, DistancePair, train
from .dtw_sync import sync_video
from .errors import DataError, TvhError
from .frame_hash import extract_frame_hashes
from .pipeline import compare, hash_video
from .video_io import RAW_MAGIC, Y4M_MAGIC, ingest, write_raw, write_y4m

log = logging.getLogger("tvh")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_COMPUTE = 0, 2, 3, 4


def _add_pipeline_flags(p):
    g = p.add_argument_group("pipeline")
    g.add_argument("--config", help="key=value config file")
    g.add_argument("--height", type=int)
    g.add_argument("--width", type=int)
    g.add_argument("--target-fps", type=Fraction, dest="fps")
    g.add_argument("--bins", type=int)
    g.add_argument("--segments", type=int)
    g.add_argument("--hs-lambda", type=float)
    g.add_argument("--hs-iters", type=int)
    g.add_argument("--dtw-band", type=int)
    g.add_argument("--seed", type=int, help="falls back to $TVH_SEED, then 0")
    g.add_argument("--source-fps", type=Fraction,
                   help="frame rate of PGM-directory inputs (default: target fps)")


def _config(args):
    keys = ("height", "width", "fps", "bins", "segments", "hs_lambda", "hs_iters",
            "dtw_band", "seed")
    overrides = {k: getattr(args, k, None) for k in keys}
    return build_config(overrides, getattr(args, "config", None))


def _load_video(path, cfg, args):
    return ingest(path, cfg.ingest, getattr(args, "source_fps", None))


def _load_ref(args, cfg):
    if store.is_store(args.ref):
        ids = store.list_ids(args.ref)
        ref_id = args.ref_id
        if ref_id is None:
            if len(ids) != 1:
                raise DataError(f"{args.ref} holds {len(ids)} records; pick one with --ref-id")
            ref_id = ids[0]
        return store.get(ref_id, args.ref)
    return _load_video(args.ref, cfg, args)


def _emit(lines, out=None):
    out = out or sys.stdout
    for line in lines:
        print(line, file=out)


# -- subcommands ---------------------------------------------------------------

def cmd_ingest(args):
    cfg = _config(args)
    v = _load_video(args.input, cfg, args)
    write_raw(v, args.out)
    _emit([f"frames={len(v)}", f"height={v.height}", f"width={v.width}", f"fps={v.fps}"])


def cmd_hash(args):
    cfg = _config(args)
    v = _load_video(args.video, cfg, args)
    rec = hash_video(v, cfg, source_id=args.id or v.source_id)
    store.put(rec, args.out)
    _emit([f"id={rec.source_id}", f"frames={rec.frame_hashes.frame_count}",
           f"flow_len={len(rec.flow_hash)}", f"static={int(rec.flow_hash.is_sentinel)}",
           f"fingerprint={rec.config_fingerprint}"])


def cmd_sync(args):
    cfg = _config(args)
    ref = _load_ref(args, cfg)
    hr = ref.frame_hashes if isinstance(ref, store.HashRecord) else extract_frame_hashes(ref)
    if isinstance(ref, store.HashRecord):
        store.check_fingerprint(ref, cfg.fingerprint())
    q = _load_video(args.query, cfg, args)
    res = sync_video(q, extract_frame_hashes(q), hr, cfg.dtw_band)
    write_raw(res.video, args.out)
    if args.dump_match is not None:
        lines = [f"{qi}\t{ri}" for qi, ri in res.matches.rows]
        if args.dump_match == "-":
            _emit(lines)
        else:
            Path(args.dump_match).write_text("\n".join(lines) + "\n")
    _emit([f"d_dtw={res.d_dtw!r}", f"intervals={len(res.matches)}", f"frames={len(res.video)}"],
          sys.stderr if args.dump_match == "-" else None)


def cmd_compare(args):
    cfg = _config(args)
    ref = _load_ref(args, cfg)
    q = _load_video(args.query, cfg, args)
    model = BoostModel.load(args.model) if args.model else None
    result = compare(ref, q, cfg, model=model, tau=args.tau, sync=not args.no_sync)
    _emit(result.lines())


def cmd_attack(args):
    cfg = _config(args)
    v = _load_video(args.input, cfg, args)
    spec = attacks.AttackSpec(
        kind=args.kind, rotation_deg=args.rotation, crop_fraction=args.crop,
        intensity_src=tuple(args.intensity_src), intensity_dst=tuple(args.intensity_dst),
        drop_fraction=args.drop, seed=cfg.seed)
    out = attacks.apply(v, spec)
    write_raw(out.video, args.out)
    if args.dump_dropped:
        Path(args.dump_dropped).write_text("".join(f"{d}\n" for d in out.dropped))
    _emit([f"frames={len(out.video)}", f"dropped={len(out.dropped)}"])


def read_pairs(path, split=None):
    """Parse a distances CSV (``ref_id,query_id,label,d_dtw,d_fh[,split]``)."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in lines[0].split(",")]
    need = ["ref_id", "query_id", "label", "d_dtw", "d_fh"]
    if header[:5] != need:
        raise DataError(f"{path}: header must start with {','.join(need)}")
    pairs = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        cols = [c.strip() for c in line.split(",")]
        if split and len(cols) > 5 and cols[5] != split:
            continue
        try:
            pairs.append(DistancePair(float(cols[3]), float(cols[4]), (cols[0], cols[1]), cols[2]))
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
    return pairs


def cmd_train(args):
    pairs = read_pairs(args.pairs, None if args.split == "all" else args.split)
    model = train(pairs, eps=args.eps, seed=build_config({"seed": args.seed}).seed)
    model.save(args.out)
    _emit([f"alpha1={model.alpha1!r}", f"alpha2={model.alpha2!r}", f"loss={model.train_loss!r}",
           f"pairs={len(pairs)}"])


def _corpus_entries(directory):
    entries = []
    for p in sorted(Path(directory).iterdir()):
        if p.is_dir():
            if any(c.suffix.lower() == ".pgm" for c in p.iterdir()):
                entries.append(p)
        elif p.is_file():
            with open(p, "rb") as fh:
                head = fh.read(9)
            if head.startswith(RAW_MAGIC) or head.startswith(Y4M_MAGIC):
                entries.append(p)
    return entries


def cmd_eval(args):
    cfg = _config(args)
    if args.synthetic:
        corpus = synthetic.corpus(args.synthetic, seed=cfg.seed)
    else:
        corpus = [_load_video(p, cfg, args) for p in _corpus_entries(args.corpus)]
    log.info("evaluating %d videos", len(corpus))
    spec = attacks.AttackSpec(kind=args.attack)
    cases = tuple(c.strip() for c in args.cases.split(","))
    metrics = tuple(m.strip() for m in args.metrics.split(","))
    report = evaluation.run_experiment(corpus, spec, cfg, cases=cases, metrics=metrics)
    report.write(args.out)
    lines = []
    for case in cases:
        for metric in metrics:
            lines.append(f"auc.{case}.{metric}={report.auc(case, metric)!r}")
    _emit(lines)


def cmd_synth(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = build_config({"seed": args.seed}).seed
    videos = synthetic.corpus(args.count, seed=seed, n_frames=args.frames)
    for v in videos:
        if args.format == "y4m":
            write_y4m(v, out / f"{v.source_id}.y4m")
        else:
            write_raw(v, out / f"{v.source_id}.tvh")
    _emit([f"videos={len(videos)}", f"frames={args.frames}"])


# -- parser ----------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="tvh", description="Twofold video hashing toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize a video into the raw container")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("hash", help="hash a video into a store")
    p.add_argument("--video", required=True)
    p.add_argument("--out", required=True, help="store file (created if missing)")
    p.add_argument("--id", help="record id (default: file stem)")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("sync", help="resynchronize a query to a reference")
    p.add_argument("--ref", required=True, help="reference video or hash store")
    p.add_argument("--ref-id")
    p.add_argument("--query", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-match", nargs="?", const="-", default=None, metavar="FILE",
                   help="write 'query_idx<TAB>ref_idx' lines (stdout when FILE is omitted)")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_sync)

    p = sub.add_parser("compare", help="score a query against a reference")
    p.add_argument("--ref", required=True, help="reference video or hash store")
    p.add_argument("--ref-id")
    p.add_argument("--query", required=True)
    p.add_argument("--model", help="boost model file")
    p.add_argument("--tau", type=float, help="decision threshold")
    p.add_argument("--no-sync", action="store_true", help="skip DTW synchronization")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("attack", help="apply a content-preserving attack")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", choices=attacks.KINDS, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-dropped", metavar="FILE")
    p.add_argument("--rotation", type=float, default=5.0)
    p.add_argument("--crop", type=float, default=0.75)
    p.add_argument("--intensity-src", type=float, nargs=2, default=(0.2, 0.8))
    p.add_argument("--intensity-dst", type=float, nargs=2, default=(0.0, 1.0))
    p.add_argument("--drop", type=float, default=0.3)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("train", help="fit distance-boosting weights")
    p.add_argument("--pairs", required=True, help="CSV ref_id,query_id,label,d_dtw,d_fh[,split]")
    p.add_argument("--out", required=True)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--split", choices=("all", "train", "test"), default="all")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run the synchronization / fusion experiment")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="directory of raw/Y4M files or PGM subdirectories")
    src.add_argument("--synthetic", type=int, metavar="N", help="use N seeded synthetic videos")
    p.add_argument("--attack", choices=attacks.KINDS, default=attacks.TEMPORAL)
    p.add_argument("--cases", default=",".join(evaluation.CASES))
    p.add_argument("--metrics", default=",".join(evaluation.METRICS))
    p.add_argument("--out", required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a seeded synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--frames", type=int, default=80)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("raw", "y4m"), default="raw")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except TvhError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
