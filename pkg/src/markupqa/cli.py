"""Command-line entry point: ``markupqa <subcommand> ...``.

Exit codes: 0 success, 1 validation findings, 2 bad configuration,
3 malformed input records, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from . import __version__
from .evaluation import DEFAULT_TAU, evaluate_corpus, load_predictions
from .generation import (
    FAMILIES, MAX_COUNT, MAX_TARGETS, GenConfig, TemplateBank, TemplateError, assemble_corpus,
    generate_scene, load_corpus, save_corpus,
)
from .markup import MarkupError, answer_to_dict, extract_answers, parse_markup, strip_markup, validate
from .scenes import (
    DEFAULT_RADIUS, ConfigError, SchemaError, SynthConfig, UnknownCategory, load_scenes, save_scenes,
    synth_scenes,
)
from .stats import compute_stats, emit_stats
from .vocab import DEFAULT_VOCAB, CategoryVocabulary

EXIT_OK, EXIT_FINDINGS, EXIT_CONFIG, EXIT_SCHEMA, EXIT_IO = 0, 1, 2, 3, 4

# Settings that never change outputs; excluded from the config hash.
_NON_SEMANTIC = {"jobs", "func", "manifest"}


def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _config_hash(args) -> str:
    semantic = {k: v for k, v in _config(args).items() if k not in _NON_SEMANTIC}
    return hashlib.sha256(json.dumps(semantic, sort_keys=True).encode()).hexdigest()


def _write_manifest(path: Path, args, argv: list[str], inputs: list, outputs: list, extra: dict | None = None):
    m = {
        "tool": "markupqa",
        "version": __version__,
        "command": args.command,
        "argv": argv,
        "config": _config(args),
        "config_hash": _config_hash(args),
        "inputs": {str(p): _sha256(p) for p in inputs if p},
        "outputs": {str(p): _sha256(p) for p in outputs},
    }
    if extra:
        m.update(extra)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(m, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _vocab(args) -> CategoryVocabulary:
    return CategoryVocabulary.load(args.vocab) if args.vocab else DEFAULT_VOCAB


def _jobs(args) -> int:
    return args.jobs if args.jobs and args.jobs > 0 else (os.cpu_count() or 1)


def _parse_mix(text: str) -> dict:
    mix = {f.value: 0.0 for f in FAMILIES}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, weight = part.partition("=")
        if name not in mix:
            raise ConfigError(f"unknown family {name!r} in --mix")
        try:
            mix[name] = float(weight) if weight else 1.0
        except ValueError:
            raise ConfigError(f"bad weight {weight!r} in --mix") from None
    return mix


def _manifest_path(args, out: Path) -> Path:
    return Path(args.manifest) if args.manifest else out.with_name(out.name + ".manifest.json")


# -- subcommands -----------------------------------------------------------

def cmd_generate(args, argv) -> int:
    vocab = _vocab(args)
    bank = TemplateBank.load(args.templates) if args.templates else TemplateBank.default()
    cfg = GenConfig(radius=args.radius, max_count=args.max_count, max_targets=args.max_targets,
                    items_per_scene=args.items_per_scene, mix=_parse_mix(args.mix))
    cfg.check()
    if args.scenes:
        scenes = load_scenes(args.scenes, vocab)
    elif args.synth is not None:
        scenes = synth_scenes(args.seed, args.synth,
                              SynthConfig(max_objects=args.synth_max_objects, coord_range=args.synth_range), vocab)
    else:
        raise ConfigError("give --scenes PATH or --synth N")
    fn = partial(generate_scene, seed=args.seed, bank=bank, vocab=vocab, config=cfg)
    jobs = _jobs(args)
    if jobs > 1 and len(scenes) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(fn, scenes, chunksize=max(1, len(scenes) // (jobs * 4))))
    else:
        results = [fn(s) for s in scenes]
    items, skipped = [], Counter()
    for got, sk in results:
        items.extend(got)
        skipped.update(sk)
    corpus = assemble_corpus(items, skipped)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus.items, out)
    outputs = [out]
    if args.scenes_out:
        save_scenes(scenes, args.scenes_out)
        outputs.append(Path(args.scenes_out))
    _write_manifest(_manifest_path(args, out), args, argv, [args.scenes, args.templates, args.vocab], outputs,
                    {"n_scenes": len(scenes), **corpus.manifest()})
    print(f"wrote {len(corpus.items)} items from {len(scenes)} scenes to {out}", file=sys.stderr)
    return EXIT_OK


def _balanced_sample(items, n: int, seed: int):
    # round-robin over families so every task is represented evenly
    rng = random.Random(seed)
    by_fam = {f: [it for it in items if it.family is f] for f in FAMILIES}
    for pool in by_fam.values():
        rng.shuffle(pool)
    picked = []
    while len(picked) < n and any(by_fam.values()):
        for f in FAMILIES:
            if by_fam[f] and len(picked) < n:
                picked.append(by_fam[f].pop())
    order = {it.item_id: i for i, it in enumerate(items)}
    return sorted(picked, key=lambda it: order[it.item_id])


def cmd_split(args, argv) -> int:
    items = load_corpus(args.corpus)
    if args.sample is not None:
        items = _balanced_sample(items, args.sample, args.seed)
    q, a = Path(args.questions_out), Path(args.answers_out)
    for p in (q, a):
        p.parent.mkdir(parents=True, exist_ok=True)
    with open(q, "w", encoding="utf-8") as f:
        for it in items:
            rec = {"item_id": it.item_id, "scene_id": it.scene_id, "family": it.family.value,
                   "question": it.question}
            f.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n")
    save_corpus(items, a)
    _write_manifest(_manifest_path(args, a), args, argv, [args.corpus], [q, a], {"n_items": len(items)})
    return EXIT_OK


def _read_lines(args) -> list[str]:
    with open(args.input, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not args.field:
        return lines
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line)[args.field])
        except (json.JSONDecodeError, KeyError, TypeError):
            raise SchemaError(lineno, args.field, "missing or not JSON") from None
    return out


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8")


def cmd_validate(args, argv) -> int:
    lines = _read_lines(args)
    total = 0
    out = _open_out(args.out)
    try:
        for i, text in enumerate(lines, 1):
            rep = validate(text)
            total += len(rep)
            out.write(json.dumps({"line": i, "findings": [f.to_dict() for f in rep.findings]}) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"{total} findings in {len(lines)} lines", file=sys.stderr)
    return EXIT_FINDINGS if total else EXIT_OK


def cmd_strip(args, argv) -> int:
    out = _open_out(args.out)
    try:
        for text in _read_lines(args):
            out.write(strip_markup(parse_markup(text, args.mode)) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_extract(args, argv) -> int:
    vocab = _vocab(args)
    out = _open_out(args.out)
    try:
        for text in _read_lines(args):
            answers = extract_answers(parse_markup(text, args.mode), vocab)
            out.write(json.dumps([answer_to_dict(a) for a in answers], ensure_ascii=False) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_evaluate(args, argv) -> int:
    gt = load_corpus(args.gt)
    preds = load_predictions(args.pred)
    rep = evaluate_corpus(gt, preds, tau=args.tau, vocab=_vocab(args), mode="lenient", jobs=_jobs(args))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(rep.to_json() + "\n", encoding="utf-8")
    (out / "report.txt").write_text(rep.table(), encoding="utf-8")
    _write_manifest(Path(args.manifest) if args.manifest else out / "manifest.json", args, argv,
                    [args.gt, args.pred, args.vocab], [out / "report.json", out / "report.txt"])
    sys.stdout.write(rep.table())
    return EXIT_OK


def cmd_stats(args, argv) -> int:
    bundle = compute_stats(load_corpus(args.corpus))
    out = Path(args.out_dir)
    formats = ["structured", "tabular"] if args.format == "both" else [args.format]
    files = []
    for fmt in formats:
        files += emit_stats(bundle, out, fmt)
    _write_manifest(Path(args.manifest) if args.manifest else out / "manifest.json", args, argv,
                    [args.corpus], files)
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    """Re-run the command recorded in a manifest and compare output hashes."""
    m = json.loads(Path(args.manifest_file).read_text("utf-8"))
    code = main(m["argv"])
    if code != EXIT_OK:
        return code
    diffs = [p for p, h in m["outputs"].items() if not Path(p).exists() or _sha256(p) != h]
    for p in diffs:
        print(f"output differs: {p}", file=sys.stderr)
    return EXIT_FINDINGS if diffs else EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(prog="markupqa", description="Markup-QA corpus generation and evaluation.",
                                formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, jobs=False):
        sp.add_argument("--vocab", help="JSON list of [singular, plural] category pairs")
        sp.add_argument("--manifest", help="manifest path (default: next to the output)")
        if jobs:
            sp.add_argument("--jobs", type=int, default=0, help="worker processes; 0 = all cores, 1 = serial")

    g = sub.add_parser("generate", help="generate a Markup-QA corpus from scenes", formatter_class=fmt)
    src = g.add_mutually_exclusive_group()
    src.add_argument("--scenes", help="line-delimited scene file")
    src.add_argument("--synth", type=int, metavar="N", help="use N seeded synthetic scenes")
    g.add_argument("-o", "--out", required=True, help="corpus output (JSONL)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mix", default=",".join(f"{f.value}=1" for f in FAMILIES), help="family weights")
    g.add_argument("--radius", type=float, default=DEFAULT_RADIUS, help="task radius in meters")
    g.add_argument("--max-count", type=int, default=MAX_COUNT, help="largest count ever asked")
    g.add_argument("--max-targets", type=int, default=MAX_TARGETS, help="most targets per direction answer")
    g.add_argument("--items-per-scene", type=int, help="items per scene (default: one per enabled family)")
    g.add_argument("--templates", help="template bank JSON (default: shipped bank)")
    g.add_argument("--synth-max-objects", type=int, default=SynthConfig.max_objects)
    g.add_argument("--synth-range", type=float, default=SynthConfig.coord_range, help="synthetic +/- range (m)")
    g.add_argument("--scenes-out", help="also write the scenes used")
    common(g, jobs=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("split", help="split a corpus into a question file and a sealed answer file",
                       formatter_class=fmt)
    s.add_argument("--corpus", required=True)
    s.add_argument("--questions-out", required=True)
    s.add_argument("--answers-out", required=True)
    s.add_argument("--sample", type=int, help="keep a family-balanced subset of this size")
    s.add_argument("--seed", type=int, default=0)
    common(s)
    s.set_defaults(func=cmd_split)

    for name, fn, help_ in (
        ("validate", cmd_validate, "report grammar findings per line"),
        ("strip", cmd_strip, "remove markup, one sentence per line"),
        ("extract", cmd_extract, "extract typed answers per line as JSON"),
    ):
        sp = sub.add_parser(name, help=help_, formatter_class=fmt)
        sp.add_argument("input", help="text file, one sentence per line (or JSONL with --field)")
        sp.add_argument("--field", help="read this field from JSONL records, e.g. answer_markup")
        sp.add_argument("-o", "--out", help="output file (default: stdout)")
        if name != "validate":
            sp.add_argument("--mode", choices=("strict", "lenient"), default="lenient")
        common(sp)
        sp.set_defaults(func=fn)

    e = sub.add_parser("evaluate", help="score predictions against a GT corpus", formatter_class=fmt)
    e.add_argument("--gt", required=True, help="GT corpus (JSONL)")
    e.add_argument("--pred", required=True, help="predictions {item_id, predicted_text} (JSONL)")
    e.add_argument("--out-dir", required=True)
    e.add_argument("--tau", type=float, default=DEFAULT_TAU, help="distance tolerance for Cat. RD (m)")
    common(e, jobs=True)
    e.set_defaults(func=cmd_evaluate)

    st = sub.add_parser("stats", help="corpus statistics", formatter_class=fmt)
    st.add_argument("--corpus", required=True)
    st.add_argument("--out-dir", required=True)
    st.add_argument("--format", choices=("structured", "tabular", "both"), default="both")
    common(st)
    st.set_defaults(func=cmd_stats)

    r = sub.add_parser("replay", help="re-run a manifest and verify outputs are identical", formatter_class=fmt)
    r.add_argument("manifest_file")
    r.set_defaults(func=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except (ConfigError, TemplateError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, UnknownCategory, MarkupError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
