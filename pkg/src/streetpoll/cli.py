"""``streetpoll`` command line.

Exit codes: 0 clean, 1 validation or data failure, 2 backend failure.
A corpus argument of ``demo`` resolves to the packaged demo corpus.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import runfiles
from .analysis import (
    DEFAULT_WINDOW,
    render_sweep,
    saturation_curve,
    stable_point,
    threshold_sweep,
)
from .annotate import (
    AnnotationError,
    BackendConfig,
    Cassette,
    IncompleteAnnotation,
    MalformedResponse,
    ReplyParser,
    TokenBucket,
    annotate_video,
    make_backend,
)
from .captions import render_processed, render_raw
from .corpus import Corpus, CorpusLoadError, CorpusValidationError, load_corpus
from .eval import (
    CONDITIONS,
    Outcome,
    match_batch,
    render_table1,
    render_table2,
    slice_report,
)
from .prompt import LOCALES, build_prompt

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("streetpoll")

EXIT_OK, EXIT_DATA, EXIT_BACKEND = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    corpus_root: str = "demo"
    backend: BackendConfig = field(default_factory=BackendConfig)
    locale: str = "en"
    condition: str = "processed"
    output_dir: str = "run"
    seed: int = 0

    @property
    def conditions(self) -> tuple[str, ...]:
        return CONDITIONS if self.condition == "both" else (self.condition,)


def demo_root() -> Path:
    return Path(str(resources.files("streetpoll").joinpath("demo")))


def resolve_root(root: str | Path) -> Path:
    return demo_root() if str(root) == "demo" else Path(root)


def load_config(path: str | None) -> RunConfig:
    if not path:
        return RunConfig()
    data = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    backend_data = data.pop("backend", {})
    for secret in ("api_key", "token", "credential"):
        if secret in backend_data:
            raise ValueError(f"config must not carry credentials ({secret}); use api_key_env")
    known = {f.name for f in fields(BackendConfig)}
    unknown = set(backend_data) - known
    if unknown:
        raise ValueError(f"unknown backend keys: {sorted(unknown)}")
    top_known = {f.name for f in fields(RunConfig)} - {"backend"}
    unknown = set(data) - top_known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(backend=BackendConfig(**backend_data), **data)


def apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    top = {}
    for name in ("corpus_root", "locale", "condition", "output_dir", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            top[name] = value
    backend = {}
    for flag, name in (
        ("backend", "kind"), ("model", "model_name"), ("endpoint", "endpoint"),
        ("max_continuations", "max_continuations"), ("rate_limit", "rate_limit"),
        ("concurrency", "concurrency_cap"), ("cassette", "cassette"), ("error_rate", "error_rate"),
        ("rows_per_turn", "rows_per_turn"), ("api_key_env", "api_key_env"), ("strict", "strict"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            backend[name] = value
    if backend:
        top["backend"] = replace(cfg.backend, **backend)
    return replace(cfg, **top)


def _load(root: str | Path) -> Corpus:
    return load_corpus(resolve_root(root))


def _prepare_output_dir(path: Path, force: bool) -> None:
    if path.exists() and any(path.iterdir()) and not force:
        raise FileExistsError(f"output directory {path} is not empty (use --force)")
    path.mkdir(parents=True, exist_ok=True)


def video_seed(seed: int, video_id: str) -> int:
    return zlib.crc32(f"{seed}/{video_id}".encode("utf-8"))


# --- commands -----------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        corpus = _load(args.corpus)
    except CorpusLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CorpusValidationError as exc:
        for finding in exc.findings:
            print(f"error: {finding}", file=sys.stderr)
        print(f"{len(exc.findings)} validation finding(s)", file=sys.stderr)
        return EXIT_DATA
    print(f"{len(corpus.videos)} videos, {len(corpus.ground_truth)} respondents, {len(corpus.channels)} channels")
    return EXIT_OK


def cmd_process(args: argparse.Namespace) -> int:
    corpus = _load(args.corpus)
    out = Path(args.out)
    _prepare_output_dir(out, args.force)
    for v in corpus.videos:
        if v.video_id in corpus.raw:
            runfiles.write_text(out / "captions" / f"{v.video_id}.txt", render_raw(corpus.raw[v.video_id]), True)
        if v.video_id in corpus.processed:
            runfiles.write_text(
                out / "processed" / f"{v.video_id}.txt", render_processed(corpus.processed[v.video_id]), True
            )
    print(f"re-rendered captions for {len(corpus.videos)} videos into {out}")
    return EXIT_OK


def _transcript(corpus: Corpus, video_id: str, condition: str):
    store = corpus.processed if condition == "processed" else corpus.raw
    return store.get(video_id)


def cmd_prompt(args: argparse.Namespace) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    corpus = _load(cfg.corpus_root)
    out = Path(cfg.output_dir) / runfiles.PROMPTS
    written = 0
    for v in corpus.videos:
        for cond in cfg.conditions:
            doc = _transcript(corpus, v.video_id, cond)
            if doc is None:
                log.warning("%s has no %s captions", v.video_id, cond)
                continue
            prompt = build_prompt(doc, corpus.inventory, cfg.locale)
            runfiles.write_text(out / f"{runfiles.stem(v.video_id, cond)}.txt", prompt.final_text, args.force)
            written += 1
    print(f"wrote {written} prompts to {out}")
    return EXIT_OK


@dataclass
class _VideoResult:
    video_id: str
    condition: str
    status: str
    message: str = ""
    rows: int = 0


def _annotate_one(cfg: RunConfig, corpus: Corpus, video_id: str, condition: str, run_dir: Path,
                  limiter: TokenBucket | None, cassette: Cassette | None, force: bool) -> _VideoResult:
    video = corpus.video(video_id)
    doc = _transcript(corpus, video_id, condition)
    if doc is None:
        return _VideoResult(video_id, condition, "error", f"no {condition} captions")
    prompt = build_prompt(doc, corpus.inventory, cfg.locale)
    name = runfiles.stem(video_id, condition)
    runfiles.write_text(run_dir / runfiles.PROMPTS / f"{name}.txt", prompt.final_text, force)
    parser = ReplyParser.default(strict=cfg.backend.strict, inventory=corpus.inventory)
    status, message = "ok", ""
    try:
        backend = make_backend(
            cfg.backend,
            transcript=doc,
            seed=video_seed(cfg.seed, video_id),
            overrides=dict(video.label_space.candidate_overrides),
            limiter=limiter,
            cassette=cassette,
        )
        batch = annotate_video(
            prompt, backend, video_id=video_id, max_continuations=cfg.backend.max_continuations, parser=parser
        )
    except IncompleteAnnotation as exc:
        batch, status, message = exc.batch, "incomplete", str(exc)
    except MalformedResponse as exc:
        return _VideoResult(video_id, condition, "error", f"malformed reply: {exc}")
    except AnnotationError as exc:
        code = getattr(exc, "code", type(exc).__name__)
        return _VideoResult(video_id, condition, "error", f"{code}: {exc}")
    runfiles.write_text(
        run_dir / runfiles.CONVERSATIONS / f"{name}.json",
        runfiles.dump_json(runfiles.conversation_to_list(batch.conversation)),
        force,
    )
    runfiles.write_text(
        run_dir / runfiles.BATCHES / f"{name}.json", runfiles.dump_json(runfiles.batch_to_dict(batch, condition, status)),
        force,
    )
    return _VideoResult(video_id, condition, status, message, len(batch.rows))


def cmd_annotate(args: argparse.Namespace) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    try:
        corpus = _load(cfg.corpus_root)
    except (CorpusLoadError, CorpusValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    run_dir = Path(cfg.output_dir)
    try:
        _prepare_output_dir(run_dir, args.force)
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    rate = cfg.backend.effective_rate_limit
    limiter = TokenBucket(rate) if rate else None
    # one cassette instance so concurrent workers share its lock
    cassette = Cassette(cfg.backend.cassette) if cfg.backend.cassette and cfg.backend.kind != "mock" else None
    jobs = [(v.video_id, cond) for v in corpus.videos for cond in cfg.conditions]
    with ThreadPoolExecutor(max_workers=cfg.backend.concurrency_cap) as pool:
        futures = [
            pool.submit(_annotate_one, cfg, corpus, vid, cond, run_dir, limiter, cassette, args.force) for vid, cond in jobs
        ]
        results = [f.result() for f in futures]

    settings = {
        "corpus_root": str(cfg.corpus_root),
        "locale": cfg.locale,
        "condition": cfg.condition,
        "seed": cfg.seed,
        "backend": {f.name: getattr(cfg.backend, f.name) for f in fields(BackendConfig)},
    }
    runfiles.write_text(run_dir / "run.json", runfiles.dump_json(settings), True)
    failures = [r for r in results if r.status != "ok"]
    total_rows = sum(r.rows for r in results)
    print(f"annotated {len(results) - len(failures)}/{len(results)} video runs, {total_rows} rows")
    for r in failures:
        print(f"  {r.status.upper()}  {r.video_id} ({r.condition}): {r.message}", file=sys.stderr)
    return EXIT_BACKEND if failures else EXIT_OK


def collect_outcomes(corpus: Corpus, run_dir: Path) -> tuple[dict[str, list[Outcome]], dict[str, list[str]], list[str]]:
    batches = runfiles.read_batches(run_dir)
    conditions = [c for c in CONDITIONS if any(cond == c for _, cond in batches)]
    outcomes: dict[str, list[Outcome]] = {}
    missing: dict[str, list[str]] = {}
    warnings: list[str] = []
    for cond in conditions:
        outcomes[cond], missing[cond] = [], []
        for v in corpus.videos:
            batch = batches.get((v.video_id, cond))
            if batch is None:
                missing[cond].append(v.video_id)
                continue
            result = match_batch(batch, corpus.truth_for(v.video_id), v)
            if result.spurious:
                warnings.append(f"{cond}: {v.video_id}: {len(result.spurious)} spurious row(s)")
            outcomes[cond].extend(result.outcomes)
    return outcomes, missing, warnings


def _outcome_table(outcomes: dict[str, list[Outcome]]) -> str:
    lines = ["condition\tvideo_id\tinterview_idx\tcitizen_idx\ttruth_candidate\tpredicted_candidate\t"
             "candidate_outcome\ttruth_concept\tpredicted_concept\tconcept_outcome"]
    for cond, outs in outcomes.items():
        for o in outs:
            r = o.respondent
            lines.append("\t".join([
                cond, r.video_id, str(r.citizen_key[0]), str(r.citizen_key[1]), o.truth_candidate.value,
                o.predicted_candidate.value if o.predicted_candidate else "", o.candidate_outcome.value,
                r.concept.value if r.concept else "", o.predicted_concept.value if o.predicted_concept else "",
                o.concept_outcome.value,
            ]))
    return "\n".join(lines) + "\n"


def _reports_dir(args: argparse.Namespace) -> Path:
    return Path(args.out) if getattr(args, "out", None) else Path(args.run) / runfiles.REPORTS


def cmd_eval(args: argparse.Namespace) -> int:
    corpus = _load(args.corpus)
    outcomes, missing, warnings = collect_outcomes(corpus, Path(args.run))
    if not outcomes:
        print(f"error: no batches under {Path(args.run) / runfiles.BATCHES}", file=sys.stderr)
        return EXIT_DATA
    report = slice_report(outcomes, corpus, missing)
    out = _reports_dir(args)
    runfiles.write_text(out / "table1.tsv", render_table1(report), args.force)
    runfiles.write_text(out / "table2.tsv", render_table2(report), args.force)
    runfiles.write_text(out / "outcomes.tsv", _outcome_table(outcomes), args.force)
    for w in report.warnings + warnings:
        print(f"warning: {w}", file=sys.stderr)
    overall = report.overall
    for cond in report.conditions:
        cm, km = overall.metrics[(cond, "candidate")], overall.metrics[(cond, "concept")]
        if cm is None:
            continue
        print(f"{cond}: candidate P={cm.format_precision()} R={cm.format_recall()}  "
              f"concept P={km.format_precision()} R={km.format_recall()}")
    print(f"wrote reports to {out}")
    return EXIT_OK


def _free_concepts_from_run(corpus: Corpus, run_dir: Path, condition: str) -> list[str]:
    batches = runfiles.read_batches(run_dir)
    out = []
    for v in corpus.videos:
        batch = batches.get((v.video_id, condition))
        if batch is None:
            continue
        for row in batch.rows:
            if row.concept is not None and row.concept.raw_text and not row.undecided:
                out.append(row.concept.raw_text)
    return out


def calibration_split(items: Sequence[str], fraction: float, seed: int | None = None) -> list[str]:
    """Prefix (corpus order) or seeded random sample of ``fraction`` of the items."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    n = max(1, round(len(items) * fraction)) if items else 0
    if seed is None:
        return list(items[:n])
    idx = sorted(random.Random(seed).sample(range(len(items)), n))
    return [items[i] for i in idx]


def cmd_saturation(args: argparse.Namespace) -> int:
    if args.input:
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
        concepts = [ln.strip() for ln in lines if ln.strip()]
    else:
        if not args.run:
            print("error: give --input or --run", file=sys.stderr)
            return EXIT_DATA
        corpus = _load(args.corpus)
        concepts = _free_concepts_from_run(corpus, Path(args.run), args.condition)
    sample = calibration_split(concepts, args.fraction, args.split_seed)
    curve = saturation_curve(sample, shuffle_seed=args.shuffle_seed)
    point = stable_point(curve, args.window)
    out = Path(args.out) if args.out else (Path(args.run) / runfiles.REPORTS if args.run else Path("."))
    runfiles.write_text(out / "saturation.tsv", curve.to_tsv(), args.force)
    final = curve(len(curve)) if len(curve) else 0
    stable = point if point is not None else "none"
    print(f"{final} distinct concepts from {len(curve)} interviews; stable point (window {args.window}): {stable}")
    return EXIT_OK


def _parse_thresholds(text: str | None) -> list[int] | None:
    if not text:
        return None
    return sorted({int(t) for t in text.split(",") if t.strip()})


def cmd_sweep(args: argparse.Namespace) -> int:
    corpus = _load(args.corpus)
    outcomes, _, _ = collect_outcomes(corpus, Path(args.run))
    if not outcomes:
        print("error: no batches found", file=sys.stderr)
        return EXIT_DATA
    rows = threshold_sweep(corpus, outcomes, _parse_thresholds(args.thresholds))
    out = _reports_dir(args)
    runfiles.write_text(out / "sweep.tsv", render_sweep(rows), args.force)
    print(f"wrote {len(rows)} sweep rows to {out / 'sweep.tsv'}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    status = cmd_eval(args)
    if status != EXIT_OK:
        return status
    status = cmd_sweep(args)
    if status != EXIT_OK:
        return status
    sat_args = argparse.Namespace(
        input=None, run=args.run, corpus=args.corpus, condition="processed", fraction=args.fraction,
        split_seed=None, shuffle_seed=None, window=args.window, out=args.out, force=args.force,
    )
    return cmd_saturation(sat_args)


# --- argument parsing -----------------------------------------------------------------


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML run config; flags override it")
    p.add_argument("--corpus", dest="corpus_root", help="corpus directory or 'demo'")
    p.add_argument("--out", dest="output_dir", help="run directory")
    p.add_argument("--condition", choices=("raw", "processed", "both"))
    p.add_argument("--locale", choices=LOCALES)
    p.add_argument("--seed", type=int)
    p.add_argument("--force", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streetpoll", description="Street-interview opinion mining pipeline")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load and validate a corpus")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("process", help="parse and re-render caption files")
    p.add_argument("corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("prompt", help="write annotation prompts")
    _add_run_options(p)
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("annotate", help="run the annotation backend over the corpus")
    _add_run_options(p)
    p.add_argument("--backend", choices=("mock", "replay", "live"))
    p.add_argument("--model")
    p.add_argument("--endpoint")
    p.add_argument("--cassette")
    p.add_argument("--api-key-env", dest="api_key_env", help="name of the credential environment variable")
    p.add_argument("--max-continuations", dest="max_continuations", type=int)
    p.add_argument("--rate-limit", dest="rate_limit", type=float, help="requests per minute")
    p.add_argument("--concurrency", type=int)
    p.add_argument("--error-rate", dest="error_rate", type=float)
    p.add_argument("--rows-per-turn", dest="rows_per_turn", type=int)
    p.add_argument("--strict", action="store_true", default=None)
    p.set_defaults(func=cmd_annotate)

    def scoring(name: str, help_: str, func) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--corpus", default="demo")
        p.add_argument("--run", required=name != "saturation", help="run directory with batches/")
        p.add_argument("--out", help="report directory (default RUN/reports)")
        p.add_argument("--force", action="store_true")
        p.set_defaults(func=func)
        return p

    scoring("eval", "score batches against ground truth", cmd_eval)
    p = scoring("sweep", "minimum token-count sweep", cmd_sweep)
    p.add_argument("--thresholds", help="comma-separated minimum token counts (default: deciles)")
    p = scoring("saturation", "distinct-concept saturation curve", cmd_saturation)
    p.add_argument("--input", help="text file, one raw concept per line")
    p.add_argument("--condition", default="processed", choices=CONDITIONS)
    p.add_argument("--fraction", type=float, default=0.2, help="calibration share of interviews")
    p.add_argument("--split-seed", type=int, help="random instead of prefix calibration split")
    p.add_argument("--shuffle-seed", type=int, help="shuffle analysis order")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p = scoring("report", "eval + sweep + saturation", cmd_report)
    p.add_argument("--thresholds")
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CorpusLoadError, CorpusValidationError, FileExistsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
