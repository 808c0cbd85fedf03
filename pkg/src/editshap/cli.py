"""Command-line interface.

Subcommands: ``attribute``, ``consistency``, ``agreement``,
``sampling-error``, ``aggregate``, ``precision``, ``bench``. Every command
is deterministic given its inputs, flags and seed; resolved configuration
is recorded in each report header. Flag values take precedence over
``ESH_``-prefixed environment variables, which take precedence over
defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

from .aggregate import (
    DEFAULT_MIN_COUNT,
    collect_type_stats,
    means_from_stats,
    precision_from_stats,
)
from .attribution import SamplingConfig, attribute
from .core import (
    METHOD_SAMPLING,
    METHOD_SHAPLEY,
    AttributionResult,
    EditSet,
    EditShapError,
    Sentence,
)
from .edits import apply_all, edit_set_from_json, parse_m2
from .evaluation import (
    agreement_csv_rows,
    benchmark_timing,
    consistency_csv_rows,
    evaluate_agreement,
    evaluate_consistency,
    evaluate_sampling_error,
    timing_csv_rows,
)
from .scorer import (
    AdditiveEditScorer,
    AffineLengthScorer,
    ExternalScorerClient,
    NGramLM,
    NGramScorer,
    Scorer,
    ScorerError,
    TokenCountScorer,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_SCORER_ERROR = 2
EXIT_CAP_EXCEEDED = 3

_CLI_METHODS = {"shapley": "shapley", "sampling": METHOD_SAMPLING, "add": "add", "sub": "sub"}


class CapExceededError(EditShapError):
    """Edit count above --max-edits and --auto-sampling is off."""


class InputError(EditShapError):
    """Unusable command-line input."""


def _resolve(value, env_name: str, default, cast=str):
    """flags > ESH_* environment > default."""
    if value is not None:
        return value
    env = os.environ.get(env_name)
    if env:
        try:
            return cast(env)
        except ValueError as exc:
            raise InputError(f"bad value for {env_name}: {exc}") from None
    return default


def _boolish(text: str) -> bool:
    return text.strip().lower() in {"1", "true", "yes", "on"}


# ---------------------------------------------------------------------------
# Scorer construction
# ---------------------------------------------------------------------------

class ScorerProvider:
    """Maps (sentence index, edit set) to a scorer and owns any processes.

    External scorers get one client per worker thread; in-process scorers
    are shared since they are read-only.
    """

    def __init__(self, spec: str, bonuses: list[list[float]] | None = None) -> None:
        self.spec = spec
        self._bonuses = bonuses
        self._shared: Scorer | None = None
        self._local = threading.local()
        self._clients: list[ExternalScorerClient] = []
        self._lock = threading.Lock()
        self._external: tuple[str, ...] | None = None

        kind, _, rest = spec.partition(":")
        if kind == "ngram":
            self._shared = NGramScorer(NGramLM.load(rest))
        elif kind == "additive":
            if bonuses is None:
                raise InputError("additive scorer requires a bonuses file")
        elif kind == "stub":
            self._shared = TokenCountScorer()
        elif kind == "affine":
            parts = rest.split(":") if rest else []
            scale = float(parts[0]) if len(parts) > 0 and parts[0] else 0.25
            offset = float(parts[1]) if len(parts) > 1 else 0.125
            self._shared = AffineLengthScorer(scale, offset)
        elif kind == "external":
            if not rest:
                raise InputError("external scorer needs a command or host:port")
            self._external = ("external", rest)
        else:
            raise InputError(f"unknown scorer spec {spec!r}")

    def _new_client(self) -> ExternalScorerClient:
        rest = self._external[1]
        tcp = re.fullmatch(r"([\w.\-]+):(\d+)", rest)
        if tcp:
            client = ExternalScorerClient.connect(tcp.group(1), int(tcp.group(2)))
        else:
            client = ExternalScorerClient.spawn(rest)
        with self._lock:
            self._clients.append(client)
        return client

    def get(self, index: int, es: EditSet) -> Scorer:
        if self._bonuses is not None:
            if index >= len(self._bonuses):
                raise InputError(f"no bonuses for sentence {index}")
            row = self._bonuses[index]
            if len(row) != es.n_edits:
                raise InputError(
                    f"sentence {index}: {len(row)} bonuses for {es.n_edits} edits"
                )
            return AdditiveEditScorer(es, row)
        if self._external is not None:
            client = getattr(self._local, "client", None)
            if client is None:
                client = self._new_client()
                self._local.client = client
            return client
        assert self._shared is not None
        return self._shared

    def factory(self, dataset: Sequence[EditSet] | None = None) -> Callable[[EditSet], Scorer] | Scorer:
        """Adapter for evaluation functions: per-edit-set factory or scorer."""
        if self._bonuses is not None:
            if dataset is None:
                raise InputError("the additive scorer needs a dataset to bind bonuses to")
            index_by_id = {id(es): i for i, es in enumerate(dataset)}

            def build(es: EditSet) -> Scorer:
                if id(es) not in index_by_id:
                    raise InputError("additive scorer saw a sentence outside its dataset")
                return self.get(index_by_id[id(es)], es)

            return build
        if self._external is not None:
            return self.get(0, None)  # type: ignore[arg-type]
        return self._shared

    def close(self) -> None:
        with self._lock:
            clients, self._clients = self._clients, []
        for client in clients:
            client.close()


def load_bonuses(path: str) -> list[list[float]]:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read bonuses file {path}: {exc}") from None
    rows = payload.get("bonuses") if isinstance(payload, dict) else payload
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InputError(f"{path}: expected {{\"bonuses\": [[...], ...]}}")
    return [[float(x) for x in row] for row in rows]


def make_provider(spec: str) -> ScorerProvider:
    kind, _, rest = spec.partition(":")
    bonuses = load_bonuses(rest) if kind == "additive" else None
    try:
        return ScorerProvider(spec, bonuses)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot build scorer {spec!r}: {exc}") from None


# ---------------------------------------------------------------------------
# Input loading
# ---------------------------------------------------------------------------

def _read_lines(path: str) -> list[str]:
    try:
        return Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(str(exc)) from None


def load_records(path: str) -> list[dict]:
    records = []
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path} line {line_no}: invalid JSON: {exc}") from None
    return records


def load_dataset(args) -> tuple[list[EditSet], list[dict]]:
    """Edit sets plus the raw records they came from (empty dicts for M2)."""
    if getattr(args, "input", None) and getattr(args, "m2", None):
        raise InputError("use either --input or --m2, not both")
    if getattr(args, "input", None):
        records = load_records(args.input)
        dataset = [edit_set_from_json(obj) for obj in records]
        return dataset, records
    if getattr(args, "m2", None):
        annotator = _resolve(getattr(args, "annotator", None), "ESH_ANNOTATOR", 0, int)
        blocks = parse_m2(_read_lines(args.m2))
        dataset = []
        for i, block in enumerate(blocks):
            if annotator not in block:
                raise InputError(f"M2 sentence {i} has no annotator {annotator}")
            dataset.append(block[annotator])
        return dataset, [{} for _ in dataset]
    raise InputError("an input file is required (--input JSONL or --m2 M2)")


def load_references(args, records: list[dict]) -> list[list[str]]:
    if getattr(args, "refs", None):
        refs = []
        for obj in load_records(args.refs):
            refs.append(list(obj.get("references", [])))
        return refs
    if records and all("references" in r for r in records):
        return [list(r["references"]) for r in records]
    raise InputError("references required: --refs FILE or a 'references' field per record")


# ---------------------------------------------------------------------------
# Shared option plumbing
# ---------------------------------------------------------------------------

def _add_common_io(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="JSONL dataset (source/hypothesis/edits per line)")
    parser.add_argument("--m2", help="M2 dataset")
    parser.add_argument("--annotator", type=int, default=None, help="M2 annotator id (default 0)")


def _add_scoring(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--scorer",
        default=None,
        help="ngram:PATH | additive:PATH | stub | affine[:SCALE[:OFFSET]] | external:CMD-or-HOST:PORT",
    )
    parser.add_argument("--method", choices=sorted(_CLI_METHODS), default=None)
    parser.add_argument("--t", type=int, default=None, help="permutation samples (sampling)")
    parser.add_argument("--seed", type=int, default=None)


def _scoring_config(args) -> dict:
    cfg = {
        "scorer": _resolve(args.scorer, "ESH_SCORER", None),
        "method": _resolve(args.method, "ESH_METHOD", "shapley"),
        "t": _resolve(args.t, "ESH_T", 64, int),
        "seed": _resolve(args.seed, "ESH_SEED", 0, int),
    }
    if cfg["scorer"] is None:
        raise InputError("--scorer is required (or set ESH_SCORER)")
    if cfg["method"] not in _CLI_METHODS:
        raise InputError(f"unknown method {cfg['method']!r}")
    return cfg


def _sampling_config(cfg: dict) -> SamplingConfig:
    return SamplingConfig(t=cfg["t"], seed=cfg["seed"])


def _write_json(path: str | None, payload: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


def _write_csv(path: str | None, rows: list[list]) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)


# ---------------------------------------------------------------------------
# attribute
# ---------------------------------------------------------------------------

def _attribution_record(
    es: EditSet, res: AttributionResult | None, method: str, seed: int, hypothesis: Sentence
) -> dict:
    edits = []
    for i, e in enumerate(es.edits):
        entry = {
            "span": [e.start, e.end],
            "replacement": e.span_text(),
            "type": e.error_type or "",
            "phi": res.raw[i] if res else 0.0,
            "phi_norm": res.normalized[i] if res else 0.0,
        }
        edits.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "source": es.source.text(),
        "hypothesis": hypothesis.text(),
        "delta_m": res.delta_m if res else 0.0,
        "edits": edits,
        "method": res.method if res else method,
        "scorer_calls": res.scorer_calls if res else 0,
        "wall_time_s": res.wall_time_s if res else 0.0,
        "seed": res.seed if res else seed,
        "sampling_t": res.sampling_t if res else None,
        "flags": sorted(res.flags) if res else [],
    }


def cmd_attribute(args) -> int:
    cfg = _scoring_config(args)
    method = _CLI_METHODS[cfg["method"]]
    max_edits = _resolve(args.max_edits, "ESH_MAX_EDITS", 10, int)
    auto_sampling = args.auto_sampling or _boolish(os.environ.get("ESH_AUTO_SAMPLING", ""))
    jobs = _resolve(args.jobs, "ESH_JOBS", 1, int)
    dataset, _records = load_dataset(args)
    provider = make_provider(cfg["scorer"])
    sampling = _sampling_config(cfg)

    def run_one(item: tuple[int, EditSet]) -> dict:
        index, es = item
        if es.n_players == 0:
            return _attribution_record(es, None, method, cfg["seed"], es.source)
        use_method = method
        if method == METHOD_SHAPLEY and es.n_players > max_edits:
            if not auto_sampling:
                raise CapExceededError(
                    f"sentence {index}: {es.n_players} edits exceed --max-edits {max_edits}"
                )
            use_method = METHOD_SAMPLING
        scorer = provider.get(index, es)
        res = attribute(scorer, es, use_method, sampling, cap=max(max_edits, 1))
        return _attribution_record(es, res, use_method, cfg["seed"], apply_all(es))

    try:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(run_one, enumerate(dataset)))
        else:
            results = [run_one(item) for item in enumerate(dataset)]
    finally:
        provider.close()

    lines = [json.dumps(r, ensure_ascii=False) for r in results]
    if args.output:
        Path(args.output).write_text("\n".join(lines) + ("\n" if lines else ""))
        out = sys.stdout
    else:
        for line in lines:
            print(line)
        out = sys.stderr
    total_calls = sum(r["scorer_calls"] for r in results)
    total_time = sum(r["wall_time_s"] for r in results)
    print(
        f"attributed {len(results)} sentences with {method}: "
        f"{total_calls} scorer calls, {total_time:.3f}s scoring time",
        file=out,
    )
    if args.normalize:
        for i, r in enumerate(results):
            scores = ", ".join(f"{e['phi_norm']:+.4f}" for e in r["edits"])
            print(f"  [{i}] {scores}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluation commands
# ---------------------------------------------------------------------------

def _report_payload(command: str, cfg: dict, report_json: dict) -> dict:
    return {"config": {"command": command, **cfg}, "report": report_json}


def cmd_consistency(args) -> int:
    cfg = _scoring_config(args)
    dataset, _ = load_dataset(args)
    provider = make_provider(cfg["scorer"])
    try:
        report = evaluate_consistency(
            provider.factory(dataset), _CLI_METHODS[cfg["method"]], dataset, _sampling_config(cfg)
        )
    finally:
        provider.close()
    _write_json(args.json_out, _report_payload("consistency", cfg, report.to_json()))
    _write_csv(args.csv_out, consistency_csv_rows(report))
    print(
        f"consistency over {report.n_sentences} sentences ({report.n_skipped} skipped): "
        f"sign agreement {report.sign_agreement_ratio:.4f}, "
        f"pearson {report.pearson:.4f}, spearman {report.spearman:.4f}"
    )
    return EXIT_OK


def cmd_agreement(args) -> int:
    cfg = _scoring_config(args)
    cfg["threshold_mode"] = _resolve(args.threshold_mode, "ESH_THRESHOLD_MODE", "below")
    dataset, records = load_dataset(args)
    references = load_references(args, records)
    provider = make_provider(cfg["scorer"])
    try:
        report = evaluate_agreement(
            provider.factory(dataset),
            _CLI_METHODS[cfg["method"]],
            dataset,
            references,
            _sampling_config(cfg),
            threshold_mode=cfg["threshold_mode"],
        )
    finally:
        provider.close()
    _write_json(args.json_out, _report_payload("agreement", cfg, report.to_json()))
    _write_csv(args.csv_out, agreement_csv_rows(report))
    print(
        f"agreement over {report.n_sentences} sentences ({report.n_skipped} skipped): "
        f"accuracy {report.accuracy:.4f} at full coverage "
        f"({len(report.records)} labeled edits, mode {report.threshold_mode})"
    )
    return EXIT_OK


def cmd_sampling_error(args) -> int:
    cfg = _scoring_config(args)
    dataset, _ = load_dataset(args)
    provider = make_provider(cfg["scorer"])
    try:
        report = evaluate_sampling_error(provider.factory(dataset), dataset, _sampling_config(cfg))
    finally:
        provider.close()
    _write_json(args.json_out, _report_payload("sampling-error", cfg, report.to_json()))
    _write_csv(
        args.csv_out,
        [
            ["mean_abs_error", "mean_time_exact_s", "mean_time_sampling_s",
             "phi_abs_mean", "phi_abs_std", "t", "seed", "n_sentences", "n_edits"],
            [report.mean_abs_error, report.mean_time_exact_s, report.mean_time_sampling_s,
             report.phi_abs_mean, report.phi_abs_std, report.t, report.seed,
             report.n_sentences, report.n_edits],
        ],
    )
    print(
        f"sampling error over {report.n_sentences} sentences at T={report.t}: "
        f"mean |error| {report.mean_abs_error:.6g} "
        f"(|phi| {report.phi_abs_mean:.6g} ± {report.phi_abs_std:.6g}); "
        f"time exact {report.mean_time_exact_s:.4f}s vs sampling {report.mean_time_sampling_s:.4f}s"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# aggregation commands
# ---------------------------------------------------------------------------

def load_attribution_results(path: str) -> list[tuple[EditSet, AttributionResult]]:
    """Rebuild (EditSet, AttributionResult) pairs from attribute output."""
    out = []
    for line_no, obj in enumerate(load_records(path), start=1):
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise InputError(f"{path} line {line_no}: unsupported schema_version")
        edits = obj.get("edits", [])
        if not edits:
            continue
        es = edit_set_from_json(
            {
                "source": obj["source"],
                "hypothesis": obj["hypothesis"],
                "edits": [
                    {
                        "start": e["span"][0],
                        "end": e["span"][1],
                        "replacement": e["replacement"],
                        "type": e.get("type", ""),
                    }
                    for e in edits
                ],
            }
        )
        try:
            res = AttributionResult(
                method=obj["method"],
                delta_m=obj["delta_m"],
                raw=tuple(e["phi"] for e in edits),
                normalized=tuple(e["phi_norm"] for e in edits),
                scorer_calls=obj.get("scorer_calls", 0),
                wall_time_s=obj.get("wall_time_s", 0.0),
                sampling_t=obj.get("sampling_t"),
                seed=obj.get("seed"),
                flags=frozenset(obj.get("flags", [])),
            )
        except ValueError as exc:
            raise InputError(f"{path} line {line_no}: {exc}") from None
        out.append((es, res))
    return out


def _matrix_rows(tables: dict[str, dict[str, float]], value_fmt: str = "%.6f") -> list[list]:
    types = sorted({t for table in tables.values() for t in table})
    rows: list[list] = [["system", *types]]
    for label, table in tables.items():
        rows.append([label, *[(value_fmt % table[t]) if t in table else "" for t in types]])
    return rows


def cmd_aggregate(args) -> int:
    min_count = _resolve(args.min_count, "ESH_MIN_COUNT", DEFAULT_MIN_COUNT, int)
    tables: dict[str, dict[str, float]] = {}
    detail: dict[str, dict] = {}
    for path in args.input:
        stats = collect_type_stats(load_attribution_results(path))
        means = means_from_stats(stats, min_count)
        label = Path(path).stem
        tables[label] = {k: v.mean for k, v in means.items()}
        detail[label] = {
            k: {"mean": v.mean, "count": v.count, "low_support": v.low_support}
            for k, v in means.items()
        }
    _write_json(args.json_out, {"config": {"command": "aggregate", "min_count": min_count}, "report": detail})
    _write_csv(args.csv_out, _matrix_rows(tables))
    for label, table in detail.items():
        print(f"{label}:")
        for k, v in table.items():
            support = "" if not v["low_support"] else f"  (low support: n={v['count']})"
            print(f"  {k}: mean {v['mean']:+.4f} over {v['count']} edits{support}")
    return EXIT_OK


def cmd_precision(args) -> int:
    tables: dict[str, dict[str, float]] = {}
    for path in args.input:
        stats = collect_type_stats(load_attribution_results(path))
        tables[Path(path).stem] = precision_from_stats(stats)
    _write_json(args.json_out, {"config": {"command": "precision"}, "report": tables})
    _write_csv(args.csv_out, _matrix_rows(tables))
    for label, table in tables.items():
        print(f"{label}:")
        for k, v in table.items():
            print(f"  {k}: precision {v:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def _parse_n_range(text: str) -> list[int]:
    text = text.strip()
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise InputError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise InputError(f"bad --n value {text!r}; use e.g. 4..14 or 4,6,8") from None


def cmd_bench(args) -> int:
    spec = _resolve(args.scorer, "ESH_SCORER", "stub")
    provider = make_provider(spec)
    n_values = _parse_n_range(_resolve(args.n, "ESH_BENCH_N", "2..10"))
    try:
        points = benchmark_timing(provider.factory(), n_values, repeats=args.repeats)
    finally:
        provider.close()
    _write_csv(args.csv_out, timing_csv_rows(points))
    _write_json(
        args.json_out,
        {
            "config": {"command": "bench", "scorer": spec, "n": n_values},
            "report": [p.__dict__ for p in points],
        },
    )
    for p in points:
        print(
            f"N={p.n:2d}: mean {p.mean_s * 1e3:9.3f} ms  std {p.std_s * 1e3:8.3f} ms  "
            f"min {p.min_s * 1e3:9.3f} ms  scorer_calls {p.scorer_calls}"
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="editshap",
        description="Attribute sentence-level quality scores to individual edits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attribute", help="attribute delta-M to edits, one JSONL record per sentence")
    _add_common_io(p)
    _add_scoring(p)
    p.add_argument("--max-edits", type=int, default=None,
                   help="exact-Shapley cap per sentence (default 10)")
    p.add_argument("--auto-sampling", action="store_true",
                   help="route sentences above the cap to sampling instead of failing")
    p.add_argument("--normalize", action="store_true",
                   help="also print normalized scores in the summary")
    p.add_argument("--jobs", type=int, default=None, help="parallel sentence workers")
    p.add_argument("--output", help="output JSONL path (default: stdout)")
    p.set_defaults(func=cmd_attribute)

    p = sub.add_parser("consistency", help="same-sign grouping consistency protocol")
    _add_common_io(p)
    _add_scoring(p)
    p.add_argument("--json-out")
    p.add_argument("--csv-out")
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("agreement", help="reference-label agreement with threshold sweep")
    _add_common_io(p)
    _add_scoring(p)
    p.add_argument("--refs", help="JSONL with a 'references' list per sentence")
    p.add_argument("--threshold-mode", choices=["below", "above"], default=None)
    p.add_argument("--json-out")
    p.add_argument("--csv-out")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("sampling-error", help="sampled-vs-exact Shapley error and timing")
    _add_common_io(p)
    _add_scoring(p)
    p.add_argument("--json-out")
    p.add_argument("--csv-out")
    p.set_defaults(func=cmd_sampling_error)

    p = sub.add_parser("aggregate", help="mean normalized score per error type")
    p.add_argument("--input", nargs="+", required=True, help="attribute output JSONL file(s)")
    p.add_argument("--min-count", type=int, default=None)
    p.add_argument("--json-out")
    p.add_argument("--csv-out")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("precision", help="per-error-type precision from attribution signs")
    p.add_argument("--input", nargs="+", required=True, help="attribute output JSONL file(s)")
    p.add_argument("--json-out")
    p.add_argument("--csv-out")
    p.set_defaults(func=cmd_precision)

    p = sub.add_parser("bench", help="exact-Shapley timing versus edit count")
    p.add_argument("--scorer", default=None)
    p.add_argument("--n", default=None, help="edit counts, e.g. 4..14 or 4,6,8")
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--json-out")
    p.add_argument("--csv-out")
    p.set_defaults(func=cmd_bench)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"error: {exc} (use --auto-sampling to fall back)", file=sys.stderr)
        return EXIT_CAP_EXCEEDED
    except ScorerError as exc:
        print(f"scorer error: {exc}", file=sys.stderr)
        return EXIT_SCORER_ERROR
    except (EditShapError, OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
