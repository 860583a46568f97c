"""Experiment command line.

Subcommands: ``run`` executes a (scenario x method x snr x seed) grid and
writes per-run CSVs, summary CSVs and JSON-lines transcripts; ``ablation``
sweeps compression ratio, semantic bit budget and SNR; ``calibrate-check``
validates a calibration CSV; ``export`` writes the vocabulary and corpus
files the external codec trainer consumes.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from importlib.resources import files

import yaml

from .huffman import huffman_encode
from .metrics import (aggregate, result_from_transcript, results_csv_lines,
                      summary_csv_lines)
from .semantic import (ablation_calibration, default_calibration,
                       load_calibration)
from .session import (METHODS, KnowledgeStore, SessionConfig, Seeds,
                      checklist_for, kb_update, run_session)
from .vocabulary import default_codebook, export_corpus, export_vocabulary

USAGE_ERROR, RUNTIME_ERROR = 2, 1


class ConfigError(ValueError):
    pass


def _load_config(ref: str) -> dict:
    """Resolve a config by path or by shipped name."""
    if os.path.exists(ref):
        text, origin = open(ref, "r", encoding="utf-8").read(), ref
    else:
        resource = files("semlink.configs").joinpath(f"{ref}.yaml")
        if not resource.is_file():
            raise ConfigError(f"config {ref!r}: no such file or shipped config")
        text, origin = resource.read_text("utf-8"), f"shipped:{ref}"
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark else ""
        raise ConfigError(f"config {origin}{where}: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config {origin}: top level must be a mapping")
    data.setdefault("_origin", origin)
    return data


def _expect(config: dict, key: str, kind, default):
    value = config.get(key, default)
    if not isinstance(value, kind):
        raise ConfigError(f"config key {key!r}: expected {kind}, got {value!r}")
    return value


def _parse_seeds(value) -> list:
    if isinstance(value, int):
        if value < 1:
            raise ConfigError("seeds: count must be >= 1")
        return list(range(1, value + 1))
    if isinstance(value, str):
        value = [v for v in value.split(",") if v]
    if isinstance(value, (list, tuple)):
        try:
            return [int(v) for v in value]
        except (TypeError, ValueError):
            raise ConfigError(f"seeds: not an integer list: {value!r}")
    raise ConfigError(f"seeds: expected count or list, got {value!r}")


def _validate_run_config(config: dict) -> dict:
    scenarios = config.get("scenarios", ["case1", "case2"])
    if isinstance(scenarios, str):
        scenarios = [scenarios]
    for s in scenarios:
        if s not in ("case1", "case2"):
            raise ConfigError(f"scenarios: unknown scenario {s!r}")
    methods = config.get("methods", list(METHODS))
    if isinstance(methods, str):
        methods = [m for m in methods.split(",") if m]
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"methods: unknown method {m!r}; choose from {METHODS}")
    snrs = config.get("snr_db", [0.0, 5.0, 10.0])
    if isinstance(snrs, str):
        snrs = [float(v) for v in snrs.split(",") if v]
    if isinstance(snrs, (int, float)):
        snrs = [float(snrs)]
    snrs = [float(v) for v in snrs]
    seeds = _parse_seeds(config.get("seeds", 5))
    channel = _expect(config, "channel", dict, {})
    semantic = _expect(config, "semantic", dict, {})
    calibration_ref = semantic.get("calibration", "paper")
    return {
        "scenarios": scenarios,
        "methods": methods,
        "snr_db": snrs,
        "seeds": seeds,
        "max_rounds": int(config.get("max_rounds", 5)),
        "compression_target": float(config.get("compression_target", 0.4)),
        "verbosity": float(config.get("verbosity", 2.0)),
        "subcarriers": int(channel.get("subcarriers", 64)),
        "taps": int(channel.get("taps", 8)),
        "decay": float(channel.get("decay", 0.5)),
        "beta": float(channel.get("beta", 1.0)),
        "words_per_chunk": int(semantic.get("words_per_chunk", 30)),
        "n_bits": int(semantic.get("n_bits", 1000)),
        "n_prime_bits": int(semantic.get("n_prime_bits", 2000)),
        "calibration": calibration_ref,
        "out": str(config.get("out", "results")),
        "parallel": int(config.get("parallel", 1)),
        "llm_backend": str(config.get("llm_backend", "mock")),
        "llm_base_url": str(config.get("llm_base_url", "")),
        "llm_model": str(config.get("llm_model", "")),
    }


def _resolve_calibration(ref: str):
    if ref == "paper":
        return default_calibration()
    if ref == "ablation":
        return ablation_calibration()
    if not os.path.exists(ref):
        raise ConfigError(f"calibration {ref!r}: no such file")
    return load_calibration(ref)


def _session_config(cfg: dict, scenario: str, method: str, snr: float,
                    seed: int, noise_offset: int = 1000) -> SessionConfig:
    return SessionConfig(
        method=method, scenario=scenario, mean_snr_db=snr,
        seeds=Seeds(channel=seed, noise=seed + noise_offset, scenario=seed),
        max_rounds=cfg["max_rounds"],
        compression_target=cfg["compression_target"],
        verbosity=cfg["verbosity"], num_subcarriers=cfg["subcarriers"],
        n_taps=cfg["taps"], tap_decay=cfg["decay"], beta=cfg["beta"],
        words_per_chunk=cfg["words_per_chunk"], n_bits=cfg["n_bits"],
        n_prime_bits=cfg["n_prime_bits"], llm_backend=cfg["llm_backend"],
        llm_base_url=cfg["llm_base_url"], llm_model=cfg["llm_model"])


def run_cell(cfg: dict, scenario: str, method: str, snr: float, seed: int):
    """One grid job: returns (RunResult, transcript records).

    The knowledge-base variant reports its second execution of the task,
    after one update cycle fed by the first.
    """
    calibration = _resolve_calibration(cfg["calibration"])
    checklist = checklist_for(_session_config(cfg, scenario, method, snr, seed))
    if method == "LC+SC(Im+KB)":
        store = KnowledgeStore()
        warmup = run_session(_session_config(cfg, scenario, method, snr, seed),
                             kb_store=store, calibration=calibration)
        kb_update(warmup, checklist, store)
        transcript = run_session(
            _session_config(cfg, scenario, method, snr, seed, noise_offset=2000),
            kb_store=store, calibration=calibration)
    else:
        transcript = run_session(_session_config(cfg, scenario, method, snr, seed),
                                 calibration=calibration)
    result = result_from_transcript(transcript, checklist, seed)
    records = []
    for record in transcript.to_records():
        record.update({"method": method, "scenario": scenario,
                       "mean_snr_db": snr, "seed": seed})
        records.append(record)
    return result, records


def _run_job(args):
    return run_cell(*args)


def cmd_run(config: dict) -> int:
    cfg = _validate_run_config(config)
    _resolve_calibration(cfg["calibration"])  # fail fast before any writes
    if cfg["llm_backend"] not in ("mock", "http"):
        raise ConfigError(f"llm_backend: expected mock or http, got {cfg['llm_backend']!r}")
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)

    jobs = [(cfg, scenario, method, snr, seed)
            for scenario in cfg["scenarios"]
            for method in cfg["methods"]
            for snr in cfg["snr_db"]
            for seed in cfg["seeds"]]
    if cfg["parallel"] > 1:
        with concurrent.futures.ProcessPoolExecutor(cfg["parallel"]) as pool:
            outputs = list(pool.map(_run_job, jobs, chunksize=4))
    else:
        outputs = [run_cell(*job) for job in jobs]

    by_scenario: dict = {}
    for (job, (result, records)) in zip(jobs, outputs):
        by_scenario.setdefault(job[1], ([], []))
        by_scenario[job[1]][0].append(result)
        by_scenario[job[1]][1].extend(records)

    for scenario, (results, records) in sorted(by_scenario.items()):
        with open(os.path.join(out_dir, f"results_{scenario}.csv"), "w",
                  encoding="utf-8", newline="") as fh:
            fh.write("\n".join(results_csv_lines(results)) + "\n")
        with open(os.path.join(out_dir, f"summary_{scenario}.csv"), "w",
                  encoding="utf-8", newline="") as fh:
            fh.write("\n".join(summary_csv_lines(aggregate(results))) + "\n")
        records.sort(key=lambda r: (r["method"], r["mean_snr_db"], r["seed"],
                                    r["kind"], r.get("round_index", 10 ** 6)))
        with open(os.path.join(out_dir, f"transcripts_{scenario}.jsonl"), "w",
                  encoding="utf-8", newline="") as fh:
            for record in records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        print(f"{scenario}: {len(results)} runs -> {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# Ablation


def _mean(xs):
    return sum(xs) / len(xs)


def _lc_measured_ratio(transcript) -> float:
    """Huffman bits of compressed texts over Huffman bits of the originals."""
    codebook = default_codebook()
    sent = orig = 0
    for r in transcript.rounds:
        orig += huffman_encode(r.query, codebook).size
        orig += huffman_encode(r.response, codebook).size
        sent += huffman_encode(r.query_sent, codebook).size
        sent += huffman_encode(r.response_sent, codebook).size
    return sent / orig if orig else 1.0


def _ablation_cell(cfg, method, snr, seeds, target, n_bits, calibration):
    srs, ratios = [], []
    for seed in seeds:
        scfg = SessionConfig(
            method=method, scenario="case1", mean_snr_db=snr,
            seeds=Seeds(channel=seed, noise=seed + 1000, scenario=seed),
            compression_target=target, verbosity=cfg["verbosity"],
            n_bits=n_bits, n_prime_bits=max(2 * n_bits, n_bits + 1))
        transcript = run_session(scfg, calibration=calibration)
        checklist = checklist_for(scfg)
        srs.append(result_from_transcript(transcript, checklist, seed).sr_percent)
        ratios.append(_lc_measured_ratio(transcript))
    n = len(srs)
    mean = _mean(srs)
    std = (sum((x - mean) ** 2 for x in srs) / n) ** 0.5
    return mean, std, _mean(ratios), n


ABLATION_HEADER = ("sweep,method,x,snr_db,seeds,sr_mean,sr_std,"
                   "measured_lc_ratio")


def cmd_ablation(config: dict) -> int:
    cfg = _validate_run_config(config)
    ab = config.get("ablation", {})
    seeds = _parse_seeds(ab.get("seeds", config.get("seeds", 20)))
    lc_targets = [float(x) for x in ab.get("lc_targets", [0.2, 0.4, 0.6, 0.8, 1.0])]
    sc_budgets = [int(x) for x in ab.get("sc_budgets", [250, 500, 1000, 2000])]
    lcsc_ratios = [float(x) for x in ab.get("lcsc_ratios",
                                            [0.15, 0.3, 0.45, 0.6, 0.8, 1.0])]
    lc_snr = float(ab.get("lc_snr_db", 30.0))
    sc_snr = float(ab.get("sc_snr_db", 0.0))
    snr_sweep = [float(x) for x in ab.get("snr_sweep_db", [0.0, 5.0, 10.0])]
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    table = ablation_calibration()

    lines = [ABLATION_HEADER]

    # Compression-ratio sweep for the prompt-driven compressor, on a clean
    # channel so bandwidth effects are isolated from channel noise.
    for target in lc_targets:
        mean, std, ratio, n = _ablation_cell(cfg, "LC", lc_snr, seeds, target,
                                             cfg["n_bits"], table)
        lines.append(f"lc,LC,{target:g},{lc_snr:g},{n},{mean:.6g},{std:.6g},{ratio:.6g}")

    # Bit-budget sweep for the sentence codec alone (no compression).
    for n_bits in sc_budgets:
        mean, std, ratio, n = _ablation_cell(cfg, "LC+SC", sc_snr, seeds, 1.0,
                                             n_bits, table)
        lines.append(f"sc,SC,{n_bits / 1000:g},{sc_snr:g},{n},{mean:.6g},{std:.6g},1")

    # Combined rule: compression only down to 0.6, codec bits below that.
    for r in lcsc_ratios:
        if r >= 0.6:
            target, n_bits = r, 1000
        else:
            target = 0.6
            n_bits = min(sc_budgets, key=lambda b: abs(b - 1000 * r / 0.6))
        mean, std, ratio, n = _ablation_cell(cfg, "LC+SC", sc_snr, seeds,
                                             target, n_bits, table)
        lines.append(f"lcsc,LC+SC,{r:g},{sc_snr:g},{n},{mean:.6g},{std:.6g},{ratio:.6g}")

    # SNR sweep at fixed budget for the three processing styles.
    for snr in snr_sweep:
        for method, target in (("LC", cfg["compression_target"]),
                               ("LC+SC", cfg["compression_target"])):
            mean, std, ratio, n = _ablation_cell(cfg, method, snr, seeds,
                                                 target, cfg["n_bits"], table)
            lines.append(f"snr,{method},{snr:g},{snr:g},{n},{mean:.6g},{std:.6g},{ratio:.6g}")
        mean, std, ratio, n = _ablation_cell(cfg, "LC+SC", snr, seeds, 1.0,
                                             cfg["n_bits"], table)
        lines.append(f"snr,SC,{snr:g},{snr:g},{n},{mean:.6g},{std:.6g},1")

    path = os.path.join(out_dir, "ablation.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"ablation -> {path}")
    return 0


def cmd_calibrate_check(path: str) -> int:
    """Schema, range and monotonicity validation of a calibration CSV."""
    import csv as _csv
    import io as _io
    if not os.path.exists(path):
        print(f"calibrate-check: no such file: {path}", file=sys.stderr)
        return USAGE_ERROR
    raw_rows = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            content = fh.read()
        data_lines = [ln for ln in content.splitlines()
                      if ln.strip() and not ln.strip().startswith("#")]
        reader = _csv.DictReader(_io.StringIO("\n".join(data_lines)))
        for rec in reader:
            raw_rows.append((int(rec["n_bits"]), float(rec["esnr_db"]),
                             float(rec["wer"])))
        table = load_calibration(path)
    except (ValueError, KeyError, TypeError) as exc:
        print(f"calibrate-check: invalid file: {exc}", file=sys.stderr)
        return USAGE_ERROR
    print(f"provenance: {table.provenance}")
    print(f"budgets: {table.budgets()}")
    repaired = dict(((n, e), w) for n, e, w in table.rows)
    fired = False
    for n, e, w in raw_rows:
        if abs(repaired[(n, e)] - w) > 1e-12:
            fired = True
            print(f"repaired: n_bits={n} esnr_db={e:g} wer {w:g} -> "
                  f"{repaired[(n, e)]:g}")
    if not fired:
        print("monotone: no isotonic repair needed")
    print("ok")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semlink",
        description="agent-to-agent link simulation experiments")
    parser.add_argument("--export-vocab", metavar="PATH",
                        help="write the shared vocabulary JSON and exit")
    parser.add_argument("--export-corpus", metavar="PATH",
                        help="write the scenario corpus text and exit")
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="execute an experiment grid")
    run_p.add_argument("--config", default="smoke",
                       help="config path or shipped name (default: smoke)")
    run_p.add_argument("--methods", help="comma list overriding the config")
    run_p.add_argument("--snr-db", help="comma list overriding the config")
    run_p.add_argument("--seeds", help="count or comma list")
    run_p.add_argument("--scenario", choices=["case1", "case2"])
    run_p.add_argument("--out", help="output directory")
    run_p.add_argument("--parallel", type=int)
    run_p.add_argument("--llm-backend", choices=["mock", "http"])

    ab_p = sub.add_parser("ablation", help="bandwidth and SNR sweeps")
    ab_p.add_argument("--config", default="ablation")
    ab_p.add_argument("--out", help="output directory")
    ab_p.add_argument("--seeds", help="count or comma list")

    chk_p = sub.add_parser("calibrate-check", help="validate a calibration CSV")
    chk_p.add_argument("file")

    exp_p = sub.add_parser("export", help="write trainer input files")
    exp_p.add_argument("--vocab", metavar="PATH")
    exp_p.add_argument("--corpus", metavar="PATH")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        if args.export_vocab or args.export_corpus:
            if args.export_vocab:
                export_vocabulary(args.export_vocab)
                print(f"vocabulary -> {args.export_vocab}")
            if args.export_corpus:
                export_corpus(args.export_corpus)
                print(f"corpus -> {args.export_corpus}")
            return 0
        if args.command == "run":
            config = _load_config(args.config)
            if args.methods:
                config["methods"] = args.methods
            if args.snr_db:
                config["snr_db"] = args.snr_db
            if args.seeds:
                config["seeds"] = args.seeds
            if args.scenario:
                config["scenarios"] = [args.scenario]
            if args.out:
                config["out"] = args.out
            if args.parallel:
                config["parallel"] = args.parallel
            if args.llm_backend:
                config["llm_backend"] = args.llm_backend
            return cmd_run(config)
        if args.command == "ablation":
            config = _load_config(args.config)
            if args.out:
                config["out"] = args.out
            if args.seeds:
                config.setdefault("ablation", {})["seeds"] = args.seeds
            return cmd_ablation(config)
        if args.command == "calibrate-check":
            return cmd_calibrate_check(args.file)
        if args.command == "export":
            if not args.vocab and not args.corpus:
                print("export: provide --vocab and/or --corpus", file=sys.stderr)
                return USAGE_ERROR
            if args.vocab:
                export_vocabulary(args.vocab)
                print(f"vocabulary -> {args.vocab}")
            if args.corpus:
                export_corpus(args.corpus)
                print(f"corpus -> {args.corpus}")
            return 0
        parser.print_help()
        return USAGE_ERROR
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # runtime failures map to exit code 1
        print(f"runtime error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
