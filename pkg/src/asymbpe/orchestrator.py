"""End-to-end sweep driver.

For each (dataset size, repetition): draw a stratified sample of the
training corpus, learn one merge table per (side, NMO), then for every
configuration segment all splits, invoke the translation backend, de-segment
its hypotheses, score CHRF++ against the raw references, and test
significance against the best symmetric configuration of the same cell.
Every run leaves a JSON record on disk; completed records are skipped on
rerun, so an interrupted sweep can resume without changing earlier scores.

The backend is an external command template. Two built-in mocks exist for
pipeline testing: ``mock:echo-reference`` copies the reference file and
``mock:identity`` copies the de-segmented source.
"""

import json
import os
import shutil
import string
import subprocess
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import bpe, chrf, sampler
from .sweep import (BpeConfig, SystemResult, enumerate_grid, format_nmo, parse_nmo,
                    render_tier_text, render_tier_tsv, tier_report, SweepError)

SCHEMA_VERSION = 1

RESULTS_COLUMNS = ("config", "src_nmo", "tgt_nmo", "direction", "size", "rep",
                   "testset", "chrf", "p_vs_baseline", "status")

BACKEND_PLACEHOLDERS = {"train_src", "train_tgt", "valid_src", "valid_tgt",
                        "test_src", "model_dir", "hyp_out", "config"}

MOCK_ECHO_REFERENCE = "mock:echo-reference"
MOCK_IDENTITY = "mock:identity"

_CONFIG_FIELDS = {
    "schema", "train_src", "train_tgt", "valid_src", "valid_tgt",
    "test_src", "test_tgt", "direction", "sizes", "nmo_set", "backend",
    "output_dir", "seed", "repetitions", "workers",
    "significance_iterations", "extra_test_sets", "bins", "granularity",
}

_REQUIRED_FIELDS = ("train_src", "train_tgt", "valid_src", "valid_tgt",
                    "test_src", "test_tgt", "direction", "sizes", "nmo_set",
                    "backend", "output_dir")


class OrchestratorError(ValueError):
    pass


@dataclass
class TestSet:
    name: str
    src: str
    tgt: str


@dataclass
class ExperimentConfig:
    train_src: str
    train_tgt: str
    valid_src: str
    valid_tgt: str
    test_sets: list
    direction: str
    sizes: list
    nmo_set: list
    backend_command: str
    output_dir: str
    seed: int = 0
    repetitions: int = 1
    workers: int = 1
    significance_iterations: int = 10000
    backend_timeout: float | None = None
    bin_boundaries: tuple = sampler.DEFAULT_BOUNDARIES
    granularity: int = 10

    @property
    def src_lang(self) -> str:
        return self.direction.split("-")[0]

    @property
    def tgt_lang(self) -> str:
        return self.direction.split("-")[1]

    def planned_runs(self) -> int:
        return (len(self.sizes) * len(self.nmo_set) ** 2 * self.repetitions
                * len(self.test_sets))


@dataclass
class RunRecord:
    config_label: str
    src_nmo: int
    tgt_nmo: int
    direction: str
    size: int
    rep: int
    testset: str
    seed: int
    status: str = "pending"            # pending | done | failed
    chrf: float | None = None
    p_vs_baseline: float | None = None
    failure_reason: str | None = None
    started: float | None = None
    finished: float | None = None
    artifacts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(**d)


def _check_backend_template(command: str):
    if command in (MOCK_ECHO_REFERENCE, MOCK_IDENTITY):
        return
    fields = [f for _, f, _, _ in string.Formatter().parse(command) if f]
    unknown = set(fields) - BACKEND_PLACEHOLDERS
    if unknown:
        raise OrchestratorError("unknown backend placeholders: %s" % ", ".join(sorted(unknown)))
    if len(fields) != len(set(fields)):
        raise OrchestratorError("backend placeholders may be used at most once")
    if "hyp_out" not in fields:
        raise OrchestratorError("backend command must use the {hyp_out} placeholder")


def load_experiment(path) -> ExperimentConfig:
    """Load and validate the JSON experiment config (schema 1)."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    unknown = set(raw) - _CONFIG_FIELDS
    if unknown:
        raise OrchestratorError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    missing = [f for f in _REQUIRED_FIELDS if f not in raw]
    if missing:
        raise OrchestratorError("missing config fields: %s" % ", ".join(missing))
    if raw.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise OrchestratorError("unsupported schema version %r" % raw.get("schema"))

    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    test_sets = [TestSet("test", resolve(raw["test_src"]), resolve(raw["test_tgt"]))]
    for extra in raw.get("extra_test_sets", []):
        for key in ("name", "src", "tgt"):
            if key not in extra:
                raise OrchestratorError("extra test set missing field %r" % key)
        test_sets.append(TestSet(extra["name"], resolve(extra["src"]), resolve(extra["tgt"])))

    backend = raw["backend"]
    if isinstance(backend, str):
        backend = {"command": backend}
    if "command" not in backend:
        raise OrchestratorError("backend requires a 'command' template")
    _check_backend_template(backend["command"])

    if "-" not in raw["direction"]:
        raise OrchestratorError("direction must look like 'en-hi'")

    cfg = ExperimentConfig(
        train_src=resolve(raw["train_src"]),
        train_tgt=resolve(raw["train_tgt"]),
        valid_src=resolve(raw["valid_src"]),
        valid_tgt=resolve(raw["valid_tgt"]),
        test_sets=test_sets,
        direction=raw["direction"],
        sizes=[int(s) for s in raw["sizes"]],
        nmo_set=[parse_nmo(v) for v in raw["nmo_set"]],
        backend_command=backend["command"],
        output_dir=resolve(raw["output_dir"]),
        seed=int(raw.get("seed", 0)),
        repetitions=int(raw.get("repetitions", 1)),
        workers=int(raw.get("workers", 1)),
        significance_iterations=int(raw.get("significance_iterations", 10000)),
        backend_timeout=backend.get("timeout"),
        bin_boundaries=tuple(raw.get("bins", sampler.DEFAULT_BOUNDARIES)),
        granularity=int(raw.get("granularity", 10)),
    )
    if not cfg.nmo_set:
        raise OrchestratorError("nmo_set must be non-empty")
    if cfg.repetitions < 1:
        raise OrchestratorError("repetitions must be >= 1")
    for name in ("train_src", "train_tgt", "valid_src", "valid_tgt"):
        if not os.path.exists(getattr(cfg, name)):
            raise OrchestratorError("%s path does not exist: %s" % (name, getattr(cfg, name)))
    for ts in cfg.test_sets:
        for p in (ts.src, ts.tgt):
            if not os.path.exists(p):
                raise OrchestratorError("test set %r path does not exist: %s" % (ts.name, p))
    return cfg


def _read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def _write_lines(path, lines):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")
    os.replace(tmp, path)


def _segment_file(table, src_path, out_path):
    _write_lines(out_path, [bpe.segment_line(table, line) for line in _read_lines(src_path)])


class _TableStore:
    """Merge tables keyed by (side, nmo), built once per cell; thread-safe."""

    def __init__(self, directory):
        self.directory = directory
        self._lock = threading.Lock()
        self._locks = {}
        self._tables = {}

    def _key_lock(self, key):
        with self._lock:
            return self._locks.setdefault(key, threading.Lock())

    def get(self, side: str, nmo: int, train_lines) -> tuple:
        key = (side, nmo)
        with self._key_lock(key):
            if key not in self._tables:
                path = os.path.join(self.directory, "%s.%s.bpe" % (side, format_nmo(nmo)))
                if os.path.exists(path):
                    table = bpe.MergeTable.load(path)
                else:
                    table = bpe.learn_bpe(train_lines, nmo)
                    os.makedirs(self.directory, exist_ok=True)
                    table.save(path)
                self._tables[key] = (table, path)
            return self._tables[key]


def _invoke_backend(cfg: ExperimentConfig, paths: dict, testset: TestSet):
    command = cfg.backend_command
    if command == MOCK_ECHO_REFERENCE:
        shutil.copyfile(testset.tgt, paths["hyp_out"])
        return
    if command == MOCK_IDENTITY:
        _write_lines(paths["hyp_out"],
                     [bpe.unsegment(line) for line in _read_lines(paths["test_src"])])
        return
    rendered = command.format(**paths)
    proc = subprocess.run(rendered, shell=True, timeout=cfg.backend_timeout,
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise OrchestratorError("backend exited %d: %s" % (
            proc.returncode, (proc.stderr or proc.stdout).strip()[-500:]))
    if not os.path.exists(paths["hyp_out"]):
        raise OrchestratorError("backend produced no hypothesis file at %s" % paths["hyp_out"])


def _record_path(run_dir):
    return os.path.join(run_dir, "record.json")


def _save_record(run_dir, record: RunRecord):
    os.makedirs(run_dir, exist_ok=True)
    tmp = _record_path(run_dir) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(record.to_dict(), fh, indent=2, sort_keys=True)
    os.replace(tmp, _record_path(run_dir))


def _load_record(run_dir):
    path = _record_path(run_dir)
    if not os.path.exists(path):
        return None
    with open(path, encoding="utf-8") as fh:
        return RunRecord.from_dict(json.load(fh))


def run_sweep(cfg: ExperimentConfig, resume: bool = True) -> list:
    """Execute the full sweep; returns one RunRecord per planned run."""
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    manifest = {
        "schema": SCHEMA_VERSION,
        "direction": cfg.direction,
        "sizes": cfg.sizes,
        "nmo_set": cfg.nmo_set,
        "seed": cfg.seed,
        "repetitions": cfg.repetitions,
        "planned_runs": cfg.planned_runs(),
        "significance_iterations": cfg.significance_iterations,
        "assumptions": ["validation data is segmented with the same "
                        "per-configuration merge tables as training data"],
    }
    with open(os.path.join(out, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)

    train_src = _read_lines(cfg.train_src)
    train_tgt = _read_lines(cfg.train_tgt)
    bins = sampler.make_bins(cfg.bin_boundaries)
    histogram = sampler.bin_histogram(train_src, train_tgt, bins)

    records = []
    for size in cfg.sizes:
        for rep in range(cfg.repetitions):
            cell_seed = cfg.seed + rep
            cell_dir = os.path.join(out, "size%d" % size, "rep%d" % rep)
            records.extend(_run_cell(cfg, size, rep, cell_seed, cell_dir,
                                     train_src, train_tgt, histogram, resume))
    return records


def _run_cell(cfg, size, rep, cell_seed, cell_dir, train_src, train_tgt,
              histogram, resume):
    sample_dir = os.path.join(cell_dir, "sample")
    s_src, s_tgt = os.path.join(sample_dir, "train.src"), os.path.join(sample_dir, "train.tgt")
    if not (resume and os.path.exists(s_src) and os.path.exists(s_tgt)):
        plan = sampler.make_sample_plan(histogram, size, cell_seed, cfg.granularity)
        src_sample, tgt_sample, _ = sampler.draw_sample(train_src, train_tgt, plan)
        _write_lines(s_src, src_sample)
        _write_lines(s_tgt, tgt_sample)
        with open(os.path.join(sample_dir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump({"bin_plan": histogram.to_dict(), "sample_plan": plan.to_dict()},
                      fh, indent=2)
    sampled_src = _read_lines(s_src)
    sampled_tgt = _read_lines(s_tgt)

    tables = _TableStore(os.path.join(cell_dir, "tables"))
    # Build shared tables up front so configurations only read them.
    for nmo in cfg.nmo_set:
        tables.get(cfg.src_lang, nmo, sampled_src)
        tables.get(cfg.tgt_lang, nmo, sampled_tgt)

    configs = enumerate_grid(cfg.nmo_set)
    jobs = [(config, testset) for config in configs for testset in cfg.test_sets]

    def run_one(job):
        config, testset = job
        return _run_config(cfg, size, rep, cell_seed, cell_dir, config, testset,
                           tables, sampled_src, sampled_tgt, resume)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(run_one, jobs))
    else:
        records = [run_one(job) for job in jobs]

    _add_significance(cfg, cell_dir, records)
    return records


def _run_config(cfg, size, rep, cell_seed, cell_dir, config: BpeConfig,
                testset: TestSet, tables, sampled_src, sampled_tgt, resume):
    run_dir = os.path.join(cell_dir, config.label, testset.name)
    if resume:
        existing = _load_record(run_dir)
        if existing is not None and existing.status in ("done", "failed"):
            return existing

    record = RunRecord(config_label=config.label, src_nmo=config.src_nmo,
                       tgt_nmo=config.tgt_nmo, direction=cfg.direction,
                       size=size, rep=rep, testset=testset.name,
                       seed=cell_seed, started=time.time())
    src_table, src_table_path = tables.get(cfg.src_lang, config.src_nmo, sampled_src)
    tgt_table, tgt_table_path = tables.get(cfg.tgt_lang, config.tgt_nmo, sampled_tgt)

    paths = {
        "train_src": os.path.join(run_dir, "train.bpe.src"),
        "train_tgt": os.path.join(run_dir, "train.bpe.tgt"),
        "valid_src": os.path.join(run_dir, "valid.bpe.src"),
        "valid_tgt": os.path.join(run_dir, "valid.bpe.tgt"),
        "test_src": os.path.join(run_dir, "test.bpe.src"),
        "model_dir": os.path.join(run_dir, "model"),
        "hyp_out": os.path.join(run_dir, "hyp.txt"),
        "config": config.label,
    }
    try:
        _write_lines(paths["train_src"], [bpe.segment_line(src_table, l) for l in sampled_src])
        _write_lines(paths["train_tgt"], [bpe.segment_line(tgt_table, l) for l in sampled_tgt])
        _segment_file(src_table, cfg.valid_src, paths["valid_src"])
        _segment_file(tgt_table, cfg.valid_tgt, paths["valid_tgt"])
        _segment_file(src_table, testset.src, paths["test_src"])
        os.makedirs(paths["model_dir"], exist_ok=True)

        _invoke_backend(cfg, paths, testset)

        refs = _read_lines(testset.tgt)
        hyps = _read_lines(paths["hyp_out"])
        if len(hyps) != len(refs):
            raise OrchestratorError(
                "hypothesis line count %d does not match test set %d" % (len(hyps), len(refs)))
        detok = [bpe.unsegment(line) for line in hyps]
        detok_path = os.path.join(run_dir, "hyp.detok.txt")
        _write_lines(detok_path, detok)

        score = chrf.corpus_chrf_from_lines(detok, refs)
        record.chrf = round(score.value, 6)
        record.status = "done"
        record.artifacts = {
            "src_table": src_table_path, "tgt_table": tgt_table_path,
            "hypothesis": paths["hyp_out"], "hypothesis_detok": detok_path,
        }
    except (OrchestratorError, bpe.BpeError, chrf.ChrfError,
            subprocess.TimeoutExpired, OSError) as exc:
        record.status = "failed"
        record.failure_reason = str(exc)
    record.finished = time.time()
    _save_record(run_dir, record)
    return record


def _add_significance(cfg, cell_dir, records):
    """Paired significance of every completed run against the cell baseline."""
    by_testset = {}
    for rec in records:
        by_testset.setdefault(rec.testset, []).append(rec)
    for testset_name, cell in by_testset.items():
        done = [r for r in cell if r.status == "done"]
        symmetric = [r for r in done if r.src_nmo == r.tgt_nmo]
        if not symmetric:
            continue
        baseline = max(symmetric, key=lambda r: (r.chrf, -r.src_nmo))
        base_dir = os.path.join(cell_dir, baseline.config_label, testset_name)
        base_hyps = _read_lines(os.path.join(base_dir, "hyp.detok.txt"))
        testset = next(t for t in cfg.test_sets if t.name == testset_name)
        refs = _read_lines(testset.tgt)
        for rec in done:
            if rec.p_vs_baseline is not None:
                continue
            run_dir = os.path.join(cell_dir, rec.config_label, testset_name)
            hyps = _read_lines(os.path.join(run_dir, "hyp.detok.txt"))
            result = chrf.paired_significance(
                hyps, base_hyps, refs, iterations=cfg.significance_iterations,
                seed=rec.seed)
            rec.p_vs_baseline = round(result.p_value, 6)
            _save_record(run_dir, rec)


def collect_records(run_dir) -> list:
    """Load every persisted RunRecord under a sweep output directory."""
    records = []
    for root, _dirs, files in os.walk(run_dir):
        if "record.json" in files:
            records.append(_load_record(root))
    records.sort(key=lambda r: (r.size, r.rep, r.testset, r.src_nmo, r.tgt_nmo))
    return records


def emit_report(records, out_dir) -> dict:
    """Write results.tsv, per-cell tier reports, the per-source-NMO maximum
    trace, and a repetition-averaged summary. Returns the artifact paths."""
    records = list(records)
    completed = [r for r in records if r.status == "done"]
    if not completed:
        raise OrchestratorError("no completed records to report")
    os.makedirs(out_dir, exist_ok=True)

    results_path = os.path.join(out_dir, "results.tsv")
    with open(results_path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(RESULTS_COLUMNS) + "\n")
        for r in records:
            fh.write("\t".join([
                r.config_label, str(r.src_nmo), str(r.tgt_nmo), r.direction,
                str(r.size), str(r.rep), r.testset,
                "%.2f" % r.chrf if r.chrf is not None else "",
                "%.4f" % r.p_vs_baseline if r.p_vs_baseline is not None else "",
                r.status]) + "\n")

    artifacts = {"results": results_path, "tiers": [], "max_trace": None, "summary": None}

    cells = {}
    for r in completed:
        cells.setdefault((r.direction, r.size, r.rep, r.testset), []).append(r)
    tier_dir = os.path.join(out_dir, "tiers")
    for (direction, size, rep, testset), cell in sorted(cells.items()):
        results = [SystemResult(BpeConfig(r.src_nmo, r.tgt_nmo), r.chrf,
                                direction, size, testset, r.p_vs_baseline)
                   for r in cell]
        try:
            report = tier_report(results)
        except SweepError:
            continue  # not enough coverage for tiers in this cell
        os.makedirs(tier_dir, exist_ok=True)
        stem = "%s_size%d_rep%d_%s" % (direction, size, rep, testset)
        tsv_path = os.path.join(tier_dir, stem + ".tsv")
        with open(tsv_path, "w", encoding="utf-8") as fh:
            fh.write(render_tier_tsv(report))
        with open(os.path.join(tier_dir, stem + ".txt"), "w", encoding="utf-8") as fh:
            fh.write(render_tier_text(report))
        artifacts["tiers"].append(tsv_path)

    # Stepped-maximum trace: best score per source NMO within each cell.
    max_path = os.path.join(out_dir, "src_nmo_max.tsv")
    with open(max_path, "w", encoding="utf-8") as fh:
        fh.write("direction\tsize\trep\ttestset\tsrc_nmo\tmax_chrf\tbest_config\n")
        for (direction, size, rep, testset), cell in sorted(cells.items()):
            per_src = {}
            for r in cell:
                cur = per_src.get(r.src_nmo)
                if cur is None or r.chrf > cur.chrf:
                    per_src[r.src_nmo] = r
            for src_nmo in sorted(per_src):
                best = per_src[src_nmo]
                fh.write("%s\t%d\t%d\t%s\t%d\t%.2f\t%s\n" % (
                    direction, size, rep, testset, src_nmo, best.chrf,
                    best.config_label))
    artifacts["max_trace"] = max_path

    # Mean corpus score per configuration across repetitions.
    summary_path = os.path.join(out_dir, "summary.tsv")
    groups = {}
    for r in completed:
        groups.setdefault((r.direction, r.size, r.testset, r.config_label), []).append(r.chrf)
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("direction\tsize\ttestset\tconfig\tmean_chrf\trepetitions\n")
        for (direction, size, testset, label), scores in sorted(groups.items()):
            fh.write("%s\t%d\t%s\t%s\t%.2f\t%d\n" % (
                direction, size, testset, label, sum(scores) / len(scores), len(scores)))
    artifacts["summary"] = summary_path
    return artifacts
