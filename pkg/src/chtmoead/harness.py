"""Experiment configuration, seeded multi-run execution and CSV/JSON output.

Config files are JSON objects::

    {
      "problem": "cre21",
      "cht": "high_static",          # base name or preset, see list-chts
      "cht_params": {"beta": 1000},  # optional overrides
      "moead": {"population": 100, "T": 20, "delta": 0.9, "nr": 2,
                "eta_x": 20, "eta_m": 20, "pc": 1.0, "pm": null, "H": null,
                "violation_scaling": "per_constraint"},
      "budget": 20000,
      "reps": 10,
      "seed": 1,
      "output_dir": "results"
    }

Only ``problem`` and ``cht`` are required. Unknown keys are rejected.

Every run writes ``<output_dir>/<problem>__<cht>__<config hash>__s<seed>/``
containing ``manifest.json``, ``trace.csv`` and ``population.csv``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
from scipy.stats import mannwhitneyu

from . import __version__
from .cht import PRESETS, make_strategy, strategy_params
from .metrics import AnytimeTrace, TraceRecord
from .moead import VIOLATION_SCALINGS, MoeadParams, Population, run
from .problems import get_problem

TOP_KEYS = {"problem", "cht", "cht_params", "moead", "budget", "reps", "seed", "output_dir"}
MOEAD_KEYS = {f.name for f in fields(MoeadParams)} - {"budget"}

DEFAULT_BUDGET = 20_000
DEFAULT_REPS = 10
DEFAULT_SEED = 1

SUMMARY_COLUMNS = [
    "problem", "cht", "config_hash", "n_runs",
    "hv_mean", "hv_median", "hv_sd",
    "feas_mean", "feas_median", "feas_sd",
    "p_vs_none", "manifest_hashes",
]
TRACE_COLUMNS = ["generation", "evaluations", "hypervolume", "feasibility_ratio",
                 "best_so_far_hv", "manifest_hash"]
ANYTIME_COLUMNS = ["generation", "evaluations", "n_runs", "hv_median", "hv_q25", "hv_q75",
                   "best_so_far_median", "feas_median", "config_hash"]


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


def fmt(x) -> str:
    """Fixed 12-significant-digit text form used in every CSV."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    cht: str
    cht_params: dict
    moead: MoeadParams
    reps: int = DEFAULT_REPS
    seed: int = DEFAULT_SEED
    output_dir: str = "results"

    def to_dict(self) -> dict[str, Any]:
        moead = asdict(self.moead)
        budget = moead.pop("budget")
        return {
            "problem": self.problem,
            "cht": self.cht,
            "cht_params": self.cht_params,
            "moead": moead,
            "budget": budget,
            "reps": self.reps,
            "seed": self.seed,
            "output_dir": self.output_dir,
        }

    def algorithm_dict(self) -> dict[str, Any]:
        """The part of the config that determines a run's output (seed aside)."""
        d = self.to_dict()
        for k in ("reps", "seed", "output_dir"):
            d.pop(k)
        return d

    @property
    def config_hash(self) -> str:
        return _hash(self.algorithm_dict())

    @property
    def setting_hash(self) -> str:
        """Hash of everything except the CHT, used to pair a CHT with its No Penalty control."""
        d = self.algorithm_dict()
        d.pop("cht")
        d.pop("cht_params")
        return _hash(d)

    def with_overrides(self, seed=None, reps=None, budget=None, output_dir=None) -> "ExperimentConfig":
        d = self.to_dict()
        if seed is not None:
            d["seed"] = seed
        if reps is not None:
            d["reps"] = reps
        if budget is not None:
            d["budget"] = budget
        if output_dir is not None:
            d["output_dir"] = str(output_dir)
        return config_from_dict(d)


def _require_int(value, path, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value}")
    return value


def config_from_dict(raw: dict[str, Any]) -> ExperimentConfig:
    """Validate a raw config mapping and materialize every default."""
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"config: unknown key(s) {sorted(unknown)}")
    for key in ("problem", "cht"):
        if key not in raw:
            raise ConfigError(f"{key}: required key missing")
        if not isinstance(raw[key], str):
            raise ConfigError(f"{key}: expected a string")

    try:
        problem = get_problem(raw["problem"])
    except ValueError as exc:
        raise ConfigError(f"problem: {exc}") from None

    cht_name = raw["cht"].strip().lower()
    cht_params = raw.get("cht_params", {}) or {}
    if not isinstance(cht_params, dict):
        raise ConfigError("cht_params: expected an object")
    try:
        strategy = make_strategy(cht_name, cht_params)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cht: {exc}") from None

    moead_raw = raw.get("moead", {}) or {}
    if not isinstance(moead_raw, dict):
        raise ConfigError("moead: expected an object")
    unknown = set(moead_raw) - MOEAD_KEYS
    if unknown:
        raise ConfigError(f"moead: unknown key(s) {sorted(unknown)}")
    scaling = moead_raw.get("violation_scaling", MoeadParams.violation_scaling)
    if scaling not in VIOLATION_SCALINGS:
        raise ConfigError(f"moead.violation_scaling: expected one of {sorted(VIOLATION_SCALINGS)}")
    for key in ("population", "T", "nr", "H"):
        if moead_raw.get(key) is not None:
            _require_int(moead_raw[key], f"moead.{key}", 0)
    budget = _require_int(raw.get("budget", DEFAULT_BUDGET), "budget", 1)
    try:
        params = MoeadParams(**moead_raw, budget=budget).resolve(problem)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"moead: {exc}") from None

    return ExperimentConfig(
        problem=problem.name,
        cht=cht_name,
        cht_params=strategy_params(strategy),
        moead=params,
        reps=_require_int(raw.get("reps", DEFAULT_REPS), "reps", 1),
        seed=_require_int(raw.get("seed", DEFAULT_SEED), "seed", 0),
        output_dir=str(raw.get("output_dir", "results")),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} ({exc.msg})") from None
    return config_from_dict(raw)


@dataclass
class RunRecord:
    manifest: dict[str, Any]
    trace: AnytimeTrace
    population: Population | None = None
    path: Path | None = None

    @property
    def problem(self) -> str:
        return self.manifest["config"]["problem"]

    @property
    def cht(self) -> str:
        return self.manifest["config"]["cht"]


def run_dir_name(cfg: ExperimentConfig, seed: int) -> str:
    return f"{cfg.problem.replace(':', '-')}__{cfg.cht}__{cfg.config_hash}__s{seed}"


def _manifest(cfg: ExperimentConfig, seed: int) -> dict[str, Any]:
    config = cfg.to_dict()
    config["seed"] = seed
    config.pop("reps")
    config.pop("output_dir")
    body = {"config": config, "seed": seed, "version": __version__}
    return {
        **body,
        "config_hash": cfg.config_hash,
        "setting_hash": cfg.setting_hash,
        "manifest_hash": _hash(body),
        "rng": "numpy PCG64 (numpy.random.default_rng(seed))",
    }


def trace_csv(trace: AnytimeTrace, manifest_hash: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    best = trace.best_so_far
    for rec, b in zip(trace, best):
        w.writerow([fmt(rec.generation), fmt(rec.evaluations), fmt(rec.hypervolume),
                    fmt(rec.feasibility_ratio), fmt(b), manifest_hash])
    return buf.getvalue()


def population_csv(pop: Population, manifest_hash: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n, m, k = pop.X.shape[1], pop.F.shape[1], pop.G.shape[1]
    w.writerow(["index"] + [f"x{i + 1}" for i in range(n)] + [f"f{i + 1}" for i in range(m)]
               + [f"g{i + 1}" for i in range(k)] + ["violation", "manifest_hash"])
    for i in range(len(pop)):
        w.writerow([i] + [fmt(v) for v in pop.X[i]] + [fmt(v) for v in pop.F[i]]
                   + [fmt(v) for v in pop.G[i]] + [fmt(pop.V[i]), manifest_hash])
    return buf.getvalue()


def _write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def execute_run(cfg: ExperimentConfig, seed: int, out_dir: Path | None = None) -> RunRecord:
    """One seeded run; writes its files when ``out_dir`` is given."""
    manifest = _manifest(cfg, seed)
    run_path = None
    if out_dir is not None:
        run_path = Path(out_dir) / run_dir_name(cfg, seed)
        run_path.mkdir(parents=True, exist_ok=True)
        _write_manifest(run_path / "manifest.json", {**manifest, "complete": False})

    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    result = run(get_problem(cfg.problem), make_strategy(cfg.cht, cfg.cht_params), cfg.moead, seed)
    manifest["wall_clock_seconds"] = round(time.perf_counter() - t0, 3)
    manifest["started_at"] = started.isoformat(timespec="seconds")
    manifest["evaluations"] = result.state.evaluations
    manifest["generations"] = result.state.generation

    if run_path is not None:
        (run_path / "trace.csv").write_text(trace_csv(result.trace, manifest["manifest_hash"]), encoding="utf-8")
        (run_path / "population.csv").write_text(
            population_csv(result.population, manifest["manifest_hash"]), encoding="utf-8")
        manifest["complete"] = True
        _write_manifest(run_path / "manifest.json", manifest)
    else:
        manifest["complete"] = True
    return RunRecord(manifest, result.trace, result.population, run_path)


def _execute_star(args):
    return execute_run(*args)


def run_experiment(cfg: ExperimentConfig, workers: int = 1, write: bool = True) -> list[RunRecord]:
    """``cfg.reps`` independent runs with seeds ``cfg.seed + r``.

    Runs share nothing but immutable inputs, so ``workers > 1`` executes them
    in separate processes without changing any output.
    """
    out_dir = Path(cfg.output_dir) if write else None
    jobs = [(cfg, cfg.seed + r, out_dir) for r in range(cfg.reps)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_execute_star, jobs))
    return [execute_run(*job) for job in jobs]


def load_trace(path) -> AnytimeTrace:
    trace = AnytimeTrace()
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            trace.append(TraceRecord(int(row["generation"]), int(row["evaluations"]),
                                     float(row["hypervolume"]), float(row["feasibility_ratio"])))
    return trace


def load_results(results_dir) -> list[RunRecord]:
    """Read every complete run directory below ``results_dir``."""
    records = []
    for mpath in sorted(Path(results_dir).glob("*/manifest.json")):
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
        if not manifest.get("complete"):
            continue
        records.append(RunRecord(manifest, load_trace(mpath.parent / "trace.csv"), None, mpath.parent))
    return records


def group_results(results) -> dict[tuple, list[RunRecord]]:
    """Runs keyed by (problem, CHT, config hash), each list sorted by seed."""
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in results:
        key = (rec.problem, rec.cht, rec.manifest["config_hash"])
        groups.setdefault(key, []).append(rec)
    for recs in groups.values():
        recs.sort(key=lambda r: r.manifest["seed"])
    return dict(sorted(groups.items()))


def _sd(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0


def summarize(results) -> list[dict[str, Any]]:
    """Per (problem, CHT, config) statistics of the final HV and feasibility ratio.

    Standard deviations use the sample (n - 1) estimator. ``p_vs_none`` is the
    one-sided Mann-Whitney U p-value for "this CHT's final HV is larger than No
    Penalty's" under the same problem and algorithm settings; empty when no such
    control group is present.
    """
    if not results:
        raise ValueError("no results to summarize")
    groups = group_results(results)
    controls = {}
    for (problem, cht, _), recs in groups.items():
        if make_strategy(cht).name == "none":
            controls[(problem, recs[0].manifest["setting_hash"])] = recs

    rows = []
    for (problem, cht, chash), recs in groups.items():
        hv = np.array([r.trace.final.hypervolume for r in recs])
        feas = np.array([r.trace.final.feasibility_ratio for r in recs])
        control = controls.get((problem, recs[0].manifest["setting_hash"]))
        p = ""
        if control is not None and make_strategy(cht).name != "none":
            base = np.array([r.trace.final.hypervolume for r in control])
            p = float(mannwhitneyu(hv, base, alternative="greater").pvalue)
        rows.append({
            "problem": problem,
            "cht": cht,
            "config_hash": chash,
            "n_runs": len(recs),
            "hv_mean": float(hv.mean()),
            "hv_median": float(np.median(hv)),
            "hv_sd": _sd(hv),
            "feas_mean": float(feas.mean()),
            "feas_median": float(np.median(feas)),
            "feas_sd": _sd(feas),
            "p_vs_none": p,
            "manifest_hashes": ";".join(r.manifest["manifest_hash"] for r in recs),
        })
    return rows


def emit_summary(results, path=None) -> str:
    """Summary table as CSV text; also written to ``path`` if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in summarize(results):
        w.writerow([fmt(row[c]) if isinstance(row[c], float) else row[c] for c in SUMMARY_COLUMNS])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def aggregate_anytime(recs: list[RunRecord]) -> list[dict[str, Any]]:
    """Per-generation median and interquartile range across the runs of one group."""
    n = min(len(r.trace) for r in recs)
    hv = np.array([r.trace.column("hypervolume")[:n] for r in recs])
    best = np.array([r.trace.best_so_far[:n] for r in recs])
    feas = np.array([r.trace.column("feasibility_ratio")[:n] for r in recs])
    evals = np.array([r.trace.column("evaluations")[:n] for r in recs])
    gens = recs[0].trace.column("generation")[:n]
    q25, med, q75 = np.percentile(hv, [25, 50, 75], axis=0)
    return [
        {
            "generation": int(gens[g]),
            "evaluations": int(np.median(evals[:, g])),
            "n_runs": len(recs),
            "hv_median": float(med[g]),
            "hv_q25": float(q25[g]),
            "hv_q75": float(q75[g]),
            "best_so_far_median": float(np.median(best[:, g])),
            "feas_median": float(np.median(feas[:, g])),
            "config_hash": recs[0].manifest["config_hash"],
        }
        for g in range(n)
    ]


def emit_anytime(results, out_dir) -> list[Path]:
    """Per-run trace CSVs plus one aggregated CSV per (problem, CHT, config)."""
    if not results:
        raise ValueError("no results to emit")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for rec in results:
        run_path = rec.path or out_dir / run_dir_name_from_manifest(rec.manifest)
        run_path.mkdir(parents=True, exist_ok=True)
        target = run_path / "trace.csv"
        target.write_text(trace_csv(rec.trace, rec.manifest["manifest_hash"]), encoding="utf-8")
        written.append(target)
    for (problem, cht, chash), recs in group_results(results).items():
        target = out_dir / f"anytime__{problem.replace(':', '-')}__{cht}__{chash}.csv"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ANYTIME_COLUMNS)
        for row in aggregate_anytime(recs):
            w.writerow([fmt(row[c]) if isinstance(row[c], (float, int)) else row[c] for c in ANYTIME_COLUMNS])
        target.write_text(buf.getvalue(), encoding="utf-8")
        written.append(target)
    return written


def run_dir_name_from_manifest(manifest: dict) -> str:
    c = manifest["config"]
    return f"{c['problem'].replace(':', '-')}__{c['cht']}__{manifest['config_hash']}__s{manifest['seed']}"


def summarize_dir(results_dir) -> tuple[Path, list[Path]]:
    results = load_results(results_dir)
    if not results:
        raise ValueError(f"no complete runs found under {results_dir}")
    summary = Path(results_dir) / "summary.csv"
    emit_summary(results, summary)
    return summary, emit_anytime(results, results_dir)


def list_chts() -> list[tuple[str, str, dict]]:
    return [(name, base, params) for name, (base, params) in PRESETS.items()]
