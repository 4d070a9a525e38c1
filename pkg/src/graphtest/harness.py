"""Configuration-driven Monte Carlo experiments for the two-sample test.

A config (JSON, ``"version": 1``) names a scenario and a parameter grid.
The grid expands into cells; each cell is a pair of model specs with a
ground-truth label from :func:`classify_pair`. Every cell runs ``trials``
independent tests. Graph ``slot`` (1 or 2) of trial ``t`` in cell ``c`` is
drawn with ``Seed(seed, derive_stream(c, t, slot))``, so results do not
depend on the worker count or on scheduling.

Scenarios
---------
``h0_identical``   ER(n, p) against itself, for every ``n`` and ``p``.
``planted_vs_er``  ER(n, p) against the planted mixture on ``n`` vertices
                   (``n`` even). ``gamma`` is listed directly, or given as
                   ``gamma_multipliers`` times a threshold from
                   :func:`gamma_thresholds` evaluated at half-size ``n/2``.
``er_vs_geom``     for every ``(n, p, r)``: the pairs er/er, geom/geom and
                   er/geom. ``p_exponent`` replaces ``p`` by ``n**p_exponent``.
``custom_pair``    explicit ``pairs`` of model spec dicts.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .errors import GraphTestError, ParameterError, ParseError
from .generators import DEFAULT_TAU_PAIRS, estimate_tau, generate
from .minimax import gamma_thresholds
from .models import check_rule, in_class
from .specs import ER, Geom, PlantedMixture, Seed, Statistic, derive_stream, model_name, spec_from_dict
from .twosample import REJECT, classify_pair, default_class_rule, run_test

SCHEMA_VERSION = 1
SCENARIOS = ("h0_identical", "planted_vs_er", "er_vs_geom", "custom_pair")
SEED_ENV = "GRAPHTEST_SEED"

CSV_COLUMNS = (
    "cell",
    "trial",
    "scenario",
    "pair",
    "model1",
    "model2",
    "n1",
    "n2",
    "p",
    "gamma",
    "multiplier",
    "r",
    "statistic",
    "class_rule",
    "seed",
    "stream1",
    "stream2",
    "in_class1",
    "in_class2",
    "class_reason1",
    "class_reason2",
    "mu_distance",
    "epsilon",
    "rho",
    "label",
    "f1",
    "f2",
    "sigma_hat1",
    "sigma_hat2",
    "t",
    "decision",
    "error",
)

SUMMARY_COLUMNS = (
    "cell",
    "scenario",
    "pair",
    "n1",
    "n2",
    "p",
    "gamma",
    "multiplier",
    "r",
    "label",
    "in_class1",
    "in_class2",
    "trials",
    "completed",
    "rejections",
    "rejection_rate",
    "wilson_low",
    "wilson_high",
    "error_kind",
    "error_rate",
)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    grid: dict
    statistic: Statistic
    class_rule: str
    trials: int
    seed: int = 0
    workers: int = 1
    epsilon_rule: str | None = None
    rho_rule: str | None = None
    C: float = 1.0
    mu_trials: int = 20
    tau_pairs: int = DEFAULT_TAU_PAIRS
    pairs: tuple = ()
    out: str | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ParameterError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if self.mu_trials < 2:
            raise ParameterError(f"mu_trials must be >= 2, got {self.mu_trials}")
        Seed(self.seed)
        if self.scenario == "custom_pair":
            if not self.pairs:
                raise ParameterError("custom_pair needs a non-empty 'pairs' list")
            return
        for key in ("n",):
            if not self.grid.get(key):
                raise ParameterError(f"grid.{key} must be a non-empty list")
        if "p" not in self.grid and "p_exponent" not in self.grid:
            raise ParameterError("grid needs 'p' or 'p_exponent'")
        if "p" in self.grid and not self.grid["p"]:
            raise ParameterError("grid.p must be a non-empty list")
        if self.scenario == "planted_vs_er":
            has_g = bool(self.grid.get("gamma"))
            has_m = bool(self.grid.get("gamma_multipliers"))
            if has_g == has_m:
                raise ParameterError("planted_vs_er needs exactly one of grid.gamma or grid.gamma_multipliers")
            if any(int(n) % 2 for n in self.grid["n"]):
                raise ParameterError("planted_vs_er needs even graph sizes n")
        if self.scenario == "er_vs_geom" and not self.grid.get("r"):
            raise ParameterError("er_vs_geom needs a non-empty grid.r")

    @property
    def default_epsilon_rule(self) -> str:
        if self.epsilon_rule:
            return self.epsilon_rule
        return "spectral_C_over_min_n" if self.statistic.kind == "lambda" else "zero"

    @property
    def default_rho_rule(self) -> str:
        if self.rho_rule:
            return self.rho_rule
        if self.statistic.kind == "lambda":
            return "cor4_7p5"
        return "cor1_7" if self.class_rule == "ier_semisparse" else "theorem1_3p5"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ParseError("config must be a JSON object")
        version = data.get("version")
        if version != SCHEMA_VERSION:
            raise ParseError(f"unsupported config version {version!r}; expected {SCHEMA_VERSION}")
        known = {
            "version", "scenario", "grid", "statistic", "class_rule", "trials", "seed", "workers",
            "epsilon_rule", "rho_rule", "C", "mu_trials", "tau_pairs", "pairs", "out",
        }
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        try:
            statistic = Statistic.parse(str(data.get("statistic", "triangle")))
            pairs = tuple(
                (spec_from_dict(a), spec_from_dict(b)) for a, b in data.get("pairs", [])
            )
            return cls(
                scenario=data["scenario"],
                grid=dict(data.get("grid", {})),
                statistic=statistic,
                class_rule=data.get("class_rule") or default_class_rule(ER(3, 0.5), statistic),
                trials=int(data["trials"]),
                seed=int(data.get("seed", 0)),
                workers=int(data.get("workers", 1)),
                epsilon_rule=data.get("epsilon_rule"),
                rho_rule=data.get("rho_rule"),
                C=float(data.get("C", 1.0)),
                mu_trials=int(data.get("mu_trials", 20)),
                tau_pairs=int(data.get("tau_pairs", DEFAULT_TAU_PAIRS)),
                pairs=pairs,
                out=data.get("out"),
            )
        except KeyError as exc:
            raise ParseError(f"config is missing required key {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, GraphTestError):
                raise
            raise ParseError(f"malformed config: {exc}") from None


def load_config(path, environ=None) -> ExperimentConfig:
    """Read a JSON config; ``GRAPHTEST_SEED`` in ``environ`` overrides its base seed."""
    environ = os.environ if environ is None else environ
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from None
    config = ExperimentConfig.from_dict(data)
    if environ.get(SEED_ENV):
        try:
            seed = int(environ[SEED_ENV], 0)
        except ValueError:
            raise ParameterError(f"{SEED_ENV} must be an integer, got {environ[SEED_ENV]!r}") from None
        config = replace(config, seed=seed)
    return config


@dataclass(frozen=True)
class Cell:
    index: int
    params: dict
    spec1: object = None
    spec2: object = None
    error: str = ""
    in_class1: object = None
    in_class2: object = None
    class_reason1: str = ""
    class_reason2: str = ""
    verdict: object = None

    @property
    def label(self) -> str:
        return self.verdict.label if self.verdict is not None else "invalid"


def _p_values(grid, n):
    if "p_exponent" in grid:
        exps = grid["p_exponent"]
        exps = exps if isinstance(exps, (list, tuple)) else [exps]
        return [float(n) ** float(e) for e in exps]
    return [float(p) for p in grid["p"]]


def _raw_cells(config: ExperimentConfig):
    """Yield ``(params, builder)`` where ``builder()`` returns the spec pair or raises."""
    grid = config.grid
    if config.scenario == "custom_pair":
        for i, (a, b) in enumerate(config.pairs):
            yield {"pair": f"custom{i}", "n1": a.size, "n2": b.size}, (lambda a=a, b=b: (a, b))
        return
    for n in (int(x) for x in grid["n"]):
        for p in _p_values(grid, n):
            if config.scenario == "h0_identical":
                yield {"pair": "er/er", "n1": n, "n2": n, "p": p}, (lambda n=n, p=p: (ER(n, p), ER(n, p)))
            elif config.scenario == "planted_vs_er":
                if grid.get("gamma"):
                    gammas = [(float(g), None) for g in grid["gamma"]]
                else:
                    kind = grid.get("gamma_threshold", config.statistic.kind)
                    base = gamma_thresholds(n // 2, p)[kind]
                    gammas = [(float(m) * base, float(m)) for m in grid["gamma_multipliers"]]
                for g, mult in gammas:
                    params = {"pair": "er/planted", "n1": n, "n2": n, "p": p, "gamma": g, "multiplier": mult}
                    yield params, (lambda n=n, p=p, g=g: (ER(n, p), PlantedMixture(n // 2, p, g)))
            else:
                for r in (int(x) for x in grid["r"]):
                    for pair in ("er/er", "geom/geom", "er/geom"):
                        params = {"pair": pair, "n1": n, "n2": n, "p": p, "r": r}

                        def build(n=n, p=p, r=r, pair=pair):
                            tau = estimate_tau(r, p, config.tau_pairs, seed=Seed(config.seed, derive_stream(r)))
                            make = {"er": lambda: ER(n, p), "geom": lambda: Geom(n, r, p, tau)}
                            a, b = pair.split("/")
                            return make[a](), make[b]()

                        yield params, build


def _rule_for(spec, statistic, class_rule):
    """The configured rule where it applies to ``spec``, else the spec's natural rule."""
    try:
        check_rule(spec, statistic, class_rule)
        return class_rule
    except GraphTestError:
        return default_class_rule(spec, statistic)


def _membership(spec, statistic, class_rule):
    try:
        return in_class(spec, statistic, _rule_for(spec, statistic, class_rule))
    except GraphTestError as exc:
        return False, f"{type(exc).__name__}: {exc}"


def _error_text(exc: BaseException) -> str:
    return f"{type(exc).__name__}: {exc}"


def build_cells(config: ExperimentConfig) -> list[Cell]:
    """Expand the grid; infeasible cells are kept with their error and label ``invalid``."""
    cells = []
    for index, (params, builder) in enumerate(_raw_cells(config)):
        params = {"scenario": config.scenario, "gamma": None, "multiplier": None, "r": None, "p": None, **params}
        try:
            spec1, spec2 = builder()
        except (GraphTestError, ValueError) as exc:
            cells.append(Cell(index, params, error=_error_text(exc)))
            continue
        ic1, why1 = _membership(spec1, config.statistic, config.class_rule)
        ic2, why2 = _membership(spec2, config.statistic, config.class_rule)
        verdict, error = None, ""
        try:
            verdict = classify_pair(
                spec1,
                spec2,
                config.statistic,
                config.default_epsilon_rule,
                config.default_rho_rule,
                class_rule=_rule_for(spec1, config.statistic, config.class_rule),
                class_rule2=_rule_for(spec2, config.statistic, config.class_rule),
                C=config.C,
                mu_trials=config.mu_trials,
                seed=Seed(config.seed, derive_stream(index, 0xC1A55)),
            )
        except (GraphTestError, ValueError) as exc:
            error = _error_text(exc)
        cells.append(
            Cell(index, params, spec1, spec2, error, ic1, ic2, why1, why2, verdict)
        )
    return cells


@dataclass(frozen=True)
class TrialRecord:
    cell: int
    trial: int
    stream1: int
    stream2: int
    outcome: object = None
    error: str = ""
    wall_time: float = field(default=0.0, compare=False)


def _run_trial(job) -> TrialRecord:
    cell, trial, seed, spec1, spec2, statistic, class_rule = job
    s1 = derive_stream(cell, trial, 1)
    s2 = derive_stream(cell, trial, 2)
    start = time.perf_counter()
    try:
        G1 = generate(spec1, Seed(seed, s1))
        G2 = generate(spec2, Seed(seed, s2))
        outcome = run_test(G1, G2, statistic, class_rule)
        return TrialRecord(cell, trial, s1, s2, outcome, "", time.perf_counter() - start)
    except Exception as exc:  # recorded in the row; one failed trial must not abort the sweep
        return TrialRecord(cell, trial, s1, s2, None, _error_text(exc), time.perf_counter() - start)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, np.ndarray):
        return ";".join(format(float(v), ".17g") for v in x)
    return str(x)


def record_row(config: ExperimentConfig, cell: Cell, rec: TrialRecord) -> dict:
    out = rec.outcome
    v = cell.verdict
    row = {
        "cell": cell.index,
        "trial": rec.trial,
        "scenario": cell.params["scenario"],
        "pair": cell.params["pair"],
        "model1": model_name(cell.spec1) if cell.spec1 is not None else "",
        "model2": model_name(cell.spec2) if cell.spec2 is not None else "",
        "n1": cell.params["n1"],
        "n2": cell.params["n2"],
        "p": cell.params["p"],
        "gamma": cell.params["gamma"],
        "multiplier": cell.params["multiplier"],
        "r": cell.params["r"],
        "statistic": str(config.statistic),
        "class_rule": config.class_rule,
        "seed": config.seed,
        "stream1": rec.stream1,
        "stream2": rec.stream2,
        "in_class1": cell.in_class1,
        "in_class2": cell.in_class2,
        "class_reason1": cell.class_reason1,
        "class_reason2": cell.class_reason2,
        "mu_distance": v.distance if v else None,
        "epsilon": v.epsilon if v else None,
        "rho": v.rho if v else None,
        "label": cell.label,
        "f1": out.f_g if out else None,
        "f2": out.f_g2 if out else None,
        "sigma_hat1": out.sigma_hat_g if out else None,
        "sigma_hat2": out.sigma_hat_g2 if out else None,
        "t": out.t if out else None,
        "decision": out.decision if out else "",
        "error": rec.error or cell.error,
    }
    return {k: _fmt(row[k]) for k in CSV_COLUMNS}


def wilson_interval(successes: int, total: int) -> tuple[float, float]:
    if total == 0:
        return math.nan, math.nan
    ci = binomtest(successes, total).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def summarize_cell(config: ExperimentConfig, cell: Cell, decisions) -> dict:
    """Per-cell rejection rate from the trial decisions (empty string for failed trials)."""
    done = [d for d in decisions if d]
    rejections = sum(1 for d in done if d == REJECT)
    rate = rejections / len(done) if done else math.nan
    low, high = wilson_interval(rejections, len(done))
    if cell.label == "h0":
        kind, err = "type_i", rate
    elif cell.label == "h1":
        kind, err = "type_ii", (1.0 - rate) if done else math.nan
    else:
        # indeterminate and invalid cells are reported but not aggregated into error rates
        kind, err = "none", None
    return {
        "cell": cell.index,
        "scenario": cell.params["scenario"],
        "pair": cell.params["pair"],
        "n1": cell.params["n1"],
        "n2": cell.params["n2"],
        "p": cell.params["p"],
        "gamma": cell.params["gamma"],
        "multiplier": cell.params["multiplier"],
        "r": cell.params["r"],
        "label": cell.label,
        "in_class1": cell.in_class1,
        "in_class2": cell.in_class2,
        "trials": config.trials,
        "completed": len(done),
        "rejections": rejections,
        "rejection_rate": rate,
        "wilson_low": low,
        "wilson_high": high,
        "error_kind": kind,
        "error_rate": err,
    }


@dataclass
class ExperimentResult:
    cells: list
    records: list
    summary: list

    def summary_for(self, **match) -> list[dict]:
        return [s for s in self.summary if all(s.get(k) == v for k, v in match.items())]


def _csv_text(rows, columns, header: bool) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    if header:
        writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _completed_cells(path: Path, trials: int) -> tuple[int, str, dict]:
    """Leading complete cells of an existing CSV: their count, their text and their decisions."""
    text = path.read_text()
    lines = text.splitlines(keepends=True)
    if not lines or lines[0].rstrip("\n") != ",".join(CSV_COLUMNS):
        raise ParseError(f"{path} does not carry the version {SCHEMA_VERSION} header; cannot resume")
    reader = csv.DictReader(io.StringIO(text))
    decisions: dict[int, list] = {}
    for row in reader:
        decisions.setdefault(int(row["cell"]), []).append(row["decision"])
    done = 0
    while len(decisions.get(done, ())) == trials:
        done += 1
    keep = 1 + done * trials
    return done, "".join(lines[:keep]), {c: d for c, d in decisions.items() if c < done}


def run_experiment(config: ExperimentConfig, out=None, resume: bool = False, workers: int | None = None,
                   progress=None) -> ExperimentResult:
    """Run every cell and trial, appending rows to ``out`` cell by cell.

    With ``resume``, cells already complete in ``out`` are skipped (their rows
    are kept verbatim) and any partial cell is rerun from scratch with the
    same derived seeds.
    """
    out = out if out is not None else config.out
    workers = workers or config.workers
    cells = build_cells(config)
    path = Path(out) if out else None
    skip, kept_decisions = 0, {}
    if path is not None:
        if resume and path.exists():
            skip, kept, kept_decisions = _completed_cells(path, config.trials)
            path.write_text(kept)
        else:
            path.write_text(_csv_text([], CSV_COLUMNS, header=True))

    records, summary = [], []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for cell in cells:
            if cell.index < skip:
                summary.append(summarize_cell(config, cell, kept_decisions[cell.index]))
                continue
            if cell.spec1 is None:
                recs = [
                    TrialRecord(cell.index, t, derive_stream(cell.index, t, 1), derive_stream(cell.index, t, 2))
                    for t in range(config.trials)
                ]
            else:
                jobs = [
                    (cell.index, t, config.seed, cell.spec1, cell.spec2, config.statistic, config.class_rule)
                    for t in range(config.trials)
                ]
                if pool is None:
                    recs = [_run_trial(j) for j in jobs]
                else:
                    chunk = max(1, config.trials // (4 * workers))
                    recs = list(pool.map(_run_trial, jobs, chunksize=chunk))
            rows = [record_row(config, cell, r) for r in recs]
            if path is not None:
                with path.open("a", newline="") as fh:
                    fh.write(_csv_text(rows, CSV_COLUMNS, header=False))
            records.extend(recs)
            summary.append(summarize_cell(config, cell, [r.outcome.decision if r.outcome else "" for r in recs]))
            if progress is not None:
                progress(summary[-1])
    finally:
        if pool is not None:
            pool.shutdown()
    return ExperimentResult(cells=cells, records=records, summary=summary)


def write_summary(summary, path) -> None:
    rows = [{k: _fmt(s[k]) for k in SUMMARY_COLUMNS} for s in summary]
    Path(path).write_text(_csv_text(rows, SUMMARY_COLUMNS, header=True))


def sweep_boundary(n_list, p: float, multipliers, statistic: Statistic, *, trials: int = 200, seed: int = 0,
                   workers: int = 1, class_rule: str | None = None, out=None) -> list[dict]:
    """Empirical power of ER against the planted mixture at ``gamma = multiplier * threshold``.

    The threshold is the one matching ``statistic`` in :func:`gamma_thresholds`,
    evaluated at half-size ``n/2``. Returns one summary row per ``(n, multiplier)``.
    """
    config = ExperimentConfig(
        scenario="planted_vs_er",
        grid={"n": list(n_list), "p": [p], "gamma_multipliers": list(multipliers)},
        statistic=statistic,
        class_rule=class_rule or default_class_rule(ER(3, p), statistic),
        trials=trials,
        seed=seed,
        workers=workers,
    )
    return run_experiment(config, out=out).summary
