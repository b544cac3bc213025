"""Experiment orchestration: cohort generation, data collection,
identification grids, the controller comparison, and report emission.

Every step reads its inputs from and writes its artifacts into one output
directory, so steps can run individually or chained (``run_all``).  All
randomness derives from the root seed through (seed, participant, stream)
tuples, making the whole tree byte-reproducible; ``run_all`` finishes by
writing a manifest listing the seeds and the SHA-256 of every artifact.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path

import numpy as np

from .control import ControllerConfig, ControllerState, OneStepController
from .errors import DataError
from .identify import IdentificationConfig, identify
from .model import ModelSpec, ParameterSet, chess_session_spec
from .serialize import dumps, load_json, load_params, load_spec, save_json, save_params, save_spec
from .simulate import (SessionConfig, SyntheticParticipant, UniformController,
                       demo_parameter_set, perturb_parameter_set, run_session)
from .trace import ChannelNormalizer, Dataset, SessionTrace, split_dataset

APPROACH_NAMES = ("conventional", "a", "b")
FREQUENCY_NAMES = ("different", "equal")

# answer columns used by the closed-loop comparison, in report order
_COMPARE_VARS = (("quit_session", 2), ("skip_puzzle", 3), ("frustration", 7), ("boredom", 6))

# derivation streams for per-participant random number generators
_STREAM_PERTURB = 0
_STREAM_SKILL = 1
_STREAM_SESSION = 10          # + session id
_STREAM_REWARDS = 20          # + session id
_STREAM_IDENT = 30
_STREAM_COMPARE_PARTICIPANT = 40
_STREAM_COMPARE_RBC = 41


@dataclass
class ExperimentConfig:
    """Everything one experiment needs besides the output directory."""

    cohort: int = 10
    perturbation: float = 0.15
    seed: int = 0
    jobs: int = 1
    approaches: tuple[str, ...] = APPROACH_NAMES
    frequencies: tuple[str, ...] = FREQUENCY_NAMES
    ident: IdentificationConfig = field(default_factory=lambda: IdentificationConfig(
        n_run=8, n_opt=4, budget=1400, warm_budget=400, stage2_budget=1800))
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    compare_minutes: float = 35.0
    compare_approach: str = "b"
    compare_frequency: str = "different"
    figures: bool = True

    def __post_init__(self):
        if self.cohort < 1:
            raise DataError("cohort must contain at least one participant")
        for a in self.approaches:
            if a not in APPROACH_NAMES:
                raise DataError(f"unknown approach {a!r}")
        for f in self.frequencies:
            if f not in FREQUENCY_NAMES:
                raise DataError(f"unknown frequency condition {f!r}")

    def to_dict(self) -> dict:
        # jobs is runtime machinery: it must not influence artifact bytes
        d = {k: getattr(self, k) for k in self.__dataclass_fields__
             if k not in ("ident", "controller", "approaches", "frequencies", "jobs")}
        d["approaches"] = list(self.approaches)
        d["frequencies"] = list(self.frequencies)
        d["ident"] = self.ident.to_dict()
        d["controller"] = self.controller.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        ident = IdentificationConfig.from_dict(d.pop("ident")) if "ident" in d \
            else IdentificationConfig()
        controller = ControllerConfig.from_dict(d.pop("controller")) if "controller" in d \
            else ControllerConfig()
        if "approaches" in d:
            d["approaches"] = tuple(d["approaches"])
        if "frequencies" in d:
            d["frequencies"] = tuple(d["frequencies"])
        return cls(ident=ident, controller=controller, **d)


def participant_ids(config: ExperimentConfig) -> list[str]:
    return [f"p{i:02d}" for i in range(config.cohort)]


def _rng(config: ExperimentConfig, pidx: int, stream: int) -> np.random.Generator:
    return np.random.default_rng((config.seed, pidx, stream))


def _derived_seed(config: ExperimentConfig, pidx: int, stream: int) -> int:
    return int(np.random.SeedSequence((config.seed, pidx, stream)).generate_state(1)[0])


# ---------------------------------------------------------------------------
# step 1: synthetic cohort
# ---------------------------------------------------------------------------

def run_synth_gen(config: ExperimentConfig, out: Path) -> None:
    """Write the shared spec and one perturbed ground-truth set per participant."""
    out = Path(out)
    (out / "participants").mkdir(parents=True, exist_ok=True)
    spec = chess_session_spec()
    save_spec(spec, out / "spec.json")
    save_json(config.to_dict(), out / "config.json")
    template = demo_parameter_set(spec)
    cohort = []
    for pidx, pid in enumerate(participant_ids(config)):
        params = perturb_parameter_set(template, spec, _rng(config, pidx, _STREAM_PERTURB),
                                       config.perturbation)
        skill = float(_rng(config, pidx, _STREAM_SKILL).uniform(0.15, 0.9))
        save_params(params, spec, out / "participants" / f"{pid}.params.json")
        cohort.append({"id": pid, "skill": skill,
                       "ident_seed": _derived_seed(config, pidx, _STREAM_IDENT)})
    save_json({"seed": config.seed, "participants": cohort}, out / "participants" / "cohort.json")


def _load_cohort(out: Path) -> tuple[ModelSpec, list[dict]]:
    out = Path(out)
    spec = load_spec(out / "spec.json")
    cohort = load_json(out / "participants" / "cohort.json")["participants"]
    return spec, cohort


def _load_participant_truth(out: Path, pid: str, spec: ModelSpec) -> ParameterSet:
    return load_params(Path(out) / "participants" / f"{pid}.params.json", spec)


# ---------------------------------------------------------------------------
# step 2: scripted data-collection sessions
# ---------------------------------------------------------------------------

def _collect_one(config: ExperimentConfig, out: Path, pidx: int) -> None:
    spec, cohort = _load_cohort(out)
    entry = cohort[pidx]
    truth = _load_participant_truth(out, entry["id"], spec)
    for sid in (1, 2):
        participant = SyntheticParticipant.create(
            spec, truth, entry["skill"], (config.seed, pidx, _STREAM_SESSION + sid))
        scfg = SessionConfig.scripted(sid)
        scfg.driver_seed = _derived_seed(config, pidx, _STREAM_REWARDS + sid)
        trace = run_session(participant, None, scfg)
        trace.save(Path(out) / "traces" / f"{entry['id']}_s{sid}.csv")


def run_collect(config: ExperimentConfig, out: Path) -> None:
    """Run scripted sessions 1 and 2 for every participant."""
    (Path(out) / "traces").mkdir(parents=True, exist_ok=True)
    _map_participants(_collect_one, config, out)


def _load_dataset(out: Path, pid: str) -> Dataset:
    traces = [SessionTrace.load(Path(out) / "traces" / f"{pid}_s{sid}.csv") for sid in (1, 2)]
    return Dataset.from_traces(traces)


# ---------------------------------------------------------------------------
# step 3: identification grid
# ---------------------------------------------------------------------------

def _identify_one(config: ExperimentConfig, out: Path, pidx: int) -> dict:
    spec, cohort = _load_cohort(out)
    entry = cohort[pidx]
    pid = entry["id"]
    dataset = _load_dataset(out, pid)
    # situation-data channels are scaled per participant over both sessions
    normalizer = ChannelNormalizer.fit(dataset, spec)
    train, test = split_dataset(dataset, config.ident.split_ratio)
    pdir = Path(out) / "identify" / pid
    pdir.mkdir(parents=True, exist_ok=True)
    save_json(normalizer.to_dict(), pdir / "normalizer.json")
    cells = {}
    for freq in config.frequencies:
        wii = config.ident.wii_goal_emotion if freq == "different" else 0.0
        for approach in config.approaches:
            icfg = replace(config.ident, approach=approach, wii_goal_emotion=wii,
                           seed=entry["ident_seed"])
            report = identify(train, icfg, spec, normalizer, test=test)
            stem = f"{approach}_{freq}"
            report.save_csv(pdir / f"{stem}.report.csv")
            save_params(report.params, spec, pdir / f"{stem}.params.json")
            cells[f"{approach}|{freq}"] = {
                "train_mse": report.train_mse,
                "test_mse": report.test_mse,
                "pct_identified": report.pct_identified,
            }
    return {"id": pid, "cells": cells}


def _write_grid(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def run_identify(config: ExperimentConfig, out: Path) -> dict:
    """Identify every participant under every approach and frequency condition.

    Emits per-participant reports plus cohort-average grids of train/test
    MSE and of the share of unequivocally identified parameters.
    """
    out = Path(out)
    results = _map_participants(_identify_one, config, out)
    results.sort(key=lambda r: r["id"])

    def cohort_mean(approach, freq, key):
        return float(np.mean([r["cells"][f"{approach}|{freq}"][key] for r in results]))

    mse_rows, pct_rows = [], []
    for split in ("train", "test"):
        for freq in config.frequencies:
            row = [split, freq]
            row += [cohort_mean(a, freq, f"{split}_mse") for a in config.approaches]
            mse_rows.append(row)
    for freq in config.frequencies:
        pct_rows.append([freq] + [cohort_mean(a, freq, "pct_identified")
                                  for a in config.approaches])
    (out / "identify").mkdir(parents=True, exist_ok=True)
    _write_grid(out / "identify" / "mse_grid.csv",
                ["dataset", "frequencies"] + list(config.approaches), mse_rows)
    _write_grid(out / "identify" / "identified_grid.csv",
                ["frequencies"] + list(config.approaches), pct_rows)
    return {r["id"]: r["cells"] for r in results}


# ---------------------------------------------------------------------------
# step 4: closed-loop comparison
# ---------------------------------------------------------------------------

def exact_paired_permutation_p(diffs: np.ndarray) -> float:
    """Two-sided exact sign-flip permutation test on the mean difference."""
    diffs = np.asarray(diffs, dtype=float)
    n = len(diffs)
    if n == 0:
        return 1.0
    if n > 20:
        raise DataError("exact permutation test limited to 20 pairs")
    observed = abs(diffs.mean())
    count = 0
    for signs in range(1 << n):
        s = np.fromiter(((1.0 if signs >> k & 1 else -1.0) for k in range(n)), float, n)
        if abs((s * diffs).mean()) >= observed - 1e-12:
            count += 1
    return count / (1 << n)


def _compare_one(config: ExperimentConfig, out: Path, pidx: int) -> dict:
    spec, cohort = _load_cohort(out)
    entry = cohort[pidx]
    pid = entry["id"]
    truth = _load_participant_truth(out, pid, spec)
    pdir = Path(out) / "identify" / pid
    identified = load_params(
        pdir / f"{config.compare_approach}_{config.compare_frequency}.params.json", spec)
    normalizer = ChannelNormalizer.from_dict(load_json(pdir / "normalizer.json"))
    mbc_first = pidx % 2 == 0
    arms = ("mbc", "rbc") if mbc_first else ("rbc", "mbc")
    means = {}
    for arm in arms:
        participant = SyntheticParticipant.create(
            spec, truth, entry["skill"], (config.seed, pidx, _STREAM_COMPARE_PARTICIPANT))
        if arm == "mbc":
            ctrl = ControllerState(spec=spec, params=identified, normalizer=normalizer,
                                   config=config.controller)
            driver = OneStepController(ctrl)
        else:
            driver = UniformController((config.seed, pidx, _STREAM_COMPARE_RBC))
        trace = run_session(participant, driver,
                            SessionConfig.controlled(minutes=config.compare_minutes))
        trace.save(Path(out) / "compare" / f"{pid}_{arm}.trace.csv")
        answers = trace.answer_matrix()
        means[arm] = {name: float(np.mean(answers[:, col])) for name, col in _COMPARE_VARS}
    return {"id": pid, "order": "mbc_first" if mbc_first else "rbc_first", "means": means}


def run_compare(config: ExperimentConfig, out: Path) -> dict:
    """Run the controlled session once per controller arm for every participant."""
    out = Path(out)
    (out / "compare").mkdir(parents=True, exist_ok=True)
    results = _map_participants(_compare_one, config, out)
    results.sort(key=lambda r: r["id"])

    detail_header = ["participant", "order"]
    for name, _ in _COMPARE_VARS:
        detail_header += [f"mbc_{name}", f"rbc_{name}"]
    detail_rows = []
    for r in results:
        row = [r["id"], r["order"]]
        for name, _ in _COMPARE_VARS:
            row += [r["means"]["mbc"][name], r["means"]["rbc"][name]]
        detail_rows.append(row)
    _write_grid(out / "compare" / "comparison_details.csv", detail_header, detail_rows)

    summary_rows = []
    for name, _ in _COMPARE_VARS:
        mbc = np.array([r["means"]["mbc"][name] for r in results])
        rbc = np.array([r["means"]["rbc"][name] for r in results])
        diff_pct = float((rbc.mean() - mbc.mean()) / 2.0 * 100.0)  # share of the [-1, 1] range
        p = exact_paired_permutation_p(mbc - rbc)
        summary_rows.append([name, float(mbc.mean()), float(rbc.mean()), diff_pct, p])
    _write_grid(out / "compare" / "comparison.csv",
                ["variable", "mbc_mean", "rbc_mean", "improvement_pct", "p_value"],
                summary_rows)
    return {"rows": summary_rows, "details": detail_rows}


# ---------------------------------------------------------------------------
# step 5: report emission
# ---------------------------------------------------------------------------

def run_report(config: ExperimentConfig, out: Path) -> None:
    """Emit per-participant time-series tables and, when enabled, figures."""
    out = Path(out)
    rdir = out / "report"
    rdir.mkdir(parents=True, exist_ok=True)
    spec, cohort = _load_cohort(out)
    state_cols = list(spec.belief_vars + spec.goal_vars + spec.emotion_vars)
    for entry in cohort:
        pid = entry["id"]
        for arm in ("mbc", "rbc"):
            trace = SessionTrace.load(out / "compare" / f"{pid}_{arm}.trace.csv")
            header = state_cols + ["difficulty", "reward", "puzzle"]
            rows = []
            for rec in trace.records:
                rows.append([float(v) for v in rec.answers]
                            + [rec.rld.difficulty, int(rec.rld.reward_given), rec.puzzle])
            _write_grid(rdir / f"{pid}_{arm}.timeseries.csv", header, rows)
            if config.figures:
                from .figures import save_timeseries_figure
                save_timeseries_figure(trace, spec, rdir / f"{pid}_{arm}.png",
                                       title=f"{pid} / {arm}")
    if config.figures and (out / "compare" / "comparison_details.csv").exists():
        from .figures import save_comparison_figure
        save_comparison_figure(out / "compare" / "comparison_details.csv",
                               rdir / "comparison.png")


# ---------------------------------------------------------------------------
# run-all and the manifest
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(config: ExperimentConfig, out: Path) -> None:
    out = Path(out)
    artifacts = {}
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            artifacts[path.relative_to(out).as_posix()] = _sha256(path)
    manifest = {
        "seed": config.seed,
        "config": config.to_dict(),
        "participant_seeds": {pid: _derived_seed(config, i, _STREAM_IDENT)
                              for i, pid in enumerate(participant_ids(config))},
        "artifacts": artifacts,
    }
    (out / "manifest.json").write_text(dumps(manifest))


def run_all(config: ExperimentConfig, out: Path) -> None:
    """synth-gen, collect, identify, compare, report, then the manifest."""
    run_synth_gen(config, out)
    run_collect(config, out)
    run_identify(config, out)
    run_compare(config, out)
    run_report(config, out)
    write_manifest(config, out)


# ---------------------------------------------------------------------------
# per-participant parallelism
# ---------------------------------------------------------------------------

def _map_participants(fn, config: ExperimentConfig, out: Path) -> list:
    pidxs = list(range(config.cohort))
    if config.jobs <= 1:
        return [fn(config, out, i) for i in pidxs]
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        futures = [pool.submit(fn, config, out, i) for i in pidxs]
        return [f.result() for f in futures]
