"""Parameter identification from session traces.

The identification objective is teacher-forced one-measurement-ahead
prediction: from each measured state, run perception on the next
measurement's situation data and two cognition sub-steps, and compare with
the next measured state.  The optimizer sees only the head of the training
block; a 20% tail is held out as the validation stage used to rank runs
and to assess which parameters were unequivocally identified (small
standard deviation across the best multi-start runs).

Three identification procedures are provided: a conventional multi-start
over all perception and cognition parameters, and two warm-started
variants.  Both variants first fit the perception parameters alone in a
decoupled configuration, under the assumption that the reasoning outputs
equal the measured beliefs (null bias).  Variant A starts every joint run
from that warm start; variant B first refits cognition with perception
frozen, then seeds joint runs from the best cognition vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import DataError, NumericalError
from .model import (AFFINE, BOOLEAN, CHANNEL_OUTPUT_BOUND, CONSTANT, EXPONENTIAL, TWO_PIECE,
                    Linkage, ModelSpec, ParameterSet, advance, state_from_measured)
from .trace import ChannelNormalizer, Dataset, split_dataset

CHANNEL_COLUMN_NAMES = ("difficulty", "hints", "wrong", "solve_time", "skipped", "reward")

#: Cost returned for a parameter point violating the stability condition.
#: Any stable point has a one-step MSE of at most 4, so this always loses.
_UNSTABLE_PENALTY = 4.5


# ---------------------------------------------------------------------------
# parameter bounds and vector layout
# ---------------------------------------------------------------------------

@dataclass
class ParameterBounds:
    """Declared box bounds per parameter family."""

    affine_t0: tuple[float, float] = (-2.0, 2.0)
    affine_t1: tuple[float, float] = (-1.0, 1.0)
    exp_t0: tuple[float, float] = (-3.0, 3.0)
    exp_t1: tuple[float, float] = (-2.0, 2.0)
    bool_level: tuple[float, float] = (-1.0, 1.0)
    weight: tuple[float, float] = (-1.0, 1.0)
    trait: tuple[float, float] = (0.0, 2.0)
    dm_weight: tuple[float, float] = (-2.0, 2.0)
    dm_offset: tuple[float, float] = (-2.0, 2.0)

    def channel_bounds(self, family: str) -> tuple[tuple[float, float], tuple[float, float]]:
        if family == AFFINE:
            return self.affine_t0, self.affine_t1
        if family == EXPONENTIAL:
            return self.exp_t0, self.exp_t1
        if family == BOOLEAN:
            return self.bool_level, self.bool_level
        raise DataError(f"unknown family {family!r}")

    def to_dict(self) -> dict:
        return {k: list(getattr(self, k)) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "ParameterBounds":
        return cls(**{k: tuple(v) for k, v in d.items()})


class ParamLayout:
    """Flat-vector layout of the jointly identified parameters.

    The vector holds the perception block first (theta0, theta1 per channel
    entry), then the cognition block (one slot per constant linkage, two per
    two-piece linkage, then one trait gain per emotion).
    """

    def __init__(self, spec: ModelSpec, bounds: ParameterBounds):
        self.spec = spec
        self.bounds = bounds
        names: list[str] = []
        lo: list[float] = []
        hi: list[float] = []
        for ch in spec.perception_channels:
            col = CHANNEL_COLUMN_NAMES[ch.input]
            b0, b1 = bounds.channel_bounds(ch.family)
            names.append(f"per[{col}->k{ch.output}].t0")
            lo.append(b0[0]); hi.append(b0[1])
            names.append(f"per[{col}->k{ch.output}].t1")
            lo.append(b1[0]); hi.append(b1[1])
        self.n_perception = len(names)
        self.linkage_slots: list[tuple[int, int]] = []
        for link in spec.cognition_linkages:
            if link.kind == TWO_PIECE:
                s0 = len(names)
                names.append(f"w[{link.src}->{link.dst}]-")
                lo.append(bounds.weight[0]); hi.append(bounds.weight[1])
                names.append(f"w[{link.src}->{link.dst}]+")
                lo.append(bounds.weight[0]); hi.append(bounds.weight[1])
                self.linkage_slots.append((s0, s0 + 1))
            else:
                s0 = len(names)
                names.append(f"w[{link.src}->{link.dst}]")
                lo.append(bounds.weight[0]); hi.append(bounds.weight[1])
                self.linkage_slots.append((s0, s0))
        self.trait_slots: list[int] = []
        for emo in spec.emotion_vars:
            self.trait_slots.append(len(names))
            names.append(f"trait[{emo}]")
            lo.append(bounds.trait[0]); hi.append(bounds.trait[1])
        self.names = names
        self.lo = np.array(lo)
        self.hi = np.array(hi)
        self.n_total = len(names)
        self.perception_slice = slice(0, self.n_perception)
        self.cognition_slice = slice(self.n_perception, self.n_total)

    def pack(self, params: ParameterSet) -> np.ndarray:
        vec = np.zeros(self.n_total)
        vec[:self.n_perception] = params.perception.reshape(-1)
        for l_idx, (s0, s1) in enumerate(self.linkage_slots):
            vec[s0] = params.linkage_weights[l_idx, 0]
            if s1 != s0:
                vec[s1] = params.linkage_weights[l_idx, 1]
        for e_idx, s in enumerate(self.trait_slots):
            vec[s] = params.trait_gains[e_idx]
        return vec

    def unpack(self, vec: np.ndarray, base: ParameterSet) -> ParameterSet:
        params = base.copy()
        params.perception = np.asarray(vec[:self.n_perception], dtype=float).reshape(-1, 2)
        for l_idx, (s0, s1) in enumerate(self.linkage_slots):
            params.linkage_weights[l_idx] = (vec[s0], vec[s1])
        for e_idx, s in enumerate(self.trait_slots):
            params.trait_gains[e_idx] = vec[s]
        return params

    def normalize(self, thetas: np.ndarray) -> np.ndarray:
        """Affinely map each parameter onto [0, 1] by its declared bound width."""
        return (np.asarray(thetas, dtype=float) - self.lo) / (self.hi - self.lo)


# ---------------------------------------------------------------------------
# vectorized one-step objective
# ---------------------------------------------------------------------------

class _LinkMeta:
    __slots__ = ("src_kind", "src_pos", "dst_kind", "dst_pos", "s0", "s1",
                 "two_piece", "src_fresh", "src_gidx", "dst_gidx", "trait_slot")


_STAGE_OF_KIND = {"bias": 0, "pk": 1, "belief": 2, "goal": 3, "emotion": 3}


class OneStepEvaluator:
    """Vectorized teacher-forced objective over all measurement pairs.

    Produces exactly the same numbers as chaining the scalar model
    operations per pair; equivalence is enforced by tests.
    """

    def __init__(self, spec: ModelSpec, dataset: Dataset, normalizer: ChannelNormalizer,
                 layout: ParamLayout, base: ParameterSet, allow_test: bool = False):
        if dataset.tag == "test" and not allow_test:
            raise DataError("refusing to evaluate an identification objective on test data")
        self.spec = spec
        self.layout = layout
        self.base = base
        prev, nxt, tgt = [], [], []
        for a, b in dataset.pairs():
            prev.append(a.answers)
            nxt.append(b.rld.channels())
            tgt.append(b.answers)
        self.n_pairs = len(prev)
        nb, ng, ne = len(spec.belief_vars), len(spec.goal_vars), len(spec.emotion_vars)
        self.nb, self.ng, self.ne = nb, ng, ne
        if self.n_pairs:
            prev8 = np.array(prev)
            if prev8.shape[1] != nb + ng + ne:
                raise DataError(f"trace answers carry {prev8.shape[1]} components, "
                                f"the spec expects {nb + ng + ne}")
            self.target = np.array(tgt)
            self.X = normalizer.transform(np.array(nxt))
        else:
            prev8 = np.zeros((0, nb + ng + ne))
            self.target = np.zeros((0, nb + ng + ne))
            self.X = np.zeros((0, 6))
        self.B0 = prev8[:, :nb]
        self.G0 = prev8[:, nb:nb + ng]
        self.E0 = prev8[:, nb + ng:]

        # perception wiring
        self.channel_inputs = np.array([ch.input for ch in spec.perception_channels])
        self.channel_outputs = np.array([ch.output for ch in spec.perception_channels])
        self.channel_families = [ch.family for ch in spec.perception_channels]
        self.n_outputs = spec.n_outputs
        self.pk_out_idx = np.array([spec.pk_sources[p] for p in spec.pk_vars], dtype=int)

        # cognition wiring
        pos_of: dict[str, tuple[str, int]] = {}
        for kind, group in (("belief", spec.belief_vars), ("goal", spec.goal_vars),
                            ("emotion", spec.emotion_vars), ("bias", spec.bias_vars),
                            ("pk", spec.pk_vars)):
            for i, name in enumerate(group):
                pos_of[name] = (kind, i)
        self.links: list[_LinkMeta] = []
        emo_pos = {n: i for i, n in enumerate(spec.emotion_vars)}
        for l_idx, link in enumerate(spec.cognition_linkages):
            meta = _LinkMeta()
            meta.src_kind, meta.src_pos = pos_of[link.src]
            meta.dst_kind, meta.dst_pos = pos_of[link.dst]
            meta.s0, meta.s1 = layout.linkage_slots[l_idx]
            meta.two_piece = link.kind == TWO_PIECE
            meta.src_fresh = _STAGE_OF_KIND[meta.src_kind] < _STAGE_OF_KIND[meta.dst_kind]
            meta.src_gidx = spec.index(link.src)
            meta.dst_gidx = spec.index(link.dst)
            meta.trait_slot = layout.trait_slots[emo_pos[link.dst]] if link.dst in emo_pos else -1
            self.links.append(meta)
        self.links_by_stage: dict[int, list[_LinkMeta]] = {0: [], 1: [], 2: [], 3: []}
        for meta in self.links:
            self.links_by_stage[_STAGE_OF_KIND[meta.dst_kind]].append(meta)

        # self-weights (beliefs are zero by construction; bias and pk carry none)
        names = spec.all_vars
        self.sw_goal = np.array([base.self_weights[spec.index(g)] for g in spec.goal_vars])
        self.sw_emotion = np.array([base.self_weights[spec.index(e)] for e in spec.emotion_vars])
        self.sw_abs_diag = np.abs(base.self_weights.astype(float))
        self.trait_slot_idx = np.array(layout.trait_slots, dtype=int)
        self.n_vars = len(names)

    # -- perception ---------------------------------------------------------

    def _reasoning(self, vec: np.ndarray) -> np.ndarray:
        y = np.zeros((self.n_pairs, self.n_outputs))
        for k, fam in enumerate(self.channel_families):
            x = self.X[:, self.channel_inputs[k]]
            t0, t1 = vec[2 * k], vec[2 * k + 1]
            if fam == AFFINE:
                out = t0 * x + t1
            elif fam == EXPONENTIAL:
                with np.errstate(over="ignore"):
                    out = t1 * np.exp(t0 * x) + 1.0
            else:
                out = np.where(x == 0.0, t0, t1)
            np.clip(out, -CHANNEL_OUTPUT_BOUND, CHANNEL_OUTPUT_BOUND, out=out)
            y[:, self.channel_outputs[k]] += out
        return y

    # -- cognition ----------------------------------------------------------

    def _contrib(self, meta: _LinkMeta, vec, old, fresh):
        x = (fresh if meta.src_fresh else old)[meta.src_kind][:, meta.src_pos]
        if meta.two_piece:
            w = np.where(x <= 0.0, vec[meta.s0], vec[meta.s1])
        else:
            w = vec[meta.s0]
        return w * x

    def _substep(self, vec, old, y_rr):
        n = self.n_pairs
        fresh: dict[str, np.ndarray] = {}
        sums = np.zeros((n, len(self.spec.bias_vars)))
        for meta in self.links_by_stage[0]:
            sums[:, meta.dst_pos] += self._contrib(meta, vec, old, fresh)
        fresh["bias"] = np.clip(sums, -1.0, 1.0)

        pk = y_rr[:, self.pk_out_idx].copy()
        for meta in self.links_by_stage[1]:
            pk[:, meta.dst_pos] += self._contrib(meta, vec, old, fresh)
        fresh["pk"] = np.clip(pk, -1.0, 1.0)

        bel = np.zeros((n, self.nb))
        for meta in self.links_by_stage[2]:
            bel[:, meta.dst_pos] += self._contrib(meta, vec, old, fresh)
        fresh["belief"] = np.clip(bel, -1.0, 1.0)

        goal_sums = np.zeros((n, self.ng))
        emo_sums = np.zeros((n, self.ne))
        for meta in self.links_by_stage[3]:
            c = self._contrib(meta, vec, old, fresh)
            if meta.dst_kind == "goal":
                goal_sums[:, meta.dst_pos] += c
            else:
                emo_sums[:, meta.dst_pos] += c
        traits = vec[self.trait_slot_idx]
        fresh["goal"] = np.clip(self.sw_goal * old["goal"] + goal_sums, -1.0, 1.0)
        fresh["emotion"] = np.clip(self.sw_emotion * old["emotion"] + traits * emo_sums,
                                   -1.0, 1.0)
        return fresh

    # -- public -------------------------------------------------------------

    def spectral_radius(self, vec: np.ndarray) -> float:
        w = np.diag(self.sw_abs_diag)
        for meta in self.links:
            mag = max(abs(vec[meta.s0]), abs(vec[meta.s1]))
            if meta.trait_slot >= 0:
                mag *= abs(vec[meta.trait_slot])
            if mag > w[meta.src_gidx, meta.dst_gidx]:
                w[meta.src_gidx, meta.dst_gidx] = mag
        return float(np.max(np.abs(np.linalg.eigvals(w))))

    def predict(self, vec: np.ndarray) -> np.ndarray:
        """Predicted measured states for every pair, teacher-forced, two sub-steps."""
        y_rr = self._reasoning(vec)
        state = {"belief": self.B0, "goal": self.G0, "emotion": self.E0,
                 "bias": np.zeros((self.n_pairs, len(self.spec.bias_vars))),
                 "pk": np.zeros((self.n_pairs, len(self.spec.pk_vars)))}
        for _ in range(2):
            state = self._substep(vec, state, y_rr)
        return np.concatenate([state["belief"], state["goal"], state["emotion"]], axis=1)

    def mse_of(self, vec: np.ndarray) -> float:
        if self.n_pairs == 0:
            return 0.0
        pred = self.predict(vec)
        return float(np.mean((pred - self.target) ** 2))

    def cost_of(self, vec: np.ndarray) -> float:
        """One-step MSE, replaced by a dominating penalty when unstable."""
        rho = self.spectral_radius(vec)
        if rho >= 1.0:
            return _UNSTABLE_PENALTY + (rho - 1.0)
        return self.mse_of(vec)


class BeliefProxyEvaluator:
    """Decoupled-configuration objective for the perception warm start.

    Assumes each reasoning output equals the measured belief it ultimately
    feeds (null bias), turning perception fitting into a static regression.
    """

    def __init__(self, spec: ModelSpec, dataset: Dataset, normalizer: ChannelNormalizer,
                 layout: ParamLayout, allow_test: bool = False):
        if dataset.tag == "test" and not allow_test:
            raise DataError("refusing to evaluate an identification objective on test data")
        self.spec = spec
        self.layout = layout
        rows = [rec.rld.channels() for rec in dataset.records()]
        answers = [rec.answers for rec in dataset.records()]
        self.n_rows = len(rows)
        self.X = normalizer.transform(np.array(rows)) if rows else np.zeros((0, 6))
        measured = np.array(answers) if answers else np.zeros((0, 8))

        # align each belief with the reasoning output behind its pk influencer
        outputs, targets = [], []
        for b_idx, belief in enumerate(spec.belief_vars):
            for link in spec.influencers_of(belief):
                if link.src in spec.pk_vars:
                    outputs.append(spec.pk_sources[link.src])
                    targets.append(b_idx)
                    break
        self.out_idx = np.array(outputs, dtype=int)
        self.target = measured[:, targets] if targets else np.zeros((self.n_rows, 0))

        self.channel_inputs = np.array([ch.input for ch in spec.perception_channels])
        self.channel_outputs = np.array([ch.output for ch in spec.perception_channels])
        self.channel_families = [ch.family for ch in spec.perception_channels]
        self.n_outputs = spec.n_outputs

    def cost_of(self, vec: np.ndarray) -> float:
        if self.n_rows == 0 or self.out_idx.size == 0:
            return 0.0
        y = np.zeros((self.n_rows, self.n_outputs))
        for k, fam in enumerate(self.channel_families):
            x = self.X[:, self.channel_inputs[k]]
            t0, t1 = vec[2 * k], vec[2 * k + 1]
            if fam == AFFINE:
                out = t0 * x + t1
            elif fam == EXPONENTIAL:
                with np.errstate(over="ignore"):
                    out = t1 * np.exp(t0 * x) + 1.0
            else:
                out = np.where(x == 0.0, t0, t1)
            np.clip(out, -CHANNEL_OUTPUT_BOUND, CHANNEL_OUTPUT_BOUND, out=out)
            y[:, self.channel_outputs[k]] += out
        return float(np.mean((y[:, self.out_idx] - self.target) ** 2))

    mse_of = cost_of


# ---------------------------------------------------------------------------
# scalar reference predictions and error metric
# ---------------------------------------------------------------------------

def predict_one_ahead(params: ParameterSet, spec: ModelSpec, dataset: Dataset,
                      normalizer: ChannelNormalizer) -> tuple[np.ndarray, np.ndarray]:
    """Teacher-forced predictions via the scalar model operations.

    Returns (predictions, targets), one row per within-segment measurement
    pair.  The state is reset to the measured value before every prediction;
    auxiliaries are recomputed by the cognition update itself.
    """
    preds, targets = [], []
    for a, b in dataset.pairs():
        state = state_from_measured(spec, a.answers)
        x = normalizer.transform(b.rld.channels())
        state = advance(state, x, params, spec, substeps=2)
        preds.append(state.measured())
        targets.append(b.answers)
    if not preds:
        n = len(spec.belief_vars) + len(spec.goal_vars) + len(spec.emotion_vars)
        return np.zeros((0, n)), np.zeros((0, n))
    return np.array(preds), np.array(targets)


def free_run_mse(params: ParameterSet, spec: ModelSpec, dataset: Dataset,
                 normalizer: ChannelNormalizer) -> float:
    """Diagnostic multi-step error: reset only at each segment start."""
    errors = []
    for trace in dataset.segments:
        if len(trace) < 2:
            continue
        state = state_from_measured(spec, trace.records[0].answers)
        for rec in trace.records[1:]:
            state = advance(state, normalizer.transform(rec.rld.channels()), params, spec)
            errors.append((state.measured() - rec.answers) ** 2)
    if not errors:
        return 0.0
    return float(np.mean(np.concatenate(errors)))


def mse(predicted: np.ndarray, measured: np.ndarray) -> float:
    """Mean squared error over all components and steps; in [0, 4] for states."""
    predicted = np.asarray(predicted, dtype=float)
    measured = np.asarray(measured, dtype=float)
    if predicted.shape != measured.shape:
        raise DataError(f"shape mismatch {predicted.shape} vs {measured.shape}")
    if predicted.size == 0:
        return 0.0
    return float(np.mean((predicted - measured) ** 2))


# ---------------------------------------------------------------------------
# bounded budgeted local optimization
# ---------------------------------------------------------------------------

class _BudgetExhausted(Exception):
    pass


def optimize(objective, x0: np.ndarray, bounds: tuple[np.ndarray, np.ndarray],
             budget: int, seed: int = 0, method: str = "lbfgsb") -> tuple[np.ndarray, float]:
    """Bounded local search returning the best point evaluated.

    Contract: the returned point lies within bounds, its cost never exceeds
    the cost at ``x0``, at most ``budget`` evaluations are spent beyond the
    initial one, and the result is deterministic for a fixed seed.  Both
    methods (finite-difference quasi-Newton and a direction-set search) are
    deterministic, so the seed does not influence them; randomness lives in
    the caller's choice of ``x0``.  Because the quasi-Newton method never
    moves along zero-gradient directions, warm-started coordinates that do
    not affect the cost stay at their initial values.
    """
    lo, hi = np.asarray(bounds[0], dtype=float), np.asarray(bounds[1], dtype=float)
    x0 = np.clip(np.asarray(x0, dtype=float), lo, hi)
    f0 = float(objective(x0))
    if not np.isfinite(f0):
        raise NumericalError("objective is not finite at the initial point")
    best_x, best_f = x0.copy(), f0
    if budget <= 0:
        return best_x, best_f

    count = 0

    def wrapped(x):
        nonlocal count, best_x, best_f
        if count >= budget:
            raise _BudgetExhausted
        count += 1
        xc = np.clip(x, lo, hi)
        f = float(objective(xc))
        if f < best_f:
            best_x, best_f = xc.copy(), f
        return f

    try:
        if method == "lbfgsb":
            scipy.optimize.minimize(
                wrapped, x0, method="L-BFGS-B",
                bounds=scipy.optimize.Bounds(lo, hi),
                options={"maxfun": budget, "maxiter": 10 ** 9,
                         "ftol": 1e-14, "gtol": 1e-10},
            )
        elif method == "powell":
            scipy.optimize.minimize(
                wrapped, x0, method="Powell",
                bounds=scipy.optimize.Bounds(lo, hi),
                options={"maxfev": budget, "maxiter": 10 ** 9,
                         "xtol": 1e-6, "ftol": 1e-9},
            )
        else:
            raise NumericalError(f"unknown optimizer method {method!r}")
    except _BudgetExhausted:
        pass
    return best_x, best_f


# ---------------------------------------------------------------------------
# identification configuration and report
# ---------------------------------------------------------------------------

@dataclass
class IdentificationConfig:
    """Knobs of the multi-start identification procedures."""

    n_run: int = 30
    n_opt: int = 5
    std_threshold: float = 0.1
    split_ratio: float = 0.67
    seed: int = 0
    approach: str = "b"                  # conventional | a | b
    budget: int = 2000                   # objective evaluations per coupled run
    warm_budget: int = 600               # objective evaluations per decoupled run
    stage2_budget: int = 2500            # joint refinement budget (approach B)
    validation_fraction: float = 0.2     # tail share of the training block
    wii_goal_emotion: float = 0.9        # self-weight of goals and emotions
    wii_acceptable_mse: float = 0.1      # threshold of the self-weight fallback
    optimizer: str = "lbfgsb"            # lbfgsb | powell
    bounds: ParameterBounds = field(default_factory=ParameterBounds)

    def __post_init__(self):
        if self.n_opt > self.n_run:
            raise DataError("n_opt must not exceed n_run")
        if not 0.0 < self.split_ratio < 1.0:
            raise DataError("split_ratio must lie strictly inside (0, 1)")
        if self.budget <= 0:
            raise DataError("optimizer budget must be positive")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "bounds"}
        d["bounds"] = self.bounds.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "IdentificationConfig":
        d = dict(d)
        bounds = ParameterBounds.from_dict(d.pop("bounds")) if "bounds" in d else ParameterBounds()
        return cls(bounds=bounds, **d)


@dataclass
class RunResult:
    run: int
    theta: np.ndarray
    fit_cost: float
    val_cost: float


@dataclass
class IdentReport:
    """Outcome of one identification procedure on one training dataset."""

    params: ParameterSet
    param_names: list[str]
    best_theta: np.ndarray
    run_costs: list[tuple[int, float, float]]     # (run index, fit cost, validation cost)
    flag_thetas: np.ndarray                       # runs entering the identifiability check
    flag_val_costs: np.ndarray
    sigmas: np.ndarray                            # normalized per-parameter std over those runs
    flags: np.ndarray                             # identified iff sigma <= threshold
    train_mse: float
    test_mse: float | None
    free_run_mse: float | None
    wii_used: float

    @property
    def pct_identified(self) -> float:
        return float(100.0 * np.mean(self.flags)) if self.flags.size else 100.0

    def save_csv(self, path) -> None:
        lines = [
            f"# train_mse={self.train_mse!r}",
            f"# test_mse={'' if self.test_mse is None else repr(self.test_mse)}",
            f"# free_run_mse={'' if self.free_run_mse is None else repr(self.free_run_mse)}",
            f"# pct_identified={self.pct_identified!r}",
            f"# wii={self.wii_used!r}",
            "# run_costs=" + ";".join(f"{r}:{f!r}:{v!r}" for r, f, v in self.run_costs),
            "name,value,sigma,identified",
        ]
        for name, value, sigma, flag in zip(self.param_names, self.best_theta,
                                            self.sigmas, self.flags):
            lines.append(f"{name},{float(value)!r},{float(sigma)!r},{int(flag)}")
        from pathlib import Path
        Path(path).write_text("\n".join(lines) + "\n")


def assess_identifiability(thetas: np.ndarray, val_costs: np.ndarray,
                           config: IdentificationConfig,
                           layout: ParamLayout) -> tuple[np.ndarray, np.ndarray]:
    """Flag parameters whose bound-normalized std over the best runs is small.

    Takes the ``n_opt`` runs with minimum validation cost (ties by run
    index), computes the per-parameter standard deviation after normalizing
    each parameter by its declared bound width, and flags a parameter as
    unequivocally identified iff that deviation is at most the threshold.
    """
    thetas = np.asarray(thetas, dtype=float)
    order = np.argsort(np.asarray(val_costs), kind="stable")[:config.n_opt]
    chosen = layout.normalize(thetas[order])
    sigmas = np.std(chosen, axis=0, ddof=0)
    return sigmas <= config.std_threshold, sigmas


# ---------------------------------------------------------------------------
# multi-start procedures
# ---------------------------------------------------------------------------

def _opt_val_split(train: Dataset, config: IdentificationConfig) -> tuple[Dataset, Dataset]:
    opt, val = split_dataset(train, 1.0 - config.validation_fraction)
    val.tag = "val"
    return opt, val


def _draw_joint(rng: np.random.Generator, layout: ParamLayout,
                evaluator: OneStepEvaluator, fixed_perception: np.ndarray | None = None,
                max_attempts: int = 100) -> np.ndarray:
    """Uniform draw within bounds, redrawn until the stability condition holds."""
    for _ in range(max_attempts):
        vec = rng.uniform(layout.lo, layout.hi)
        if fixed_perception is not None:
            vec[layout.perception_slice] = fixed_perception
        if evaluator.spectral_radius(vec) < 1.0:
            return vec
    raise NumericalError("could not draw a stable initial parameter set")


def warm_start_perception(train: Dataset, config: IdentificationConfig, spec: ModelSpec,
                          normalizer: ChannelNormalizer) -> np.ndarray:
    """Multi-start perception-only fit in the decoupled configuration.

    Returns the perception block of the minimum-cost run.
    """
    if train.n_measurements == 0:
        raise DataError("cannot warm-start on an empty dataset")
    layout = ParamLayout(spec, config.bounds)
    opt, _ = _opt_val_split(train, config)
    evaluator = BeliefProxyEvaluator(spec, opt, normalizer, layout)
    rng = np.random.default_rng(config.seed)
    per_lo = layout.lo[layout.perception_slice]
    per_hi = layout.hi[layout.perception_slice]
    inits = [rng.uniform(per_lo, per_hi) for _ in range(config.n_run)]

    def objective(per_vec):
        full = np.zeros(layout.n_total)
        full[layout.perception_slice] = per_vec
        return evaluator.cost_of(full)

    best_vec, best_cost = None, np.inf
    for x0 in inits:
        vec, cost = optimize(objective, x0, (per_lo, per_hi), config.warm_budget,
                             config.seed, method=config.optimizer)
        if cost < best_cost:
            best_vec, best_cost = vec, cost
    return best_vec


def _finalize_report(spec, layout, base, runs, flag_runs, config, train, test, normalizer,
                     dm_params) -> IdentReport:
    order = sorted(range(len(runs)), key=lambda i: (runs[i].val_cost, runs[i].run))
    best = runs[order[0]]
    flag_thetas = np.array([r.theta for r in flag_runs])
    flag_vals = np.array([r.val_cost for r in flag_runs])
    flags, sigmas = assess_identifiability(flag_thetas, flag_vals, config, layout)
    params = layout.unpack(best.theta, base)
    if dm_params is not None:
        params.decision = dm_params
    train_eval = OneStepEvaluator(spec, train, normalizer, layout, base)
    train_mse = train_eval.mse_of(best.theta)
    test_mse = None
    fr = None
    if test is not None:
        test_eval = OneStepEvaluator(spec, test, normalizer, layout, base, allow_test=True)
        test_mse = test_eval.mse_of(best.theta)
        fr = free_run_mse(params, spec, test, normalizer)
    return IdentReport(
        params=params,
        param_names=list(layout.names),
        best_theta=best.theta.copy(),
        run_costs=[(r.run, r.fit_cost, r.val_cost) for r in runs],
        flag_thetas=flag_thetas,
        flag_val_costs=flag_vals,
        sigmas=sigmas,
        flags=flags,
        train_mse=train_mse,
        test_mse=test_mse,
        free_run_mse=fr,
        wii_used=float(base.self_weights[spec.index(spec.goal_vars[0])]) if spec.goal_vars else 0.0,
    )


def _identify_once(train, config, spec, normalizer, test, approach, wii) -> IdentReport:
    layout = ParamLayout(spec, config.bounds)
    base = ParameterSet.defaults(spec, wii_goal_emotion=wii)
    opt, val = _opt_val_split(train, config)
    fit_eval = OneStepEvaluator(spec, opt, normalizer, layout, base)
    val_eval = OneStepEvaluator(spec, val, normalizer, layout, base)
    rng = np.random.default_rng(config.seed)
    bounds = (layout.lo, layout.hi)
    dm_params = identify_dm(train, spec, config.bounds)

    warm = None
    if approach in ("a", "b"):
        warm = warm_start_perception(train, config, spec, normalizer)

    runs: list[RunResult] = []
    if approach == "conventional":
        inits = [_draw_joint(rng, layout, fit_eval) for _ in range(config.n_run)]
        for r, x0 in enumerate(inits):
            theta, cost = optimize(fit_eval.cost_of, x0, bounds, config.budget,
                                   config.seed + r, method=config.optimizer)
            runs.append(RunResult(r, theta, cost, val_eval.mse_of(theta)))
        flag_runs = runs
    elif approach == "a":
        inits = [_draw_joint(rng, layout, fit_eval, fixed_perception=warm)
                 for _ in range(config.n_run)]
        for r, x0 in enumerate(inits):
            theta, cost = optimize(fit_eval.cost_of, x0, bounds, config.budget,
                                   config.seed + r, method=config.optimizer)
            runs.append(RunResult(r, theta, cost, val_eval.mse_of(theta)))
        flag_runs = runs
    elif approach == "b":
        # stage 1: cognition only, perception frozen at the warm start
        cog_lo = layout.lo[layout.cognition_slice]
        cog_hi = layout.hi[layout.cognition_slice]
        stage1: list[RunResult] = []
        inits = [_draw_joint(rng, layout, fit_eval, fixed_perception=warm)
                 for _ in range(config.n_run)]

        def cog_objective(cog_vec):
            full = np.empty(layout.n_total)
            full[layout.perception_slice] = warm
            full[layout.cognition_slice] = cog_vec
            return fit_eval.cost_of(full)

        for r, x0 in enumerate(inits):
            cog0 = x0[layout.cognition_slice]
            cog, cost = optimize(cog_objective, cog0, (cog_lo, cog_hi),
                                 config.budget, config.seed + r, method=config.optimizer)
            full = np.empty(layout.n_total)
            full[layout.perception_slice] = warm
            full[layout.cognition_slice] = cog
            stage1.append(RunResult(r, full, cost, val_eval.mse_of(full)))
        # stage 2: joint refinement seeded by the best cognition vectors
        order = sorted(range(len(stage1)), key=lambda i: (stage1[i].val_cost, stage1[i].run))
        seeds = [stage1[i] for i in order[:config.n_opt]]
        for r, seed_run in enumerate(seeds):
            theta, cost = optimize(fit_eval.cost_of, seed_run.theta, bounds,
                                   config.stage2_budget, config.seed + r,
                                   method=config.optimizer)
            runs.append(RunResult(r, theta, cost, val_eval.mse_of(theta)))
        flag_runs = runs
    else:
        raise DataError(f"unknown identification approach {approach!r}")

    return _finalize_report(spec, layout, base, runs, flag_runs, config,
                            train, test, normalizer, dm_params)


def _identify(train, config, spec, normalizer, test, approach) -> IdentReport:
    """Run one procedure, reducing the goal/emotion self-weight on poor fits."""
    wii = config.wii_goal_emotion
    while True:
        report = _identify_once(train, config, spec, normalizer, test, approach, wii)
        if report.train_mse <= config.wii_acceptable_mse or wii <= 0.0:
            return report
        wii = max(0.0, round(wii - 0.1, 10))


def identify_conventional(train: Dataset, config: IdentificationConfig, spec: ModelSpec,
                          normalizer: ChannelNormalizer, test: Dataset | None = None) -> IdentReport:
    """Multi-start joint identification without warm start."""
    return _identify(train, config, spec, normalizer, test, "conventional")


def identify_approach_a(train: Dataset, config: IdentificationConfig, spec: ModelSpec,
                        normalizer: ChannelNormalizer, test: Dataset | None = None) -> IdentReport:
    """Warm-started joint identification: every run starts perception at the warm start."""
    return _identify(train, config, spec, normalizer, test, "a")


def identify_approach_b(train: Dataset, config: IdentificationConfig, spec: ModelSpec,
                        normalizer: ChannelNormalizer, test: Dataset | None = None) -> IdentReport:
    """Two-stage warm-started identification: cognition first, then joint refinement."""
    return _identify(train, config, spec, normalizer, test, "b")


def identify(train: Dataset, config: IdentificationConfig, spec: ModelSpec,
             normalizer: ChannelNormalizer, test: Dataset | None = None) -> IdentReport:
    """Dispatch on ``config.approach``."""
    return _identify(train, config, spec, normalizer, test, config.approach)


# ---------------------------------------------------------------------------
# decision-making identification
# ---------------------------------------------------------------------------

def _fit_sign_classifier(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Fit (weight, offset) so that sign(weight * x + offset) matches labels.

    Minimizes misclassifications, then maximizes the margin; ties break
    toward the smaller weight magnitude.  Contradictory labels are allowed.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=bool)
    if x.size == 0 or not y.any():
        return 0.0, 0.0
    if y.all():
        return 0.0, 0.5
    xs = np.unique(x)
    thresholds = [float(xs[0]) - 0.5, float(xs[-1]) + 0.5]
    thresholds += [float(0.5 * (a + b)) for a, b in zip(xs, xs[1:])]
    # key: (errors, -margin, |weight|, threshold); constant predictors carry margin 0
    best = None
    for errors, margin, weight, offset in (
            (int(np.count_nonzero(y)), 0.0, 0.0, 0.0),
            (int(np.count_nonzero(~y)), 0.0, 0.0, 0.5)):
        key = (errors, -margin, abs(weight), offset)
        if best is None or key < best[0]:
            best = (key, weight, offset)
    for s in (1.0, -1.0):
        for t in thresholds:
            pred = s * (x - t) > 0.0
            errors = int(np.count_nonzero(pred != y))
            margin = float(np.min(np.abs(x - t)))
            key = (errors, -margin, 1.0, s * -t)
            if key < best[0]:
                best = (key, s, -s * t)
    return best[1], best[2]


def identify_dm(dataset: Dataset, spec: ModelSpec,
                bounds: ParameterBounds | None = None) -> np.ndarray:
    """Fit the per-intention (goal weight, offset) from recorded actions.

    Pairs each measurement's recorded actions with the measured value of
    the goal wired to each intention.
    """
    bounds = bounds or ParameterBounds()
    records = list(dataset.records())
    answers = np.array([r.answers for r in records]) if records else np.zeros((0, 8))
    actions = np.array([r.actions for r in records]) if records else np.zeros((0, 5), dtype=bool)
    nb = len(spec.belief_vars)
    goal_idx = {g: nb + i for i, g in enumerate(spec.goal_vars)}
    out = np.zeros((spec.n_intentions, 2))
    for k, (_, goal) in enumerate(spec.intention_wiring):
        g = answers[:, goal_idx[goal]] if records else np.zeros(0)
        a = actions[:, k] if records else np.zeros(0, dtype=bool)
        w, c = _fit_sign_classifier(g, a)
        out[k] = (np.clip(w, *bounds.dm_weight), np.clip(c, *bounds.dm_offset))
    return out


def dm_accuracy(decision: np.ndarray, dataset: Dataset, spec: ModelSpec) -> float:
    """Fraction of recorded action flags reproduced by the decision parameters."""
    records = list(dataset.records())
    if not records:
        return 1.0
    answers = np.array([r.answers for r in records])
    actions = np.array([r.actions for r in records]).astype(bool)
    nb = len(spec.belief_vars)
    goal_idx = {g: nb + i for i, g in enumerate(spec.goal_vars)}
    hits = 0
    for k, (_, goal) in enumerate(spec.intention_wiring):
        strength = decision[k, 0] * answers[:, goal_idx[goal]] + decision[k, 1]
        hits += int(np.count_nonzero((strength > 0.0) == actions[:, k]))
    return hits / (len(records) * spec.n_intentions)


# ---------------------------------------------------------------------------
# model simplification
# ---------------------------------------------------------------------------

def simplify_model(spec: ModelSpec, flags: np.ndarray, layout: ParamLayout) -> list[ModelSpec]:
    """Candidate structural simplifications, in order.

    First drop every variable that influences no other state and whose
    incoming linkage parameters are all flagged unidentified (with the
    intentions wired to dropped goals); then collapse every flagged
    two-piece weight to a constant.  Candidates are returned, not selected.
    """
    unidentified = {layout.names[i] for i in range(len(flags)) if not flags[i]}

    def linkage_flagged(link: Linkage) -> bool:
        if link.kind == TWO_PIECE:
            return (f"w[{link.src}->{link.dst}]-" in unidentified
                    or f"w[{link.src}->{link.dst}]+" in unidentified)
        return f"w[{link.src}->{link.dst}]" in unidentified

    candidates: list[ModelSpec] = []

    droppable = []
    for name in spec.all_vars:
        if spec.kind_of(name) not in ("goal",):
            continue
        if spec.influences_anything(name):
            continue
        incoming = spec.influencers_of(name)
        if incoming and all(linkage_flagged(l) for l in incoming):
            droppable.append(name)

    reduced = spec
    if droppable:
        dropped = set(droppable)
        reduced = ModelSpec(
            belief_vars=spec.belief_vars,
            goal_vars=tuple(g for g in spec.goal_vars if g not in dropped),
            emotion_vars=spec.emotion_vars,
            bias_vars=spec.bias_vars,
            pk_vars=spec.pk_vars,
            perception_channels=spec.perception_channels,
            cognition_linkages=tuple(l for l in spec.cognition_linkages
                                     if l.src not in dropped and l.dst not in dropped),
            self_weights={k: v for k, v in spec.self_weights.items() if k not in dropped},
            intention_wiring=tuple((i, g) for i, g in spec.intention_wiring
                                   if g not in dropped),
            pk_sources=dict(spec.pk_sources),
        )
        reduced.validate()
        candidates.append(reduced)

    collapsible = [l for l in reduced.cognition_linkages
                   if l.kind == TWO_PIECE and linkage_flagged(l)]
    if collapsible:
        collapsed_set = {(l.src, l.dst) for l in collapsible}
        collapsed = ModelSpec(
            belief_vars=reduced.belief_vars,
            goal_vars=reduced.goal_vars,
            emotion_vars=reduced.emotion_vars,
            bias_vars=reduced.bias_vars,
            pk_vars=reduced.pk_vars,
            perception_channels=reduced.perception_channels,
            cognition_linkages=tuple(
                Linkage(l.src, l.dst, CONSTANT) if (l.src, l.dst) in collapsed_set else l
                for l in reduced.cognition_linkages),
            self_weights=dict(reduced.self_weights),
            intention_wiring=reduced.intention_wiring,
            pk_sources=dict(reduced.pk_sources),
        )
        collapsed.validate()
        candidates.append(collapsed)

    return candidates
