"""One-step model-based behavioral control.

From the latest measured mental state, the controller predicts the next
state under each of the 12 candidate (difficulty, reward) inputs using the
identified model and picks the cost minimizer.  The cost penalizes the
magnitude of the "puzzle is difficult" belief, the quit and skip goals,
and both emotions.  Channels the controller does not decide (hints, wrong
attempts, solve time) are filled from exponentially weighted means of the
last three observed puzzles.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import MindsimError, NumericalError
from .model import (ALL_CONTROL_INPUTS, ControlInput, MentalState, ModelSpec, ParameterSet,
                    RealLifeData, advance, check_stability, cognition_step,
                    rational_reasoning, weight_lookup)
from .trace import ANSWER_NAMES, ChannelNormalizer


@dataclass
class ControllerConfig:
    """Cost weights, tie-break policy, and rolling-statistic parameters."""

    w_g: float = 1.0
    w_e: float = 1.0
    ew_alpha: float = 0.5
    ew_window: int = 3
    horizon: int = 1        # candidate enumeration supports horizon 1 only

    def __post_init__(self):
        if self.w_g < 0.0 or self.w_e < 0.0:
            raise MindsimError("cost weights must be nonnegative")
        if self.horizon != 1:
            raise MindsimError("only a one-step prediction horizon is supported")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "ControllerConfig":
        return cls(**d)


@dataclass
class ControllerState:
    """Identified model plus the controller's running state estimate."""

    spec: ModelSpec
    params: ParameterSet
    normalizer: ChannelNormalizer
    config: ControllerConfig = field(default_factory=ControllerConfig)
    state: MentalState = None
    last_y_rr: np.ndarray = None
    recent_puzzles: deque = None     # (hints, wrong attempts, solve seconds) per puzzle

    def __post_init__(self):
        check_stability(self.params, self.spec)
        if self.state is None:
            self.state = MentalState.zeros(self.spec)
        if self.last_y_rr is None:
            self.last_y_rr = np.zeros(self.spec.n_outputs)
        if self.recent_puzzles is None:
            self.recent_puzzles = deque(maxlen=self.config.ew_window)

    def rolling_estimates(self) -> tuple[float, float, float]:
        """Exponentially weighted means of hints, wrong attempts, solve time."""
        if not self.recent_puzzles:
            return 0.0, 0.0, 0.0
        values = np.array(list(self.recent_puzzles)[::-1], dtype=float)  # newest first
        w = self.config.ew_alpha ** np.arange(len(values))
        est = (w[:, None] * values).sum(axis=0) / w.sum()
        return float(est[0]), float(est[1]), float(est[2])


def _recompute_auxiliaries(state: MentalState, ctrl: ControllerState) -> MentalState:
    """Memoryless refresh of bias and perceived knowledge from the model."""
    spec, params = ctrl.spec, ctrl.params
    names = spec.all_vars
    values = dict(zip(names, state.as_vector()))
    for b_idx, bias in enumerate(spec.bias_vars):
        total = 0.0
        for l_idx, link in enumerate(spec.cognition_linkages):
            if link.dst != bias:
                continue
            xj = values[link.src]
            wm, wp = params.linkage_weights[l_idx]
            total += weight_lookup(link.kind, wm, wp, xj) * xj
        state.bias[b_idx] = min(1.0, max(-1.0, total))
        values[bias] = state.bias[b_idx]
    for p_idx, pk in enumerate(spec.pk_vars):
        total = float(ctrl.last_y_rr[spec.pk_sources[pk]])
        for l_idx, link in enumerate(spec.cognition_linkages):
            if link.dst != pk:
                continue
            xj = values[link.src]
            wm, wp = params.linkage_weights[l_idx]
            total += weight_lookup(link.kind, wm, wp, xj) * xj
        state.pk[p_idx] = min(1.0, max(-1.0, total))
        values[pk] = state.pk[p_idx]
    return state


def reset_state(measurement: np.ndarray, ctrl: ControllerState) -> MentalState:
    """Replace beliefs, goals and emotions with measured values.

    Out-of-range components are clipped with a warning; the auxiliary bias
    and perceived-knowledge variables are recomputed from the model.
    """
    measurement = np.asarray(measurement, dtype=float)
    by_name = dict(zip(ANSWER_NAMES, measurement))
    spec = ctrl.spec
    picked = np.array([by_name[v] for v in
                       spec.belief_vars + spec.goal_vars + spec.emotion_vars])
    if np.any(np.abs(picked) > 1.0):
        warnings.warn("measurement outside [-1, 1]; clipping", stacklevel=2)
        picked = np.clip(picked, -1.0, 1.0)
    state = ctrl.state.copy()
    nb, ng = len(spec.belief_vars), len(spec.goal_vars)
    state.beliefs = picked[:nb]
    state.goals = picked[nb:nb + ng]
    state.emotions = picked[nb + ng:]
    return _recompute_auxiliaries(state, ctrl)


def predicted_channels(candidate: ControlInput, ctrl: ControllerState) -> np.ndarray:
    """Situation-data channels assumed for a one-step prediction."""
    hints, wrong, seconds = ctrl.rolling_estimates()
    return np.array([float(candidate.difficulty), hints, wrong, seconds,
                     0.0, 1.0 if candidate.reward else 0.0])


def predict_next(state: MentalState, candidate: ControlInput,
                 ctrl: ControllerState) -> MentalState:
    """Predicted state after one control step: one perception evaluation,
    two cognition sub-steps."""
    x = ctrl.normalizer.transform(predicted_channels(candidate, ctrl))
    return advance(state, x, ctrl.params, ctrl.spec, substeps=2)


def cost(next_state: MentalState, w_g: float = 1.0, w_e: float = 1.0) -> float:
    """|first belief| + w_g * (quit + skip goals) + w_e * (both emotions)."""
    return float(abs(next_state.beliefs[0])
                 + w_g * (next_state.goals[0] + next_state.goals[1])
                 + w_e * (next_state.emotions[0] + next_state.emotions[1]))


def choose_input(state: MentalState, ctrl: ControllerState) -> ControlInput:
    """Exhaustively evaluate the 12 candidates and return the cost argmin.

    Ties break toward the lower difficulty, then toward withholding the
    reward.  Candidates whose prediction fails are excluded; if every
    candidate fails, a numerical error is raised.
    """
    best_key, best_input = None, None
    for candidate in ALL_CONTROL_INPUTS:
        try:
            predicted = predict_next(state, candidate, ctrl)
            j = cost(predicted, ctrl.config.w_g, ctrl.config.w_e)
        except MindsimError:
            continue
        key = (j, candidate.difficulty, candidate.reward)
        if best_key is None or key < best_key:
            best_key, best_input = key, candidate
    if best_input is None:
        raise NumericalError("every candidate control input failed to evaluate")
    return best_input


class OneStepController:
    """Session driver wrapping a :class:`ControllerState`.

    Advances its internal model estimate at every realized event, resets
    it whenever fresh measurements arrive, and picks the next input by
    exhaustive one-step cost minimization.
    """

    def __init__(self, ctrl: ControllerState):
        self.ctrl = ctrl

    def on_event(self, rld: RealLifeData, end_of_puzzle: bool) -> None:
        x = self.ctrl.normalizer.transform(rld.channels())
        y_rr = rational_reasoning(x, self.ctrl.params, self.ctrl.spec)
        state = self.ctrl.state
        for _ in range(2):
            state = cognition_step(state, y_rr, self.ctrl.params, self.ctrl.spec)
        self.ctrl.state = state
        self.ctrl.last_y_rr = y_rr
        if end_of_puzzle:
            self.ctrl.recent_puzzles.append(
                (float(rld.hints), float(rld.wrong_attempts), float(rld.solve_time)))

    def on_measurement(self, answers: np.ndarray) -> None:
        self.ctrl.state = reset_state(answers, self.ctrl)

    def next_input(self) -> ControlInput:
        return choose_input(self.ctrl.state, self.ctrl)
