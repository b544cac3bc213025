"""Synthetic participants and the interaction-session protocol.

A synthetic participant owns a ground-truth model and a skill level; a
stochastic performance model (documented constants, not claims about
humans) turns puzzle difficulty into wrong attempts and solve time.  The
session engine reproduces the data-collection protocol: two scripted
sessions with block-wise difficulty schedules and one random reward per
three-puzzle block, questions twice per puzzle and after every hint, and a
controller-driven session where questions follow the elapsed-time /
puzzle-count rule.  All randomness is drawn from seeded generators so a
session is reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .model import (ALL_CONTROL_INPUTS, ControlInput, MentalState, ModelSpec,
                    ParameterSet, PerceptionFilter, RealLifeData, advance, check_stability,
                    chess_session_spec, intention_strengths, select_actions)
from .trace import ChannelNormalizer, MeasurementRecord, SessionTrace, quantize_answers

#: Seconds a hint interaction adds to the current puzzle.
HINT_PAUSE_SECONDS = 22.0

#: Rating bands per difficulty level (min rating, max rating); bands are disjoint.
RATING_BANDS = ((600, 800), (920, 1120), (1240, 1440), (1560, 1760), (1880, 2080), (2200, 2400))


def rating_to_level(rating: int) -> int:
    """Map a puzzle rating to its difficulty level; ratings in gaps are rejected."""
    for level, (lo, hi) in enumerate(RATING_BANDS):
        if lo <= rating <= hi:
            return level
    raise DataError(f"rating {rating} falls outside every difficulty band")


@dataclass(frozen=True)
class SessionScript:
    """Difficulty schedule and bounds of one scripted data-collection session."""

    session_id: int
    blocks: tuple[int, ...]
    puzzles_per_block: int = 3
    min_puzzles: int = 18
    max_puzzles: int = 30
    min_minutes: float = 45.0
    max_minutes: float = 60.0

    def difficulty_for(self, puzzle: int) -> int:
        """Difficulty of the 1-based puzzle number; the schedule repeats after 18."""
        if puzzle < 1:
            raise DataError("puzzle numbers are 1-based")
        i = (puzzle - 1) % (len(self.blocks) * self.puzzles_per_block)
        return self.blocks[i // self.puzzles_per_block]

    @classmethod
    def standard(cls, session_id: int) -> "SessionScript":
        if session_id == 1:
            return cls(1, (0, 2, 4, 4, 2, 0))
        if session_id == 2:
            return cls(2, (5, 3, 1, 1, 3, 5))
        raise DataError(f"no standard script for session {session_id}")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) if k != "blocks" else list(self.blocks)
                for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "SessionScript":
        d = dict(d)
        d["blocks"] = tuple(d["blocks"])
        return cls(**d)


# ---------------------------------------------------------------------------
# ground-truth template
# ---------------------------------------------------------------------------

def demo_parameter_set(spec: ModelSpec | None = None) -> ParameterSet:
    """A documented, stable ground-truth parameter set for the built-in spec.

    Sign conventions: the first reasoning output grows with difficulty,
    hints, wrong attempts, solve time and skipping; boredom grows when the
    puzzle feels too easy and falls under rewards; frustration grows when
    it feels too hard.  A positive "change difficulty" goal means wanting
    an easier puzzle.
    """
    spec = spec or chess_session_spec()
    params = ParameterSet.defaults(spec)
    params.perception = np.array([
        [0.9, -0.45],    # difficulty, affine
        [-0.9, 0.0],     # hints, affine (hints make the puzzle feel easier)
        [-1.6, -1.0],    # wrong attempts, exponential (1 - exp(-1.6 x), zero at zero)
        [-1.4, -1.0],    # solve time, exponential
        [-0.15, 0.45],   # skipped, boolean levels
        [-0.75, 0.75],   # reward, boolean levels
    ])
    weights = {
        ("pk_puzzle_difficult", "puzzle_difficult"): (0.85, 0.85),
        ("pk_reward_offered", "reward_offered"): (0.9, 0.9),
        ("puzzle_difficult", "quit_session"): (-0.015, 0.035),
        ("boredom", "quit_session"): (0.0, 0.055),
        ("frustration", "quit_session"): (0.0, 0.045),
        ("puzzle_difficult", "skip_puzzle"): (-0.012, 0.035),
        ("frustration", "skip_puzzle"): (0.0, 0.055),
        ("puzzle_difficult", "get_help"): (0.0, 0.045),
        ("boredom", "get_help"): (0.0, -0.012),
        ("frustration", "get_help"): (0.006, 0.028),
        ("puzzle_difficult", "change_difficulty"): (0.12, 0.1),
        ("frustration", "change_difficulty"): (0.0, 0.075),
        ("puzzle_difficult", "boredom"): (-0.18, -0.1),
        ("reward_offered", "boredom"): (0.015, -0.12),
        ("puzzle_difficult", "frustration"): (-0.03, 0.16),
        ("reward_offered", "frustration"): (0.01, -0.07),
        ("boredom", "difficulty_bias"): (-0.2, -0.2),
        ("frustration", "difficulty_bias"): (0.3, 0.3),
        ("difficulty_bias", "pk_puzzle_difficult"): (0.4, 0.4),
    }
    for l_idx, link in enumerate(spec.cognition_linkages):
        params.linkage_weights[l_idx] = weights[(link.src, link.dst)]
    params.trait_gains[:] = (1.0, 1.0)
    decision = {
        "quit": (1.0, -0.65),
        "skip": (1.0, -0.45),
        "ask_help": (1.0, 0.0),
        "ask_easier": (1.0, -0.35),
        "ask_harder": (-1.0, -0.35),
    }
    for k, (name, _) in enumerate(spec.intention_wiring):
        params.decision[k] = decision[name]
    params.validate(spec)
    check_stability(params, spec)
    return params


def perturb_parameter_set(template: ParameterSet, spec: ModelSpec,
                          rng: np.random.Generator, scale: float,
                          max_attempts: int = 100) -> ParameterSet:
    """Seeded per-participant variation of a template, redrawn until stable."""
    constant_rows = [i for i, l in enumerate(spec.cognition_linkages) if l.kind == "constant"]
    for _ in range(max_attempts):
        p = template.copy()
        p.perception = p.perception + scale * 0.2 * rng.standard_normal(p.perception.shape)
        p.linkage_weights = p.linkage_weights * (
            1.0 + scale * rng.standard_normal(p.linkage_weights.shape))
        p.linkage_weights[constant_rows, 1] = p.linkage_weights[constant_rows, 0]
        p.trait_gains = np.clip(
            p.trait_gains * (1.0 + scale * rng.standard_normal(p.trait_gains.shape)), 0.2, 2.0)
        p.decision = p.decision + scale * 0.2 * rng.standard_normal(p.decision.shape)
        try:
            check_stability(p, spec)
        except Exception:
            continue
        p.validate(spec)
        return p
    raise DataError("could not draw a stable perturbed parameter set")


# ---------------------------------------------------------------------------
# synthetic participant
# ---------------------------------------------------------------------------

@dataclass
class SyntheticParticipant:
    """Ground-truth model plus a stochastic puzzle-performance model."""

    spec: ModelSpec
    params: ParameterSet
    skill: float
    rng: np.random.Generator
    state: MentalState = None
    filter: PerceptionFilter = None
    normalizer: ChannelNormalizer = field(default_factory=ChannelNormalizer.reference)

    def __post_init__(self):
        check_stability(self.params, self.spec)
        if self.state is None:
            self.state = MentalState.zeros(self.spec)
        if self.filter is None:
            self.filter = PerceptionFilter()

    @classmethod
    def create(cls, spec: ModelSpec, params: ParameterSet, skill: float,
               seed) -> "SyntheticParticipant":
        return cls(spec=spec, params=params, skill=float(skill),
                   rng=np.random.default_rng(seed))

    def reset(self) -> None:
        self.state = MentalState.zeros(self.spec)
        self.filter = PerceptionFilter()

    # -- one perception/cognition/decision pass ------------------------------

    def step(self, rld: RealLifeData) -> tuple[np.ndarray, np.ndarray]:
        """Perceive one event, update the state twice, decide, answer questions.

        Returns (quantized answers for beliefs/goals/emotions, boolean actions).
        """
        pd = self.filter.apply(rld)
        x = self.normalizer.transform(pd)
        self.state = advance(self.state, x, self.params, self.spec, substeps=2)
        actions = select_actions(intention_strengths(self.state, self.params, self.spec))
        answers = quantize_answers(self.state.measured())
        return answers, actions

    # -- puzzle performance ---------------------------------------------------

    def draw_performance(self, difficulty: int) -> tuple[int, int, float]:
        """(number of moves, total wrong attempts, base solve seconds)."""
        n_moves = int(self.rng.integers(2, 7))
        lam = math.exp(0.55 * (difficulty - 5.0 * self.skill) - 1.0)
        wrong = int(self.rng.poisson(lam))
        per_move = (5.0 * (1.0 + 0.25 * difficulty) * (1.4 - 0.5 * self.skill)
                    * math.exp(self.rng.normal(0.0, 0.25)))
        base_seconds = n_moves * per_move + 9.0 * wrong
        return n_moves, wrong, base_seconds


def participant_step(participant: SyntheticParticipant,
                     rld: RealLifeData) -> tuple[np.ndarray, np.ndarray]:
    return participant.step(rld)


def puzzle_episode(participant: SyntheticParticipant, difficulty: int, reward: bool,
                   emit) -> RealLifeData:
    """Drive one puzzle: a mid-puzzle event, a hint event per granted hint,
    and an end event.

    ``emit(rld, dt_seconds, end_of_puzzle, is_hint)`` receives every event
    and returns the participant's action vector.  Hints are granted while
    the ask-help action fires, up to 1 + 2 * moves; a skip censors the
    solve time and wrong attempts at the moment of skipping.
    """
    n_moves, wrong_total, base_seconds = participant.draw_performance(difficulty)
    hint_cap = 1 + 2 * n_moves
    hints = 0
    wrong_mid = int(round(0.5 * wrong_total))
    t = 0.45 * base_seconds
    skipped = False

    actions = emit(RealLifeData(difficulty, hints, wrong_mid, t, False, reward),
                   t, False, False)
    if actions[_ACT_SKIP]:
        skipped = True
    while not skipped and actions[_ACT_HELP] and hints < hint_cap:
        hints += 1
        t += HINT_PAUSE_SECONDS
        actions = emit(RealLifeData(difficulty, hints, wrong_mid, t, False, reward),
                       HINT_PAUSE_SECONDS, False, True)
        if actions[_ACT_SKIP]:
            skipped = True

    if skipped:
        solve_time, wrong, dt = t, wrong_mid, 0.0
    else:
        solve_time, wrong = base_seconds + hints * HINT_PAUSE_SECONDS, wrong_total
        dt = solve_time - t
    final = RealLifeData(difficulty, hints, wrong, solve_time, skipped, reward)
    emit(final, dt, True, False)
    return final


def participant_perform(participant: SyntheticParticipant, difficulty: int,
                        reward: bool) -> RealLifeData:
    """Simulate one full puzzle episode and return its final situation data."""
    def emit(rld, dt, end_of_puzzle, is_hint):
        _, actions = participant.step(rld)
        return actions

    return puzzle_episode(participant, difficulty, reward, emit)


def rule_based_controller(rng: np.random.Generator) -> ControlInput:
    """Uniform draw over the 12 admissible control inputs."""
    return ALL_CONTROL_INPUTS[int(rng.integers(0, len(ALL_CONTROL_INPUTS)))]


class UniformController:
    """Session driver that picks inputs uniformly at random (the baseline)."""

    def __init__(self, seed):
        self.rng = np.random.default_rng(seed)

    def next_input(self) -> ControlInput:
        return rule_based_controller(self.rng)

    def on_event(self, rld: RealLifeData, end_of_puzzle: bool) -> None:
        pass

    def on_measurement(self, answers: np.ndarray) -> None:
        pass


# ---------------------------------------------------------------------------
# session engine
# ---------------------------------------------------------------------------

@dataclass
class SessionConfig:
    """Protocol parameters of one session run."""

    kind: str = "scripted"                # "scripted" | "controlled"
    script: SessionScript | None = None
    driver_seed: int = 0                  # reward schedule stream of scripted sessions
    max_minutes: float = 60.0
    min_minutes: float = 45.0
    min_puzzles: int = 18
    max_puzzles: int = 30
    requestion_seconds: float = 150.0     # controlled sessions: re-ask interval
    requestion_puzzles: int = 3
    session_id: int = 1

    @classmethod
    def scripted(cls, session_id: int) -> "SessionConfig":
        script = SessionScript.standard(session_id)
        return cls(kind="scripted", script=script, session_id=session_id,
                   max_minutes=script.max_minutes, min_minutes=script.min_minutes,
                   min_puzzles=script.min_puzzles, max_puzzles=script.max_puzzles)

    @classmethod
    def controlled(cls, minutes: float = 35.0, session_id: int = 3) -> "SessionConfig":
        return cls(kind="controlled", session_id=session_id,
                   max_minutes=minutes, min_minutes=0.0, min_puzzles=0)


class _Quit(Exception):
    pass


class _DriverFailed(Exception):
    pass


_ACT_QUIT, _ACT_SKIP, _ACT_HELP = 0, 1, 2


class _SessionRunner:
    def __init__(self, participant: SyntheticParticipant, driver, config: SessionConfig):
        self.p = participant
        self.driver = driver
        self.cfg = config
        self.trace = SessionTrace(session_id=config.session_id)
        self.seconds = 0.0
        self.m = 0
        self.reward_rng = np.random.default_rng((config.driver_seed, config.session_id))
        self._block_reward: dict[int, int] = {}
        self.last_q_seconds = -np.inf
        self.last_q_puzzle = -10
        self.questioned_once = False

    # -- scripted reward policy: one random reward per 3-puzzle block ---------

    def _scripted_reward(self, puzzle: int) -> bool:
        per_block = self.cfg.script.puzzles_per_block
        block = (puzzle - 1) // per_block
        if block not in self._block_reward:
            self._block_reward[block] = int(self.reward_rng.integers(0, per_block))
        return (puzzle - 1) % per_block == self._block_reward[block]

    # -- event handling --------------------------------------------------------

    def _questions_due(self, puzzle: int) -> bool:
        if self.cfg.kind == "scripted":
            return True
        if not self.questioned_once:
            return True
        return (self.seconds - self.last_q_seconds > self.cfg.requestion_seconds
                or puzzle - self.last_q_puzzle >= self.cfg.requestion_puzzles)

    def _driver_call(self, fn, *args):
        try:
            return fn(*args)
        except Exception as exc:
            raise _DriverFailed from exc

    def _event(self, rld: RealLifeData, puzzle: int, end_of_puzzle: bool,
               can_question: bool = True) -> np.ndarray:
        answers, actions = self.p.step(rld)
        if self.driver is not None:
            self._driver_call(self.driver.on_event, rld, end_of_puzzle)
        if can_question and self._questions_due(puzzle):
            self.trace.records.append(MeasurementRecord(
                m=self.m, rld=rld, answers=answers, actions=actions.astype(bool),
                seconds=self.seconds, puzzle=puzzle))
            self.m += 1
            self.questioned_once = True
            self.last_q_seconds = self.seconds
            self.last_q_puzzle = puzzle
            if self.driver is not None:
                self._driver_call(self.driver.on_measurement, answers)
        if actions[_ACT_QUIT]:
            raise _Quit
        return actions

    def _play_puzzle(self, puzzle: int, difficulty: int, reward: bool) -> None:
        # controlled sessions pose questions after the first move only;
        # scripted sessions question at every event
        def emit(rld, dt, end_of_puzzle, is_hint):
            self.seconds += dt
            can_q = (self.cfg.kind == "scripted"
                     or (not end_of_puzzle and not is_hint))
            return self._event(rld, puzzle, end_of_puzzle, can_question=can_q)

        puzzle_episode(self.p, difficulty, reward, emit)

    def _should_stop(self, puzzles_done: int) -> bool:
        minutes = self.seconds / 60.0
        if puzzles_done >= self.cfg.max_puzzles or minutes >= self.cfg.max_minutes:
            return True
        if self.cfg.kind == "controlled":
            return False
        # scripted sessions play the minimum puzzle count, then fill the
        # minimum duration, up to the hard caps
        return puzzles_done >= self.cfg.min_puzzles and minutes >= self.cfg.min_minutes

    def run(self) -> SessionTrace:
        puzzle = 0
        try:
            while True:
                puzzle += 1
                if self.cfg.kind == "scripted":
                    difficulty = self.cfg.script.difficulty_for(puzzle)
                    reward = self._scripted_reward(puzzle)
                else:
                    choice = self._driver_call(self.driver.next_input)
                    difficulty, reward = choice.difficulty, choice.reward
                self._play_puzzle(puzzle, difficulty, reward)
                if self._should_stop(puzzle):
                    break
        except _Quit:
            pass
        except _DriverFailed:
            self.trace.incomplete = True
        self.trace.validate()
        return self.trace


def run_session(participant: SyntheticParticipant, driver, config: SessionConfig) -> SessionTrace:
    """Run one full session and return its trace.

    Scripted sessions ignore ``driver`` unless provided for observation;
    controlled sessions query it for every puzzle's input.  A driver
    failure aborts the session, returning the partial trace flagged
    incomplete.
    """
    if config.kind == "scripted" and config.script is None:
        raise DataError("scripted session requires a script")
    if config.kind == "controlled" and driver is None:
        raise DataError("controlled session requires a driver")
    if participant.spec.n_intentions != 5:
        raise DataError("the session protocol expects the five study actions")
    return _SessionRunner(participant, driver, config).run()
