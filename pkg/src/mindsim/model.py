"""Core dynamic model of mental states.

The model chains three stages.  A perception stage turns observed
situation data into "rationally perceived knowledge" through a bank of
parameterized channel functions.  A cognition stage propagates that
knowledge through a weighted network of beliefs, goals, emotions and
auxiliary variables (a bias and the perceived knowledge itself), with
switched weights that depend on the sign of the influencing variable.
A decision stage converts goals into intention strengths and thresholds
them into boolean actions.

All state components live in [-1, 1]; every cognition update ends with a
hard clip onto that box.  Goals and emotions carry a self-weight (their
update speed); beliefs are memoryless and follow the perceived knowledge.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ChannelOverflowWarning, StabilityError, StructuralError

AFFINE = "affine"
EXPONENTIAL = "exponential"
BOOLEAN = "boolean"
FAMILIES = (AFFINE, EXPONENTIAL, BOOLEAN)

CONSTANT = "constant"
TWO_PIECE = "two-piece"
WEIGHT_KINDS = (CONSTANT, TWO_PIECE)

N_CHANNELS = 6  # situation-data channels: difficulty, hints, wrong attempts, solve time, skipped, reward

#: Saturation bound for a single reasoning channel output.
CHANNEL_OUTPUT_BOUND = 50.0

#: Maximum hints a single puzzle can accommodate (1 + 2 * max moves, moves <= 6).
MAX_HINTS_PER_PUZZLE = 13


# ---------------------------------------------------------------------------
# declarative structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerceptionChannel:
    """One parameterized input->output mapping of the reasoning stage."""

    input: int          # situation-data channel index (0-based)
    output: int         # rationally-perceived-knowledge index (0-based)
    family: str         # one of FAMILIES


@dataclass(frozen=True)
class Linkage:
    """A directed weighted influence between two cognition variables."""

    src: str
    dst: str
    kind: str           # one of WEIGHT_KINDS


@dataclass(frozen=True)
class ModelSpec:
    """Declarative structure of one model instance.

    Variable names are opaque identifiers; their order fixes indices.
    ``pk_sources`` maps each perceived-knowledge variable to the index of
    the rationally-perceived-knowledge output it receives (unit gain).
    """

    belief_vars: tuple[str, ...]
    goal_vars: tuple[str, ...]
    emotion_vars: tuple[str, ...]
    bias_vars: tuple[str, ...]
    pk_vars: tuple[str, ...]
    perception_channels: tuple[PerceptionChannel, ...]
    cognition_linkages: tuple[Linkage, ...]
    self_weights: dict[str, float] = field(default_factory=dict)
    intention_wiring: tuple[tuple[str, str], ...] = ()   # (intention name, goal name)
    pk_sources: dict[str, int] = field(default_factory=dict)

    # -- derived views -----------------------------------------------------

    @property
    def all_vars(self) -> tuple[str, ...]:
        return (self.belief_vars + self.goal_vars + self.emotion_vars
                + self.bias_vars + self.pk_vars)

    @property
    def n_vars(self) -> int:
        return len(self.all_vars)

    @property
    def n_outputs(self) -> int:
        """Number of rationally-perceived-knowledge outputs."""
        return 1 + max(ch.output for ch in self.perception_channels)

    @property
    def n_intentions(self) -> int:
        return len(self.intention_wiring)

    def index(self, name: str) -> int:
        return self.all_vars.index(name)

    def kind_of(self, name: str) -> str:
        if name in self.belief_vars:
            return "belief"
        if name in self.goal_vars:
            return "goal"
        if name in self.emotion_vars:
            return "emotion"
        if name in self.bias_vars:
            return "bias"
        if name in self.pk_vars:
            return "pk"
        raise StructuralError(f"unknown variable {name!r}")

    def boolean_inputs(self) -> tuple[int, ...]:
        """Input channels whose every wiring uses the boolean family."""
        fams: dict[int, set[str]] = {}
        for ch in self.perception_channels:
            fams.setdefault(ch.input, set()).add(ch.family)
        return tuple(sorted(i for i, f in fams.items() if f == {BOOLEAN}))

    def influencers_of(self, name: str) -> tuple[Linkage, ...]:
        return tuple(l for l in self.cognition_linkages if l.dst == name)

    def influences_anything(self, name: str) -> bool:
        return any(l.src == name for l in self.cognition_linkages)

    def default_self_weight(self, name: str) -> float:
        if name in self.self_weights:
            return float(self.self_weights[name])
        return 0.9 if self.kind_of(name) in ("goal", "emotion") else 0.0

    def validate(self) -> None:
        names = self.all_vars
        if len(set(names)) != len(names):
            raise StructuralError("variable names must be unique within a spec")
        for l in self.cognition_linkages:
            if l.src not in names or l.dst not in names:
                raise StructuralError(f"linkage {l.src}->{l.dst} names unknown variables")
            if l.kind not in WEIGHT_KINDS:
                raise StructuralError(f"unknown weight kind {l.kind!r}")
        for ch in self.perception_channels:
            if ch.family not in FAMILIES:
                raise StructuralError(f"unknown channel family {ch.family!r}")
            if not 0 <= ch.input < N_CHANNELS:
                raise StructuralError(f"channel input {ch.input} out of range")
        for pk, out in self.pk_sources.items():
            if pk not in self.pk_vars:
                raise StructuralError(f"pk source for non-pk variable {pk!r}")
            if not 0 <= out < self.n_outputs:
                raise StructuralError(f"pk source output {out} out of range")
        for b in self.belief_vars:
            if self.default_self_weight(b) != 0.0:
                raise StructuralError(f"belief {b!r} must have zero self-weight")
        for intention, goal in self.intention_wiring:
            if goal not in self.goal_vars:
                raise StructuralError(f"intention {intention!r} wired to unknown goal {goal!r}")


def chess_session_spec(simplified: bool = False) -> ModelSpec:
    """Built-in model structure for the chess-puzzle interaction study.

    Two beliefs, four goals, two emotions, one bias, two perceived-knowledge
    variables.  The simplified variant removes the two goals that influence
    no other state ("get help" and "change difficulty") together with their
    linkages and intentions.
    """
    goals = ("quit_session", "skip_puzzle", "get_help", "change_difficulty")
    intents = (
        ("quit", "quit_session"),
        ("skip", "skip_puzzle"),
        ("ask_help", "get_help"),
        ("ask_easier", "change_difficulty"),
        ("ask_harder", "change_difficulty"),
    )
    linkages = [
        Linkage("pk_puzzle_difficult", "puzzle_difficult", TWO_PIECE),
        Linkage("pk_reward_offered", "reward_offered", TWO_PIECE),
        Linkage("puzzle_difficult", "quit_session", TWO_PIECE),
        Linkage("boredom", "quit_session", TWO_PIECE),
        Linkage("frustration", "quit_session", TWO_PIECE),
        Linkage("puzzle_difficult", "skip_puzzle", TWO_PIECE),
        Linkage("frustration", "skip_puzzle", TWO_PIECE),
        Linkage("puzzle_difficult", "get_help", TWO_PIECE),
        Linkage("boredom", "get_help", TWO_PIECE),
        Linkage("frustration", "get_help", TWO_PIECE),
        Linkage("puzzle_difficult", "change_difficulty", TWO_PIECE),
        Linkage("frustration", "change_difficulty", TWO_PIECE),
        Linkage("puzzle_difficult", "boredom", TWO_PIECE),
        Linkage("reward_offered", "boredom", TWO_PIECE),
        Linkage("puzzle_difficult", "frustration", TWO_PIECE),
        Linkage("reward_offered", "frustration", TWO_PIECE),
        Linkage("boredom", "difficulty_bias", CONSTANT),
        Linkage("frustration", "difficulty_bias", CONSTANT),
        Linkage("difficulty_bias", "pk_puzzle_difficult", CONSTANT),
    ]
    if simplified:
        dropped = {"get_help", "change_difficulty"}
        goals = tuple(g for g in goals if g not in dropped)
        intents = tuple((i, g) for i, g in intents if g not in dropped)
        linkages = [l for l in linkages if l.dst not in dropped and l.src not in dropped]
    spec = ModelSpec(
        belief_vars=("puzzle_difficult", "reward_offered"),
        goal_vars=goals,
        emotion_vars=("boredom", "frustration"),
        bias_vars=("difficulty_bias",),
        pk_vars=("pk_puzzle_difficult", "pk_reward_offered"),
        perception_channels=(
            PerceptionChannel(0, 0, AFFINE),        # difficulty level
            PerceptionChannel(1, 0, AFFINE),        # hints
            PerceptionChannel(2, 0, EXPONENTIAL),   # wrong attempts
            PerceptionChannel(3, 0, EXPONENTIAL),   # solve time
            PerceptionChannel(4, 0, BOOLEAN),       # skipped
            PerceptionChannel(5, 1, BOOLEAN),       # reward
        ),
        cognition_linkages=tuple(linkages),
        self_weights={},
        intention_wiring=intents,
        pk_sources={"pk_puzzle_difficult": 0, "pk_reward_offered": 1},
    )
    spec.validate()
    return spec


# ---------------------------------------------------------------------------
# state and observed data
# ---------------------------------------------------------------------------

@dataclass
class MentalState:
    """State vector at one cognition step; every component in [-1, 1]."""

    beliefs: np.ndarray
    goals: np.ndarray
    emotions: np.ndarray
    bias: np.ndarray
    pk: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, spec: ModelSpec) -> "MentalState":
        return cls(
            beliefs=np.zeros(len(spec.belief_vars)),
            goals=np.zeros(len(spec.goal_vars)),
            emotions=np.zeros(len(spec.emotion_vars)),
            bias=np.zeros(len(spec.bias_vars)),
            pk=np.zeros(len(spec.pk_vars)),
        )

    def copy(self) -> "MentalState":
        return MentalState(self.beliefs.copy(), self.goals.copy(), self.emotions.copy(),
                           self.bias.copy(), self.pk.copy(), self.step)

    def as_vector(self) -> np.ndarray:
        """Full variable vector in spec order (beliefs, goals, emotions, bias, pk)."""
        return np.concatenate([self.beliefs, self.goals, self.emotions, self.bias, self.pk])

    def measured(self) -> np.ndarray:
        """The externally observable components: beliefs, goals, emotions."""
        return np.concatenate([self.beliefs, self.goals, self.emotions])

    def validate(self, spec: ModelSpec) -> None:
        lens = (len(self.beliefs), len(self.goals), len(self.emotions),
                len(self.bias), len(self.pk))
        want = (len(spec.belief_vars), len(spec.goal_vars), len(spec.emotion_vars),
                len(spec.bias_vars), len(spec.pk_vars))
        if lens != want:
            raise StructuralError(f"state lengths {lens} do not match spec {want}")
        if np.any(np.abs(self.as_vector()) > 1.0 + 1e-12):
            raise StructuralError("state component outside [-1, 1]")
        if self.step < 0:
            raise StructuralError("negative step index")


def state_from_measured(spec: ModelSpec, measured: np.ndarray, step: int = 0) -> MentalState:
    """Build a state from an 8-component measurement; auxiliaries start at zero."""
    nb, ng, ne = len(spec.belief_vars), len(spec.goal_vars), len(spec.emotion_vars)
    measured = np.asarray(measured, dtype=float)
    if measured.shape != (nb + ng + ne,):
        raise StructuralError(f"expected {nb + ng + ne} measured components")
    return MentalState(
        beliefs=measured[:nb].copy(),
        goals=measured[nb:nb + ng].copy(),
        emotions=measured[nb + ng:].copy(),
        bias=np.zeros(len(spec.bias_vars)),
        pk=np.zeros(len(spec.pk_vars)),
        step=step,
    )


@dataclass
class RealLifeData:
    """Observed situation data for one perception step (one puzzle event)."""

    difficulty: int
    hints: int
    wrong_attempts: int
    solve_time: float
    skipped: bool
    reward_given: bool
    captured_mask: tuple[bool, ...] = (True,) * N_CHANNELS

    def __post_init__(self):
        if not 0 <= int(self.difficulty) <= 5:
            raise StructuralError(f"difficulty {self.difficulty} outside 0..5")
        if self.hints < 0 or self.hints > MAX_HINTS_PER_PUZZLE:
            raise StructuralError(f"hints {self.hints} outside 0..{MAX_HINTS_PER_PUZZLE}")
        if self.wrong_attempts < 0:
            raise StructuralError("negative wrong_attempts")
        if self.solve_time < 0:
            raise StructuralError("negative solve_time")
        if len(self.captured_mask) != N_CHANNELS:
            raise StructuralError(f"captured_mask must have {N_CHANNELS} entries")

    def channels(self) -> np.ndarray:
        """The six value channels in fixed order."""
        return np.array([
            float(self.difficulty),
            float(self.hints),
            float(self.wrong_attempts),
            float(self.solve_time),
            1.0 if self.skipped else 0.0,
            1.0 if self.reward_given else 0.0,
        ])


@dataclass(frozen=True)
class ControlInput:
    """One of the 12 admissible (difficulty, reward) decisions."""

    difficulty: int
    reward: bool

    def __post_init__(self):
        if not 0 <= self.difficulty <= 5:
            raise StructuralError(f"difficulty {self.difficulty} outside 0..5")


ALL_CONTROL_INPUTS: tuple[ControlInput, ...] = tuple(
    ControlInput(d, r) for d in range(6) for r in (False, True)
)


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass
class ParameterSet:
    """All identifiable scalars of one model instance.

    ``perception`` holds (theta0, theta1) per perception channel entry.
    ``linkage_weights`` holds (w_minus, w_plus) per cognition linkage; for
    constant-kind linkages both columns carry the same value.
    ``self_weights`` is aligned with ``spec.all_vars``.  ``trait_gains``
    scales the summed linkage contribution of each emotion update.
    ``decision`` holds (goal weight, neutral offset) per intention.
    """

    perception: np.ndarray
    linkage_weights: np.ndarray
    self_weights: np.ndarray
    trait_gains: np.ndarray
    decision: np.ndarray

    @classmethod
    def defaults(cls, spec: ModelSpec, wii_goal_emotion: float = 0.9) -> "ParameterSet":
        sw = np.zeros(spec.n_vars)
        for i, name in enumerate(spec.all_vars):
            if spec.kind_of(name) in ("goal", "emotion"):
                sw[i] = spec.self_weights.get(name, wii_goal_emotion)
            else:
                sw[i] = spec.self_weights.get(name, 0.0)
        return cls(
            perception=np.zeros((len(spec.perception_channels), 2)),
            linkage_weights=np.zeros((len(spec.cognition_linkages), 2)),
            self_weights=sw,
            trait_gains=np.ones(len(spec.emotion_vars)),
            decision=np.zeros((spec.n_intentions, 2)),
        )

    def copy(self) -> "ParameterSet":
        return ParameterSet(self.perception.copy(), self.linkage_weights.copy(),
                            self.self_weights.copy(), self.trait_gains.copy(),
                            self.decision.copy())

    def validate(self, spec: ModelSpec) -> None:
        if self.perception.shape != (len(spec.perception_channels), 2):
            raise StructuralError("perception parameter shape mismatch")
        if self.linkage_weights.shape != (len(spec.cognition_linkages), 2):
            raise StructuralError("linkage weight shape mismatch")
        if self.self_weights.shape != (spec.n_vars,):
            raise StructuralError("self-weight shape mismatch")
        if self.trait_gains.shape != (len(spec.emotion_vars),):
            raise StructuralError("trait gain shape mismatch")
        if self.decision.shape != (spec.n_intentions, 2):
            raise StructuralError("decision parameter shape mismatch")
        for arr in (self.perception, self.linkage_weights, self.self_weights,
                    self.trait_gains, self.decision):
            if not np.all(np.isfinite(arr)):
                raise StructuralError("non-finite parameter")
        for l_idx, link in enumerate(spec.cognition_linkages):
            if link.kind == CONSTANT and \
                    self.linkage_weights[l_idx, 0] != self.linkage_weights[l_idx, 1]:
                raise StructuralError(
                    f"constant linkage {link.src}->{link.dst} must carry one value")
        for i, name in enumerate(spec.all_vars):
            if spec.kind_of(name) == "belief" and self.self_weights[i] != 0.0:
                raise StructuralError(f"belief {name!r} self-weight must be 0")


def max_weight_matrix(params: ParameterSet, spec: ModelSpec) -> np.ndarray:
    """Entrywise max-magnitude weight matrix; entry (j, i) carries src j -> dst i.

    Trait gains scale emotion-update contributions, so they enter the
    effective magnitude of linkages into emotions.
    """
    n = spec.n_vars
    w = np.zeros((n, n))
    names = spec.all_vars
    for i, name in enumerate(names):
        w[i, i] = abs(params.self_weights[i])
    emo_index = {name: k for k, name in enumerate(spec.emotion_vars)}
    for l_idx, link in enumerate(spec.cognition_linkages):
        j, i = spec.index(link.src), spec.index(link.dst)
        mag = float(np.max(np.abs(params.linkage_weights[l_idx])))
        if link.dst in emo_index:
            mag *= abs(params.trait_gains[emo_index[link.dst]])
        w[j, i] = max(w[j, i], mag)
    return w


def spectral_radius(params: ParameterSet, spec: ModelSpec) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(max_weight_matrix(params, spec)))))


def check_stability(params: ParameterSet, spec: ModelSpec) -> None:
    """Sufficient stability condition: spectral radius of the max-magnitude matrix < 1."""
    rho = spectral_radius(params, spec)
    if rho >= 1.0:
        raise StabilityError(f"spectral radius {rho:.6f} >= 1")


# ---------------------------------------------------------------------------
# perception
# ---------------------------------------------------------------------------

def perceptual_access(rld: RealLifeData, prev: np.ndarray) -> np.ndarray:
    """Hold-last-value filter: captured channels take the new value, others keep prev."""
    prev = np.asarray(prev, dtype=float)
    if prev.shape != (N_CHANNELS,):
        raise StructuralError(f"previous perceived data must have {N_CHANNELS} channels")
    new = rld.channels()
    mask = np.asarray(rld.captured_mask, dtype=bool)
    return np.where(mask, new, prev)


class PerceptionFilter:
    """Stateful wrapper around :func:`perceptual_access` tracking the perception index."""

    def __init__(self, prev: np.ndarray | None = None):
        self.prev = np.zeros(N_CHANNELS) if prev is None else np.asarray(prev, dtype=float)
        self.k_p = 0

    def apply(self, rld: RealLifeData) -> np.ndarray:
        self.prev = perceptual_access(rld, self.prev)
        self.k_p += 1
        return self.prev.copy()

    def copy(self) -> "PerceptionFilter":
        f = PerceptionFilter(self.prev.copy())
        f.k_p = self.k_p
        return f


def eval_channel(family: str, theta0: float, theta1: float, x):
    """Evaluate one channel function; accepts scalars or arrays.

    affine:       theta0 * x + theta1
    exponential:  theta1 * exp(theta0 * x) + 1
    boolean:      theta0 where x == 0, theta1 where x == 1
    """
    x = np.asarray(x, dtype=float)
    if family == AFFINE:
        out = theta0 * x + theta1
    elif family == EXPONENTIAL:
        with np.errstate(over="ignore"):
            out = theta1 * np.exp(theta0 * x) + 1.0
    elif family == BOOLEAN:
        out = np.where(x == 0.0, theta0, theta1)
    else:
        raise StructuralError(f"unknown channel family {family!r}")
    out = np.asarray(out, dtype=float)
    bad = ~np.isfinite(out) | (np.abs(out) > CHANNEL_OUTPUT_BOUND)
    if np.any(bad):
        warnings.warn("channel output saturated at declared bound", ChannelOverflowWarning)
        out = np.clip(np.nan_to_num(out, nan=CHANNEL_OUTPUT_BOUND,
                                    posinf=CHANNEL_OUTPUT_BOUND, neginf=-CHANNEL_OUTPUT_BOUND),
                      -CHANNEL_OUTPUT_BOUND, CHANNEL_OUTPUT_BOUND)
    if out.ndim == 0:
        return float(out)
    return out


def rational_reasoning(pd_norm: np.ndarray, params: ParameterSet, spec: ModelSpec) -> np.ndarray:
    """Sum of channel contributions per rationally-perceived-knowledge output."""
    pd_norm = np.asarray(pd_norm, dtype=float)
    if pd_norm.shape != (N_CHANNELS,):
        raise StructuralError(f"perceived data must have {N_CHANNELS} channels")
    out = np.zeros(spec.n_outputs)
    for k, ch in enumerate(spec.perception_channels):
        t0, t1 = params.perception[k]
        out[ch.output] += eval_channel(ch.family, t0, t1, pd_norm[ch.input])
    return out


# ---------------------------------------------------------------------------
# cognition
# ---------------------------------------------------------------------------

def weight_lookup(kind: str, w_minus: float, w_plus: float, x_j: float) -> float:
    """Switched weight: the non-positive branch takes w_minus, else w_plus."""
    if kind == CONSTANT:
        return w_minus
    if kind == TWO_PIECE:
        return w_minus if x_j <= 0.0 else w_plus
    raise StructuralError(f"unknown weight kind {kind!r}")


#: Update order of each variable kind within one cognition step.  A source is
#: read at its fresh value when its stage precedes the target's stage, and at
#: its previous value otherwise (goals and emotions update simultaneously).
_STAGE = {"bias": 0, "pk": 1, "belief": 2, "goal": 3, "emotion": 3}


def cognition_step(state: MentalState, y_rr: np.ndarray, params: ParameterSet,
                   spec: ModelSpec) -> MentalState:
    """One cognition update driven by the most recent perception output.

    In order: biases recomputed memorylessly from their influencing
    emotions, perceived knowledge from the perception output plus the bias
    contribution, beliefs from perceived knowledge, then goals and emotions
    from their own decayed value plus switched-weight contributions (the
    emotion sums scaled by trait gains).  Everything is clipped to [-1, 1].
    """
    check_stability(params, spec)
    y_rr = np.asarray(y_rr, dtype=float)
    if y_rr.shape != (spec.n_outputs,):
        raise StructuralError("perception output length mismatch")

    old = state.as_vector()
    new = old.copy()
    names = spec.all_vars
    idx = {n: i for i, n in enumerate(names)}
    emo_pos = {n: k for k, n in enumerate(spec.emotion_vars)}

    def source_value(src: str, dst_stage: int) -> float:
        s_stage = _STAGE[spec.kind_of(src)]
        return new[idx[src]] if s_stage < dst_stage else old[idx[src]]

    def linkage_sum(dst: str, dst_stage: int) -> float:
        total = 0.0
        for l_idx, link in enumerate(spec.cognition_linkages):
            if link.dst != dst:
                continue
            xj = source_value(link.src, dst_stage)
            wm, wp = params.linkage_weights[l_idx]
            total += weight_lookup(link.kind, wm, wp, xj) * xj
        return total

    for stage in (0, 1, 2, 3):
        updates = {}
        for name in names:
            kind = spec.kind_of(name)
            if _STAGE[kind] != stage:
                continue
            if kind == "bias":
                val = linkage_sum(name, stage)
            elif kind == "pk":
                val = float(y_rr[spec.pk_sources[name]]) + linkage_sum(name, stage)
            elif kind == "belief":
                val = linkage_sum(name, stage)
            elif kind == "goal":
                val = params.self_weights[idx[name]] * old[idx[name]] + linkage_sum(name, stage)
            else:  # emotion
                val = (params.self_weights[idx[name]] * old[idx[name]]
                       + params.trait_gains[emo_pos[name]] * linkage_sum(name, stage))
            updates[name] = min(1.0, max(-1.0, val))
        for name, val in updates.items():
            new[idx[name]] = val

    nb, ng, ne = len(spec.belief_vars), len(spec.goal_vars), len(spec.emotion_vars)
    nbias = len(spec.bias_vars)
    return MentalState(
        beliefs=new[:nb],
        goals=new[nb:nb + ng],
        emotions=new[nb + ng:nb + ng + ne],
        bias=new[nb + ng + ne:nb + ng + ne + nbias],
        pk=new[nb + ng + ne + nbias:],
        step=state.step + 1,
    )


def advance(state: MentalState, rld_norm: np.ndarray, params: ParameterSet,
            spec: ModelSpec, substeps: int = 2) -> MentalState:
    """Perception followed by ``substeps`` cognition updates with held output."""
    y_rr = rational_reasoning(rld_norm, params, spec)
    for _ in range(substeps):
        state = cognition_step(state, y_rr, params, spec)
    return state


# ---------------------------------------------------------------------------
# decision-making
# ---------------------------------------------------------------------------

def intention_strengths(state: MentalState, params: ParameterSet, spec: ModelSpec) -> np.ndarray:
    """Per intention: goal weight times its wired goal plus the neutral offset."""
    goal_idx = {g: i for i, g in enumerate(spec.goal_vars)}
    out = np.zeros(spec.n_intentions)
    for k, (_, goal) in enumerate(spec.intention_wiring):
        weight, offset = params.decision[k]
        out[k] = weight * state.goals[goal_idx[goal]] + offset
    return out


def select_actions(intentions: np.ndarray) -> np.ndarray:
    """An action fires iff its intention strength is strictly positive."""
    return np.asarray(intentions, dtype=float) > 0.0
