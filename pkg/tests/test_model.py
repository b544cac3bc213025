import numpy as np
import pytest

import mindsim as ms
from mindsim.errors import ChannelOverflowWarning
from mindsim.model import AFFINE, BOOLEAN, CONSTANT, EXPONENTIAL, TWO_PIECE

from conftest import stable_random_params


# ---------------------------------------------------------------------------
# perceptual access
# ---------------------------------------------------------------------------

def test_perceptual_access_all_captured():
    rld = ms.RealLifeData(2, 1, 0, 30.0, False, True)
    prev = np.array([5.0, 5.0, 5.0, 5.0, 1.0, 0.0])
    out = ms.perceptual_access(rld, prev)
    assert np.array_equal(out, [2, 1, 0, 30.0, 0.0, 1.0])


def test_perceptual_access_none_captured_holds_prev():
    rld = ms.RealLifeData(2, 1, 0, 30.0, False, True,
                          captured_mask=(False,) * 6)
    prev = np.array([3.0, 0.0, 2.0, 99.0, 1.0, 1.0])
    assert np.array_equal(ms.perceptual_access(rld, prev), prev)


def test_perceptual_access_default_mask_is_identity():
    # in the study every channel is captured at every step
    rld = ms.RealLifeData(4, 2, 3, 120.5, True, False)
    out = ms.perceptual_access(rld, np.zeros(6))
    assert np.array_equal(out, rld.channels())


def test_perceptual_access_channel_mismatch():
    rld = ms.RealLifeData(1, 0, 0, 5.0, False, False)
    with pytest.raises(ms.StructuralError):
        ms.perceptual_access(rld, np.zeros(5))


def test_hold_filter_idempotent():
    f = ms.PerceptionFilter(np.array([1.0, 2.0, 3.0, 4.0, 0.0, 1.0]))
    rld = ms.RealLifeData(5, 9, 9, 500.0, True, True, captured_mask=(False,) * 6)
    start = f.prev.copy()
    for _ in range(5):
        out = f.apply(rld)
    assert np.array_equal(out, start)
    assert f.k_p == 5


# ---------------------------------------------------------------------------
# channel functions
# ---------------------------------------------------------------------------

def test_affine_identity():
    assert ms.eval_channel(AFFINE, 1.0, 0.0, 0.5) == 0.5


def test_exponential_neutral_when_theta1_zero():
    rng = np.random.default_rng(0)
    for _ in range(200):
        t0 = rng.uniform(-3, 3)
        x = rng.uniform(0, 1)
        assert ms.eval_channel(EXPONENTIAL, t0, 0.0, x) == 1.0


def test_boolean_second_branch():
    assert ms.eval_channel(BOOLEAN, 0.2, -0.7, 1.0) == -0.7
    assert ms.eval_channel(BOOLEAN, 0.2, -0.7, 0.0) == 0.2


def test_unknown_family_rejected():
    with pytest.raises(ms.StructuralError):
        ms.eval_channel("sigmoid", 0.0, 0.0, 0.5)


def test_exponential_overflow_saturates_and_flags():
    with pytest.warns(ChannelOverflowWarning):
        out = ms.eval_channel(EXPONENTIAL, 30.0, 2.0, 1.0)
    assert out == 50.0


# ---------------------------------------------------------------------------
# rational reasoning
# ---------------------------------------------------------------------------

def _affine_only_spec():
    return ms.ModelSpec(
        belief_vars=("b1",), goal_vars=(), emotion_vars=(), bias_vars=(),
        pk_vars=("pk1",),
        perception_channels=tuple(ms.PerceptionChannel(i, 0, AFFINE) for i in range(6)),
        cognition_linkages=(ms.Linkage("pk1", "b1", TWO_PIECE),),
        pk_sources={"pk1": 0},
    )


def test_reasoning_all_zero_affine():
    spec = _affine_only_spec()
    params = ms.ParameterSet.defaults(spec)
    out = ms.rational_reasoning(np.full(6, 0.3), params, spec)
    assert np.array_equal(out, [0.0])


def test_reasoning_single_affine_channel():
    spec = ms.ModelSpec(
        belief_vars=("b1",), goal_vars=(), emotion_vars=(), bias_vars=(),
        pk_vars=("pk1",),
        perception_channels=(ms.PerceptionChannel(0, 0, AFFINE),),
        cognition_linkages=(ms.Linkage("pk1", "b1", TWO_PIECE),),
        pk_sources={"pk1": 0},
    )
    params = ms.ParameterSet.defaults(spec)
    params.perception[0] = (2.0, -1.0)
    pd = np.zeros(6)
    pd[0] = 0.75
    out = ms.rational_reasoning(pd, params, spec)
    assert out[0] == pytest.approx(0.5)


def test_reasoning_exponential_cancellation(spec):
    # theta1 = -1 makes each exponential channel contribute -exp(0) + 1 = 0
    params = ms.ParameterSet.defaults(spec)
    params.perception[2] = (1.7, -1.0)
    params.perception[3] = (-0.3, -1.0)
    out = ms.rational_reasoning(np.zeros(6), params, spec)
    assert np.array_equal(out, [0.0, 0.0])
    params.perception[2, 1] = 0.0
    params.perception[3, 1] = 0.0
    out = ms.rational_reasoning(np.zeros(6), params, spec)
    assert out[0] == pytest.approx(2.0)  # the two neutral exponentials contribute 1 each


# ---------------------------------------------------------------------------
# cognition
# ---------------------------------------------------------------------------

def test_goal_self_decay(spec):
    params = ms.ParameterSet.defaults(spec)  # all linkage weights zero, w_ii 0.9
    state = ms.MentalState.zeros(spec)
    state.goals[0] = 0.5
    nxt = ms.cognition_step(state, np.zeros(2), params, spec)
    assert nxt.goals[0] == pytest.approx(0.45)
    assert nxt.step == 1


def test_beliefs_memoryless(spec):
    params = ms.ParameterSet.defaults(spec)
    a = ms.MentalState.zeros(spec)
    b = ms.MentalState.zeros(spec)
    a.beliefs[:] = (0.9, -0.9)
    b.beliefs[:] = (-0.3, 0.4)
    y = np.array([0.2, -0.1])
    na = ms.cognition_step(a, y, params, spec)
    nb = ms.cognition_step(b, y, params, spec)
    assert np.array_equal(na.beliefs, nb.beliefs)
    assert np.array_equal(na.beliefs, [0.0, 0.0])  # zero pk weights


def test_emotion_to_goal_clipped(spec):
    params = ms.ParameterSet.defaults(spec)
    quit_idx = spec.index("quit_session")
    params.self_weights[quit_idx] = 0.0
    l_idx = spec.cognition_linkages.index(ms.Linkage("frustration", "quit_session", TWO_PIECE))
    params.linkage_weights[l_idx] = (0.0, 2.0)
    state = ms.MentalState.zeros(spec)
    state.emotions[1] = 0.8  # frustration
    nxt = ms.cognition_step(state, np.zeros(2), params, spec)
    assert nxt.goals[0] == 1.0  # raw 1.6 clipped


def test_unstable_parameters_rejected(spec):
    params = ms.ParameterSet.defaults(spec)
    params.self_weights[spec.index("quit_session")] = 1.01
    state = ms.MentalState.zeros(spec)
    with pytest.raises(ms.StabilityError):
        ms.cognition_step(state, np.zeros(2), params, spec)


def test_clipping_invariant_random(spec):
    rng = np.random.default_rng(7)
    for _ in range(200):
        params = stable_random_params(spec, rng)
        state = ms.MentalState.zeros(spec)
        state.beliefs = rng.uniform(-1, 1, 2)
        state.goals = rng.uniform(-1, 1, 4)
        state.emotions = rng.uniform(-1, 1, 2)
        y = rng.uniform(-3, 3, 2)
        for _ in range(3):
            state = ms.cognition_step(state, y, params, spec)
            assert np.all(np.abs(state.as_vector()) <= 1.0)


def test_no_input_decay(spec):
    # with zero perception output, goals and emotions contract toward zero
    rng = np.random.default_rng(3)
    for _ in range(20):
        params = stable_random_params(spec, rng, scale=0.3)
        state = ms.MentalState.zeros(spec)
        state.goals = rng.uniform(-1, 1, 4)
        state.emotions = rng.uniform(-1, 1, 2)
        y = np.zeros(2)
        mags = []
        for k in range(60):
            state = ms.cognition_step(state, y, params, spec)
            mags.append(max(np.max(np.abs(state.goals)), np.max(np.abs(state.emotions))))
        for a, b in zip(mags[20:], mags[21:]):
            assert b <= a + 1e-9
        assert mags[-1] < 0.2


# ---------------------------------------------------------------------------
# weight lookup
# ---------------------------------------------------------------------------

def test_weight_lookup_boundary_and_branches():
    assert ms.weight_lookup(TWO_PIECE, 0.3, 0.7, 0.0) == 0.3
    assert ms.weight_lookup(TWO_PIECE, 0.3, 0.7, 0.01) == 0.7
    assert ms.weight_lookup(TWO_PIECE, 0.3, 0.7, -5.0) == 0.3
    assert ms.weight_lookup(CONSTANT, -0.4, -0.4, 123.0) == -0.4


def test_weight_lookup_total():
    rng = np.random.default_rng(1)
    for x in rng.uniform(-2, 2, 500):
        w = ms.weight_lookup(TWO_PIECE, -1.0, 1.0, float(x))
        assert w == (-1.0 if x <= 0 else 1.0)


# ---------------------------------------------------------------------------
# decision-making
# ---------------------------------------------------------------------------

def test_intentions_all_zero(spec):
    params = ms.ParameterSet.defaults(spec)
    state = ms.MentalState.zeros(spec)
    state.goals[:] = (0.5, -0.5, 0.2, 0.9)
    assert np.array_equal(ms.intention_strengths(state, params, spec), np.zeros(5))


def test_intention_weighted_goal(spec):
    params = ms.ParameterSet.defaults(spec)
    params.decision[0] = (1.0, -0.2)
    state = ms.MentalState.zeros(spec)
    state.goals[0] = 0.5
    out = ms.intention_strengths(state, params, spec)
    assert out[0] == pytest.approx(0.3)


def test_shared_goal_opposite_signs(spec):
    # ask-easier and ask-harder share the change-difficulty goal
    params = ms.ParameterSet.defaults(spec)
    params.decision[3] = (1.0, 0.0)
    params.decision[4] = (-1.0, 0.0)
    state = ms.MentalState.zeros(spec)
    state.goals[3] = 0.6
    out = ms.intention_strengths(state, params, spec)
    assert out[3] == pytest.approx(0.6)
    assert out[4] == pytest.approx(-0.6)


def test_select_actions_boundary():
    assert np.array_equal(ms.select_actions(np.zeros(5)), np.zeros(5, dtype=bool))
    out = ms.select_actions(np.array([0.1, -0.1, 0.0001, -5.0, 2.0]))
    assert np.array_equal(out, [True, False, True, False, True])


def test_goal_shift_invariance_only_with_zero_weights(spec):
    params = ms.ParameterSet.defaults(spec)  # zero decision weights
    params.decision[:, 1] = (-0.2, 0.3, -0.1, 0.4, -0.4)
    state = ms.MentalState.zeros(spec)
    state.goals[:] = (0.1, -0.2, 0.3, -0.4)
    base = ms.select_actions(ms.intention_strengths(state, params, spec))
    rng = np.random.default_rng(5)
    for _ in range(50):
        shifted = state.copy()
        shifted.goals = np.clip(state.goals + rng.uniform(0, 0.5), -1, 1)
        out = ms.select_actions(ms.intention_strengths(shifted, params, spec))
        assert np.array_equal(out, base)
    # with a nonzero goal weight a shift can change the selected actions
    params.decision[0] = (1.0, -0.5)
    state.goals[0] = 0.4
    before = ms.select_actions(ms.intention_strengths(state, params, spec))
    shifted = state.copy()
    shifted.goals = state.goals + 0.2
    after = ms.select_actions(ms.intention_strengths(shifted, params, spec))
    assert before[0] != after[0]


# ---------------------------------------------------------------------------
# spec and state structure
# ---------------------------------------------------------------------------

def test_builtin_spec_shape(spec):
    assert len(spec.belief_vars) == 2
    assert len(spec.goal_vars) == 4
    assert len(spec.emotion_vars) == 2
    assert len(spec.bias_vars) == 1
    assert len(spec.pk_vars) == 2
    assert spec.n_intentions == 5
    assert len(spec.perception_channels) == 6
    # influencer wiring of the cognition network
    influencers = {v: {l.src for l in spec.influencers_of(v)} for v in spec.all_vars}
    assert influencers["quit_session"] == {"puzzle_difficult", "boredom", "frustration"}
    assert influencers["skip_puzzle"] == {"puzzle_difficult", "frustration"}
    assert influencers["get_help"] == {"puzzle_difficult", "boredom", "frustration"}
    assert influencers["change_difficulty"] == {"puzzle_difficult", "frustration"}
    assert influencers["boredom"] == {"puzzle_difficult", "reward_offered"}
    assert influencers["frustration"] == {"puzzle_difficult", "reward_offered"}
    assert influencers["difficulty_bias"] == {"boredom", "frustration"}
    assert influencers["pk_puzzle_difficult"] == {"difficulty_bias"}
    assert influencers["pk_reward_offered"] == set()


def test_simplified_spec_drops_sink_goals():
    simple = ms.chess_session_spec(simplified=True)
    assert simple.goal_vars == ("quit_session", "skip_puzzle")
    assert simple.n_intentions == 2


def test_belief_self_weight_enforced(spec):
    params = ms.ParameterSet.defaults(spec)
    params.self_weights[0] = 0.5
    with pytest.raises(ms.StructuralError):
        params.validate(spec)


def test_control_input_domain():
    assert len(ms.ALL_CONTROL_INPUTS) == 12
    assert len(set(ms.ALL_CONTROL_INPUTS)) == 12
    with pytest.raises(ms.StructuralError):
        ms.ControlInput(6, False)


def test_state_validation(spec):
    state = ms.MentalState.zeros(spec)
    state.validate(spec)
    state.goals[0] = 1.5
    with pytest.raises(ms.StructuralError):
        state.validate(spec)


def test_hints_bound_rejected():
    with pytest.raises(ms.StructuralError):
        ms.RealLifeData(0, 14, 0, 1.0, False, False)
