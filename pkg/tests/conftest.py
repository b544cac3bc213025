import numpy as np
import pytest

import mindsim as ms


@pytest.fixture(scope="session")
def spec():
    return ms.chess_session_spec()


@pytest.fixture(scope="session")
def template(spec):
    return ms.demo_parameter_set(spec)


@pytest.fixture(scope="session")
def gt_params(spec, template):
    return ms.perturb_parameter_set(template, spec, np.random.default_rng(1), 0.15)


@pytest.fixture(scope="session")
def collected(spec, gt_params):
    """Sessions 1 and 2 of one synthetic participant plus the derived pieces."""
    traces = []
    for sid in (1, 2):
        participant = ms.SyntheticParticipant.create(spec, gt_params, 0.55, (11, sid))
        cfg = ms.SessionConfig.scripted(sid)
        cfg.driver_seed = 3 + sid
        traces.append(ms.run_session(participant, None, cfg))
    dataset = ms.Dataset.from_traces(traces)
    normalizer = ms.ChannelNormalizer.fit(dataset, spec)
    train, test = ms.split_dataset(dataset, 0.67)
    return {"traces": traces, "dataset": dataset, "normalizer": normalizer,
            "train": train, "test": test}


def make_record(m, rld, answers, actions=None, seconds=0.0, puzzle=1):
    actions = np.zeros(5, dtype=bool) if actions is None else np.asarray(actions, dtype=bool)
    return ms.MeasurementRecord(m=m, rld=rld, answers=np.asarray(answers, dtype=float),
                                actions=actions, seconds=seconds, puzzle=puzzle)


def stable_random_params(spec, rng, scale=0.35):
    """Random parameter set within bounds, redrawn until the stability check holds."""
    for _ in range(200):
        p = ms.ParameterSet.defaults(spec)
        p.perception = rng.uniform(-1.0, 1.0, p.perception.shape)
        p.linkage_weights = rng.uniform(-scale, scale, p.linkage_weights.shape)
        const_rows = [i for i, l in enumerate(spec.cognition_linkages) if l.kind == "constant"]
        p.linkage_weights[const_rows, 1] = p.linkage_weights[const_rows, 0]
        p.trait_gains = rng.uniform(0.5, 1.5, p.trait_gains.shape)
        p.decision = rng.uniform(-1.0, 1.0, p.decision.shape)
        if ms.spectral_radius(p, spec) < 1.0:
            return p
    raise RuntimeError("no stable draw")
