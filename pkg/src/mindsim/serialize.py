"""Declarative text (JSON) persistence for specs, parameters, and configs.

Floats are written with ``repr`` so round trips are lossless well beyond
15 significant digits.  Documents are emitted with sorted keys and a fixed
indent so identical objects always produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataError
from .model import Linkage, ModelSpec, ParameterSet, PerceptionChannel


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save_json(obj: dict, path: str | Path) -> None:
    Path(path).write_text(dumps(obj))


def load_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed JSON in {path}: {exc}") from exc


# -- ModelSpec ---------------------------------------------------------------

def spec_to_dict(spec: ModelSpec) -> dict:
    return {
        "belief_vars": list(spec.belief_vars),
        "goal_vars": list(spec.goal_vars),
        "emotion_vars": list(spec.emotion_vars),
        "bias_vars": list(spec.bias_vars),
        "pk_vars": list(spec.pk_vars),
        "perception_channels": [
            {"input": ch.input, "output": ch.output, "family": ch.family}
            for ch in spec.perception_channels
        ],
        "cognition_linkages": [
            {"src": l.src, "dst": l.dst, "kind": l.kind} for l in spec.cognition_linkages
        ],
        "self_weights": {k: float(v) for k, v in sorted(spec.self_weights.items())},
        "intention_wiring": [[i, g] for i, g in spec.intention_wiring],
        "pk_sources": {k: int(v) for k, v in sorted(spec.pk_sources.items())},
    }


def spec_from_dict(d: dict) -> ModelSpec:
    spec = ModelSpec(
        belief_vars=tuple(d["belief_vars"]),
        goal_vars=tuple(d["goal_vars"]),
        emotion_vars=tuple(d["emotion_vars"]),
        bias_vars=tuple(d["bias_vars"]),
        pk_vars=tuple(d["pk_vars"]),
        perception_channels=tuple(
            PerceptionChannel(int(c["input"]), int(c["output"]), c["family"])
            for c in d["perception_channels"]
        ),
        cognition_linkages=tuple(
            Linkage(l["src"], l["dst"], l["kind"]) for l in d["cognition_linkages"]
        ),
        self_weights={k: float(v) for k, v in d.get("self_weights", {}).items()},
        intention_wiring=tuple((i, g) for i, g in d.get("intention_wiring", [])),
        pk_sources={k: int(v) for k, v in d.get("pk_sources", {}).items()},
    )
    spec.validate()
    return spec


# -- ParameterSet ------------------------------------------------------------

def params_to_dict(params: ParameterSet, spec: ModelSpec) -> dict:
    cognition = []
    for l_idx, link in enumerate(spec.cognition_linkages):
        wm, wp = params.linkage_weights[l_idx]
        entry = {"src": link.src, "dst": link.dst}
        if link.kind == "constant":
            entry["w"] = float(wm)
        else:
            entry["w_minus"] = float(wm)
            entry["w_plus"] = float(wp)
        cognition.append(entry)
    return {
        "perception": [[float(a), float(b)] for a, b in params.perception],
        "cognition": cognition,
        "self_weights": {name: float(params.self_weights[i])
                         for i, name in enumerate(spec.all_vars)},
        "trait_gains": {name: float(params.trait_gains[i])
                        for i, name in enumerate(spec.emotion_vars)},
        "decision": {name: [float(w), float(o)]
                     for (name, _), (w, o) in zip(spec.intention_wiring, params.decision)},
    }


def params_from_dict(d: dict, spec: ModelSpec) -> ParameterSet:
    params = ParameterSet.defaults(spec)
    params.perception = np.array(d["perception"], dtype=float)
    for l_idx, (link, entry) in enumerate(zip(spec.cognition_linkages, d["cognition"])):
        if entry["src"] != link.src or entry["dst"] != link.dst:
            raise DataError(f"cognition entry {l_idx} does not match the spec linkage order")
        if link.kind == "constant":
            params.linkage_weights[l_idx] = (float(entry["w"]), float(entry["w"]))
        else:
            params.linkage_weights[l_idx] = (float(entry["w_minus"]), float(entry["w_plus"]))
    for i, name in enumerate(spec.all_vars):
        params.self_weights[i] = float(d["self_weights"][name])
    for i, name in enumerate(spec.emotion_vars):
        params.trait_gains[i] = float(d["trait_gains"][name])
    for k, (name, _) in enumerate(spec.intention_wiring):
        w, o = d["decision"][name]
        params.decision[k] = (float(w), float(o))
    params.validate(spec)
    return params


def save_spec(spec: ModelSpec, path: str | Path) -> None:
    save_json(spec_to_dict(spec), path)


def load_spec(path: str | Path) -> ModelSpec:
    return spec_from_dict(load_json(path))


def save_params(params: ParameterSet, spec: ModelSpec, path: str | Path) -> None:
    save_json(params_to_dict(params, spec), path)


def load_params(path: str | Path, spec: ModelSpec) -> ParameterSet:
    return params_from_dict(load_json(path), spec)
