"""Session traces, channel normalization, and their delimited persistence.

A session trace is the time-stamped record of one interaction session:
per measurement, the six situation-data channels, the participant's
quantized answers about their mental states, the boolean actions observed
since the previous measurement, the simulated wall time, and the puzzle
index.  Traces persist as comma-delimited tables with a small ``#``
metadata header.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, StructuralError
from .model import MAX_HINTS_PER_PUZZLE, N_CHANNELS, ModelSpec, RealLifeData

ANSWER_NAMES = ("puzzle_difficult", "reward_offered", "quit_session", "skip_puzzle",
                "get_help", "change_difficulty", "boredom", "frustration")
ACTION_NAMES = ("quit", "skip", "ask_help", "ask_easier", "ask_harder")

_COLUMNS = (
    ["m", "rld_difficulty", "rld_hints", "rld_wrong", "rld_solve_time",
     "rld_skipped", "rld_reward"]
    + [f"ans_{n}" for n in ANSWER_NAMES]
    + [f"act_{n}" for n in ACTION_NAMES]
    + ["seconds", "puzzle"]
)


def quantize_answers(values: np.ndarray) -> np.ndarray:
    """Map state values to the 0..10 answer scale and back.

    q = 5 * (x + 1) rounded half away from zero; the neutral answer 5 maps
    back to 0.  Round-trip error is at most 0.1 in state units.
    """
    values = np.clip(np.asarray(values, dtype=float), -1.0, 1.0)
    q = np.floor(5.0 * (values + 1.0) + 0.5)  # argument is >= 0, so this rounds half up
    q = np.clip(q, 0, 10)
    return q / 5.0 - 1.0


@dataclass
class MeasurementRecord:
    """One measurement row of a session trace."""

    m: int
    rld: RealLifeData
    answers: np.ndarray          # beliefs, goals, emotions in spec order, in [-1, 1]
    actions: np.ndarray          # booleans in ACTION_NAMES order
    seconds: float
    puzzle: int


@dataclass
class SessionTrace:
    """Ordered measurement records from one session."""

    records: list[MeasurementRecord] = field(default_factory=list)
    session_id: int = 0
    incomplete: bool = False

    def __len__(self) -> int:
        return len(self.records)

    def validate(self) -> None:
        last_m = -1
        widths = None
        for rec in self.records:
            if rec.m <= last_m:
                raise DataError("measurement indices must be strictly increasing")
            last_m = rec.m
            if np.any(np.abs(rec.answers) > 1.0 + 1e-12):
                raise DataError("measured state outside [-1, 1]")
            if widths is None:
                widths = (rec.answers.shape, rec.actions.shape)
            elif widths != (rec.answers.shape, rec.actions.shape):
                raise DataError("inconsistent answer or action widths within a trace")
            if rec.rld.hints > MAX_HINTS_PER_PUZZLE:
                raise DataError("hints beyond the per-puzzle bound")

    def answer_matrix(self) -> np.ndarray:
        return np.array([rec.answers for rec in self.records], dtype=float)

    def channel_matrix(self) -> np.ndarray:
        return np.array([rec.rld.channels() for rec in self.records], dtype=float)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        for rec in self.records:
            if rec.answers.shape != (len(ANSWER_NAMES),) \
                    or rec.actions.shape != (len(ACTION_NAMES),):
                raise DataError("the trace table format requires 8 answers and 5 actions")
        lines = [f"# session={self.session_id}",
                 f"# incomplete={'true' if self.incomplete else 'false'}",
                 ",".join(_COLUMNS)]
        for rec in self.records:
            ch = rec.rld
            row = [str(rec.m), str(ch.difficulty), str(ch.hints), str(ch.wrong_attempts),
                   repr(float(ch.solve_time)), str(int(ch.skipped)), str(int(ch.reward_given))]
            row += [repr(float(v)) for v in rec.answers]
            row += [str(int(v)) for v in rec.actions]
            row += [repr(float(rec.seconds)), str(rec.puzzle)]
            lines.append(",".join(row))
        path.write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SessionTrace":
        path = Path(path)
        trace = cls()
        header_seen = False
        for line in path.read_text().splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key.strip() == "session":
                    trace.session_id = int(value)
                elif key.strip() == "incomplete":
                    trace.incomplete = value.strip() == "true"
                continue
            if not header_seen:
                if line.split(",") != _COLUMNS:
                    raise DataError(f"unexpected trace header in {path}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != len(_COLUMNS):
                raise DataError(f"malformed trace row in {path}")
            rld = RealLifeData(
                difficulty=int(parts[1]), hints=int(parts[2]), wrong_attempts=int(parts[3]),
                solve_time=float(parts[4]), skipped=bool(int(parts[5])),
                reward_given=bool(int(parts[6])),
            )
            answers = np.array([float(v) for v in parts[7:15]])
            actions = np.array([bool(int(v)) for v in parts[15:20]])
            trace.records.append(MeasurementRecord(
                m=int(parts[0]), rld=rld, answers=answers, actions=actions,
                seconds=float(parts[20]), puzzle=int(parts[21]),
            ))
        trace.validate()
        return trace


@dataclass
class Dataset:
    """An ordered collection of trace segments treated as one time series.

    One-measurement-ahead predictions never cross segment boundaries.
    ``tag`` marks the dataset's role so optimizers can refuse held-out data.
    """

    segments: list[SessionTrace] = field(default_factory=list)
    tag: str = "train"

    @classmethod
    def from_traces(cls, traces: list[SessionTrace], tag: str = "train") -> "Dataset":
        return cls(segments=[t for t in traces if len(t)], tag=tag)

    @property
    def n_measurements(self) -> int:
        return sum(len(t) for t in self.segments)

    def records(self):
        for trace in self.segments:
            yield from trace.records

    def pairs(self):
        """Consecutive (record, next record) pairs within each segment."""
        for trace in self.segments:
            for a, b in zip(trace.records, trace.records[1:]):
                yield a, b

    def n_pairs(self) -> int:
        return sum(max(0, len(t) - 1) for t in self.segments)

    def validate(self) -> None:
        for trace in self.segments:
            trace.validate()


def split_dataset(dataset: Dataset, ratio: float, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Contiguous split preserving temporal order: the head block trains, the tail tests.

    ``seed`` is accepted for interface stability; the split is deterministic.
    """
    if not 0.0 < ratio < 1.0:
        raise DataError(f"split ratio {ratio} must lie strictly inside (0, 1)")
    total = dataset.n_measurements
    if total < 6:
        raise DataError(f"need at least 6 measurements to split, got {total}")
    n_train = int(np.floor(ratio * total))
    n_train = min(max(n_train, 1), total - 1)
    train_segs: list[SessionTrace] = []
    test_segs: list[SessionTrace] = []
    remaining = n_train
    for trace in dataset.segments:
        if remaining >= len(trace):
            train_segs.append(trace)
            remaining -= len(trace)
        elif remaining > 0:
            head = SessionTrace(trace.records[:remaining], trace.session_id, trace.incomplete)
            tail = SessionTrace(trace.records[remaining:], trace.session_id, trace.incomplete)
            train_segs.append(head)
            test_segs.append(tail)
            remaining = 0
        else:
            test_segs.append(trace)
    return (Dataset(train_segs, tag="train"), Dataset(test_segs, tag="test"))


class ChannelNormalizer:
    """Affine per-channel map onto [0, 1] from recorded minima and maxima.

    Boolean channels keep their {0, 1} coding.  A channel with no observed
    spread maps to 0.
    """

    def __init__(self, lo: np.ndarray, hi: np.ndarray):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != (N_CHANNELS,) or self.hi.shape != (N_CHANNELS,):
            raise StructuralError(f"normalizer needs {N_CHANNELS} channel bounds")

    @classmethod
    def fit(cls, dataset: Dataset, spec: ModelSpec | None = None) -> "ChannelNormalizer":
        rows = np.concatenate([t.channel_matrix() for t in dataset.segments], axis=0)
        if rows.size == 0:
            raise DataError("cannot fit a normalizer on an empty dataset")
        lo, hi = rows.min(axis=0), rows.max(axis=0)
        boolean = spec.boolean_inputs() if spec is not None else (4, 5)
        for i in boolean:
            lo[i], hi[i] = 0.0, 1.0
        return cls(lo, hi)

    @classmethod
    def reference(cls) -> "ChannelNormalizer":
        """Fixed scales used by synthetic ground-truth dynamics."""
        return cls(lo=np.zeros(N_CHANNELS), hi=np.array([5.0, 13.0, 12.0, 600.0, 1.0, 1.0]))

    def transform(self, channels: np.ndarray) -> np.ndarray:
        channels = np.asarray(channels, dtype=float)
        width = self.hi - self.lo
        out = np.zeros_like(channels, dtype=float)
        nz = width != 0
        out[..., nz] = (channels[..., nz] - self.lo[nz]) / width[nz]
        return np.clip(out, 0.0, 1.0)

    def to_dict(self) -> dict:
        return {"lo": [float(v) for v in self.lo], "hi": [float(v) for v in self.hi]}

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelNormalizer":
        return cls(np.array(d["lo"], dtype=float), np.array(d["hi"], dtype=float))
