"""Deterministic policies over abstract states, plus the shared JSON
serialization format (``format_version`` 1).

Both kinds echo their granularity so a verifier can reject a policy trained
on a different grid.  Tabular policies are total via ``default_action``;
MLP policies read the 2n interval endpoints of the cell's box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, GranularityMismatch
from .grid import AbstractState, Granularity, concretize, make_granularity

FORMAT_VERSION = 1

_ACTIVATIONS = {
    "relu": lambda x: np.maximum(x, 0.0),
    "identity": lambda x: x,
}


def _check_cell(p, a: AbstractState):
    if a.is_sink:
        return
    g = p.granularity
    if len(a.index) != g.dim or any(
            not 0 <= i < c for i, c in zip(a.index, g.counts)):
        raise GranularityMismatch(
            f"abstract state {a.index} invalid for grid counts {g.counts}")


@dataclass(frozen=True)
class TabularPolicy:
    granularity: Granularity
    table: dict = field(default_factory=dict)  # linear index -> action index
    default_action: int = 0

    def act(self, a: AbstractState) -> int:
        _check_cell(self, a)
        if a.is_sink:
            return self.default_action
        return self.table.get(self.granularity.linear_index(a.index),
                              self.default_action)


@dataclass(frozen=True)
class MlpPolicy:
    granularity: Granularity
    layers: tuple  # of (weights, bias, activation-name)
    default_action: int = 0

    def __post_init__(self):
        arity = 2 * self.granularity.dim
        for k, (w, b, act) in enumerate(self.layers):
            if act not in _ACTIVATIONS:
                raise FormatError(f"layer {k}: unknown activation {act!r}")
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise FormatError(f"layer {k}: weight/bias shapes "
                                  f"{w.shape}/{b.shape} do not chain")
            if w.shape[1] != arity:
                raise FormatError(
                    f"layer {k}: expected input arity {arity}, got "
                    f"{w.shape[1]}")
            arity = w.shape[0]

    def forward(self, x: np.ndarray) -> np.ndarray:
        for w, b, act in self.layers:
            x = _ACTIVATIONS[act](w @ x + b)
        return x

    def endpoints(self, a: AbstractState) -> np.ndarray:
        box = concretize(a, self.granularity)
        out = np.empty(2 * box.dim)
        out[0::2] = box.lower
        out[1::2] = box.upper
        return out

    def act(self, a: AbstractState) -> int:
        _check_cell(self, a)
        if a.is_sink:
            return self.default_action
        # np.argmax breaks ties toward the lowest action index.
        return int(np.argmax(self.forward(self.endpoints(a))))


def _granularity_dict(g: Granularity) -> dict:
    return {"lower": list(g.lower), "upper": list(g.upper),
            "diameters": list(g.diameters)}


def save_policy(p, path) -> None:
    if isinstance(p, TabularPolicy):
        doc = {
            "format_version": FORMAT_VERSION,
            "kind": "tabular",
            "granularity": _granularity_dict(p.granularity),
            "default_action": int(p.default_action),
            "table": [[int(k), int(v)] for k, v in sorted(p.table.items())],
        }
    elif isinstance(p, MlpPolicy):
        doc = {
            "format_version": FORMAT_VERSION,
            "kind": "mlp",
            "granularity": _granularity_dict(p.granularity),
            "default_action": int(p.default_action),
            "layers": [
                {"weights": w.tolist(), "bias": b.tolist(), "activation": act}
                for w, b, act in p.layers
            ],
        }
    else:
        raise FormatError(f"cannot serialize policy of type {type(p)}")
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_policy(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}: invalid JSON: {e}") from None
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError(
            f"unsupported format_version {doc.get('format_version')!r}")
    try:
        gd = doc["granularity"]
        g = make_granularity(gd["lower"], gd["upper"], gd["diameters"])
        default = int(doc["default_action"])
        kind = doc["kind"]
    except (KeyError, TypeError) as e:
        raise FormatError(f"missing or malformed field: {e}") from None
    if kind == "tabular":
        try:
            table = {int(k): int(v) for k, v in doc["table"]}
        except (KeyError, TypeError, ValueError):
            raise FormatError("malformed 'table': expected [index, action] "
                              "pairs") from None
        return TabularPolicy(g, table, default)
    if kind == "mlp":
        layers = []
        for k, layer in enumerate(doc.get("layers", [])):
            try:
                w = np.asarray(layer["weights"], dtype=float)
                b = np.asarray(layer["bias"], dtype=float)
                act = layer["activation"]
            except (KeyError, TypeError, ValueError):
                raise FormatError(f"layer {k}: malformed weights/bias") \
                    from None
            if w.ndim != 2:
                raise FormatError(f"layer {k}: weight matrix is not 2-D")
            layers.append((w, b, act))
        return MlpPolicy(g, tuple(layers), default)
    raise FormatError(f"unknown policy kind {kind!r}")
