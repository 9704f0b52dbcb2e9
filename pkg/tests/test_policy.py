import json
import random

import numpy as np
import pytest

from absmc.errors import FormatError, GranularityMismatch
from absmc.grid import SINK, AbstractState, make_granularity
from absmc.policy import (
    MlpPolicy,
    TabularPolicy,
    load_policy,
    save_policy,
)


def grid():
    return make_granularity((-1.0, 0.0), (1.0, 2.0), (0.25, 0.5))


def small_mlp(g, seed=0):
    rng = np.random.default_rng(seed)
    w1 = rng.normal(size=(8, 2 * g.dim))
    b1 = rng.normal(size=8)
    w2 = rng.normal(size=(3, 8))
    b2 = rng.normal(size=3)
    return MlpPolicy(g, ((w1, b1, "relu"), (w2, b2, "identity")), 1)


class TestTabular:
    def test_lookup_and_default(self):
        g = grid()
        p = TabularPolicy(g, {0: 2, 5: 1}, default_action=0)
        assert p.act(AbstractState(g.index_of_linear(0))) == 2
        assert p.act(AbstractState(g.index_of_linear(5))) == 1
        assert p.act(AbstractState(g.index_of_linear(7))) == 0
        assert p.act(SINK) == 0

    def test_rejects_foreign_cell(self):
        p = TabularPolicy(grid(), {}, 0)
        with pytest.raises(GranularityMismatch):
            p.act(AbstractState((99, 0)))
        with pytest.raises(GranularityMismatch):
            p.act(AbstractState((0, 0, 0)))


class TestMlp:
    def test_forward_matches_manual_computation(self):
        g = grid()
        p = small_mlp(g)
        (w1, b1, _), (w2, b2, _) = p.layers
        x = np.array([0.3, -0.2, 1.1, 0.0])
        expected = w2 @ np.maximum(w1 @ x + b1, 0.0) + b2
        assert np.allclose(p.forward(x), expected)

    def test_act_is_argmax_over_endpoints(self):
        g = grid()
        p = small_mlp(g)
        a = AbstractState((2, 1))
        scores = p.forward(p.endpoints(a))
        assert p.act(a) == int(np.argmax(scores))
        assert p.act(SINK) == 1

    def test_endpoints_interleave_lower_upper(self):
        g = grid()
        p = small_mlp(g)
        e = p.endpoints(AbstractState((0, 0)))
        assert list(e) == [-1.0, -0.75, 0.0, 0.5]

    def test_layer_validation(self):
        g = grid()
        with pytest.raises(FormatError):
            MlpPolicy(g, ((np.zeros((4, 3)), np.zeros(4), "relu"),))
        with pytest.raises(FormatError):
            MlpPolicy(g, ((np.zeros((4, 4)), np.zeros(5), "relu"),))
        with pytest.raises(FormatError):
            MlpPolicy(g, ((np.zeros((4, 4)), np.zeros(4), "tanh"),))


class TestSerialization:
    def test_tabular_roundtrip(self, tmp_path):
        g = grid()
        p = TabularPolicy(g, {3: 1, 11: 2}, default_action=2)
        path = tmp_path / "p.json"
        save_policy(p, path)
        q = load_policy(path)
        assert q.granularity == g
        assert q.table == p.table
        assert q.default_action == 2

    def test_mlp_roundtrip_preserves_actions(self, tmp_path):
        g = grid()
        p = small_mlp(g, seed=7)
        path = tmp_path / "p.json"
        save_policy(p, path)
        q = load_policy(path)
        rng = random.Random(0)
        for _ in range(50):
            a = AbstractState((rng.randrange(8), rng.randrange(4)))
            assert p.act(a) == q.act(a)

    def test_save_is_deterministic(self, tmp_path):
        g = grid()
        p = TabularPolicy(g, {1: 0, 2: 1}, 0)
        save_policy(p, tmp_path / "a.json")
        save_policy(p, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == \
            (tmp_path / "b.json").read_bytes()

    def test_rejects_bad_documents(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("not json")
        with pytest.raises(FormatError):
            load_policy(path)
        path.write_text(json.dumps({"format_version": 99}))
        with pytest.raises(FormatError):
            load_policy(path)
        path.write_text(json.dumps({
            "format_version": 1, "kind": "spline",
            "granularity": {"lower": [0.0], "upper": [1.0],
                            "diameters": [0.5]},
            "default_action": 0}))
        with pytest.raises(FormatError):
            load_policy(path)
        path.write_text(json.dumps({
            "format_version": 1, "kind": "tabular",
            "granularity": {"lower": [0.0], "upper": [1.0],
                            "diameters": [0.5]},
            "default_action": 0, "table": [["x", "y"]]}))
        with pytest.raises(FormatError):
            load_policy(path)
