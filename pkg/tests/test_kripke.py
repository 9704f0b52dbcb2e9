import random

import pytest

from absmc.envs import MountainCar
from absmc.errors import ConfigError
from absmc.grid import Box, abstract_of, concretize, make_granularity
from absmc.kripke import build_kripke, to_dot, to_text
from absmc.ltl import Tri, parse_proposition
from absmc.policy import TabularPolicy
from absmc.transformer import Perturbation


ENV = MountainCar()
GRID = make_granularity((-1.2, -0.07), (0.6, 0.07), (0.1, 0.01))
INIT = Box((-0.5001, 0.0), (-0.5, 0.0))
GOAL = parse_proposition("goal", "p >= 0.5", ENV.var_names)
EPS0 = Perturbation.zero(2)


def push_right():
    return TabularPolicy(GRID, {}, 2)


def build(threshold=100_000, policy=None, props=(GOAL,), eps=EPS0):
    return build_kripke(ENV, GRID, policy or push_right(), INIT, eps,
                        props, threshold)


class TestConstruction:
    def test_initial_states_cover_initial_box(self):
        K = build()
        init_states = {K.states[i] for i in K.initial}
        assert abstract_of((-0.5001, 0.0), GRID) in init_states
        assert abstract_of((-0.5, 0.0), GRID) in init_states

    def test_states_sorted_with_sink_last(self):
        K = build()
        keys = [GRID.linear_index(s.index)
                for s in K.states if not s.is_sink]
        assert keys == sorted(keys)
        sinks = [i for i, s in enumerate(K.states) if s.is_sink]
        assert sinks in ([], [K.n_states - 1])

    def test_totality(self):
        K = build()
        assert all(len(outs) >= 1 for outs in K.edges)
        assert all(0 <= j < K.n_states for outs in K.edges for j in outs)

    def test_exhausted_run(self):
        K = build()
        assert K.exhausted
        assert K.explored_count == K.n_states
        assert K.n_states < GRID.total_states + 1

    def test_edges_sound_for_concrete_steps(self):
        rng = random.Random(0)
        K = build()
        pol = push_right()
        for i, s in enumerate(K.states):
            if s.is_sink:
                continue
            box = concretize(s, GRID)
            for _ in range(5):
                pt = tuple(rng.uniform(l, u)
                           for l, u in zip(box.lower, box.upper))
                nxt = abstract_of(ENV.step(pt, pol.act(s)), GRID)
                j = K.position_of(nxt)
                assert j is not None and j in K.edges[i]

    def test_deterministic(self):
        K1 = build()
        K2 = build()
        assert to_text(K1) == to_text(K2)
        assert K1.initial == K2.initial
        assert K1.edges == K2.edges


class TestThreshold:
    def test_truncation_hits_count_exactly(self):
        full = build()
        T = full.n_states // 2
        K = build(threshold=T)
        assert K.explored_count == T
        assert K.n_states == T
        assert not K.exhausted

    def test_threshold_one(self):
        K = build(threshold=1)
        assert K.n_states == 1
        assert not K.exhausted
        # The lone unexpanded state still gets a self-loop.
        assert K.edges == ((0,),)

    def test_generous_threshold_is_exhaustive(self):
        K = build(threshold=10**6)
        assert K.exhausted

    def test_rejects_bad_inputs(self):
        with pytest.raises(ConfigError):
            build(threshold=0)
        with pytest.raises(ConfigError):
            build_kripke(ENV, GRID, push_right(),
                         Box((5.0, 5.0), (6.0, 6.0)), EPS0, (GOAL,), 10)


class TestLabels:
    def test_three_valued_labels_match_boxes(self):
        K = build()
        for i, s in enumerate(K.states):
            if s.is_sink:
                assert K.labels[i][GOAL] is Tri.UNKNOWN
            else:
                assert K.labels[i][GOAL] is GOAL.eval_box(
                    concretize(s, GRID))

    def test_goal_cells_definitely_true(self):
        K = build()
        hit = [i for i, s in enumerate(K.states)
               if not s.is_sink and s.index[0] == GRID.counts[0] - 1]
        assert hit, "push-right run should reach the goal column"
        for i in hit:
            assert K.labels[i][GOAL] in (Tri.TRUE, Tri.UNKNOWN)


class TestPerturbation:
    def test_epsilon_widens_reachable_set(self):
        K0 = build()
        K1 = build(eps=Perturbation((0.02, 0.002)))
        assert K1.n_states >= K0.n_states
        assert set(K0.states) <= set(K1.states)


class TestExports:
    def test_text_format(self):
        K = build(threshold=50)
        text = to_text(K)
        lines = text.splitlines()
        assert lines[0].startswith("# state")
        assert "# props: goal" in text
        assert f"# exhausted: {K.exhausted}  explored: 50" in text
        body = [l for l in lines if not l.startswith("#")]
        assert len(body) == K.n_states
        fields = body[0].split("\t")
        assert len(fields) == 5
        assert fields[3] in ("T", "F", "?")

    def test_dot_format(self):
        K = build(threshold=30)
        dot = to_dot(K)
        assert dot.startswith("digraph kripke {")
        assert dot.rstrip().endswith("}")
        assert dot.count("->") == K.n_edges()
        assert dot.count("doublecircle") == len(K.initial)
