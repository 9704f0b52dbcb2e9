"""Kripke structure over abstract states: bounded BFS under the abstract
transformer, with three-valued proposition labels per state.

State indexing is deterministic: discovered cells are sorted by their grid
linearization (sink last), so the final structure does not depend on
discovery order.  The discovery *count* threshold does, and BFS order is
itself deterministic (FIFO over successors sorted by index).
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .envs import Environment
from .errors import ConfigError
from .grid import (
    SINK,
    AbstractState,
    Box,
    Granularity,
    clip_box,
    concretize,
    cover,
)
from .ltl import AtomicProposition, Tri
from .transformer import Perturbation, successors


@dataclass(frozen=True)
class KripkeStructure:
    granularity: Granularity
    props: tuple
    states: tuple           # AbstractState, sorted by linearization, sink last
    initial: tuple          # positions into states
    edges: tuple            # per state: tuple of successor positions
    labels: tuple           # per state: dict AtomicProposition -> Tri
    exhausted: bool
    explored_count: int
    build_seconds: float

    @property
    def n_states(self) -> int:
        return len(self.states)

    def n_edges(self) -> int:
        return sum(len(e) for e in self.edges)

    def position_of(self, a: AbstractState):
        # States are sorted, but a dict lookup is built lazily on demand.
        try:
            table = self._pos_table
        except AttributeError:
            table = {s: i for i, s in enumerate(self.states)}
            object.__setattr__(self, "_pos_table", table)
        return table.get(a)


def _sort_key(g: Granularity):
    def key(a: AbstractState):
        return (1, 0) if a.is_sink else (0, g.linear_index(a.index))
    return key


def build_kripke(env: Environment, g: Granularity, policy, initial_box: Box,
                 eps: Perturbation, props, threshold: int) -> KripkeStructure:
    """Bounded BFS from the cover of the initial box.

    Each newly discovered state counts once toward the threshold; once the
    count reaches it, exploration stops and the structure is marked not
    exhausted.  Unexpanded states get a self-loop to keep every state's
    outdegree >= 1.
    """
    if threshold < 1:
        raise ConfigError("threshold must be >= 1")
    t0 = time.perf_counter()
    props = tuple(props)
    key = _sort_key(g)

    clipped = clip_box(initial_box, g)
    if clipped is None:
        raise ConfigError("initial box lies outside the state space")
    init_cells = sorted(cover(clipped, g), key=key)

    discovered = set()
    edges_raw = {}
    queue = deque()
    truncated = False
    for a in init_cells:
        if len(discovered) < threshold:
            discovered.add(a)
            queue.append(a)
        else:
            truncated = True
    initial_cells = sorted(discovered, key=key)

    while queue and len(discovered) < threshold:
        a = queue.popleft()
        outs = []
        for b in sorted(successors(a, policy, env, g, eps), key=key):
            if b in discovered:
                outs.append(b)
            elif len(discovered) < threshold:
                discovered.add(b)
                queue.append(b)
                outs.append(b)
            else:
                truncated = True
        edges_raw[a] = outs
    if queue:
        truncated = True

    states = sorted(discovered, key=key)
    pos = {s: i for i, s in enumerate(states)}
    edges = []
    labels = []
    for s in states:
        outs = edges_raw.get(s)
        if not outs:
            outs = [s]  # unexpanded frontier or dropped successors
        edges.append(tuple(sorted(pos[b] for b in outs)))
        if s.is_sink:
            labels.append({p: Tri.UNKNOWN for p in props})
        else:
            box = concretize(s, g)
            labels.append({p: p.eval_box(box) for p in props})

    return KripkeStructure(
        granularity=g,
        props=props,
        states=tuple(states),
        initial=tuple(pos[a] for a in initial_cells),
        edges=tuple(edges),
        labels=tuple(labels),
        exhausted=not truncated,
        explored_count=len(discovered),
        build_seconds=time.perf_counter() - t0,
    )


# -------------------------------------------------------------------- exports

_TRI_CHAR = {Tri.TRUE: "T", Tri.FALSE: "F", Tri.UNKNOWN: "?"}


def _state_name(a: AbstractState) -> str:
    return "sink" if a.is_sink else ",".join(map(str, a.index))


def to_text(K: KripkeStructure) -> str:
    """Line-oriented export: one state per line with box, labels and
    successor list."""
    lines = [
        "# state<TAB>index<TAB>box<TAB>labels<TAB>successors",
        f"# props: {';'.join(p.name or str(i) for i, p in enumerate(K.props))}",
        f"# initial: {' '.join(map(str, K.initial))}",
        f"# exhausted: {K.exhausted}  explored: {K.explored_count}",
    ]
    for i, s in enumerate(K.states):
        if s.is_sink:
            box_txt = "-"
        else:
            b = concretize(s, K.granularity)
            box_txt = " ".join(f"[{l!r},{u!r}]"
                               for l, u in zip(b.lower, b.upper))
        lab = "".join(_TRI_CHAR[K.labels[i][p]] for p in K.props)
        succ = " ".join(map(str, K.edges[i]))
        lines.append(f"{i}\t{_state_name(s)}\t{box_txt}\t{lab}\t{succ}")
    return "\n".join(lines) + "\n"


def to_dot(K: KripkeStructure) -> str:
    lines = ["digraph kripke {", "  rankdir=LR;"]
    initial = set(K.initial)
    for i, s in enumerate(K.states):
        lab = " ".join(
            f"{p.name or 'p' + str(j)}={_TRI_CHAR[K.labels[i][p]]}"
            for j, p in enumerate(K.props))
        shape = "doublecircle" if i in initial else "circle"
        lines.append(
            f'  n{i} [shape={shape} label="{_state_name(s)}\\n{lab}"];')
    for i, outs in enumerate(K.edges):
        for j in outs:
            lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
