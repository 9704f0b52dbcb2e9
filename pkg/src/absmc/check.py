"""LTL model checking of a Kripke structure against a formula.

The property is checked universally: the negation is translated to a Buchi
automaton, the product with the Kripke structure is searched for an
accepting lasso with nested DFS, and three-valued labels enable guards
pessimistically (an Unknown label enables both polarities of a literal).
That makes an empty product sound: if no lasso exists, every concrete
behaviour covered by the abstraction satisfies the property.

The verdict is Verified when the product is empty and exploration was
exhaustive, BoundedVerified when it is empty but the state threshold
truncated the Kripke structure, and NotVerified with a counterexample lasso
otherwise.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .buchi import BuchiAutomaton, translate_to_buchi
from .errors import UndeclaredAtom
from .grid import abstract_of, concretize
from .kripke import KripkeStructure
from .ltl import Formula, Not, Tri, atoms_of


def _enabled(guard, labels) -> bool:
    """A literal is enabled unless the label definitely contradicts it."""
    for prop, pol in guard:
        lab = labels[prop]
        if pol and lab == Tri.FALSE:
            return False
        if not pol and lab == Tri.TRUE:
            return False
    return True


@dataclass(frozen=True)
class Counterexample:
    """Lasso in the product: Kripke positions and the automaton run."""

    stem: tuple
    cycle: tuple
    stem_run: tuple
    cycle_run: tuple

    def stem_states(self, K: KripkeStructure):
        return tuple(K.states[i] for i in self.stem)

    def cycle_states(self, K: KripkeStructure):
        return tuple(K.states[i] for i in self.cycle)


@dataclass(frozen=True)
class Verdict:
    outcome: str  # Verified | BoundedVerified | NotVerified
    counterexample: Counterexample | None
    kripke_states: int
    kripke_edges: int
    product_states: int
    exhausted: bool
    seconds: float

    @property
    def holds(self) -> bool:
        return self.outcome in ("Verified", "BoundedVerified")


class _Product:
    """Lazy product of a Kripke structure with a Buchi automaton; nodes are
    (kripke position, automaton state) pairs."""

    def __init__(self, K: KripkeStructure, aut: BuchiAutomaton):
        self.K = K
        self.aut = aut
        self._succ = {}
        self.initial = tuple(
            (k, q)
            for k in K.initial
            for q in aut.initial
            if _enabled(aut.state_guards[q], K.labels[k]))

    def successors(self, node):
        outs = self._succ.get(node)
        if outs is None:
            k, q = node
            outs = tuple(
                (k2, q2)
                for k2 in self.K.edges[k]
                for guard, q2 in self.aut.transitions[q]
                if _enabled(guard, self.K.labels[k2]))
            self._succ[node] = outs
        return outs

    def accepting(self, node) -> bool:
        return node[1] in self.aut.accepting


def _nested_dfs(prod: _Product):
    """Accepting-lasso search; returns ((stem, cycle) or None, visited)."""
    blue = set()
    red = set()
    for s0 in prod.initial:
        if s0 in blue:
            continue
        blue.add(s0)
        stack = [(s0, iter(prod.successors(s0)))]
        path = [s0]
        on_path = {s0: 0}
        while stack:
            node, it = stack[-1]
            child = next((t for t in it if t not in blue), None)
            if child is not None:
                blue.add(child)
                stack.append((child, iter(prod.successors(child))))
                on_path[child] = len(path)
                path.append(child)
                continue
            if prod.accepting(node):
                hit = _red_dfs(node, prod, red, on_path)
                if hit is not None:
                    entry, red_seg = hit
                    idx = on_path[entry]
                    cycle = tuple(path[idx:]) + tuple(red_seg)
                    return (tuple(path[:idx]), cycle), len(blue | red)
            stack.pop()
            path.pop()
            del on_path[node]
    return None, len(blue | red)


def _red_dfs(seed, prod: _Product, red: set, on_path: dict):
    """Search from an accepting node for any node on the blue DFS path.
    Returns (entry node, red path seed..entry exclusive) or None."""
    parent = {}
    stack = [seed]
    while stack:
        u = stack.pop()
        for t in prod.successors(u):
            if t in on_path:
                seg = []
                node = u
                while node != seed:
                    seg.append(node)
                    node = parent[node]
                seg.reverse()
                return t, seg
            if t not in red:
                red.add(t)
                parent[t] = u
                stack.append(t)
    return None


def scc_has_accepting_cycle(prod: _Product) -> bool:
    """Independent emptiness check via Tarjan's SCC algorithm (iterative).
    Used to cross-validate the nested DFS."""
    index = {}
    low = {}
    on_stack = set()
    scc_stack = []
    counter = [0]
    nonempty = [False]

    def visit(root):
        work = [(root, iter(prod.successors(root)), None)]
        while work:
            node, it, _ = work[-1]
            if node not in index:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                scc_stack.append(node)
                on_stack.add(node)
            advanced = False
            for t in it:
                if t not in index:
                    work.append((t, iter(prod.successors(t)), node))
                    advanced = True
                    break
                if t in on_stack:
                    low[node] = min(low[node], index[t])
            if advanced:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    v = scc_stack.pop()
                    on_stack.discard(v)
                    comp.append(v)
                    if v == node:
                        break
                trivial = len(comp) == 1 and comp[0] not in \
                    prod.successors(comp[0])
                if not trivial and any(prod.accepting(v) for v in comp):
                    nonempty[0] = True
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    for s0 in prod.initial:
        if s0 not in index:
            visit(s0)
            if nonempty[0]:
                return True
    return nonempty[0]


def check(K: KripkeStructure, f: Formula) -> Verdict:
    """Decide whether every run of the Kripke structure satisfies f."""
    t0 = time.perf_counter()
    missing = atoms_of(f) - set(K.props)
    if missing:
        names = ", ".join(sorted(p.name or repr(p) for p in missing))
        raise UndeclaredAtom(
            f"formula uses propositions not labeled on the structure: "
            f"{names}")
    aut = translate_to_buchi(Not(f))
    prod = _Product(K, aut)
    lasso, visited = _nested_dfs(prod)
    seconds = time.perf_counter() - t0
    if lasso is None:
        outcome = "Verified" if K.exhausted else "BoundedVerified"
        cex = None
    else:
        outcome = "NotVerified"
        stem, cycle = lasso
        cex = Counterexample(
            stem=tuple(k for k, _ in stem),
            cycle=tuple(k for k, _ in cycle),
            stem_run=tuple(q for _, q in stem),
            cycle_run=tuple(q for _, q in cycle),
        )
    return Verdict(
        outcome=outcome,
        counterexample=cex,
        kripke_states=K.n_states,
        kripke_edges=K.n_edges(),
        product_states=visited,
        exhausted=K.exhausted,
        seconds=seconds,
    )


def replay_counterexample(K: KripkeStructure, env, policy,
                          cex: Counterexample, repeats: int = 2):
    """Concretely simulate the lasso from the centre of its first cell.

    The abstract counterexample may be spurious (an artefact of
    over-approximation), so the replay reports how far a concrete greedy
    trajectory tracks the expected abstract state sequence.
    """
    g = K.granularity
    expected = [K.states[i] for i in cex.stem]
    expected += [K.states[i] for i in cex.cycle] * max(repeats, 1)
    first = expected[0]
    if first.is_sink:
        return {"witnessed": False, "matched_steps": 0, "trajectory": (),
                "note": "counterexample starts at the sink state"}
    box = concretize(first, g)
    s = tuple(0.5 * (l + u) for l, u in zip(box.lower, box.upper))
    traj = [s]
    matched = 1
    for target in expected[1:]:
        a = policy.act(abstract_of(s, g))
        s = env.step(s, a)
        traj.append(s)
        if target.is_sink or abstract_of(s, g) != target:
            break
        matched += 1
    witnessed = matched == len(expected)
    return {
        "witnessed": witnessed,
        "matched_steps": matched,
        "expected_steps": len(expected),
        "trajectory": tuple(traj),
        "note": ("concretely witnessed" if witnessed
                 else "not concretely witnessed (possibly spurious)"),
    }
