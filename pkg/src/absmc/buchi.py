"""On-the-fly tableau translation of LTL formulas to Buchi automata.

The construction expands formulas into nodes with New/Old/Next obligation
sets, merges nodes with equal (Old, Next), derives one generalized
acceptance set per Until subformula, and degeneralizes with a counter.
Transition guards are consistent conjunctions of literals over the atomic
propositions; an empty guard means "any letter".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .ltl import (
    And,
    Atom,
    FalseConst,
    Formula,
    Next,
    Not,
    Or,
    Release,
    TrueConst,
    Until,
    nnf,
)


@dataclass(frozen=True)
class BuchiAutomaton:
    """Buchi automaton with state-attached guards: a run is in state q at
    word position i only if letter i satisfies ``state_guards[q]``, a
    frozenset of ``(prop, polarity)`` literals.  ``transitions[q]`` is a
    tuple of ``(guard, dst)`` pairs where the guard is the target's."""

    n_states: int
    initial: tuple
    state_guards: tuple
    transitions: tuple
    accepting: frozenset
    atoms: tuple

    def enabled(self, guard, assignment) -> bool:
        """Guard satisfaction for a two-valued letter (set of true props)."""
        return all((prop in assignment) == pol for prop, pol in guard)


class _Node:
    __slots__ = ("id", "incoming", "new", "old", "next")

    def __init__(self, nid, incoming, new, old, nxt):
        self.id = nid
        self.incoming = incoming
        self.new = new
        self.old = old
        self.next = nxt


_INIT = -1


def _is_literal(f: Formula) -> bool:
    return isinstance(f, Atom) or (isinstance(f, Not)
                                   and isinstance(f.sub, Atom))


def _negation(f: Formula) -> Formula:
    return f.sub if isinstance(f, Not) else Not(f)


def _expand(node: _Node, nodes: list, counter) -> None:
    if not node.new:
        for r in nodes:
            if r.old == node.old and r.next == node.next:
                r.incoming |= node.incoming
                return
        nodes.append(node)
        nxt = _Node(next(counter), {node.id}, set(node.next), set(), set())
        _expand(nxt, nodes, counter)
        return
    f = node.new.pop()
    if isinstance(f, TrueConst):
        # Record it: acceptance for "x U true" checks membership in old.
        node.old.add(f)
        _expand(node, nodes, counter)
        return
    if isinstance(f, FalseConst):
        return  # inconsistent node
    if f in node.old:
        _expand(node, nodes, counter)
        return
    if _is_literal(f):
        if _negation(f) in node.old:
            return
        node.old.add(f)
        _expand(node, nodes, counter)
        return
    if isinstance(f, And):
        node.old.add(f)
        node.new |= {f.left, f.right} - node.old
        _expand(node, nodes, counter)
        return
    if isinstance(f, Next):
        node.old.add(f)
        node.next.add(f.sub)
        _expand(node, nodes, counter)
        return
    if isinstance(f, (Or, Until, Release)):
        if isinstance(f, Or):
            new1, new2 = {f.left}, {f.right}
            next1 = set()
        elif isinstance(f, Until):
            new1, new2 = {f.left}, {f.right}
            next1 = {f}
        else:  # Release
            new1, new2 = {f.right}, {f.left, f.right}
            next1 = {f}
        left = _Node(next(counter), set(node.incoming),
                     node.new | (new1 - node.old - {f}),
                     node.old | {f}, node.next | next1)
        right = _Node(next(counter), set(node.incoming),
                      node.new | (new2 - node.old - {f}),
                      node.old | {f}, set(node.next))
        _expand(left, nodes, counter)
        _expand(right, nodes, counter)
        return
    raise TypeError(f"formula not in negation normal form: {f!r}")


def _until_subformulas(f: Formula):
    out = []
    seen = set()

    def walk(g):
        if g in seen:
            return
        seen.add(g)
        if isinstance(g, Until):
            out.append(g)
        for attr in ("sub", "left", "right"):
            child = getattr(g, attr, None)
            if child is not None:
                walk(child)

    walk(f)
    return out


def translate_to_buchi(f: Formula) -> BuchiAutomaton:
    """Build an automaton accepting exactly the infinite words satisfying f."""
    f = nnf(f)
    counter = itertools.count()
    nodes: list = []
    root = _Node(next(counter), {_INIT}, {f}, set(), set())
    _expand(root, nodes, counter)

    untils = _until_subformulas(f)
    # Generalized acceptance: one set per Until subformula.
    acc_sets = []
    for u in untils:
        acc_sets.append({n.id for n in nodes
                         if u not in n.old or u.right in n.old})

    id_to_pos = {n.id: i for i, n in enumerate(nodes)}
    guards = []
    for n in nodes:
        guards.append(frozenset(
            (lit.sub.prop, False) if isinstance(lit, Not) else
            (lit.prop, True)
            for lit in n.old if _is_literal(lit)))

    atoms = tuple(sorted({p for g in guards for p, _ in g},
                         key=lambda p: (p.name, str(p))))

    # Raw (generalized) automaton structure.
    raw_edges = [[] for _ in nodes]  # src -> list of dst positions
    raw_initial = []
    for i, n in enumerate(nodes):
        for src in n.incoming:
            if src == _INIT:
                raw_initial.append(i)
            else:
                raw_edges[id_to_pos[src]].append(i)

    k = len(acc_sets)
    if k == 0:
        transitions = tuple(
            tuple((guards[dst], dst) for dst in sorted(set(raw_edges[i])))
            for i in range(len(nodes)))
        return BuchiAutomaton(len(nodes), tuple(sorted(set(raw_initial))),
                              tuple(guards), transitions,
                              frozenset(range(len(nodes))), atoms)

    # Degeneralize: counter j waits for acceptance set j; it advances when
    # the source node is in set j and cycles at the last set.
    in_set = [[nodes[i].id in acc_sets[j] for j in range(k)]
              for i in range(len(nodes))]
    n_deg = len(nodes) * k

    def deg(i, j):
        return i * k + j

    transitions = []
    state_guards = []
    for i in range(len(nodes)):
        for j in range(k):
            j2 = (j + 1) % k if in_set[i][j] else j
            state_guards.append(guards[i])
            transitions.append(tuple(
                (guards[dst], deg(dst, j2))
                for dst in sorted(set(raw_edges[i]))))
    accepting = frozenset(deg(i, k - 1) for i in range(len(nodes))
                          if in_set[i][k - 1])
    initial = tuple(sorted(deg(i, 0) for i in set(raw_initial)))
    return BuchiAutomaton(n_deg, initial, tuple(state_guards),
                          tuple(transitions), accepting, atoms)


def accepts_lasso(aut: BuchiAutomaton, stem, cycle) -> bool:
    """Whether the automaton accepts the ultimately periodic word
    ``stem . cycle^w``; letters are sets of true propositions."""
    word = list(stem) + list(cycle)
    n = len(word)
    if not cycle:
        raise ValueError("cycle must be non-empty")

    def succ_pos(p):
        return p + 1 if p + 1 < n else len(stem)

    # Entry: initial automaton states whose guard reads word[0].
    start = [(0, q) for q in aut.initial
             if aut.enabled(aut.state_guards[q], word[0])]
    # Accepting cycle search over (position, state).
    nodes = set()
    stack = list(start)
    edges = {}
    while stack:
        node = stack.pop()
        if node in nodes:
            continue
        nodes.add(node)
        p, q = node
        outs = []
        for guard, dst in aut.transitions[q]:
            p2 = succ_pos(p)
            if aut.enabled(guard, word[p2]):
                outs.append((p2, dst))
        edges[node] = outs
        stack.extend(outs)
    # An accepting run exists iff some accepting node lies on a cycle.
    return any(_on_cycle(node, edges) for node in nodes
               if node[1] in aut.accepting)


def _on_cycle(node, edges) -> bool:
    seen = set()
    stack = list(edges.get(node, ()))
    while stack:
        cur = stack.pop()
        if cur == node:
            return True
        if cur in seen:
            continue
        seen.add(cur)
        stack.extend(edges.get(cur, ()))
    return False


def to_hoa(aut: BuchiAutomaton, name: str = "") -> str:
    """HOA v1 text for the automaton (state-based Buchi acceptance)."""
    ap_index = {p: i for i, p in enumerate(aut.atoms)}
    lines = ["HOA: v1"]
    if name:
        lines.append(f'name: "{name}"')
    lines.append(f"States: {aut.n_states}")
    for q in aut.initial:
        lines.append(f"Start: {q}")
    ap_names = " ".join(f'"{p.name or f"p{i}"}"'
                        for i, p in enumerate(aut.atoms))
    lines.append(f"AP: {len(aut.atoms)}" + (f" {ap_names}" if aut.atoms
                                            else ""))
    lines.append("acc-name: Buchi")
    lines.append("Acceptance: 1 Inf(0)")
    lines.append("properties: state-acc trans-labels explicit-labels")
    lines.append("--BODY--")
    for q in range(aut.n_states):
        acc = " {0}" if q in aut.accepting else ""
        lines.append(f"State: {q}{acc}")
        for guard, dst in aut.transitions[q]:
            if guard:
                label = "&".join(
                    ("" if pol else "!") + str(ap_index[p])
                    for p, pol in sorted(
                        guard, key=lambda lit: ap_index[lit[0]]))
            else:
                label = "t"
            lines.append(f"  [{label}] {dst}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"
