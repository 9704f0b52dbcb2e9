"""Geometry of the interval abstraction.

The continuous state space is the box ``prod_i [L_i, U_i]``.  Each dimension
is divided into unit intervals of diameter ``d_i``; an abstract state is a
grid-aligned vector of unit intervals, identified by its integer index
vector.  The last cell of a dimension is truncated at ``U_i`` when ``d_i``
does not divide the range, so the cells always tile the exact state space.

Boundary rule: a point on a shared cell face belongs to the higher-index
cell (floor indexing), except that ``s_i = U_i`` belongs to the last cell.
``cover`` returns the minimal grid cover of a box; a box whose edge lies
exactly on a grid line does not bleed into the touching neighbour cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DimensionMismatch,
    EmptyIntersection,
    NonPositiveDiameter,
    OutOfBounds,
    StateSpaceOverflow,
)

_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class Granularity:
    """State-space bounds plus per-dimension unit-interval diameters."""

    lower: tuple
    upper: tuple
    diameters: tuple
    counts: tuple

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def total_states(self) -> int:
        total = 1
        for c in self.counts:
            total *= c
        return total

    def linear_index(self, index) -> int:
        """Row-major linearization of a grid index vector."""
        lin = 0
        for i, c in zip(index, self.counts):
            lin = lin * c + i
        return lin

    def index_of_linear(self, lin: int) -> tuple:
        idx = []
        for c in reversed(self.counts):
            idx.append(lin % c)
            lin //= c
        return tuple(reversed(idx))


@dataclass(frozen=True)
class Box:
    """A vector of closed intervals, in environment units."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise DimensionMismatch("box lower/upper lengths differ")
        for l, u in zip(self.lower, self.upper):
            if l > u:
                raise DimensionMismatch(f"interval [{l}, {u}] is empty")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, s) -> bool:
        return all(l <= x <= u for x, l, u in zip(s, self.lower, self.upper))

    def widths(self) -> tuple:
        return tuple(u - l for l, u in zip(self.lower, self.upper))


@dataclass(frozen=True)
class AbstractState:
    """A grid cell, identified by its index vector.  ``index is None`` marks
    the designated sink state for out-of-domain behaviour."""

    index: tuple | None

    @property
    def is_sink(self) -> bool:
        return self.index is None


SINK = AbstractState(None)


def make_granularity(lower, upper, diameters) -> Granularity:
    """Validate bounds and diameters and compute per-dimension cell counts."""
    lower = tuple(float(x) for x in lower)
    upper = tuple(float(x) for x in upper)
    diameters = tuple(float(x) for x in diameters)
    if not (len(lower) == len(upper) == len(diameters)) or len(lower) == 0:
        raise DimensionMismatch(
            f"expected equal-length non-empty vectors, got lengths "
            f"{len(lower)}/{len(upper)}/{len(diameters)}"
        )
    counts = []
    for i, (lo, hi, d) in enumerate(zip(lower, upper, diameters)):
        if not lo < hi:
            raise DimensionMismatch(f"dimension {i}: lower {lo} >= upper {hi}")
        if not 0.0 < d <= hi - lo:
            raise NonPositiveDiameter(
                f"dimension {i}: diameter {d} not in (0, {hi - lo}]"
            )
        counts.append(int(math.ceil((hi - lo) / d)))
    total = 1
    for c in counts:
        total *= c
    if total > _U64_MAX:
        raise StateSpaceOverflow(
            f"abstract-state count {total} exceeds 64-bit unsigned range"
        )
    return Granularity(lower, upper, diameters, tuple(counts))


def _cell_bounds(g: Granularity, dim: int, idx: int):
    lo = g.lower[dim] + idx * g.diameters[dim]
    hi = g.lower[dim] + (idx + 1) * g.diameters[dim]
    return lo, min(hi, g.upper[dim])


def _index_1d(g: Granularity, dim: int, x: float) -> int:
    """Floor index along one dimension, clamped, with a floating-point
    correction so that the indexed cell always contains ``x``."""
    d = g.diameters[dim]
    idx = int(math.floor((x - g.lower[dim]) / d))
    idx = min(max(idx, 0), g.counts[dim] - 1)
    # Guard against rounding in the division above.
    while idx > 0 and _cell_bounds(g, dim, idx)[0] > x:
        idx -= 1
    while idx < g.counts[dim] - 1 and _cell_bounds(g, dim, idx)[1] < x:
        idx += 1
    return idx


def abstract_of(s, g: Granularity) -> AbstractState:
    """Map an in-bounds concrete state to its abstract state."""
    if len(s) != g.dim:
        raise DimensionMismatch(f"state has {len(s)} dims, grid has {g.dim}")
    index = []
    for i, x in enumerate(s):
        if not g.lower[i] <= x <= g.upper[i]:
            raise OutOfBounds(i, x, g.lower[i], g.upper[i])
        index.append(_index_1d(g, i, x))
    return AbstractState(tuple(index))


def concretize(a: AbstractState, g: Granularity) -> Box:
    """The box of concrete states an abstract state represents."""
    if a.is_sink:
        raise DimensionMismatch("sink state has no concretization")
    lower = []
    upper = []
    for i, idx in enumerate(a.index):
        if not 0 <= idx < g.counts[i]:
            raise OutOfBounds(i, idx, 0, g.counts[i] - 1)
        lo, hi = _cell_bounds(g, i, idx)
        lower.append(lo)
        upper.append(hi)
    return Box(tuple(lower), tuple(upper))


def clip_box(V: Box, g: Granularity) -> Box | None:
    """Intersect a box with the global bounds; None when disjoint."""
    lower = []
    upper = []
    for i in range(g.dim):
        lo = max(V.lower[i], g.lower[i])
        hi = min(V.upper[i], g.upper[i])
        if lo > hi:
            return None
        lower.append(lo)
        upper.append(hi)
    return Box(tuple(lower), tuple(upper))


def cover_ranges(V: Box, g: Granularity):
    """Per-dimension index ranges [lo, hi] of the minimal grid cover of V
    (clipped to the global bounds)."""
    if V.dim != g.dim:
        raise DimensionMismatch(f"box has {V.dim} dims, grid has {g.dim}")
    clipped = clip_box(V, g)
    if clipped is None:
        raise EmptyIntersection("box lies entirely outside the state space")
    ranges = []
    for i in range(g.dim):
        l, u = clipped.lower[i], clipped.upper[i]
        d = g.diameters[i]
        lo = _index_1d(g, i, l)
        hi = int(math.ceil((u - g.lower[i]) / d)) - 1
        hi = min(max(hi, lo), g.counts[i] - 1)
        # Floating-point guard: the covered union must reach u.
        while hi < g.counts[i] - 1 and _cell_bounds(g, i, hi)[1] < u:
            hi += 1
        ranges.append((lo, hi))
    return ranges


def cover(V: Box, g: Granularity) -> set:
    """The minimal set of grid cells whose union contains V."""
    ranges = cover_ranges(V, g)
    cells = {()}
    for lo, hi in ranges:
        cells = {idx + (i,) for idx in cells for i in range(lo, hi + 1)}
    return {AbstractState(idx) for idx in cells}
