"""The sound abstract transformer: interval image of a cell under the
policy's action, widened by the perturbation vector, covered by grid cells.
"""

from __future__ import annotations

from dataclasses import dataclass

from .envs import Environment
from .errors import DimensionMismatch
from .grid import SINK, AbstractState, Box, Granularity, clip_box, concretize, cover


@dataclass(frozen=True)
class Perturbation:
    """Per-dimension bound on how far an actual successor may deviate from
    the nominal one, in state units."""

    epsilon: tuple

    def __post_init__(self):
        if any(e < 0 for e in self.epsilon):
            raise DimensionMismatch("perturbation components must be >= 0")

    @classmethod
    def zero(cls, dim: int) -> "Perturbation":
        return cls((0.0,) * dim)

    @classmethod
    def of(cls, eps, dim: int | None = None) -> "Perturbation":
        eps = tuple(float(e) for e in eps)
        if dim is not None and len(eps) != dim:
            raise DimensionMismatch(
                f"perturbation has {len(eps)} dims, expected {dim}")
        return cls(eps)

    @property
    def is_zero(self) -> bool:
        return all(e == 0.0 for e in self.epsilon)


def expand(V: Box, eps: Perturbation, g: Granularity) -> Box | None:
    """Widen each interval by epsilon on both sides, then clip to the global
    bounds.  Returns None when the clipped box is empty."""
    if len(eps.epsilon) != V.dim:
        raise DimensionMismatch(
            f"perturbation has {len(eps.epsilon)} dims, box has {V.dim}")
    widened = Box(
        tuple(l - e for l, e in zip(V.lower, eps.epsilon)),
        tuple(u + e for u, e in zip(V.upper, eps.epsilon)),
    )
    return clip_box(widened, g)


def successors(a: AbstractState, policy, env: Environment, g: Granularity,
               eps: Perturbation) -> set:
    """All abstract successors of ``a`` under the policy's action, covering
    the perturbed interval image.  The sink absorbs itself and any cell
    whose image leaves the state space entirely."""
    if a.is_sink:
        return {SINK}
    box = concretize(a, g)
    image = env.step_box(box, policy.act(a))
    image = expand(image, eps, g)
    if image is None:
        return {SINK}
    return cover(image, g)
