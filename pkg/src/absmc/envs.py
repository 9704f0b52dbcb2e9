"""Concrete dynamics of the benchmark systems plus their guaranteed
interval extensions.

Every environment provides ``step`` (deterministic scalar transition with
clamping) and ``step_box`` (interval transition containing the image of
every concrete state in the box).  Interval results are widened by a tiny
outward slack before clipping so that last-ulp rounding of the scalar path
can never escape the box.
"""

from __future__ import annotations

import math
import operator

from . import constants as C
from .errors import DimensionMismatch, UnknownAction, UnknownEnvironment
from .grid import Box
from .intervals import (
    iadd,
    iclip,
    icos,
    idiv,
    imul,
    isin,
    iscale,
    ishift,
    isquare,
    isub,
)


class Environment:
    """Base class: immutable after construction, pure transition functions."""

    name: str
    var_names: tuple
    lower: tuple
    upper: tuple
    actions: tuple
    dt: float
    initial_box: Box

    @property
    def dim(self) -> int:
        return len(self.var_names)

    def action_value(self, a: int) -> float:
        try:
            a = operator.index(a)
        except TypeError:
            raise UnknownAction(f"{self.name}: action index {a!r}") from None
        if not 0 <= a < len(self.actions):
            raise UnknownAction(f"{self.name}: action index {a!r}")
        return self.actions[a]

    def clip(self, s):
        return tuple(
            min(max(x, lo), hi) for x, lo, hi in zip(s, self.lower, self.upper)
        )

    def step(self, s, a: int):
        raise NotImplementedError

    def step_box(self, B: Box, a: int) -> Box:
        raise NotImplementedError

    def reward(self, s, a: int, s_next) -> float:
        raise NotImplementedError

    def done(self, s) -> bool:
        """Episode termination for training only; verification ignores it."""
        return False

    def bounds_box(self) -> Box:
        return Box(self.lower, self.upper)

    def _finish_box(self, intervals) -> Box:
        """Apply outward slack and clip to the global bounds."""
        lower = []
        upper = []
        for (lo, hi), gl, gu in zip(intervals, self.lower, self.upper):
            lo -= C.STEP_BOX_SLACK
            hi += C.STEP_BOX_SLACK
            lower.append(min(max(lo, gl), gu))
            upper.append(min(max(hi, gl), gu))
        return Box(tuple(lower), tuple(upper))


class MountainCar(Environment):
    name = "mountain-car"
    var_names = ("p", "v")
    actions = C.MC_ACTIONS
    dt = 1.0
    lower = (C.MC_POS_BOUNDS[0], C.MC_VEL_BOUNDS[0])
    upper = (C.MC_POS_BOUNDS[1], C.MC_VEL_BOUNDS[1])
    initial_box = Box(*C.MC_INITIAL_BOX)

    def step(self, s, a: int):
        av = self.action_value(a)
        p, v = s
        v2 = v + C.MC_FORCE * av - C.MC_GRAVITY * math.cos(3.0 * p)
        v2 = min(max(v2, self.lower[1]), self.upper[1])
        p2 = min(max(p + v2, self.lower[0]), self.upper[0])
        if p2 <= self.lower[0] and v2 < 0.0:
            v2 = 0.0
        return (p2, v2)

    def step_box(self, B: Box, a: int) -> Box:
        av = self.action_value(a)
        # v' depends on p only through -g*cos(3p); tight via cos extrema.
        gmin, gmax = iscale(icos(iscale((B.lower[0], B.upper[0]), 3.0)),
                            -C.MC_GRAVITY)
        v2 = iclip(
            (B.lower[1] + C.MC_FORCE * av + gmin,
             B.upper[1] + C.MC_FORCE * av + gmax),
            self.lower[1], self.upper[1])
        # p' is monotone in (p, v): exact at the box corners.
        p2 = (self.step((B.lower[0], B.lower[1]), a)[0],
              self.step((B.upper[0], B.upper[1]), a)[0])
        if p2[1] <= self.lower[0] and v2[1] < 0.0:
            # Every state in the box hits the wall moving left: v' = 0.
            v2 = (0.0, 0.0)
        elif p2[0] <= self.lower[0] and v2[0] < 0.0:
            v2 = (v2[0], max(v2[1], 0.0))
        return self._finish_box((p2, v2))

    def reward(self, s, a: int, s_next) -> float:
        return 0.0 if s_next[0] >= C.MC_GOAL_POSITION else C.MC_STEP_REWARD

    def done(self, s) -> bool:
        return s[0] >= C.MC_GOAL_POSITION


class Pendulum(Environment):
    name = "pendulum"
    var_names = ("theta", "omega")
    actions = C.PEND_TORQUES
    dt = C.PEND_DT
    lower = (C.PEND_THETA_BOUNDS[0], C.PEND_OMEGA_BOUNDS[0])
    upper = (C.PEND_THETA_BOUNDS[1], C.PEND_OMEGA_BOUNDS[1])
    initial_box = Box(*C.PEND_INITIAL_BOX)

    _KSIN = 3.0 * C.PEND_G / (2.0 * C.PEND_L)
    _KU = 3.0 / (C.PEND_M * C.PEND_L**2)

    def step(self, s, a: int):
        u = self.action_value(a)
        th, om = s
        om2 = om + (self._KSIN * math.sin(th) + self._KU * u) * self.dt
        om2 = min(max(om2, self.lower[1]), self.upper[1])
        th2 = min(max(th + om2 * self.dt, self.lower[0]), self.upper[0])
        return (th2, om2)

    def step_box(self, B: Box, a: int) -> Box:
        u = self.action_value(a)
        smin, smax = isin((B.lower[0], B.upper[0]))
        om2 = iclip(
            (B.lower[1] + (self._KSIN * smin + self._KU * u) * self.dt,
             B.upper[1] + (self._KSIN * smax + self._KU * u) * self.dt),
            self.lower[1], self.upper[1])
        # theta' is monotone in (theta, omega): 1 + dt^2*Ksin*cos > 0.
        th2 = (self.step((B.lower[0], B.lower[1]), a)[0],
               self.step((B.upper[0], B.upper[1]), a)[0])
        return self._finish_box((th2, om2))

    def reward(self, s, a: int, s_next) -> float:
        u = self.action_value(a)
        th, om = s
        return -(th**2 + C.PEND_REWARD_OMEGA_WEIGHT * om**2
                 + C.PEND_REWARD_TORQUE_WEIGHT * u**2)


class CartPole(Environment):
    name = "cartpole"
    var_names = ("x", "v", "theta", "omega")
    actions = C.CP_FORCES
    dt = C.CP_DT
    lower = (C.CP_X_BOUNDS[0], C.CP_V_BOUNDS[0],
             C.CP_THETA_BOUNDS[0], C.CP_OMEGA_BOUNDS[0])
    upper = (C.CP_X_BOUNDS[1], C.CP_V_BOUNDS[1],
             C.CP_THETA_BOUNDS[1], C.CP_OMEGA_BOUNDS[1])
    initial_box = Box(*C.CP_INITIAL_BOX)

    def _accels(self, th, om, force):
        sin, cos = math.sin(th), math.cos(th)
        temp = (force + C.CP_POLEMASS_LENGTH * om**2 * sin) / C.CP_TOTAL_MASS
        thacc = (C.CP_GRAVITY * sin - cos * temp) / (
            C.CP_HALF_LENGTH
            * (4.0 / 3.0 - C.CP_MASS_POLE * cos**2 / C.CP_TOTAL_MASS))
        xacc = temp - C.CP_POLEMASS_LENGTH * thacc * cos / C.CP_TOTAL_MASS
        return xacc, thacc

    def step(self, s, a: int):
        force = self.action_value(a)
        x, v, th, om = s
        xacc, thacc = self._accels(th, om, force)
        return self.clip((x + self.dt * v,
                          v + self.dt * xacc,
                          th + self.dt * om,
                          om + self.dt * thacc))

    def step_box(self, B: Box, a: int) -> Box:
        force = self.action_value(a)
        X, V, TH, OM = ((B.lower[i], B.upper[i]) for i in range(4))
        sin, cos = isin(TH), icos(TH)
        temp = iscale(
            ishift(iscale(imul(isquare(OM), sin), C.CP_POLEMASS_LENGTH),
                   force),
            1.0 / C.CP_TOTAL_MASS)
        den = iscale(
            ishift(iscale(isquare(cos), -C.CP_MASS_POLE / C.CP_TOTAL_MASS),
                   4.0 / 3.0),
            C.CP_HALF_LENGTH)
        thacc = idiv(isub(iscale(sin, C.CP_GRAVITY), imul(cos, temp)), den)
        xacc = isub(temp, iscale(imul(thacc, cos),
                                 C.CP_POLEMASS_LENGTH / C.CP_TOTAL_MASS))
        return self._finish_box((
            iadd(X, iscale(V, self.dt)),
            iadd(V, iscale(xacc, self.dt)),
            iadd(TH, iscale(OM, self.dt)),
            iadd(OM, iscale(thacc, self.dt)),
        ))

    def reward(self, s, a: int, s_next) -> float:
        return 1.0 if not self.done(s_next) else 0.0

    def done(self, s) -> bool:
        return abs(s[0]) > C.CP_X_FAIL or abs(s[2]) > C.CP_THETA_FAIL


class Platoon(Environment):
    """Configurable discrete-time linear system s' = A s + B u."""

    name = "platoon"

    def __init__(self, config: dict | None = None):
        cfg = dict(config or {})
        n = len(cfg.get("lower", C.PLATOON_LOWER))
        self.var_names = tuple(
            cfg.get("var_names",
                    ("v0", "d1", "dv1", "d2", "dv2", "d3", "dv3")[:n]))
        self.lower = tuple(float(x) for x in cfg.get("lower", C.PLATOON_LOWER))
        self.upper = tuple(float(x) for x in cfg.get("upper", C.PLATOON_UPPER))
        self.actions = tuple(
            float(x) for x in cfg.get("actions", C.PLATOON_ACTIONS))
        self.dt = float(cfg.get("dt", C.PLATOON_DT))
        if "A" in cfg:
            A = [list(map(float, row)) for row in cfg["A"]]
            Bcol = [float(x) for x in cfg["B"]]
        else:
            A, Bcol = self._default_dynamics()
        if len(A) != n or any(len(row) != n for row in A) or len(Bcol) != n:
            raise DimensionMismatch("platoon A/B shapes do not match bounds")
        self.A = A
        self.B = Bcol
        init = cfg.get("initial_box", C.PLATOON_INITIAL_BOX)
        self.initial_box = Box(tuple(init[0]), tuple(init[1]))
        self.gap_dims = tuple(
            i for i, name in enumerate(self.var_names) if name.startswith("d")
            and not name.startswith("dv"))

    @staticmethod
    def _default_dynamics():
        """Chained double integrators: lead velocity plus per-follower gap
        and relative velocity, followers on a PD gap controller."""
        dt, kp, kd = C.PLATOON_DT, C.PLATOON_KP, C.PLATOON_KD
        A = [[0.0] * 7 for _ in range(7)]
        A[0][0] = 1.0
        for k in range(3):
            d, dv = 1 + 2 * k, 2 + 2 * k
            A[d][d] = 1.0
            A[d][dv] = dt
            A[dv][dv] = 1.0 - dt * kd
            A[dv][d] = -dt * kp
            if k > 0:
                prev_d, prev_dv = d - 2, dv - 2
                A[dv][prev_d] = dt * kp
                A[dv][prev_dv] = dt * kd
        Bcol = [dt, 0.0, dt, 0.0, 0.0, 0.0, 0.0]
        return A, Bcol

    def step(self, s, a: int):
        u = self.action_value(a)
        out = []
        for row, b in zip(self.A, self.B):
            out.append(sum(c * x for c, x in zip(row, s)) + b * u)
        return self.clip(out)

    def step_box(self, B: Box, a: int) -> Box:
        u = self.action_value(a)
        intervals = []
        for row, b in zip(self.A, self.B):
            lo = sum(c * (B.lower[j] if c >= 0 else B.upper[j])
                     for j, c in enumerate(row)) + b * u
            hi = sum(c * (B.upper[j] if c >= 0 else B.lower[j])
                     for j, c in enumerate(row)) + b * u
            intervals.append((lo, hi))
        return self._finish_box(intervals)

    def reward(self, s, a: int, s_next) -> float:
        gaps = [s_next[i] for i in self.gap_dims]
        if any(g < 0.0 for g in gaps):
            return C.PLATOON_COLLISION_PENALTY
        return -sum(abs(g - C.PLATOON_GAP_TARGET) for g in gaps)

    def done(self, s) -> bool:
        return any(s[i] < 0.0 for i in self.gap_dims)


_BUILTINS = {
    "mountain-car": MountainCar,
    "pendulum": Pendulum,
    "cartpole": CartPole,
    "platoon": Platoon,
}


def builtin(name: str, platoon_config: dict | None = None) -> Environment:
    """Construct a fully configured benchmark environment by name."""
    if name not in _BUILTINS:
        raise UnknownEnvironment(
            f"unknown environment {name!r}; expected one of "
            f"{sorted(_BUILTINS)}")
    if name == "platoon":
        return Platoon(platoon_config)
    return _BUILTINS[name]()
