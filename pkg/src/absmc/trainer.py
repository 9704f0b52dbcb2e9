"""Abstraction-based Q-learning: an episodic learner that only ever sees
concrete states through the abstraction map, with a FIFO replay buffer,
batched tabular Bellman updates and a linearly decaying exploration rate.

Everything is driven by a single seeded generator, so identical
configurations produce bit-identical policies and logs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .envs import Environment
from .errors import ConfigError
from .grid import AbstractState, Granularity, abstract_of
from .policy import MlpPolicy, TabularPolicy


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 500
    horizon: int = 1000
    alpha: float = 0.5
    gamma: float = 0.995
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_steps: int = 100_000
    buffer_capacity: int = 20_000
    batch_size: int = 16
    seed: int = 0
    default_action: int = 0

    def validate(self):
        if self.episodes < 0 or self.horizon < 1:
            raise ConfigError("episodes must be >= 0 and horizon >= 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must be in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError("gamma must be in [0, 1)")
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ConfigError("need 0 <= eps_end <= eps_start <= 1")
        if self.eps_decay_steps < 1 or self.buffer_capacity < 1 \
                or self.batch_size < 1:
            raise ConfigError("decay steps, capacity and batch must be >= 1")


@dataclass(frozen=True)
class Transition:
    s: AbstractState
    a: int
    r: float
    s_next: AbstractState
    done: bool


class QTable:
    """Sparse action-value table keyed by abstract-state linear index."""

    def __init__(self, granularity: Granularity, n_actions: int):
        self.granularity = granularity
        self.n_actions = n_actions
        self.values = {}  # linear index -> np.ndarray of action values
        self.visits = {}  # linear index -> number of recorded transitions

    def row(self, a: AbstractState) -> np.ndarray:
        key = self.granularity.linear_index(a.index)
        row = self.values.get(key)
        if row is None:
            row = np.zeros(self.n_actions)
            self.values[key] = row
        return row

    def visit(self, a: AbstractState) -> None:
        key = self.granularity.linear_index(a.index)
        self.visits[key] = self.visits.get(key, 0) + 1

    def greedy_policy(self, default_action: int = 0) -> TabularPolicy:
        table = {k: int(np.argmax(v)) for k, v in self.values.items()}
        return TabularPolicy(self.granularity, table, default_action)


def q_update(q: QTable, t: Transition, alpha: float, gamma: float) -> QTable:
    """Tabular Bellman update; touches only the (s, a) entry."""
    target = t.r
    if not t.done:
        target += gamma * float(np.max(q.row(t.s_next)))
    row = q.row(t.s)
    row[t.a] += alpha * (target - row[t.a])
    return q


def _epsilon(cfg: TrainConfig, global_step: int) -> float:
    frac = min(global_step / cfg.eps_decay_steps, 1.0)
    return cfg.eps_start + frac * (cfg.eps_end - cfg.eps_start)


def _sample_initial(env: Environment, rng) -> tuple:
    lo = np.asarray(env.initial_box.lower)
    hi = np.asarray(env.initial_box.upper)
    return tuple(lo + rng.random(len(lo)) * (hi - lo))


def train(env: Environment, g: Granularity, cfg: TrainConfig):
    """Run episodic abstraction-based Q-learning.

    Returns ``(policy, log)`` where the log has one dict per episode with
    keys episode, steps, reward and epsilon.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    n_actions = len(env.actions)
    q = QTable(g, n_actions)
    buffer = deque(maxlen=cfg.buffer_capacity)
    log = []
    global_step = 0

    for episode in range(cfg.episodes):
        s = _sample_initial(env, rng)
        abs_s = abstract_of(s, g)
        total_reward = 0.0
        steps = 0
        for _ in range(cfg.horizon):
            eps = _epsilon(cfg, global_step)
            if rng.random() < eps:
                a = int(rng.integers(n_actions))
            else:
                a = int(np.argmax(q.row(abs_s)))
            s_next = env.step(s, a)
            r = env.reward(s, a, s_next)
            abs_next = abstract_of(s_next, g)
            done = env.done(s_next)
            buffer.append(Transition(abs_s, a, r, abs_next, done))
            q.visit(abs_s)
            if len(buffer) >= cfg.batch_size:
                picks = rng.integers(len(buffer), size=cfg.batch_size)
                for i in picks:
                    q_update(q, buffer[int(i)], cfg.alpha, cfg.gamma)
            total_reward += r
            global_step += 1
            steps += 1
            s, abs_s = s_next, abs_next
            if done:
                break
        log.append({
            "episode": episode,
            "steps": steps,
            "reward": total_reward,
            "epsilon": _epsilon(cfg, global_step),
        })
    policy = q.greedy_policy(cfg.default_action)
    return policy, log, q


def evaluate(policy, env: Environment, episodes: int, seed: int,
             horizon: int = 1000):
    """Greedy rollouts from sampled initial states; returns
    ``(mean, per_episode_rewards)``."""
    if episodes < 1:
        raise ConfigError("episodes must be >= 1")
    rng = np.random.default_rng(seed)
    g = policy.granularity
    rewards = []
    for _ in range(episodes):
        s = _sample_initial(env, rng)
        total = 0.0
        for _ in range(horizon):
            a = policy.act(abstract_of(s, g))
            s_next = env.step(s, a)
            total += env.reward(s, a, s_next)
            s = s_next
            if env.done(s):
                break
        rewards.append(total)
    return float(np.mean(rewards)), rewards


def rollout(policy, env: Environment, s0, steps: int):
    """Greedy trajectory from a fixed start: list of (state, action) pairs
    plus the final state."""
    g = policy.granularity
    traj = []
    s = tuple(s0)
    for _ in range(steps):
        a = policy.act(abstract_of(s, g))
        traj.append((s, a))
        s = env.step(s, a)
    return traj, s


def fit_mlp(q: QTable, hidden: int = 32, epochs: int = 200, lr: float = 1e-2,
            seed: int = 0, default_action: int = 0,
            min_visits: int = 0) -> MlpPolicy:
    """Fit a small ReLU network to the learned Q-table by supervised
    regression on the cells' interval endpoints (input arity 2n).

    Cells visited fewer than ``min_visits`` times can be dropped to ignore
    entries the learner barely estimated.  By default everything is kept:
    even poorly estimated entries carry the coarse shape of the value
    landscape, which regularizes the fitted decision boundary.
    """
    g = q.granularity
    keys = sorted(k for k in q.values
                  if q.visits.get(k, 0) >= min_visits)
    if not keys:
        raise ConfigError("cannot fit an MLP to an empty Q-table")
    xs = []
    ys = []
    tmp = MlpPolicy(g, (), default_action)  # endpoint helper only
    for k in keys:
        cell = AbstractState(g.index_of_linear(k))
        xs.append(tmp.endpoints(cell))
        ys.append(q.values[k])
    X = np.stack(xs)
    Y = np.stack(ys)
    mu, sd = X.mean(axis=0), X.std(axis=0) + 1e-9
    Xn = (X - mu) / sd

    rng = np.random.default_rng(seed)
    w1 = rng.normal(0.0, np.sqrt(2.0 / Xn.shape[1]), (hidden, Xn.shape[1]))
    b1 = np.zeros(hidden)
    w2 = rng.normal(0.0, np.sqrt(2.0 / hidden), (Y.shape[1], hidden))
    b2 = np.zeros(Y.shape[1])
    n = Xn.shape[0]
    for _ in range(epochs):
        h = np.maximum(Xn @ w1.T + b1, 0.0)
        pred = h @ w2.T + b2
        grad = 2.0 * (pred - Y) / n
        gw2 = grad.T @ h
        gb2 = grad.sum(axis=0)
        gh = (grad @ w2) * (h > 0)
        gw1 = gh.T @ Xn
        gb1 = gh.sum(axis=0)
        w1 -= lr * gw1
        b1 -= lr * gb1
        w2 -= lr * gw2
        b2 -= lr * gb2

    # Fold the input normalization into the first layer.
    w1_folded = w1 / sd
    b1_folded = b1 - (w1 * (mu / sd)).sum(axis=1)
    return MlpPolicy(
        g,
        ((w1_folded, b1_folded, "relu"), (w2, b2, "identity")),
        default_action,
    )
