"""absmc: train control policies over interval abstractions of continuous
systems and model-check the closed abstract loop against LTL properties."""

__version__ = "0.1.0"

from .buchi import BuchiAutomaton, accepts_lasso, to_hoa, translate_to_buchi
from .check import Counterexample, Verdict, check, replay_counterexample
from .envs import CartPole, Environment, MountainCar, Pendulum, Platoon, \
    builtin
from .errors import AbsmcError
from .grid import (
    SINK,
    AbstractState,
    Box,
    Granularity,
    abstract_of,
    concretize,
    cover,
    make_granularity,
)
from .kripke import KripkeStructure, build_kripke, to_dot, to_text
from .ltl import AtomicProposition, Formula, Tri, nnf, parse_ltl, \
    parse_proposition
from .policy import MlpPolicy, TabularPolicy, load_policy, save_policy
from .trainer import QTable, TrainConfig, evaluate, fit_mlp, rollout, train
from .transformer import Perturbation, successors

__all__ = [
    "AbsmcError", "AbstractState", "AtomicProposition", "Box",
    "BuchiAutomaton", "CartPole", "Counterexample", "Environment", "Formula",
    "Granularity", "KripkeStructure", "MlpPolicy", "MountainCar", "Pendulum",
    "Platoon", "Perturbation", "QTable", "SINK", "TabularPolicy",
    "TrainConfig", "Tri", "Verdict", "abstract_of", "accepts_lasso",
    "build_kripke", "builtin", "check", "concretize", "cover", "evaluate",
    "fit_mlp", "load_policy", "make_granularity", "nnf", "parse_ltl",
    "parse_proposition", "replay_counterexample", "rollout", "save_policy",
    "successors", "to_dot", "to_hoa", "to_text", "train",
    "translate_to_buchi",
]
