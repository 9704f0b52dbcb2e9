"""Command line front end.

Subcommands share one TOML configuration file:

* ``train``     learn a policy, write ``policy.json`` and ``train_log.csv``
* ``verify``    model-check a policy, write ``report.json``; exit code is
  0 Verified, 1 NotVerified, 2 BoundedVerified, 3 error
* ``sweep``     train and verify across a list of granularities, write
  ``sweep.csv``
* ``simulate``  greedy rollout of a policy, write ``trajectory.csv``

Every run writes ``manifest.json`` recording the command, the config hash,
the effective seed and the package version, so results can be reproduced.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .buchi import to_hoa, translate_to_buchi
from .check import check, replay_counterexample
from .envs import builtin
from .errors import AbsmcError, ConfigError
from .grid import make_granularity
from .kripke import build_kripke, to_dot, to_text
from .ltl import Not, atoms_of, parse_ltl, parse_proposition
from .policy import load_policy, save_policy
from .trainer import TrainConfig, rollout, train
from .transformer import Perturbation

EXIT_VERIFIED = 0
EXIT_NOT_VERIFIED = 1
EXIT_BOUNDED = 2
EXIT_ERROR = 3

_OUTCOME_CODES = {
    "Verified": EXIT_VERIFIED,
    "NotVerified": EXIT_NOT_VERIFIED,
    "BoundedVerified": EXIT_BOUNDED,
}


def _load_config(path: str) -> tuple[dict, str]:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    try:
        cfg = tomllib.loads(raw.decode())
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: invalid TOML: {e}") from None
    return cfg, hashlib.sha256(raw).hexdigest()


def _build_env(cfg: dict):
    env_cfg = cfg.get("env")
    if not env_cfg or "name" not in env_cfg:
        raise ConfigError("config needs an [env] table with a 'name' key")
    return builtin(env_cfg["name"], env_cfg.get("platoon"))


def _build_granularity(env, cfg: dict, diameters=None):
    absn = cfg.get("abstraction", {})
    d = diameters if diameters is not None else absn.get("granularity")
    if d is None:
        raise ConfigError("config needs [abstraction].granularity")
    return make_granularity(env.lower, env.upper, d)


def _perturbation(env, cfg: dict, epsilon=None):
    absn = cfg.get("abstraction", {})
    eps = epsilon if epsilon is not None else absn.get("epsilon")
    if eps is None:
        return Perturbation.zero(env.dim)
    return Perturbation.of(eps, env.dim)


def _train_config(cfg: dict, seed_override) -> TrainConfig:
    fields = dict(cfg.get("train", {}))
    if seed_override is not None:
        fields["seed"] = seed_override
    unknown = set(fields) - set(TrainConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown [train] keys: {sorted(unknown)}")
    return TrainConfig(**fields)


def _declared_props(env, cfg: dict) -> dict:
    out = {}
    for name, text in cfg.get("props", {}).items():
        out[name] = parse_proposition(name, str(text), env.var_names)
    return out


def _formula(env, cfg: dict):
    verify_cfg = cfg.get("verify", {})
    text = verify_cfg.get("formula")
    if not text:
        raise ConfigError("config needs [verify].formula")
    declared = _declared_props(env, cfg)
    return parse_ltl(text, env.var_names, declared), text


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, cfg_hash: str, args,
                    extra=None) -> None:
    doc = {
        "tool": "absmc",
        "version": __version__,
        "command": command,
        "config": str(args.config),
        "config_sha256": cfg_hash,
        "seed": args.seed,
        "overrides": {
            "policy": getattr(args, "policy", None),
            "threshold": getattr(args, "threshold", None),
        },
    }
    if extra:
        doc.update(extra)
    with open(out / "manifest.json", "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _require_policy(args, cfg: dict, g):
    path = args.policy or cfg.get("verify", {}).get("policy")
    if not path:
        raise ConfigError(
            "a policy is required: pass --policy or set [verify].policy")
    policy = load_policy(path)
    if policy.granularity != g:
        raise ConfigError(
            f"policy granularity {policy.granularity.diameters} does not "
            f"match config granularity {g.diameters}")
    return policy


# ----------------------------------------------------------------- commands

def cmd_train(args) -> int:
    cfg, cfg_hash = _load_config(args.config)
    env = _build_env(cfg)
    g = _build_granularity(env, cfg)
    tc = _train_config(cfg, args.seed)
    policy, log, _ = train(env, g, tc)
    out = _outdir(args)
    save_policy(policy, out / "policy.json")
    with open(out / "train_log.csv", "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["episode", "steps", "reward", "epsilon"])
        writer.writeheader()
        writer.writerows(log)
    _write_manifest(out, "train", cfg_hash, args,
                    {"episodes": tc.episodes, "train_seed": tc.seed,
                     "table_size": len(policy.table)})
    print(f"trained {env.name} for {tc.episodes} episodes "
          f"({len(policy.table)} visited cells); wrote {out / 'policy.json'}")
    return 0


def _verify_once(env, g, eps, policy, formula, threshold):
    props = sorted(atoms_of(formula),
                   key=lambda p: (p.name, p.coeffs, p.cmp, p.threshold))
    K = build_kripke(env, g, policy, env.initial_box, eps, props, threshold)
    return K, check(K, formula)


def cmd_verify(args) -> int:
    cfg, cfg_hash = _load_config(args.config)
    env = _build_env(cfg)
    g = _build_granularity(env, cfg)
    eps = _perturbation(env, cfg)
    formula, formula_text = _formula(env, cfg)
    threshold = args.threshold or cfg.get("verify", {}).get(
        "threshold", 1_000_000)
    policy = _require_policy(args, cfg, g)
    K, verdict = _verify_once(env, g, eps, policy, formula, threshold)

    out = _outdir(args)
    report = {
        "environment": env.name,
        "formula": formula_text,
        "granularity": list(g.diameters),
        "epsilon": list(eps.epsilon),
        "threshold": threshold,
        "outcome": verdict.outcome,
        "exhausted": verdict.exhausted,
        "kripke_states": verdict.kripke_states,
        "kripke_edges": verdict.kripke_edges,
        "product_states": verdict.product_states,
        "build_seconds": K.build_seconds,
        "check_seconds": verdict.seconds,
    }
    if verdict.counterexample is not None:
        cex = verdict.counterexample
        replay = replay_counterexample(K, env, policy, cex)
        report["counterexample"] = {
            "stem": [list(s.index) if not s.is_sink else "sink"
                     for s in cex.stem_states(K)],
            "cycle": [list(s.index) if not s.is_sink else "sink"
                      for s in cex.cycle_states(K)],
            "replay": {k: v for k, v in replay.items() if k != "trajectory"},
        }
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")
    if args.export_kripke:
        (out / "kripke.txt").write_text(to_text(K))
        (out / "kripke.dot").write_text(to_dot(K))
    if args.export_automaton:
        aut = translate_to_buchi(Not(formula))
        (out / "automaton.hoa").write_text(
            to_hoa(aut, name=f"neg of {formula_text}"))
    _write_manifest(out, "verify", cfg_hash, args,
                    {"outcome": verdict.outcome})
    print(f"{verdict.outcome}: {env.name}, {formula_text!r}, "
          f"{verdict.kripke_states} states explored"
          + ("" if verdict.exhausted else f" (threshold {threshold})"))
    return _OUTCOME_CODES[verdict.outcome]


def cmd_sweep(args) -> int:
    cfg, cfg_hash = _load_config(args.config)
    env = _build_env(cfg)
    sweep_cfg = cfg.get("sweep", {})
    grans = sweep_cfg.get("granularities")
    if not grans:
        raise ConfigError("config needs [sweep].granularities")
    epsilons = sweep_cfg.get("epsilons")
    if epsilons is not None and len(epsilons) != len(grans):
        raise ConfigError("[sweep].epsilons must pair up with granularities")
    formula, formula_text = _formula(env, cfg)
    threshold = args.threshold or cfg.get("verify", {}).get(
        "threshold", 1_000_000)
    tc = _train_config(cfg, args.seed)

    out = _outdir(args)
    rows = []
    for i, d in enumerate(grans):
        g = make_granularity(env.lower, env.upper, d)
        eps = _perturbation(env, cfg,
                            epsilons[i] if epsilons is not None else None)
        policy, _, _ = train(env, g, tc)
        K, verdict = _verify_once(env, g, eps, policy, formula, threshold)
        rows.append({
            "granularity": " ".join(map(str, d)),
            "epsilon": " ".join(map(str, eps.epsilon)),
            "states": verdict.kripke_states,
            "edges": verdict.kripke_edges,
            "exhausted": verdict.exhausted,
            "outcome": verdict.outcome,
            "build_seconds": round(K.build_seconds, 4),
            "check_seconds": round(verdict.seconds, 4),
        })
        print(f"[{i + 1}/{len(grans)}] d={d} -> {verdict.outcome} "
              f"({verdict.kripke_states} states)")
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    _write_manifest(out, "sweep", cfg_hash, args, {"rows": len(rows)})
    return 0


def cmd_simulate(args) -> int:
    cfg, cfg_hash = _load_config(args.config)
    env = _build_env(cfg)
    g = _build_granularity(env, cfg)
    policy = _require_policy(args, cfg, g)
    sim_cfg = cfg.get("simulate", {})
    steps = int(sim_cfg.get("steps", 500))
    start = sim_cfg.get("start")
    if start is None:
        b = env.initial_box
        start = [0.5 * (l + u) for l, u in zip(b.lower, b.upper)]
    if len(start) != env.dim:
        raise ConfigError(f"[simulate].start must have {env.dim} entries")

    traj, final = rollout(policy, env, tuple(map(float, start)), steps)
    out = _outdir(args)
    with open(out / "trajectory.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", *env.var_names, "action"])
        for t, (s, a) in enumerate(traj):
            writer.writerow([t, *s, a])
        writer.writerow([len(traj), *final, ""])
    _write_manifest(out, "simulate", cfg_hash, args, {"steps": steps})
    print(f"simulated {len(traj)} steps of {env.name}; "
          f"final state {tuple(round(x, 6) for x in final)}")
    return 0


# --------------------------------------------------------------------- main

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="absmc",
        description="Train and verify control policies over interval "
                    "abstractions.")
    p.add_argument("--version", action="version",
                   version=f"absmc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("-c", "--config", required=True,
                        help="TOML configuration file")
        sp.add_argument("--out", default=".",
                        help="output directory (default: current)")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the training seed")

    sp = sub.add_parser("train", help="learn a policy by Q-learning")
    common(sp)
    sp.set_defaults(fn=cmd_train)

    sp = sub.add_parser("verify", help="model-check a trained policy")
    common(sp)
    sp.add_argument("--policy", default=None, help="policy JSON file")
    sp.add_argument("--threshold", type=int, default=None,
                    help="override the state exploration threshold")
    sp.add_argument("--export-kripke", action="store_true",
                    help="also write kripke.txt and kripke.dot")
    sp.add_argument("--export-automaton", action="store_true",
                    help="also write the negated property as automaton.hoa")
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("sweep",
                        help="train and verify across granularities")
    common(sp)
    sp.add_argument("--threshold", type=int, default=None,
                    help="override the state exploration threshold")
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("simulate", help="greedy rollout of a policy")
    common(sp)
    sp.add_argument("--policy", default=None, help="policy JSON file")
    sp.set_defaults(fn=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except AbsmcError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
