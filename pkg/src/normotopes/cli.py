"""Command-line entry point: reach, ilqr, verify, and bench subcommands.

Runs are configured by a JSON file and/or flags (flags win), validated
before any compute, and written into a per-run output directory holding a
config snapshot, trajectory JSON, and CSV logs, so plotting and
verification read files instead of recomputing.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys as _sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ilqr as ilqr_mod
from .dynamics import VectorField, ltv, robot_arm, rotation_ltv, vanderpol
from .embedding import (
    EmbeddingState,
    HypercontrolSchedule,
    Trajectory,
    simulate,
)
from .errors import NormotopeError
from .intervals import IntervalVector
from .norms import NormKind
from .sets import Normotope
from .verify import ltv_exactness, mc_containment, pmp_check

__all__ = ["main", "RunConfig", "build_parser", "PRESETS"]


_CONFIG_KEYS = {
    "system", "system_params", "kind", "initial", "t0", "tf", "h",
    "policy", "corner_cap", "disturbance", "ilqr", "seed", "out_dir",
}
_INITIAL_KEYS = {"center", "shape", "P", "radius_scale", "offset"}
_ILQR_KEYS = {"gamma", "phases", "phi_max", "max_iters", "stall_eps",
              "stall_window", "snapshot_iters"}


def _spd_sqrt(p: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(p)
    if np.any(w <= 0):
        raise ValueError("P must be symmetric positive definite")
    return v @ np.diag(np.sqrt(w)) @ v.T


@dataclass
class RunConfig:
    """Validated run description; see PRESETS for the shipped defaults."""

    system: str
    kind: str = "l2"
    system_params: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    t0: float = 0.0
    tf: float = 1.0
    h: float = 0.01
    policy: str = "adjoint"
    corner_cap: int = 256
    disturbance: dict | None = None
    ilqr: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str = "runs/out"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        if self.system not in PRESETS:
            raise ValueError(
                f"unknown system {self.system!r}; choose from {sorted(PRESETS)}")
        NormKind.parse(self.kind)
        if self.policy not in ("adjoint", "raw"):
            raise ValueError(f"unknown policy {self.policy!r}")
        if not (self.h > 0 and self.tf > self.t0):
            raise ValueError("need h > 0 and tf > t0")
        unknown = set(self.initial) - _INITIAL_KEYS
        if unknown:
            raise ValueError(f"unknown initial-set keys: {sorted(unknown)}")
        unknown = set(self.ilqr) - _ILQR_KEYS
        if unknown:
            raise ValueError(f"unknown ilqr keys: {sorted(unknown)}")
        if self.disturbance is not None:
            if set(self.disturbance) - {"lo", "hi"}:
                raise ValueError("disturbance needs exactly lo and hi")

    def build_system(self) -> VectorField:
        return PRESETS[self.system]["factory"](self.system_params)

    def build_initial(self) -> Normotope:
        spec = dict(PRESETS[self.system]["initial"])
        spec.update(self.initial)
        center = np.asarray(spec["center"], dtype=float)
        offset = float(spec.get("offset", 1.0))
        if "shape" in spec:
            shape = np.asarray(spec["shape"], dtype=float)
        else:
            p = np.asarray(spec.get("P", np.eye(center.shape[0])), dtype=float)
            shape = _spd_sqrt(p) / float(spec.get("radius_scale", 0.1))
        return Normotope(NormKind.parse(self.kind), center, shape, offset)

    def build_w_box(self) -> IntervalVector:
        if self.disturbance is None:
            return IntervalVector.empty()
        return IntervalVector(np.asarray(self.disturbance["lo"], dtype=float),
                              np.asarray(self.disturbance["hi"], dtype=float))

    def build_ilqr(self) -> ilqr_mod.IlqrConfig:
        spec = dict(PRESETS[self.system]["ilqr"])
        spec.update(self.ilqr)
        return ilqr_mod.IlqrConfig(
            gamma=float(spec.get("gamma", 1.0)),
            phases=[(int(b), float(r)) for b, r in spec["phases"]],
            phi_max=float(spec.get("phi_max", math.inf)),
            max_iters=spec.get("max_iters"),
            stall_eps=float(spec.get("stall_eps", 1e-4)),
            stall_window=int(spec.get("stall_window", 50)),
            corner_cap=self.corner_cap,
            snapshot_iters=tuple(spec.get("snapshot_iters", ())),
        )

    def to_json(self) -> dict:
        return {
            "system": self.system,
            "system_params": self.system_params,
            "kind": self.kind,
            "initial": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                        for k, v in self.initial.items()},
            "t0": self.t0, "tf": self.tf, "h": self.h,
            "policy": self.policy,
            "corner_cap": self.corner_cap,
            "disturbance": self.disturbance,
            "ilqr": self.ilqr,
            "seed": self.seed,
            "out_dir": str(self.out_dir),
        }


PRESETS = {
    "robot-arm": {
        "factory": lambda params: robot_arm(**params),
        "initial": {"center": [1.5, 0.75, 0.0, 0.0], "P": np.eye(4).tolist(),
                    "radius_scale": 0.1, "offset": 1.0},
        "tf": 10.0,
        "ilqr": {"gamma": 1.0, "phases": [[20, 20.0]], "phi_max": -0.1},
    },
    "vanderpol": {
        "factory": lambda params: vanderpol(**params),
        "initial": {"center": [-2.0, 0.0],
                    "shape": (80.0 * np.eye(2)).tolist(), "offset": 1.0},
        "tf": 7.0,
        "ilqr": {"gamma": 0.5, "phases": [[750, 0.5], [750, 5.0]],
                 "phi_max": -1.75},
    },
    "ltv-rotation": {
        "factory": lambda params: rotation_ltv(),
        "initial": {"center": [0.0, 0.0], "shape": np.eye(2).tolist(),
                    "offset": 1.0},
        "tf": 2.0 * math.pi,
        "ilqr": {"gamma": 1.0, "phases": [[10, 1.0]], "phi_max": 10.0},
    },
}


def _write_json(path: Path, data: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_phi_csv(path: Path, traj: Trajectory):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "phi"])
        for t, phi in zip(traj.times, traj.phi):
            writer.writerow([repr(float(t)), repr(float(phi))])


def _write_cost_csv(path: Path, log: ilqr_mod.IterateLog):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "t_end", "phi_terminal",
                         "cumulative_seconds"])
        for row in log.csv_rows():
            writer.writerow([row[0], repr(float(row[1])), repr(float(row[2])),
                             repr(float(row[3]))])


def _load_config(args) -> RunConfig:
    data = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        data = json.loads(path.read_text())
    overrides = {
        "system": args.system, "kind": args.kind, "t0": args.t0,
        "tf": args.tf, "h": args.h, "seed": args.seed, "out_dir": args.out,
    }
    for key, val in overrides.items():
        if val is not None:
            data[key] = val
    if "system" not in data:
        raise ValueError("no system selected (use --system or a config file)")
    data.setdefault("tf", PRESETS[data["system"]]["tf"])
    ilqr_over = {}
    if getattr(args, "gamma", None) is not None:
        ilqr_over["gamma"] = args.gamma
    if getattr(args, "phi_max", None) is not None:
        ilqr_over["phi_max"] = args.phi_max
    if getattr(args, "max_iters", None) is not None:
        ilqr_over["max_iters"] = args.max_iters
    if ilqr_over:
        data["ilqr"] = {**data.get("ilqr", {}), **ilqr_over}
    return RunConfig.from_dict(data)


def _run_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "config.json", cfg.to_json())
    return out


def cmd_reach(args) -> int:
    cfg = _load_config(args)
    out = _run_dir(cfg)
    sys_ = cfg.build_system()
    n0 = cfg.build_initial()
    phi_max = cfg.build_ilqr().phi_max if args.use_phi_max else math.inf
    sched = HypercontrolSchedule.zeros(cfg.t0, cfg.tf, cfg.h, sys_.n_x)
    traj = simulate(sys_, EmbeddingState.from_normotope(n0), sched,
                    cfg.policy, cfg.build_w_box(), n0.kind, cfg.h, cfg.t0,
                    cfg.tf, phi_max, cfg.corner_cap)
    _write_json(out / "trajectory.json", traj.to_json())
    _write_phi_csv(out / "phi.csv", traj)
    _write_json(out / "initial_set.json", n0.to_json())
    status = "truncated" if traj.truncated else "complete"
    print(f"reach: {cfg.system} tube {status} at t_end={traj.t_end:.4f} "
          f"(phi={traj.phi[-1]:.4f}) -> {out}")
    return 0


def cmd_ilqr(args) -> int:
    cfg = _load_config(args)
    out = _run_dir(cfg)
    sys_ = cfg.build_system()
    n0 = cfg.build_initial()
    icfg = cfg.build_ilqr()
    log = ilqr_mod.run(icfg, sys_, EmbeddingState.from_normotope(n0),
                       n0.kind, cfg.t0, cfg.tf, cfg.h)
    _write_json(out / "iterates.json", log.to_json())
    _write_cost_csv(out / "cost.csv", log)
    _write_json(out / "trajectory.json", log.best_trajectory.to_json())
    _write_phi_csv(out / "phi.csv", log.best_trajectory)
    _write_json(out / "initial_set.json", n0.to_json())
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    for index, traj in sorted(log.snapshots.items()):
        _write_json(snap_dir / f"traj_iter_{index:04d}.json", traj.to_json())
        _write_phi_csv(snap_dir / f"phi_iter_{index:04d}.csv", traj)
    best = log.best_trajectory
    print(f"ilqr: {cfg.system} best iterate {log.best_index}/"
          f"{log.records[-1].index} t_end={best.t_end:.4f} "
          f"phi={best.phi[-1]:.4f} -> {out}")
    return 0


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    traj_path = Path(args.trajectory) if args.trajectory else \
        Path(cfg.out_dir) / "trajectory.json"
    if not traj_path.exists():
        raise FileNotFoundError(f"trajectory file not found: {traj_path}")
    traj = Trajectory.from_json(json.loads(traj_path.read_text()))
    sys_ = cfg.build_system()
    n0 = cfg.build_initial()
    if traj.n != sys_.n_x:
        raise ValueError(
            f"trajectory dim {traj.n} does not match system {cfg.system}")
    report = mc_containment(sys_, n0, traj, cfg.build_w_box(),
                            n_samples=args.samples, seed=cfg.seed,
                            tol=args.tol)
    results = {"containment": report.to_json()}
    print(f"verify: {report.samples} samples, {report.violations} violations,"
          f" worst margin {report.worst_margin:.3e}")
    if cfg.system == "ltv-rotation":
        ex = ltv_exactness(rotation_ltv(), n0, cfg.tf, cfg.h, seed=cfg.seed)
        results["ltv_exactness"] = {
            "offset_deviation": ex.offset_deviation,
            "max_boundary_deviation": ex.max_boundary_deviation,
        }
        print(f"verify: offset deviation {ex.offset_deviation:.3e}, boundary "
              f"deviation {ex.max_boundary_deviation:.3e}")
        if n0.kind is NormKind.L2:
            pr = pmp_check(rotation_ltv(), n0, cfg.tf, cfg.h, seed=cfg.seed)
            results["pmp"] = pr.to_json()
            print(f"verify: costate residual {pr.max_costate_residual:.3e}, "
                  f"min gap {pr.min_gap:.3e}")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "verify.json", results)
    return 0 if report.ok else 1


def cmd_bench(args) -> int:
    base = Path(args.out or "runs/bench")
    jobs = [("robot-arm", {}), ("vanderpol", {})]
    status = 0
    for system, extra in jobs:
        ns = argparse.Namespace(
            config=None, system=system, kind=None, t0=None, tf=None, h=None,
            seed=args.seed, out=str(base / system), gamma=None, phi_max=None,
            max_iters=args.max_iters, use_phi_max=True,
            trajectory=None, samples=args.samples, tol=1e-6)
        status |= cmd_ilqr(ns)
        ns.trajectory = str(base / system / "trajectory.json")
        status |= cmd_verify(ns)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normotopes",
        description="Guaranteed reachable tubes for nonlinear systems as "
                    "norm-ball sets, with optional tube-shrinking synthesis.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--system", choices=sorted(PRESETS),
                       help="benchmark system")
        p.add_argument("--kind", help="norm kind: l1, l2, or linf")
        p.add_argument("--t0", type=float)
        p.add_argument("--tf", type=float)
        p.add_argument("--h", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output run directory")

    p_reach = sub.add_parser("reach", help="single embedding rollout with "
                                           "zero feed-forward")
    add_common(p_reach)
    p_reach.add_argument("--use-phi-max", action="store_true",
                         help="apply the preset volume threshold")
    p_reach.set_defaults(func=cmd_reach, gamma=None, phi_max=None,
                         max_iters=None)

    p_ilqr = sub.add_parser("ilqr", help="tube-shrinking synthesis loop")
    add_common(p_ilqr)
    p_ilqr.add_argument("--gamma", type=float)
    p_ilqr.add_argument("--phi-max", dest="phi_max", type=float)
    p_ilqr.add_argument("--max-iters", dest="max_iters", type=int)
    p_ilqr.set_defaults(func=cmd_ilqr, use_phi_max=True)

    p_verify = sub.add_parser("verify", help="Monte Carlo containment check "
                                             "of a stored tube")
    add_common(p_verify)
    p_verify.add_argument("--trajectory", help="trajectory JSON to check")
    p_verify.add_argument("--samples", type=int, default=1000)
    p_verify.add_argument("--tol", type=float, default=1e-6)
    p_verify.set_defaults(func=cmd_verify, gamma=None, phi_max=None,
                          max_iters=None)

    p_bench = sub.add_parser("bench", help="run both benchmark presets "
                                           "end to end and verify them")
    p_bench.add_argument("--out", help="base output directory")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--samples", type=int, default=1000)
    p_bench.add_argument("--max-iters", dest="max_iters", type=int,
                         help="cap iterations of both presets (smoke runs)")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NormotopeError, ValueError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        parser.print_usage(_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
