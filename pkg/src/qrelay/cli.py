"""Batch command-line interface.

Commands: ``rates``, ``optimize``, ``feasible``, ``sweep``, ``fqsw``. A JSON
config file supplies the run; command-line flags override it. Exit codes: 0 on
success, 2 on configuration errors, 3 on numeric-domain errors.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import CHANNEL_KINDS, RelayChannel, relay_from_spec
from .errors import NumericDomainError, ParameterError, QRelayError
from .fqsw import DecouplingConfig, decoupled_state, ghz_state, monte_carlo
from .linalg import (
    PureState,
    SubsystemShape,
    basis_state,
    maximally_entangled,
    permute,
    random_pure_state,
    tensor,
)
from .optimize import FAMILIES, OBJECTIVES, OptimizerConfig, maximize
from .rates import (
    RatePoint,
    RateReport,
    check_rate_point,
    decoupling_exponents,
    evaluate_state_rates,
    superdense_classical_rate,
)

COMMANDS = ("rates", "optimize", "feasible", "sweep", "fqsw")
SWEEP_COLUMNS = ("param_value", "h_a1_given_d", "coh_a1_E", "coh_a1_B", "mi_a1_B", "mi_a1_D",
                 "q_df", "q_ea_df")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(QRelayError):
    """Missing or malformed run configuration."""


@dataclass
class RunConfig:
    command: str | None = None
    channel: dict | None = None
    state: dict = field(default_factory=lambda: {"family": "maxent_a1a"})
    rate_point: dict = field(default_factory=dict)
    report: dict | None = None
    delta: float = 0.0
    optimizer: dict = field(default_factory=dict)
    objective: str = "df"
    family: str = "general"
    sweep: dict | None = None
    fqsw: dict = field(default_factory=dict)
    out: str | None = None
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**copy.deepcopy(d))


# -- building blocks -----------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{float(x):#.15g}"


def _direct_link_spec(kind: str, params: dict) -> dict:
    d = int(params.get("d", 2))
    return {
        "kind": "interaction",
        "params": {
            "unitary": "swap",
            "noise_B": {"kind": kind, "params": params},
            "noise_E": {"kind": "identity", "params": {"d": d}},
        },
    }


def build_channel(spec: dict | None) -> RelayChannel:
    """Relay channel from a spec; a single-channel kind means a direct link A -> B through it."""
    if spec is None:
        raise ConfigError("no channel given")
    if isinstance(spec, dict) and spec.get("kind") in CHANNEL_KINDS:
        spec = _direct_link_spec(spec["kind"], dict(spec.get("params", {})))
    return relay_from_spec(spec)


def build_state(spec: dict, ch: RelayChannel, seed: int, a1_dim: int | None = None) -> PureState:
    dims = ch.dims
    da, dd = dims["A"], dims["D"]
    if not isinstance(spec, dict):
        raise ConfigError("state spec must be an object")
    if "amplitudes" in spec:
        sdims = spec.get("dims")
        if not isinstance(sdims, list) or len(sdims) != 3:
            raise ConfigError("explicit state needs dims [a1, a, d]")
        amp = np.asarray(spec["amplitudes"], dtype=np.float64)
        if amp.ndim != 2 or amp.shape[1] != 2:
            raise ConfigError("state amplitudes must be [re, im] pairs")
        if not np.all(np.isfinite(amp)):
            raise NumericDomainError("state amplitudes are not finite")
        vec = amp[:, 0] + 1j * amp[:, 1]
        shape = SubsystemShape.of(A1=int(sdims[0]), A=int(sdims[1]), D=int(sdims[2]))
        if (shape.dim("A"), shape.dim("D")) != (da, dd):
            raise ConfigError(f"state dims |A|={shape.dim('A')}, |D|={shape.dim('D')} do not "
                              f"match the channel's |A|={da}, |D|={dd}")
        if vec.size != shape.total_dim:
            raise ConfigError(f"state has {vec.size} amplitudes, dims need {shape.total_dim}")
        if not abs(np.linalg.norm(vec) - 1.0) <= 1e-9:
            raise ConfigError("state amplitudes are not normalized")
        return PureState(vec, shape)
    family = spec.get("family", "maxent_a1a")
    a1 = int(spec.get("a1_dim", a1_dim or da * dd))
    if family == "maxent_a1a":
        return tensor(maximally_entangled(da, ("A1", "A")), basis_state(SubsystemShape.of(D=dd)))
    if family == "maxent_a1d":
        st = tensor(basis_state(SubsystemShape.of(A=da)), maximally_entangled(dd, ("A1", "D")))
        return permute(st, ("A1", "A", "D"))
    if family == "product":
        return basis_state(SubsystemShape.of(A1=a1, A=da, D=dd))
    if family == "random":
        return random_pure_state(SubsystemShape.of(A1=a1, A=da, D=dd), int(spec.get("seed", seed)))
    raise ConfigError(f"unknown state family {family!r}")


def build_fqsw(spec: dict, seed: int, trials: int | None = None) -> DecouplingConfig:
    spec = dict(spec or {})
    st = spec.get("state", {"family": "haar", "dims": [4, 2, 2]})
    if not isinstance(st, dict):
        raise ConfigError("fqsw.state must be an object")
    sdims = st.get("dims", [4, 2, 2])
    if not isinstance(sdims, list) or len(sdims) != 3:
        raise ConfigError("fqsw state dims must be [|A|, |B|, |C|]")
    da, db, dc = (int(x) for x in sdims)
    family = st.get("family", "haar")
    if "amplitudes" in st:
        amp = np.asarray(st["amplitudes"], dtype=np.float64)
        if amp.ndim != 2 or amp.shape[1] != 2 or amp.shape[0] != da * db * dc:
            raise ConfigError("fqsw state amplitudes must be |A||B||C| [re, im] pairs")
        if not np.all(np.isfinite(amp)):
            raise NumericDomainError("fqsw state amplitudes are not finite")
        vec = amp[:, 0] + 1j * amp[:, 1]
        if not abs(np.linalg.norm(vec) - 1.0) <= 1e-9:
            raise ConfigError("fqsw state amplitudes are not normalized")
        psi = PureState(vec, SubsystemShape.of(A=da, B=db, C=dc))
    elif family == "haar":
        psi = random_pure_state(SubsystemShape.of(A=da, B=db, C=dc), int(st.get("seed", seed)))
    elif family == "ghz":
        psi = ghz_state(da, db, dc)
    elif family == "decoupled":
        psi = decoupled_state(da, dc)
    else:
        raise ConfigError(f"unknown fqsw state family {family!r}")
    a1 = spec.get("a1_dim")
    a2 = spec.get("a2_dim")
    if a1 is None and a2 is None:
        raise ConfigError("fqsw needs a1_dim or a2_dim")
    a1 = int(a1) if a1 is not None else psi.shape.dim("A") // int(a2)
    a2 = int(a2) if a2 is not None else psi.shape.dim("A") // a1
    n = int(trials if trials is not None else spec.get("trials", 1000))
    try:
        return DecouplingConfig(psi, a1, a2, n, int(spec.get("seed", seed)))
    except QRelayError as exc:
        raise ConfigError(str(exc)) from None


def build_optimizer(cfg: RunConfig) -> OptimizerConfig:
    opts = dict(cfg.optimizer)
    opts.setdefault("seed", cfg.seed)
    try:
        return OptimizerConfig.from_dict(opts)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _set_path(d: dict, path: str, value) -> None:
    keys = path.split(".")
    cur = d
    for k in keys[:-1]:
        if not isinstance(cur.get(k), dict):
            raise ConfigError(f"sweep parameter path {path!r} does not exist in the channel params")
        cur = cur[k]
    cur[keys[-1]] = value


def sweep_values(spec: dict) -> np.ndarray:
    try:
        steps = int(spec["steps"])
        start, stop = float(spec["start"]), float(spec["stop"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("sweep needs numeric start, stop and steps") from None
    if steps < 2:
        raise ConfigError(f"sweep needs steps >= 2, got {steps}")
    return np.linspace(start, stop, steps)


def _sweep_channel(base: dict, param: str, value: float) -> dict:
    spec = copy.deepcopy(base)
    spec.setdefault("params", {})
    _set_path(spec["params"], param, float(value))
    return spec


def _load_report(cfg: RunConfig) -> RateReport:
    rep = cfg.report
    if isinstance(rep, dict) and "report" in rep:
        rep = rep["report"]
    return RateReport.from_dict(rep)


# -- validation ------------------------------------------------------------------


def validate(cfg: RunConfig) -> list[str]:
    """Every configuration problem, without running the command."""
    return _diagnose(cfg)[0]


def _diagnose(cfg: RunConfig) -> tuple[list[str], bool]:
    diags: list[str] = []
    numeric = []

    def check(what, fn):
        try:
            return fn()
        except (QRelayError, ValueError, TypeError, KeyError) as exc:
            diags.append(f"{what}: {exc}")
            numeric.append(isinstance(exc, NumericDomainError))
            return None

    diags = _run_checks(cfg, check, diags)
    # Exit code 3 only when every problem is a numeric-domain one.
    return diags, bool(numeric) and len(numeric) == len(diags) and all(numeric)


def _run_checks(cfg: RunConfig, check, diags: list[str]) -> list[str]:
    if cfg.command not in COMMANDS:
        diags.append(f"command: expected one of {COMMANDS}, got {cfg.command!r}")
        return diags
    seed_ok = check("seed", lambda: int(cfg.seed))
    if seed_ok is None:
        return diags
    if cfg.command == "fqsw":
        check("fqsw", lambda: build_fqsw(cfg.fqsw, cfg.seed))
        return diags
    if cfg.command == "feasible" and cfg.report is not None:
        check("report", lambda: _load_report(cfg))
    elif cfg.command == "sweep":
        _validate_sweep(cfg, check, diags)
        return diags
    else:
        ch = check("channel", lambda: build_channel(cfg.channel))
        if ch is not None and cfg.command in ("rates", "feasible"):
            check("state", lambda: build_state(cfg.state, ch, cfg.seed))
    if cfg.command == "feasible":
        check("rate_point", lambda: RatePoint.from_dict(cfg.rate_point))
        check("delta", lambda: _nonneg(cfg.delta, "delta"))
    if cfg.command == "optimize":
        check("optimizer", lambda: build_optimizer(cfg))
        if cfg.objective not in OBJECTIVES:
            diags.append(f"objective: expected one of {OBJECTIVES}, got {cfg.objective!r}")
        if cfg.family not in FAMILIES:
            diags.append(f"family: expected one of {FAMILIES}, got {cfg.family!r}")
    return diags


def _validate_sweep(cfg: RunConfig, check, diags: list[str]) -> None:
    if not isinstance(cfg.sweep, dict):
        diags.append("sweep: missing sweep spec {param, start, stop, steps}")
        return
    vals = check("sweep", lambda: sweep_values(cfg.sweep))
    if cfg.channel is None:
        diags.append("channel: no channel given")
        return
    if vals is None:
        return
    param = cfg.sweep.get("param", "p")
    for v in vals:
        ch = check(f"channel at {param}={v:g}",
                   lambda v=v: build_channel(_sweep_channel(cfg.channel, param, v)))
        if ch is None:
            return
    check("state", lambda: build_state(cfg.state, ch, cfg.seed))


def _nonneg(x, what):
    x = float(x)
    if not math.isfinite(x):
        raise NumericDomainError(f"{what}={x} is not finite")
    if not x >= 0:
        raise ParameterError(f"{what} must be nonnegative")
    return x


# -- commands --------------------------------------------------------------------


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _cmd_rates(cfg: RunConfig) -> dict[str, str]:
    ch = build_channel(cfg.channel)
    sigma = build_state(cfg.state, ch, cfg.seed)
    rep = evaluate_state_rates(ch, sigma)
    out = {
        "command": "rates",
        "channel": cfg.channel,
        "state": cfg.state,
        "report": rep.to_dict(),
        "superdense_classical_rate": superdense_classical_rate(rep),
    }
    return {"main": _json(out)}


def _cmd_optimize(cfg: RunConfig) -> dict[str, str]:
    ch = build_channel(cfg.channel)
    opt = build_optimizer(cfg)
    res = maximize(cfg.objective, ch, opt, family=cfg.family)
    out = {"command": "optimize", "channel": cfg.channel, "optimizer": opt.to_dict(),
           "family": cfg.family, **res.to_dict()}
    return {"main": _json(out)}


def _cmd_feasible(cfg: RunConfig) -> dict[str, str]:
    if cfg.report is not None:
        rep = _load_report(cfg)
    else:
        ch = build_channel(cfg.channel)
        rep = evaluate_state_rates(ch, build_state(cfg.state, ch, cfg.seed))
    pt = RatePoint.from_dict(cfg.rate_point)
    feas = check_rate_point(rep, pt)
    exps = decoupling_exponents(rep, pt, delta=_nonneg(cfg.delta, "delta"))
    out = {
        "command": "feasible",
        "report": rep.to_dict(),
        "rate_point": pt.to_dict(),
        "feasibility": feas.to_dict(),
        "exponents": exps.to_dict(),
    }
    return {"main": _json(out)}


def _cmd_sweep(cfg: RunConfig) -> dict[str, str]:
    if not isinstance(cfg.sweep, dict):
        raise ConfigError("sweep command needs a sweep spec")
    param = cfg.sweep.get("param", "p")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for v in sweep_values(cfg.sweep):
        ch = build_channel(_sweep_channel(cfg.channel, param, v))
        rep = evaluate_state_rates(ch, build_state(cfg.state, ch, cfg.seed))
        d = rep.to_dict()
        w.writerow([_fmt(v)] + [_fmt(d[c]) for c in SWEEP_COLUMNS[1:]])
    return {"main": buf.getvalue()}


def _cmd_fqsw(cfg: RunConfig) -> dict[str, str]:
    dc = build_fqsw(cfg.fqsw, cfg.seed)
    res = monte_carlo(dc)
    out = {"command": "fqsw", "a1_dim": dc.a1_dim, "a2_dim": dc.a2_dim,
           "dims": list(dc.dims), "seed": int(dc.seed), **res.to_dict()}
    return {"main": _json(out), "trials": res.trials_csv()}


_DISPATCH = {
    "rates": _cmd_rates,
    "optimize": _cmd_optimize,
    "feasible": _cmd_feasible,
    "sweep": _cmd_sweep,
    "fqsw": _cmd_fqsw,
}


def trials_path(out: Path) -> Path:
    return out.with_name(out.stem + ".trials.csv")


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Validate, dispatch and write outputs; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    diags, numeric = _diagnose(cfg)
    if diags:
        kind = "numeric error" if numeric else "config error"
        for d in diags:
            print(f"qrelay: {kind}: {d}", file=stderr)
        return EXIT_NUMERIC if numeric else EXIT_CONFIG
    try:
        outputs = _DISPATCH[cfg.command](cfg)
    except NumericDomainError as exc:
        print(f"qrelay: numeric error: {exc}", file=stderr)
        return EXIT_NUMERIC
    except QRelayError as exc:
        print(f"qrelay: config error: {exc}", file=stderr)
        return EXIT_CONFIG
    if cfg.out:
        out = Path(cfg.out)
        out.write_text(outputs["main"])
        if "trials" in outputs:
            trials_path(out).write_text(outputs["trials"])
    else:
        stdout.write(outputs["main"])
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qrelay",
        description="Decode-forward rates for quantum relay channels and FQSW decoupling checks.",
    )
    p.add_argument("command_pos", nargs="?", metavar="COMMAND", choices=COMMANDS,
                   help="same as --command")
    p.add_argument("--command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--out", help="output file (JSON or CSV); stdout when omitted")
    p.add_argument("--seed", type=int)
    p.add_argument("--channel", help="relay kind (partial_swap, orthogonal, interaction) or a "
                                     "single-channel kind used as a direct A->B link")
    p.add_argument("--p", type=float, help="channel parameter p")
    p.add_argument("--theta", type=float, help="partial-swap angle")
    p.add_argument("--trials", type=int, help="FQSW Monte-Carlo trials")
    p.add_argument("--restarts", type=int, help="optimizer restarts")
    p.add_argument("--a1-dim", type=int, help="auxiliary dimension |A1|")
    p.add_argument("--delta", type=float, help="slack in the decoupling exponents")
    p.add_argument("--objective", choices=OBJECTIVES)
    p.add_argument("--report", help="rates JSON to feed into 'feasible'")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    cfg = RunConfig.from_dict(data)
    cmd = args.command or args.command_pos
    if cmd:
        cfg.command = cmd
    if args.out:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.channel and (cfg.channel is None or cfg.channel.get("kind") != args.channel):
        cfg.channel = {"kind": args.channel, "params": {}}
    for name in ("p", "theta"):
        val = getattr(args, name)
        if val is not None:
            if cfg.channel is None:
                raise ConfigError(f"--{name} given without a channel")
            cfg.channel.setdefault("params", {})[name] = val
    if args.trials is not None:
        cfg.fqsw["trials"] = args.trials
    if args.restarts is not None:
        cfg.optimizer["restarts"] = args.restarts
    if args.a1_dim is not None:
        cfg.optimizer["a1_dim"] = args.a1_dim
        cfg.fqsw["a1_dim"] = args.a1_dim
        if isinstance(cfg.state, dict) and cfg.state.get("family") in ("random", "product"):
            cfg.state["a1_dim"] = args.a1_dim
    if args.delta is not None:
        cfg.delta = args.delta
    if args.objective:
        cfg.objective = args.objective
    if args.report:
        try:
            cfg.report = json.loads(Path(args.report).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read report: {exc}") from None
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except QRelayError as exc:
        print(f"qrelay: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
