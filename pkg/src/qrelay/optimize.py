"""Multi-restart Nelder-Mead over pure input states ``sigma_{A1 A D}``.

Each restart ``r`` draws its starting point from the generator keyed by
``seed ^ r`` and runs Nelder-Mead, re-launching the simplex from the best
point while it keeps improving and evaluations remain. The best restart
wins, ties going to the lowest index.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .channels import QuantumChannel, RelayChannel
from .errors import DegenerateParameterError, ParameterError
from .linalg import PureState, SubsystemShape, make_rng
from .rates import RateReport, evaluate_state_rates, rate_quantities

OBJECTIVES = ("df", "ea_df", "coh_b")
FAMILIES = ("general", "direct")

_MIN_PARAM_NORM = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    a1_dim: int | None = None  # None -> |A| * |D|
    restarts: int = 16
    max_evals: int = 5000
    convergence_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.a1_dim is not None and int(self.a1_dim) < 1:
            raise ParameterError("a1_dim must be positive")
        if int(self.restarts) < 1:
            raise ParameterError("restarts must be positive")
        if int(self.max_evals) < 1:
            raise ParameterError("max_evals must be positive")
        if not self.convergence_tol > 0:
            raise ParameterError("convergence_tol must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> OptimizerConfig:
        known = {"a1_dim", "restarts", "max_evals", "convergence_tol", "seed"}
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown optimizer keys {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    best_state: PureState
    best_report: RateReport
    objective_value: float
    evals_used: int
    converged: bool
    objective: str = "df"
    restart_values: tuple[float, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "objective_value": self.objective_value,
            "evals_used": self.evals_used,
            "converged": self.converged,
            "restart_values": list(self.restart_values),
            "report": self.best_report.to_dict(),
            "state": {
                "labels": list(self.best_state.shape.labels),
                "dims": list(self.best_state.shape.dims),
                "amplitudes": [[float(z.real), float(z.imag)] for z in self.best_state.data],
            },
        }


def params_to_state(params, dims) -> PureState:
    """Interleaved real/imaginary amplitudes, normalized, on ``A1, A, D``."""
    a1, a, d = (int(x) for x in dims)
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (2 * a1 * a * d,):
        raise ParameterError(f"expected {2 * a1 * a * d} parameters, got {params.shape}")
    vec = _params_to_vector(params)
    return PureState(vec, SubsystemShape.of(A1=a1, A=a, D=d))


def _params_to_vector(params: np.ndarray) -> np.ndarray:
    vec = params[0::2] + 1j * params[1::2]
    nrm = np.linalg.norm(vec)
    if not nrm >= _MIN_PARAM_NORM:
        raise DegenerateParameterError("parameter vector is (numerically) zero")
    return vec / nrm


def objective_from_report(objective: str, report: RateReport) -> float:
    """Raw (unclipped) objective value."""
    return _objective(objective, report.coh_a1_E, report.coh_a1_B, report.mi_a1_B,
                      report.mi_a1_D)


def _objective(objective, coh_e, coh_b, mi_b, mi_d) -> float:
    if objective == "df":
        return min(coh_b, coh_e)
    if objective == "ea_df":
        return 0.5 * mi_b - 0.5 * mi_d
    if objective == "coh_b":
        return coh_b
    raise ParameterError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")


class _Problem:
    """Objective closure over one channel, parametrization and objective."""

    def __init__(self, objective: str, ch: RelayChannel, a1: int, family: str):
        if objective not in OBJECTIVES:
            raise ParameterError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
        if family not in FAMILIES:
            raise ParameterError(f"unknown state family {family!r}; expected one of {FAMILIES}")
        self.objective = objective
        self.family = family
        self.kraus = ch.kraus
        dims = ch.dims
        self.da, self.dd, self.db, self.de = dims["A"], dims["D"], dims["B"], dims["E"]
        self.a1 = a1
        if family == "general":
            self.n_params = 2 * a1 * self.da * self.dd
        else:
            self.n_params = 2 * (a1 * self.da + self.dd)

    def vector(self, x: np.ndarray) -> np.ndarray:
        if self.family == "general":
            return _params_to_vector(x)
        split = 2 * self.a1 * self.da
        # phi_{A1 A} (x) psi_D, reordered to A1, A, D by plain kron.
        return np.kron(_params_to_vector(x[:split]), _params_to_vector(x[split:]))

    def state(self, x: np.ndarray) -> PureState:
        return PureState(self.vector(x), SubsystemShape.of(A1=self.a1, A=self.da, D=self.dd))

    def value(self, x: np.ndarray) -> float:
        q = rate_quantities(self.kraus, self.vector(x), self.a1, self.da, self.dd, self.db, self.de)
        return _objective(self.objective, q[1], q[2], q[3], q[4])

    def loss(self, x: np.ndarray) -> float:
        try:
            return -self.value(x)
        except DegenerateParameterError:
            return np.inf


def _run_restart(prob: _Problem, x0: np.ndarray, cfg: OptimizerConfig):
    budget = int(cfg.max_evals)
    x = x0
    best = prob.loss(x)
    used = 1
    converged = False
    while used < budget:
        res = minimize(
            prob.loss,
            x,
            method="Nelder-Mead",
            options={
                "maxfev": budget - used,
                "fatol": cfg.convergence_tol,
                "xatol": 1e-9,
                "adaptive": True,
            },
        )
        used += int(res.nfev)
        improvement = best - float(res.fun)
        if float(res.fun) < best:
            best, x = float(res.fun), res.x
        if res.status == 0 and improvement <= cfg.convergence_tol:
            converged = True
            break
        if res.status != 0:
            break
    return x, -best, used, converged


def maximize(objective: str, ch: QuantumChannel, cfg: OptimizerConfig | None = None,
             family: str = "general") -> OptimizationResult:
    """Maximize a decode-forward objective over pure ``sigma_{A1 A D}``.

    ``objective`` is ``"df"`` (``min(I(A1>B), I(A1>E))``), ``"ea_df"``
    (``I(A1;B)/2 - I(A1;D)/2``) or ``"coh_b"`` (``I(A1>B)`` alone).
    ``family="direct"`` restricts the search to ``phi_{A1 A} (x) psi_D``.
    """
    cfg = cfg or OptimizerConfig()
    if not isinstance(ch, RelayChannel):
        ch = RelayChannel.from_channel(ch)
    dims = ch.dims
    a1 = int(cfg.a1_dim) if cfg.a1_dim is not None else dims["A"] * dims["D"]
    prob = _Problem(objective, ch, a1, family)

    best_x = None
    best_val = -np.inf
    best_conv = False
    total = 0
    values = []
    for r in range(int(cfg.restarts)):
        rng = make_rng(int(cfg.seed) ^ r)
        x0 = rng.standard_normal(prob.n_params)
        while not np.linalg.norm(x0) >= _MIN_PARAM_NORM:
            x0 = rng.standard_normal(prob.n_params)
        x, val, used, conv = _run_restart(prob, x0, cfg)
        total += used
        values.append(val)
        if val > best_val:
            best_x, best_val, best_conv = x, val, conv

    state = prob.state(best_x)
    report = evaluate_state_rates(ch, state)
    return OptimizationResult(
        best_state=state,
        best_report=report,
        objective_value=objective_from_report(objective, report),
        evals_used=total,
        converged=best_conv,
        objective=objective,
        restart_values=tuple(values),
    )


def as_relay(ch: QuantumChannel) -> RelayChannel:
    """Embed a single-system channel ``X -> Y`` as a relay with trivial ``D`` and ``E``."""
    return RelayChannel(ch.kraus, SubsystemShape.of(A=ch.dim_in, D=1),
                        SubsystemShape.of(B=ch.dim_out, E=1), ch.name)


def channel_coherent_information(ch: QuantumChannel, cfg: OptimizerConfig | None = None) -> float:
    """Single-letter coherent information ``max_phi I(A1>Y)``, clipped at zero."""
    cfg = cfg or OptimizerConfig()
    if cfg.a1_dim is None:
        cfg = replace(cfg, a1_dim=ch.dim_in)
    res = maximize("coh_b", as_relay(ch), cfg)
    return max(0.0, res.objective_value)
