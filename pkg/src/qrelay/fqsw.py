"""Monte-Carlo check of the FQSW decoupling inequality.

For a pure ``psi`` on ``A, B, C`` Alice applies a Haar-random unitary to
``A = A1 (x) A2`` (``A1`` is the first factor) and the quantity

    || rho_{A1 C} - I/|A1| (x) psi_C ||_1^2

is averaged over unitaries and compared with ``|A||C| / |A2|^2 * Tr psi_AC^2``.
Trial ``t`` uses the unitary seeded by ``seed ^ t``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .channels import is_unitary
from .entropics import purity
from .errors import LabelError, ParameterError, ShapeError
from .linalg import (
    DensityOperator,
    PureState,
    SubsystemShape,
    haar_matrix,
    make_rng,
    maximally_entangled,
    partial_trace,
    permute,
    purify,
    tensor,
    uhlmann_isometry,
)

LABELS = ("A", "B", "C")


@dataclass(frozen=True, eq=False)
class DecouplingConfig:
    psi: PureState
    a1_dim: int
    a2_dim: int
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        labels = self.psi.shape.labels
        if set(labels) != set(LABELS) or len(labels) != 3:
            raise LabelError(f"psi must live on {LABELS} (B may have dim 1), got {labels}")
        if labels != LABELS:
            object.__setattr__(self, "psi", permute(self.psi, LABELS))
        if int(self.a1_dim) < 1 or int(self.a2_dim) < 1:
            raise ParameterError("a1_dim and a2_dim must be positive")
        if int(self.a1_dim) * int(self.a2_dim) != self.psi.shape.dim("A"):
            raise ShapeError(
                f"a1_dim * a2_dim = {self.a1_dim * self.a2_dim} does not factor "
                f"|A| = {self.psi.shape.dim('A')}"
            )
        if int(self.trials) < 1:
            raise ParameterError("trials must be at least 1")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.psi.shape.dims


@dataclass(frozen=True, eq=False)
class DecouplingResult:
    lhs_mean: float
    lhs_stderr: float
    lhs_min: float
    lhs_max: float
    rhs_bound: float
    best_trial: int
    trial_values: tuple[float, ...]

    @property
    def bound_satisfied(self) -> bool:
        return self.lhs_mean <= self.rhs_bound + 3.0 * self.lhs_stderr

    def to_dict(self, include_trials: bool = False) -> dict:
        d = {
            "lhs_mean": self.lhs_mean,
            "lhs_stderr": self.lhs_stderr,
            "lhs_min": self.lhs_min,
            "lhs_max": self.lhs_max,
            "rhs_bound": self.rhs_bound,
            "bound_satisfied": self.bound_satisfied,
            "best_trial": self.best_trial,
            "trials": len(self.trial_values),
        }
        if include_trials:
            d["trial_values"] = list(self.trial_values)
        return d

    def trials_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial_index", "lhs_value"])
        for i, v in enumerate(self.trial_values):
            w.writerow([i, f"{v:#.15g}"])
        return buf.getvalue()


def fqsw_bound(cfg: DecouplingConfig) -> float:
    """``|A||C| / |A2|^2 * Tr psi_AC^2``."""
    da, _, dc = cfg.dims
    return da * dc / cfg.a2_dim**2 * purity(partial_trace(cfg.psi, ("A", "C")))


def _trial_value(psi: np.ndarray, dims, a1: int, a2: int, u: np.ndarray, target: np.ndarray) -> float:
    da, db, dc = dims
    rotated = (u @ psi.reshape(da, db * dc)).reshape(-1)
    rho = kernels.pure_marginal(np.ascontiguousarray(rotated), (a1, a2, db, dc),
                                (True, False, False, True))
    diff = rho - target
    return kernels.trace_norm_hermitian(diff) ** 2


def _target(cfg: DecouplingConfig) -> np.ndarray:
    psi_c = partial_trace(cfg.psi, "C").data
    return np.kron(np.eye(cfg.a1_dim) / cfg.a1_dim, psi_c)


def decoupling_trial(cfg: DecouplingConfig, trial_index: int) -> float:
    """Squared trace distance of ``rho_{A1 C}`` from ``I/|A1| (x) psi_C`` for one Haar draw."""
    u = haar_matrix(cfg.dims[0], make_rng(int(cfg.seed) ^ int(trial_index)))
    return _trial_value(cfg.psi.data, cfg.dims, cfg.a1_dim, cfg.a2_dim, u, _target(cfg))


def monte_carlo(cfg: DecouplingConfig) -> DecouplingResult:
    """Empirical mean, spread and best trial of the decoupling quantity."""
    target = _target(cfg)
    da = cfg.dims[0]
    vals = np.empty(int(cfg.trials))
    for t in range(int(cfg.trials)):
        u = haar_matrix(da, make_rng(int(cfg.seed) ^ t))
        vals[t] = _trial_value(cfg.psi.data, cfg.dims, cfg.a1_dim, cfg.a2_dim, u, target)
    n = vals.size
    stderr = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    best = int(np.argmin(vals))
    return DecouplingResult(
        lhs_mean=float(np.mean(vals)),
        lhs_stderr=stderr,
        lhs_min=float(vals[best]),
        lhs_max=float(np.max(vals)),
        rhs_bound=fqsw_bound(cfg),
        best_trial=best,
        trial_values=tuple(float(v) for v in vals),
    )


def trial_unitary(cfg: DecouplingConfig, trial_index: int) -> np.ndarray:
    """The Haar unitary used by trial ``trial_index``."""
    return haar_matrix(cfg.dims[0], make_rng(int(cfg.seed) ^ int(trial_index)))


def entanglement_byproduct(cfg: DecouplingConfig, u) -> tuple[float, float]:
    """Purity of ``rho_{A1}`` and the Uhlmann fidelity with the ideal by-product.

    The ideal state is a maximally entangled pair on ``A1`` and a copy held
    by Bob, times a purification of ``psi_C``. Bob holds ``A2 B`` after the
    rotation; the returned fidelity is the optimal overlap over isometries on
    Bob's side, which equals the root fidelity of ``rho_{A1 C}`` with
    ``I/|A1| (x) psi_C``.
    """
    u = np.asarray(getattr(u, "data", u), dtype=np.complex128)
    da, db, dc = cfg.dims
    if u.shape != (da, da) or not is_unitary(u):
        raise ParameterError(f"expected a {da}x{da} unitary")
    a1, a2 = cfg.a1_dim, cfg.a2_dim
    rotated = (u @ cfg.psi.data.reshape(da, db * dc)).reshape(-1)
    actual = PureState(rotated, SubsystemShape.of(A1=a1, A2=a2, B=db, C=dc))
    purity_a1 = purity(partial_trace(actual, "A1"))

    ideal_ac = DensityOperator.trusted(_target(cfg), SubsystemShape.of(A1=a1, C=dc))
    ideal = purify(ideal_ac, "Bref")
    bob = a2 * db
    ref = ideal.shape.dim("Bref")
    # The isometry must map the smaller purifying space into the larger one.
    if ref <= bob:
        _, fid = uhlmann_isometry(actual, ideal)
    else:
        _, fid = uhlmann_isometry(ideal, actual)
    return float(purity_a1), float(fid)


def ghz_state(da: int, db: int, dc: int) -> PureState:
    """``sum_i |i>_A |i>_B |i>_C / sqrt(k)`` with ``k = min(da, db, dc)``."""
    k = min(da, db, dc)
    vec = np.zeros(da * db * dc, dtype=np.complex128)
    for i in range(k):
        vec[(i * db + i) * dc + i] = 1.0
    return PureState(vec / math.sqrt(k), SubsystemShape.of(A=da, B=db, C=dc))


def decoupled_state(da: int, dc: int) -> PureState:
    """``A`` maximally entangled with half of ``B``, ``C`` with the other half.

    ``psi_AC = I/|A| (x) I/|C|`` exactly, so every trial value is zero.
    """
    ab = maximally_entangled(da, ("A", "B1"))
    cb = maximally_entangled(dc, ("C", "B2"))
    full = permute(tensor(ab, cb), ("A", "B1", "B2", "C"))
    return PureState(full.data, SubsystemShape.of(A=da, B=da * dc, C=dc))
