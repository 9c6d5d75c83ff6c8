"""Decode-forward rate functionals, rate-point feasibility and decoupling exponents.

All quantities are in bits (qubits, ebits) per channel use. The input is a
pure state on ``A1, A, D`` and the channel output ``omega`` lives on
``A1, B, E``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from ._backend import kernels
from .channels import QuantumChannel, RelayChannel
from .entropics import MI_CLIP_TOL
from .errors import LabelError, NumericDomainError, ParameterError, ShapeError
from .linalg import PureState, permute

A1 = "A1"


@dataclass(frozen=True)
class RatePoint:
    """Quantum rate ``Q`` and entanglement consumption/generation rates."""

    Q: float = 0.0
    L_B: float = 0.0
    L_B_hat: float = 0.0
    L_E: float = 0.0
    L_E_hat: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            if not math.isfinite(v):
                raise NumericDomainError(f"rate {f.name}={v} is not finite")
            if v < 0.0:
                raise ParameterError(f"rate {f.name}={v} must be nonnegative")
            object.__setattr__(self, f.name, v)

    @property
    def delta_L_B(self) -> float:
        """Net entanglement consumption at the destination."""
        return self.L_B - self.L_B_hat

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RatePoint:
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ParameterError(f"unknown rate-point keys {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class RateReport:
    h_a1_given_d: float
    coh_a1_E: float
    coh_a1_B: float
    mi_a1_B: float
    mi_a1_D: float
    q_df: float
    q_ea_df: float

    @classmethod
    def from_quantities(cls, h_a1_given_d, coh_a1_E, coh_a1_B, mi_a1_B, mi_a1_D) -> RateReport:
        q_df = max(0.0, min(coh_a1_E, coh_a1_B))
        q_ea_df = max(0.0, 0.5 * mi_a1_B - 0.5 * mi_a1_D)
        return cls(float(h_a1_given_d), float(coh_a1_E), float(coh_a1_B), float(mi_a1_B),
                   float(mi_a1_D), float(q_df), float(q_ea_df))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RateReport:
        try:
            rep = cls.from_quantities(d["h_a1_given_d"], d["coh_a1_E"], d["coh_a1_B"],
                                      d["mi_a1_B"], d["mi_a1_D"])
        except KeyError as exc:
            raise ParameterError(f"rate report is missing {exc.args[0]!r}") from None
        for key in ("q_df", "q_ea_df"):
            if key in d and abs(float(d[key]) - getattr(rep, key)) > 1e-12:
                raise ParameterError(f"rate report field {key} is inconsistent with its inputs")
        return rep


@dataclass(frozen=True)
class Feasibility:
    """Slacks of the three rate-region inequalities (feasible iff all are >= 0)."""

    slack1: float
    slack2: float
    slack3: float
    delta_L_B: float

    @property
    def conditions(self) -> tuple[bool, bool, bool]:
        return (self.slack1 >= 0.0, self.slack2 >= 0.0, self.slack3 >= 0.0)

    @property
    def feasible(self) -> bool:
        return all(self.conditions)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conditions"] = list(self.conditions)
        d["feasible"] = self.feasible
        return d


@dataclass(frozen=True)
class DecouplingExponents:
    e1: float
    e2: float
    e3: float
    delta: float = 0.0

    @property
    def feasible(self) -> tuple[bool, bool, bool]:
        return (self.e1 > self.delta, self.e2 > self.delta, self.e3 > self.delta)

    @property
    def all_feasible(self) -> bool:
        return all(self.feasible)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["feasible"] = list(self.feasible)
        d["all_feasible"] = self.all_feasible
        return d


def _pure_entropy(vec: np.ndarray, dims, mask) -> float:
    # A pure state has equal entropy on complementary sides; reduce the smaller one.
    dk = 1
    for d, m in zip(dims, mask):
        if m:
            dk *= d
    total = vec.shape[0]
    if dk * dk > total:
        mask = [not m for m in mask]
        dk = total // dk
    if dk == 1:
        return 0.0
    return kernels.entropy_bits(kernels.pure_marginal(vec, dims, mask))


def _clip_mi(x: float) -> float:
    return 0.0 if -MI_CLIP_TOL <= x < 0.0 else x


def rate_quantities(kraus: np.ndarray, psi: np.ndarray, a1: int, da: int, dd: int,
                    db: int, de: int) -> tuple[float, float, float, float, float]:
    """``(H(A1|D), I(A1>E), I(A1>B), I(A1;B), I(A1;D))`` for a raw state vector.

    ``psi`` is ordered ``A1, A, D``; ``kraus`` maps ``A D`` to ``B E``. This is
    the allocation-light path used inside the optimizer.
    """
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    sdims = (a1, da, dd)
    h_a1 = _pure_entropy(psi, sdims, (True, False, False))
    h_d = _pure_entropy(psi, sdims, (False, False, True))
    h_a1d = _pure_entropy(psi, sdims, (True, False, True))
    n = kraus.shape[0]
    # Stinespring output: omega on A1 B E J with J the Kraus index.
    phi = psi.reshape(a1, da * dd) @ kraus.transpose(2, 1, 0).reshape(da * dd, db * de * n)
    phi = np.ascontiguousarray(phi).ravel()
    wdims = (a1, db, de, n)
    h_b = _pure_entropy(phi, wdims, (False, True, False, False))
    h_e = _pure_entropy(phi, wdims, (False, False, True, False))
    h_a1b = _pure_entropy(phi, wdims, (True, True, False, False))
    h_a1e = _pure_entropy(phi, wdims, (True, False, True, False))
    return (
        h_a1d - h_d,
        h_e - h_a1e,
        h_b - h_a1b,
        _clip_mi(h_a1 + h_b - h_a1b),
        _clip_mi(h_a1 + h_d - h_a1d),
    )


def _input_order(ch: RelayChannel, sigma: PureState) -> PureState:
    labels = sigma.shape.labels
    if len(labels) != 3 or "A" not in labels or "D" not in labels:
        raise LabelError(f"input state must live on (A1, A, D), got {labels}")
    aux = next(lab for lab in labels if lab not in ("A", "D"))
    for lab in ("A", "D"):
        if sigma.shape.dim(lab) != ch.input_shape.dim(lab):
            raise ShapeError(
                f"state has |{lab}|={sigma.shape.dim(lab)}, channel expects "
                f"{ch.input_shape.dim(lab)}"
            )
    if labels == (aux, "A", "D"):
        return sigma
    return permute(sigma, (aux, "A", "D"))


def evaluate_state_rates(ch: QuantumChannel, sigma: PureState) -> RateReport:
    """Every decode-forward functional for one (channel, input state) pair."""
    if not isinstance(ch, RelayChannel):
        ch = RelayChannel.from_channel(ch)
    sigma = _input_order(ch, sigma)
    a1 = sigma.shape.dims[0]
    dims = ch.dims
    q = rate_quantities(ch.kraus, sigma.data, a1, dims["A"], dims["D"], dims["B"], dims["E"])
    return RateReport.from_quantities(*q)


def check_rate_point(report: RateReport, pt: RatePoint) -> Feasibility:
    """Slacks of the three decode-forward conditions with relay rates excluded.

    ``slack1 = H(A1|D) - L_B + L_B_hat - Q``,
    ``slack2 = I(A1>E) - L_B - L_B_hat - Q``,
    ``slack3 = I(A1>B) + L_B - L_B_hat - Q``.
    """
    return Feasibility(
        slack1=report.h_a1_given_d - pt.L_B + pt.L_B_hat - pt.Q,
        slack2=report.coh_a1_E - pt.L_B - pt.L_B_hat - pt.Q,
        slack3=report.coh_a1_B + pt.L_B - pt.L_B_hat - pt.Q,
        delta_L_B=pt.delta_L_B,
    )


def decoupling_exponents(report: RateReport, pt: RatePoint, Q: float | None = None,
                         delta: float = 0.0) -> DecouplingExponents:
    """Exponents of the three decoupling errors, including relay rates ``L_E, L_E_hat``.

    ``Q`` overrides ``pt.Q`` when given. Decoupling ``i`` succeeds when its
    exponent exceeds ``delta``.
    """
    if delta < 0:
        raise ParameterError("delta must be nonnegative")
    q = pt.Q if Q is None else float(Q)
    return DecouplingExponents(
        e1=report.h_a1_given_d - pt.L_E - pt.L_B + pt.L_E_hat + pt.L_B_hat - q,
        e2=report.coh_a1_E + pt.L_E - pt.L_B - pt.L_E_hat - pt.L_B_hat - q,
        e3=report.coh_a1_B - pt.L_E + pt.L_B - pt.L_E_hat - pt.L_B_hat - q,
        delta=float(delta),
    )


def superdense_classical_rate(report: RateReport) -> float:
    """Classical rate reachable by superdense coding on top of the assisted quantum rate."""
    return 2.0 * report.q_ea_df


def orthogonal_links_bound(p_link: QuantumChannel, m_link: QuantumChannel, opt=None) -> float:
    """``min(I_c(M), I_c(P))`` for orthogonal links, clipped at zero.

    Reported next to the state-optimized decode-forward value; the two are
    not asserted to be ordered.
    """
    from .optimize import OptimizerConfig, channel_coherent_information

    opt = opt or OptimizerConfig()
    return max(0.0, min(channel_coherent_information(m_link, opt),
                        channel_coherent_information(p_link, opt)))
