"""Finite-dimensional linear algebra with labeled subsystems.

Every operator carries an ordered :class:`SubsystemShape`; subsystem order is
significant and is never changed implicitly.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import LabelError, NumericDomainError, ShapeError

HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
PSD_TOL = 1e-9
NORM_TOL = 1e-9

_SEED_MASK = (1 << 64) - 1


def _as_labels(labels) -> tuple[str, ...]:
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


@dataclass(frozen=True)
class SubsystemShape:
    """Ordered ``(label, dim)`` pairs describing a tensor-product space."""

    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        entries = tuple((str(lab), int(dim)) for lab, dim in self.entries)
        labels = [lab for lab, _ in entries]
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate subsystem labels in {labels}")
        for lab, dim in entries:
            if dim < 1:
                raise ShapeError(f"subsystem {lab!r} has dimension {dim} < 1")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, **dims: int) -> SubsystemShape:
        """``SubsystemShape.of(A1=2, A=2, D=2)``; keyword order is kept."""
        return cls(tuple(dims.items()))

    @classmethod
    def from_lists(cls, labels: Sequence[str], dims: Sequence[int]) -> SubsystemShape:
        if len(labels) != len(dims):
            raise ShapeError("labels and dims differ in length")
        return cls(tuple(zip(labels, dims)))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.entries)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.entries)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def __len__(self):
        return len(self.entries)

    def dim(self, label: str) -> int:
        return self.dims[self.index(label)]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def select(self, labels) -> SubsystemShape:
        """Sub-shape on ``labels``, in the order they appear in ``self``."""
        labels = set(_as_labels(labels))
        for lab in labels:
            self.index(lab)
        return SubsystemShape(tuple(e for e in self.entries if e[0] in labels))

    def without(self, labels) -> SubsystemShape:
        labels = set(_as_labels(labels))
        for lab in labels:
            self.index(lab)
        return SubsystemShape(tuple(e for e in self.entries if e[0] not in labels))

    def __add__(self, other: SubsystemShape) -> SubsystemShape:
        return SubsystemShape(self.entries + other.entries)

    def relabel(self, mapping: dict) -> SubsystemShape:
        return SubsystemShape(tuple((mapping.get(lab, lab), dim) for lab, dim in self.entries))


def _frozen(a, dtype=np.complex128) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LabeledMatrix:
    """A matrix whose row space is ``shape``.

    ``in_shape`` labels the column space of rectangular operators such as
    isometries; it defaults to ``shape``.
    """

    data: np.ndarray
    shape: SubsystemShape
    in_shape: SubsystemShape | None = None

    def __post_init__(self):
        data = _frozen(self.data)
        if data.ndim != 2:
            raise ShapeError(f"expected a matrix, got array of ndim {data.ndim}")
        cols = self.shape if self.in_shape is None else self.in_shape
        if data.shape != (self.shape.total_dim, cols.total_dim):
            raise ShapeError(
                f"matrix of shape {data.shape} does not match subsystem dims "
                f"{self.shape.dims} x {cols.dims}"
            )
        if not np.all(np.isfinite(data)):
            raise NumericDomainError("matrix has non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def labels(self):
        return self.shape.labels

    @property
    def dims(self):
        return self.shape.dims

    @property
    def is_square(self) -> bool:
        return self.in_shape is None or self.in_shape == self.shape


class DensityOperator(LabeledMatrix):
    """Hermitian, unit-trace, positive semidefinite :class:`LabeledMatrix`."""

    def __post_init__(self):
        super().__post_init__()
        if self.in_shape is not None and self.in_shape != self.shape:
            raise ShapeError("density operator must be square")
        object.__setattr__(self, "in_shape", None)
        d = self.data
        herm = np.max(np.abs(d - d.conj().T)) if d.size else 0.0
        if herm > HERMITIAN_TOL:
            raise NumericDomainError(f"not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(d).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise NumericDomainError(f"trace {tr!r} differs from 1")
        lo = kernels.eigvalsh(np.ascontiguousarray(d))[0]
        if lo < -PSD_TOL:
            raise NumericDomainError(f"negative eigenvalue {lo:.3g}")

    @classmethod
    def trusted(cls, data, shape: SubsystemShape) -> DensityOperator:
        """Wrap ``data`` without the eigenvalue checks (for internal hot paths)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "data", _frozen(data))
        object.__setattr__(obj, "shape", shape)
        object.__setattr__(obj, "in_shape", None)
        return obj


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector on a labeled tensor-product space."""

    data: np.ndarray
    shape: SubsystemShape

    def __post_init__(self):
        data = _frozen(np.ravel(self.data))
        if data.size != self.shape.total_dim:
            raise ShapeError(f"vector of length {data.size} does not match dims {self.shape.dims}")
        if not np.all(np.isfinite(data)):
            raise NumericDomainError("state has non-finite amplitudes")
        nrm = np.linalg.norm(data)
        if abs(nrm - 1.0) > NORM_TOL:
            raise NumericDomainError(f"state norm {nrm!r} differs from 1")
        object.__setattr__(self, "data", data)

    @property
    def labels(self):
        return self.shape.labels

    @property
    def dims(self):
        return self.shape.dims

    def density(self) -> DensityOperator:
        return DensityOperator.trusted(np.outer(self.data, self.data.conj()), self.shape)


def _keep_mask(shape: SubsystemShape, keep) -> list[bool]:
    keep = _as_labels(keep)
    for lab in keep:
        shape.index(lab)
    return [lab in keep for lab in shape.labels]


def tensor(a, b):
    """Kronecker product with concatenated labels.

    Two :class:`PureState` give a :class:`PureState`; two density operators give
    a :class:`DensityOperator`; anything else a :class:`LabeledMatrix`.
    """
    overlap = set(a.shape.labels) & set(b.shape.labels)
    if overlap:
        raise LabelError(f"labels {sorted(overlap)} appear in both factors")
    shape = a.shape + b.shape
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.data, b.data), shape)
    if isinstance(a, PureState):
        a = a.density()
    if isinstance(b, PureState):
        b = b.density()
    data = np.kron(a.data, b.data)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator.trusted(data, shape)
    in_a = a.in_shape or a.shape
    in_b = b.in_shape or b.shape
    in_shape = None if (a.is_square and b.is_square) else in_a + in_b
    return LabeledMatrix(data, shape, in_shape)


def partial_trace(rho, keep):
    """Reduce ``rho`` to the subsystems in ``keep``, preserving their order.

    Accepts a :class:`DensityOperator`, a square :class:`LabeledMatrix` or a
    :class:`PureState` (reduced through the pure-state marginal kernel).
    """
    keep = _as_labels(keep)
    if not keep:
        raise LabelError("keep must name at least one subsystem")
    mask = _keep_mask(rho.shape, keep)
    shape = rho.shape.select(keep)
    if isinstance(rho, PureState):
        data = kernels.pure_marginal(np.ascontiguousarray(rho.data), rho.shape.dims, mask)
        return DensityOperator.trusted(data, shape)
    if not rho.is_square:
        raise ShapeError("partial trace needs a square operator")
    data = kernels.partial_trace(rho.data, rho.shape.dims, mask)
    if isinstance(rho, DensityOperator):
        return DensityOperator.trusted(data, shape)
    return LabeledMatrix(data, shape)


def permute(rho, order):
    """Reorder the subsystems of ``rho`` (state or square operator) to ``order``."""
    order = _as_labels(order)
    if sorted(order) != sorted(rho.shape.labels):
        raise LabelError(f"order {order} is not a permutation of {rho.shape.labels}")
    perm = [rho.shape.index(lab) for lab in order]
    shape = SubsystemShape(tuple(rho.shape.entries[i] for i in perm))
    dims = list(rho.shape.dims)
    n = len(dims)
    if isinstance(rho, PureState):
        return PureState(rho.data.reshape(dims).transpose(perm).ravel(), shape)
    t = rho.data.reshape(dims + dims).transpose(perm + [n + i for i in perm])
    data = t.reshape(shape.total_dim, shape.total_dim)
    if isinstance(rho, DensityOperator):
        return DensityOperator.trusted(data, shape)
    return LabeledMatrix(data, shape)


def _matrix(m) -> np.ndarray:
    return m.data if isinstance(m, LabeledMatrix) else np.asarray(m, dtype=np.complex128)


def _check_hermitian(data: np.ndarray):
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise NumericDomainError("expected a square matrix")
    dev = np.max(np.abs(data - data.conj().T)) if data.size else 0.0
    if dev > HERMITIAN_TOL:
        raise NumericDomainError(f"matrix is not Hermitian (max deviation {dev:.3g})")


def hermitian_eigendecomposition(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and the matching orthonormal eigenvector columns."""
    data = _matrix(m)
    _check_hermitian(data)
    w, v = np.linalg.eigh(data)
    return w[::-1].copy(), v[:, ::-1].copy()


def trace_norm(m) -> float:
    """Schatten-1 norm of a Hermitian matrix (sum of absolute eigenvalues)."""
    data = np.ascontiguousarray(_matrix(m))
    _check_hermitian(data)
    return float(kernels.trace_norm_hermitian(data))


def purify(rho: DensityOperator, ref_label: str = "R") -> PureState:
    """Canonical purification ``sum_i sqrt(l_i) |v_i>|i>_ref``.

    The reference has the same dimension as ``rho``; unused reference levels
    carry zero amplitude.
    """
    if ref_label in rho.shape.labels:
        raise LabelError(f"reference label {ref_label!r} already used")
    w, v = hermitian_eigendecomposition(rho)
    w = np.clip(w, 0.0, None)
    d = rho.shape.total_dim
    amp = v * np.sqrt(w)[None, :]
    vec = amp.reshape(d * d)
    vec = vec / np.linalg.norm(vec)
    return PureState(vec, rho.shape + SubsystemShape(((ref_label, d),)))


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _SEED_MASK))


def haar_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a complex Ginibre matrix with the R-diagonal phase fix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))[None, :]


def haar_unitary(d: int, seed: int, label: str = "A") -> LabeledMatrix:
    if d < 1:
        raise ShapeError("dimension must be at least 1")
    shape = SubsystemShape(((label, int(d)),))
    return LabeledMatrix(haar_matrix(int(d), make_rng(seed)), shape)


def uhlmann_isometry(phi: PureState, psi: PureState) -> tuple[LabeledMatrix, float]:
    """Optimal partial isometry ``V: C -> B`` for ``phi`` on ``A B`` and ``psi`` on ``A C``.

    The shared system ``A`` is the set of labels common to both states. ``V``
    maximizes ``|<phi|(1_A (x) V)|psi>|`` and the returned overlap is that
    maximum, i.e. the root fidelity of the two ``A`` marginals.
    """
    shared = [lab for lab in phi.shape.labels if lab in psi.shape.labels]
    if not shared:
        raise LabelError("states share no subsystem")
    for lab in shared:
        if phi.shape.dim(lab) != psi.shape.dim(lab):
            raise ShapeError(f"subsystem {lab!r} has different dimensions")
    b_shape = phi.shape.without(shared)
    c_shape = psi.shape.without(shared)
    db = b_shape.total_dim if len(b_shape) else 1
    dc = c_shape.total_dim if len(c_shape) else 1
    if dc > db:
        raise ShapeError(f"isometry needs dim(C)={dc} <= dim(B)={db}")
    a_order = list(shared)
    pa = permute(phi, a_order + list(b_shape.labels)).data.reshape(-1, db)
    pc = permute(psi, a_order + list(c_shape.labels)).data.reshape(-1, dc)
    # <phi|(1 (x) V)|psi> = Tr(V X) with X = psi^T conj(phi), a C x B matrix.
    x = pc.T @ pa.conj()
    w, s, yh = np.linalg.svd(x, full_matrices=False)
    v = yh.conj().T @ w.conj().T
    overlap = float(min(1.0, np.sum(s)))
    if not len(b_shape):
        b_shape = SubsystemShape((("_",  1),))
    if not len(c_shape):
        c_shape = SubsystemShape((("_", 1),))
    return LabeledMatrix(v, b_shape, c_shape), overlap


def basis_state(shape: SubsystemShape, index: Sequence[int] | int = 0) -> PureState:
    vec = np.zeros(shape.total_dim, dtype=np.complex128)
    if not isinstance(index, int):
        index = int(np.ravel_multi_index(tuple(index), shape.dims))
    vec[index] = 1.0
    return PureState(vec, shape)


def maximally_entangled(d: int, labels: Iterable[str] = ("A", "B")) -> PureState:
    a, b = _as_labels(labels)
    vec = np.eye(d, dtype=np.complex128).ravel() / np.sqrt(d)
    return PureState(vec, SubsystemShape(((a, d), (b, d))))


def random_pure_state(shape: SubsystemShape, seed: int) -> PureState:
    rng = make_rng(seed)
    n = shape.total_dim
    vec = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PureState(vec / np.linalg.norm(vec), shape)


def random_density(shape: SubsystemShape, seed: int, rank: int | None = None) -> DensityOperator:
    """Random mixed state from a Ginibre matrix (Hilbert-Schmidt measure at full rank)."""
    rng = make_rng(seed)
    n = shape.total_dim
    k = n if rank is None else int(rank)
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityOperator(rho / np.trace(rho).real, shape)
