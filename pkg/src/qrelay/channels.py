"""CPTP maps in Kraus form, dilations, and relay-channel constructors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import LabelError, NumericDomainError, ParameterError, ShapeError
from .linalg import (
    DensityOperator,
    LabeledMatrix,
    PureState,
    SubsystemShape,
    _as_labels,
    haar_matrix,
    make_rng,
    permute,
    trace_norm,
)

COMPLETENESS_TOL = 1e-8
UNITARY_TOL = 1e-8
CHOI_EQUAL_TOL = 1e-7

RELAY_INPUTS = ("A", "D")
RELAY_OUTPUTS = ("B", "E")


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Kraus representation; ``kraus`` has shape ``(n, dim_out, dim_in)``."""

    kraus: np.ndarray
    input_shape: SubsystemShape
    output_shape: SubsystemShape
    name: str = "kraus"

    def __post_init__(self):
        k = np.array(self.kraus, dtype=np.complex128, copy=True)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] < 1:
            raise ShapeError("need a non-empty stack of Kraus matrices")
        if k.shape[1:] != (self.output_shape.total_dim, self.input_shape.total_dim):
            raise ShapeError(
                f"Kraus operators are {k.shape[1]}x{k.shape[2]} but shapes give "
                f"{self.output_shape.total_dim}x{self.input_shape.total_dim}"
            )
        if not np.all(np.isfinite(k)):
            raise NumericDomainError(f"channel {self.name!r} has non-finite Kraus entries")
        dev = completeness_error(k)
        if dev > COMPLETENESS_TOL:
            raise ParameterError(
                f"channel {self.name!r} violates Kraus completeness by {dev:.3g}"
            )
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)

    @property
    def num_kraus(self) -> int:
        return self.kraus.shape[0]

    @property
    def dim_in(self) -> int:
        return self.input_shape.total_dim

    @property
    def dim_out(self) -> int:
        return self.output_shape.total_dim

    def relabel(self, inputs=None, outputs=None) -> QuantumChannel:
        """Copy with new subsystem labels (same dims, same order)."""
        ins = self.input_shape
        outs = self.output_shape
        if inputs is not None:
            ins = SubsystemShape.from_lists(_as_labels(inputs), ins.dims)
        if outputs is not None:
            outs = SubsystemShape.from_lists(_as_labels(outputs), outs.dims)
        return QuantumChannel(self.kraus, ins, outs, self.name)

    def to_spec(self) -> dict:
        """Explicit-Kraus JSON form (complex numbers as ``[re, im]``)."""
        return {
            "kraus": [
                [[[float(z.real), float(z.imag)] for z in row] for row in mat]
                for mat in self.kraus
            ],
            "input_dims": list(self.input_shape.dims),
            "output_dims": list(self.output_shape.dims),
        }


class RelayChannel(QuantumChannel):
    """A channel ``N_{AD -> BE}``: inputs labeled A, D and outputs B, E."""

    def __post_init__(self):
        super().__post_init__()
        if self.input_shape.labels != RELAY_INPUTS or self.output_shape.labels != RELAY_OUTPUTS:
            raise LabelError(
                f"relay channel must map {RELAY_INPUTS} -> {RELAY_OUTPUTS}, got "
                f"{self.input_shape.labels} -> {self.output_shape.labels}"
            )

    @classmethod
    def from_channel(cls, ch: QuantumChannel) -> RelayChannel:
        return cls(ch.kraus, ch.input_shape, ch.output_shape, ch.name)

    @property
    def dims(self) -> dict:
        return {
            "A": self.input_shape.dim("A"),
            "D": self.input_shape.dim("D"),
            "B": self.output_shape.dim("B"),
            "E": self.output_shape.dim("E"),
        }


@dataclass(frozen=True, eq=False)
class StinespringDilation:
    isometry: LabeledMatrix
    env_label: str
    env_dim: int


def completeness_error(kraus) -> float:
    """``max |sum_k K_k^dagger K_k - I|`` entrywise."""
    k = np.asarray(kraus, dtype=np.complex128)
    s = np.einsum("koi,koj->ij", k.conj(), k)
    return float(np.max(np.abs(s - np.eye(k.shape[2]))))


def _single(label: str, d: int) -> SubsystemShape:
    return SubsystemShape(((label, int(d)),))


def _prob(params: dict, key: str) -> float:
    if key not in params:
        raise ParameterError(f"missing parameter {key!r}")
    p = float(params[key])
    if not math.isfinite(p):
        raise NumericDomainError(f"parameter {key}={p} is not finite")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"parameter {key}={p} outside [0, 1]")
    return p


def _dim(params: dict, default: int | None = 2) -> int:
    d = params.get("d", default)
    if d is None:
        raise ParameterError("missing parameter 'd'")
    if int(d) != d or int(d) < 2:
        raise ParameterError(f"dimension d={d} must be an integer >= 2")
    return int(d)


def weyl_operators(d: int) -> list[np.ndarray]:
    """``X^a Z^b`` for ``a, b`` in ``range(d)``, identity first."""
    x = np.roll(np.eye(d), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [
        np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)
        for a in range(d)
        for b in range(d)
    ]


CHANNEL_KINDS = ("identity", "depolarizing", "erasure", "amplitude_damping", "dephasing")


def make_channel(kind: str, params: dict | None = None, *, in_label: str = "A",
                 out_label: str = "B") -> QuantumChannel:
    """Standard single-system channels.

    ``depolarizing(d, p)`` is ``rho -> (1 - p) rho + p I/d``. ``erasure(d, p)``
    has output dimension ``d + 1`` with the flag as the last basis vector.
    ``dephasing(p)`` is ``rho -> (1 - p) rho + p Z rho Z``.
    """
    params = dict(params or {})
    if kind == "identity":
        d = _dim(params)
        kraus = [np.eye(d)]
        din = dout = d
    elif kind == "depolarizing":
        d = _dim(params)
        p = _prob(params, "p")
        ops = weyl_operators(d)
        w0 = 1.0 - p + p / d**2
        kraus = [np.sqrt(w0) * ops[0]] + [np.sqrt(p / d**2) * u for u in ops[1:]]
        din = dout = d
    elif kind == "erasure":
        d = _dim(params)
        p = _prob(params, "p")
        keep = np.zeros((d + 1, d))
        keep[:d, :d] = np.eye(d)
        kraus = [np.sqrt(1.0 - p) * keep]
        for i in range(d):
            flag = np.zeros((d + 1, d))
            flag[d, i] = 1.0
            kraus.append(np.sqrt(p) * flag)
        din, dout = d, d + 1
    elif kind == "amplitude_damping":
        g = _prob(params, "gamma")
        kraus = [
            np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - g)]]),
            np.array([[0.0, np.sqrt(g)], [0.0, 0.0]]),
        ]
        din = dout = 2
    elif kind == "dephasing":
        p = _prob(params, "p")
        kraus = [np.sqrt(1.0 - p) * np.eye(2), np.sqrt(p) * np.diag([1.0, -1.0])]
        din = dout = 2
    else:
        raise ParameterError(f"unknown channel kind {kind!r}; expected one of {CHANNEL_KINDS}")
    return QuantumChannel(np.array(kraus, dtype=np.complex128), _single(in_label, din),
                          _single(out_label, dout), kind)


def random_channel(dim_in: int, dim_out: int, num_kraus: int, seed: int, *,
                   in_label: str = "A", out_label: str = "B") -> QuantumChannel:
    """Channel whose Stinespring isometry is the first columns of a Haar unitary."""
    big = dim_out * num_kraus
    if big < dim_in:
        raise ShapeError("dim_out * num_kraus must be at least dim_in")
    v = haar_matrix(big, make_rng(seed))[:, :dim_in]
    kraus = v.reshape(dim_out, num_kraus, dim_in).transpose(1, 0, 2)
    return QuantumChannel(kraus, _single(in_label, dim_in), _single(out_label, dim_out), "random")


def apply_channel(ch: QuantumChannel, rho, acting_on=None) -> DensityOperator:
    """Apply ``ch`` to the subsystems ``acting_on`` of ``rho``.

    Untouched subsystems keep their order; the channel outputs are inserted
    where the first acted-on subsystem was.
    """
    if isinstance(rho, PureState):
        rho = rho.density()
    targets = ch.input_shape.labels if acting_on is None else _as_labels(acting_on)
    if set(targets) != set(ch.input_shape.labels) or len(targets) != len(ch.input_shape):
        raise ShapeError(
            f"channel acts on {ch.input_shape.labels}, asked to act on {tuple(targets)}"
        )
    for lab in ch.input_shape.labels:
        if rho.shape.dim(lab) != ch.input_shape.dim(lab):
            raise ShapeError(
                f"subsystem {lab!r} has dim {rho.shape.dim(lab)}, channel expects "
                f"{ch.input_shape.dim(lab)}"
            )
    rest = rho.shape.without(ch.input_shape.labels)
    clash = set(rest.labels) & set(ch.output_shape.labels)
    if clash:
        raise LabelError(f"output labels {sorted(clash)} collide with untouched subsystems")
    work = permute(rho, rest.labels + ch.input_shape.labels)
    data = kernels.kraus_apply(ch.kraus, work.data, rest.total_dim if len(rest) else 1)
    out = DensityOperator.trusted(data, rest + ch.output_shape)
    first = min(rho.shape.index(lab) for lab in ch.input_shape.labels)
    n_before = sum(1 for lab in rho.shape.labels[:first] if lab in rest.labels)
    order = rest.labels[:n_before] + ch.output_shape.labels + rest.labels[n_before:]
    if order == out.shape.labels:
        return out
    return permute(out, order)


def stinespring_isometry(ch: QuantumChannel, env_label: str = "J") -> StinespringDilation:
    """``V = sum_k K_k (x) |k>_env`` with the environment as the last output factor."""
    if env_label in ch.output_shape.labels:
        raise LabelError(f"environment label {env_label!r} clashes with outputs")
    n = ch.num_kraus
    v = ch.kraus.transpose(1, 0, 2).reshape(ch.dim_out * n, ch.dim_in)
    shape = ch.output_shape + _single(env_label, n)
    return StinespringDilation(LabeledMatrix(v, shape, ch.input_shape), env_label, n)


def complementary_channel(ch: QuantumChannel, keep_outputs=(), env_label: str = "J") -> QuantumChannel:
    """``rho -> Tr_X(V rho V^dagger)`` where X are the outputs not in ``keep_outputs``.

    With ``keep_outputs=()`` this is the usual complementary channel onto the
    environment. Keeping some outputs groups them with the environment, which
    gives e.g. the composite environments ``J_E = B J_O`` and ``J_B = E J_O`` of
    a relay channel.
    """
    keep = _as_labels(keep_outputs)
    for lab in keep:
        ch.output_shape.index(lab)
    if env_label in ch.output_shape.labels:
        raise LabelError(f"environment label {env_label!r} clashes with outputs")
    out = ch.output_shape
    kept = out.select(keep)
    traced = out.without(keep)
    n = ch.num_kraus
    t = ch.kraus.reshape((n,) + out.dims + (ch.dim_in,))
    perm = [1 + out.index(lab) for lab in kept.labels + traced.labels]
    dk = kept.total_dim if len(kept) else 1
    dt = traced.total_dim if len(traced) else 1
    t = t.transpose([0] + perm + [len(out) + 1]).reshape(n, dk, dt, ch.dim_in)
    # New Kraus operator per traced basis vector: rows (kept, env), columns input.
    kraus = t.transpose(2, 1, 0, 3).reshape(dt, dk * n, ch.dim_in)
    return QuantumChannel(kraus, ch.input_shape, kept + _single(env_label, n),
                          f"complement({ch.name})")


def choi_matrix(ch: QuantumChannel) -> DensityOperator:
    """Normalized Choi state ``(ch (x) id)(Phi)`` on outputs followed by ``ref_<input>``."""
    vecs = ch.kraus.reshape(ch.num_kraus, -1) / np.sqrt(ch.dim_in)
    j = vecs.T @ vecs.conj()
    ref = SubsystemShape(tuple((f"ref_{lab}", d) for lab, d in ch.input_shape.entries))
    return DensityOperator.trusted(j, ch.output_shape + ref)


def choi_distance(a: QuantumChannel, b: QuantumChannel) -> float:
    ja, jb = choi_matrix(a), choi_matrix(b)
    if ja.shape != jb.shape:
        raise ShapeError("channels have different input/output shapes")
    return trace_norm(ja.data - jb.data)


def channels_equal(a: QuantumChannel, b: QuantumChannel, tol: float = CHOI_EQUAL_TOL) -> bool:
    return choi_distance(a, b) <= tol


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return (u.ndim == 2 and u.shape[0] == u.shape[1]
            and np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def swap_unitary(d1: int, d2: int | None = None) -> np.ndarray:
    """Permutation ``|i>|j> -> |j>|i>`` from ``C^d1 (x) C^d2`` to ``C^d2 (x) C^d1``."""
    d2 = d1 if d2 is None else d2
    s = np.zeros((d1 * d2, d1 * d2))
    for i in range(d1):
        for j in range(d2):
            s[j * d1 + i, i * d2 + j] = 1.0
    return s


def partial_swap(d: int, theta: float) -> np.ndarray:
    """``cos(theta) I + i sin(theta) SWAP`` on two ``d``-level systems."""
    return np.cos(theta) * np.eye(d * d) + 1j * np.sin(theta) * swap_unitary(d)


def orthogonal_relay(p_link: QuantumChannel, m_link: QuantumChannel) -> RelayChannel:
    """``N = P_{A->E} (x) M_{D->B}`` with outputs ordered ``B, E``."""
    da, de = p_link.dim_in, p_link.dim_out
    dd, db = m_link.dim_in, m_link.dim_out
    k = np.einsum("jbd,iea->ijbead", m_link.kraus, p_link.kraus)
    k = k.reshape(p_link.num_kraus * m_link.num_kraus, db * de, da * dd)
    return RelayChannel(k, SubsystemShape.of(A=da, D=dd), SubsystemShape.of(B=db, E=de),
                        f"orthogonal({p_link.name}, {m_link.name})")


def interaction_relay(u: np.ndarray, noise_b: QuantumChannel, noise_e: QuantumChannel,
                      dims: tuple[int, int] | None = None) -> RelayChannel:
    """Joint unitary on ``A (x) D`` followed by local noise.

    ``u`` maps ``A (x) D`` onto two slots. The first slot feeds the relay
    through ``noise_e``; the second feeds the destination through ``noise_b``.
    So ``u = I`` is the orthogonal-links model (A to E, D to B) and
    ``u = SWAP`` the crossed model where B receives A. ``dims = (|A|, |D|)``
    defaults to the slot dimensions.
    """
    slot1, slot2 = noise_e.dim_in, noise_b.dim_in
    da, dd = (slot1, slot2) if dims is None else (int(dims[0]), int(dims[1]))
    u = np.asarray(u, dtype=np.complex128)
    if da * dd != slot1 * slot2 or u.shape != (da * dd, da * dd):
        raise ShapeError(f"unitary must be {slot1 * slot2}x{slot1 * slot2} and match |A||D|, "
                         f"got {u.shape}")
    if not is_unitary(u):
        raise ParameterError("interaction matrix is not unitary within 1e-8")
    local = np.einsum("iby,jex->ijbexy", noise_b.kraus, noise_e.kraus)
    local = local.reshape(noise_b.num_kraus * noise_e.num_kraus,
                          noise_b.dim_out * noise_e.dim_out, da * dd)
    k = local @ u
    return RelayChannel(k, SubsystemShape.of(A=da, D=dd),
                        SubsystemShape.of(B=noise_b.dim_out, E=noise_e.dim_out),
                        f"interaction({noise_b.name}, {noise_e.name})")


def compose_relay(variant: str, **kw) -> RelayChannel:
    """Dispatch to :func:`orthogonal_relay` (``P``, ``M``) or :func:`interaction_relay` (``U``, ``noise_B``, ``noise_E``)."""
    if variant == "orthogonal":
        return orthogonal_relay(kw["P"], kw["M"])
    if variant == "interaction":
        return interaction_relay(kw["U"], kw["noise_B"], kw["noise_E"])
    raise ParameterError(f"unknown relay variant {variant!r}")


def partial_swap_relay(theta: float, p: float, d: int = 2) -> RelayChannel:
    """Showcase non-orthogonal relay: partial SWAP then ``depolarizing(d, p)`` on each output.

    ``theta = 0`` is the orthogonal-links model (A to E, D to B);
    ``theta = pi/2`` routes A to B and D to E.
    """
    noise = make_channel("depolarizing", {"d": d, "p": p})
    return interaction_relay(partial_swap(d, theta), noise, noise)


def random_relay_channel(dims: dict, num_kraus: int, seed: int) -> RelayChannel:
    """Haar-random relay channel with ``dims`` keyed by ``A, D, B, E``."""
    ch = random_channel(dims["A"] * dims["D"], dims["B"] * dims["E"], num_kraus, seed)
    return RelayChannel(ch.kraus, SubsystemShape.of(A=dims["A"], D=dims["D"]),
                        SubsystemShape.of(B=dims["B"], E=dims["E"]), "random")


# -- JSON-style serialization -------------------------------------------------


def _complex_array(obj, what: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError):
        raise ParameterError(f"{what}: expected nested lists of [re, im] pairs") from None
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ParameterError(f"{what}: complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _shape_from_dims(labels, dims, what) -> SubsystemShape:
    if not isinstance(dims, (list, tuple)) or len(dims) != len(labels):
        raise ParameterError(f"{what}: expected {len(labels)} dims, got {dims!r}")
    return SubsystemShape.from_lists(labels, [int(x) for x in dims])


def channel_from_spec(spec: dict, *, in_labels=("A",), out_labels=("B",)) -> QuantumChannel:
    """Build a single channel from ``{"kind", "params"}`` or explicit Kraus form."""
    if not isinstance(spec, dict):
        raise ParameterError(f"channel spec must be an object, got {type(spec).__name__}")
    if "kraus" in spec:
        kraus = _complex_array(spec["kraus"], "kraus")
        if kraus.ndim != 3:
            raise ParameterError("kraus: expected a list of matrices")
        ins = _shape_from_dims(in_labels, spec.get("input_dims", [kraus.shape[2]]), "input_dims")
        outs = _shape_from_dims(out_labels, spec.get("output_dims", [kraus.shape[1]]), "output_dims")
        try:
            return QuantumChannel(kraus, ins, outs, spec.get("name", "kraus"))
        except ShapeError as exc:
            raise ParameterError(str(exc)) from None
    if "kind" not in spec:
        raise ParameterError("channel spec needs 'kind' or 'kraus'")
    if len(in_labels) != 1 or len(out_labels) != 1:
        raise ParameterError(f"named channel {spec['kind']!r} has a single input and output")
    return make_channel(spec["kind"], spec.get("params", {}),
                        in_label=in_labels[0], out_label=out_labels[0])


def _unitary_from_spec(obj, params: dict, d_a: int, d_d: int) -> np.ndarray:
    if isinstance(obj, str):
        if obj == "swap":
            if d_a != d_d:
                raise ParameterError("swap interaction needs |A| = |D|")
            return swap_unitary(d_a)
        if obj == "partial_swap":
            if d_a != d_d:
                raise ParameterError("partial_swap interaction needs |A| = |D|")
            return partial_swap(d_a, float(params.get("theta", np.pi / 2)))
        if obj == "identity":
            return np.eye(d_a * d_d)
        raise ParameterError(f"unknown unitary {obj!r}")
    return _complex_array(obj, "unitary")


def relay_from_spec(spec: dict) -> RelayChannel:
    """Build a relay channel ``N_{AD->BE}`` from its JSON-style description.

    Accepted forms::

        {"kind": "partial_swap", "params": {"theta": t, "p": p, "d": 2}}
        {"kind": "orthogonal", "params": {"P": <channel>, "M": <channel>}}
        {"kind": "interaction", "params": {"unitary": "swap" | "partial_swap" | matrix,
                                           "theta": t, "noise_B": <channel>, "noise_E": <channel>}}
        {"kraus": [...], "input_dims": [dA, dD], "output_dims": [dB, dE]}
    """
    if not isinstance(spec, dict):
        raise ParameterError("relay channel spec must be an object")
    if "kraus" in spec:
        ch = channel_from_spec(spec, in_labels=RELAY_INPUTS, out_labels=RELAY_OUTPUTS)
        return RelayChannel.from_channel(ch)
    kind = spec.get("kind")
    params = dict(spec.get("params", {}))
    try:
        if kind == "partial_swap":
            return partial_swap_relay(float(params.get("theta", np.pi / 2)), _prob(params, "p"),
                                      _dim(params))
        if kind == "orthogonal":
            p_link = channel_from_spec(params["P"], in_labels=("A",), out_labels=("E",))
            m_link = channel_from_spec(params["M"], in_labels=("D",), out_labels=("B",))
            return orthogonal_relay(p_link, m_link)
        if kind == "interaction":
            nb = channel_from_spec(params["noise_B"], in_labels=("D",), out_labels=("B",))
            ne = channel_from_spec(params["noise_E"], in_labels=("A",), out_labels=("E",))
            u = _unitary_from_spec(params.get("unitary", "swap"), params, ne.dim_in, nb.dim_in)
            return interaction_relay(u, nb, ne)
    except KeyError as exc:
        raise ParameterError(f"relay spec {kind!r} is missing {exc.args[0]!r}") from None
    except ShapeError as exc:
        raise ParameterError(str(exc)) from None
    raise ParameterError(f"unknown relay channel kind {kind!r}")
