"""Pure-numpy implementations of the hot kernels.

Signatures mirror ``_kernels.pyx`` exactly; :mod:`qrelay._backend` picks one
of the two at import time.
"""

import numpy as np

CLIP = 1e-12


def eigvalsh(h):
    """Ascending eigenvalues of a Hermitian matrix (lower triangle is read)."""
    return np.linalg.eigvalsh(np.asarray(h, dtype=np.complex128))


def entropy_bits(h):
    """Von Neumann entropy in bits, eigenvalues below ``CLIP`` dropped."""
    w = np.linalg.eigvalsh(np.asarray(h, dtype=np.complex128))
    w = w[w > CLIP]
    return float(-np.sum(w * np.log2(w)))


def trace_norm_hermitian(h):
    return float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(h, dtype=np.complex128)))))


def _split(dims, keep):
    dims = [int(x) for x in dims]
    kept = [i for i, k in enumerate(keep) if k]
    traced = [i for i, k in enumerate(keep) if not k]
    return dims, kept, traced


def partial_trace(rho, dims, keep):
    """Trace out every subsystem whose ``keep`` flag is false.

    Kept subsystems stay in their original order.
    """
    dims, kept, traced = _split(dims, keep)
    n = len(dims)
    dk = int(np.prod([dims[i] for i in kept], dtype=np.int64))
    dt = int(np.prod([dims[i] for i in traced], dtype=np.int64))
    t = np.asarray(rho, dtype=np.complex128).reshape(dims + dims)
    perm = kept + traced
    t = t.transpose(perm + [n + i for i in perm]).reshape(dk, dt, dk, dt)
    return np.ascontiguousarray(np.einsum("atbt->ab", t))


def pure_marginal(psi, dims, keep):
    """Reduced density matrix of the pure state ``psi`` on the kept subsystems."""
    dims, kept, traced = _split(dims, keep)
    dk = int(np.prod([dims[i] for i in kept], dtype=np.int64))
    m = np.asarray(psi, dtype=np.complex128).reshape(dims).transpose(kept + traced)
    m = m.reshape(dk, -1)
    return m @ m.conj().T


def kraus_apply(kraus, rho, rest):
    """``sum_k (1_rest (x) K_k) rho (1_rest (x) K_k)^dagger`` with the channel on the last factor."""
    kraus = np.asarray(kraus, dtype=np.complex128)
    _, dout, din = kraus.shape
    r = np.asarray(rho, dtype=np.complex128).reshape(rest, din, rest, din)
    out = np.einsum("kim,ambn,kjn->aibj", kraus, r, kraus.conj(), optimize=True)
    return np.ascontiguousarray(out.reshape(rest * dout, rest * dout))
