"""Depolarizing strength of Haar-twirled two-qubit channels.

Twirling any two-qubit channel over the Haar measure leaves a depolarizing
channel ``X -> lam X + (1 - lam) tr(X) I/4``. :func:`lambda_from_kraus` gives
``lam`` in closed form; :func:`haar_twirl_oracle` estimates it by sampling
unitaries and never uses Kraus traces.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from errprop.errors import ValidationError

COMPLETENESS_TOL = 1e-10

PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# 15 traceless two-qubit Pauli products, as a (15, 4, 4) stack
TRACELESS_PAULIS = np.array(
    [np.kron(a, b) for a, b in itertools.product(PAULIS, PAULIS)][1:]
)


@dataclass(frozen=True)
class KrausSet:
    ops: tuple[np.ndarray, ...]

    def __init__(self, ops: Sequence[np.ndarray], validate: bool = True):
        arrays = tuple(np.asarray(op, dtype=complex) for op in ops)
        object.__setattr__(self, "ops", arrays)
        if validate:
            self.validate()

    def __len__(self) -> int:
        return len(self.ops)

    def stack(self) -> np.ndarray:
        return np.array(self.ops)

    def completeness_residual(self) -> float:
        """``max |sum_k A_k^dag A_k - I|`` over matrix entries."""
        A = self.stack()
        total = np.einsum("kji,kjl->il", A.conj(), A)
        return float(np.max(np.abs(total - np.eye(4))))

    def validate(self) -> None:
        if not self.ops:
            raise ValidationError("a Kraus set needs at least one operator")
        if any(op.shape != (4, 4) for op in self.ops):
            raise ValidationError("Kraus operators must be 4x4")
        residual = self.completeness_residual()
        if residual > COMPLETENESS_TOL:
            raise ValidationError(f"Kraus set is not trace preserving (residual {residual:.3g})")

    def superoperator(self) -> np.ndarray:
        """16x16 matrix acting on row-major ``vec(X)``: ``sum_k A_k (x) conj(A_k)``."""
        return sum(np.kron(A, A.conj()) for A in self.ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        A = self.stack()
        return np.einsum("kij,...jl,kml->...im", A, rho, A.conj())

    def conjugated(self, U: np.ndarray) -> KrausSet:
        """Kraus set of ``X -> U^dag M(U X U^dag) U``."""
        Ud = U.conj().T
        return KrausSet([Ud @ A @ U for A in self.ops])


@dataclass(frozen=True)
class TwirlResult:
    lam: float
    method: str
    stderr: float = 0.0
    samples: int = 0
    # largest |E_avg(P) - lam P| over the traceless Pauli basis (oracle only)
    basis_deviation: float = 0.0


def lambda_from_kraus(kraus: KrausSet) -> TwirlResult:
    """``lam = (sum_k |tr A_k|^2 - 1) / 15``."""
    kraus.validate()
    total = sum(abs(np.trace(A)) ** 2 for A in kraus.ops)
    return TwirlResult(lam=float((total - 1.0) / 15.0), method="analytic")


def haar_unitaries(count: int, rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    """Haar-distributed unitaries from QR of complex Ginibre matrices.

    The phases of R's diagonal are folded back into Q so the result is Haar
    rather than biased by the QR sign convention.
    """
    Z = (rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (d / np.abs(d))[:, None, :]


def haar_twirl_oracle(kraus: KrausSet, samples: int = 10_000, seed: int = 0, batch: int = 2048) -> TwirlResult:
    """Monte Carlo estimate of ``lam`` from explicit Haar averaging.

    For each unitary ``U`` one traceless Pauli ``P`` is chosen uniformly and
    the scale factor ``tr(P U^dag M(U P U^dag) U) / 4`` is recorded; its mean
    is unbiased for ``lam`` exactly when the average over ``U`` is a
    depolarizing channel. The full averaged action on all 15 basis elements is
    accumulated as well, and its largest departure from ``lam P`` is returned
    as a consistency diagnostic.
    """
    kraus.validate()
    if samples < 1:
        raise ValidationError(f"samples must be positive, got {samples}")
    rng = np.random.default_rng(seed)
    S = kraus.superoperator()
    values = np.empty(samples)
    averaged = np.zeros((15, 4, 4), dtype=complex)
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        U = haar_unitaries(m, rng)[:, None]
        Ud = np.conj(np.swapaxes(U, -1, -2))
        choice = rng.integers(0, 15, size=m)
        X = U @ TRACELESS_PAULIS @ Ud
        MX = (X.reshape(m, 15, 16) @ S.T).reshape(m, 15, 4, 4)
        Y = Ud @ MX @ U
        averaged += Y.sum(axis=0)
        picked = Y[np.arange(m), choice]
        P = TRACELESS_PAULIS[choice]
        values[done : done + m] = np.einsum("sij,sji->s", P, picked).real / 4.0
        done += m
    lam = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    averaged /= samples
    deviation = float(np.max(np.abs(averaged - lam * TRACELESS_PAULIS)))
    return TwirlResult(lam=lam, method="haar_mc", stderr=stderr, samples=samples, basis_deviation=deviation)


def builtin_channels(tag: str) -> KrausSet:
    """Kraus sets for the error patterns a two-qubit gate can see.

    ``identity``: no error. ``depolarize2``: both qubits replaced by I/2.
    ``trace_qubit1`` / ``trace_qubit2``: only the first / second tensor factor
    is replaced by I/2.
    """
    if tag == "identity":
        return KrausSet([np.eye(4)])
    if tag == "depolarize2":
        return KrausSet([np.kron(a, b) / 4.0 for a, b in itertools.product(PAULIS, PAULIS)])
    if tag == "trace_qubit1":
        return KrausSet([np.kron(s, PAULIS[0]) / 2.0 for s in PAULIS])
    if tag == "trace_qubit2":
        return KrausSet([np.kron(PAULIS[0], s) / 2.0 for s in PAULIS])
    raise ValidationError(f"unknown channel {tag!r}; expected one of {', '.join(CHANNEL_TAGS)}")


CHANNEL_TAGS = ("identity", "depolarize2", "trace_qubit1", "trace_qubit2")
