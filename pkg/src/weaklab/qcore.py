"""Dense complex linear algebra and quantum-state primitives.

States and observables are plain numpy arrays wrapped in small immutable
dataclasses that enforce their defining invariants (unit norm,
Hermiticity) at construction time. All operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotCommuting, NotHermitian, ZeroState

__all__ = [
    "QuantumState",
    "Observable",
    "EigenSystem",
    "JointEigenSystem",
    "tensor",
    "hermitian_eig",
    "simultaneous_eig",
    "commutator_norm",
    "max_norm",
]

#: Relative tolerance for eigenvalue-degeneracy grouping in
#: simultaneous diagonalization.
DEGENERACY_RTOL = 1e-10


def max_norm(m: np.ndarray) -> float:
    """Largest absolute entry of a matrix (or vector)."""
    return float(np.max(np.abs(m))) if m.size else 0.0


@dataclass(frozen=True)
class QuantumState:
    """Normalized complex amplitude vector on a finite-dimensional space.

    The constructor normalizes the supplied amplitudes, so the unit-norm
    invariant holds for every instance. A vector of zero norm raises
    :class:`ZeroState`.
    """

    amplitudes: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size < 1:
            raise ZeroState("state vector must have dimension >= 1")
        norm = float(np.linalg.norm(amps))
        if norm < 1e-15:
            raise ZeroState("state vector has zero norm")
        amps = amps / norm
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dim", amps.size)

    def inner(self, other: "QuantumState") -> complex:
        """Inner product <self|other>."""
        if self.dim != other.dim:
            raise DimensionMismatch(
                f"states have dimensions {self.dim} and {other.dim}"
            )
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    @staticmethod
    def basis(dim: int, index: int) -> "QuantumState":
        """Computational basis vector |index> in `dim` dimensions."""
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return QuantumState(amps)


@dataclass(frozen=True)
class Observable:
    """Hermitian complex matrix on the system space.

    Hermiticity is enforced at construction: the max-norm of (M - M+)
    must not exceed 1e-12 times the max-norm of M.
    """

    matrix: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"observable matrix must be square, got {m.shape}")
        scale = max_norm(m)
        dev = max_norm(m - m.conj().T)
        if dev > 1e-12 * max(scale, 1e-300):
            raise NotHermitian(
                f"matrix is not Hermitian: max|M - M+| = {dev:.3e}, max|M| = {scale:.3e}"
            )
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim", m.shape[0])

    def expectation(self, state: QuantumState) -> float:
        """Real expectation value <psi|M|psi>."""
        if self.dim != state.dim:
            raise DimensionMismatch(
                f"observable dim {self.dim} != state dim {state.dim}"
            )
        return float(np.vdot(state.amplitudes, self.matrix @ state.amplitudes).real)

    def spectral_radius(self) -> float:
        """Largest absolute eigenvalue."""
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrix))))

    @staticmethod
    def identity(dim: int) -> "Observable":
        return Observable(np.eye(dim, dtype=complex))


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    eigenvalues are real and ascending; eigenvectors are the orthonormal
    columns of `eigenvectors`, phase-fixed so the largest-magnitude
    component of each column is real and positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class JointEigenSystem:
    """Common eigenbasis of two commuting observables.

    Column k of `eigenvectors` is a simultaneous eigenvector with
    eigenvalue pair (eigenvalues_a[k], eigenvalues_b[k]).
    """

    eigenvalues_a: np.ndarray
    eigenvalues_b: np.ndarray
    eigenvectors: np.ndarray


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real-positive.

    Gives reproducible eigenvector conventions for output files; ties in
    magnitude resolve to the lowest index via argmax.
    """
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        if abs(pivot) > 0:
            out[:, k] = col * (abs(pivot) / pivot)
    return out


def tensor(a, b):
    """Kronecker product of two states or two observables.

    Both operands must be of the same kind; the result lives on the
    product space (dimension = product of dimensions).
    """
    if isinstance(a, QuantumState) and isinstance(b, QuantumState):
        return QuantumState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, Observable) and isinstance(b, Observable):
        return Observable(np.kron(a.matrix, b.matrix))
    raise TypeError(
        f"tensor requires two states or two observables, got "
        f"{type(a).__name__} and {type(b).__name__}"
    )


def hermitian_eig(a: Observable) -> EigenSystem:
    """Eigendecomposition of a Hermitian observable.

    Returns real eigenvalues in ascending order with orthonormal,
    phase-fixed eigenvectors. Hermiticity is already guaranteed by the
    Observable type; this re-raises NotHermitian for raw matrices that
    slipped through (defensive; not expected in normal use).
    """
    m = a.matrix
    dev = max_norm(m - m.conj().T)
    if dev > 1e-12 * max(max_norm(m), 1e-300):
        raise NotHermitian(f"max|M - M+| = {dev:.3e}")
    vals, vecs = np.linalg.eigh(m)
    return EigenSystem(eigenvalues=vals, eigenvectors=_fix_phases(vecs))


def commutator_norm(a: Observable, b: Observable) -> float:
    """Max-norm of the commutator AB - BA. Zero iff A and B commute."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims {a.dim} and {b.dim} differ")
    return max_norm(a.matrix @ b.matrix - b.matrix @ a.matrix)


def simultaneous_eig(a: Observable, b: Observable, tol: float = 1e-10) -> JointEigenSystem:
    """Simultaneously diagonalize two commuting observables.

    Requires ``commutator_norm(a, b) <= tol * max|A| * max|B|``; raises
    :class:`NotCommuting` otherwise. Degenerate eigenspaces of A are
    resolved by diagonalizing the projection of B inside each eigenspace
    (eigenvalues of A within DEGENERACY_RTOL x spectral radius form one
    cluster). Output columns are ordered by (a_k ascending, then b_k
    ascending within each cluster).
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims {a.dim} and {b.dim} differ")
    scale = max(max_norm(a.matrix) * max_norm(b.matrix), 1e-300)
    comm = commutator_norm(a, b)
    if comm > tol * scale:
        raise NotCommuting(
            f"max|[A,B]| = {comm:.3e} exceeds tol*|A||B| = {tol * scale:.3e}"
        )

    vals_a, vecs = np.linalg.eigh(a.matrix)
    radius = max(float(np.max(np.abs(vals_a))), 1e-300)
    gap = DEGENERACY_RTOL * radius

    vecs = vecs.copy()
    vals_b = np.empty_like(vals_a)
    start = 0
    while start < len(vals_a):
        stop = start + 1
        while stop < len(vals_a) and vals_a[stop] - vals_a[stop - 1] <= gap:
            stop += 1
        block = vecs[:, start:stop]
        b_sub = block.conj().T @ b.matrix @ block
        b_sub = (b_sub + b_sub.conj().T) / 2.0
        sub_vals, sub_vecs = np.linalg.eigh(b_sub)
        vecs[:, start:stop] = block @ sub_vecs
        vals_b[start:stop] = sub_vals
        # one representative eigenvalue per cluster keeps pairs consistent
        vals_a[start:stop] = np.mean(vals_a[start:stop])
        start = stop

    vecs = _fix_phases(vecs)

    # confirm both inputs are diagonal in the constructed basis
    check_tol = max(tol, 1e-9)
    for m, name in ((a.matrix, "A"), (b.matrix, "B")):
        d = vecs.conj().T @ m @ vecs
        off = max_norm(d - np.diag(np.diag(d)))
        if off > check_tol * max(max_norm(m), 1e-300):
            raise NotCommuting(
                f"constructed basis fails to diagonalize {name}: "
                f"off-diagonal max {off:.3e}"
            )

    return JointEigenSystem(eigenvalues_a=vals_a, eigenvalues_b=vals_b, eigenvectors=vecs)
