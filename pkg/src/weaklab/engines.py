"""Post-selected pointer moments under the weak-measurement coupling.

Three routes compute the same conditional moments:

* ``run_single_exact`` / ``run_joint_exact`` -- closed form. The initial
  state is expanded in the (joint) eigenbasis of the coupled
  observable(s); each branch carries a Gaussian displaced by coupling x
  eigenvalue, and moments reduce to the pointer module's overlap
  integrals. Exact at any coupling strength.
* ``run_fock`` -- exact unitary evolution in a truncated oscillator
  space. Valid for noncommuting observable pairs, where the closed-form
  joint route refuses to run.
* ``heisenberg_moment`` -- order-by-order nested-commutator expansion of
  a post-selected pointer observable, returning each order separately so
  parity properties of the series are directly testable.

The Fock propagator exploits that the pointer momenta commute with the
coupling Hamiltonian: in the momentum eigenbasis the evolution is block
diagonal over momentum grid points, with one system-dimension Hermitian
block each. This is algebraically identical to eigendecomposing the full
H = Kx A Px + Ky B Py on the product space, at a tiny fraction of the
cost.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NumericalInconsistency,
    OrthogonalPostselection,
    TruncationWarning,
)
from .pointer import FockPointer, GaussianPointer, build_fock, gaussian_overlap, moment_p, moment_x
from .qcore import Observable, QuantumState, hermitian_eig, simultaneous_eig

__all__ = [
    "SingleCoupling",
    "JointCoupling",
    "MeasurementRecord",
    "run_single_exact",
    "run_joint_exact",
    "run_fock",
    "heisenberg_moment",
    "EPS_PS",
]

#: Default post-selection probability floor; conditional moments are
#: numerically meaningless below it.
EPS_PS = 1e-12

#: Imaginary residue above which a conditional moment of a Hermitian
#: observable is treated as a bug rather than rounded away.
IMAG_RESIDUE_TOL = 1e-10

#: Population of the top two Fock levels above which truncated results
#: are flagged as unreliable.
TRUNCATION_TOL = 1e-8

#: Default oscillator truncation level for the Fock engine.
DEFAULT_N_MAX = 40


@dataclass(frozen=True)
class SingleCoupling:
    """Impulsive coupling K A Px of one observable to one pointer.

    K = gT absorbs the interaction time; all outputs depend on K only.
    """

    A: Observable
    K: float
    pointer: GaussianPointer

    def __post_init__(self):
        if not math.isfinite(self.K):
            raise ValueError(f"coupling K must be finite, got {self.K}")

    def weakness_ratio(self) -> float:
        """|K| x spectral radius of A over sigma; small means weak."""
        return abs(self.K) * self.A.spectral_radius() / self.pointer.sigma


@dataclass(frozen=True)
class JointCoupling:
    """Local couplings Kx A Px + Ky B Py to a two-dimensional pointer."""

    A: Observable
    B: Observable
    Kx: float
    Ky: float
    pointer_x: GaussianPointer
    pointer_y: GaussianPointer

    def __post_init__(self):
        if self.A.dim != self.B.dim:
            raise DimensionMismatch(
                f"A and B act on different dimensions ({self.A.dim} vs {self.B.dim})"
            )
        if not (math.isfinite(self.Kx) and math.isfinite(self.Ky)):
            raise ValueError("couplings Kx, Ky must be finite")
        if self.pointer_x.hbar != self.pointer_y.hbar:
            raise ValueError(
                "both pointer axes must share one hbar convention, got "
                f"{self.pointer_x.hbar} and {self.pointer_y.hbar}"
            )

    def weakness_ratio(self) -> float:
        """Worst of the per-axis weakness ratios."""
        rx = abs(self.Kx) * self.A.spectral_radius() / self.pointer_x.sigma
        ry = abs(self.Ky) * self.B.spectral_radius() / self.pointer_y.sigma
        return max(rx, ry)


@dataclass(frozen=True)
class MeasurementRecord:
    """Post-selection probability and conditional pointer moments.

    Single-coupling runs leave the y-axis fields at zero (a spectator
    pointer stays in its symmetric vacuum, so its conditional moments
    vanish identically).
    """

    ps_prob: float
    x_mean: float
    px_mean: float
    y_mean: float = 0.0
    py_mean: float = 0.0
    xy_mean: float = 0.0
    x_py_mean: float = 0.0
    weakness_ratio: float = 0.0
    engine_tag: str = ""
    truncation_warning: bool = False

    def __post_init__(self):
        if not (-1e-12 <= self.ps_prob <= 1.0 + 1e-12):
            raise NumericalInconsistency(
                f"post-selection probability {self.ps_prob!r} outside [0, 1]"
            )
        object.__setattr__(self, "ps_prob", min(max(self.ps_prob, 0.0), 1.0))


def _realize(value: complex, name: str) -> float:
    """Discard the imaginary residue of a conditional moment after
    checking it is consistent with zero."""
    if abs(value.imag) > IMAG_RESIDUE_TOL:
        raise NumericalInconsistency(
            f"{name} has imaginary residue {value.imag:.3e}; "
            "conditional moments of Hermitian observables must be real"
        )
    return float(value.real)


def _check_dims(i: QuantumState, f: QuantumState, dim: int):
    if i.dim != dim or f.dim != dim:
        raise DimensionMismatch(
            f"states of dim {i.dim}, {f.dim} do not match observable dim {dim}"
        )


def _moment_matrices(displacements: np.ndarray, p: GaussianPointer):
    """Branch-pair matrices of pointer integrals for a list of
    displacements: overlap, position moment, momentum moment."""
    n = len(displacements)
    ov = np.empty((n, n))
    mx = np.empty((n, n))
    mp = np.empty((n, n), dtype=complex)
    for k in range(n):
        for l in range(n):
            ov[k, l] = gaussian_overlap(displacements[k], displacements[l], p)
            mx[k, l] = moment_x(displacements[k], displacements[l], p)
            mp[k, l] = moment_p(displacements[k], displacements[l], p)
    return ov, mx, mp


def run_single_exact(
    i: QuantumState,
    f: QuantumState,
    c: SingleCoupling,
    eps_ps: float = EPS_PS,
) -> MeasurementRecord:
    """Closed-form conditional moments for a single weak coupling.

    Expands |i> in the eigenbasis of A; the post-selected pointer state
    is a sum of Gaussians displaced by K a_k with amplitudes
    <f|a_k><a_k|i>, and all moments assemble from pairwise pointer
    integrals. Exact to machine precision at any K.
    """
    _check_dims(i, f, c.A.dim)
    es = hermitian_eig(c.A)
    amp = (f.amplitudes.conj() @ es.eigenvectors) * (
        es.eigenvectors.conj().T @ i.amplitudes
    )
    disp = c.K * es.eigenvalues
    ov, mx, mp = _moment_matrices(disp, c.pointer)

    ps = _realize(complex(amp.conj() @ ov @ amp), "ps_prob")
    if ps < eps_ps:
        raise OrthogonalPostselection(
            f"post-selection probability {ps:.3e} below floor {eps_ps:.1e}"
        )
    x_mean = _realize(complex(amp.conj() @ mx @ amp), "x_mean") / ps
    px_mean = _realize(complex(amp.conj() @ mp @ amp), "px_mean") / ps

    return MeasurementRecord(
        ps_prob=ps,
        x_mean=x_mean,
        px_mean=px_mean,
        weakness_ratio=c.weakness_ratio(),
        engine_tag="exact-single",
    )


def run_joint_exact(
    i: QuantumState,
    f: QuantumState,
    c: JointCoupling,
    eps_ps: float = EPS_PS,
) -> MeasurementRecord:
    """Closed-form conditional moments for two commuting couplings.

    Expands |i> in the joint eigenbasis (a_k, b_k); each branch carries
    a 2D product Gaussian displaced by (Kx a_k, Ky b_k), so all 2D
    moments factor into products of 1D pointer integrals. Refuses
    noncommuting pairs (NotCommuting); use run_fock for those.
    """
    _check_dims(i, f, c.A.dim)
    joint = simultaneous_eig(c.A, c.B, tol=1e-10)
    vecs = joint.eigenvectors
    amp = (f.amplitudes.conj() @ vecs) * (vecs.conj().T @ i.amplitudes)

    ovx, mxx, mpx = _moment_matrices(c.Kx * joint.eigenvalues_a, c.pointer_x)
    ovy, myy, mpy = _moment_matrices(c.Ky * joint.eigenvalues_b, c.pointer_y)

    def form(mat_x, mat_y, name):
        return _realize(complex(amp.conj() @ (mat_x * mat_y) @ amp), name)

    ps = form(ovx, ovy, "ps_prob")
    if ps < eps_ps:
        raise OrthogonalPostselection(
            f"post-selection probability {ps:.3e} below floor {eps_ps:.1e}"
        )
    return MeasurementRecord(
        ps_prob=ps,
        x_mean=form(mxx, ovy, "x_mean") / ps,
        px_mean=form(mpx, ovy, "px_mean") / ps,
        y_mean=form(ovx, myy, "y_mean") / ps,
        py_mean=form(ovx, mpy, "py_mean") / ps,
        xy_mean=form(mxx, myy, "xy_mean") / ps,
        x_py_mean=form(mxx, mpy, "x_py_mean") / ps,
        weakness_ratio=c.weakness_ratio(),
        engine_tag="exact-joint",
    )


def _momentum_frame(fock: FockPointer):
    """Eigenbasis of the truncated P and the vacuum in that basis."""
    vals, w = np.linalg.eigh(fock.P)
    return vals, w, w.conj().T @ fock.vacuum_state()


def _top_level_population(psi: np.ndarray, axis: int) -> float:
    """Total population of the top two truncation levels along an axis."""
    sl = [slice(None)] * psi.ndim
    sl[axis] = slice(-2, None)
    return float(np.sum(np.abs(psi[tuple(sl)]) ** 2))


def _warn_truncation(population: float) -> bool:
    if population > TRUNCATION_TOL:
        warnings.warn(
            f"top Fock levels hold population {population:.3e}; "
            "increase n_max for reliable moments",
            TruncationWarning,
            stacklevel=3,
        )
        return True
    return False


def _fock_single(i, f, c: SingleCoupling, n_max, eps_ps):
    fock = build_fock(c.pointer, n_max)
    pvals, w, vac_p = _momentum_frame(fock)
    es = hermitian_eig(c.A)

    # evolution is diagonal over momentum grid points: each point sees
    # the system Hamiltonian K p A, already diagonal in A's eigenbasis
    psi = np.einsum("s,j->sj", i.amplitudes, vac_p)
    coeff = es.eigenvectors.conj().T @ psi
    phases = np.exp(
        -1j * c.K / c.pointer.hbar * np.outer(es.eigenvalues, pvals)
    )
    psi = es.eigenvectors @ (phases * coeff)
    psi_fock = psi @ w.T  # back to the ladder basis

    truncated = _warn_truncation(_top_level_population(psi_fock, axis=1))

    pointer_state = f.amplitudes.conj() @ psi_fock
    ps = float(np.vdot(pointer_state, pointer_state).real)
    if ps < eps_ps:
        raise OrthogonalPostselection(
            f"post-selection probability {ps:.3e} below floor {eps_ps:.1e}"
        )
    x_mean = _realize(np.vdot(pointer_state, fock.X @ pointer_state), "x_mean") / ps
    px_mean = _realize(np.vdot(pointer_state, fock.P @ pointer_state), "px_mean") / ps

    return MeasurementRecord(
        ps_prob=ps,
        x_mean=x_mean,
        px_mean=px_mean,
        weakness_ratio=c.weakness_ratio(),
        engine_tag="fock-single",
        truncation_warning=truncated,
    )


def _fock_joint(i, f, c: JointCoupling, n_max, eps_ps):
    fx = build_fock(c.pointer_x, n_max)
    fy = build_fock(c.pointer_y, n_max)
    pxv, wx, vacx = _momentum_frame(fx)
    pyv, wy, vacy = _momentum_frame(fy)

    # block Hamiltonians Kx px A + Ky py B over the momentum grid
    blocks = (
        (c.Kx * pxv)[:, None, None, None] * c.A.matrix[None, None, :, :]
        + (c.Ky * pyv)[None, :, None, None] * c.B.matrix[None, None, :, :]
    )
    evals, evecs = np.linalg.eigh(blocks)

    psi = np.einsum("s,j,m->sjm", i.amplitudes, vacx, vacy)
    coeff = np.einsum("jmsk,sjm->jmk", evecs.conj(), psi)
    hbar = c.pointer_x.hbar
    coeff = coeff * np.exp(-1j * evals / hbar)
    psi = np.einsum("jmsk,jmk->sjm", evecs, coeff)

    psi = np.einsum("nj,sjm->snm", wx, psi)
    psi_fock = np.einsum("vm,snm->snv", wy, psi)

    truncated = _warn_truncation(
        max(
            _top_level_population(psi_fock, axis=1),
            _top_level_population(psi_fock, axis=2),
        )
    )

    phi = np.einsum("s,snv->nv", f.amplitudes.conj(), psi_fock)
    ps = float(np.sum(np.abs(phi) ** 2))
    if ps < eps_ps:
        raise OrthogonalPostselection(
            f"post-selection probability {ps:.3e} below floor {eps_ps:.1e}"
        )

    def expect(op_x, op_y, name):
        acted = phi if op_x is None else op_x @ phi
        if op_y is not None:
            acted = acted @ op_y.T
        return _realize(complex(np.vdot(phi, acted)), name) / ps

    return MeasurementRecord(
        ps_prob=ps,
        x_mean=expect(fx.X, None, "x_mean"),
        px_mean=expect(fx.P, None, "px_mean"),
        y_mean=expect(None, fy.X, "y_mean"),
        py_mean=expect(None, fy.P, "py_mean"),
        xy_mean=expect(fx.X, fy.X, "xy_mean"),
        x_py_mean=expect(fx.X, fy.P, "x_py_mean"),
        weakness_ratio=c.weakness_ratio(),
        engine_tag="fock-joint",
        truncation_warning=truncated,
    )


def run_fock(
    i: QuantumState,
    f: QuantumState,
    c,
    n_max: int = DEFAULT_N_MAX,
    eps_ps: float = EPS_PS,
) -> MeasurementRecord:
    """Exact unitary evolution in a truncated oscillator pointer space.

    Accepts a SingleCoupling or a JointCoupling; the joint case places no
    commutation requirement on A and B. If the evolved state populates
    the top two truncation levels above 1e-8 a TruncationWarning is
    issued and flagged on the record.
    """
    if isinstance(c, SingleCoupling):
        _check_dims(i, f, c.A.dim)
        return _fock_single(i, f, c, n_max, eps_ps)
    if isinstance(c, JointCoupling):
        _check_dims(i, f, c.A.dim)
        return _fock_joint(i, f, c, n_max, eps_ps)
    raise TypeError(f"expected SingleCoupling or JointCoupling, got {type(c).__name__}")


# observable tags for the series engine
_SERIES_TAGS = ("O_x", "O_xy", "O_xpy")


def heisenberg_moment(
    i: QuantumState,
    f: QuantumState,
    c: JointCoupling,
    observable_tag: str,
    order: int,
    n_max: int = 8,
) -> np.ndarray:
    """Per-order nested-commutator contributions to a pointer observable.

    Expands <O(t=1)> for O in {|f><f| X, |f><f| X Y, |f><f| X Py} as
    sum_n (i/hbar)^n / n! <[H,[H,...,O]]> with n nested commutators,
    evaluated on the initial product state (system x pointer vacua), and
    returns the orders 0..order separately, unnormalized (no division by
    the post-selection probability). Each contribution is real; parity
    of the Gaussian vacuum makes alternate orders vanish identically.
    """
    if not 0 <= order <= 4:
        raise ValueError(f"order must be in [0, 4], got {order}")
    if observable_tag not in _SERIES_TAGS:
        raise ValueError(
            f"observable_tag must be one of {_SERIES_TAGS}, got {observable_tag!r}"
        )
    if n_max < order + 2:
        raise ValueError(f"n_max={n_max} too small for order {order}")
    _check_dims(i, f, c.A.dim)

    fx = build_fock(c.pointer_x, n_max)
    fy = build_fock(c.pointer_y, n_max)
    eye_p = np.eye(fx.dim)

    def kron3(s_op, x_op, y_op):
        return np.kron(np.kron(s_op, x_op), y_op)

    hbar = c.pointer_x.hbar
    ham = c.Kx * kron3(c.A.matrix, fx.P, eye_p) + c.Ky * kron3(
        c.B.matrix, eye_p, fy.P
    )
    proj_f = np.outer(f.amplitudes, f.amplitudes.conj())
    pointer_part = {
        "O_x": (fx.X, eye_p),
        "O_xy": (fx.X, fy.X),
        "O_xpy": (fx.X, fy.P),
    }[observable_tag]
    obs = kron3(proj_f, *pointer_part)

    psi0 = kron3(
        i.amplitudes.reshape(-1, 1),
        fx.vacuum_state().reshape(-1, 1),
        fy.vacuum_state().reshape(-1, 1),
    ).reshape(-1)

    contributions = np.empty(order + 1)
    nested = obs
    for n in range(order + 1):
        if n > 0:
            nested = ham @ nested - nested @ ham
        value = (1j / hbar) ** n / math.factorial(n) * np.vdot(psi0, nested @ psi0)
        contributions[n] = _realize(complex(value), f"order-{n} contribution")
    return contributions
