"""Engine behavior: closed-form and Fock routes, their cross-agreement,
the commutator series, and the scaling laws of the conditional moments."""

import math

import numpy as np
import pytest

from weaklab.engines import (
    JointCoupling,
    MeasurementRecord,
    SingleCoupling,
    heisenberg_moment,
    run_fock,
    run_joint_exact,
    run_single_exact,
)
from weaklab.errors import (
    DimensionMismatch,
    NotCommuting,
    NumericalInconsistency,
    OrthogonalPostselection,
    TruncationWarning,
)
from weaklab.pointer import GaussianPointer
from weaklab.qcore import Observable, QuantumState
from weaklab.scenarios import build_hardy, build_imaginary, build_spin_amplifier, build_three_box
from weaklab.weakvalues import direct_weak_value

SIGMA_X = Observable(np.array([[0, 1], [1, 0]], dtype=complex))
SIGMA_Z = Observable(np.diag([1.0, -1.0]).astype(complex))
PLUS_X = QuantumState(np.array([1, 1]) / math.sqrt(2))

MOMENTS = ("ps_prob", "x_mean", "px_mean", "y_mean", "py_mean", "xy_mean", "x_py_mean")


def unit_pointer():
    return GaussianPointer(sigma=1.0, hbar=1.0)


# --- single exact ------------------------------------------------------------


def test_single_identity_shifts_every_branch():
    i = QuantumState(np.array([0.3, 0.9, 0.1]))
    f = QuantumState(np.array([0.5, -0.2, 0.7]))
    c = SingleCoupling(A=Observable.identity(3), K=0.3, pointer=unit_pointer())
    rec = run_single_exact(i, f, c)
    assert rec.x_mean == pytest.approx(0.3, abs=1e-14)
    assert rec.ps_prob == pytest.approx(abs(f.inner(i)) ** 2, abs=1e-14)
    assert rec.px_mean == pytest.approx(0.0, abs=1e-14)


def test_single_eigenstate_shifts_exactly():
    i = QuantumState.basis(2, 1)  # sigma_z eigenvalue -1
    f = QuantumState(np.array([0.6, 0.8]))
    c = SingleCoupling(A=SIGMA_Z, K=0.7, pointer=unit_pointer())
    rec = run_single_exact(i, f, c)
    assert rec.x_mean == pytest.approx(-0.7, abs=1e-14)


def test_single_three_box_weak_limit():
    scn = build_three_box()
    c = SingleCoupling(A=scn.observable("P1"), K=0.01, pointer=unit_pointer())
    rec = run_single_exact(scn.i, scn.f, c)
    assert rec.x_mean / c.K == pytest.approx(1.0, abs=1e-3)


def test_single_orthogonal_postselection():
    c = SingleCoupling(A=Observable.identity(2), K=0.1, pointer=unit_pointer())
    with pytest.raises(OrthogonalPostselection):
        run_single_exact(QuantumState.basis(2, 0), QuantumState.basis(2, 1), c)


def test_single_dimension_mismatch():
    c = SingleCoupling(A=Observable.identity(3), K=0.1, pointer=unit_pointer())
    with pytest.raises(DimensionMismatch):
        run_single_exact(QuantumState.basis(2, 0), QuantumState.basis(2, 0), c)


def test_single_weakness_ratio_reported():
    scn = build_three_box()
    c = SingleCoupling(A=scn.observable("P1"), K=0.02, pointer=GaussianPointer(2.0))
    rec = run_single_exact(scn.i, scn.f, c)
    assert rec.weakness_ratio == pytest.approx(0.02 * 1.0 / 2.0)
    assert rec.engine_tag == "exact-single"


def test_single_strong_coupling_still_normalized():
    scn = build_three_box()
    for label in ("P1", "P2", "P3"):
        c = SingleCoupling(A=scn.observable(label), K=5.0, pointer=unit_pointer())
        rec = run_single_exact(scn.i, scn.f, c)
        assert 0.0 <= rec.ps_prob <= 1.0
        assert math.isfinite(rec.x_mean) and math.isfinite(rec.px_mean)


# --- joint exact -------------------------------------------------------------


def test_joint_with_identity_reduces_to_single():
    scn = build_three_box()
    a = scn.observable("P3")
    jc = JointCoupling(
        A=a, B=Observable.identity(3), Kx=0.04, Ky=0.05,
        pointer_x=unit_pointer(), pointer_y=GaussianPointer(1.5),
    )
    joint = run_joint_exact(scn.i, scn.f, jc)
    single = run_single_exact(scn.i, scn.f, SingleCoupling(A=a, K=0.04, pointer=unit_pointer()))
    assert joint.ps_prob == pytest.approx(single.ps_prob, abs=1e-12)
    assert joint.x_mean == pytest.approx(single.x_mean, abs=1e-12)
    assert joint.px_mean == pytest.approx(single.px_mean, abs=1e-12)
    # identity on y: every branch shifted by Ky, so <XY> factorizes
    assert joint.y_mean == pytest.approx(0.05, abs=1e-14)
    assert joint.xy_mean == pytest.approx(0.05 * single.x_mean, abs=1e-14)
    assert joint.x_py_mean == pytest.approx(0.0, abs=1e-14)


def test_joint_rejects_noncommuting():
    jc = JointCoupling(
        A=SIGMA_X, B=SIGMA_Z, Kx=0.01, Ky=0.01,
        pointer_x=unit_pointer(), pointer_y=unit_pointer(),
    )
    f = QuantumState(np.array([math.cos(0.3), math.sin(0.3)]))
    with pytest.raises(NotCommuting):
        run_joint_exact(PLUS_X, f, jc)


def test_joint_hardy_overlap_occupation_vanishes():
    scn = build_hardy()
    jc = JointCoupling(
        A=scn.observable("N_Oe"), B=scn.observable("N_Op"), Kx=0.01, Ky=0.01,
        pointer_x=unit_pointer(), pointer_y=unit_pointer(),
    )
    rec = run_joint_exact(scn.i, scn.f, jc)
    # xy correlation encodes Re<N_Oe N_Op>_W + Re(a* b) with a = b = 1
    extracted_re = 2 * rec.xy_mean / (0.01 * 0.01) - 1.0
    assert extracted_re == pytest.approx(0.0, abs=1e-3)


def test_joint_strong_coupling_still_normalized():
    scn = build_hardy()
    jc = JointCoupling(
        A=scn.observable("N_NOe"), B=scn.observable("N_NOp"), Kx=5.0, Ky=5.0,
        pointer_x=unit_pointer(), pointer_y=unit_pointer(),
    )
    rec = run_joint_exact(scn.i, scn.f, jc)
    assert 0.0 <= rec.ps_prob <= 1.0
    for field in MOMENTS:
        assert math.isfinite(getattr(rec, field))


# --- Fock engine -------------------------------------------------------------


def test_fock_matches_exact_single():
    for scn, label in (
        (build_three_box(), "P2"),
        (build_imaginary(), "sigma_z"),
        (build_spin_amplifier(0.4), "sigma_z"),
    ):
        c = SingleCoupling(A=scn.observable(label), K=0.1, pointer=unit_pointer())
        exact = run_single_exact(scn.i, scn.f, c)
        fock = run_fock(scn.i, scn.f, c, n_max=40)
        for field in MOMENTS:
            assert getattr(fock, field) == pytest.approx(getattr(exact, field), abs=1e-6)
        assert fock.engine_tag == "fock-single"
        assert not fock.truncation_warning


def test_fock_matches_exact_joint():
    scn = build_hardy()
    jc = JointCoupling(
        A=scn.observable("N_Oe"), B=scn.observable("N_NOp"), Kx=0.05, Ky=0.05,
        pointer_x=unit_pointer(), pointer_y=unit_pointer(),
    )
    exact = run_joint_exact(scn.i, scn.f, jc)
    fock = run_fock(scn.i, scn.f, jc, n_max=40)
    for field in MOMENTS:
        assert getattr(fock, field) == pytest.approx(getattr(exact, field), abs=1e-6)


def test_fock_unitarity_via_complete_postselection():
    # summing the post-selection probability over an orthonormal basis
    # of final states recovers the norm of the evolved global state
    scn = build_three_box()
    c = SingleCoupling(A=scn.observable("P1"), K=0.8, pointer=unit_pointer())
    total = sum(
        run_fock(scn.i, QuantumState.basis(3, k), c, n_max=40).ps_prob for k in range(3)
    )
    assert total == pytest.approx(1.0, abs=1e-10)


def test_fock_joint_unitarity_via_complete_postselection():
    jc = JointCoupling(
        A=SIGMA_X, B=SIGMA_Z, Kx=0.3, Ky=0.4,
        pointer_x=unit_pointer(), pointer_y=GaussianPointer(0.7),
    )
    total = sum(
        run_fock(PLUS_X, QuantumState.basis(2, k), jc, n_max=40).ps_prob
        for k in range(2)
    )
    assert total == pytest.approx(1.0, abs=1e-10)


def test_fock_handles_noncommuting_pair():
    f = QuantumState(np.array([math.cos(0.3), math.sin(0.3)]))
    jc = JointCoupling(
        A=SIGMA_X, B=SIGMA_Z, Kx=0.01, Ky=0.01,
        pointer_x=unit_pointer(), pointer_y=unit_pointer(),
    )
    rec = run_fock(PLUS_X, f, jc, n_max=40)
    # symmetrized product of sigma_x, sigma_z is the zero operator, and
    # the single weak values are a = 1 exactly and b real; the xy
    # correlation must then encode Re(a* b) alone
    b_w = direct_weak_value(SIGMA_Z, PLUS_X, f)
    extracted_re = 2 * rec.xy_mean / (0.01 * 0.01) - (1.0 * b_w).real
    assert extracted_re == pytest.approx(0.0, abs=1e-3)


def test_fock_truncation_warning():
    c = SingleCoupling(A=SIGMA_Z, K=2.0, pointer=unit_pointer())
    f = QuantumState(np.array([0.8, 0.6]))
    with pytest.warns(TruncationWarning):
        rec = run_fock(PLUS_X, f, c, n_max=4)
    assert rec.truncation_warning


def test_fock_rejects_unknown_coupling_type():
    with pytest.raises(TypeError):
        run_fock(PLUS_X, PLUS_X, object())


# --- moment scaling laws ------------------------------------------------------


def test_x_shift_error_is_third_order_in_k():
    # |x_mean(K) - K Re<A>_W| ~ C K^3 for scenarios with a nonvanishing
    # cubic coefficient
    for scn, label in ((build_three_box(), "P3"), (build_spin_amplifier(0.5), "sigma_z")):
        a = scn.observable(label)
        w = direct_weak_value(a, scn.i, scn.f)
        ks = np.geomspace(0.01, 0.1, 10)
        errs = []
        for k in ks:
            c = SingleCoupling(A=a, K=float(k), pointer=unit_pointer())
            rec = run_single_exact(scn.i, scn.f, c)
            errs.append(abs(rec.x_mean - k * w.real))
        slope = np.polyfit(np.log(ks), np.log(errs), 1)[0]
        assert 2.7 <= slope <= 3.3


def test_px_scales_inverse_sigma_squared():
    scn = build_imaginary()
    a = scn.observable("sigma_z")
    k = 0.01
    px = {}
    for sigma in (1.0, 2.0):
        c = SingleCoupling(A=a, K=k, pointer=GaussianPointer(sigma))
        px[sigma] = run_single_exact(scn.i, scn.f, c).px_mean
    assert px[2.0] == pytest.approx(px[1.0] / 4.0, rel=0.05)


# --- commutator series ---------------------------------------------------------


def noncommuting_case():
    f = QuantumState(np.array([math.cos(0.3), math.sin(0.3)]))
    jc = JointCoupling(
        A=SIGMA_X, B=SIGMA_Z, Kx=0.01, Ky=0.01,
        pointer_x=unit_pointer(), pointer_y=unit_pointer(),
    )
    return PLUS_X, f, jc


def series_cases():
    i, f, jc = noncommuting_case()
    yield i, f, jc
    scn = build_hardy()
    yield scn.i, scn.f, JointCoupling(
        A=scn.observable("N_Oe"), B=scn.observable("N_Op"), Kx=0.02, Ky=0.03,
        pointer_x=unit_pointer(), pointer_y=unit_pointer(),
    )


def xy_second_order_closed_form(i, f, jc):
    """Direct matrix evaluation of the leading correlation shift:
    (KxKy/2) Re[<i|f><f|(AB+BA)/2|i> + <i|A|f><f|B|i>]."""
    a, b = jc.A.matrix, jc.B.matrix
    sym = (a @ b + b @ a) / 2
    fi = np.vdot(f.amplitudes, i.amplitudes)
    val = (
        np.conj(fi) * np.vdot(f.amplitudes, sym @ i.amplitudes)
        + np.vdot(i.amplitudes, a @ f.amplitudes) * np.vdot(f.amplitudes, b @ i.amplitudes)
    )
    return 0.5 * jc.Kx * jc.Ky * val.real


def test_series_odd_orders_vanish_for_xy():
    for i, f, jc in series_cases():
        terms = heisenberg_moment(i, f, jc, "O_xy", order=3)
        assert abs(terms[0]) <= 1e-12
        assert abs(terms[1]) <= 1e-12
        assert abs(terms[3]) <= 1e-12


def test_series_second_order_matches_closed_form():
    for i, f, jc in series_cases():
        terms = heisenberg_moment(i, f, jc, "O_xy", order=2)
        assert terms[2] == pytest.approx(xy_second_order_closed_form(i, f, jc), abs=1e-12)


def test_series_truncated_at_two_reproduces_conditional_moment():
    # summing orders 0..2 and normalizing by |<f|i>|^2 gives the same
    # number as the closed-form conditional <XY> at leading order
    for i, f, jc in series_cases():
        terms = heisenberg_moment(i, f, jc, "O_xy", order=2)
        fi2 = abs(np.vdot(f.amplitudes, i.amplitudes)) ** 2
        assert sum(terms) / fi2 == pytest.approx(
            xy_second_order_closed_form(i, f, jc) / fi2, abs=1e-12
        )


def test_series_x_observable_first_order():
    # for O_x the leading term is first order and reproduces the
    # unnormalized position-shift formula K Re[<i|f><f|A|i>]
    i, f, jc = noncommuting_case()
    terms = heisenberg_moment(i, f, jc, "O_x", order=1)
    fi = np.vdot(f.amplitudes, i.amplitudes)
    want = jc.Kx * (np.conj(fi) * np.vdot(f.amplitudes, jc.A.matrix @ i.amplitudes)).real
    assert terms[0] == pytest.approx(0.0, abs=1e-12)
    assert terms[1] == pytest.approx(want, abs=1e-12)


def test_series_xpy_even_structure():
    i, f, jc = noncommuting_case()
    terms = heisenberg_moment(i, f, jc, "O_xpy", order=3)
    assert abs(terms[0]) <= 1e-12
    assert abs(terms[1]) <= 1e-12
    assert abs(terms[3]) <= 1e-12


def test_series_argument_validation():
    i, f, jc = noncommuting_case()
    with pytest.raises(ValueError):
        heisenberg_moment(i, f, jc, "O_xy", order=5)
    with pytest.raises(ValueError):
        heisenberg_moment(i, f, jc, "O_zz", order=2)
    with pytest.raises(ValueError):
        heisenberg_moment(i, f, jc, "O_xy", order=4, n_max=3)


# --- record validation ----------------------------------------------------------


def test_record_rejects_bad_probability():
    with pytest.raises(NumericalInconsistency):
        MeasurementRecord(ps_prob=1.5, x_mean=0.0, px_mean=0.0)


def test_record_clips_rounding_excursions():
    rec = MeasurementRecord(ps_prob=1.0 + 5e-13, x_mean=0.0, px_mean=0.0)
    assert rec.ps_prob == 1.0


def test_joint_coupling_validates_dims():
    with pytest.raises(DimensionMismatch):
        JointCoupling(
            A=Observable.identity(2), B=Observable.identity(3), Kx=0.1, Ky=0.1,
            pointer_x=unit_pointer(), pointer_y=unit_pointer(),
        )
