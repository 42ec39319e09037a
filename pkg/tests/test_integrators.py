"""Adaptive/fixed stepping, event location, and reparametrization.

The flat-space decaying-mass rest particle has a closed-form solution
(unit starting mass, rate 0.1, c = 1):

    m(lam)   = 1 / (1 + 0.1 lam)
    phi(lam) = -lam / (1 + 0.1 lam)
    q0(lam)  = tau(lam) = 10 ln(1 + 0.1 lam)
    p0(lam)  = -m(lam)

which pins down endpoints, event locations, and resampled values exactly.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from contactrel import (
    ContactHamiltonianSystem,
    ExtendedState,
    IntegratorConfig,
    MasslessProjection,
    MassModel,
    MaxStepsExceeded,
    StopCondition,
    advance_batch,
    geodesic_reference,
    integrate,
    minkowski,
    point_mass_potential,
    reparametrize_by_phi,
    reparametrize_by_tau,
    solve_p0_on_shell,
    state_from_velocity,
    weak_field,
)

ALPHA = 0.1


def _decay_sys():
    return ContactHamiltonianSystem(
        metric=minkowski(), mass=MassModel.exp_decay(1.0, ALPHA), c=1.0
    )


def _rest_state():
    return ExtendedState(q=[0, 0, 0, 0], p=[-1, 0, 0, 0], phi=0.0)


def _closed_form(lam):
    m = 1.0 / (1.0 + ALPHA * lam)
    return {
        "m": m,
        "phi": -lam / (1.0 + ALPHA * lam),
        "q0": math.log(1.0 + ALPHA * lam) / ALPHA,
        "p0": -m,
        "tau": math.log(1.0 + ALPHA * lam) / ALPHA,
    }


def _stop(kind, value, axis=0):
    return (StopCondition(kind, value, axis=axis),)


# --- basic stepping -------------------------------------------------------------


def test_rk45_endpoint_matches_closed_form():
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, stop=_stop("lambda_reached", 10.0)),
    )
    ref = _closed_form(10.0)
    assert traj.lam[-1] == 10.0  # exact landing
    assert traj.q[-1, 0] == pytest.approx(ref["q0"], abs=1e-10)
    assert traj.p[-1, 0] == pytest.approx(ref["p0"], abs=1e-10)
    assert traj.phi[-1] == pytest.approx(ref["phi"], abs=1e-10)
    assert traj.tau[-1] == pytest.approx(ref["tau"], abs=1e-10)
    assert traj.parameter == "lambda"
    assert traj.metadata["on_shell_start"] is True
    assert traj.metadata["termination"]["reason"] == "lambda_reached"


def test_rk4_fixed_step_grid():
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(method="rk4", fixed_step=0.25, stop=_stop("lambda_reached", 1.0)),
    )
    assert len(traj) == 5
    assert np.array_equal(traj.lam, [0.0, 0.25, 0.5, 0.75, 1.0])
    ref = _closed_form(1.0)
    # classic RK4 at h = 0.25: global error ~ 2e-8 on this problem
    assert traj.q[-1, 0] == pytest.approx(ref["q0"], abs=1e-7)


def test_adaptive_respects_max_step():
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(max_step=0.3, stop=_stop("lambda_reached", 5.0)),
    )
    assert np.max(np.diff(traj.lam)) <= 0.3 + 1e-12


def test_max_steps_exceeded():
    with pytest.raises(MaxStepsExceeded):
        integrate(
            _decay_sys(), _rest_state(),
            IntegratorConfig(max_steps=3, max_step=0.1, stop=_stop("lambda_reached", 10.0)),
        )


def test_lambda_column_strictly_increasing():
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(stop=_stop("lambda_reached", 4.0)),
    )
    assert np.all(np.diff(traj.lam) > 0)
    assert traj.metadata["steps_accepted"] >= len(traj) - 1


def test_shell_projection_keeps_samples_on_shell():
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(shell_projection=3, stop=_stop("lambda_reached", 10.0)),
    )
    assert np.max(np.abs(traj.shell)) < 1e-13


# --- event location --------------------------------------------------------------


def test_phi_reached_event_closed_form():
    target = -0.5
    lam_star = -target / (1.0 + ALPHA * target)  # 0.5263157894736842
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(max_step=0.05, stop=_stop("phi_reached", target)),
    )
    assert traj.metadata["termination"]["reason"] == "phi_reached"
    assert traj.phi[-1] == pytest.approx(target, abs=1e-12)
    assert traj.lam[-1] == pytest.approx(lam_star, abs=1e-8)


def test_tau_reached_event_closed_form():
    lam_star = (math.exp(ALPHA) - 1.0) / ALPHA  # tau = 1
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(max_step=0.05, stop=_stop("tau_reached", 1.0)),
    )
    assert traj.tau[-1] == pytest.approx(1.0, abs=1e-12)
    assert traj.lam[-1] == pytest.approx(lam_star, abs=1e-8)
    assert traj.q[-1, 0] == pytest.approx(1.0, abs=1e-9)  # rest particle: t = tau


def test_mass_floor_event_closed_form():
    # m = 0.8 at phi = -2, i.e. lam = 2.5
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(max_step=0.05, stop=_stop("mass_floor", 0.8)),
    )
    assert traj.metadata["termination"]["reason"] == "mass_floor"
    assert traj.phi[-1] == pytest.approx(-2.0, abs=1e-9)
    assert traj.lam[-1] == pytest.approx(2.5, abs=1e-8)


def test_coordinate_bound_event_exact_for_linear_motion():
    sys = ContactHamiltonianSystem(
        metric=minkowski(), mass=MassModel.constant(1.0), c=1.0
    )
    s0 = state_from_velocity(sys, [0, 0, 0, 0], 0.0, [0.6, 0.0, 0.0])
    traj = integrate(
        sys, s0,
        IntegratorConfig(stop=_stop("coordinate_bound", 1.5, axis=1)),
    )
    # q1 = 0.75 lam exactly, so the crossing sits at lam = 2
    assert traj.metadata["termination"]["reason"] == "coordinate_bound"
    assert traj.q[-1, 1] == pytest.approx(1.5, abs=1e-12)
    assert traj.lam[-1] == pytest.approx(2.0, abs=1e-10)


def test_earliest_stop_wins():
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(
            max_step=0.05,
            stop=(
                StopCondition("lambda_reached", 10.0),
                StopCondition("phi_reached", -0.5),
                StopCondition("mass_floor", 0.8),
            ),
        ),
    )
    assert traj.metadata["termination"]["reason"] == "phi_reached"
    assert traj.lam[-1] < 0.6


# --- reparametrization ----------------------------------------------------------------


def test_reparametrize_by_phi_interior_closed_form():
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(stop=_stop("lambda_reached", 10.0)),
    )
    by_phi = reparametrize_by_phi(traj, num=21)
    assert by_phi.parameter == "phi"
    assert by_phi.lam[0] == traj.phi[0]
    assert by_phi.lam[-1] == traj.phi[-1]
    for k in range(21):
        phi = by_phi.lam[k]
        lam = -phi / (1.0 + ALPHA * phi)
        ref = _closed_form(lam)
        assert by_phi.q[k, 0] == pytest.approx(ref["q0"], abs=1e-6)
        assert by_phi.p[k, 0] == pytest.approx(ref["p0"], abs=1e-6)
        assert by_phi.tau[k] == pytest.approx(ref["tau"], abs=1e-6)
    # the resampled derivative column is d phi / d phi = 1
    assert np.allclose(by_phi.deriv[:, 8], 1.0)


def test_reparametrize_by_tau_uniform_motion():
    sys = ContactHamiltonianSystem(
        metric=minkowski(), mass=MassModel.constant(1.0), c=1.0
    )
    s0 = state_from_velocity(sys, [0, 0, 0, 0], 0.0, [0.6, 0.0, 0.0])
    traj = integrate(sys, s0, IntegratorConfig(stop=_stop("lambda_reached", 4.0)))
    by_tau = reparametrize_by_tau(traj, num=9)
    gamma = 1.25
    assert by_tau.parameter == "tau"
    assert np.allclose(np.diff(by_tau.lam), by_tau.lam[1] - by_tau.lam[0])
    assert np.max(np.abs(by_tau.q[:, 0] - gamma * by_tau.lam)) < 1e-9
    assert np.max(np.abs(by_tau.q[:, 1] - 0.6 * gamma * by_tau.lam)) < 1e-9


def test_reparametrize_by_tau_massless_rejected():
    sys = ContactHamiltonianSystem(metric=minkowski(), mass=MassModel.zero(), c=1.0)
    p = solve_p0_on_shell(sys, np.zeros(4), 0.0, [1.0, 0.0, 0.0])
    traj = integrate(
        sys, ExtendedState(q=[0, 0, 0, 0], p=p, phi=0.0),
        IntegratorConfig(stop=_stop("lambda_reached", 2.0)),
    )
    with pytest.raises(MasslessProjection):
        reparametrize_by_tau(traj)


def test_trajectory_state_accessor():
    traj = integrate(
        _decay_sys(), _rest_state(),
        IntegratorConfig(stop=_stop("lambda_reached", 1.0)),
    )
    s = traj.state(0)
    assert isinstance(s, ExtendedState)
    assert np.array_equal(s.p, [-1, 0, 0, 0])


# --- batched stepping -------------------------------------------------------------------


def test_advance_batch_matches_integrate():
    sys = _decay_sys()
    y0 = np.zeros((3, 10))
    y0[:, 4] = [-1.0, -1.2, -1.5]  # three rest-like markers, different p0
    y0[:, 9] = 0.0
    out, steps = advance_batch(sys, y0, 3.0, IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13))
    assert steps > 0
    for i in range(3):
        s0 = ExtendedState(q=y0[i, 0:4], p=y0[i, 4:8], phi=float(y0[i, 8]))
        traj = integrate(
            sys, s0,
            IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13, stop=_stop("lambda_reached", 3.0)),
        )
        assert np.max(np.abs(out[i, 0:4] - traj.q[-1])) < 1e-9
        assert np.max(np.abs(out[i, 4:8] - traj.p[-1])) < 1e-9
        assert abs(out[i, 8] - traj.phi[-1]) < 1e-9


def test_advance_batch_round_trip():
    sys = _decay_sys()
    y0 = np.zeros((2, 10))
    y0[:, 4] = [-1.0, -1.3]
    cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
    mid, _ = advance_batch(sys, y0, 2.0, cfg)
    back, _ = advance_batch(sys, mid, -2.0, cfg)
    assert np.max(np.abs(back - y0)) < 1e-8


def test_advance_batch_rk4_mode():
    sys = _decay_sys()
    y0 = np.zeros((1, 10))
    y0[0, 4] = -1.0
    out, steps = advance_batch(
        sys, y0, 1.0, IntegratorConfig(method="rk4", fixed_step=0.05)
    )
    assert steps == 20
    ref = _closed_form(1.0)
    assert out[0, 8] == pytest.approx(ref["phi"], abs=1e-9)


# --- geodesic reference -------------------------------------------------------------------


def test_geodesic_reference_flat_straight_line():
    sys = ContactHamiltonianSystem(
        metric=minkowski(), mass=MassModel.constant(1.0), c=1.0
    )
    u0 = np.array([1.25, 0.75, 0.0, 0.0])  # normalized: -1.25^2 + 0.75^2 = -1
    cfg = IntegratorConfig(stop=_stop("lambda_reached", 3.0))
    geo = geodesic_reference(sys, np.zeros(4), u0, cfg)
    assert geo.parameter == "tau"
    assert np.max(np.abs(geo.q - np.outer(geo.lam, u0))) < 1e-12
    assert np.max(np.abs(geo.p - u0)) < 1e-12


def test_geodesic_reference_rejects_phi_dependent_metric():
    from contactrel import expression_metric

    metric = expression_metric(["-(1 + 0.1*phi)", "1", "1", "1"])
    sys = ContactHamiltonianSystem(metric=metric, mass=MassModel.constant(1.0), c=1.0)
    with pytest.raises(ValueError):
        geodesic_reference(
            sys, np.zeros(4), np.array([1.0, 0, 0, 0]),
            IntegratorConfig(stop=_stop("lambda_reached", 1.0)),
        )


def test_geodesic_reference_rejects_unnormalized_velocity():
    pot, grad = point_mass_potential(0.05)
    sys = ContactHamiltonianSystem(
        metric=weak_field(pot, grad), mass=MassModel.constant(1.0), c=1.0
    )
    with pytest.raises(ValueError):
        geodesic_reference(
            sys, np.array([0.0, 1.0, 0.0, 0.0]), np.array([2.0, 0, 0, 0]),
            IntegratorConfig(stop=_stop("lambda_reached", 1.0)),
        )
