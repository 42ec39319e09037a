"""Verification battery: the package's acceptance checks as callable functions.

Each check builds its own scenario, measures a residual against a fixed
tolerance, and returns a CheckResult.  ``run_all`` executes the full battery
in order; the CLI ``verify`` command and the acceptance test suite both drive
these functions, so there is a single source of truth for what "working"
means.

``perturb_divergence=True`` rescales the analytic divergence by 1% inside the
divergence check; it exists so that the battery can be shown to catch a
deliberately wrong value (the check must then fail).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import dynamics, geometry
from .dynamics import ContactHamiltonianSystem, ExtendedState, MassModel
from .errors import NotMonotone
from .integrators import (
    IntegratorConfig,
    StopCondition,
    geodesic_reference,
    integrate,
    reparametrize_by_phi,
    reparametrize_by_tau,
)
from .kinetic import EntropyFunctional, ensemble_series, sample_ensemble
from .scenario import build_density_spec, build_system, load_scenario, preset_scenario

__all__ = ["CheckResult", "run_all", "CHECKS"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: measured {self.measured:.3e} "
            f"(tolerance {self.tolerance:.3e}) {self.detail}"
        )


# --- shared fixtures ----------------------------------------------------------


def _wavy_metric() -> geometry.MetricField:
    """Analytic diagonal metric with q and phi dependence, for identity checks."""
    a, b, k, w = 0.1, 0.1, 0.7, 0.5

    def func(q, phi):
        phi = np.asarray(phi, dtype=float)
        g = np.zeros(q.shape[:-1] + (4, 4))
        g[..., 0, 0] = -(1.0 + a * np.sin(k * q[..., 1] + w * phi))
        g[..., 1, 1] = 1.0 + b * np.cos(k * q[..., 2])
        g[..., 2, 2] = 1.0 + b * np.sin(k * q[..., 3] + w * phi)
        g[..., 3, 3] = 1.0 + b * np.cos(k * q[..., 1])
        return g

    def d_q(q, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.zeros(q.shape[:-1] + (4, 4, 4))
        out[..., 0, 0, 1] = -a * k * np.cos(k * q[..., 1] + w * phi)
        out[..., 1, 1, 2] = -b * k * np.sin(k * q[..., 2])
        out[..., 2, 2, 3] = b * k * np.cos(k * q[..., 3] + w * phi)
        out[..., 3, 3, 1] = -b * k * np.sin(k * q[..., 1])
        return out

    def d_phi(q, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.zeros(q.shape[:-1] + (4, 4))
        out[..., 0, 0] = -a * w * np.cos(k * q[..., 1] + w * phi)
        out[..., 2, 2] = b * w * np.cos(k * q[..., 3] + w * phi)
        return out

    return geometry.MetricField(func=func, d_q=d_q, d_phi=d_phi, name="wavy")


def _identity_metrics() -> list[geometry.MetricField]:
    pot, grad = geometry.point_mass_potential(0.3, softening=0.8)
    return [
        geometry.minkowski(),
        geometry.weak_field(pot, grad, c=1.0, name="weak-field"),
        _wavy_metric(),
    ]


def _random_states(rng, n):
    q = rng.uniform(-2.0, 2.0, size=(n, 4))
    p = np.column_stack(
        [rng.uniform(-2.0, -0.5, size=n), rng.uniform(-1.0, 1.0, size=(n, 3))]
    )
    phi = rng.uniform(-1.0, 1.0, size=n)
    return q, p, phi


def _decay_flat_system(alpha=0.1) -> ContactHamiltonianSystem:
    return ContactHamiltonianSystem(
        metric=geometry.minkowski(),
        mass=MassModel.exp_decay(1.0, alpha, phi0=0.0, c=1.0),
        c=1.0,
    )


def _decay_closed_form(lam, alpha=0.1):
    """Flat space, unit mass at rest, decay rate alpha, c=1 (exact solution)."""
    lam = np.asarray(lam, dtype=float)
    m = 1.0 / (1.0 + alpha * lam)
    phi = -lam / (1.0 + alpha * lam)
    q0 = np.log(1.0 + alpha * lam) / alpha
    p0 = -m
    tau = q0.copy()
    return q0, p0, phi, tau, m


def _orbit_system(gm, c=1.0, mass=None) -> ContactHamiltonianSystem:
    pot, grad = geometry.point_mass_potential(gm)
    return ContactHamiltonianSystem(
        metric=geometry.weak_field(pot, grad, c=c, name=f"weak-field GM={gm}"),
        mass=mass or MassModel.constant(1.0),
        c=c,
    )


# --- criterion 1: contact identities -------------------------------------------


def check_contact_identities(states_per_metric: int = 1000, seed: int = 2024) -> CheckResult:
    rng = np.random.default_rng(seed)
    mass = MassModel.exp_decay(1.0, 0.1, phi0=0.0, c=1.0)
    worst_r1 = worst_r2 = 0.0
    for metric in _identity_metrics():
        sys = ContactHamiltonianSystem(metric=metric, mass=mass, c=1.0)
        q, p, phi = _random_states(rng, states_per_metric)
        for i in range(states_per_metric):
            s = ExtendedState(q=q[i], p=p[i], phi=float(phi[i]))
            r1, r2 = dynamics.contact_identity_residuals(sys, s)
            worst_r1 = max(worst_r1, r1)
            worst_r2 = max(worst_r2, r2)
    passed = worst_r1 < 1e-12 and worst_r2 < 1e-8
    return CheckResult(
        name="contact-identities",
        passed=passed,
        measured=max(worst_r1, worst_r2),
        tolerance=1e-8,
        detail=f"r1_max={worst_r1:.3e} (tol 1e-12), r2_max={worst_r2:.3e} (tol 1e-8)",
    )


# --- criterion 2: energy conservation and shell projection ----------------------


def check_energy_conservation() -> CheckResult:
    sys = _decay_flat_system()
    s0 = ExtendedState(q=[0, 0, 0, 0], p=[-1, 0, 0, 0], phi=0.0)
    stop = (StopCondition("lambda_reached", 10.0),)
    free = integrate(sys, s0, IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, stop=stop))
    drift = float(np.max(np.abs(free.ham - free.ham[0])))
    free_shell = float(np.max(np.abs(free.shell)))
    projected = integrate(
        sys, s0,
        IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, shell_projection=1, stop=stop),
    )
    shell = float(np.max(np.abs(projected.shell)))
    passed = drift < 1e-8 and free_shell < 1e-8 and shell < 1e-12
    return CheckResult(
        name="energy-conservation",
        passed=passed,
        measured=max(drift, shell),
        tolerance=1e-8,
        detail=(
            f"H_drift={drift:.3e} (tol 1e-8), free_shell={free_shell:.3e} (tol 1e-8), "
            f"projected_shell={shell:.3e} (tol 1e-12)"
        ),
    )


# --- criterion 3: divergence --------------------------------------------------


def _field_vector(sys, y):
    s = ExtendedState(q=y[0:4], p=y[4:8], phi=float(y[8]))
    f = dynamics.evolution_field(sys, s)
    return np.concatenate([f.dq, f.dp, [f.dphi]])


def check_divergence(n_states: int = 100, seed: int = 77, perturb: bool = False) -> CheckResult:
    rng = np.random.default_rng(seed)
    mass = MassModel.exp_decay(1.0, 0.1, phi0=0.0, c=1.0)
    metrics = _identity_metrics()
    worst = 0.0
    for i in range(n_states):
        metric = metrics[i % len(metrics)]
        sys = ContactHamiltonianSystem(metric=metric, mass=mass, c=1.0)
        q, p, phi = _random_states(rng, 1)
        y = np.concatenate([q[0], p[0], [phi[0]]])
        trace = 0.0
        for j in range(9):
            h = 1e-3 * (1.0 + abs(y[j]))
            acc = 0.0
            for coeff, shift in ((1.0, -2.0), (-8.0, -1.0), (8.0, 1.0), (-1.0, 2.0)):
                ys = y.copy()
                ys[j] += shift * h
                acc += coeff * _field_vector(sys, ys)[j]
            trace += acc / (12.0 * h)
        s = ExtendedState(q=y[0:4], p=y[4:8], phi=float(y[8]))
        analytic = dynamics.divergence(sys, s)
        if perturb:
            analytic *= 1.01
        worst = max(worst, abs(trace - analytic) / max(1.0, abs(analytic)))
    return CheckResult(
        name="divergence-identity",
        passed=worst < 1e-6,
        measured=worst,
        tolerance=1e-6,
        detail=f"relative trace mismatch over {n_states} random states"
        + (" [perturbed]" if perturb else ""),
    )


# --- criterion 4: geodesic recovery ----------------------------------------------


def check_geodesic_recovery() -> CheckResult:
    sys = _orbit_system(gm=0.04)
    s0 = dynamics.state_from_velocity(sys, [0, 1, 0, 0], 0.0, [0.0, 0.2, 0.0])
    u0 = dynamics.four_velocity(sys, s0)
    t_end = 31.0  # about one orbital period of the r=1, v=0.2 orbit
    cfg = IntegratorConfig(
        rel_tol=1e-11, abs_tol=1e-13, max_step=0.25,
        stop=(StopCondition("tau_reached", t_end),),
    )
    traj = integrate(sys, s0, cfg)
    cfg_geo = IntegratorConfig(
        rel_tol=1e-11, abs_tol=1e-13, max_step=0.25,
        stop=(StopCondition("lambda_reached", t_end),),
    )
    geo = geodesic_reference(sys, s0.q, u0, cfg_geo)

    num = 200
    on_tau = reparametrize_by_tau(traj, num=num)
    geo_tau = reparametrize_by_tau(geo, num=num)
    dq = float(np.max(np.abs(on_tau.q - geo_tau.q)))
    du = 0.0
    for i in range(num):
        u_contact = dynamics.four_velocity(sys, on_tau.state(i)).u
        du = max(du, float(np.max(np.abs(u_contact - geo_tau.p[i]))))
    passed = dq < 1e-6
    return CheckResult(
        name="geodesic-recovery",
        passed=passed,
        measured=dq,
        tolerance=1e-6,
        detail=f"sup|q| diff over one orbit; four-velocity diff {du:.3e}",
    )


# --- criterion 5: Newtonian limit -------------------------------------------------


def check_newtonian_limit() -> CheckResult:
    gm, c = 1.0, 1000.0
    sys = _orbit_system(gm=gm, c=c)
    s0 = dynamics.state_from_velocity(sys, [0, 1, 0, 0], 0.0, [0.0, 1.0, 0.0])
    cfg = IntegratorConfig(
        method="rk4", fixed_step=0.02,
        stop=(StopCondition("lambda_reached", 1.0),),
    )
    traj = integrate(sys, s0, cfg)
    # coordinate velocity v^i = c dq^i/dlam / dq^0/dlam, exact at samples
    v = c * traj.deriv[:, 1:4] / traj.deriv[:, 0:1]
    dt_dlam = traj.deriv[:, 0] / c
    h = float(np.diff(traj.lam)[0])
    # dv/dlam by 4th-order central differences on the uniform lambda grid
    pot, grad = geometry.point_mass_potential(gm)
    worst = 0.0
    for i in range(2, len(traj) - 2):
        dv = (v[i - 2] - 8 * v[i - 1] + 8 * v[i + 1] - v[i + 2]) / (12.0 * h)
        accel = dv / dt_dlam[i]
        target = -grad(traj.q[i, 1:])
        worst = max(worst, float(np.max(np.abs(accel - target)) / np.max(np.abs(target))))
    return CheckResult(
        name="newtonian-limit",
        passed=worst < 1e-4,
        measured=worst,
        tolerance=1e-4,
        detail=f"relative acceleration mismatch, v/c={1.0 / c:.0e}",
    )


# --- criterion 6: decay cancellation ----------------------------------------------


def check_decay_cancellation() -> CheckResult:
    gm, alpha, t_end = 0.05, 0.1, 5.0
    sys_const = _orbit_system(gm=gm, mass=MassModel.constant(1.0))
    sys_decay = _orbit_system(gm=gm, mass=MassModel.exp_decay(1.0, alpha, phi0=0.0, c=1.0))
    s0 = dynamics.state_from_velocity(sys_const, [0, 1, 0, 0], 0.0, [0.0, 0.2, 0.0])
    # both runs start from the same four-velocity (same initial momentum too,
    # since m(0) = 1 for both mass models)
    cfg = IntegratorConfig(
        rel_tol=3e-12, abs_tol=1e-14, max_step=0.15,
        stop=(StopCondition("tau_reached", t_end),),
    )
    tr_c = reparametrize_by_tau(integrate(sys_const, s0, cfg), num=200)
    tr_d = reparametrize_by_tau(integrate(sys_decay, s0, cfg), num=200)
    dq = float(np.max(np.abs(tr_c.q - tr_d.q)))

    # momentum norm of the decaying run must follow m(tau) = exp(-alpha tau)
    g = dynamics._metric_arrays(sys_decay, tr_d.q, tr_d.phi)
    gpp = np.einsum("nab,na,nb->n", g, tr_d.p, tr_d.p)
    pnorm = np.sqrt(-gpp)
    target = np.exp(-alpha * tr_d.lam)
    dp = float(np.max(np.abs(pnorm - target)))
    passed = dq < 1e-8 and dp < 1e-8
    return CheckResult(
        name="decay-cancellation",
        passed=passed,
        measured=max(dq, dp),
        tolerance=1e-8,
        detail=f"worldline diff {dq:.3e}, momentum-norm diff {dp:.3e}",
    )


# --- criterion 7: time dilation -----------------------------------------------------


def check_proper_time() -> CheckResult:
    # part 1: tau accumulated through the phi relation vs direct quadrature of
    # the metric line element along a curved-space decaying-mass orbit
    sys = _orbit_system(gm=0.05, mass=MassModel.exp_decay(1.0, 0.1, phi0=0.0, c=1.0))
    s0 = dynamics.state_from_velocity(sys, [0, 1, 0, 0], 0.0, [0.0, 0.2, 0.0])
    cfg = IntegratorConfig(
        method="rk4", fixed_step=0.02,
        stop=(StopCondition("lambda_reached", 5.0),),
    )
    traj = integrate(sys, s0, cfg)
    gl = np.stack(
        [geometry.lowered_metric(sys.metric, traj.q[i], float(traj.phi[i]))
         for i in range(len(traj))]
    )
    dqdl = traj.deriv[:, 0:4]
    integrand = np.sqrt(-np.einsum("nab,na,nb->n", gl, dqdl, dqdl)) / sys.c
    h = float(traj.lam[1] - traj.lam[0])
    simpson = (h / 3.0) * (
        integrand[0] + integrand[-1]
        + 4.0 * np.sum(integrand[1:-1:2]) + 2.0 * np.sum(integrand[2:-1:2])
    )
    quad_err = abs(float(traj.tau[-1]) - simpson) / abs(simpson)

    # part 2: flat-space v = 0.6c gives dt/dtau = gamma = 1.25
    flat = ContactHamiltonianSystem(
        metric=geometry.minkowski(), mass=MassModel.constant(1.0), c=1.0
    )
    s0f = dynamics.state_from_velocity(flat, [0, 0, 0, 0], 0.0, [0.6, 0.0, 0.0])
    run = integrate(flat, s0f, IntegratorConfig(stop=(StopCondition("tau_reached", 2.0),)))
    gamma = 1.25
    gamma_err = abs(float(run.q[-1, 0]) / (flat.c * float(run.tau[-1])) - gamma)
    by_tau = reparametrize_by_tau(run, num=11)
    slope_err = float(np.max(np.abs(by_tau.deriv[:, 0] - gamma)))
    passed = quad_err < 1e-6 and gamma_err < 1e-8 and slope_err < 1e-8
    return CheckResult(
        name="proper-time",
        passed=passed,
        measured=max(quad_err, gamma_err),
        tolerance=1e-6,
        detail=(
            f"line-element quadrature {quad_err:.3e} (tol 1e-6); "
            f"gamma endpoint {gamma_err:.3e}, grid slope {slope_err:.3e} (tol 1e-8)"
        ),
    )


# --- criterion 8: reduction equivalence ----------------------------------------------


def check_reduction_equivalence() -> CheckResult:
    sys = _orbit_system(gm=0.05, mass=MassModel.exp_decay(1.0, 0.1, phi0=0.0, c=1.0))
    s0 = dynamics.state_from_velocity(sys, [0, 1, 0, 0], 0.0, [0.0, 0.2, 0.0])
    cfg = IntegratorConfig(
        rel_tol=1e-11, abs_tol=1e-13, max_step=0.15,
        stop=(StopCondition("lambda_reached", 5.0),),
    )
    by_phi = reparametrize_by_phi(integrate(sys, s0, cfg), num=41)

    # independent integration of the reduced equations, phi as the parameter
    grid = by_phi.lam
    z = np.concatenate([s0.q, s0.p])
    substeps = 12
    worst = 0.0

    def rhs(phi, z):
        s = ExtendedState(q=z[0:4], p=z[4:8], phi=float(phi))
        dq, dp = dynamics.reduced_field_phi(sys, s)
        return np.concatenate([dq, dp])

    for k in range(len(grid)):
        if k > 0:
            h = (grid[k] - grid[k - 1]) / substeps
            phi = grid[k - 1]
            for _ in range(substeps):
                k1 = rhs(phi, z)
                k2 = rhs(phi + 0.5 * h, z + 0.5 * h * k1)
                k3 = rhs(phi + 0.5 * h, z + 0.5 * h * k2)
                k4 = rhs(phi + h, z + h * k3)
                z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                phi += h
        diff = max(
            float(np.max(np.abs(z[0:4] - by_phi.q[k]))),
            float(np.max(np.abs(z[4:8] - by_phi.p[k]))),
        )
        worst = max(worst, diff)
    return CheckResult(
        name="reduction-equivalence",
        passed=worst < 1e-6,
        measured=worst,
        tolerance=1e-6,
        detail="lambda-run resampled in phi vs direct phi-integration",
    )


# --- criterion 9: photon behavior ------------------------------------------------------


def check_photon_behavior() -> CheckResult:
    sys = ContactHamiltonianSystem(
        metric=geometry.minkowski(), mass=MassModel.zero(), c=1.0
    )
    p = dynamics.solve_p0_on_shell(sys, np.zeros(4), 0.0, np.array([1.0, 0.0, 0.0]))
    s0 = ExtendedState(q=[0, 0, 0, 0], p=p, phi=0.0)
    cfg = IntegratorConfig(stop=(StopCondition("lambda_reached", 10.0),))
    traj = integrate(sys, s0, cfg)
    phi_drift = float(np.max(np.abs(traj.phi - traj.phi[0])))
    shell = float(np.max(np.abs(traj.shell)))
    straight = float(np.max(np.abs(traj.q[:, 1] - traj.lam)))
    tau_nan = bool(np.all(np.isnan(traj.tau)))
    raised = False
    try:
        reparametrize_by_phi(traj)
    except NotMonotone:
        raised = True
    passed = phi_drift < 1e-12 and shell < 1e-12 and straight < 1e-9 and tau_nan and raised
    return CheckResult(
        name="photon-behavior",
        passed=passed,
        measured=max(phi_drift, shell, straight),
        tolerance=1e-12,
        detail=(
            f"phi_drift={phi_drift:.3e}, shell={shell:.3e}, ray_diff={straight:.3e}, "
            f"tau_nan={tau_nan}, phi_reparam_rejected={raised}"
        ),
    )


# --- criteria 10/11: kinetic entropy and measure -----------------------------------------


@functools.lru_cache(maxsize=8)
def _gas_run(preset: str, span: float | None = None, reports: int | None = None):
    cfg = preset_scenario(preset)
    sys = build_system(cfg)
    spec = build_density_spec(cfg)
    e0 = sample_ensemble(sys, spec, cfg.initial["n"], cfg.initial["seed"])
    span = cfg.stop[0]["value"] if span is None else span
    reports = cfg.outputs["reports"] if reports is None else reports
    functional = EntropyFunctional.shannon_boltzmann()
    e_end, rows, _ = ensemble_series(e0, span, reports, functional)
    return e0, e_end, rows, span


def check_entropy_decay() -> CheckResult:
    e0, e_end, rows, span = _gas_run("decay-gas")
    n = e0.n
    alpha = 0.1
    lam, weight, entropy_col, rate_col = rows.T
    monotone = bool(np.all(np.diff(entropy_col) < 0.0))
    rate0_err = abs(rate_col[0] - (-0.4))

    # empirical slope between reports vs analytic rate at the midpoint, using
    # the exact flat-space solution rate(lam) = -4 alpha / (1 + alpha lam)
    tol_rel = 0.01 + 3.0 / math.sqrt(n)
    worst_rel = 0.0
    for k in range(len(lam) - 1):
        slope = (entropy_col[k + 1] - entropy_col[k]) / (lam[k + 1] - lam[k])
        mid = 0.5 * (lam[k] + lam[k + 1])
        analytic_mid = -4.0 * alpha / (1.0 + alpha * mid)
        worst_rel = max(worst_rel, abs(slope - analytic_mid) / abs(analytic_mid))

    # sign flips: growing mass raises entropy; photons and constant mass freeze it
    _, _, rows_abs, _ = _gas_run("absorbing-gas")
    absorbing_ok = bool(
        np.all(np.diff(rows_abs[:, 2]) > 0.0) and rows_abs[0, 3] > 0.0
    )
    _, _, rows_ph, _ = _gas_run("photon-gas")
    photon_ok = bool(
        np.max(np.abs(rows_ph[:, 2] - rows_ph[0, 2])) < 1e-12
        and np.max(np.abs(rows_ph[:, 3])) < 1e-12
    )
    rows_cm = _constant_mass_gas_rows()
    constant_ok = bool(
        np.max(np.abs(rows_cm[:, 2] - rows_cm[0, 2])) < 1e-12
        and np.max(np.abs(rows_cm[:, 3])) < 1e-12
    )
    passed = (monotone and rate0_err < 1e-10 and worst_rel < tol_rel
              and absorbing_ok and photon_ok and constant_ok)
    return CheckResult(
        name="entropy-decay",
        passed=passed,
        measured=worst_rel,
        tolerance=tol_rel,
        detail=(
            f"monotone={monotone}, rate(0)+0.4={rate0_err:.2e}, "
            f"absorbing_increases={absorbing_ok}, photon_frozen={photon_ok}, "
            f"constant_mass_frozen={constant_ok}"
        ),
    )


def _constant_mass_gas_rows() -> np.ndarray:
    cfg = load_scenario({
        "name": "constant-gas",
        "metric": {"kind": "minkowski"},
        "mass": {"kind": "constant", "m0": 1.0},
        "c": 1.0,
        "initial": {"kind": "ensemble", "n": 2000, "seed": 5,
                    "momentum": {"kind": "gaussian", "mean": [0.0, 0.0, 0.0],
                                 "sigma": [0.2, 0.2, 0.2]}},
        "stop": [{"kind": "lambda_reached", "value": 2.0}],
        "outputs": {"reports": 5},
    })
    sys = build_system(cfg)
    e0 = sample_ensemble(sys, build_density_spec(cfg), cfg.initial["n"], cfg.initial["seed"])
    _, rows, _ = ensemble_series(e0, 2.0, 5, EntropyFunctional.shannon_boltzmann())
    return rows


def check_measure_conservation() -> CheckResult:
    e0, e_end, rows, span = _gas_run("decay-gas", span=10.0, reports=20)
    weight_drift = float(np.max(np.abs(rows[:, 1] - rows[0, 1]))) / rows[0, 1]
    # pointwise transport: f(lam)/f(0) = (1 + alpha lam)^4 for every marker
    alpha = 0.1
    ratio = e_end.f / e0.f
    target = (1.0 + alpha * span) ** 4
    transport_err = float(np.max(np.abs(ratio - target) / target))
    passed = weight_drift < 1e-8 and transport_err < 1e-6
    return CheckResult(
        name="measure-conservation",
        passed=passed,
        measured=max(weight_drift, transport_err),
        tolerance=1e-6,
        detail=(
            f"weight_drift={weight_drift:.3e} (tol 1e-8) over span {span}, "
            f"f_transport={transport_err:.3e}"
        ),
    )


# --- criterion 12: convergence order ------------------------------------------------------


def check_convergence_order() -> CheckResult:
    sys = _decay_flat_system()
    s0 = ExtendedState(q=[0, 0, 0, 0], p=[-1, 0, 0, 0], phi=0.0)
    lam_end = 2.0
    hs = [0.1, 0.05, 0.025]
    errs = []
    for h in hs:
        cfg = IntegratorConfig(
            method="rk4", fixed_step=h,
            stop=(StopCondition("lambda_reached", lam_end),),
        )
        traj = integrate(sys, s0, cfg)
        q0e, p0e, phie, taue, _ = _decay_closed_form(lam_end)
        err = max(
            abs(traj.q[-1, 0] - q0e),
            abs(traj.p[-1, 0] - p0e),
            abs(traj.phi[-1] - phie),
            abs(traj.tau[-1] - taue),
        )
        errs.append(err)
    slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    passed = 3.7 <= slope <= 4.3
    return CheckResult(
        name="convergence-order",
        passed=passed,
        measured=slope,
        tolerance=4.0,
        detail=f"log-log error slope from h={hs} (errors {[f'{e:.2e}' for e in errs]})",
    )


# --- battery -------------------------------------------------------------------------------


CHECKS = (
    ("contact-identities", check_contact_identities),
    ("energy-conservation", check_energy_conservation),
    ("divergence-identity", check_divergence),
    ("geodesic-recovery", check_geodesic_recovery),
    ("newtonian-limit", check_newtonian_limit),
    ("decay-cancellation", check_decay_cancellation),
    ("proper-time", check_proper_time),
    ("reduction-equivalence", check_reduction_equivalence),
    ("photon-behavior", check_photon_behavior),
    ("entropy-decay", check_entropy_decay),
    ("measure-conservation", check_measure_conservation),
    ("convergence-order", check_convergence_order),
)


def run_all(perturb_divergence: bool = False) -> list[CheckResult]:
    """Run the full battery; failures are reported, not raised."""
    results = []
    for name, fn in CHECKS:
        try:
            if fn is check_divergence:
                results.append(fn(perturb=perturb_divergence))
            else:
                results.append(fn())
        except Exception as exc:  # a crash is a failed check, not a crash of verify
            results.append(
                CheckResult(
                    name=name, passed=False, measured=math.nan, tolerance=math.nan,
                    detail=f"raised {type(exc).__name__}: {exc}",
                )
            )
    return results
