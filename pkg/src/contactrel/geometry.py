"""Spacetime geometry: inverse-metric fields and derived curvature quantities.

Conventions
-----------
* Signature (-,+,+,+); coordinate index 0 is the time direction, q^0 = c t.
* The primary object is the *inverse* metric g^{mu nu}(q, phi), which is what
  the Hamiltonian needs.  The lowered metric g_{mu nu} is obtained by matrix
  inversion on demand.
* Evaluation is batched: ``q`` has shape (..., 4), ``phi`` is a scalar or has
  shape (...), and the metric comes back with shape (..., 4, 4).
* Derivative tensors put the derivative index last:
  ``d_q[..., a, b, mu] = d g^{ab} / d q^mu`` and ``d_phi[..., a, b]``.

Analytic derivatives are optional; missing ones fall back to 4th-order central
finite differences with steps that scale with the coordinate magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BadSignature, NonFiniteDerivative, NonFiniteMetric, SingularMetric

__all__ = [
    "MetricField",
    "inverse_metric",
    "lowered_metric",
    "metric_derivatives",
    "christoffel",
    "lower_index",
    "raise_index",
    "minkowski",
    "weak_field",
    "point_mass_potential",
    "uniform_gradient_potential",
    "expression_metric",
]

_ETA = np.diag([-1.0, 1.0, 1.0, 1.0])

# Validation thresholds for inverse_metric.
SYMMETRY_TOL = 1e-14
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class MetricField:
    """Inverse metric field g^{mu nu}(q, phi) with optional analytic derivatives.

    Parameters
    ----------
    func : callable
        ``func(q, phi) -> (..., 4, 4)`` inverse metric, batched as described in
        the module docstring.
    d_q : callable or None
        ``d_q(q, phi) -> (..., 4, 4, 4)`` with the q-derivative index last.
        When None, 4th-order central differences of ``func`` are used.
    d_phi : callable or None
        ``d_phi(q, phi) -> (..., 4, 4)``.  When None, finite differences.
    fd_step_q, fd_step_phi : float
        Base finite-difference steps; the actual step for coordinate x is
        ``step * (1 + |x|)``.
    name : str
        Human-readable tag used in reports and serialized scenarios.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    d_q: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    d_phi: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    fd_step_q: float = 1e-5
    fd_step_phi: float = 1e-5
    name: str = "custom"

    def __call__(self, q: np.ndarray, phi) -> np.ndarray:
        return self.func(np.asarray(q, dtype=float), phi)


def _eval_raw(metric: MetricField, q: np.ndarray, phi) -> np.ndarray:
    g = metric.func(q, phi)
    if not np.all(np.isfinite(g)):
        raise NonFiniteMetric(f"metric '{metric.name}' produced non-finite entries")
    return g


def inverse_metric(metric: MetricField, q: np.ndarray, phi) -> np.ndarray:
    """Evaluate g^{mu nu} at (q, phi) with finiteness, symmetry and signature checks.

    Accepts a single point (q shape (4,)) or a batch (q shape (..., 4)).
    Raises NonFiniteMetric, BadSignature, or SingularMetric.
    """
    q = np.asarray(q, dtype=float)
    g = _eval_raw(metric, q, phi)
    scale = np.maximum(1.0, np.max(np.abs(g)))
    asym = np.max(np.abs(g - np.swapaxes(g, -1, -2)))
    if asym > SYMMETRY_TOL * scale:
        raise BadSignature(
            f"metric '{metric.name}' is not symmetric (asymmetry {asym:.3e})"
        )
    evals = np.linalg.eigvalsh(g)
    if not (np.all(evals[..., 0] < 0.0) and np.all(evals[..., 1:] > 0.0)):
        raise BadSignature(
            f"metric '{metric.name}' does not have signature (-,+,+,+)"
        )
    return g


def lowered_metric(metric: MetricField, q: np.ndarray, phi) -> np.ndarray:
    """g_{mu nu} by inversion of the validated inverse metric."""
    g = inverse_metric(metric, q, phi)
    if np.any(np.linalg.cond(g) > CONDITION_LIMIT):
        raise SingularMetric(
            f"metric '{metric.name}' is numerically singular at the requested point"
        )
    gl = np.linalg.inv(g)
    return 0.5 * (gl + np.swapaxes(gl, -1, -2))


def _fd4(f_m2, f_m1, f_p1, f_p2, h):
    """4th-order central difference from the four shifted evaluations."""
    return (f_m2 - 8.0 * f_m1 + 8.0 * f_p1 - f_p2) / (12.0 * h)


def _fd_dq(metric: MetricField, q: np.ndarray, phi) -> np.ndarray:
    cols = []
    for mu in range(4):
        h = metric.fd_step_q * (1.0 + np.abs(q[..., mu]))
        shifted = []
        for s in (-2.0, -1.0, 1.0, 2.0):
            qs = q.copy()
            qs[..., mu] = qs[..., mu] + s * h
            shifted.append(_eval_raw(metric, qs, phi))
        hh = h[..., None, None] if np.ndim(h) else h
        cols.append(_fd4(shifted[0], shifted[1], shifted[2], shifted[3], hh))
    return np.stack(cols, axis=-1)


def _fd_dphi(metric: MetricField, q: np.ndarray, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    h = metric.fd_step_phi * (1.0 + np.abs(phi))
    vals = [_eval_raw(metric, q, phi + s * h) for s in (-2.0, -1.0, 1.0, 2.0)]
    hh = h[..., None, None] if np.ndim(h) else h
    return _fd4(vals[0], vals[1], vals[2], vals[3], hh)


def metric_derivatives(metric: MetricField, q: np.ndarray, phi) -> tuple[np.ndarray, np.ndarray]:
    """Return (d_q, d_phi) derivative tensors of the inverse metric.

    ``d_q[..., a, b, mu] = d g^{ab}/d q^mu`` and ``d_phi[..., a, b]``; both are
    exactly symmetric in (a, b).  Uses analytic callbacks when the field
    provides them, 4th-order central differences otherwise.
    """
    q = np.asarray(q, dtype=float)
    dq = metric.d_q(q, phi) if metric.d_q is not None else _fd_dq(metric, q, phi)
    dphi = metric.d_phi(q, phi) if metric.d_phi is not None else _fd_dphi(metric, q, phi)
    dq = np.asarray(dq, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    if not (np.all(np.isfinite(dq)) and np.all(np.isfinite(dphi))):
        raise NonFiniteDerivative(
            f"metric '{metric.name}' derivatives are non-finite"
        )
    dq = 0.5 * (dq + np.swapaxes(dq, -2, -3))
    dphi = 0.5 * (dphi + np.swapaxes(dphi, -1, -2))
    return dq, dphi


def christoffel(metric: MetricField, q: np.ndarray, phi) -> np.ndarray:
    """Christoffel symbols Gamma^mu_{ab} of the lowered metric at fixed phi.

    Built from inverse-metric derivatives via
    d g_{sb}/d q^a = -g_{sm} (d g^{mn}/d q^a) g_{nb}, then
    Gamma^mu_{ab} = 1/2 g^{mu s} (d_a g_{sb} + d_b g_{sa} - d_s g_{ab}).
    Output is exactly symmetric in the lower pair.
    """
    q = np.asarray(q, dtype=float)
    g = inverse_metric(metric, q, phi)
    gl = lowered_metric(metric, q, phi)
    dq, _ = metric_derivatives(metric, q, phi)
    # L[..., s, b, a] = d g_{sb} / d q^a
    L = -np.einsum("...sm,...mna,...nb->...sba", gl, dq, gl)
    # C[s, a, b] = d_a g_{sb} + d_b g_{sa} - d_s g_{ab}
    term1 = np.swapaxes(L, -1, -2)             # [s, a, b] = L[s, b, a] = d_a g_{sb}
    term2 = L                                  # [s, a, b] = L[s, a, b] = d_b g_{sa}
    perm = list(range(L.ndim))
    perm[-3], perm[-2], perm[-1] = perm[-1], perm[-3], perm[-2]
    term3 = np.transpose(L, perm)              # [s, a, b] = L[a, b, s] = d_s g_{ab}
    C = term1 + term2 - term3
    gamma = 0.5 * np.einsum("...ms,...sab->...mab", g, C)
    return 0.5 * (gamma + np.swapaxes(gamma, -1, -2))


def lower_index(metric: MetricField, q: np.ndarray, phi, vec: np.ndarray) -> np.ndarray:
    """v_mu = g_{mu nu} v^nu."""
    gl = lowered_metric(metric, q, phi)
    return np.einsum("...ab,...b->...a", gl, np.asarray(vec, dtype=float))


def raise_index(metric: MetricField, q: np.ndarray, phi, cov: np.ndarray) -> np.ndarray:
    """v^mu = g^{mu nu} v_nu."""
    g = inverse_metric(metric, q, phi)
    return np.einsum("...ab,...b->...a", g, np.asarray(cov, dtype=float))


# --- constructors -----------------------------------------------------------


def _batch_like(q: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Broadcast a constant (4, 4) matrix over the batch shape of q."""
    return np.broadcast_to(mat, q.shape[:-1] + (4, 4))


def minkowski() -> MetricField:
    """Flat inverse metric diag(-1, 1, 1, 1), independent of q and phi."""

    def func(q, phi):
        return _batch_like(q, _ETA)

    def d_q(q, phi):
        return np.zeros(q.shape[:-1] + (4, 4, 4))

    def d_phi(q, phi):
        return np.zeros(q.shape[:-1] + (4, 4))

    return MetricField(func=func, d_q=d_q, d_phi=d_phi, name="minkowski")


def point_mass_potential(gm: float, softening: float = 0.0):
    """Newtonian potential of a point mass at the spatial origin.

    Returns (potential, gradient) callables over spatial positions x with
    shape (..., 3):  phi_N = -GM / sqrt(|x|^2 + soft^2).
    """
    gm = float(gm)
    s2 = float(softening) ** 2

    def pot(x):
        r2 = np.sum(x * x, axis=-1) + s2
        return -gm / np.sqrt(r2)

    def grad(x):
        r2 = np.sum(x * x, axis=-1) + s2
        return gm * x / np.power(r2, 1.5)[..., None]

    return pot, grad


def uniform_gradient_potential(g_vec: Sequence[float]):
    """Linear potential phi_N = g . x (uniform acceleration -g)."""
    g_arr = np.asarray(g_vec, dtype=float).reshape(3)

    def pot(x):
        return np.einsum("...i,i->...", x, g_arr)

    def grad(x):
        return np.broadcast_to(g_arr, x.shape).copy()

    return pot, grad


def weak_field(
    potential: Callable[[np.ndarray], np.ndarray],
    gradient: Callable[[np.ndarray], np.ndarray] | None = None,
    c: float = 1.0,
    name: str = "weak-field",
) -> MetricField:
    """Weak-field inverse metric for a static Newtonian potential.

    g^{00} = -(1 - 2 phi_N/c^2), g^{ii} = 1 - 2 phi_N/c^2, off-diagonal zero,
    to first order in phi_N/c^2.  ``potential`` maps spatial positions
    (..., 3) -> (...); ``gradient`` maps (..., 3) -> (..., 3) and enables
    analytic q-derivatives (otherwise finite differences are used).
    The potential has no phi dependence, so d_phi is identically zero.
    """
    c2 = float(c) ** 2

    def func(q, phi):
        x = q[..., 1:]
        u = 2.0 * potential(x) / c2
        g = np.zeros(q.shape[:-1] + (4, 4))
        g[..., 0, 0] = -1.0 + u
        for i in (1, 2, 3):
            g[..., i, i] = 1.0 - u
        return g

    d_q = None
    if gradient is not None:

        def d_q(q, phi):
            x = q[..., 1:]
            du = 2.0 * gradient(x) / c2  # (..., 3) = d u / d x^i
            out = np.zeros(q.shape[:-1] + (4, 4, 4))
            for i in (1, 2, 3):
                out[..., 0, 0, i] = du[..., i - 1]
                for j in (1, 2, 3):
                    out[..., j, j, i] = -du[..., i - 1]
            return out

    def d_phi(q, phi):
        return np.zeros(q.shape[:-1] + (4, 4))

    return MetricField(func=func, d_q=d_q, d_phi=d_phi, name=name)


_EXPR_NAMESPACE = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "tanh": np.tanh,
    "abs": np.abs,
    "pi": np.pi,
    "e": np.e,
}


def expression_metric(
    diag: Sequence[str],
    fd_step_q: float = 1e-5,
    fd_step_phi: float = 1e-5,
    name: str = "expression",
) -> MetricField:
    """Diagonal inverse metric whose entries are numpy expressions.

    ``diag`` holds four strings over the variables x0..x3 and phi, e.g.
    ``("-(1 + 0.1*sin(x1))", "1", "1", "1")``.  Entries are evaluated with
    numpy semantics and broadcast over the batch; derivatives come from the
    finite-difference fallback.  Expressions are compiled once and evaluated
    in a restricted namespace (no builtins).
    """
    if len(diag) != 4:
        raise ValueError("expression_metric needs exactly 4 diagonal entries")
    codes = [compile(s, f"<metric diag[{i}]>", "eval") for i, s in enumerate(diag)]

    def func(q, phi):
        batch = q.shape[:-1]
        phi_arr = np.asarray(phi, dtype=float)
        local = {
            "x0": q[..., 0], "x1": q[..., 1], "x2": q[..., 2], "x3": q[..., 3],
            "phi": phi_arr,
        }
        g = np.zeros(batch + (4, 4))
        for i, code in enumerate(codes):
            val = eval(code, {"__builtins__": {}}, {**_EXPR_NAMESPACE, **local})
            g[..., i, i] = np.broadcast_to(val, batch)
        return g

    return MetricField(
        func=func, fd_step_q=fd_step_q, fd_step_phi=fd_step_phi, name=name
    )
