"""Connection coefficients, torsion, the two canonical covariant derivatives,
linear curvature, flatness and pre-1-parameter paths.

Slot conventions (``Gamma[i, j, k] = Gamma^i_{jk}``, derivative index ``j``):

* frame-parallel derivative ``nabla_tilde``::

      d_r xi^i  - Gamma^i_{rk} xi^k        (upper slot)
      d_r eta_j + Gamma^k_{rj} eta_k       (lower slot)

* ``nabla`` is the same with Gamma's lower slots swapped (``Gamma^i_{kr}``,
  ``Gamma^k_{jr}``).  Its torsion is ``+I``.

The derivative index of a covariant derivative is appended as the last slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, FlowError, NonFiniteError
from .frame import FrameProvider, canonical_metric, evaluate_frame, metric_derivative
from .tensor import LOWER, UPPER, FDConfig, TensorValue, fd_derivative

ANALYTIC_FLAT_TOL = 1e-6
FD_FLAT_TOL = 1e-4


@dataclass(frozen=True)
class ConnectionCoefficients:
    gamma: np.ndarray

    def torsion(self) -> TensorValue:
        return TensorValue(self.gamma - self.gamma.transpose(0, 2, 1), (UPPER, LOWER, LOWER))


def gamma(p: FrameProvider, x, cfg: FDConfig | None = None) -> ConnectionCoefficients:
    """``Gamma^i_{jk} = d_j w^i_a  w~^a_k``; not the Christoffel symbols of the metric."""
    f = evaluate_frame(p, x)
    dw = p.dw(x, cfg)
    return ConnectionCoefficients(np.einsum("iaj,ak->ijk", dw, f.w_inv))


def integrability(p: FrameProvider, x, cfg: FDConfig | None = None) -> TensorValue:
    """Integrability object ``I^i_{jk}``, the antisymmetrized connection coefficients."""
    return gamma(p, x, cfg).torsion()


def default_flat_tol(p: FrameProvider) -> float:
    return ANALYTIC_FLAT_TOL if p.jac is not None else FD_FLAT_TOL


def _as_tensor_field(field: Callable) -> Callable[[np.ndarray], TensorValue]:
    def wrapped(y):
        val = field(y)
        return val if isinstance(val, TensorValue) else TensorValue(np.asarray(val), ())
    return wrapped


def _covariant(p, field, x, r, cfg, swapped, derivative=None) -> TensorValue:
    x = np.asarray(x, dtype=float)
    field = _as_tensor_field(field)
    value = field(x)
    if derivative is None:
        d = fd_derivative(field, x, cfg, domain=p.domain).entries
    else:
        d = np.asarray(derivative(x), dtype=float)
    G = gamma(p, x).gamma
    # A[i, k, r]: coefficient multiplying the slot index k for derivative direction r
    A = G if swapped else G.transpose(0, 2, 1)
    out = d.copy()
    E = value.entries
    for s, var in enumerate(value.signature):
        Es = np.moveaxis(E, s, 0)
        if var == UPPER:
            term = -np.einsum("ikr,k...->i...r", A, Es)
        else:
            term = np.einsum("kjr,k...->j...r", A, Es)
        out += np.moveaxis(term, 0, s)
    result = TensorValue(out, value.signature + (LOWER,))
    if r is None:
        return result
    return TensorValue(result.entries[..., r], value.signature)


def nabla_tilde(p: FrameProvider, field: Callable, x, r: int | None = None,
                cfg: FDConfig | None = None, derivative: Callable | None = None) -> TensorValue:
    """Frame-parallel covariant derivative of a tensor field.

    ``field`` maps a point to a :class:`TensorValue`.  With ``r=None`` all
    directions are returned in a trailing lower slot; otherwise only ``r``.
    ``derivative`` optionally supplies the partial derivatives (slot last) in
    place of finite differences.
    """
    return _covariant(p, field, x, r, cfg, swapped=False, derivative=derivative)


def nabla(p: FrameProvider, field: Callable, x, r: int | None = None,
          cfg: FDConfig | None = None, derivative: Callable | None = None) -> TensorValue:
    """Companion covariant derivative with the connection's lower slots swapped."""
    return _covariant(p, field, x, r, cfg, swapped=True, derivative=derivative)


def metric_field(p: FrameProvider) -> tuple[Callable, Callable]:
    """The canonical metric as a field plus its analytic-or-FD partial derivatives."""
    return (lambda y: canonical_metric(p, y)[0]), (lambda y: metric_derivative(p, y))


def linear_curvature(p: FrameProvider, x, cfg: FDConfig | None = None) -> TensorValue:
    """``F^i_{kj,r} = nabla_tilde_r I^i_{kj}``, slots ``[i, k, j, r]``."""
    cfg = cfg or FDConfig()
    return nabla_tilde(p, lambda y: integrability(p, y, cfg), x, cfg=cfg.nested())


@dataclass(frozen=True)
class Flatness:
    flat: bool
    max_residual: float

    def __bool__(self):
        return self.flat


def is_flat(p: FrameProvider, samples: Sequence, tol: float | None = None,
            cfg: FDConfig | None = None) -> Flatness:
    if not len(samples):
        raise ValueError("need at least one sample point")
    tol = default_flat_tol(p) if tol is None else tol
    worst = max(linear_curvature(p, x, cfg).norm_inf() for x in samples)
    return Flatness(worst <= tol, worst)


@dataclass(frozen=True)
class FlowPath:
    times: np.ndarray
    points: np.ndarray
    truncated: bool = False

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


def pre_one_parameter_flow(p: FrameProvider, x0, v, t_end: float, dt: float) -> FlowPath:
    """Path whose velocity is the groupoid transport of its initial velocity.

    Solves ``c'(t) = w(c(t)) w~(x0) v`` with fixed-step classical RK4.  If a
    stage leaves the chart the path is cut at the last accepted point and
    ``truncated`` is set.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    x0 = np.asarray(x0, dtype=float)
    v = np.asarray(v, dtype=float)
    label = evaluate_frame(p, x0).w_inv @ v  # frame components, constant along the path

    def velocity(y):
        out = p.w(y) @ label
        if not np.all(np.isfinite(out)):
            raise FlowError(f"non-finite velocity at {y.tolist()}")
        return out

    steps = int(round(abs(t_end) / dt))
    h = dt if t_end >= 0 else -dt
    times, points = [0.0], [x0]
    y = x0.copy()
    truncated = False
    for k in range(steps):
        try:
            k1 = velocity(y)
            k2 = velocity(y + h / 2 * k1)
            k3 = velocity(y + h / 2 * k2)
            k4 = velocity(y + h * k3)
        except DomainError:
            truncated = True
            break
        except NonFiniteError as exc:
            raise FlowError(f"velocity failed at step {k + 1}: {exc}") from None
        y_next = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y_next)):
            raise FlowError(f"non-finite state after step {k + 1}")
        if not p.contains(y_next):
            truncated = True
            break
        y = y_next
        times.append((k + 1) * h)
        points.append(y)
    return FlowPath(np.array(times), np.array(points), truncated)
