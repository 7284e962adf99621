"""Frame-field providers and the objects a frame carries by itself.

A frame ``w`` is an invertible ``n x n`` matrix per chart point with
``w[i, a] = w^i_a``: row ``i`` is the coordinate component, column ``a`` the
frame label.  Jacobians are stored as ``jac[i, a, j] = d_j w^i_a``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, SingularFrameError, UnknownFrameError
from .tensor import LOWER, UPPER, Box, FDConfig, TensorValue, fd_derivative

COND_CAP = 1e8


@dataclass(frozen=True)
class FrameProvider:
    name: str
    domain: Box
    eval: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def dim(self) -> int:
        return self.domain.dim

    def contains(self, x) -> bool:
        return self.domain.contains(x)

    def w(self, x) -> np.ndarray:
        x = _as_point(self, x)
        return np.asarray(self.eval(x), dtype=float)

    def dw(self, x, cfg: FDConfig | None = None) -> np.ndarray:
        """``d_j w^i_a`` at ``x``; analytic when available, finite differences otherwise."""
        x = _as_point(self, x)
        if self.jac is not None:
            return np.asarray(self.jac(x), dtype=float)
        return fd_derivative(self.eval, x, cfg, domain=self.domain)


@dataclass(frozen=True)
class FrameAtPoint:
    w: np.ndarray
    w_inv: np.ndarray


def _as_point(p: FrameProvider, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != p.dim:
        raise DomainError(f"point has {x.size} coordinates, frame {p.name!r} has dimension {p.dim}")
    if not p.contains(x):
        raise DomainError(f"point {x.tolist()} outside the domain of {p.name!r}")
    return x


def evaluate_frame(p: FrameProvider, x) -> FrameAtPoint:
    w = p.w(x)
    if not np.all(np.isfinite(w)):
        raise SingularFrameError(f"non-finite frame at {np.asarray(x).tolist()}")
    cond = np.linalg.cond(w)
    if not np.isfinite(cond) or cond > COND_CAP:
        raise SingularFrameError(f"frame {p.name!r} singular at {np.asarray(x).tolist()} (cond={cond:.3g})")
    w_inv = np.linalg.solve(w, np.eye(p.dim))
    return FrameAtPoint(w, w_inv)


def groupoid_arrow(p: FrameProvider, x, y) -> np.ndarray:
    """The 1-arrow ``eps^i_j(x, y) = w^i_a(y) w~^a_j(x)`` carrying frames at x to frames at y."""
    return evaluate_frame(p, y).w @ evaluate_frame(p, x).w_inv


def canonical_metric(p: FrameProvider, x) -> tuple[TensorValue, TensorValue]:
    """Metric making the frame orthonormal, and its inverse."""
    f = evaluate_frame(p, x)
    g = f.w_inv.T @ f.w_inv
    ginv = f.w @ f.w.T
    # exact symmetry; the two products above are symmetric only up to rounding
    g = (g + g.T) / 2
    ginv = (ginv + ginv.T) / 2
    return TensorValue(g, (LOWER, LOWER)), TensorValue(ginv, (UPPER, UPPER))


def metric_derivative(p: FrameProvider, x, cfg: FDConfig | None = None) -> np.ndarray:
    """``d_r g_ij`` stored as ``[i, j, r]``.

    Uses the frame Jacobian when the provider has one, otherwise differences
    the metric directly.
    """
    if p.jac is None:
        return fd_derivative(lambda y: canonical_metric(p, y)[0].entries, x, cfg, domain=p.domain)
    f = evaluate_frame(p, x)
    dw = p.dw(x)
    # d_r w~ = -w~ (d_r w) w~
    dwinv = -np.einsum("ab,bcr,cj->ajr", f.w_inv, dw, f.w_inv)
    half = np.einsum("air,aj->ijr", dwinv, f.w_inv)
    return half + half.transpose(1, 0, 2)


def frame_fields(p: FrameProvider, x) -> list[np.ndarray]:
    w = evaluate_frame(p, x).w
    return [w[:, k].copy() for k in range(p.dim)]


def act_constant(p: FrameProvider, A) -> FrameProvider:
    """Act on the frame labels with a constant matrix: ``(Aw)^i_j = A^a_j w^i_a``."""
    A = np.array(A, dtype=float)
    if A.shape != (p.dim, p.dim):
        raise ValueError(f"constant matrix must be {p.dim}x{p.dim}")
    if np.linalg.cond(A) > COND_CAP:
        raise SingularFrameError("constant matrix is singular")
    A.flags.writeable = False
    jac = None
    if p.jac is not None:
        base_jac = p.jac
        jac = lambda x: np.einsum("iaj,ab->ibj", base_jac(x), A)  # noqa: E731
    base_eval = p.eval
    return FrameProvider(f"{p.name}*A", p.domain, lambda x: base_eval(x) @ A, jac)


def sample_points(p: FrameProvider, count: int, seed: int = 42, margin: float = 0.05) -> list[np.ndarray]:
    """Uniform points in the domain, kept ``margin * width`` away from its faces."""
    if count < 1:
        raise ValueError("sample count must be at least 1")
    box = p.domain.shrink(margin)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(box.lo, box.hi, size=(count, p.dim))
    return [pt for pt in pts]


# --- catalog ---------------------------------------------------------------

def _euclidean(n: int) -> FrameProvider:
    box = Box((-2.0,) * n, (2.0,) * n)
    return FrameProvider(
        f"euclidean-{n}",
        box,
        lambda x: np.eye(n),
        lambda x: np.zeros((n, n, n)),
    )


def _heisenberg_w(x):
    w = np.eye(3)
    w[2, 1] = x[0]
    return w


def _heisenberg_jac(x):
    d = np.zeros((3, 3, 3))
    d[2, 1, 0] = 1.0
    return d


def _affine_w(x):
    return np.diag([1.0, np.exp(x[0])])


def _affine_jac(x):
    d = np.zeros((2, 2, 2))
    d[1, 1, 0] = np.exp(x[0])
    return d


def _cross_matrix(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def _quaternion_w(v):
    # columns are the imaginary parts of q*i, q*j, q*k for the unit quaternion q = (q0, v)
    q0 = np.sqrt(1.0 - v @ v)
    return q0 * np.eye(3) + _cross_matrix(v)


def _quaternion_jac(v):
    q0 = np.sqrt(1.0 - v @ v)
    d = np.zeros((3, 3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        d[:, :, j] = -v[j] / q0 * np.eye(3) + _cross_matrix(e)
    return d


def _rotor_w(x):
    t = x[0] * x[1]
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s], [s, c]])


def _rotor_jac(x):
    t = x[0] * x[1]
    c, s = np.cos(t), np.sin(t)
    dt = (x[1], x[0])
    dR = np.array([[-s, -c], [c, -s]])
    return np.stack([dR * dt[0], dR * dt[1]], axis=-1)


_FIXED = {
    "heisenberg3": lambda: FrameProvider("heisenberg3", Box((-1.0,) * 3, (1.0,) * 3), _heisenberg_w, _heisenberg_jac),
    "affine2": lambda: FrameProvider("affine2", Box((-1.0,) * 2, (1.0,) * 2), _affine_w, _affine_jac),
    "quaternion3": lambda: FrameProvider("quaternion3", Box((-0.5,) * 3, (0.5,) * 3), _quaternion_w, _quaternion_jac),
    "rotor2": lambda: FrameProvider("rotor2", Box((-1.0,) * 2, (1.0,) * 2), _rotor_w, _rotor_jac),
}

CATALOG_NAMES = ("euclidean-<n>",) + tuple(_FIXED)

# Levi-Civita symbol eps[i, j, k]
_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS3[_i, _j, _k] = 1.0
    _EPS3[_j, _i, _k] = -1.0


def catalog_lookup(name: str) -> FrameProvider:
    m = re.fullmatch(r"euclidean-(\d+)", name)
    if m and int(m.group(1)) >= 1:
        return _euclidean(int(m.group(1)))
    if name in _FIXED:
        return _FIXED[name]()
    raise UnknownFrameError(name, CATALOG_NAMES)


def levi_civita_symbol3() -> np.ndarray:
    return _EPS3.copy()


def flat_catalog(dim_euclidean: int = 3) -> list[FrameProvider]:
    """The flat catalog entries: abelian, 2-step nilpotent, solvable, semisimple."""
    return [catalog_lookup(f"euclidean-{dim_euclidean}")] + [catalog_lookup(n) for n in ("heisenberg3", "affine2", "quaternion3")]


def full_catalog(dim_euclidean: int = 3) -> list[FrameProvider]:
    return flat_catalog(dim_euclidean) + [catalog_lookup("rotor2")]


def parse_point(text: str | Sequence[float]) -> np.ndarray:
    if isinstance(text, str):
        try:
            return np.array([float(v) for v in text.split(",")])
        except ValueError:
            raise ValueError(f"bad point {text!r}; expected comma separated numbers") from None
    return np.asarray(text, dtype=float)
