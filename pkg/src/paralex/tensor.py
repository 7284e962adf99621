"""Dense tensors at a point, index gymnastics and finite differences.

Every indexed object is stored as a numpy array with one axis per slot, in
the left-to-right order the indices are printed (``S^i_{kj,r}`` lives at
``[i, k, j, r]``).  Derivative slots produced by :func:`fd_derivative` are
appended last.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NonFiniteError, TensorError

UPPER = "u"
LOWER = "l"


@dataclass(frozen=True)
class TensorValue:
    entries: np.ndarray
    signature: tuple[str, ...] = ()

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.float64)
        sig = tuple(self.signature)
        if arr.ndim != len(sig):
            raise TensorError(f"signature {sig} does not match rank {arr.ndim}")
        if any(s not in (UPPER, LOWER) for s in sig):
            raise TensorError(f"signature entries must be 'u' or 'l', got {sig}")
        if arr.ndim and len(set(arr.shape)) != 1:
            raise TensorError(f"all slots must share one dimension, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "signature", sig)

    @property
    def rank(self) -> int:
        return self.entries.ndim

    @property
    def dims(self) -> int:
        return self.entries.shape[0] if self.rank else 0

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __add__(self, other: TensorValue) -> TensorValue:
        _same_signature(self, other)
        return TensorValue(self.entries + other.entries, self.signature)

    def __sub__(self, other: TensorValue) -> TensorValue:
        _same_signature(self, other)
        return TensorValue(self.entries - other.entries, self.signature)

    def __mul__(self, scalar: float) -> TensorValue:
        return TensorValue(self.entries * float(scalar), self.signature)

    __rmul__ = __mul__

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.entries))) if self.entries.size else 0.0


def _same_signature(a: TensorValue, b: TensorValue) -> None:
    if a.signature != b.signature or a.entries.shape != b.entries.shape:
        raise TensorError(f"incompatible tensors {a.signature} and {b.signature}")


def tensor_product(a: TensorValue, b: TensorValue) -> TensorValue:
    return TensorValue(np.multiply.outer(a.entries, b.entries), a.signature + b.signature)


def _check_slot(t: TensorValue, slot: int) -> None:
    if not 0 <= slot < t.rank:
        raise TensorError(f"slot {slot} out of range for rank {t.rank}")


def contract(t: TensorValue, slot_a: int, slot_b: int) -> TensorValue:
    """Sum over a paired upper/lower slot pair; remaining slots keep their order."""
    _check_slot(t, slot_a)
    _check_slot(t, slot_b)
    if slot_a == slot_b:
        raise TensorError("cannot contract a slot with itself")
    if t.signature[slot_a] == t.signature[slot_b]:
        raise TensorError("contraction needs one upper and one lower slot")
    sig = tuple(s for k, s in enumerate(t.signature) if k not in (slot_a, slot_b))
    return TensorValue(np.trace(t.entries, axis1=slot_a, axis2=slot_b), sig)


def check_metric(g: np.ndarray, name: str = "metric") -> None:
    g = np.asarray(g, dtype=float)
    scale = max(1.0, float(np.max(np.abs(g))))
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise TensorError(f"{name} must be a square matrix")
    if np.max(np.abs(g - g.T)) > 1e-12 * scale:
        raise TensorError(f"{name} is not symmetric")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise TensorError(f"{name} is not positive definite") from None


def apply_matrix(entries: np.ndarray, slot: int, m: np.ndarray) -> np.ndarray:
    """Replace slot index ``a`` by ``b`` via ``sum_a entries[..a..] m[a, b]``."""
    out = np.tensordot(entries, m, axes=([slot], [0]))
    return np.moveaxis(out, -1, slot)


def raise_lower(t: TensorValue, slot: int, g: TensorValue, ginv: TensorValue) -> TensorValue:
    """Flip the variance of one slot using the metric (lowering) or its inverse (raising)."""
    _check_slot(t, slot)
    gm, gi = np.asarray(g, dtype=float), np.asarray(ginv, dtype=float)
    check_metric(gm, "g")
    check_metric(gi, "g inverse")
    sig = list(t.signature)
    if sig[slot] == UPPER:
        entries = apply_matrix(t.entries, slot, gm)
        sig[slot] = LOWER
    else:
        entries = apply_matrix(t.entries, slot, gi)
        sig[slot] = UPPER
    return TensorValue(entries, tuple(sig))


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box; membership allows a tiny relative slack."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must be non-empty and of equal length")
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError(f"empty box {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> np.ndarray:
        return (np.array(self.lo) + np.array(self.hi)) / 2

    @property
    def widths(self) -> np.ndarray:
        return np.array(self.hi) - np.array(self.lo)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        slack = 1e-9 * self.widths
        return bool(np.all(x >= np.array(self.lo) - slack) and np.all(x <= np.array(self.hi) + slack))

    def shrink(self, fraction: float) -> Box:
        pad = fraction * self.widths
        return Box(tuple(np.array(self.lo) + pad), tuple(np.array(self.hi) - pad))


CENTRAL2 = "central-2nd-order"
CENTRAL4 = "central-4th-order"

# (offset in steps, weight); derivative = sum(weight * f(x + offset*h)) / h
_STENCILS = {
    CENTRAL2: ((1.0, 0.5), (-1.0, -0.5)),
    CENTRAL4: ((-2.0, 1.0 / 12), (-1.0, -8.0 / 12), (1.0, 8.0 / 12), (2.0, -1.0 / 12)),
}
_ORDER = {CENTRAL2: 2, CENTRAL4: 4}


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference settings.

    ``step=None`` means ``1e-5 * max(1, |x|_inf)`` at the evaluation point.
    """

    step: float | None = None
    scheme: str = CENTRAL2
    richardson: bool = False

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise ValueError("finite-difference step must be positive")
        if self.scheme not in _STENCILS:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def step_at(self, x: np.ndarray) -> float:
        if self.step is not None:
            return self.step
        return 1e-5 * max(1.0, float(np.max(np.abs(x))))

    def nested(self) -> FDConfig:
        """Settings for differentiating a field that is itself a derivative."""
        base = 1e-5 if self.step is None else self.step
        return FDConfig(step=100 * base, scheme=CENTRAL4, richardson=self.richardson)


DEFAULT_FD = FDConfig()


def _evaluate(field: Callable, x: np.ndarray):
    val = field(x)
    arr = np.asarray(val.entries if isinstance(val, TensorValue) else val, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite field value at {x.tolist()}")
    return val, arr


def _partial(field, x, j, h, scheme, domain):
    acc = None
    for offset, weight in _STENCILS[scheme]:
        pt = x.copy()
        pt[j] += offset * h
        if domain is not None and not domain.contains(pt):
            raise DomainError(f"stencil point {pt.tolist()} leaves the chart domain")
        _, arr = _evaluate(field, pt)
        acc = weight * arr if acc is None else acc + weight * arr
    return acc / h


def fd_derivative(field: Callable, x: Sequence[float], cfg: FDConfig | None = None, domain=None):
    """Partial derivatives of a point-evaluated field, derivative slot appended last.

    ``field`` may return an ndarray or a :class:`TensorValue`; the result has the
    same kind (a TensorValue gains a trailing lower slot).  ``domain`` is any
    object with a ``contains(point)`` method; stencil points outside it raise
    :class:`DomainError`.
    """
    cfg = cfg or DEFAULT_FD
    x = np.array(x, dtype=float)
    val, _ = _evaluate(field, x)
    h = cfg.step_at(x)
    parts = []
    for j in range(x.size):
        d = _partial(field, x, j, h, cfg.scheme, domain)
        if cfg.richardson:
            d_half = _partial(field, x, j, h / 2, cfg.scheme, domain)
            p = 2 ** _ORDER[cfg.scheme]
            d = (p * d_half - d) / (p - 1)
        parts.append(d)
    out = np.stack(parts, axis=-1)
    if isinstance(val, TensorValue):
        return TensorValue(out, val.signature + (LOWER,))
    return out
