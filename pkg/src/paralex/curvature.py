"""Primary curvature and its contractions, the identity suite, the Levi-Civita
pipeline of the canonical metric, and the decomposition report.

Storage: ``S_up[i, k, j, r] = S^i_{kj,r} = I^a_{kj} I^i_{ar}`` and
``S_low[k, j, r, i] = S^a_{kj,r} g_{ai}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .connections import default_flat_tol, integrability, linear_curvature, metric_field, nabla
from .frame import FrameProvider, canonical_metric, evaluate_frame, metric_derivative
from .tensor import CENTRAL4, LOWER, UPPER, FDConfig, TensorValue, fd_derivative


@dataclass(frozen=True)
class PrimaryCurvature:
    S_up: TensorValue
    S_low: TensorValue


def _primary(I: np.ndarray) -> np.ndarray:
    return np.einsum("akj,iar->ikjr", I, I)


def primary_curvature(p: FrameProvider, x, cfg: FDConfig | None = None) -> PrimaryCurvature:
    I = integrability(p, x, cfg).entries
    g, _ = canonical_metric(p, x)
    S = _primary(I)
    S_low = np.einsum("akjr,ai->kjri", S, g.entries)
    return PrimaryCurvature(TensorValue(S, (UPPER, LOWER, LOWER, LOWER)),
                            TensorValue(S_low, (LOWER,) * 4))


def ricci_S(p: FrameProvider, x, cfg: FDConfig | None = None) -> TensorValue:
    """``Ric_kj = S^a_{ak,j}``."""
    S = primary_curvature(p, x, cfg).S_up.entries
    return TensorValue(np.einsum("aakj->kj", S), (LOWER, LOWER))


def scalar_K(p: FrameProvider, x, cfg: FDConfig | None = None) -> float:
    _, ginv = canonical_metric(p, x)
    return float(np.einsum("ba,ab->", ricci_S(p, x, cfg).entries, ginv.entries))


def _sectional_matrix(S_low: np.ndarray, w: np.ndarray) -> np.ndarray:
    return -np.einsum("abcd,ak,bl,ck,dl->kl", S_low, w, w, w, w)


def sectional_matrix(p: FrameProvider, x, cfg: FDConfig | None = None) -> np.ndarray:
    """``S_kl`` for every pair of frame fields (diagonal is zero)."""
    S_low = primary_curvature(p, x, cfg).S_low.entries
    return _sectional_matrix(S_low, evaluate_frame(p, x).w)


def sectional(p: FrameProvider, x, k: int, l: int, cfg: FDConfig | None = None) -> float:
    """Sectional curvature of the plane of frame fields ``k`` and ``l`` (1-based labels)."""
    if k == l or not (1 <= k <= p.dim and 1 <= l <= p.dim):
        raise ValueError(f"need two distinct frame labels in 1..{p.dim}, got {k}, {l}")
    return float(sectional_matrix(p, x, cfg)[k - 1, l - 1])


# --- identity suite ----------------------------------------------------------

@dataclass
class PointData:
    """Everything the identity checks need at one chart point."""

    x: np.ndarray
    w: np.ndarray
    w_inv: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    I: np.ndarray
    F: np.ndarray
    S: np.ndarray
    S_low: np.ndarray
    ric: np.ndarray
    K: float
    sect: np.ndarray

    @property
    def S_frame(self) -> np.ndarray:
        """Primary curvature in the orthonormal frame basis, slots ``[c; a, b, d]``."""
        w, wi = self.w, self.w_inv
        return np.einsum("ci,ikjr,ka,jb,rd->cabd", wi, self.S, w, w, w)


def point_data(p: FrameProvider, x, cfg: FDConfig | None = None) -> PointData:
    x = np.asarray(x, dtype=float)
    f = evaluate_frame(p, x)
    g, ginv = canonical_metric(p, x)
    I = integrability(p, x, cfg).entries
    S = _primary(I)
    S_low = np.einsum("akjr,ai->kjri", S, g.entries)
    ric = np.einsum("aakj->kj", S)
    return PointData(
        x=x, w=f.w, w_inv=f.w_inv, g=g.entries, ginv=ginv.entries, I=I,
        F=linear_curvature(p, x, cfg).entries, S=S, S_low=S_low, ric=ric,
        K=float(np.einsum("ba,ab->", ric, ginv.entries)),
        sect=_sectional_matrix(S_low, f.w),
    )


def _cyc(T: np.ndarray) -> np.ndarray:
    """Cyclic sum over slots 1, 2, 3 of ``T[i, k, j, r]``: T_kj,r + T_jr,k + T_rk,j."""
    return T + T.transpose(0, 2, 3, 1) + T.transpose(0, 3, 1, 2)


def _max(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def ricci_commutator_residual(p: FrameProvider, x, cfg: FDConfig | None = None) -> float:
    """Max of ``|(nabla_s nabla_r - nabla_r nabla_s) g_ij + T^a_{sr} nabla_a g_ij|``."""
    cfg = cfg or FDConfig()
    gfield, dg = metric_field(p)

    def grad_g(y):
        return nabla(p, gfield, y, derivative=dg)  # [i, j, r]

    H = grad_g(x).entries
    NN = nabla(p, grad_g, x, cfg=cfg.nested()).entries  # [i, j, r, s] = nabla_s nabla_r g_ij
    comm = NN.transpose(0, 1, 3, 2) - NN  # [i, j, s, r]
    I = integrability(p, x, cfg).entries
    return _max(comm + np.einsum("asr,ija->ijsr", I, H))


@dataclass(frozen=True)
class Identity:
    id: str
    formula: str
    flat_only: bool
    tol: float
    residual: Callable[[PointData], float]


def _lowered_first_pair(d: PointData) -> float:
    return _max(d.S_low + d.S_low.transpose(1, 0, 2, 3))


IDENTITIES: tuple[Identity, ...] = (
    Identity("bianchi_first", "F^i_kj,r + F^i_jr,k + F^i_rk,j = cyc I^a_kj I^i_ar", False, 1e-5,
             lambda d: _max(_cyc(d.F) - _cyc(d.S))),
    Identity("primary_first_pair_antisym", "S^i_kj,r = -S^i_jk,r", False, 0.0,
             lambda d: _max(d.S + d.S.transpose(0, 2, 1, 3))),
    Identity("primary_lowered_first_pair_antisym", "S_ij,kr = -S_ji,kr", True, 1e-7, _lowered_first_pair),
    Identity("primary_cyclic", "S^i_kj,r + S^i_jr,k + S^i_rk,j = 0", True, 1e-7,
             lambda d: _max(_cyc(d.S))),
    Identity("primary_last_pair_antisym", "S_kj,ri = -S_kj,ir", True, 1e-7,
             lambda d: _max(d.S_low + d.S_low.transpose(0, 1, 3, 2))),
    Identity("ricci_commutator", "[nabla_s, nabla_r] g_ij = -T^a_sr nabla_a g_ij", True, 1e-5, None),
    Identity("pair_exchange", "S_ij,kr = S_kr,ij", True, 1e-7,
             lambda d: _max(d.S_low - d.S_low.transpose(2, 3, 0, 1))),
    Identity("raised_antisym_frame", "S^r_ij,k = -S^k_ij,r (orthonormal frame components)", True, 1e-7,
             lambda d: _max(d.S_frame + d.S_frame.transpose(3, 1, 2, 0))),
    Identity("trace_free", "S^a_ij,a = 0", True, 1e-9,
             lambda d: _max(np.einsum("aija->ij", d.S))),
    Identity("ricci_symmetric", "S^a_ak,j = S^a_aj,k", True, 1e-9,
             lambda d: _max(d.ric - d.ric.T)),
    Identity("torsion_quadratic_skew", "T^b_sm T^a_bi g_aj = -T^b_sm T^a_bj g_ai", True, 1e-7,
             lambda d: _max(np.einsum("bsm,abi,aj->smij", d.I, d.I, d.g)
                            + np.einsum("bsm,abj,ai->smij", d.I, d.I, d.g))),
    Identity("sectional_row_sums", "sum_l S_kl = Ric_ab w_k^a w_k^b", True, 1e-8,
             lambda d: _max(d.sect.sum(axis=1) - np.einsum("ab,ak,bk->k", d.ric, d.w, d.w))),
    Identity("sectional_total", "sum_kl S_kl = K", True, 1e-8,
             lambda d: abs(float(d.sect.sum()) - d.K)),
)


@dataclass(frozen=True)
class IdentityRecord:
    id: str
    formula: str
    residual: float | None
    tol: float
    status: str  # "pass", "fail" or "skipped (not flat)"

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass
class IdentityReport:
    frame: str
    samples: int
    flat: bool
    flat_residual: float
    flat_tol: float
    records: list[IdentityRecord] = field(default_factory=list)
    bi_invariant: bool = False
    bi_invariance_residual: float = 0.0

    @property
    def all_passed(self) -> bool:
        return all(r.status != "fail" for r in self.records)

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "samples": self.samples,
            "flat": self.flat,
            "flat_residual": self.flat_residual,
            "flat_tol": self.flat_tol,
            "bi_invariant": "yes" if self.bi_invariant else "no",
            "bi_invariance_residual": self.bi_invariance_residual,
            "all_passed": self.all_passed,
            "records": [
                {"id": r.id, "formula": r.formula, "residual": r.residual, "tol": r.tol, "status": r.status}
                for r in self.records
            ],
        }


def bi_invariance_residual(d: PointData) -> float:
    """Max of ``|T^a_ri g_aj + T^a_rj g_ai|``; zero iff both derivatives kill g."""
    return _max(np.einsum("ari,aj->rij", d.I, d.g) + np.einsum("arj,ai->rij", d.I, d.g))


def identity_suite(p: FrameProvider, samples: Sequence, tol: float | None = None,
                   cfg: FDConfig | None = None, flat_tol: float | None = None,
                   mapper: Callable = map, bi_invariance_tol: float = 1e-7) -> IdentityReport:
    """Evaluate every identity over the sample points.

    ``tol`` overrides every per-identity tolerance when given.  Flat-only
    identities are skipped unless the frame passes :func:`is_flat`.
    ``mapper`` lets callers fan the per-point work out (it must preserve order).
    """
    samples = [np.asarray(x, dtype=float) for x in samples]
    flat_tol = default_flat_tol(p) if flat_tol is None else flat_tol
    data = list(mapper(lambda x: point_data(p, x, cfg), samples))
    worst_F = max(_max(d.F) for d in data)
    flat = worst_F <= flat_tol
    report = IdentityReport(p.name, len(samples), flat, worst_F, flat_tol)

    for ident in IDENTITIES:
        limit = ident.tol if tol is None else tol
        if ident.flat_only and not flat:
            report.records.append(IdentityRecord(ident.id, ident.formula, None, limit, "skipped (not flat)"))
            continue
        if ident.id == "ricci_commutator":
            res = max(mapper(lambda x: ricci_commutator_residual(p, x, cfg), samples))
        else:
            res = max(ident.residual(d) for d in data)
        report.records.append(IdentityRecord(ident.id, ident.formula, res, limit,
                                             "pass" if res <= limit else "fail"))

    if flat:
        consts = [d.sect for d in data]
        res = max(_max(s - consts[0]) for s in consts)
        res = max(res, max(abs(d.K - data[0].K) for d in data))
        limit = 1e-6 if tol is None else tol
        report.records.append(IdentityRecord("sectional_constancy", "S_kl(p) = S_kl(q), K(p) = K(q)",
                                             res, limit, "pass" if res <= limit else "fail"))
    else:
        report.records.append(IdentityRecord("sectional_constancy", "S_kl(p) = S_kl(q), K(p) = K(q)",
                                             None, 1e-6 if tol is None else tol, "skipped (not flat)"))

    report.bi_invariance_residual = max(bi_invariance_residual(d) for d in data)
    report.bi_invariant = report.bi_invariance_residual <= bi_invariance_tol
    return report


# --- Levi-Civita pipeline --------------------------------------------------------

RIEMANN_FD = FDConfig(step=1e-3, scheme=CENTRAL4)


def christoffel(p: FrameProvider, x, cfg: FDConfig | None = None) -> np.ndarray:
    """Christoffel symbols ``C[i, j, k]`` of the canonical metric."""
    g, ginv = canonical_metric(p, x)
    dg = metric_derivative(p, x, cfg or RIEMANN_FD)  # [l, k, j] = d_j g_lk
    lower = dg.transpose(0, 2, 1) + dg - dg.transpose(2, 1, 0)  # [l, j, k]
    return 0.5 * np.einsum("il,ljk->ijk", ginv.entries, lower)


@dataclass(frozen=True)
class LeviCivita:
    christoffel: np.ndarray
    riemann: TensorValue  # [i; j, k, l]
    compatibility_residual: float


def levi_civita(p: FrameProvider, x, cfg: FDConfig | None = None) -> LeviCivita:
    """Riemann tensor ``R^i_{jkl} = d_k C^i_lj - d_l C^i_kj + C^i_ka C^a_lj - C^i_la C^a_kj``."""
    x = np.asarray(x, dtype=float)
    inner = cfg if (cfg is not None and p.jac is None) else RIEMANN_FD
    C = christoffel(p, x, inner)
    dC = fd_derivative(lambda y: christoffel(p, y, inner), x, RIEMANN_FD, domain=p.domain)  # [i, l, j, k]
    R = (np.einsum("iljk->ijkl", dC) - np.einsum("ikjl->ijkl", dC)
         + np.einsum("ika,alj->ijkl", C, C) - np.einsum("ila,akj->ijkl", C, C))
    g, _ = canonical_metric(p, x)
    dg = metric_derivative(p, x, inner)  # [i, j, k] = d_k g_ij
    compat = (dg - np.einsum("aki,aj->ijk", C, g.entries) - np.einsum("akj,ia->ijk", C, g.entries))
    return LeviCivita(C, TensorValue(R, (UPPER, LOWER, LOWER, LOWER)), _max(compat))


def riemann_sectional(p: FrameProvider, x, X, Y) -> float:
    """``g(R(X, Y) Y, X)`` for the canonical metric, normalized by the plane's area."""
    R = levi_civita(p, x).riemann.entries
    g, _ = canonical_metric(p, x)
    g = g.entries
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    num = np.einsum("im,ijkl,m,j,k,l->", g, R, X, Y, X, Y)
    area = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    return float(num / area)


# --- decomposition ----------------------------------------------------------------

@dataclass(frozen=True)
class Convention:
    sign: int
    perm: tuple[int, int, int]  # permutation of the three lower slots of F - S
    mode: str  # "mixed" or "lowered"

    def label(self) -> str:
        names = "kjr"
        return f"{'+' if self.sign > 0 else '-'}(F-S)[i;{','.join(names[q] for q in self.perm)}] {self.mode}"


CONVENTIONS = tuple(
    Convention(s, perm, mode)
    for mode in ("mixed", "lowered")
    for s in (1, -1)
    for perm in itertools.permutations(range(3))
)


@dataclass
class DecompositionReport:
    frame: str
    points: list[np.ndarray]
    best: Convention
    residuals: list[float]  # per point, under the best convention
    diff_norms: list[float]  # |F - S|_inf per point
    riemann_norms: list[float]  # |R_LC|_inf per point
    convention_residuals: dict[str, float]

    @property
    def worst_residual(self) -> float:
        return max(self.residuals)

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "best_convention": {"sign": self.best.sign, "lower_slots": ["kjr"[q] for q in self.best.perm],
                                "mode": self.best.mode, "label": self.best.label()},
            "points": [
                {"at": x.tolist(), "residual": r, "frakR_minus_S_norm": d, "R_LC_norm": rl}
                for x, r, d, rl in zip(self.points, self.residuals, self.diff_norms, self.riemann_norms)
            ],
            "worst_residual": self.worst_residual,
            "by_convention": self.convention_residuals,
        }


def _convention_residual(conv: Convention, D: np.ndarray, R: np.ndarray, g: np.ndarray) -> float:
    Dp = conv.sign * D.transpose((0,) + tuple(1 + q for q in conv.perm))
    if conv.mode == "lowered":
        return _max(np.einsum("ai,ajkl->ijkl", g, R - Dp))
    return _max(R - Dp)


def decomposition_report(p: FrameProvider, samples: Sequence, cfg: FDConfig | None = None,
                         mapper: Callable = map) -> DecompositionReport:
    """Compare ``F - S`` against the Riemann tensor of the canonical metric.

    Searches sign, lower-slot permutation and mixed/lowered comparison for
    the convention minimizing the worst residual; no verdict is attached.
    """
    samples = [np.asarray(x, dtype=float) for x in samples]

    def per_point(x):
        F = linear_curvature(p, x, cfg).entries
        S = _primary(integrability(p, x, cfg).entries)
        R = levi_civita(p, x).riemann.entries
        g = canonical_metric(p, x)[0].entries
        return F - S, R, g

    parts = list(mapper(per_point, samples))
    table = {}
    for conv in CONVENTIONS:
        table[conv] = [_convention_residual(conv, D, R, g) for D, R, g in parts]
    best = min(CONVENTIONS, key=lambda c: max(table[c]))
    return DecompositionReport(
        frame=p.name,
        points=samples,
        best=best,
        residuals=table[best],
        diff_norms=[_max(D) for D, _, _ in parts],
        riemann_norms=[_max(R) for _, R, _ in parts],
        convention_residuals={c.label(): max(v) for c, v in table.items()},
    )
