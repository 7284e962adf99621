"""Structure constants of a flat parallelism, the algebraic bracket, the
Killing form, derived/lower-central series and classification.

Structure constants are stored as ``c[k, i, j] = c^k_{ij}`` in the frame
basis, so ``[e_i, e_j] = c^k_{ij} e_k``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .connections import default_flat_tol, integrability, is_flat
from .curvature import primary_curvature, ricci_S
from .errors import NotFlatError
from .frame import FrameProvider, evaluate_frame
from .tensor import FDConfig

RANK_TOL = 1e-8
KILLING_TOL = 1e-8


@dataclass(frozen=True)
class StructureConstants:
    c: np.ndarray
    base_point: np.ndarray | None = None
    constancy_residual: float = 0.0

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise ValueError(f"structure constants must be n x n x n, got {c.shape}")
        # exact antisymmetry in the lower pair
        c = 0.5 * (c - c.transpose(0, 2, 1))
        c.flags.writeable = False
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def bracket(self, u, v) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.c, u, v)

    def ad(self, u) -> np.ndarray:
        """Matrix of ``v -> [u, v]``."""
        return np.einsum("kij,i->kj", self.c, u)

    @property
    def jacobi_residual(self) -> float:
        c = self.c
        J = np.einsum("aij,mak->mijk", c, c)
        cyc = J + J.transpose(0, 2, 3, 1) + J.transpose(0, 3, 1, 2)
        return float(np.max(np.abs(cyc))) if cyc.size else 0.0


def frame_components(p: FrameProvider, x, cfg: FDConfig | None = None) -> np.ndarray:
    """``w~^k_c I^c_{ab} w^a_i w^b_j`` at ``x``."""
    f = evaluate_frame(p, x)
    I = integrability(p, x, cfg).entries
    return np.einsum("kc,cab,ai,bj->kij", f.w_inv, I, f.w, f.w)


def structure_constants(p: FrameProvider, base, validation: Sequence = (), tol: float | None = None,
                        cfg: FDConfig | None = None) -> StructureConstants:
    """Frame-basis structure constants of a flat frame, checked for constancy.

    Raises :class:`NotFlatError` if the frame is not flat at ``tol`` over the
    base and validation points, or if the constants drift by more than ``tol``.
    """
    tol = default_flat_tol(p) if tol is None else tol
    base = np.asarray(base, dtype=float)
    points = [base] + [np.asarray(v, dtype=float) for v in validation]
    flat = is_flat(p, points, tol, cfg)
    if not flat:
        raise NotFlatError(f"frame {p.name!r} is not flat (linear curvature {flat.max_residual:.3g} > {tol:g})")
    c0 = frame_components(p, base, cfg)
    drift = max((float(np.max(np.abs(frame_components(p, v, cfg) - c0))) for v in points[1:]), default=0.0)
    if drift > tol:
        raise NotFlatError(f"structure constants of {p.name!r} drift by {drift:.3g} > {tol:g}")
    return StructureConstants(c0, base, drift)


def algebraic_bracket(p: FrameProvider, x, xi, eta, cfg: FDConfig | None = None) -> np.ndarray:
    """``{xi, eta}^i = I^i_{ab} xi^a eta^b`` in coordinates at ``x``."""
    I = integrability(p, x, cfg).entries
    return np.einsum("iab,a,b->i", I, np.asarray(xi, dtype=float), np.asarray(eta, dtype=float))


def killing_form(c: StructureConstants) -> np.ndarray:
    """``k_ij = c^b_{ai} c^a_{bj}`` = trace(ad e_i o ad e_j)."""
    k = np.einsum("bai,abj->ij", c.c, c.c)
    return 0.5 * (k + k.T)


def _span(vectors: np.ndarray, n: int, tol: float) -> np.ndarray:
    """Orthonormal basis (columns) of the span of the given column vectors."""
    if vectors.size == 0:
        return np.zeros((n, 0))
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    return u[:, : int(np.sum(s > tol))]


def _bracket_span(c: StructureConstants, A: np.ndarray, B: np.ndarray, tol: float) -> np.ndarray:
    n = c.dim
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros((n, 0))
    vecs = np.einsum("kij,ia,jb->kab", c.c, A, B).reshape(n, -1)
    return _span(vecs, n, tol)


@dataclass(frozen=True)
class Series:
    derived: list[int]
    lower_central: list[int]


def derived_and_central_series(c: StructureConstants, tol: float = RANK_TOL) -> Series:
    """Dimensions of the derived and lower central series, cut where they stabilize."""
    n = c.dim
    full = np.eye(n)

    def run(step):
        dims = [n]
        cur = full
        while dims[-1] > 0:
            nxt = step(cur)
            if nxt.shape[1] == dims[-1]:
                break
            dims.append(nxt.shape[1])
            cur = nxt
        return dims

    return Series(
        derived=run(lambda V: _bracket_span(c, V, V, tol)),
        lower_central=run(lambda V: _bracket_span(c, V, full, tol)),
    )


@dataclass(frozen=True)
class Classification:
    abelian: bool
    two_step_nilpotent: bool
    nilpotent: bool
    solvable: bool
    semisimple: bool
    nilpotency_class: int | None
    derived_length: int | None
    killing_rank: int
    killing_signature: dict = field(default_factory=dict)
    derived: list[int] = field(default_factory=list)
    lower_central: list[int] = field(default_factory=list)

    def summary(self) -> str:
        if self.abelian:
            return "abelian"
        if self.two_step_nilpotent:
            return "2-step nilpotent"
        if self.nilpotent:
            return f"nilpotent (class {self.nilpotency_class})"
        if self.solvable:
            return "solvable, not nilpotent"
        if self.semisimple:
            return "semisimple"
        return "neither solvable nor semisimple"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["summary"] = self.summary()
        return d


def classify(c: StructureConstants, rank_tol: float = RANK_TOL, killing_tol: float = KILLING_TOL) -> Classification:
    series = derived_and_central_series(c, rank_tol)
    n = c.dim
    nilpotent = series.lower_central[-1] == 0
    solvable = series.derived[-1] == 0
    eig = np.linalg.eigvalsh(killing_form(c))
    rank = int(np.sum(np.abs(eig) > killing_tol))
    return Classification(
        abelian=series.derived[:2] == [n, 0],
        two_step_nilpotent=nilpotent and len(series.lower_central) <= 3,
        nilpotent=nilpotent,
        solvable=solvable,
        semisimple=rank == n,
        nilpotency_class=len(series.lower_central) - 1 if nilpotent else None,
        derived_length=len(series.derived) - 1 if solvable else None,
        killing_rank=rank,
        killing_signature={
            "positive": int(np.sum(eig > killing_tol)),
            "negative": int(np.sum(eig < -killing_tol)),
            "zero": int(np.sum(np.abs(eig) <= killing_tol)),
        },
        derived=series.derived,
        lower_central=series.lower_central,
    )


@dataclass
class ClassificationCheck:
    frame: str
    classification: Classification
    structure: StructureConstants
    primary_norm: float
    ricci_norm: float
    ricci_det: float
    killing_vs_ricci: float
    clauses: list[dict] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return all(cl["consistent"] for cl in self.clauses)

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "classification": self.classification.to_dict(),
            "structure_constants": self.structure.c.tolist(),
            "constancy_residual": self.structure.constancy_residual,
            "jacobi_residual": self.structure.jacobi_residual,
            "primary_norm": self.primary_norm,
            "ricci_norm": self.ricci_norm,
            "ricci_det": self.ricci_det,
            "killing_vs_ricci": self.killing_vs_ricci,
            "clauses": self.clauses,
            "consistent": self.consistent,
        }


def classification_check(p: FrameProvider, samples: Sequence, tol: float = 1e-6,
                       det_threshold: float = KILLING_TOL, cfg: FDConfig | None = None,
                       flat_tol: float | None = None, rank_tol: float = RANK_TOL) -> ClassificationCheck:
    """Cross-check the classification against the curvature side.

    Clauses: vanishing primary curvature iff 2-step nilpotent; nilpotent
    implies vanishing Ricci; semisimple iff Ricci nondegenerate; and the
    frame-component Ricci equals the Killing form.
    """
    samples = [np.asarray(x, dtype=float) for x in samples]
    c = structure_constants(p, samples[0], samples[1:], flat_tol, cfg)
    cls = classify(c, rank_tol=rank_tol, killing_tol=det_threshold)
    kill = killing_form(c)

    s_norm = max(primary_curvature(p, x, cfg).S_up.norm_inf() for x in samples)
    ric_frames = []
    for x in samples:
        w = evaluate_frame(p, x).w
        ric_frames.append(np.einsum("ij,ia,jb->ab", ricci_S(p, x, cfg).entries, w, w))
    ric_norm = max(float(np.max(np.abs(r))) for r in ric_frames)
    ric_det = float(np.linalg.det(ric_frames[0]))
    kv = max(float(np.max(np.abs(r - kill))) for r in ric_frames)

    clauses = [
        {"clause": "primary curvature vanishes iff 2-step nilpotent",
         "lhs": s_norm <= tol, "rhs": cls.two_step_nilpotent,
         "consistent": (s_norm <= tol) == cls.two_step_nilpotent},
        {"clause": "nilpotent implies Ricci vanishes",
         "lhs": cls.nilpotent, "rhs": ric_norm <= tol,
         "consistent": (not cls.nilpotent) or ric_norm <= tol},
        {"clause": "semisimple iff Ricci nondegenerate",
         "lhs": cls.semisimple, "rhs": abs(ric_det) > det_threshold,
         "consistent": cls.semisimple == (abs(ric_det) > det_threshold)},
        {"clause": "Ricci in frame components equals Killing form",
         "lhs": kv, "rhs": tol, "consistent": kv <= tol},
    ]
    return ClassificationCheck(p.name, cls, c, s_norm, ric_norm, ric_det, kv, clauses)
