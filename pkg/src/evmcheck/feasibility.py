"""Joint PSD feasibility of an EVM family and its block partial transpose.

The decision problem is the convex program

    minimize t  subject to  chi(p) + t I >= 0,  chi^{T_A}(p) + t I >= 0

over the free parameters p.  Hermitian blocks are embedded as real symmetric
matrices and handed to cvxopt's conic solver.  Every verdict is re-checked
here: a separable-compatible verdict needs a witness whose eigenvalues pass
:func:`min_eigen`, and an entangled (or unphysical) verdict needs a dual
point whose objective and residual we recompute ourselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from cvxopt import matrix, solvers

from .evm import EvmTemplate, block_partial_transpose, build_evm
from .records import MeasurementRecord

ENTANGLED = "entangled"
SEPARABLE = "separable-compatible"
UNPHYSICAL = "unphysical-data"
UNDECIDED = "undecided"
LOW_SIDE = (ENTANGLED, UNPHYSICAL)


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-7
    max_iterations: int = 5000
    restarts: int = 8
    seed: int = 0
    rescale: bool = True
    # parameter box in rescaled units, keeps free diagonals bounded
    box: float = 1e4
    dual_residual_tol: float = 1e-8

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class AffineMatrixFamily:
    members: tuple[EvmTemplate, ...]

    @classmethod
    def from_template(cls, template: EvmTemplate, with_transpose: bool = True):
        if with_transpose:
            return cls((template, block_partial_transpose(template)))
        return cls((template,))

    @property
    def n_params(self) -> int:
        return self.members[0].n_params


@dataclass
class FeasibilityVerdict:
    status: str
    margin: float
    witness_params: np.ndarray | None = None
    lower_bound: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "margin": float(self.margin),
            "witness_params": None if self.witness_params is None else [float(v) for v in self.witness_params],
            "diagnostics": {k: [float(x) for x in v] for k, v in self.diagnostics.items()},
        }


def min_eigen(M: np.ndarray, herm_tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector of a Hermitian matrix."""
    M = np.asarray(M)
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if np.abs(M - M.conj().T).max(initial=0.0) > herm_tol * scale:
        raise ValueError("matrix is not Hermitian")
    w, V = np.linalg.eigh(M)
    return float(w[0]), V[:, 0]


def real_embedding(H: np.ndarray) -> np.ndarray:
    """[[Re, -Im], [Im, Re]]; PSD iff H is, with doubled spectrum."""
    re, im = H.real, H.imag
    return np.block([[re, -im], [im, re]])


def congruence_scaling(template: EvmTemplate) -> np.ndarray:
    """Diagonal D with D_kk = 1/sqrt(max(ref_kk, 1)).

    ref is the known diagonal; free diagonal entries use the smallest value
    the Cauchy-Schwarz bound allows given the known row entries.
    """
    fixed = template.fixed
    diag = np.real(np.diag(fixed)).copy()
    free = template.free_diagonal()
    for k in np.flatnonzero(free):
        best = 0.0
        for j in range(template.dim):
            if j != k and not free[j] and diag[j] > 0:
                best = max(best, abs(fixed[j, k]) ** 2 / diag[j])
        diag[k] = best
    return 1.0 / np.sqrt(np.maximum(diag, 1.0))


@dataclass
class _Solution:
    t: float
    params: np.ndarray
    lower_bound: float
    dual_residual: float
    status: str


def _solve_min_shift(members: Sequence[EvmTemplate], D: np.ndarray, config: SolverConfig) -> _Solution:
    k = members[0].n_params
    nvar = k + 1
    Gs, hs = [], []
    scaled_basis = []
    for tpl in members:
        F0 = D[:, None] * tpl.fixed * D[None, :]
        Bs = D[None, :, None] * tpl.basis * D[None, None, :]
        scaled_basis.append((F0, Bs))
        m = 2 * tpl.dim
        G = np.empty((m * m, nvar))
        for i in range(k):
            G[:, i] = -real_embedding(Bs[i]).reshape(-1, order="F")
        G[:, k] = -np.eye(m).reshape(-1, order="F")
        Gs.append(matrix(G))
        hs.append(matrix(real_embedding(F0)))
    c = np.zeros(nvar)
    c[k] = 1.0
    kwargs = {}
    if k:
        pscale = np.array([np.abs(Bs[i]).max() for i in range(k)])
        Gl = np.zeros((2 * k, nvar))
        Gl[:k, :k] = np.diag(pscale)
        Gl[k:, :k] = -np.diag(pscale)
        kwargs = dict(Gl=matrix(Gl), hl=matrix(np.full(2 * k, config.box)))
    opts = {
        "show_progress": False,
        "abstol": 1e-9,
        "reltol": 1e-9,
        "feastol": 1e-9,
        "maxiters": int(min(config.max_iterations, 200)),
    }
    try:
        sol = solvers.sdp(matrix(c), Gs=Gs, hs=hs, options=opts, **kwargs)
    except (ValueError, ArithmeticError) as exc:
        return _Solution(np.inf, np.zeros(k), -np.inf, np.inf, f"solver failure: {exc}")
    if sol["x"] is None:
        return _Solution(np.inf, np.zeros(k), -np.inf, np.inf, sol["status"])
    x = np.array(sol["x"]).reshape(-1)
    params = x[:k]

    # primal value recomputed from eigenvalues
    t_val = -min(min_eigen(F0 + np.tensordot(params, Bs, axes=1))[0] for F0, Bs in scaled_basis) if k else \
        -min(min_eigen(F0)[0] for F0, _ in scaled_basis)

    # dual point: project onto PSD cone and normalize its trace
    lower, resid = -np.inf, np.inf
    if sol["zs"] is not None:
        Zs = []
        for z in sol["zs"]:
            Z = np.array(z)
            Z = 0.5 * (Z + Z.T)
            w, V = np.linalg.eigh(Z)
            Zs.append((V * np.clip(w, 0.0, None)) @ V.T)
        total = sum(np.trace(Z) for Z in Zs)
        if total > 0:
            Zs = [Z / total for Z in Zs]
            obj = 0.0
            g = np.zeros(k)
            for Z, (F0, Bs) in zip(Zs, scaled_basis):
                obj -= np.sum(Z * real_embedding(F0))
                for i in range(k):
                    g[i] += np.sum(Z * real_embedding(Bs[i]))
            lower = float(obj)
            resid = float(np.abs(g).max(initial=0.0))
    return _Solution(float(t_val), params, lower, resid, sol["status"])


def _diagnostics(template: EvmTemplate, params) -> dict:
    chi = template.evaluate(params)
    pt = block_partial_transpose(template).evaluate(params)
    return {"eig_chi": np.linalg.eigvalsh(chi), "eig_chi_pt": np.linalg.eigvalsh(pt)}


def solve_feasibility(family: AffineMatrixFamily, config: SolverConfig = SolverConfig()) -> FeasibilityVerdict:
    """Decide whether every member can be made PSD with one parameter vector.

    Returns ``separable-compatible`` (a witness exists within tolerance),
    ``entangled`` (a dual certificate shows the optimal shift exceeds the
    tolerance) or ``undecided``.  Infeasibility of the EVM alone is a matter
    for :func:`decide`, which maps it to ``unphysical-data``.
    """
    base = family.members[0]
    D = congruence_scaling(base) if config.rescale else np.ones(base.dim)
    sol = _solve_min_shift(family.members, D, config)
    tol = config.tolerance
    diag = {}
    if np.isfinite(sol.t):
        diag = _diagnostics(base, sol.params)
    if sol.t <= tol:
        return FeasibilityVerdict(SEPARABLE, sol.t, sol.params, sol.lower_bound, diag)
    if sol.lower_bound > tol and sol.dual_residual <= config.dual_residual_tol:
        return FeasibilityVerdict(ENTANGLED, sol.t, None, sol.lower_bound, diag)
    return FeasibilityVerdict(UNDECIDED, sol.t, None, sol.lower_bound, diag)


def decide(template: EvmTemplate, config: SolverConfig = SolverConfig()) -> FeasibilityVerdict:
    """Full verdict: unphysical-data if the EVM alone cannot be PSD."""
    alone = solve_feasibility(AffineMatrixFamily.from_template(template, with_transpose=False), config)
    if alone.status == ENTANGLED:
        alone.status = UNPHYSICAL
        return alone
    if alone.status == UNDECIDED:
        return alone
    return solve_feasibility(AffineMatrixFamily.from_template(template), config)


def verdict_for_record(record: MeasurementRecord, config: SolverConfig = SolverConfig()) -> FeasibilityVerdict:
    return decide(build_evm(record), config)


def witness_min_eigs(template: EvmTemplate, params, config: SolverConfig = SolverConfig()) -> tuple[float, float]:
    """Min eigenvalues of the rescaled EVM and its transpose at ``params``."""
    D = congruence_scaling(template) if config.rescale else np.ones(template.dim)
    out = []
    for tpl in (template, block_partial_transpose(template)):
        M = tpl.evaluate(params)
        out.append(min_eigen(D[:, None] * M * D[None, :])[0])
    return out[0], out[1]


class BoundaryError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundaryResult:
    variance: float
    verdict_low: str
    verdict_high: str
    iterations: int


def boundary_search(
    record_generator: Callable[[float], MeasurementRecord],
    v_low: float,
    v_high: float,
    config: SolverConfig = SolverConfig(),
    abs_width: float | None = 1e-5,
    rel_width: float | None = None,
) -> BoundaryResult:
    """Bisect the variance separating low-side verdicts from separable ones.

    The low end must give ``entangled`` or ``unphysical-data`` and the high
    end ``separable-compatible``.  Undecided verdicts abort the search.
    """

    def classify(v):
        verdict = verdict_for_record(record_generator(v), config)
        if verdict.status == UNDECIDED:
            raise BoundaryError(f"undecided verdict at variance {v!r} (margin {verdict.margin:.3g})")
        return verdict.status

    lo_status, hi_status = classify(v_low), classify(v_high)
    if lo_status not in LOW_SIDE or hi_status != SEPARABLE:
        raise BoundaryError(
            f"endpoints not bracketing: verdict({v_low})={lo_status}, verdict({v_high})={hi_status}"
        )
    lo, hi = v_low, v_high
    last_low = lo_status
    it = 0
    while True:
        width = hi - lo
        if abs_width is not None and width <= abs_width:
            break
        if rel_width is not None and width <= rel_width * abs(hi):
            break
        mid = 0.5 * (lo + hi)
        st = classify(mid)
        it += 1
        if st == SEPARABLE:
            hi = mid
        else:
            lo, last_low = mid, st
    return BoundaryResult(0.5 * (lo + hi), last_low, SEPARABLE, it)
