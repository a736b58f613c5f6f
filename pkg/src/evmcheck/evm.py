"""Expectation value matrices (EVMs) built from measurement records.

Alice's operator set is {|psi><0|, |psi><1|}, so the EVM has a 2x2 block
structure indexed by Alice's bit; Bob's set is {1, O_1, ..., O_k} for the
observables of the measurement mode.  Entries that the record does not pin
down become free real parameters, and the result is an affine family
``chi(p) = fixed + sum_k p_k basis[k]`` of Hermitian matrices.

All entries carry the overall factor 1/2 of the source state, so the (1,1)
entry of each diagonal block is 1/2 and that of the off-diagonal block is s/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .records import MeasurementRecord, RecordError

# (observables, commutators) per mode; commutators map ordered pairs to
# [(coefficient, operator)] with "1" the identity.
_QUAD_ALGEBRA = (("x", "p"), {("x", "p"): [(1j, "1")]})
ALGEBRAS = {
    "quadrature": _QUAD_ALGEBRA,
    "quadrature-heterodyne": _QUAD_ALGEBRA,
    "stokes-bare": (("S2", "S3"), {("S2", "S3"): [(2j, "S1")]}),
    "stokes-with-S1": (
        ("S1", "S2", "S3"),
        {
            ("S1", "S2"): [(2j, "S3")],
            ("S1", "S3"): [(-2j, "S2")],
            ("S2", "S3"): [(2j, "S1")],
        },
    ),
    "stokes-with-S0": (
        ("S0", "S2", "S3"),
        {("S0", "S2"): [], ("S0", "S3"): [], ("S2", "S3"): [(2j, "S1")]},
    ),
}

# generic label -> symbol used for the quadrature matrix in the literature
QUADRATURE_SYMBOLS = {
    "sym(x,p)|0": "a",
    "sym(x,p)|1": "b",
    "w(x)": "c",
    "w(p)": "d",
    "w(x*x)": "f",
    "w(x*p)": "g",
    "w(p*p)": "h",
}


@dataclass(frozen=True)
class EvmTemplate:
    dim: int
    fixed: np.ndarray
    basis: np.ndarray
    labels: tuple[str, ...]
    observables: tuple[str, ...] = ()
    overlap_s: float = 0.0
    mode: str = ""

    @property
    def n_params(self) -> int:
        return len(self.labels)

    @property
    def block(self) -> int:
        return self.dim // 2

    def evaluate(self, params=None) -> np.ndarray:
        if params is None or self.n_params == 0:
            return self.fixed.copy()
        p = np.asarray(params, dtype=float)
        if p.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {p.shape}")
        return self.fixed + np.tensordot(p, self.basis, axes=1)

    def free_diagonal(self) -> np.ndarray:
        """Boolean mask of diagonal positions touched by some free parameter."""
        if self.n_params == 0:
            return np.zeros(self.dim, dtype=bool)
        return np.any(np.abs(np.diagonal(self.basis, axis1=1, axis2=2)) > 0, axis=0)

    def literature_symbol(self, label: str) -> str:
        base, _, part = label.partition(".")
        sym = QUADRATURE_SYMBOLS.get(base, base) if self.mode.startswith("quadrature") else base
        return f"{sym}.{part}" if part else sym


# --- affine expressions ----------------------------------------------------

@dataclass
class _Lin:
    const: complex = 0.0
    coefs: dict = field(default_factory=dict)

    def __add__(self, other):
        other = other if isinstance(other, _Lin) else _Lin(other)
        coefs = dict(self.coefs)
        for k, v in other.coefs.items():
            coefs[k] = coefs.get(k, 0) + v
        return _Lin(self.const + other.const, coefs)

    def __sub__(self, other):
        other = other if isinstance(other, _Lin) else _Lin(other)
        return self + other * -1

    def __mul__(self, c):
        return _Lin(self.const * c, {k: v * c for k, v in self.coefs.items()})

    __rmul__ = __mul__


class _Builder:
    def __init__(self):
        self.labels: list[str] = []
        self._cache: dict[str, _Lin] = {}

    def real(self, label: str) -> _Lin:
        if label not in self._cache:
            self.labels.append(label)
            self._cache[label] = _Lin(0.0, {len(self.labels) - 1: 1.0})
        return self._cache[label]

    def complex(self, label: str) -> _Lin:
        if label not in self._cache:
            re = self.real(f"{label}.re")
            im = self.real(f"{label}.im")
            self._cache[label] = re + im * 1j
        return self._cache[label]


def build_evm(record: MeasurementRecord) -> EvmTemplate:
    """EVM template for any measurement mode."""
    obs, comm = ALGEBRAS[record.mode]
    ops = ("1",) + obs
    n = len(ops)
    dim = 2 * n
    bld = _Builder()
    s = record.overlap_s
    upper: dict[tuple[int, int], _Lin] = {}

    def mean(op, bit):
        if op == "1":
            return _Lin(1.0)
        v = record.first(op, bit)
        return _Lin(v) if v is not None else bld.real(f"<{op}>|{bit}")

    for bit in (0, 1):
        off = bit * n
        for j in range(n):
            for l in range(j, n):
                a, b = ops[j], ops[l]
                if a == "1":
                    e = mean(b, bit)
                elif j == l:
                    v = record.second(a, bit)
                    e = _Lin(v) if v is not None else bld.real(f"<{a}^2>|{bit}")
                else:
                    v = record.sym_product(a, b, bit)
                    sym = _Lin(v) if v is not None else bld.real(f"sym({a},{b})|{bit}")
                    c = _Lin(0.0)
                    for coef, X in comm[(a, b)]:
                        c = c + mean(X, bit) * coef
                    e = sym + c * 0.5
                upper[(off + j, off + l)] = e * 0.5

    # off-diagonal block <|0><1| (x) O_j O_l>
    def w_single(op):
        if op == "1":
            return _Lin(s)
        return bld.complex(f"w({op})")

    for j in range(n):
        for l in range(n):
            a, b = ops[j], ops[l]
            if a == "1" or b == "1":
                e = w_single(b if a == "1" else a)
            elif j == l:
                e = bld.complex(f"w({a}*{a})")
            elif j < l:
                e = bld.complex(f"w({a}*{b})")
            else:
                # O_b O_a with b < a: O_a O_b = O_b O_a + [O_a, O_b] ... use the stored order
                e = bld.complex(f"w({b}*{a})")
                for coef, X in comm[(b, a)]:
                    e = e - w_single(X) * coef
            upper[(j, n + l)] = e * 0.5

    k = len(bld.labels)
    fixed = np.zeros((dim, dim), dtype=complex)
    basis = np.zeros((k, dim, dim), dtype=complex)
    for (r, c), e in upper.items():
        if r == c:
            fixed[r, r] = np.real(e.const)
            for idx, v in e.coefs.items():
                basis[idx, r, r] += np.real(v)
        else:
            fixed[r, c] += e.const
            fixed[c, r] += np.conj(e.const)
            for idx, v in e.coefs.items():
                basis[idx, r, c] += v
                basis[idx, c, r] += np.conj(v)
    return EvmTemplate(dim, fixed, basis, tuple(bld.labels), obs, s, record.mode)


def build_quadrature_evm(record: MeasurementRecord) -> EvmTemplate:
    if record.mode not in ("quadrature", "quadrature-heterodyne"):
        raise RecordError(f"mode: quadrature EVM needs a quadrature record, got {record.mode}")
    return build_evm(record)


def build_stokes_evm(record: MeasurementRecord) -> EvmTemplate:
    if not record.mode.startswith("stokes"):
        raise RecordError(f"mode: Stokes EVM needs a Stokes record, got {record.mode}")
    return build_evm(record)


def swap_offdiagonal_blocks(M: np.ndarray) -> np.ndarray:
    n = M.shape[-1] // 2
    out = M.copy()
    out[..., :n, n:] = M[..., n:, :n]
    out[..., n:, :n] = M[..., :n, n:]
    return out


def block_partial_transpose(template: EvmTemplate) -> EvmTemplate:
    """EVM of the A-transposed state: the two off-diagonal blocks trade places."""
    if template.dim % 2:
        raise ValueError("template needs an even dimension")
    return EvmTemplate(
        template.dim,
        swap_offdiagonal_blocks(template.fixed),
        swap_offdiagonal_blocks(template.basis),
        template.labels,
        template.observables,
        template.overlap_s,
        template.mode,
    )


# --- direct evaluation on states -------------------------------------------

def evm_from_density(rho: np.ndarray, bob_ops: list[np.ndarray]) -> np.ndarray:
    """chi[(i,j),(k,l)] = Tr(rho |i><k| (x) B_j B_l) for a qubit (x) B state."""
    N = bob_ops[0].shape[0]
    R = rho.reshape(2, N, 2, N)
    n = len(bob_ops)
    chi = np.empty((2 * n, 2 * n), dtype=complex)
    for i in range(2):
        for k in range(2):
            # <k| rho |i> as an operator on B
            blk = R[k, :, i, :]
            for j, Bj in enumerate(bob_ops):
                for l, Bl in enumerate(bob_ops):
                    chi[i * n + j, k * n + l] = np.trace(blk @ Bj @ Bl)
    return chi


def evm_from_pure(branches: list[np.ndarray], bob_ops: list, weights=(0.5, 0.5)) -> np.ndarray:
    """EVM of sum_i sqrt(w_i) |i>|phi_i> for (possibly sparse) Bob operators.

    Tr(rho |i><k| (x) O) = sqrt(w_i w_k) <phi_i| O |phi_k>.
    """
    n = len(bob_ops)
    chi = np.empty((2 * n, 2 * n), dtype=complex)
    for i in range(2):
        for k in range(2):
            amp = np.sqrt(weights[i] * weights[k])
            for j, Bj in enumerate(bob_ops):
                left = Bj.conj().T @ branches[i]
                for l, Bl in enumerate(bob_ops):
                    chi[i * n + j, k * n + l] = amp * np.vdot(left, Bl @ branches[k])
    return chi


def fit_parameters(template: EvmTemplate, chi: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares parameters reproducing ``chi``; returns (params, max residual)."""
    target = (chi - template.fixed).reshape(-1)
    A = template.basis.reshape(template.n_params, -1).T
    A_ri = np.vstack([A.real, A.imag])
    b_ri = np.concatenate([target.real, target.imag])
    p, *_ = np.linalg.lstsq(A_ri, b_ri, rcond=None)
    resid = np.abs(template.evaluate(p) - chi).max()
    return p, float(resid)


# --- symmetric form and its equivalence with the PT conditions -------------

J_TILDE = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])


def reduced_alice(s: float) -> np.ndarray:
    return 0.5 * np.array([[1.0, s], [s, 1.0]])


def build_symmetric_evm(record: MeasurementRecord) -> tuple[EvmTemplate, np.ndarray]:
    """Symmetrized EVM chi_s and K = rho_A (x) J with chi = chi_s - (i/2) K.

    chi_s replaces x p and p x by their symmetrized product; the template
    shares the parameter vector of :func:`build_quadrature_evm`.
    """
    if record.mode not in ("quadrature", "quadrature-heterodyne"):
        raise RecordError(f"mode: symmetric EVM needs a quadrature record, got {record.mode}")
    chi = build_quadrature_evm(record)
    K = np.kron(reduced_alice(record.overlap_s), J_TILDE)
    sym = EvmTemplate(
        chi.dim, chi.fixed + 0.5j * K, chi.basis, chi.labels, chi.observables, chi.overlap_s, chi.mode
    )
    return sym, K


def bob_transpose(chi: np.ndarray, signs=(1, 1, -1)) -> np.ndarray:
    """EVM of rho^{T_B} from chi, using x^T = x and p^T = -p.

    (B_j B_l)^T = s_j s_l B_l B_j, so entry (i,j),(k,l) comes from (i,l),(k,j).
    """
    n = len(signs)
    sg = np.asarray(signs, dtype=float)
    C = chi.reshape(2, n, 2, n)
    T = np.einsum("iakb->ibka", C) * sg[None, :, None, None] * sg[None, None, None, :]
    return T.reshape(2 * n, 2 * n)


@dataclass(frozen=True)
class EquivalenceReport:
    trials: int
    agreements: int
    symmetric_ok: list
    transpose_ok: list
    max_identity_error: float

    @property
    def agreement_rate(self) -> float:
        return self.agreements / self.trials if self.trials else 1.0


def _psd(M: np.ndarray, tol: float) -> bool:
    return bool(np.linalg.eigvalsh(M).min() >= -tol)


def check_symmetric_form_equivalence(
    record: MeasurementRecord,
    trials: int = 100,
    seed: int = 0,
    tol: float = 1e-9,
    params: np.ndarray | None = None,
    scale: float = 1.0,
) -> EquivalenceReport:
    """Compare chi_s +/- (i/2) K >= 0 with chi >= 0 and chi(rho^{T_B}) >= 0.

    ``chi(rho^{T_B})`` is obtained independently by transposing Bob's
    operators; the report also tracks ``||chi^{T_B} - U chi~ U^dag||``.
    """
    chi_t = build_quadrature_evm(record)
    sym, K = build_symmetric_evm(record)
    U = np.kron(np.eye(2), np.diag([1.0, 1.0, -1.0]))
    rng = np.random.default_rng(seed)
    sym_ok, tr_ok = [], []
    agree = 0
    err = 0.0
    for t in range(trials):
        p = params if (params is not None and t == 0) else scale * rng.normal(size=chi_t.n_params)
        S = sym.evaluate(p)
        c1 = _psd(S + 0.5j * K, tol) and _psd(S - 0.5j * K, tol)
        chi = chi_t.evaluate(p)
        chi_tb = bob_transpose(chi)
        c2 = _psd(chi, tol) and _psd(chi_tb, tol)
        err = max(err, float(np.abs(chi_tb - U @ (S + 0.5j * K) @ U.conj().T).max()))
        sym_ok.append(c1)
        tr_ok.append(c2)
        agree += c1 == c2
    return EquivalenceReport(trials, agree, sym_ok, tr_ok, err)
