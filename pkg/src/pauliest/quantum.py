"""Dense states, POVMs, exact outcome distributions and sampling."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from . import pauli as pl
from .config import check_cap
from .pauli import PauliString

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
POVM_TOL = 1e-8
CLIP_TOL = 1e-9


class StateError(ValueError):
    """A matrix or vector that is not a valid quantum state."""


class PovmError(ValueError):
    """Elements that are not PSD or do not sum to the identity."""


def make_rng(seed: int, task_id: int = 0) -> np.random.Generator:
    """Counter-based generator for the sub-stream ``(seed, task_id)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(task_id)])))


def _qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise StateError(f"dimension {dim} is not a power of two")
    return n


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


class DensityMatrix:
    """A ``2^n x 2^n`` density matrix, validated on construction."""

    def __init__(self, matrix: np.ndarray, *, validate: bool = True, flags: Sequence[str] = ()):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise StateError("density matrix must be square")
        self.n = _qubits(matrix.shape[0])
        self.matrix = _readonly(matrix)
        self.flags = frozenset(flags)
        if validate:
            self._validate()

    def _validate(self) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise StateError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > TRACE_TOL:
            raise StateError(f"density matrix has trace {np.trace(m).real:.3g}, expected 1")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -PSD_TOL:
            raise StateError("density matrix has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return 1 << self.n

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def transpose(self) -> "DensityMatrix":
        return DensityMatrix(self.matrix.T, validate=False, flags=self.flags)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.matrix, other.matrix), validate=False)

    def to_json(self) -> dict:
        flat = self.matrix.reshape(-1)
        return {"n": self.n, "entries": [[float(v.real), float(v.imag)] for v in flat]}

    @classmethod
    def from_json(cls, data: dict) -> "DensityMatrix":
        try:
            n = int(data["n"])
            entries = np.array(data["entries"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"malformed density-matrix JSON: {exc}") from None
        if entries.shape != (4**n, 2):
            raise StateError(f"expected {4**n} [re, im] pairs for n={n}")
        return cls((entries[:, 0] + 1j * entries[:, 1]).reshape(1 << n, 1 << n))

    def __repr__(self) -> str:
        return f"DensityMatrix(n={self.n}, purity={self.purity():.4f})"


class PureState:
    """A unit vector of ``2^n`` amplitudes."""

    def __init__(self, amplitudes: np.ndarray, *, validate: bool = True):
        amplitudes = np.asarray(amplitudes).reshape(-1)
        self.n = _qubits(amplitudes.shape[0])
        self.amplitudes = _readonly(amplitudes)
        if validate and abs(np.linalg.norm(amplitudes) - 1) > 1e-10:
            raise StateError("state vector is not normalized")

    @property
    def dim(self) -> int:
        return 1 << self.n

    def density(self) -> DensityMatrix:
        check_cap(self.n, "density matrix")
        a = self.amplitudes
        return DensityMatrix(np.outer(a, a.conj()), validate=False)

    def expectation(self, p: PauliString) -> float:
        return float(np.real(np.vdot(self.amplitudes, _apply_vec(p, self.amplitudes))))

    def __repr__(self) -> str:
        return f"PureState(n={self.n})"


def _apply_vec(p: PauliString, vec: np.ndarray) -> np.ndarray:
    r = np.arange(1 << p.n)
    out = np.empty_like(vec, dtype=np.complex128)
    out[r ^ p.x] = pl._basis_phases(p.n, p.x, p.z) * vec
    return out


def as_density(state: DensityMatrix | PureState) -> DensityMatrix:
    return state.density() if isinstance(state, PureState) else state


@dataclass(frozen=True)
class OutcomeDistribution:
    labels: tuple
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or len(p) != len(self.labels):
            raise ValueError("labels and probabilities differ in length")
        if p.min(initial=0.0) < 0 or abs(p.sum() - 1) > POVM_TOL:
            raise ValueError("not a probability distribution")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def counts(self, rng: np.random.Generator, shots: int) -> np.ndarray:
        return rng.multinomial(shots, self.probabilities)

    def sample_indices(self, rng: np.random.Generator, shots: int) -> np.ndarray:
        if shots == 0:
            return np.zeros(0, dtype=np.int64)
        return rng.choice(len(self.labels), size=shots, p=self.probabilities)


def normalize_probabilities(p: np.ndarray, tol: float = CLIP_TOL) -> np.ndarray:
    """Clip tiny negatives to zero and renormalize; larger negatives are errors."""
    p = np.real(np.asarray(p, dtype=np.complex128)).astype(float)
    if p.min(initial=0.0) < -tol:
        raise PovmError(f"negative outcome probability {p.min():.3g}")
    p = np.where(p < 0, 0.0, p)
    return p / p.sum()


class Povm:
    """Finite POVM with validated elements."""

    def __init__(self, elements, labels: Sequence | None = None, *, validate: bool = True):
        elements = np.asarray(elements, dtype=np.complex128)
        if elements.ndim != 3 or elements.shape[1] != elements.shape[2]:
            raise PovmError("elements must be a stack of square matrices")
        self.n = _qubits(elements.shape[1])
        self.elements = _readonly(elements)
        self.labels = tuple(range(len(elements)) if labels is None else labels)
        if len(self.labels) != len(elements):
            raise PovmError("label count does not match element count")
        if validate:
            self.validate()

    def validate(self) -> None:
        total = self.elements.sum(axis=0)
        if np.max(np.abs(total - np.eye(1 << self.n))) > POVM_TOL:
            raise PovmError("POVM elements do not sum to the identity")
        for i, f in enumerate(self.elements):
            if np.max(np.abs(f - f.conj().T)) > HERMITIAN_TOL:
                raise PovmError(f"element {self.labels[i]} is not Hermitian")
            if np.linalg.eigvalsh(f).min() < -PSD_TOL:
                raise PovmError(f"element {self.labels[i]} is not PSD")

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"Povm(n={self.n}, outcomes={len(self)})"


def computational_povm(n: int) -> Povm:
    d = 1 << n
    elements = np.zeros((d, d, d))
    elements[np.arange(d), np.arange(d), np.arange(d)] = 1
    return Povm(elements, labels=[format(i, f"0{n}b") if n else "" for i in range(d)])


def _check_n(a, b) -> None:
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n} qubits")


# -- constructors ------------------------------------------------------------

def rho_p(p: PauliString, eps: float) -> DensityMatrix:
    """``(I + 3 eps P) / 2^n``.  The identity string is allowed but flagged."""
    if not 0 <= 3 * eps <= 1:
        raise StateError(f"eps={eps} outside [0, 1/3]")
    check_cap(p.n, "rho_p")
    mat = (np.eye(1 << p.n) + 3 * eps * pl.to_dense(p)) / (1 << p.n)
    if p.is_identity():
        warnings.warn("rho_p with the identity string is not a state", stacklevel=2)
        return DensityMatrix(mat, validate=False, flags=("identity",))
    return DensityMatrix(mat)


def maximally_mixed(n: int) -> DensityMatrix:
    check_cap(n, "maximally_mixed")
    return DensityMatrix(np.eye(1 << n) / (1 << n))


def haar_random_pure(n: int, rng: np.random.Generator) -> PureState:
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return PureState(v / np.linalg.norm(v))


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Normalized Wishart draw; full rank (``d`` Gaussian columns) by default."""
    check_cap(n, "random_density")
    d = 1 << n
    g = rng.standard_normal((d, rank or d)) + 1j * rng.standard_normal((d, rank or d))
    w = g @ g.conj().T
    return DensityMatrix(w / np.trace(w).real)


def ghz(n: int) -> PureState:
    v = np.zeros(1 << n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return PureState(v)


def product_state(bits: str) -> PureState:
    if not bits or set(bits) - {"0", "1"}:
        raise StateError(f"invalid bitstring {bits!r}")
    v = np.zeros(1 << len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return PureState(v)


def state_from_spec(spec: str, n: int | None, rng: np.random.Generator) -> DensityMatrix:
    """Build a state from a generator name or a JSON file path.

    Names: ``mixed``, ``haar``, ``rho_p:<pauli>:<eps>``, ``ghz``,
    ``product:<bits>``.  ``n`` is required for ``mixed``, ``haar`` and ``ghz``.
    """
    kind, _, rest = spec.partition(":")
    if kind == "rho_p":
        label, _, eps = rest.partition(":")
        try:
            return rho_p(pl.parse_pauli(label), float(eps))
        except ValueError as exc:
            raise StateError(f"bad state spec {spec!r}: {exc}") from None
    if kind == "product":
        return product_state(rest).density()
    if kind in ("mixed", "haar", "ghz"):
        if n is None:
            raise StateError(f"state {kind!r} needs a qubit count")
        if kind == "mixed":
            return maximally_mixed(n)
        return (haar_random_pure(n, rng) if kind == "haar" else ghz(n)).density()
    path = Path(spec)
    if path.suffix == ".json" and path.exists():
        return DensityMatrix.from_json(json.loads(path.read_text()))
    raise StateError(f"unknown state spec {spec!r}")


# -- expectations and spectra --------------------------------------------------

def expectation(p: PauliString, rho: DensityMatrix | PureState) -> float:
    _check_n(p, rho)
    if isinstance(rho, PureState):
        return rho.expectation(p)
    val = pl.trace_with(p, rho.matrix)
    if abs(val.imag) > 1e-10:
        raise StateError(f"tr(P rho) has imaginary part {val.imag:.3g}")
    return val.real


def pauli_spectrum(rho: DensityMatrix | PureState) -> np.ndarray:
    """``tr(P_a rho)`` for every index ``a`` (real, length ``4^n``)."""
    rho = as_density(rho)
    check_cap(rho.n, "pauli_spectrum")
    return np.real(pl.pauli_expectations(rho.matrix))


def pure_pauli_spectrum(psi: PureState) -> np.ndarray:
    """``<psi|P_a|psi>`` for every index, computed from the amplitudes."""
    return pauli_spectrum(psi.density())


# -- distributions -----------------------------------------------------------

def outcome_distribution(povm: Povm, rho: DensityMatrix | PureState) -> OutcomeDistribution:
    rho = as_density(rho)
    _check_n(povm, rho)
    # tr(F rho) = sum_ij F_ij rho_ji
    p = np.einsum("kij,ji->k", povm.elements, rho.matrix)
    return OutcomeDistribution(povm.labels, normalize_probabilities(p))


def sample(povm: Povm, rho: DensityMatrix | PureState, rng: np.random.Generator, shots: int) -> list:
    dist = outcome_distribution(povm, rho)
    return [dist.labels[i] for i in dist.sample_indices(rng, shots)]


def pauli_conjugated_povm(sigma: DensityMatrix | PureState) -> Povm:
    """Elements ``2^{-n} Q sigma^T Q`` labelled by every string ``Q``."""
    sigma = as_density(sigma)
    n = sigma.n
    check_cap(n, "pauli_conjugated_povm")
    st = sigma.matrix.T
    elements = [pl.conjugate(PauliString.from_index(n, a), st) / (1 << n) for a in range(4**n)]
    return Povm(elements, labels=[PauliString.from_index(n, a) for a in range(4**n)])


def bell_povm(n: int) -> Povm:
    """Projectors onto ``(I (x) Q)|Psi_I>`` on ``2n`` qubits, labelled by ``Q``."""
    check_cap(2 * n, "bell_povm")
    d = 1 << n
    phi = np.eye(d).reshape(-1) / np.sqrt(d)
    vecs = []
    for a in range(4**n):
        q = pl.to_dense(PauliString.from_index(n, a))
        vecs.append((np.eye(d)[:, :, None, None] * q[None, None]).transpose(0, 2, 1, 3)
                    .reshape(d * d, d * d) @ phi)
    elements = np.einsum("ki,kj->kij", vecs, np.conj(vecs))
    return Povm(elements, labels=[PauliString.from_index(n, a) for a in range(4**n)])


def bell_eigenvalue(p: PauliString, q: PauliString) -> int:
    """Eigenvalue of ``P (x) P`` on the Bell vector ``(I (x) Q)|Psi_I>``."""
    return pl.commutes(p, q) * (1 - 2 * (p.num_y & 1))


def bell_eigenvalue_table(n: int) -> np.ndarray:
    """``table[a, b] = mu(P_a, Q_b)`` as int8."""
    xs, zs = pl.index_tables(n)
    return kernels.commutation_signs(xs, zs, xs, zs) * pl.y_signs(n)[:, None]


def bell_distribution(sigma: DensityMatrix | np.ndarray, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """Bell-basis outcome probabilities on ``sigma (x) rho``, indexed by ``Q``.

    Equals ``2^{-n} tr(Q sigma^T Q rho)``.  Either argument may be a Pauli
    spectrum vector instead of a state.
    """
    ls = _spectrum_of(sigma)
    lr = _spectrum_of(rho)
    n = (len(ls).bit_length() - 1) // 2
    p = pl.symplectic_walsh(ls * lr * pl.y_signs(n), n) / 4**n
    return normalize_probabilities(p)


def conjugated_distribution(psi: DensityMatrix | PureState | np.ndarray,
                            rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """Outcome probabilities of ``{2^{-n} Q psi Q}_Q`` (no transpose) on ``rho``."""
    ls = _spectrum_of(psi)
    lr = _spectrum_of(rho)
    n = (len(ls).bit_length() - 1) // 2
    return normalize_probabilities(pl.symplectic_walsh(ls * lr, n) / 4**n)


def _spectrum_of(state) -> np.ndarray:
    if isinstance(state, np.ndarray):
        return state.astype(float)
    return pauli_spectrum(state)


def chi2_from_probabilities(p1: np.ndarray, p0: np.ndarray, tol: float = 1e-15) -> float:
    """``sum_s p0 (p1/p0 - 1)^2`` skipping outcomes where both vanish."""
    p1 = np.asarray(p1, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    zero0 = p0 <= tol
    if np.any(zero0 & (p1 > tol)):
        raise ValueError("chi-squared undefined: rho1 has weight where rho0 has none")
    keep = ~zero0
    return float(np.sum((p1[keep] - p0[keep]) ** 2 / p0[keep]))


def chi2_divergence(povm: Povm, rho1: DensityMatrix, rho0: DensityMatrix) -> float:
    p1 = outcome_distribution(povm, rho1).probabilities
    p0 = outcome_distribution(povm, rho0).probabilities
    return chi2_from_probabilities(p1, p0)


# -- purity event and partial trace -------------------------------------------

def purity_event_probability(rho, k: int):
    """Probability that both copies give the same outcome on the first ``n-k``
    qubits and the swap test on the remaining ``k`` qubits reports antisymmetric.

    Accepts a :class:`DensityMatrix` or a raw square array; object arrays of
    ``Fraction`` give an exact rational result.
    """
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    n = _qubits(mat.shape[0])
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    blocks = mat.reshape(1 << (n - k), 1 << k, 1 << (n - k), 1 << k)
    total = 0
    for x in range(1 << (n - k)):
        m = blocks[x, :, x, :]
        tr = sum(m[i, i] for i in range(1 << k))
        tr2 = (m * m.T).sum()
        total = total + (tr * tr - tr2)
    total = total / 2
    if mat.dtype == object:
        return total
    return float(np.real(total))


def partial_trace(rho: DensityMatrix, traced: Sequence[int]) -> DensityMatrix:
    """Trace out the qubits listed in ``traced`` (0 = leftmost)."""
    traced = sorted(set(traced))
    n = rho.n
    if any(not 0 <= q < n for q in traced):
        raise ValueError(f"qubit subset {traced} out of range for n={n}")
    keep = [q for q in range(n) if q not in traced]
    t = rho.matrix.reshape((2,) * (2 * n))
    # move kept row axes, traced row axes, kept col axes, traced col axes
    order = keep + traced + [n + q for q in keep] + [n + q for q in traced]
    t = t.transpose(order)
    dk, dt = 1 << len(keep), 1 << len(traced)
    t = t.reshape(dk, dt, dk, dt)
    return DensityMatrix(np.einsum("itjt->ij", t), validate=False)
