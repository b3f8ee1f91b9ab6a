"""Qubit and two-qubit operator toolkit.

Operators are plain ``numpy`` complex arrays of shape (2, 2) or (4, 4).
Functions never mutate their inputs. Two-qubit operators use the
computational basis ordering |00>, |01>, |10>, |11>, with the first
tensor factor being the qubit that may be perturbed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {0: I2, 1: SIGMA_1, 2: SIGMA_2, 3: SIGMA_3}

for _m in (I2, I4, SIGMA_1, SIGMA_2, SIGMA_3):
    _m.setflags(write=False)

_S = 1 / math.sqrt(2)
BELL_VECTORS = {
    "phi+": np.array([_S, 0, 0, _S], dtype=complex),
    "phi-": np.array([_S, 0, 0, -_S], dtype=complex),
    "psi+": np.array([0, _S, _S, 0], dtype=complex),
    "psi-": np.array([0, _S, -_S, 0], dtype=complex),
}
# weight order used by Bell-diagonal states
BELL_ORDER = ("phi+", "psi+", "psi-", "phi-")


class QDiscError(ValueError):
    """Base class for all input and contract errors raised by qdisc."""


class InvalidStateError(QDiscError):
    pass


class DimensionError(QDiscError):
    pass


class DomainError(QDiscError):
    pass


class ContractViolation(QDiscError):
    pass


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order; eigenvectors are the matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def projector(self, k: int) -> np.ndarray:
        v = self.eigenvectors[:, k]
        return np.outer(v, v.conj())


@dataclass(frozen=True)
class BinaryPVM:
    """Two-outcome projective measurement {pi0, pi1}; outcome 1 means H1."""

    pi0: np.ndarray
    pi1: np.ndarray

    @classmethod
    def from_pi1(cls, pi1: np.ndarray) -> "BinaryPVM":
        pi1 = np.asarray(pi1, dtype=complex)
        return cls(np.eye(pi1.shape[0], dtype=complex) - pi1, pi1)

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.pi1).real))

    def check(self, atol: float = DEFAULT_TOL) -> None:
        """Raise :class:`ContractViolation` unless this is a valid binary PVM."""
        dim = self.pi0.shape[0]
        if self.pi0.shape != self.pi1.shape:
            raise ContractViolation("PVM elements have different shapes")
        if np.abs(self.pi0 + self.pi1 - np.eye(dim)).max() > atol:
            raise ContractViolation("PVM elements do not sum to identity")
        for name, p in (("pi0", self.pi0), ("pi1", self.pi1)):
            if np.abs(p - p.conj().T).max() > atol:
                raise ContractViolation(f"{name} is not Hermitian")
            if np.abs(p @ p - p).max() > atol:
                raise ContractViolation(f"{name} is not idempotent")
        if np.abs(self.pi0 @ self.pi1).max() > atol:
            raise ContractViolation("PVM elements are not orthogonal")


def as_operator(m, name: str = "operator") -> np.ndarray:
    """Return ``m`` as a finite complex 2x2 or 4x4 array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
        raise DimensionError(f"{name} must be 2x2 or 4x4, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    return a


def check_same_dim(*ops: np.ndarray) -> int:
    dims = {op.shape[0] for op in ops}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def is_hermitian(m: np.ndarray, atol: float = DEFAULT_TOL) -> bool:
    return bool(np.abs(m - m.conj().T).max() <= atol)


def validate_density(rho, atol: float = 1e-12, psd_tol: float = DEFAULT_TOL) -> np.ndarray:
    """Check the density-matrix invariants and return ``rho`` as an array.

    Raises :class:`InvalidStateError` if ``rho`` is not Hermitian, not unit
    trace or has an eigenvalue below ``-psd_tol``.
    """
    rho = as_operator(rho, "density matrix")
    if not is_hermitian(rho, atol):
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise InvalidStateError(f"density matrix has trace {np.trace(rho).real:.3g}")
    if eig_hermitian(rho).eigenvalues[-1] < -psd_tol:
        raise InvalidStateError("density matrix is not positive semidefinite")
    return rho


# --- Bloch representation -------------------------------------------------


def bloch_vector(r: Sequence[float]) -> np.ndarray:
    v = np.asarray(r, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise InvalidStateError(f"Bloch vector must be 3 finite reals, got {r!r}")
    if v @ v > 1 + 1e-12:
        raise InvalidStateError(f"Bloch vector has norm {math.sqrt(v @ v):.6g} > 1")
    return v


def bloch_to_density(r: Sequence[float]) -> np.ndarray:
    """Qubit state (I + r.sigma)/2."""
    r1, r2, r3 = bloch_vector(r)
    return 0.5 * np.array([[1 + r3, r1 - 1j * r2], [r1 + 1j * r2, 1 - r3]], dtype=complex)


def density_to_bloch(rho) -> np.ndarray:
    rho = as_operator(rho, "density matrix")
    if rho.shape[0] != 2:
        raise DimensionError("Bloch vectors exist only for single-qubit states")
    return np.array([np.trace(rho @ PAULI[k]).real for k in (1, 2, 3)])


def rotate_bloch(r: Sequence[float], lam: float) -> np.ndarray:
    """Bloch vector after a rotation by 2*lam about the first axis.

    The sign convention is r2' = r2 cos 2lam - r3 sin 2lam, which is the
    image of ``r`` under ``U rho U^dagger`` with ``U = unitary_perturbation(lam, 1)``.
    ``apply_unitary`` uses ``U^dagger rho U``, so the two agree at ``-lam``.
    """
    r1, r2, r3 = bloch_vector(r)
    c, s = math.cos(2 * lam), math.sin(2 * lam)
    return np.array([r1, r2 * c - r3 * s, r2 * s + r3 * c])


# --- perturbations and products -------------------------------------------


def unitary_perturbation(lam: float, axis: int = 1) -> np.ndarray:
    """exp(-i lam sigma_axis) = cos(lam) I - i sin(lam) sigma_axis."""
    if axis not in (1, 2, 3):
        raise DomainError(f"generator axis must be 1, 2 or 3, got {axis!r}")
    return math.cos(lam) * I2 - 1j * math.sin(lam) * PAULI[axis]


def apply_unitary(rho, u) -> np.ndarray:
    """Return ``U^dagger rho U`` (the perturbed-state convention used throughout)."""
    rho = as_operator(rho, "state")
    u = as_operator(u, "unitary")
    check_same_dim(rho, u)
    return u.conj().T @ rho @ u


def tensor(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DimensionError("tensor expects two 2x2 operators")
    return np.kron(a, b)


def perturbation_operator(lam: float, axis: int = 1, dim: int = 2) -> np.ndarray:
    """Perturbation acting on the first qubit of a ``dim``-dimensional system."""
    u = unitary_perturbation(lam, axis)
    if dim == 2:
        return u
    if dim == 4:
        return np.kron(u, I2)
    raise DimensionError(f"unsupported dimension {dim}")


def perturb(rho, lam: float, axis: int = 1) -> np.ndarray:
    """The state after the possible perturbation, acting on the first qubit."""
    rho = as_operator(rho, "state")
    return apply_unitary(rho, perturbation_operator(lam, axis, rho.shape[0]))


# --- Bell states ------------------------------------------------------------


def bell_state(label: str) -> np.ndarray:
    try:
        v = BELL_VECTORS[label]
    except KeyError:
        raise DomainError(f"unknown Bell state {label!r}; expected one of {sorted(BELL_VECTORS)}") from None
    return np.outer(v, v.conj())


def bell_weights(p: Sequence[float]) -> tuple[float, float, float, float]:
    w = tuple(float(x) for x in p)
    if len(w) != 4:
        raise InvalidStateError("Bell-diagonal states need exactly four weights")
    if any(x < 0 or not math.isfinite(x) for x in w):
        raise InvalidStateError(f"Bell weights must be nonnegative, got {w}")
    if abs(sum(w) - 1) > 1e-12:
        raise InvalidStateError(f"Bell weights sum to {sum(w)!r}, not 1")
    return w  # type: ignore[return-value]


def bell_diagonal(p: Sequence[float]) -> np.ndarray:
    """Mixture p0 phi+ + p1 psi+ + p2 psi- + p3 phi-."""
    w = bell_weights(p)
    return sum(wk * bell_state(lab) for wk, lab in zip(w, BELL_ORDER))


def pure_state(ket: Sequence[complex]) -> np.ndarray:
    """Projector onto the normalized vector ``ket``."""
    v = np.asarray(ket, dtype=complex)
    n = np.linalg.norm(v)
    if v.ndim != 1 or v.shape[0] not in (2, 4):
        raise DimensionError("ket must have 2 or 4 components")
    if not math.isfinite(n) or n == 0:
        raise InvalidStateError("ket cannot be normalized")
    v = v / n
    return np.outer(v, v.conj())


# --- spectral primitives ----------------------------------------------------


def _eig_2x2(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = m[0, 0].real
    d = m[1, 1].real
    b = complex(m[0, 1])
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    rad = math.hypot(half, abs(b))
    hi, lo = mean + rad, mean - rad
    if abs(b) < 1e-300:  # negligible at unit scale
        if a >= d:
            vecs = np.eye(2, dtype=complex)
        else:
            vecs = np.array([[0, 1], [1, 0]], dtype=complex)
        return np.array([max(a, d), min(a, d)]), vecs
    # two equivalent forms of the top eigenvector; keep the better conditioned one
    x = (b, hi - a)
    y = (hi - d, b.conjugate())
    u = x if math.hypot(abs(x[0]), abs(x[1])) >= math.hypot(abs(y[0]), abs(y[1])) else y
    n = math.hypot(abs(u[0]), abs(u[1]))
    u0, u1 = u[0] / n, u[1] / n
    vecs = np.array([[u0, -u1.conjugate()], [u1, u0.conjugate()]], dtype=complex)
    return np.array([hi, lo]), vecs


def _jacobi(m: np.ndarray, tol: float, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    # cyclic complex Jacobi on Python scalars; faster than numpy at this size
    n = m.shape[0]
    a = [[complex(m[i, j]) for j in range(n)] for i in range(n)]
    v = [[1 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    scale = max(1.0, math.sqrt(sum(abs(x) ** 2 for row in a for x in row)))
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                x = a[i][j]
                off += x.real * x.real + x.imag * x.imag
        if math.sqrt(2 * off) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                h = abs(apq)
                if h < 1e-300:
                    continue
                phc = (apq / h).conjugate()
                z = (a[q][q].real - a[p][p].real) / (2 * h)
                if abs(z) > 1e150:
                    t = 0.5 / z
                else:
                    t = math.copysign(1.0, z) / (abs(z) + math.sqrt(1 + z * z))
                c = 1 / math.sqrt(1 + t * t)
                s = t * c
                g10 = -s * phc
                g11 = c * phc
                for row in a:
                    x, y = row[p], row[q]
                    row[p] = c * x + g10 * y
                    row[q] = s * x + g11 * y
                rp, rq = a[p], a[q]
                cg10, cg11 = g10.conjugate(), g11.conjugate()
                for k in range(n):
                    x, y = rp[k], rq[k]
                    rp[k] = c * x + cg10 * y
                    rq[k] = s * x + cg11 * y
                rp[q] = 0j
                rq[p] = 0j
                for row in v:
                    x, y = row[p], row[q]
                    row[p] = c * x + g10 * y
                    row[q] = s * x + g11 * y
    else:
        raise ContractViolation(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.array([a[i][i].real for i in range(n)])
    vecs = np.array(v, dtype=complex)
    order = np.argsort(-w, kind="stable")
    return w[order], vecs[:, order]


def eig_hermitian(
    m, herm_tol: float = DEFAULT_TOL, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian 2x2 or 4x4 matrix.

    2x2 matrices are solved in closed form, 4x4 by cyclic Jacobi rotations
    until the off-diagonal Frobenius norm is below ``tol`` relative to the
    matrix norm. Eigenvalues come back descending.
    """
    m = as_operator(m, "matrix")
    if not is_hermitian(m, herm_tol):
        raise ContractViolation("eig_hermitian needs a Hermitian matrix")
    w, v = _eig_checked(m, tol, max_sweeps)
    return EigenDecomposition(w, v)


def _eig_checked(m: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigenpairs of an already validated Hermitian array; internal fast path."""
    m = 0.5 * (m + m.conj().T)  # drop the anti-Hermitian rounding noise before rescaling
    # work at unit scale so thresholds are relative and squares cannot under/overflow
    size = float(np.abs(m).max())
    if size == 0.0:
        dim = m.shape[0]
        return np.zeros(dim), np.eye(dim, dtype=complex)
    e = math.frexp(size)[1]
    unit = np.ldexp(m.real, -e) + 1j * np.ldexp(m.imag, -e)  # exact power-of-two scaling
    if m.shape[0] == 2:
        w, v = _eig_2x2(unit)
    else:
        w, v = _jacobi(unit, tol, max_sweeps)
    return np.ldexp(w, e), v


def trace_norm(m) -> float:
    """Sum of absolute eigenvalues of a Hermitian operator."""
    return float(np.abs(eig_hermitian(m).eigenvalues).sum())


def positive_part_projector(m, tol: float = DEFAULT_TOL) -> BinaryPVM:
    """PVM whose outcome-1 element projects onto eigenvalues strictly above ``tol``.

    Eigenvalues in [-tol, tol] go to the outcome-0 element.
    """
    ed = eig_hermitian(m)
    dim = ed.eigenvalues.shape[0]
    pi1 = np.zeros((dim, dim), dtype=complex)
    for k, w in enumerate(ed.eigenvalues):
        if w > tol:
            pi1 += ed.projector(k)
    return BinaryPVM.from_pi1(pi1)


def purity(rho) -> float:
    rho = as_operator(rho, "state")
    return float(np.trace(rho @ rho).real)


def overlap(psi0, psi1, atol: float = DEFAULT_TOL) -> float:
    """|<psi1|psi0>|^2 for two pure states given as projectors."""
    psi0 = as_operator(psi0, "state")
    psi1 = as_operator(psi1, "state")
    check_same_dim(psi0, psi1)
    for rho in (psi0, psi1):
        if abs(purity(rho) - 1) > atol:
            raise ContractViolation("overlap is defined for pure states only")
    return float(np.trace(psi0 @ psi1).real)


def expectation(rho, op) -> float:
    return float(np.trace(np.asarray(rho) @ np.asarray(op)).real)
