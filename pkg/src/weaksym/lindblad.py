"""Master-operator representations and their superoperator matrices.

A Representation is a Hamiltonian plus an ordered list of jump operators;
different representations can generate the same master operator.  This
module provides the Liouville and Choi matrices (row-stacking convention
throughout: vec(A rho B) = (A kron B^T) vec(rho)), the traceless form,
time evolution, and the machinery relating two representations of one
master operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import DEFAULT_TOL, ShapeError, dag, frob


class NegativeTimeError(ValueError):
    pass


class NotSameMasterOperator(ValueError):
    pass


@dataclass(frozen=True)
class Representation:
    """Hamiltonian plus ordered jump operators for one unravelling."""

    hamiltonian: np.ndarray
    jumps: tuple
    labels: tuple = ()

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        d = h.shape[0]
        if h.shape != (d, d):
            raise ShapeError(f"hamiltonian must be square, got {h.shape}")
        hnorm = frob(h)
        if hnorm > 0 and frob(h - dag(h)) > DEFAULT_TOL * max(hnorm, 1.0):
            raise ValueError("hamiltonian is not Hermitian within tolerance")
        jumps = tuple(np.asarray(j, dtype=complex) for j in self.jumps)
        for k, j in enumerate(jumps):
            if j.shape != (d, d):
                raise ShapeError(f"jump {k} has shape {j.shape}, expected {(d, d)}")
            if frob(j) == 0.0:
                raise ValueError(f"jump {k} is zero")
        labels = tuple(self.labels) if self.labels else tuple(
            f"J{k + 1}" for k in range(len(jumps)))
        if len(labels) != len(jumps):
            raise ValueError("labels length must match jump count")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def njumps(self) -> int:
        return len(self.jumps)

    def with_jumps(self, jumps, labels=()) -> "Representation":
        return Representation(self.hamiltonian, tuple(jumps), labels)

    def fingerprint(self) -> str:
        """Hex digest of the defining matrices (for reproducibility records)."""
        import hashlib

        h = hashlib.sha256()
        h.update(self.hamiltonian.tobytes())
        for j in self.jumps:
            h.update(j.tobytes())
        return h.hexdigest()[:16]


def validate_density_matrix(rho, tol: float = 1e-9) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if frob(rho - dag(rho)) > tol * max(1.0, frob(rho)):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho)} != 1")
    w, _ = linalg.hermitian_eigendecomposition(rho, tol)
    if np.min(w) < -tol:
        raise ValueError(f"density matrix has eigenvalue {np.min(w)} < 0")
    return rho


def pure_state(vec) -> np.ndarray:
    """Projector |v><v| of a normalized state vector."""
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def apply_master_operator(rep: Representation, rho) -> np.ndarray:
    """-i[H, rho] + sum_j (J rho J† - (1/2){J†J, rho})."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (rep.dim, rep.dim):
        raise ShapeError(f"state shape {rho.shape} does not match dim {rep.dim}")
    h = rep.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for j in rep.jumps:
        jdj = dag(j) @ j
        out += j @ rho @ dag(j) - 0.5 * (jdj @ rho + rho @ jdj)
    return out


def apply_adjoint_master_operator(rep: Representation, f) -> np.ndarray:
    """Heisenberg-picture action: +i[H, F] + sum_j (J† F J - (1/2){J†J, F})."""
    f = np.asarray(f, dtype=complex)
    h = rep.hamiltonian
    out = 1j * (h @ f - f @ h)
    for j in rep.jumps:
        jdj = dag(j) @ j
        out += dag(j) @ f @ j - 0.5 * (jdj @ f + f @ jdj)
    return out


def kraus_term_liouville(a, b=None) -> np.ndarray:
    """Liouville matrix of rho -> A rho B† (row stacking); B defaults to A."""
    a = np.asarray(a, dtype=complex)
    b = a if b is None else np.asarray(b, dtype=complex)
    return np.kron(a, b.conj())


def liouville_matrix(op, dim: int | None = None) -> np.ndarray:
    """Liouville (row-stacking) matrix of a superoperator.

    `op` is either a Representation (giving its master operator) or a
    callable rho -> superoperator(rho), in which case `dim` is required.
    """
    if isinstance(op, Representation):
        d = op.dim
        h = op.hamiltonian
        eye = np.eye(d, dtype=complex)
        lam = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        for j in op.jumps:
            jdj = dag(j) @ j
            lam += np.kron(j, j.conj())
            lam -= 0.5 * (np.kron(jdj, eye) + np.kron(eye, jdj.T))
        return lam
    if dim is None:
        raise ValueError("dim is required for a callback superoperator")
    lam = np.zeros((dim * dim, dim * dim), dtype=complex)
    for k in range(dim):
        for l in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[k, l] = 1.0
            lam[:, k * dim + l] = np.asarray(op(e), dtype=complex).reshape(-1)
    return lam


def liouville_to_choi(lam: np.ndarray) -> np.ndarray:
    """Reshuffle a Liouville matrix into the Choi matrix: C[mn,kl] = Lam[mk,nl]."""
    lam = np.asarray(lam, dtype=complex)
    d2 = lam.shape[0]
    d = int(round(np.sqrt(d2)))
    if d * d != d2 or lam.shape != (d2, d2):
        raise ShapeError(f"not a vectorized superoperator matrix: {lam.shape}")
    return lam.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d2, d2)


def choi_matrix(op, dim: int | None = None) -> np.ndarray:
    """Choi matrix of a superoperator (same inputs as liouville_matrix)."""
    return liouville_to_choi(liouville_matrix(op, dim))


def jump_part_choi(jumps) -> np.ndarray:
    """Choi matrix of rho -> sum_j J_j rho J_j† (positive semidefinite)."""
    jumps = [np.asarray(j, dtype=complex) for j in jumps]
    return liouville_to_choi(sum(np.kron(j, j.conj()) for j in jumps))


def traceless_representation(rep: Representation) -> Representation:
    """Equivalent representation whose jumps are all traceless.

    H' = H + (i/2d) sum_j [J_j Tr(J_j†) - J_j† Tr(J_j)],
    J_j' = J_j - Tr(J_j)/d.  Generates the identical master operator.
    """
    d = rep.dim
    h = rep.hamiltonian.astype(complex)
    shift = np.zeros_like(h)
    jumps = []
    for j in rep.jumps:
        tr = np.trace(j)
        shift += j * np.conj(tr) - dag(j) * tr
        jumps.append(j - (tr / d) * np.eye(d))
    hp = h + (1j / (2.0 * d)) * shift
    return Representation(hp, tuple(jumps), rep.labels)


def effective_hamiltonian(rep: Representation) -> np.ndarray:
    """H - (i/2) sum_j J_j† J_j."""
    out = rep.hamiltonian.astype(complex).copy()
    for j in rep.jumps:
        out -= 0.5j * (dag(j) @ j)
    return out


def evolve_density(rep: Representation, rho0, t: float) -> np.ndarray:
    """Propagate rho0 for time t >= 0 through exp(t * Liouville matrix)."""
    if t < 0:
        raise NegativeTimeError(f"t = {t} < 0")
    rho0 = np.asarray(rho0, dtype=complex)
    d = rep.dim
    if rho0.shape != (d, d):
        raise ShapeError("state dimension mismatch")
    if t == 0.0:
        return rho0.copy()
    lam = liouville_matrix(rep)
    vec = linalg.matrix_exponential(t * lam) @ rho0.reshape(-1)
    return vec.reshape(d, d)


def representations_equal(rep_a: Representation, rep_b: Representation,
                          tol: float = DEFAULT_TOL) -> bool:
    """Whether two representations generate the same master operator.

    Small systems compare Liouville matrices in Frobenius distance; for
    larger ones the equivalent structural test runs instead (equal
    traceless Hamiltonians and equal jump-frame operators, compared in
    the union span), which avoids d^2 x d^2 matrices.
    """
    if rep_a.dim != rep_b.dim:
        raise ShapeError("dimension mismatch")
    if rep_a.dim <= 12:
        la = liouville_matrix(rep_a)
        lb = liouville_matrix(rep_b)
        scale = max(frob(la), frob(lb), 1e-300)
        return frob(la - lb) <= tol * scale
    ta = traceless_representation(rep_a)
    tb = traceless_representation(rep_b)
    h_scale = max(frob(ta.hamiltonian), frob(tb.hamiltonian), 1.0)
    if frob(ta.hamiltonian - tb.hamiltonian) > tol * h_scale:
        return False
    sa = np.column_stack([j.reshape(-1) for j in ta.jumps]) \
        if ta.jumps else np.zeros((rep_a.dim ** 2, 0), dtype=complex)
    sb = np.column_stack([j.reshape(-1) for j in tb.jumps]) \
        if tb.jumps else np.zeros((rep_b.dim ** 2, 0), dtype=complex)
    union = np.hstack([sa, sb])
    if union.shape[1] == 0:
        return True
    basis = linalg.orthonormal_columns(union, tol)
    ca = dag(basis) @ sa
    cb = dag(basis) @ sb
    fa = ca @ dag(ca)
    fb = cb @ dag(cb)
    scale = max(frob(fa), frob(fb), 1e-300)
    return frob(fa - fb) <= tol * scale


def _jump_coefficients(jumps, tol):
    """Orthonormal span basis (as flattened operators) and coefficient matrix."""
    stack = np.column_stack([j.reshape(-1) for j in jumps])
    basis = linalg.orthonormal_columns(stack, tol)
    coeff = dag(basis) @ stack  # J_k = sum_a basis_a * coeff[a, k]
    return basis, coeff.T  # rows index jumps


def relate_representations(rep_a: Representation, rep_b: Representation,
                           tol: float = DEFAULT_TOL):
    """Isometry V with J'_b,j = sum_k V_jk J'_a,k on traceless jumps.

    rep_b must have at least as many jumps as rep_a.  Returns (V, unique)
    where unique is False when the jumps of rep_a are linearly dependent
    (the isometry then carries documented freedom).  Raises
    NotSameMasterOperator when the Liouville matrices differ.
    """
    if rep_b.njumps < rep_a.njumps:
        raise ShapeError("order the call so the second representation has >= jumps")
    if not representations_equal(rep_a, rep_b, tol):
        raise NotSameMasterOperator("representations generate different master operators")
    ta = traceless_representation(rep_a)
    tb = traceless_representation(rep_b)
    basis, m = _jump_coefficients(ta.jumps, tol)
    d, r = m.shape
    dt = rep_b.njumps
    n = np.column_stack([dag(basis) @ j.reshape(-1) for j in tb.jumps]).T
    resid = max(
        frob(j.reshape(-1) - basis @ (dag(basis) @ j.reshape(-1)))
        for j in tb.jumps
    )
    scale = max(frob(j) for j in tb.jumps)
    if resid > tol * max(scale, 1.0):
        raise NotSameMasterOperator("target jumps leave the source jump span")
    # M = Q R with isometric Q; the shared frame operator makes N R^-1 isometric
    q, rr = np.linalg.qr(m)
    qb = n @ np.linalg.inv(rr)
    if frob(dag(qb) @ qb - np.eye(r)) > 1e3 * tol * max(1.0, r):
        raise NotSameMasterOperator("jump frames differ; no isometry exists")
    pa = linalg.orthonormal_complement(q, d, tol)
    if pa.shape[1]:
        pb = linalg.orthonormal_complement(qb, dt, tol)[:, : pa.shape[1]]
        v = qb @ dag(q) + pb @ dag(pa)
    else:
        v = qb @ dag(q)
    unique = r == d
    return v, unique


__all__ = [
    "Representation",
    "apply_master_operator",
    "apply_adjoint_master_operator",
    "choi_matrix",
    "effective_hamiltonian",
    "evolve_density",
    "jump_part_choi",
    "kraus_term_liouville",
    "liouville_matrix",
    "liouville_to_choi",
    "pure_state",
    "relate_representations",
    "representations_equal",
    "traceless_representation",
    "validate_density_matrix",
    "NegativeTimeError",
    "NotSameMasterOperator",
]
