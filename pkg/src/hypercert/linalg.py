"""Dense complex linear algebra for small multi-qubit registers.

Everything in this package works on plain numpy arrays: state vectors of
length 2**n and square operators of shape (2**n, 2**n), with n <= 10.
A :class:`RegisterLayout` names the qubits of a register; the first role in
a layout is the most significant bit of the flattened basis index.  The
computational basis is fixed once for the whole package:

    polarization  |h> -> 0, |v> -> 1
    spatial mode  |a1>/|b1> -> 0, |a2>/|b2> -> 1
"""

from dataclasses import dataclass

import numpy as np

ID2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class Tolerances:
    """Central numerical tolerances used by validators and tests."""

    vec: float = 1e-12      # state-vector normalization
    mat: float = 1e-10      # operator identities (unitarity, trace)
    psd: float = 1e-10      # allowed negative eigenvalue magnitude
    entropy_eig: float = 1e-12  # eigenvalues below this count as zero


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered qubit roles of a register; first role is the most significant bit."""

    roles: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.roles)) != len(self.roles):
            raise ValueError(f"duplicate roles in layout: {self.roles}")

    @property
    def n_qubits(self) -> int:
        return len(self.roles)

    @property
    def dim(self) -> int:
        return 2 ** len(self.roles)

    def index(self, role: str) -> int:
        try:
            return self.roles.index(role)
        except ValueError:
            raise ValueError(f"role {role!r} not in layout {self.roles}") from None

    def positions(self, roles) -> list[int]:
        return [self.index(r) for r in roles]

    def drop(self, roles) -> "RegisterLayout":
        gone = set(roles)
        missing = gone - set(self.roles)
        if missing:
            raise ValueError(f"roles {sorted(missing)} not in layout {self.roles}")
        return RegisterLayout(tuple(r for r in self.roles if r not in gone))


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of vectors or matrices, first factor most significant."""
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def dm(psi: np.ndarray) -> np.ndarray:
    """Density operator |psi><psi| of a pure state vector."""
    v = np.asarray(psi, dtype=complex)
    return np.outer(v, v.conj())


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def is_normalized(psi, tol: Tolerances = DEFAULT_TOL) -> bool:
    return abs(np.vdot(psi, psi).real - 1.0) <= tol.vec


def is_hermitian(m, tol: Tolerances = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol.mat)


def is_unitary(m, tol: Tolerances = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol.mat)


def is_density(rho, tol: Tolerances = DEFAULT_TOL) -> bool:
    rho = np.asarray(rho)
    if not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho).real - 1.0) > tol.mat:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -tol.psd)


def _bit(indices: np.ndarray, position: int, n: int) -> np.ndarray:
    # position 0 is the most significant qubit
    return (indices >> (n - 1 - position)) & 1


def embed(op: np.ndarray, layout: RegisterLayout, roles) -> np.ndarray:
    """Embed a k-qubit operator acting on `roles` (in the given order) into the full register."""
    op = np.asarray(op, dtype=complex)
    pos = layout.positions(roles)
    k = len(pos)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} roles")
    n = layout.n_qubits
    idx = np.arange(layout.dim)
    sub = np.zeros_like(idx)
    for t, p in enumerate(pos):
        sub |= _bit(idx, p, n) << (k - 1 - t)
    rest = np.zeros_like(idx)
    shift = 0
    for p in reversed([q for q in range(n) if q not in pos]):
        rest |= _bit(idx, p, n) << shift
        shift += 1
    same_rest = rest[:, None] == rest[None, :]
    return np.where(same_rest, op[sub[:, None], sub[None, :]], 0.0 + 0.0j)


def controlled(op: np.ndarray, layout: RegisterLayout, target_roles, controls: dict) -> np.ndarray:
    """Unitary applying `op` to `target_roles` when every control role has its stated bit value."""
    full_op = embed(op, layout, target_roles)
    n = layout.n_qubits
    idx = np.arange(layout.dim)
    mask = np.ones(layout.dim, dtype=bool)
    for role, val in controls.items():
        mask &= _bit(idx, layout.index(role), n) == val
    # I + P (op - I) with the control projector P applied as a row mask
    out = np.eye(layout.dim, dtype=complex)
    out += mask[:, None] * (full_op - np.eye(layout.dim))
    return out


def reorder(psi: np.ndarray, from_layout: RegisterLayout, to_layout: RegisterLayout) -> np.ndarray:
    """Permute the qubits of a state vector from one layout to another over the same roles."""
    if set(from_layout.roles) != set(to_layout.roles):
        raise ValueError("layouts must contain the same roles")
    n = from_layout.n_qubits
    perm = [from_layout.index(r) for r in to_layout.roles]
    return np.asarray(psi, dtype=complex).reshape([2] * n).transpose(perm).reshape(-1)


def partial_trace(rho: np.ndarray, layout: RegisterLayout, keep) -> np.ndarray:
    """Reduced density operator over `keep` roles (returned in layout order)."""
    keep = list(keep)
    missing = set(keep) - set(layout.roles)
    if missing:
        raise ValueError(f"roles {sorted(missing)} not in layout {layout.roles}")
    n = layout.n_qubits
    keep_pos = sorted(layout.positions(keep))
    rho = np.asarray(rho, dtype=complex).reshape([2] * (2 * n))
    row = list(range(n))
    col = [n + q if q in keep_pos else q for q in range(n)]
    out = [q for q in keep_pos] + [n + q for q in keep_pos]
    k = len(keep_pos)
    return np.einsum(rho, row + col, out).reshape(2**k, 2**k)


def partial_inner(psi: np.ndarray, layout: RegisterLayout, roles, probe: np.ndarray) -> np.ndarray:
    """Contract <probe| against the given roles of a pure state; returns the un-normalized rest."""
    n = layout.n_qubits
    pos = layout.positions(roles)
    k = len(pos)
    probe = np.asarray(probe, dtype=complex).reshape([2] * k)
    t = np.asarray(psi, dtype=complex).reshape([2] * n)
    sub = list(range(n))
    return np.einsum(t, sub, probe.conj(), pos, [q for q in range(n) if q not in pos]).reshape(-1)


def partial_sandwich(rho: np.ndarray, layout: RegisterLayout, roles, probe: np.ndarray) -> np.ndarray:
    """<probe| rho |probe> over the given roles of a density operator (un-normalized)."""
    n = layout.n_qubits
    pos = layout.positions(roles)
    k = len(pos)
    probe = np.asarray(probe, dtype=complex).reshape([2] * k)
    t = np.asarray(rho, dtype=complex).reshape([2] * (2 * n))
    rest = [q for q in range(n) if q not in pos]
    row = list(range(n))
    col = list(range(n, 2 * n))
    out = rest + [n + q for q in rest]
    red = np.einsum(t, row + col, probe.conj(), pos, probe, [n + p for p in pos], out)
    return red.reshape(2 ** len(rest), 2 ** len(rest))


def fidelity(rho: np.ndarray, target: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """Overlap <target|rho|target> of a density operator (or pure vector) with a pure target."""
    target = np.asarray(target, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        if rho.shape != target.shape:
            raise ValueError("dimension mismatch")
        return float(np.abs(np.vdot(target, rho)) ** 2)
    if rho.shape != (target.size, target.size):
        raise ValueError("dimension mismatch")
    val = complex(target.conj() @ rho @ target)
    if abs(val.imag) > tol.mat:
        raise ValueError(f"fidelity has imaginary residue {val.imag:g}")
    return float(val.real)


def entanglement_entropy(psi: np.ndarray, layout: RegisterLayout, cut, tol: Tolerances = DEFAULT_TOL) -> float:
    """Von Neumann entropy (bits) of a pure state across the cut defined by `cut` roles."""
    psi = np.asarray(psi, dtype=complex)
    if not is_normalized(psi, tol):
        raise ValueError("state is not normalized")
    pos = sorted(layout.positions(cut))
    n = layout.n_qubits
    perm = pos + [q for q in range(n) if q not in pos]
    block = psi.reshape([2] * n).transpose(perm).reshape(2 ** len(pos), -1)
    lam = np.linalg.svd(block, compute_uv=False) ** 2
    lam = np.clip(lam, 0.0, 1.0)
    lam = lam[lam > tol.entropy_eig]
    return float(-np.sum(lam * np.log2(lam)))


def _bell_vectors() -> tuple[np.ndarray, ...]:
    s = 1 / np.sqrt(2)
    return (
        np.array([s, 0, 0, s], dtype=complex),    # phi+
        np.array([s, 0, 0, -s], dtype=complex),   # phi-
        np.array([0, s, s, 0], dtype=complex),    # psi+
        np.array([0, s, -s, 0], dtype=complex),   # psi-
    )


def bell_projectors() -> tuple[np.ndarray, ...]:
    """Rank-1 projectors onto (phi+, phi-, psi+, psi-), in that order; they sum to the identity."""
    return tuple(dm(v) for v in _bell_vectors())
