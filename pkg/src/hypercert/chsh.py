"""Per-DOF CHSH tests: observables, exact values, seeded sampling, deficits.

Both parties hold involutory +/-1-valued observables in each DOF.  Alice's
settings are A0 = (Z+X)/sqrt(2) and A1 = (Z-X)/sqrt(2); Bob measures Z and X
up to a per-Bell-label sign flip that makes the exact CHSH value equal
2*sqrt(2) for every one of the sixteen hyperentangled Bell states.  The sign
table is derived here by brute force rather than copied from anywhere.

Sampling draws joint (a, b) outcomes per setting pair directly from the Born
distribution of the two commuting observables, so it is exactly Born-rule
faithful, and is deterministic given the seed regardless of evaluation order.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import ID2, PAULI_X, PAULI_Z, DEFAULT_TOL
from .rng import substream
from .states import BellLabel, HyperBellLabel, PHYS_LAYOUT, POL_ROLES, SPAT_ROLES, bell_vector

TSIRELSON = 2 * math.sqrt(2)

DOF_POL = "P"
DOF_SPAT = "S"
_DOF_ROLES = {DOF_POL: POL_ROLES, DOF_SPAT: SPAT_ROLES}
_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class BinaryObservable:
    """Hermitian involutory 2x2 observable with outcomes +1/-1."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("observable must be 2x2")
        if np.max(np.abs(m - m.conj().T)) > DEFAULT_TOL.mat:
            raise ValueError(f"observable {self.label!r} is not Hermitian")
        if np.max(np.abs(m @ m - ID2)) > DEFAULT_TOL.mat:
            raise ValueError(f"observable {self.label!r} is not involutory")
        object.__setattr__(self, "matrix", m)

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Spectral projectors (P_plus, P_minus); exact because M is involutory."""
        return (ID2 + self.matrix) / 2, (ID2 - self.matrix) / 2


@dataclass(frozen=True)
class MeasurementSetting:
    party: str  # "A" or "B"
    dof: str    # DOF_POL or DOF_SPAT
    index: int  # 0 or 1
    observable: BinaryObservable


def rotated(obs: BinaryObservable, theta: float, label: str = "") -> BinaryObservable:
    """Observable conjugated by a rotation about Y by `theta` (still involutory)."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    r = np.array([[c, -s], [s, c]], dtype=complex)
    return BinaryObservable(r @ obs.matrix @ r.conj().T, label or f"{obs.label}(rot {theta:g})")


def _bob_signs(label: BellLabel) -> tuple[int, int]:
    """Unique signs (sz, sx) with <bell| sqrt(2)(Z (x) sz*Z + X (x) sx*X) |bell> = 2*sqrt(2)."""
    v = bell_vector(label)
    best = None
    for sz in (1, -1):
        for sx in (1, -1):
            op = math.sqrt(2) * (
                linalg.tensor(PAULI_Z, sz * PAULI_Z) + linalg.tensor(PAULI_X, sx * PAULI_X)
            )
            val = float(np.real(v.conj() @ op @ v))
            if best is None or val > best[0]:
                best = (val, sz, sx)
    return best[1], best[2]


def canonical_a_observables(rotation: float = 0.0) -> tuple[BinaryObservable, BinaryObservable]:
    a0 = BinaryObservable((PAULI_Z + PAULI_X) / math.sqrt(2), "A0")
    a1 = BinaryObservable((PAULI_Z - PAULI_X) / math.sqrt(2), "A1")
    if rotation:
        a0, a1 = rotated(a0, rotation, "A0"), rotated(a1, rotation, "A1")
    return a0, a1


def canonical_settings(
    label: HyperBellLabel,
    alice_rotation_pol: float = 0.0,
    alice_rotation_spat: float = 0.0,
) -> list[MeasurementSetting]:
    """Eight settings (2 parties x 2 DOFs x 2 indices) maximizing both CHSH values."""
    out = []
    for dof, bell_label, rot in (
        (DOF_POL, label.pol, alice_rotation_pol),
        (DOF_SPAT, label.spat, alice_rotation_spat),
    ):
        a0, a1 = canonical_a_observables(rot)
        sz, sx = _bob_signs(bell_label)
        b0 = BinaryObservable(sz * PAULI_Z, f"B0({'+' if sz > 0 else '-'}Z)")
        b1 = BinaryObservable(sx * PAULI_X, f"B1({'+' if sx > 0 else '-'}X)")
        out += [
            MeasurementSetting("A", dof, 0, a0),
            MeasurementSetting("A", dof, 1, a1),
            MeasurementSetting("B", dof, 0, b0),
            MeasurementSetting("B", dof, 1, b1),
        ]
    return out


def get_setting(settings, party: str, dof: str, index: int) -> MeasurementSetting:
    for s in settings:
        if s.party == party and s.dof == dof and s.index == index:
            return s
    raise ValueError(f"no setting for party={party} dof={dof} index={index}")


def _pair_operator(settings, dof: str, i: int, j: int) -> np.ndarray:
    a = get_setting(settings, "A", dof, i).observable.matrix
    b = get_setting(settings, "B", dof, j).observable.matrix
    ra, rb = _DOF_ROLES[dof]
    return linalg.embed(a, PHYS_LAYOUT, [ra]) @ linalg.embed(b, PHYS_LAYOUT, [rb])


def chsh_operator(settings, dof: str) -> np.ndarray:
    """16x16 operator A0B0 + A1B0 + A0B1 - A1B1 for the given DOF."""
    signs = {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): -1}
    return sum(signs[p] * _pair_operator(settings, dof, *p) for p in _PAIRS)


def _as_density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return linalg.dm(state) if state.ndim == 1 else state


def chsh_exact(state: np.ndarray, settings, dof: str) -> float:
    """Exact CHSH expectation Tr[rho * CHSH] for a 16-dim state vector or density."""
    rho = _as_density(state)
    if rho.shape != (16, 16):
        raise ValueError("CHSH evaluation expects the 16-dim physical register")
    return float(np.real(np.trace(rho @ chsh_operator(settings, dof))))


def correlator_distribution(state: np.ndarray, settings, dof: str, i: int, j: int) -> np.ndarray:
    """Born probabilities of the four joint outcomes (+1+1, +1-1, -1+1, -1-1)."""
    rho = _as_density(state)
    a = get_setting(settings, "A", dof, i).observable
    b = get_setting(settings, "B", dof, j).observable
    ra, rb = _DOF_ROLES[dof]
    probs = []
    for pa in a.projectors():
        for pb in b.projectors():
            op = linalg.embed(pa, PHYS_LAYOUT, [ra]) @ linalg.embed(pb, PHYS_LAYOUT, [rb])
            probs.append(float(np.real(np.trace(rho @ op))))
    p = np.clip(np.array(probs), 0.0, None)
    return p / p.sum()


_OUTCOME_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])  # a*b for (++, +-, -+, --)


@dataclass(frozen=True)
class ChshReport:
    """Result of one CHSH test in one DOF; shots_per_pair == 0 means exact."""

    dof: str
    i_value: float
    shots_per_pair: int
    stderr: float
    stderr_conservative: float
    epsilon: float       # max(0, 2*sqrt(2) - i_value)
    epsilon_raw: float   # 2*sqrt(2) - i_value, sign preserved
    correlators: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "dof": self.dof,
            "i_value": self.i_value,
            "shots_per_pair": self.shots_per_pair,
            "stderr": self.stderr,
            "stderr_conservative": self.stderr_conservative,
            "epsilon": self.epsilon,
            "epsilon_raw": self.epsilon_raw,
            "correlators": {f"{i}{j}": v for (i, j), v in sorted(self.correlators.items())},
            "counts": {f"{i}{j}": list(map(int, c)) for (i, j), c in sorted(self.counts.items())},
        }


def _finalize_report(dof, i_value, shots, stderr, stderr_cons, correlators, counts) -> ChshReport:
    raw = TSIRELSON - i_value
    return ChshReport(
        dof=dof,
        i_value=i_value,
        shots_per_pair=shots,
        stderr=stderr,
        stderr_conservative=stderr_cons,
        epsilon=max(0.0, raw),
        epsilon_raw=raw,
        correlators=correlators,
        counts=counts,
    )


def exact_report(state: np.ndarray, settings, dof: str) -> ChshReport:
    """ChshReport from exact expectation values (no sampling, shots_per_pair = 0)."""
    corr = {}
    for i, j in _PAIRS:
        p = correlator_distribution(state, settings, dof, i, j)
        corr[(i, j)] = float(_OUTCOME_SIGNS @ p)
    i_value = corr[(0, 0)] + corr[(1, 0)] + corr[(0, 1)] - corr[(1, 1)]
    return _finalize_report(dof, i_value, 0, 0.0, 0.0, corr, {})


def chsh_sampled(state: np.ndarray, settings, dof: str, shots_per_pair: int, seed: int) -> ChshReport:
    """Shot-sampled CHSH test; deterministic for a given seed."""
    if shots_per_pair < 1:
        raise ValueError("shots_per_pair must be >= 1")
    n = shots_per_pair
    corr, counts = {}, {}
    var_sum = 0.0
    for i, j in _PAIRS:
        p = correlator_distribution(state, settings, dof, i, j)
        gen = substream(seed, "chsh", dof, i, j)
        c = gen.multinomial(n, p)
        e = float(_OUTCOME_SIGNS @ c) / n
        corr[(i, j)] = e
        counts[(i, j)] = tuple(int(v) for v in c)
        var_sum += max(0.0, 1.0 - e * e) / n
    i_value = corr[(0, 0)] + corr[(1, 0)] + corr[(0, 1)] - corr[(1, 1)]
    return _finalize_report(
        dof, i_value, n, math.sqrt(var_sum), 2.0 / math.sqrt(n), corr, counts
    )


def iter_shot_records(report: ChshReport):
    """Yield one {dof, i, j, a, b} record per sampled shot (grouped by outcome)."""
    outcome_ab = ((1, 1), (1, -1), (-1, 1), (-1, -1))
    for (i, j), c in sorted(report.counts.items()):
        for (a, b), m in zip(outcome_ab, c):
            for _ in range(int(m)):
                yield {"dof": report.dof, "i": i, "j": j, "a": a, "b": b}


def anticommutator_norm(state: np.ndarray, party: str, dof: str, x: BinaryObservable, z: BinaryObservable) -> float:
    """Norm of (XZ + ZX) applied on one party's qubit: ||M|psi>|| or sqrt(Tr[rho M'M])."""
    m = x.matrix @ z.matrix + z.matrix @ x.matrix
    return _embedded_norm(state, party, dof, m)


def _embedded_norm(state: np.ndarray, party: str, dof: str, m: np.ndarray) -> float:
    state = np.asarray(state, dtype=complex)
    if state.shape[0] == 4:
        layout = linalg.RegisterLayout(("A", "B"))
        role = "A" if party == "A" else "B"
    else:
        layout = PHYS_LAYOUT
        ra, rb = _DOF_ROLES[dof]
        role = ra if party == "A" else rb
    mf = linalg.embed(m, layout, [role])
    if state.ndim == 1:
        return float(np.linalg.norm(mf @ state))
    return float(math.sqrt(max(0.0, np.real(np.trace(state @ mf.conj().T @ mf)))))


def difference_norm(state: np.ndarray, dof: str, oa: BinaryObservable, ob: BinaryObservable) -> float:
    """Norm of (O_A - O_B)|psi> with O_A on Alice's qubit and O_B on Bob's."""
    state = np.asarray(state, dtype=complex)
    if state.shape[0] == 4:
        layout = linalg.RegisterLayout(("A", "B"))
        ra, rb = "A", "B"
    else:
        layout = PHYS_LAYOUT
        ra, rb = _DOF_ROLES[dof]
    mf = linalg.embed(oa.matrix, layout, [ra]) - linalg.embed(ob.matrix, layout, [rb])
    if state.ndim == 1:
        return float(np.linalg.norm(mf @ state))
    return float(math.sqrt(max(0.0, np.real(np.trace(state @ mf.conj().T @ mf)))))


def derived_ab_anticommutators(settings, state: np.ndarray, dof: str) -> tuple[float, float]:
    """Norms of {A0,A1} and {B0,B1} applied to the state in the given DOF."""
    a0 = get_setting(settings, "A", dof, 0).observable
    a1 = get_setting(settings, "A", dof, 1).observable
    b0 = get_setting(settings, "B", dof, 0).observable
    b1 = get_setting(settings, "B", dof, 1).observable
    ma = a0.matrix @ a1.matrix + a1.matrix @ a0.matrix
    mb = b0.matrix @ b1.matrix + b1.matrix @ b0.matrix
    return (
        _embedded_norm(state, "A", dof, ma),
        _embedded_norm(state, "B", dof, mb),
    )
