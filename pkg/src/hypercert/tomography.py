"""Four-qubit Pauli state tomography by linear inversion.

Measurements run over all 81 settings in {X, Y, Z}^4; outcomes are 4-bit
strings ordered as (polA, polB, spatA, spatB).  Reconstruction averages each
of the 256 Pauli-string expectations over every compatible setting (identity
slots marginalize), assembles rho by the Pauli inversion formula, and
projects onto the density-operator cone by clipping negative eigenvalues and
renormalizing.  An exact mode feeds Born probabilities straight into the
estimator, separating statistical error from algorithmic error.
"""

import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import ID2, PAULI_X, PAULI_Y, PAULI_Z, HADAMARD
from .rng import substream
from .states import HyperBellLabel, PHYS_LAYOUT, POL_ROLES, SPAT_ROLES, bell_vector, hyper_bell_vector

N_QUBITS = 4
SETTINGS = tuple("".join(s) for s in itertools.product("XYZ", repeat=N_QUBITS))

_SDG = np.diag([1.0, -1.0j]).astype(complex)
_BASIS_ROTATION = {"X": HADAMARD, "Y": HADAMARD @ _SDG, "Z": ID2}
_PAULI = {"I": ID2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


@dataclass(frozen=True)
class PauliSettingCounts:
    """Outcome counts for one measurement setting; counts may be float in exact mode."""

    setting: str
    counts: dict  # 4-bit outcome string -> count

    @property
    def shots(self) -> float:
        return sum(self.counts.values())


def setting_rotation(setting: str) -> np.ndarray:
    """Unitary rotating the setting's local eigenbases onto the computational basis."""
    return linalg.tensor(*[_BASIS_ROTATION[ch] for ch in setting])


def setting_probabilities(rho: np.ndarray, setting: str) -> np.ndarray:
    """Born probabilities of the 16 outcomes for one setting."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = linalg.dm(rho)
    u = setting_rotation(setting)
    p = np.clip(np.real(np.diag(u @ rho @ u.conj().T)), 0.0, None)
    return p / p.sum()


def _outcome_string(k: int) -> str:
    return format(k, "04b")


def simulate_tomography(rho: np.ndarray, shots_per_setting: int, seed: int) -> list[PauliSettingCounts]:
    """Multinomial counts for all 81 settings; deterministic for a given seed."""
    if shots_per_setting < 1:
        raise ValueError("shots_per_setting must be >= 1")
    out = []
    for setting in SETTINGS:
        p = setting_probabilities(rho, setting)
        gen = substream(seed, "tomo", setting)
        c = gen.multinomial(shots_per_setting, p)
        out.append(PauliSettingCounts(setting, {_outcome_string(k): int(c[k]) for k in range(16) if c[k]}))
    return out


def exact_tomography(rho: np.ndarray) -> list[PauliSettingCounts]:
    """Exact mode: Born probabilities used directly as (fractional) counts."""
    out = []
    for setting in SETTINGS:
        p = setting_probabilities(rho, setting)
        out.append(PauliSettingCounts(setting, {_outcome_string(k): float(p[k]) for k in range(16)}))
    return out


def _pauli_string_matrix(string: str) -> np.ndarray:
    return linalg.tensor(*[_PAULI[ch] for ch in string])


def _project_to_density(rho: np.ndarray) -> np.ndarray:
    """Closest density operator in Frobenius norm: subtract-and-clip on the spectrum."""
    vals, vecs = np.linalg.eigh(rho)
    lam = vals[::-1]  # descending
    mu = np.zeros_like(lam)
    for i in range(len(lam) - 1, -1, -1):
        theta = (lam[: i + 1].sum() - 1.0) / (i + 1)
        if lam[i] - theta > 0:
            mu[: i + 1] = lam[: i + 1] - theta
            break
    return (vecs * mu[::-1]) @ vecs.conj().T


def reconstruct(counts: list[PauliSettingCounts], clip: bool = True) -> np.ndarray:
    """Linear-inversion estimate of the 16x16 density operator.

    Every Pauli-string expectation is averaged over all settings whose letters
    match on the string's non-identity slots.  With `clip`, the raw estimate
    is projected onto the density-operator cone (negative eigenvalues removed,
    trace restored to 1 by the closest-matrix projection).
    """
    by_setting = {c.setting: c for c in counts}
    missing = set(SETTINGS) - set(by_setting)
    if missing:
        raise ValueError(f"missing {len(missing)} tomography settings, e.g. {sorted(missing)[:3]}")

    # expectation sums and setting multiplicities per Pauli string
    acc = {}
    hits = {}
    for setting, c in by_setting.items():
        shots = c.shots
        freq = {o: v / shots for o, v in c.counts.items()}
        for mask in range(16):  # subset of qubits kept non-identity
            string = "".join(setting[q] if (mask >> (3 - q)) & 1 else "I" for q in range(4))
            val = 0.0
            for outcome, f in freq.items():
                parity = sum(int(outcome[q]) for q in range(4) if (mask >> (3 - q)) & 1) & 1
                val += f * (1 - 2 * parity)
            acc[string] = acc.get(string, 0.0) + val
            hits[string] = hits.get(string, 0) + 1

    rho = np.zeros((16, 16), dtype=complex)
    for string, total in acc.items():
        rho += (total / hits[string]) * _pauli_string_matrix(string)
    rho /= 16.0

    if clip:
        rho = _project_to_density(rho)
    return rho


@dataclass(frozen=True)
class DofFidelities:
    f_p: float
    f_s: float
    f_t_product: float
    f_full: float

    def as_dict(self) -> dict:
        return {"f_p": self.f_p, "f_s": self.f_s, "f_t_product": self.f_t_product, "f_full": self.f_full}


def dof_fidelities(rho_hat: np.ndarray, label: HyperBellLabel) -> DofFidelities:
    """Per-DOF, product, and full fidelities of a 16x16 state against a hyper Bell label."""
    f_p = linalg.fidelity(linalg.partial_trace(rho_hat, PHYS_LAYOUT, POL_ROLES), bell_vector(label.pol))
    f_s = linalg.fidelity(linalg.partial_trace(rho_hat, PHYS_LAYOUT, SPAT_ROLES), bell_vector(label.spat))
    f_full = linalg.fidelity(rho_hat, hyper_bell_vector(label))
    return DofFidelities(f_p, f_s, f_p * f_s, f_full)


def write_counts(path, counts: list[PauliSettingCounts]) -> None:
    """Line-delimited counts: one {setting, outcome, count} record per line."""
    with open(path, "w") as fh:
        for c in counts:
            for outcome, n in sorted(c.counts.items()):
                fh.write(json.dumps({"setting": c.setting, "outcome": outcome, "count": n}) + "\n")


def read_counts(path) -> list[PauliSettingCounts]:
    acc = {}
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            acc.setdefault(rec["setting"], {})[rec["outcome"]] = rec["count"]
    return [PauliSettingCounts(s, c) for s, c in acc.items()]
