"""Hyperentangled Bell states over polarization and spatial-mode qubits.

A hyperentangled pair carries one Bell state in polarization and one in the
spatial modes, giving sixteen product combinations.  The physical register is
four qubits in the order (polA, polB, spatA, spatB).  Noise is modelled per
DOF: Werner (depolarizing) admixture, single-qubit phase damping, and a
rotation of Alice's measurement observables (consumed by :mod:`.chsh` and
:mod:`.isometry`, not applied to the state itself).
"""

import enum
from dataclasses import asdict, dataclass

import numpy as np

from . import linalg
from .linalg import RegisterLayout, tensor, dm


class BellLabel(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def key(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "BellLabel":
        t = text.strip().lower().replace("_", "").replace(" ", "")
        aliases = {
            "phi+": cls.PHI_PLUS, "phiplus": cls.PHI_PLUS,
            "phi-": cls.PHI_MINUS, "phiminus": cls.PHI_MINUS,
            "psi+": cls.PSI_PLUS, "psiplus": cls.PSI_PLUS,
            "psi-": cls.PSI_MINUS, "psiminus": cls.PSI_MINUS,
        }
        if t not in aliases:
            raise ValueError(f"unknown Bell label {text!r}")
        return aliases[t]


@dataclass(frozen=True)
class HyperBellLabel:
    """Pair of Bell labels: polarization DOF first, spatial-mode DOF second."""

    pol: BellLabel
    spat: BellLabel

    @property
    def key(self) -> str:
        return f"{self.pol.key},{self.spat.key}"

    @classmethod
    def parse(cls, text: str) -> "HyperBellLabel":
        parts = text.split(",")
        if len(parts) != 2:
            raise ValueError(f"expected 'POL,SPAT', got {text!r}")
        return cls(BellLabel.parse(parts[0]), BellLabel.parse(parts[1]))


ALL_HYPER_LABELS = tuple(
    HyperBellLabel(p, s) for p in BellLabel for s in BellLabel
)

PHYS_ROLES = ("polA", "polB", "spatA", "spatB")
PHYS_LAYOUT = RegisterLayout(PHYS_ROLES)
POL_ROLES = ("polA", "polB")
SPAT_ROLES = ("spatA", "spatB")

_BELL_INDEX = {
    BellLabel.PHI_PLUS: 0,
    BellLabel.PHI_MINUS: 1,
    BellLabel.PSI_PLUS: 2,
    BellLabel.PSI_MINUS: 3,
}


def bell_vector(label: BellLabel) -> np.ndarray:
    """Canonical two-qubit Bell vector in the fixed basis convention."""
    return linalg._bell_vectors()[_BELL_INDEX[label]].copy()


def bell_projector(label: BellLabel) -> np.ndarray:
    return linalg.bell_projectors()[_BELL_INDEX[label]]


def hyper_bell_vector(label: HyperBellLabel, layout: RegisterLayout = PHYS_LAYOUT) -> np.ndarray:
    """16-dim hyperentangled Bell vector, reordered to the requested layout."""
    for role in PHYS_ROLES:
        if role not in layout.roles:
            raise ValueError(f"layout is missing physical role {role!r}")
    if layout.n_qubits != 4:
        raise ValueError("hyper Bell states live on exactly the four physical qubits")
    vec = tensor(bell_vector(label.pol), bell_vector(label.spat))
    return linalg.reorder(vec, PHYS_LAYOUT, layout)


def werner(label: BellLabel, p: float) -> np.ndarray:
    """Two-qubit Werner state p|bell><bell| + (1-p) I/4."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("Werner parameter must lie in [0, 1]")
    return p * dm(bell_vector(label)) + (1 - p) * np.eye(4) / 4


@dataclass(frozen=True)
class NoiseSpec:
    """Per-DOF noise: Werner admixture, phase damping, Alice-observable rotation (radians)."""

    werner_p_pol: float = 1.0
    werner_p_spat: float = 1.0
    dephase_gamma_pol: float = 0.0
    dephase_gamma_spat: float = 0.0
    rotation_angle_pol: float = 0.0
    rotation_angle_spat: float = 0.0

    def __post_init__(self):
        for name in ("werner_p_pol", "werner_p_spat", "dephase_gamma_pol", "dephase_gamma_spat"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    @property
    def is_ideal(self) -> bool:
        return self == NoiseSpec()

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        return cls(**d)


def _dephase_qubit(rho: np.ndarray, layout: RegisterLayout, role: str, gamma: float) -> np.ndarray:
    k0 = np.diag([1.0, np.sqrt(1 - gamma)]).astype(complex)
    k1 = np.diag([0.0, np.sqrt(gamma)]).astype(complex)
    out = np.zeros_like(rho)
    for k in (k0, k1):
        kf = linalg.embed(k, layout, [role])
        out += kf @ rho @ kf.conj().T
    return out


def _werner_dof(rho: np.ndarray, layout: RegisterLayout, dof_roles, p: float) -> np.ndarray:
    if p == 1.0:
        return rho
    other = [r for r in layout.roles if r not in dof_roles]
    rest = linalg.partial_trace(rho, layout, other)
    # I/4 on the DOF tensored with the untouched marginal, back in layout order
    mixed = linalg.embed(rest, layout, other) @ linalg.embed(np.eye(4) / 4, layout, dof_roles)
    return p * rho + (1 - p) * mixed


def apply_noise(state: np.ndarray, spec: NoiseSpec, layout: RegisterLayout = PHYS_LAYOUT) -> np.ndarray:
    """Noisy 16x16 density operator from a pure hyperentangled state vector."""
    state = np.asarray(state, dtype=complex)
    if not linalg.is_normalized(state):
        raise ValueError("input state must be normalized")
    rho = dm(state)
    rho = _werner_dof(rho, layout, POL_ROLES, spec.werner_p_pol)
    rho = _werner_dof(rho, layout, SPAT_ROLES, spec.werner_p_spat)
    if spec.dephase_gamma_pol > 0:
        for role in POL_ROLES:
            rho = _dephase_qubit(rho, layout, role, spec.dephase_gamma_pol)
    if spec.dephase_gamma_spat > 0:
        for role in SPAT_ROLES:
            rho = _dephase_qubit(rho, layout, role, spec.dephase_gamma_spat)
    return rho


def source_density(label: HyperBellLabel, spec: NoiseSpec = NoiseSpec()) -> np.ndarray:
    """Density operator emitted by a (possibly noisy) hyperentanglement source."""
    return apply_noise(hyper_bell_vector(label), spec)
