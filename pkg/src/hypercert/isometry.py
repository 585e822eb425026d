"""Swap-isometry certification circuits and Bell-state-measurement branching.

The one-DOF swap isometry attaches an auxiliary qubit per party in |0>,
then applies H(aux), controlled-Z(aux -> system), H(aux), controlled-X
(aux -> system), where Z and X are the parties' (possibly imperfect) binary
observables.  With ideal observables the circuit moves any Bell state of the
system onto the auxiliary pair and leaves the system in |00>, so a Bell-state
measurement (BSM) on the auxiliaries certifies the input.

Step 1 runs this isometry on the spatial-mode qubits with one auxiliary
spatial qubit per party; it never touches polarization.  Step 2 runs two
site-local polarization isometries whose controlled gates additionally
condition on the physical photon's spatial qubit (site a1b1 fires on spatial
value 0, site a2b2 on value 1); the idle site's auxiliaries see only their
Hadamard pair and stay in |hh> = (phi+ + phi-)/sqrt(2).  Spatial psi-family
states are mapped into the phi family with a beam-displacer bit flip before
the circuit and restored afterwards.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import RegisterLayout, PAULI_X, PAULI_Z, HADAMARD, dm
from .chsh import BinaryObservable, rotated, DOF_POL, DOF_SPAT
from .states import (
    BellLabel,
    HyperBellLabel,
    PHYS_LAYOUT,
    POL_ROLES,
    SPAT_ROLES,
    bell_vector,
)

SINGLE_LAYOUT = RegisterLayout(("A", "B", "auxA", "auxB"))
STEP1_LAYOUT = RegisterLayout(("polA", "polB", "spatA", "spatB", "auxA", "auxB"))
STEP2_LAYOUT = RegisterLayout(
    ("polA", "polB", "spatA", "spatB", "auxA1", "auxB1", "auxA2", "auxB2")
)

_SPAT_LAYOUT = RegisterLayout(SPAT_ROLES)


@dataclass(frozen=True)
class IsometryConfig:
    """Observables driving one DOF's swap isometry; override for robustness studies."""

    dof: str
    za: BinaryObservable
    xa: BinaryObservable
    zb: BinaryObservable
    xb: BinaryObservable

    @classmethod
    def canonical(cls, dof: str) -> "IsometryConfig":
        z = BinaryObservable(PAULI_Z, "Z")
        x = BinaryObservable(PAULI_X, "X")
        return cls(dof=dof, za=z, xa=x, zb=z, xb=x)

    def with_alice_rotation(self, theta: float) -> "IsometryConfig":
        return IsometryConfig(
            dof=self.dof,
            za=rotated(self.za, theta),
            xa=rotated(self.xa, theta),
            zb=self.zb,
            xb=self.xb,
        )


def _swap_stages(layout: RegisterLayout, parties) -> list[np.ndarray]:
    """Gate list of the swap isometry; `parties` holds (system, aux, Z, X, extra controls)."""
    gates = []
    for _, aux, _, _, _ in parties:
        gates.append(linalg.embed(HADAMARD, layout, [aux]))
    for sys, aux, z, _, extra in parties:
        gates.append(linalg.controlled(z.matrix, layout, [sys], {aux: 1, **extra}))
    for _, aux, _, _, _ in parties:
        gates.append(linalg.embed(HADAMARD, layout, [aux]))
    for sys, aux, _, x, extra in parties:
        gates.append(linalg.controlled(x.matrix, layout, [sys], {aux: 1, **extra}))
    return gates


def _compose(layout: RegisterLayout, gates) -> np.ndarray:
    u = np.eye(layout.dim, dtype=complex)
    for g in gates:
        u = g @ u
    return u


_UNITARY_CACHE: dict = {}


def _cfg_key(kind: str, cfg: IsometryConfig):
    return (kind, cfg.dof) + tuple(o.matrix.tobytes() for o in (cfg.za, cfg.xa, cfg.zb, cfg.xb))


def _cached(kind: str, cfg: IsometryConfig, build):
    key = _cfg_key(kind, cfg)
    if key not in _UNITARY_CACHE:
        if len(_UNITARY_CACHE) > 64:
            _UNITARY_CACHE.clear()
        _UNITARY_CACHE[key] = build()
    return _UNITARY_CACHE[key]


def single_dof_unitary(cfg: IsometryConfig) -> np.ndarray:
    """Swap isometry on the generic (A, B, auxA, auxB) register."""
    parties = [("A", "auxA", cfg.za, cfg.xa, {}), ("B", "auxB", cfg.zb, cfg.xb, {})]
    return _cached("single", cfg, lambda: _compose(SINGLE_LAYOUT, _swap_stages(SINGLE_LAYOUT, parties)))


def step1_unitary(cfg: IsometryConfig) -> np.ndarray:
    if cfg.dof != DOF_SPAT:
        raise ValueError("step 1 runs on the spatial-mode DOF")
    parties = [
        ("spatA", "auxA", cfg.za, cfg.xa, {}),
        ("spatB", "auxB", cfg.zb, cfg.xb, {}),
    ]
    return _cached("step1", cfg, lambda: _compose(STEP1_LAYOUT, _swap_stages(STEP1_LAYOUT, parties)))


def step2_unitary(cfg: IsometryConfig) -> np.ndarray:
    if cfg.dof != DOF_POL:
        raise ValueError("step 2 runs on the polarization DOF")
    parties = [
        ("polA", "auxA1", cfg.za, cfg.xa, {"spatA": 0}),
        ("polB", "auxB1", cfg.zb, cfg.xb, {"spatB": 0}),
        ("polA", "auxA2", cfg.za, cfg.xa, {"spatA": 1}),
        ("polB", "auxB2", cfg.zb, cfg.xb, {"spatB": 1}),
    ]
    return _cached("step2", cfg, lambda: _compose(STEP2_LAYOUT, _swap_stages(STEP2_LAYOUT, parties)))


def swap_isometry_single(state: np.ndarray, cfg: IsometryConfig) -> np.ndarray:
    """Run the generic one-DOF swap isometry on (A, B, auxA, auxB) with aux in |00>."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (16,):
        raise ValueError("expected a 16-dim vector over (A, B, auxA, auxB)")
    block = state.reshape(4, 4)
    if np.max(np.abs(block[:, 1:])) > 1e-12:
        raise ValueError("auxiliary qubits must start in |00>")
    return single_dof_unitary(cfg) @ state


def success_rule(label: HyperBellLabel) -> frozenset:
    """Accepted step-2 BSM outcome pairs for the claimed label (depends on its pol part)."""
    pp, pm = BellLabel.PHI_PLUS, BellLabel.PHI_MINUS
    if label.pol == BellLabel.PHI_PLUS:
        return frozenset({(pp, pp)})
    if label.pol == BellLabel.PHI_MINUS:
        return frozenset({(pm, pm)})
    psi = label.pol  # PSI_PLUS or PSI_MINUS
    return frozenset({(psi, pp), (psi, pm), (pp, psi), (pm, psi)})


@dataclass(frozen=True)
class BsmBranch:
    label: BellLabel
    probability: float
    posterior: np.ndarray | None    # state of the untouched registers, or None if p = 0
    posterior_layout: RegisterLayout | None


def classify_bsm(state: np.ndarray, layout: RegisterLayout | None = None, pair=None) -> list[BsmBranch]:
    """Project one qubit pair onto the four Bell states; returns every branch."""
    state = np.asarray(state, dtype=complex)
    if layout is None:
        if state.shape[0] != 4:
            raise ValueError("layout required for registers larger than one pair")
        layout, pair = RegisterLayout(("A", "B")), ("A", "B")
    rest_layout = layout.drop(pair)
    branches = []
    for label in BellLabel:
        probe = bell_vector(label)
        if state.ndim == 1:
            rest = linalg.partial_inner(state, layout, pair, probe)
            p = float(np.real(np.vdot(rest, rest)))
            post = rest / math.sqrt(p) if p > 1e-15 else None
        else:
            red = linalg.partial_sandwich(state, layout, pair, probe)
            p = float(np.real(np.trace(red))) if red.size > 1 else float(np.real(red[0, 0]))
            post = red / p if p > 1e-15 else None
        if post is not None and post.size == 1:
            post, out_layout = None, None
        else:
            out_layout = rest_layout if post is not None else None
        branches.append(BsmBranch(label, p, post, out_layout))
    return branches


@dataclass(frozen=True)
class CertificationRecord:
    """One BSM outcome branch of a certification run."""

    claimed: HyperBellLabel
    step: str                      # "spatial" or "polarization"
    bsm: tuple                     # (BellLabel,) for step 1, (BellLabel, BellLabel) for step 2
    accepted: bool
    probability: float
    posterior: np.ndarray | None   # over (polA, polB, spatA, spatB)
    extracted_fidelity: float
    junk_spatial_entropy: float

    def as_dict(self) -> dict:
        return {
            "claimed": self.claimed.key,
            "step": self.step,
            "bsm": [b.key for b in self.bsm],
            "accepted": self.accepted,
            "probability": self.probability,
            "extracted_fidelity": self.extracted_fidelity,
            "junk_spatial_entropy": self.junk_spatial_entropy,
        }


@dataclass(frozen=True)
class Step1Result:
    records: list
    extracted_fidelity: float
    acceptance_probability: float
    pol_reduced_in: np.ndarray
    pol_reduced_out: np.ndarray

    def branch_probabilities(self) -> dict:
        return {r.bsm[0].key: r.probability for r in self.records}


@dataclass(frozen=True)
class Step2Result:
    records: list
    extracted_fidelity: float
    acceptance_probability: float
    bd_applied: bool

    def branch_probabilities(self) -> dict:
        return {f"{r.bsm[0].key}|{r.bsm[1].key}": r.probability for r in self.records}


def write_records(path, records) -> None:
    """Line-delimited JSON export of certification records (posteriors omitted)."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.as_dict()) + "\n")


def _junk_spatial_entropy(posterior) -> float:
    """Entanglement (bits) of the spatial junk across A|B; nan when not a pure subsystem."""
    if posterior is None:
        return float("nan")
    rho = dm(posterior) if posterior.ndim == 1 else posterior
    rho_s = linalg.partial_trace(rho, PHYS_LAYOUT, SPAT_ROLES)
    if abs(linalg.purity(rho_s) - 1.0) > 1e-9:
        return float("nan")
    lam = np.clip(np.linalg.eigvalsh(linalg.partial_trace(rho_s, _SPAT_LAYOUT, ["spatA"])), 0.0, 1.0)
    lam = lam[lam > 1e-12]
    return float(-np.sum(lam * np.log2(lam)))


def _attach_aux(state: np.ndarray, n_aux: int):
    """Tensor |0...0> auxiliaries onto a 16-dim physical vector or density."""
    state = np.asarray(state, dtype=complex)
    aux = np.zeros(2**n_aux, dtype=complex)
    aux[0] = 1.0
    if state.ndim == 1:
        return np.kron(state, aux), True
    return np.kron(state, dm(aux)), False


def run_step1_spatial(state: np.ndarray, claimed: HyperBellLabel, cfg: IsometryConfig | None = None) -> Step1Result:
    """Step 1: spatial swap isometry plus spatial BSM on the auxiliary pair."""
    cfg = cfg or IsometryConfig.canonical(DOF_SPAT)
    full, pure = _attach_aux(state, 2)
    u = step1_unitary(cfg)
    if pure:
        out = u @ full
        rho_out = None
        pol_in = linalg.partial_trace(dm(np.asarray(state, dtype=complex)), PHYS_LAYOUT, POL_ROLES)
    else:
        out = None
        rho_out = u @ full @ u.conj().T
        pol_in = linalg.partial_trace(np.asarray(state, dtype=complex), PHYS_LAYOUT, POL_ROLES)
    evolved = out if pure else rho_out
    rho_evolved = dm(evolved) if pure else evolved
    pol_out = linalg.partial_trace(rho_evolved, STEP1_LAYOUT, POL_ROLES)
    aux_reduced = linalg.partial_trace(rho_evolved, STEP1_LAYOUT, ("auxA", "auxB"))
    extracted = linalg.fidelity(aux_reduced, bell_vector(claimed.spat))

    records = []
    accept_p = 0.0
    for br in classify_bsm(evolved, STEP1_LAYOUT, ("auxA", "auxB")):
        accepted = br.label == claimed.spat
        if accepted:
            accept_p += br.probability
        records.append(
            CertificationRecord(
                claimed=claimed,
                step="spatial",
                bsm=(br.label,),
                accepted=accepted,
                probability=br.probability,
                posterior=br.posterior,
                extracted_fidelity=extracted,
                junk_spatial_entropy=_junk_spatial_entropy(br.posterior),
            )
        )
    return Step1Result(records, extracted, accept_p, pol_in, pol_out)


def _site_conditioned_fidelity(evolved, pure: bool, claimed: HyperBellLabel) -> float:
    """Fidelity of the active site's auxiliary pair with the claimed polarization Bell state."""
    target = bell_vector(claimed.pol)
    for site_vec, aux_pair in (
        (np.array([1, 0, 0, 0], dtype=complex), ("auxA1", "auxB1")),
        (np.array([0, 0, 0, 1], dtype=complex), ("auxA2", "auxB2")),
    ):
        if pure:
            rest = linalg.partial_inner(evolved, STEP2_LAYOUT, SPAT_ROLES, site_vec)
            p = float(np.real(np.vdot(rest, rest)))
            if p <= 1e-12:
                continue
            layout = STEP2_LAYOUT.drop(SPAT_ROLES)
            red = linalg.partial_trace(dm(rest / math.sqrt(p)), layout, aux_pair)
        else:
            red_all = linalg.partial_sandwich(evolved, STEP2_LAYOUT, SPAT_ROLES, site_vec)
            p = float(np.real(np.trace(red_all)))
            if p <= 1e-12:
                continue
            layout = STEP2_LAYOUT.drop(SPAT_ROLES)
            red = linalg.partial_trace(red_all / p, layout, aux_pair)
        return linalg.fidelity(red, target)
    return 0.0


def run_step2_polarization(state: np.ndarray, claimed: HyperBellLabel, cfg: IsometryConfig | None = None) -> Step2Result:
    """Step 2: dual-site polarization swap isometries plus BSM on both auxiliary pairs.

    For spatial psi-family claims the beam-displacer bit flip is applied to
    Alice's spatial qubit before the circuit and undone on every posterior.
    """
    cfg = cfg or IsometryConfig.canonical(DOF_POL)
    bd = claimed.spat in (BellLabel.PSI_PLUS, BellLabel.PSI_MINUS)
    full, pure = _attach_aux(state, 4)
    if bd:
        bd_full = linalg.embed(PAULI_X, STEP2_LAYOUT, ["spatA"])
        full = bd_full @ full if pure else bd_full @ full @ bd_full.conj().T
    u = step2_unitary(cfg)
    evolved = u @ full if pure else u @ full @ u.conj().T

    extracted = _site_conditioned_fidelity(evolved, pure, claimed)
    accepted_set = success_rule(claimed)
    bd_phys = linalg.embed(PAULI_X, PHYS_LAYOUT, ["spatA"]) if bd else None

    records = []
    accept_p = 0.0
    mid_layout = STEP2_LAYOUT.drop(("auxA1", "auxB1"))
    for b1 in BellLabel:
        probe1 = bell_vector(b1)
        if pure:
            rest1 = linalg.partial_inner(evolved, STEP2_LAYOUT, ("auxA1", "auxB1"), probe1)
        else:
            rest1 = linalg.partial_sandwich(evolved, STEP2_LAYOUT, ("auxA1", "auxB1"), probe1)
        for b2 in BellLabel:
            probe2 = bell_vector(b2)
            if pure:
                rest2 = linalg.partial_inner(rest1, mid_layout, ("auxA2", "auxB2"), probe2)
                p = float(np.real(np.vdot(rest2, rest2)))
                post = rest2 / math.sqrt(p) if p > 1e-15 else None
                if post is not None and bd:
                    post = bd_phys @ post
            else:
                red = linalg.partial_sandwich(rest1, mid_layout, ("auxA2", "auxB2"), probe2)
                p = float(np.real(np.trace(red)))
                post = red / p if p > 1e-15 else None
                if post is not None and bd:
                    post = bd_phys @ post @ bd_phys.conj().T
            accepted = (b1, b2) in accepted_set
            if accepted:
                accept_p += p
            records.append(
                CertificationRecord(
                    claimed=claimed,
                    step="polarization",
                    bsm=(b1, b2),
                    accepted=accepted,
                    probability=p,
                    posterior=post,
                    extracted_fidelity=extracted,
                    junk_spatial_entropy=_junk_spatial_entropy(post),
                )
            )
    return Step2Result(records, extracted, accept_p, bd)
