"""Linear-optical analyzer model for the per-DOF CHSH measurements.

A single photon carries a polarization qubit and a spatial-mode qubit, so its
state lives in a 4-dim space ordered (pol (x) spat).  Analyzers are ordered
stacks of passive elements followed by four detectors:

    PBS            transmits |h>, reflects |v> into the other spatial port
    BS             Hadamard on the spatial qubit
    PolarizationH  Hadamard on the polarization qubit (wave-plate pair)
    BD             spatial bit flip (beam displacer)
    Phase          relative phase on one qubit's |1> component

Measuring sigma_x is a Hadamard followed by the sigma_z analyzer; the rotated
bases (Z +/- X)/sqrt(2) use a Hadamard conjugated by phase elements.  The
detector map sends each output basis state to a (tau_pol, tau_spat) outcome
pair in {+1, -1}^2 and absorbs both the PBS port permutation and any sign
flip of the measured observable (flipping a sign is detector relabelling).
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import ID2, PAULI_X, PAULI_Z, HADAMARD
from .rng import substream
from .chsh import _OUTCOME_SIGNS, _PAIRS, _bob_signs, _finalize_report
from .states import HyperBellLabel, PHYS_LAYOUT

PHOTON_A = ("polA", "spatA")
PHOTON_B = ("polB", "spatB")


@dataclass(frozen=True)
class OpticalElement:
    kind: str                 # PBS | BS | PolarizationH | BD | Phase
    phase: float = 0.0        # used by Phase
    qubit: str = "pol"        # used by Phase: "pol" or "spat"


def element_unitary(e: OpticalElement) -> np.ndarray:
    """4x4 unitary of one element on the (pol (x) spat) single-photon space."""
    if e.kind == "PBS":
        h = np.diag([1.0, 0.0]).astype(complex)
        v = np.diag([0.0, 1.0]).astype(complex)
        return linalg.tensor(h, ID2) + linalg.tensor(v, PAULI_X)
    if e.kind == "BS":
        return linalg.tensor(ID2, HADAMARD)
    if e.kind == "PolarizationH":
        return linalg.tensor(HADAMARD, ID2)
    if e.kind == "BD":
        return linalg.tensor(ID2, PAULI_X)
    if e.kind == "Phase":
        p = np.diag([1.0, np.exp(1j * e.phase)]).astype(complex)
        return linalg.tensor(p, ID2) if e.qubit == "pol" else linalg.tensor(ID2, p)
    raise ValueError(f"unknown element kind {e.kind!r}")


@dataclass(frozen=True)
class AnalyzerCircuit:
    name: str
    elements: tuple[OpticalElement, ...]
    detector_map: dict  # basis index -> (tau_pol, tau_spat)

    def unitary(self) -> np.ndarray:
        u = np.eye(4, dtype=complex)
        for e in self.elements:
            u = element_unitary(e) @ u
        return u


def _basis_angle(basis) -> float | None:
    """None for plain 'z'/'x' stacks; otherwise the angle a of cos(a)Z + sin(a)X."""
    if basis == "z":
        return None
    if basis == "x":
        return None
    if basis == "a0":
        return math.pi / 4
    if basis == "a1":
        return -math.pi / 4
    return float(basis)


def basis_observable(basis, sign: int = 1) -> np.ndarray:
    """2x2 observable measured by the requested basis stack (including detector sign)."""
    if basis == "z":
        m = PAULI_Z
    elif basis == "x":
        m = PAULI_X
    else:
        a = _basis_angle(basis)
        m = math.cos(a) * PAULI_Z + math.sin(a) * PAULI_X
    return sign * m


def _rotation_stack(qubit: str, basis) -> list[OpticalElement]:
    if basis == "z":
        return []
    h = OpticalElement("PolarizationH") if qubit == "pol" else OpticalElement("BS")
    if basis == "x":
        return [h]
    a = _basis_angle(basis)
    # P(pi/2) H P(-a) H P(-pi/2) measures cos(a)Z + sin(a)X
    return [
        OpticalElement("Phase", -math.pi / 2, qubit),
        h,
        OpticalElement("Phase", -a, qubit),
        h,
        OpticalElement("Phase", math.pi / 2, qubit),
    ]


def build_analyzer(pol="z", spat="z", pol_sign: int = 1, spat_sign: int = 1) -> AnalyzerCircuit:
    """Analyzer measuring the (pol, spat) observable pair named by the two bases.

    Bases: 'z', 'x', 'a0' ((Z+X)/sqrt(2)), 'a1' ((Z-X)/sqrt(2)), or a float
    angle a for cos(a)Z + sin(a)X.  Signs of -1 relabel that DOF's detectors,
    which measures the negated observable.
    """
    elements = _rotation_stack("spat", spat) + _rotation_stack("pol", pol) + [OpticalElement("PBS")]
    detector_map = {}
    for k in range(4):
        p, s_out = k >> 1, k & 1
        s_in = s_out ^ p  # undo the PBS port permutation
        detector_map[k] = (pol_sign * (1 - 2 * p), spat_sign * (1 - 2 * s_in))
    return AnalyzerCircuit(f"pol={pol}{'+' if pol_sign > 0 else '-'} spat={spat}{'+' if spat_sign > 0 else '-'}",
                           tuple(elements), detector_map)


FIG1_BASES = (("z", "x"), ("x", "x"), ("x", "z"), ("z", "z"))  # (pol, spat) pairs


def analyzer_projectors(circuit: AnalyzerCircuit) -> dict:
    """POVM (here: four rank-1 projectors) induced on the input state, keyed by outcome."""
    u = circuit.unitary()
    povm = {}
    for k, outcome in circuit.detector_map.items():
        e = np.zeros(4, dtype=complex)
        e[k] = 1.0
        v = u.conj().T @ e
        povm[outcome] = povm.get(outcome, 0) + np.outer(v, v.conj())
    return povm


def analyzer_distribution(state, circuit: AnalyzerCircuit) -> dict:
    """Exact outcome distribution {(tau_pol, tau_spat): probability}."""
    state = np.asarray(state, dtype=complex)
    u = circuit.unitary()
    if state.ndim == 1:
        amp = u @ state
        probs = np.abs(amp) ** 2
    else:
        probs = np.real(np.diag(u @ state @ u.conj().T))
    dist = {}
    for k, outcome in circuit.detector_map.items():
        dist[outcome] = dist.get(outcome, 0.0) + float(probs[k])
    return dist


def measure_with_analyzer(state, circuit: AnalyzerCircuit, rng):
    """Sample one detector click; returns ((tau_pol, tau_spat), collapsed state)."""
    if isinstance(rng, int):
        rng = substream(rng, "analyzer")
    state = np.asarray(state, dtype=complex)
    u = circuit.unitary()
    amp = u @ state
    probs = np.abs(amp) ** 2
    probs = probs / probs.sum()
    k = int(rng.choice(4, p=probs))
    e = np.zeros(4, dtype=complex)
    e[k] = 1.0
    collapsed = u.conj().T @ e
    return circuit.detector_map[k], collapsed


def _alice_analyzer(index: int, rotation_pol: float, rotation_spat: float) -> AnalyzerCircuit:
    base = math.pi / 4 if index == 0 else -math.pi / 4
    return build_analyzer(pol=base + rotation_pol, spat=base + rotation_spat)


def _bob_analyzer(index: int, label: HyperBellLabel) -> AnalyzerCircuit:
    sz_p, sx_p = _bob_signs(label.pol)
    sz_s, sx_s = _bob_signs(label.spat)
    if index == 0:
        return build_analyzer(pol="z", spat="z", pol_sign=sz_p, spat_sign=sz_s)
    return build_analyzer(pol="x", spat="x", pol_sign=sx_p, spat_sign=sx_s)


def chsh_hardware_sampled(
    rho: np.ndarray,
    label: HyperBellLabel,
    shots_per_pair: int,
    seed: int,
    alice_rotation_pol: float = 0.0,
    alice_rotation_spat: float = 0.0,
) -> dict:
    """CHSH test in both DOFs through the analyzer hardware model.

    Each photon passes one analyzer measuring both of its DOFs jointly, as in
    the optical setup, so one shot feeds both DOFs' correlators.  Setting pair
    (i, j) uses Alice's analyzer i and Bob's analyzer j in both DOFs at once.
    Returns {"P": ChshReport, "S": ChshReport}.
    """
    if shots_per_pair < 1:
        raise ValueError("shots_per_pair must be >= 1")
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = linalg.dm(rho)
    n = shots_per_pair
    corr = {"P": {}, "S": {}}
    counts = {"P": {}, "S": {}}
    var = {"P": 0.0, "S": 0.0}
    for i, j in _PAIRS:
        ca = _alice_analyzer(i, alice_rotation_pol, alice_rotation_spat)
        cb = _bob_analyzer(j, label)
        u = (
            linalg.embed(ca.unitary(), PHYS_LAYOUT, PHOTON_A)
            @ linalg.embed(cb.unitary(), PHYS_LAYOUT, PHOTON_B)
        )
        probs = np.clip(np.real(np.diag(u @ rho @ u.conj().T)), 0.0, None)
        probs = probs / probs.sum()
        gen = substream(seed, "hw-chsh", i, j)
        c16 = gen.multinomial(n, probs)
        # fold the 16 joint detector outcomes into per-DOF (a, b) counts
        fold = {"P": np.zeros(4, dtype=np.int64), "S": np.zeros(4, dtype=np.int64)}
        for k in range(16):
            if not c16[k]:
                continue
            pa, pb, sa, sb = (k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1
            tp_a, ts_a = ca.detector_map[2 * pa + sa]
            tp_b, ts_b = cb.detector_map[2 * pb + sb]
            fold["P"][_ab_slot(tp_a, tp_b)] += c16[k]
            fold["S"][_ab_slot(ts_a, ts_b)] += c16[k]
        for dof in ("P", "S"):
            e = float(_OUTCOME_SIGNS @ fold[dof]) / n
            corr[dof][(i, j)] = e
            counts[dof][(i, j)] = tuple(int(v) for v in fold[dof])
            var[dof] += max(0.0, 1.0 - e * e) / n
    out = {}
    for dof in ("P", "S"):
        c = corr[dof]
        i_value = c[(0, 0)] + c[(1, 0)] + c[(0, 1)] - c[(1, 1)]
        out[dof] = _finalize_report(
            dof, i_value, n, math.sqrt(var[dof]), 2.0 / math.sqrt(n), c, counts[dof]
        )
    return out


def _ab_slot(a: int, b: int) -> int:
    return {(1, 1): 0, (1, -1): 1, (-1, 1): 2, (-1, -1): 3}[(a, b)]


def circuit_to_json(circuit: AnalyzerCircuit) -> str:
    """JSON description of an analyzer: ordered element list plus detector map."""
    doc = {
        "name": circuit.name,
        "elements": [
            {"kind": e.kind, **({"phase": e.phase, "qubit": e.qubit} if e.kind == "Phase" else {})}
            for e in circuit.elements
        ],
        "detector_map": {str(k): list(v) for k, v in sorted(circuit.detector_map.items())},
    }
    return json.dumps(doc, indent=2)
