"""Robust fidelity lower bounds from imperfect CHSH violations.

A CHSH deficit eps = 2*sqrt(2) - I in one DOF limits how far the parties'
observables can stray from ideal anticommuting pairs, through the derived
slack parameters

    eps1 = 2 * (eps * sqrt(2))**(1/2)
    eps2 = 4 * (eps * sqrt(2))**(1/4)

and bounds the extractable Bell-state fidelity in that DOF from below:

    F >= 1 - (9*sqrt(2)*eps + 2**(1/4)*100*sqrt(eps) + 2**(3/8)*60*eps**(3/4)) / 4

The total two-DOF fidelity is bounded by the product of the per-DOF bounds.
These bounds are loose by construction: the per-DOF bound reaches 0.5 near
eps = 2.40e-4 and crosses zero near eps = 9.07e-4.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import chsh
from .chsh import BinaryObservable, DOF_POL, DOF_SPAT


def eps_derived(eps: float) -> tuple[float, float]:
    """Slack parameters (eps1, eps2) for a CHSH deficit eps >= 0."""
    if eps < 0:
        raise ValueError("deficit must be nonnegative")
    root = eps * math.sqrt(2)
    return 2 * math.sqrt(root), 4 * root**0.25


def fidelity_lower_bound(eps: float) -> float:
    """Raw (unclamped, possibly negative) per-DOF fidelity lower bound."""
    if eps < 0:
        raise ValueError("deficit must be nonnegative")
    penalty = (
        9 * math.sqrt(2) * eps
        + 2**0.25 * 100 * math.sqrt(eps)
        + 2**0.375 * 60 * eps**0.75
    )
    return 1 - penalty / 4


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class FidelityBound:
    """Per-DOF and total fidelity lower bounds, both raw and clamped to [0, 1].

    The raw total bound is the product of the per-DOF raw bounds while both
    are nonnegative; once either is vacuous (negative) the product of two
    negatives would spuriously turn positive, so the raw total falls back to
    the smaller per-DOF raw bound, keeping the sweep monotone.
    """

    eps_p: float
    eps_s: float
    eps1_p: float
    eps2_p: float
    eps1_s: float
    eps2_s: float
    f_p_lb_raw: float
    f_s_lb_raw: float
    f_t_lb_raw: float
    f_p_lb: float
    f_s_lb: float
    f_t_lb: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "eps_p", "eps_s", "eps1_p", "eps2_p", "eps1_s", "eps2_s",
            "f_p_lb_raw", "f_s_lb_raw", "f_t_lb_raw", "f_p_lb", "f_s_lb", "f_t_lb",
        )}


def total_bound(eps_p: float, eps_s: float) -> FidelityBound:
    """Fidelity lower bounds for the given per-DOF CHSH deficits."""
    e1p, e2p = eps_derived(eps_p)
    e1s, e2s = eps_derived(eps_s)
    fp = fidelity_lower_bound(eps_p)
    fs = fidelity_lower_bound(eps_s)
    ft_raw = fp * fs if min(fp, fs) >= 0 else min(fp, fs)
    return FidelityBound(
        eps_p=eps_p, eps_s=eps_s,
        eps1_p=e1p, eps2_p=e2p, eps1_s=e1s, eps2_s=e2s,
        f_p_lb_raw=fp, f_s_lb_raw=fs, f_t_lb_raw=ft_raw,
        f_p_lb=_clamp01(fp), f_s_lb=_clamp01(fs), f_t_lb=_clamp01(ft_raw),
    )


@dataclass(frozen=True)
class NormCheck:
    dof: str
    name: str
    value: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.value <= self.bound + 1e-12


def check_norm_bounds(state: np.ndarray, observables: dict, eps: dict) -> list[NormCheck]:
    """Check the eight observable-distance inequalities implied by the deficits.

    `observables` maps each DOF ("P", "S") to (XA, ZA, XB, ZB); `eps` maps the
    DOF to its exact CHSH deficit.  Per DOF the checked inequalities are
    ||{XA,ZA} psi|| <= 2*eps1, ||{XB,ZB} psi|| <= 2*eps1,
    ||(XA-XB) psi|| <= 2*eps2 and ||(ZA-ZB) psi|| <= 2*eps2.
    """
    out = []
    for dof in (DOF_POL, DOF_SPAT):
        xa, za, xb, zb = observables[dof]
        e1, e2 = eps_derived(eps[dof])
        out.append(NormCheck(dof, "anticommutator_A", chsh.anticommutator_norm(state, "A", dof, xa, za), 2 * e1))
        out.append(NormCheck(dof, "anticommutator_B", chsh.anticommutator_norm(state, "B", dof, xb, zb), 2 * e1))
        out.append(NormCheck(dof, "x_difference", chsh.difference_norm(state, dof, xa, xb), 2 * e2))
        out.append(NormCheck(dof, "z_difference", chsh.difference_norm(state, dof, za, zb), 2 * e2))
    return out


def canonical_observables(rotation: float = 0.0) -> tuple:
    """(XA, ZA, XB, ZB) with Alice's pair conjugate-rotated by `rotation`."""
    z = BinaryObservable(chsh.PAULI_Z, "Z")
    x = BinaryObservable(chsh.PAULI_X, "X")
    if rotation:
        return chsh.rotated(x, rotation), chsh.rotated(z, rotation), x, z
    return x, z, x, z


def sweep_bounds(eps_grid, assume_equal: bool = True) -> list[tuple[float, float, float]]:
    """Rows (eps, F_P raw bound, F_t raw bound) over the grid.

    With assume_equal the spatial deficit tracks the polarization deficit;
    otherwise the spatial deficit is zero and only polarization degrades.
    """
    rows = []
    for eps in eps_grid:
        b = total_bound(float(eps), float(eps) if assume_equal else 0.0)
        rows.append((float(eps), b.f_p_lb_raw, b.f_t_lb_raw))
    return rows


def write_sweep_csv(path, rows) -> None:
    """CSV with header epsilon,f_p_lb,f_t_lb at 12 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "f_p_lb", "f_t_lb"])
        for eps, fp, ft in rows:
            w.writerow([f"{eps:.12g}", f"{fp:.12g}", f"{ft:.12g}"])
