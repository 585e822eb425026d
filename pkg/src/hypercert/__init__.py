"""Simulation and certification toolkit for polarization-spatial-mode hyperentangled Bell states.

Submodules:

- :mod:`.linalg`       dense complex linear algebra on small qubit registers
- :mod:`.states`       the sixteen hyperentangled Bell states and noise models
- :mod:`.chsh`         per-DOF CHSH tests, exact and shot-sampled
- :mod:`.optics`       linear-optical analyzer model of the CHSH measurements
- :mod:`.isometry`     swap-isometry certification circuits (steps 1 and 2)
- :mod:`.bounds`       robust fidelity lower bounds from CHSH deficits
- :mod:`.tomography`   Pauli state tomography by linear inversion
- :mod:`.cli`          batch experiment runner (``hypercert`` command)
"""

from .states import BellLabel, HyperBellLabel, NoiseSpec, ALL_HYPER_LABELS
from .linalg import RegisterLayout, Tolerances

__all__ = [
    "BellLabel",
    "HyperBellLabel",
    "NoiseSpec",
    "ALL_HYPER_LABELS",
    "RegisterLayout",
    "Tolerances",
]

__version__ = "0.1.0"
