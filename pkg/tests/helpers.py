"""Shared test utilities: random states and brute-force oracles."""

import numpy as np


def rand_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def rand_density(rng, dim, rank=None):
    """Ginibre-ensemble density operator."""
    k = rank or dim
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def brute_partial_trace(rho, n_qubits, keep_positions):
    """Partial trace by explicit summation over basis indices (oracle path)."""
    keep = sorted(keep_positions)
    drop = [q for q in range(n_qubits) if q not in keep]
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    out = np.zeros((dk, dk), dtype=complex)

    def compose(kept_bits, dropped_bits):
        idx = 0
        ki = iter(kept_bits)
        di = iter(dropped_bits)
        for q in range(n_qubits):
            bit = next(ki) if q in keep else next(di)
            idx = (idx << 1) | bit
        return idx

    def bits(x, width):
        return [(x >> (width - 1 - i)) & 1 for i in range(width)]

    for a in range(dk):
        for b in range(dk):
            for e in range(dd):
                out[a, b] += rho[compose(bits(a, len(keep)), bits(e, len(drop))),
                                compose(bits(b, len(keep)), bits(e, len(drop)))]
    return out
