import numpy as np
import pytest

from hypercert import linalg, tomography
from hypercert.linalg import dm, tensor, PAULI_X
from hypercert.states import HyperBellLabel, NoiseSpec, hyper_bell_vector, source_density
from hypercert.tomography import (
    SETTINGS,
    PauliSettingCounts,
    dof_fidelities,
    exact_tomography,
    read_counts,
    reconstruct,
    setting_probabilities,
    simulate_tomography,
    write_counts,
)

from helpers import rand_density

PP = HyperBellLabel.parse("phi+,phi+")


def test_setting_count():
    assert len(SETTINGS) == 81
    assert len(set(SETTINGS)) == 81
    assert all(len(s) == 4 for s in SETTINGS)


def test_zzzz_on_computational_state():
    state = np.zeros(16, dtype=complex)
    state[0] = 1.0  # |hh>|a1 b1>
    counts = simulate_tomography(dm(state), 1000, seed=0)
    zzzz = next(c for c in counts if c.setting == "ZZZZ")
    assert zzzz.counts == {"0000": 1000}


def test_xxxx_even_parity_on_reference_state():
    rho = dm(hyper_bell_vector(PP))
    # oracle: <XXXX> = 1 by direct trace
    xxxx = tensor(PAULI_X, PAULI_X, PAULI_X, PAULI_X)
    assert np.real(np.trace(rho @ xxxx)) == pytest.approx(1.0, abs=1e-12)
    p = setting_probabilities(rho, "XXXX")
    even = sum(p[k] for k in range(16) if bin(k).count("1") % 2 == 0)
    assert even == pytest.approx(1.0, abs=1e-12)


def test_exact_reconstruction_is_identity():
    rng = np.random.default_rng(1)
    for rho in (dm(hyper_bell_vector(PP)), rand_density(rng, 16), np.eye(16) / 16):
        rho_hat = reconstruct(exact_tomography(rho))
        assert np.max(np.abs(rho_hat - rho)) < 1e-10


def test_sampled_reconstruction_quality():
    rho = dm(hyper_bell_vector(PP))
    for seed in (0, 1):
        counts = simulate_tomography(rho, 100000, seed=seed)
        rho_hat = reconstruct(counts)
        assert linalg.is_density(rho_hat, linalg.Tolerances(psd=1e-9))
        assert dof_fidelities(rho_hat, PP).f_full >= 0.99


def test_maximally_mixed_reconstruction():
    counts = simulate_tomography(np.eye(16) / 16, 20000, seed=3)
    rho_hat = reconstruct(counts)
    assert np.max(np.abs(rho_hat - np.eye(16) / 16)) < 0.01


def test_error_shrinks_with_shots():
    rho = dm(hyper_bell_vector(PP))

    def tdist(shots, seed):
        rho_hat = reconstruct(simulate_tomography(rho, shots, seed))
        return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho_hat - rho)))

    lo = np.median([tdist(10000, s) for s in range(7)])
    hi = np.median([tdist(100000, s) for s in range(7)])
    assert hi < lo


def test_reconstruct_requires_all_settings():
    counts = exact_tomography(np.eye(16) / 16)[:-1]
    with pytest.raises(ValueError):
        reconstruct(counts)


def test_dof_fidelities_examples():
    ideal = dof_fidelities(dm(hyper_bell_vector(PP)), PP)
    for v in (ideal.f_p, ideal.f_s, ideal.f_t_product, ideal.f_full):
        assert v == pytest.approx(1.0, abs=1e-12)

    noisy = source_density(PP, NoiseSpec(werner_p_pol=0.9))
    fids = dof_fidelities(noisy, PP)
    assert fids.f_p == pytest.approx((1 + 3 * 0.9) / 4, abs=1e-12)
    assert fids.f_s == pytest.approx(1.0, abs=1e-12)
    # product-form states factorize: F_full = F_P * F_S
    assert fids.f_full == pytest.approx(fids.f_t_product, abs=1e-10)


def test_product_factorization_random_noise():
    rng = np.random.default_rng(5)
    for _ in range(5):
        spec = NoiseSpec(werner_p_pol=rng.uniform(0.5, 1), werner_p_spat=rng.uniform(0.5, 1),
                         dephase_gamma_pol=rng.uniform(0, 0.5), dephase_gamma_spat=rng.uniform(0, 0.5))
        rho = source_density(PP, spec)
        fids = dof_fidelities(rho, PP)
        assert fids.f_full == pytest.approx(fids.f_t_product, abs=1e-10)


def test_simulation_deterministic():
    rho = dm(hyper_bell_vector(PP))
    a = simulate_tomography(rho, 500, seed=11)
    b = simulate_tomography(rho, 500, seed=11)
    assert a == b


def test_counts_roundtrip(tmp_path):
    rho = dm(hyper_bell_vector(PP))
    counts = simulate_tomography(rho, 200, seed=2)
    path = tmp_path / "counts.jsonl"
    write_counts(path, counts)
    loaded = read_counts(path)
    assert {c.setting: c.counts for c in loaded} == {c.setting: c.counts for c in counts}
    rho_a = reconstruct(counts)
    rho_b = reconstruct(loaded)
    assert np.max(np.abs(rho_a - rho_b)) < 1e-12
