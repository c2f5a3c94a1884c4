import math

import numpy as np
import pytest

from qemsof.channels import (
    amplitude_damping,
    depolarizing,
    ggep,
    is_cptp,
    over_rotation,
    ptm_to_eta,
    random_cptp_channel,
    random_triangular_channel,
)
from qemsof.errors import InvalidChannelError, SingularChannel
from qemsof.pauli import PTMChannel, PauliString, identity_channel, pauli_matrices, pauli_ptm, ptm_of_unitary
from qemsof.qem import quasi_probability
from qemsof.twirling import (
    TwirlConfig,
    clifford_twirl,
    clifford_twirl_average,
    gate_referred_twirl,
    imperfect_twirl,
    pauli_twirl,
    pauli_twirl_average,
    pauli_twirl_montecarlo,
    single_qubit_cliffords,
)


def test_pauli_twirl_fixed_points():
    d = depolarizing(1, 0.1)
    assert pauli_twirl(d).allclose(d)
    assert pauli_twirl(identity_channel()).allclose(identity_channel())


def test_pauli_twirl_over_rotation_is_bit_flip():
    theta = 0.9
    eta = ptm_to_eta(pauli_twirl(over_rotation(theta * math.pi / 8))).eta
    p = (1 - math.cos(theta)) / 2
    assert np.allclose(eta, [1 - p, p, 0, 0], atol=1e-14)


@pytest.mark.parametrize("delta", [0.05, 0.3, 0.9])
def test_pauli_twirl_amplitude_damping(delta):
    c = amplitude_damping(delta)
    t = pauli_twirl(c)
    r = math.sqrt(1 - delta)
    expected = [(1 + r) ** 2 / 4, delta / 4, delta / 4, (1 - r) ** 2 / 4]
    assert np.allclose(ptm_to_eta(t).eta, expected, atol=1e-14)
    assert ggep(t) == pytest.approx(ggep(c), abs=1e-15)


def test_pauli_twirl_rejects_non_channel():
    with pytest.raises(InvalidChannelError):
        pauli_twirl(PTMChannel(np.diag([1, 1.1, 1.1, 1.1]), 1))


def test_explicit_pauli_average(rng):
    assert pauli_twirl_average(identity_channel()).allclose(identity_channel())
    c = amplitude_damping(0.3)
    assert np.max(np.abs(pauli_twirl_montecarlo(c).m - pauli_twirl(c).m)) <= 1e-12
    for n in (1, 2):
        r = random_cptp_channel(rng, n)
        avg = pauli_twirl_average(r)
        assert avg.is_diagonal(atol=1e-12)
        assert avg.allclose(pauli_twirl(r), atol=1e-12)


def test_explicit_pauli_average_is_conjugation_average():
    # dense check: average of P E(P rho P) P over Paulis, through Kraus operators
    c = amplitude_damping(0.4)
    kraus = [p @ k @ p for p in pauli_matrices(1) for k in c.kraus]
    scaled = [k / 2 for k in kraus]  # 1/4 weight per Pauli -> 1/2 on each Kraus operator
    from qemsof.pauli import ptm_of_kraus

    assert np.allclose(ptm_of_kraus(scaled).m, pauli_twirl(c).m, atol=1e-14)


def test_cliffords():
    cl = single_qubit_cliffords()
    assert len(cl) == 24
    # normalizer property: every Clifford maps each Pauli to a signed Pauli
    for g in cl:
        assert np.allclose(np.abs(g) @ np.ones(4), np.ones(4))
        assert np.allclose(g @ g.T, np.eye(4))
    keys = {tuple(np.rint(g).astype(int).ravel()) for g in cl}
    assert len(keys) == 24


def test_clifford_conjugation_dense():
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    for p in pauli_matrices(1):
        q = h.conj().T @ p @ h
        hits = [np.allclose(q, s * m) for m in pauli_matrices(1) for s in (1, -1)]
        assert any(hits)


def test_clifford_twirl():
    d = depolarizing(1, 0.07)
    assert clifford_twirl(d).allclose(d)
    c = amplitude_damping(0.1)
    eps = 1 - (2 + 2 * math.sqrt(0.9) - 0.1) / 4
    assert eps == pytest.approx(0.0506584, abs=1e-7)
    assert clifford_twirl(c).allclose(depolarizing(1, eps), atol=1e-14)
    assert clifford_twirl_average(c).allclose(clifford_twirl(c), atol=1e-12)


def test_clifford_average_random(rng):
    for _ in range(5):
        c = random_cptp_channel(rng)
        assert clifford_twirl_average(c).allclose(clifford_twirl(c), atol=1e-12)


def test_gate_referred_twirl():
    c = amplitude_damping(0.25)
    assert gate_referred_twirl(identity_channel(), c).allclose(pauli_twirl(c))
    x = pauli_ptm("X")
    noisy = c @ x
    assert gate_referred_twirl(x, noisy).allclose(pauli_twirl(c) @ x, atol=1e-14)
    with pytest.raises(SingularChannel):
        gate_referred_twirl(PTMChannel(np.diag([1, 1, 0, 1]), 1), noisy)


def test_gate_referred_twirl_hadamard():
    h = ptm_of_unitary(np.array([[1, 1], [1, -1]]) / math.sqrt(2))
    c = amplitude_damping(0.2)
    out = gate_referred_twirl(h, c @ h)
    assert out.allclose(pauli_twirl(c) @ h, atol=1e-13)


def test_imperfect_twirl():
    c = amplitude_damping(0.2)
    assert imperfect_twirl(c, TwirlConfig("pauli", 0.0)).allclose(pauli_twirl(c))
    g = 0.01
    out = imperfect_twirl(c, TwirlConfig("pauli", g))
    assert ggep(out) > ggep(c)
    # trace oracle: each non-identity diagonal entry shrinks by (1 - 4g/3)^2
    shrink = (1 - 4 * g / 3) ** 2
    expected = 1 - (1 + shrink * (4 * (1 - ggep(c)) - 1)) / 4
    assert ggep(out) == pytest.approx(expected, abs=1e-14)
    assert is_cptp(out)


def test_imperfect_twirl_two_qubits():
    from qemsof.channels import tensor

    c = tensor([amplitude_damping(0.1), amplitude_damping(0.2)])
    out = imperfect_twirl(c, TwirlConfig("pauli", 0.005))
    assert out.n == 2 and out.is_diagonal()
    assert ggep(out) > ggep(c)
    cl = imperfect_twirl(c, TwirlConfig("clifford", 0.0))
    assert ggep(cl) == pytest.approx(ggep(c), abs=1e-14)


def test_imperfect_twirl_sof_ordering():
    from qemsof.channels import calibrate_to_ggep

    for eps in (1e-3, 5e-3, 1e-2):
        c = amplitude_damping(calibrate_to_ggep("amplitude_damping", eps))
        ideal = quasi_probability(pauli_twirl(c)).sof
        imperfect = quasi_probability(imperfect_twirl(c, TwirlConfig("pauli", eps / 10))).sof
        raw = quasi_probability(c).sof
        assert ideal < imperfect < raw


def test_twirl_config_validation():
    with pytest.raises(ValueError):
        TwirlConfig("weyl")
    with pytest.raises(ValueError):
        TwirlConfig("pauli", -0.1)
    assert TwirlConfig().layers == 2


def test_ggep_invariance_and_idempotence(rng):
    for _ in range(30):
        c = random_cptp_channel(rng)
        for tw in (pauli_twirl, clifford_twirl):
            t = tw(c)
            assert abs(ggep(t) - ggep(c)) <= 1e-12
            assert tw(t).allclose(t, atol=1e-14)


def test_twirl_minimality_on_triangular_channels(rng):
    worst_pauli = worst_clifford = -np.inf
    for _ in range(500):
        c = random_triangular_channel(rng)
        raw = quasi_probability(c).one_norm
        p = quasi_probability(pauli_twirl(c))
        cl = quasi_probability(clifford_twirl(c))
        worst_pauli = max(worst_pauli, p.one_norm - raw)
        worst_clifford = max(worst_clifford, cl.sof - p.sof)
    assert worst_pauli <= 1e-10
    assert worst_clifford <= 1e-10
