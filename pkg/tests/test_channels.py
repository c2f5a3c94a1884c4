import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import hadamard_eta_to_diag, paulis, ptm_by_trace
from qemsof.channels import (
    PauliChannelEta,
    amplitude_damping,
    avg_fidelity,
    axis_damping,
    bit_flip,
    calibrate_to_ggep,
    coherent_triangular_decompose,
    compose,
    depolarizing,
    eta_to_ptm,
    ggep,
    is_cptp,
    over_rotation,
    over_rotation_angle,
    pauli_channel,
    per_qubit_ggep,
    phase_flip,
    product_channel,
    ptm_to_eta,
    quality,
    random_cptp_channel,
    random_triangular_channel,
    tensor,
)
from qemsof.errors import DimensionError, InvalidChannelError
from qemsof.pauli import PTMChannel, identity_channel, pauli_ptm, ptm_of_kraus

PI2 = math.pi**2


def test_depolarizing_single_qubit():
    assert np.allclose(depolarizing(1, 0.03).m, np.diag([1, 0.96, 0.96, 0.96]))
    assert np.allclose(depolarizing(1, 0).m, np.eye(4))
    assert ggep(depolarizing(1, 0.03)) == pytest.approx(0.03, abs=1e-15)


def test_depolarizing_two_qubits():
    d = np.diag(depolarizing(2, 0.03).m)
    assert d[0] == 1
    assert np.allclose(d[1:], 1 - 0.03 * 16 / 15)
    assert np.allclose(d[1:], 0.968)


def test_depolarizing_range():
    depolarizing(1, 0.75)
    with pytest.raises(ValueError):
        depolarizing(1, 0.76)
    with pytest.raises(ValueError):
        depolarizing(1, -0.01)


def test_flip_channels():
    assert np.allclose(bit_flip(0.1).m, np.diag([1, 1, 0.8, 0.8]))
    kraus = [math.sqrt(0.9) * np.eye(2), math.sqrt(0.1) * paulis(1)[1]]
    assert np.allclose(bit_flip(0.1).m, ptm_by_trace(kraus))
    assert np.allclose(phase_flip(0.5).m, np.diag([1, 0, 0, 1]))
    assert np.allclose(pauli_channel([1, 0, 0, 0]).m, np.eye(4))


def test_pauli_channel_validation():
    with pytest.raises(InvalidChannelError):
        PauliChannelEta([0.9, 0.2, -0.1, 0.0])
    with pytest.raises(InvalidChannelError):
        PauliChannelEta([0.9, 0.2, 0.0, 0.0])
    with pytest.raises(DimensionError):
        PauliChannelEta([0.5, 0.5, 0.0])


def test_pauli_channel_diagonal_matches_commutation_oracle(rng):
    for n in (1, 2):
        eta = rng.dirichlet(np.ones(4**n))
        c = pauli_channel(eta)
        assert np.allclose(np.diag(c.m), hadamard_eta_to_diag(eta))
        assert ggep(c) == pytest.approx(1 - eta[0], abs=1e-14)


def test_eta_roundtrip(rng):
    for n in (1, 2, 3):
        eta = rng.dirichlet(np.ones(4**n))
        assert np.allclose(ptm_to_eta(eta_to_ptm(eta)).eta, eta, atol=1e-14)


def test_ptm_to_eta_rejects_non_pauli():
    with pytest.raises(InvalidChannelError):
        ptm_to_eta(amplitude_damping(0.2))


def test_amplitude_damping_matrix():
    m = amplitude_damping(0.36).m
    expected = np.array([[1, 0, 0, 0], [0, 0.8, 0, 0], [0, 0, 0.8, 0], [0.36, 0, 0, 0.64]])
    assert np.allclose(m, expected, atol=1e-14)
    assert np.allclose(amplitude_damping(0).m, np.eye(4))
    assert ggep(amplitude_damping(1.0)) == pytest.approx(0.75)
    assert amplitude_damping(0.36).is_lower_triangular()


def test_axis_damping_is_amplitude_damping_on_z():
    assert np.allclose(axis_damping(0.3).m, amplitude_damping(0.3).m, atol=1e-14)
    for axis in (1, 2, 3):
        for toward in (1, -1):
            c = axis_damping(0.25, axis, toward)
            assert is_cptp(c)
            assert c.is_lower_triangular()


def test_over_rotation():
    assert np.allclose(over_rotation(0).m, np.eye(4))
    # matrix half-angle 4 phi / pi = pi / 2 makes U = iX
    assert np.allclose(over_rotation(PI2 / 8).m, pauli_ptm("X").m, atol=1e-14)
    assert ggep(over_rotation(PI2 / 16)) == pytest.approx(0.5, abs=1e-14)
    assert over_rotation_angle(PI2 / 8) == pytest.approx(math.pi)


@given(st.floats(0, 4))
@settings(max_examples=40, deadline=None)
def test_over_rotation_ggep_closed_form(phi):
    c = over_rotation(phi)
    assert ggep(c) == pytest.approx((1 - math.cos(8 * phi / math.pi)) / 2, abs=1e-12)
    assert np.allclose(c.m @ c.m.T, np.eye(4), atol=1e-12)


def test_over_rotation_twirl_is_bit_flip():
    theta = 0.7
    c = over_rotation(theta * math.pi / 8)
    assert np.allclose(np.diag(c.m), [1, 1, math.cos(theta), math.cos(theta)])


def test_tensor_and_ggep_multiplicativity():
    assert np.allclose(tensor([identity_channel(), identity_channel()]).m, np.eye(16))
    e1, e2 = 0.02, 0.05
    t = tensor([depolarizing(1, e1), depolarizing(1, e1)])
    assert ggep(t) == pytest.approx(1 - (1 - e1) ** 2, abs=1e-14)
    zoo = [depolarizing(1, e1), amplitude_damping(0.2), over_rotation(0.1), bit_flip(e2)]
    for a in zoo:
        for b in zoo:
            assert ggep(tensor([a, b])) == pytest.approx(1 - (1 - ggep(a)) * (1 - ggep(b)), abs=1e-12)


def test_tensor_preserves_triangularity():
    t = tensor([amplitude_damping(0.2), amplitude_damping(0.4)])
    assert t.is_lower_triangular()
    assert tensor([t, amplitude_damping(0.1)]).is_lower_triangular()


def test_compose(rng):
    c = amplitude_damping(0.3)
    assert compose(c, identity_channel()).allclose(c)
    x = pauli_ptm("X")
    assert compose(x, x).allclose(identity_channel())
    a, b = random_cptp_channel(rng), random_cptp_channel(rng)
    kraus = [ka @ kb for ka in a.kraus for kb in b.kraus]
    assert np.allclose(compose(a, b).m, ptm_by_trace(kraus), atol=1e-12)
    with pytest.raises(DimensionError):
        compose(a, depolarizing(2, 0.1))


def test_fidelity():
    assert avg_fidelity(identity_channel()) == pytest.approx(1.0)
    assert avg_fidelity(depolarizing(1, 0.03)) == pytest.approx(0.98)
    q = quality(amplitude_damping(0.3))
    assert q.ggep == pytest.approx(1.5 * (1 - q.avg_fidelity))


def _haar_states(rng, d, count):
    v = rng.normal(size=(count, d)) + 1j * rng.normal(size=(count, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def test_avg_fidelity_haar_monte_carlo(rng):
    eta = rng.dirichlet(np.ones(16)) * 0.2
    eta[0] += 0.8
    c = pauli_channel(eta)
    psi = _haar_states(rng, 4, 100_000)
    # <psi| E(psi psi^dag) |psi> = sum_k eta_k |<psi|P_k|psi>|^2
    f = sum(e * np.abs(np.einsum("si,ij,sj->s", psi.conj(), p, psi)) ** 2 for e, p in zip(eta, paulis(2)))
    err = f.std(ddof=1) / math.sqrt(f.size)
    assert abs(f.mean() - avg_fidelity(c)) <= 3 * err


def test_is_cptp():
    for c in [depolarizing(1, 0.2), bit_flip(0.3), amplitude_damping(0.5), over_rotation(0.4), depolarizing(2, 0.1)]:
        assert is_cptp(c).ok
    bad = PTMChannel(np.diag([1, 1.05, 1.05, 1.05]), 1)
    rep = is_cptp(bad)
    assert rep.trace_preserving and not rep.completely_positive
    assert rep.min_choi_eigenvalue == pytest.approx(-0.025, abs=1e-12)
    # transpose map: positive, trace preserving, not completely positive
    assert not is_cptp(PTMChannel(np.diag([1, 1, -1, 1]), 1))


def test_random_channels_are_cptp(rng):
    for _ in range(20):
        assert is_cptp(random_cptp_channel(rng))
        t = random_triangular_channel(rng)
        assert is_cptp(t) and t.is_lower_triangular()
    assert is_cptp(random_cptp_channel(rng, 2))


def test_decompose_amplitude_damping_is_trivial():
    c = amplitude_damping(0.3)
    parts = coherent_triangular_decompose(c)
    assert np.allclose(parts.u.m, np.eye(4)) and np.allclose(parts.v.m, np.eye(4))
    assert np.allclose(parts.d.m, c.m)


def test_decompose_over_rotation_has_no_triangular_noise():
    c = over_rotation(0.37)
    parts = coherent_triangular_decompose(c)
    assert np.allclose(parts.d.m, np.eye(4), atol=1e-12)
    assert parts.reconstruct().allclose(c)


def _check_parts(parts, c):
    assert parts.reconstruct().allclose(c, atol=1e-10)
    for r in (parts.u, parts.v):
        assert np.allclose(r.m[0], [1, 0, 0, 0]) and np.allclose(r.m[:, 0], [1, 0, 0, 0])
        assert np.allclose(r.m[1:, 1:] @ r.m[1:, 1:].T, np.eye(3), atol=1e-12)
        assert np.linalg.det(r.m[1:, 1:]) == pytest.approx(1.0)
    assert parts.d.is_lower_triangular(atol=1e-12)


def test_decompose_random_channels(rng):
    for _ in range(50):
        c = random_cptp_channel(rng)
        _check_parts(coherent_triangular_decompose(c), c)


def test_decompose_reflection_is_folded_into_d():
    # orthogonal block with det -1: the reflection must land in D, not in U or V
    c = PTMChannel(np.diag([1, 0.5, 0.4, -0.3]), 1)
    rot = over_rotation(0.3)
    c = rot @ c
    parts = coherent_triangular_decompose(c)
    _check_parts(parts, c)
    assert np.prod(np.diag(parts.d.m)[1:]) < 0


def test_decompose_tensor_structure(rng):
    a, b = random_cptp_channel(rng), amplitude_damping(0.2)
    parts = coherent_triangular_decompose([a, b])
    assert parts.reconstruct().allclose(tensor([a, b]), atol=1e-10)
    with pytest.raises(DimensionError):
        coherent_triangular_decompose(depolarizing(2, 0.1))


def test_calibration():
    assert calibrate_to_ggep("depolarizing", 0.03) == 0.03
    assert calibrate_to_ggep("amplitude_damping", 0.75) == pytest.approx(1.0)
    assert calibrate_to_ggep("over_rotation", 0.0) == 0.0
    for eps in (1e-4, 1e-2, 0.3):
        # closed forms: GGEP of AD is (1 - sqrt(1-d))/2 + d/4; over-rotation inverts the cosine
        d = calibrate_to_ggep("amplitude_damping", eps)
        s = 2 * math.sqrt(1 - eps) - 1
        assert d == pytest.approx(1 - s * s, rel=1e-10)
        assert ggep(amplitude_damping(d)) == pytest.approx(eps, abs=1e-12)
        phi = calibrate_to_ggep("over_rotation", eps)
        assert phi == pytest.approx(math.pi * math.acos(1 - 2 * eps) / 8, rel=1e-9)
    with pytest.raises(ValueError):
        calibrate_to_ggep("amplitude_damping", 0.8)
    with pytest.raises(ValueError):
        calibrate_to_ggep("nonsense", 0.1)


def test_product_channel_split():
    eps = 0.05
    e1 = per_qubit_ggep(eps, 2)
    assert e1 == pytest.approx(1 - math.sqrt(1 - eps))
    for model in ("depolarizing", "amplitude_damping", "over_rotation"):
        c = product_channel(model, eps, 2)
        assert c.n == 2
        assert ggep(c) == pytest.approx(eps, abs=1e-12)


def test_kraus_kept_and_informational():
    c = amplitude_damping(0.2)
    assert c.kraus is not None and len(c.kraus) == 2
    assert np.allclose(ptm_of_kraus(c.kraus).m, c.m)
