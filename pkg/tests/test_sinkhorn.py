import math

import numpy as np
import pytest

from qcap.capacity import gad_f, gad_params
from qcap.core import (
    NoConvergence,
    NotInterior,
    NotUnital,
    PauliChannelParams,
    QubitChannel,
    is_completely_positive,
    is_interior,
    is_trace_preserving,
    is_unital,
    kraus_ptm,
    ptm_from_params,
    random_cptp_channel,
    random_unitary,
)
from qcap.sinkhorn import (
    ScalingPair,
    family_scaling_pair,
    family_unital_params,
    sinkhorn_iterate,
    unital_channel,
    unital_diagonalize,
    upsilon_ptm,
    verify_decomposition,
)


def _random_interior_params(rng):
    while True:
        l1, l2, l3 = rng.uniform(-1, 1, 3)
        t3 = rng.uniform(-1, 1)
        if abs(t3) + abs(l3) >= 0.98:
            continue
        if 1 + l3 < np.hypot(t3, l1 + l2) + 1e-6:
            continue
        if 1 - l3 < np.hypot(t3, l1 - l2) + 1e-6:
            continue
        return PauliChannelParams(l1, l2, l3, t3)


def test_family_pair_already_unital():
    pair = family_scaling_pair(PauliChannelParams(0.5, 0.4, 0.0, 0.0))
    np.testing.assert_allclose(pair.a, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(pair.b, np.eye(2), atol=1e-15)
    assert pair.norm_ab == pytest.approx(1.0, abs=1e-15)


def test_family_pair_rejects_boundary():
    with pytest.raises(NotInterior):
        family_scaling_pair(PauliChannelParams(1, 1, 1, 0))
    with pytest.raises(NotInterior):
        family_scaling_pair(PauliChannelParams(0.5, 0.5, 0.6, 0.4))


def test_gad_norm_product_is_one_at_half():
    # paper closed form gives |A||B| = ((1-p)/p)^(1/4)/sqrt(f) = 1 at p = 1/2
    for gt in (0.1, 0.7, 2.5):
        pair = family_scaling_pair(gad_params(0.5, gt))
        assert pair.norm_ab == pytest.approx(1.0, abs=1e-12)


def test_gad_norm_products_match_closed_form():
    for p, gt in [(0.475, 1.0), (0.1, 0.3), (0.3, 2.0), (0.05, 0.05)]:
        pair = family_scaling_pair(gad_params(p, gt))
        f = gad_f(p, gt)
        quarter = ((1 - p) / p) ** 0.25
        assert pair.norm_ab == pytest.approx(quarter / math.sqrt(f), abs=1e-10)
        assert pair.norm_ab_inv == pytest.approx(quarter * math.sqrt(f), abs=1e-10)


def test_family_unital_params_reduce_at_t3_zero():
    form = family_unital_params(PauliChannelParams(0.5, -0.4, 0.3, 0.0))
    assert form.lt1 == pytest.approx(0.5, abs=1e-15)
    assert form.lt2 == pytest.approx(-0.4, abs=1e-15)
    assert form.lt3 == pytest.approx(0.3, abs=1e-15)
    assert form.singular_values == pytest.approx((0.5, 0.4, 0.3), abs=1e-15)


def test_gad_unital_params_structure():
    # lt1 = lt2 = e^{-gt}/f and lt3 = lt1^2
    for p, gt in [(0.475, 1.0), (0.2, 0.5), (0.1, 2.0)]:
        form = family_unital_params(gad_params(p, gt))
        f = gad_f(p, gt)
        assert form.lt1 == pytest.approx(math.exp(-gt) / f, abs=1e-12)
        assert form.lt2 == form.lt1
        assert form.lt3 == pytest.approx(form.lt1 ** 2, abs=1e-12)


def test_unital_form_satisfies_cp_inequality():
    rng = np.random.default_rng(5)
    for _ in range(200):
        form = family_unital_params(_random_interior_params(rng))
        assert 1 + form.lt3 >= abs(form.lt1 + form.lt2) - 1e-9
        assert 1 - form.lt3 >= abs(form.lt1 - form.lt2) - 1e-9


def test_scaling_pair_invariants():
    rng = np.random.default_rng(37)
    for _ in range(100):
        params = _random_interior_params(rng)
        pair = family_scaling_pair(params)
        assert np.linalg.eigvalsh(pair.a)[0] > 0
        assert np.linalg.eigvalsh(pair.b)[0] > 0
        assert pair.norm_ab * pair.norm_ab_inv >= 1.0 - 1e-12
        ups = unital_channel(params, pair)
        assert is_unital(ups, 1e-9)
        assert is_trace_preserving(upsilon_ptm(params, pair), 1e-9)
        assert is_completely_positive(ups).is_cp


def test_closed_form_matches_iteration():
    params = PauliChannelParams(0.5, 0.4, 0.3, 0.3)
    closed = family_unital_params(params)
    pair = sinkhorn_iterate(ptm_from_params(params))
    iterated = unital_diagonalize(unital_channel(params, pair), tol=1e-7)
    assert iterated.lt1 == pytest.approx(closed.lt1, abs=1e-8)
    assert iterated.lt2 == pytest.approx(closed.lt2, abs=1e-8)
    assert iterated.lt3 == pytest.approx(closed.lt3, abs=1e-8)
    assert np.asarray(iterated.singular_values) == pytest.approx(
        np.asarray(closed.singular_values), abs=1e-8)
    # gauge-invariant norm products agree between the two constructions
    direct = family_scaling_pair(params)
    assert pair.norm_ab == pytest.approx(direct.norm_ab, abs=1e-10)
    assert pair.norm_ab_inv == pytest.approx(direct.norm_ab_inv, abs=1e-10)


def test_iteration_on_unital_channel_gives_scalars():
    ch = ptm_from_params(PauliChannelParams(0.5, -0.3, 0.2, 0.0))
    pair = sinkhorn_iterate(ch)
    assert np.abs(pair.a - pair.a[0, 0] * np.eye(2)).max() < 1e-10
    assert np.abs(pair.b - pair.b[0, 0] * np.eye(2)).max() < 1e-10
    form = unital_diagonalize(unital_channel(ch, pair))
    assert form.lt1 == pytest.approx(0.5, abs=1e-10)
    assert form.lt2 == pytest.approx(-0.3, abs=1e-10)
    assert form.lt3 == pytest.approx(0.2, abs=1e-10)


def test_iteration_on_random_interior_channels():
    rng = np.random.default_rng(41)
    found = 0
    while found < 30:
        ch = random_cptp_channel(rng, kraus_rank=int(rng.integers(2, 5)))
        if not is_interior(ch):
            continue
        found += 1
        pair = sinkhorn_iterate(ch, tol=1e-12)
        res = verify_decomposition(ch, pair)
        assert res.max_residual < 1e-10
        # scalar gauge change leaves the sandwiched map untouched
        scaled = ScalingPair.from_operators(pair.a / 1.7, 1.7 * pair.b)
        np.testing.assert_allclose(upsilon_ptm(ch, scaled), upsilon_ptm(ch, pair),
                                   atol=1e-12)
        assert scaled.norm_ab * scaled.norm_ab_inv == pytest.approx(
            pair.norm_ab * pair.norm_ab_inv, rel=1e-12)


def test_iteration_deterministic():
    params = PauliChannelParams(0.4, 0.3, 0.25, 0.35)
    first = sinkhorn_iterate(ptm_from_params(params))
    second = sinkhorn_iterate(ptm_from_params(params))
    assert np.array_equal(first.a, second.a)
    assert np.array_equal(first.b, second.b)
    # gauge rule det A = det B
    assert np.linalg.det(first.a).real == pytest.approx(
        np.linalg.det(first.b).real, rel=1e-12)


def test_iteration_rejects_non_interior():
    with pytest.raises(NotInterior):
        sinkhorn_iterate(QubitChannel.identity())
    with pytest.raises(NotInterior):
        sinkhorn_iterate(PauliChannelParams(0.5, 0.5, 0.6, 0.4))


def test_iteration_raises_no_convergence():
    params = PauliChannelParams(0.5, 0.4, 0.3, 0.3)
    with pytest.raises(NoConvergence):
        sinkhorn_iterate(ptm_from_params(params), tol=1e-12, max_iter=2)


def test_iteration_near_boundary():
    params = PauliChannelParams(0.3, 0.3, 0.499, 0.5)  # |t3| + |l3| = 0.999
    pair = sinkhorn_iterate(ptm_from_params(params))
    assert verify_decomposition(params, pair).max_residual < 1e-10
    direct = family_scaling_pair(params)
    assert pair.norm_ab == pytest.approx(direct.norm_ab, rel=1e-9)


def test_verify_decomposition_trivial_and_scaled():
    identity_pair = ScalingPair.from_operators(np.eye(2), np.eye(2))
    res = verify_decomposition(QubitChannel.identity(), identity_pair)
    assert res.max_residual == 0.0

    rng = np.random.default_rng(43)
    for _ in range(50):
        params = _random_interior_params(rng)
        res = verify_decomposition(params, family_scaling_pair(params))
        assert res.max_residual <= 1e-10


def test_verify_decomposition_detects_corruption():
    params = PauliChannelParams(0.5, 0.4, 0.3, 0.2)
    pair = family_scaling_pair(params)
    corrupted = ScalingPair.from_operators(pair.a + np.diag([1e-3, 0.0]), pair.b)
    res = verify_decomposition(params, corrupted)
    assert 1e-4 < res.max_residual < 1e-2


def test_unital_diagonalize_diagonal_and_rotated():
    ch = ptm_from_params(PauliChannelParams(0.5, -0.4, 0.3, 0.0))
    form = unital_diagonalize(ch)
    assert form.singular_values == pytest.approx((0.5, 0.4, 0.3), abs=1e-15)
    assert (form.lt1, form.lt2, form.lt3) == (0.5, -0.4, 0.3)

    rng = np.random.default_rng(47)
    for _ in range(20):
        u = random_unitary(rng)
        w = random_unitary(rng)
        rotated = QubitChannel(kraus_ptm(u) @ ch.ptm @ kraus_ptm(w))
        got = unital_diagonalize(rotated)
        assert np.asarray(got.singular_values) == pytest.approx(
            np.asarray(form.singular_values), abs=1e-12)

    tracing = ptm_from_params(PauliChannelParams(0, 0, 0, 0))
    assert unital_diagonalize(tracing).singular_values == (0.0, 0.0, 0.0)


def test_unital_diagonalize_rejects_nonunital():
    with pytest.raises(NotUnital):
        unital_diagonalize(ptm_from_params(gad_params(0.3, 1.0)))


def test_norm_products_diverge_towards_amplitude_damping():
    products = [family_scaling_pair(gad_params(p, 1.0)).norm_ab
                for p in (1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12)]
    assert all(b > a for a, b in zip(products, products[1:]))
    assert products[-1] > 1e3
