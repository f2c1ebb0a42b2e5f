import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spatial_unitroot.errors import InvalidArgumentError
from spatial_unitroot.lattice import (
    FlipMode,
    ModelParams,
    NoiseSpec,
    Stability,
    TriangularField,
    cell_count,
    lattice_coords,
    ma_representation,
    noise_field,
    sign_flip,
    sign_pattern_array,
    simulate_triangle,
)


def brute_force_field(n, a, b, eps_grid):
    """Cell-by-cell recursion on a dict, in row-major sweep order."""
    x = {}

    def get(k, ell):
        return 0.0 if k + ell <= 0 else x[(k, ell)]

    for s in range(1, 2 * n + 1):
        for k in range(s - n, n + 1):
            ell = s - k
            x[(k, ell)] = a * get(k - 1, ell) + b * get(k, ell - 1) + eps_grid[(k, ell)]
    return x


def test_cell_count_and_coordinates():
    for n in (1, 2, 7):
        k, ell = lattice_coords(n)
        assert k.size == cell_count(n) == n * (2 * n + 1)
        cells = set(zip(k.tolist(), ell.tolist()))
        expected = {(i, j) for i in range(-n, n + 1) for j in range(-n, n + 1) if i + j >= 1}
        assert cells == expected


def test_impulse_response():
    n = 2
    eps = np.zeros(cell_count(n))
    probe = TriangularField(n, eps)
    eps[probe.index(1, 0)] = 1.0
    fld = simulate_triangle(n, ModelParams(0.5, 0.5), eps)
    assert [fld[1, 0], fld[2, 0], fld[1, 1], fld[2, 1], fld[2, 2]] == [1.0, 0.5, 0.5, 0.5, 0.375]
    assert fld[0, 1] == 0.0 and fld[0, 0] == 0.0


def test_zero_noise_gives_zero_field():
    fld = simulate_triangle(4, ModelParams(0.7, -0.6), np.zeros(cell_count(4)))
    assert not fld.values.any()


def test_matches_cellwise_recursion():
    n, a, b = 6, 0.45, -0.55
    spec = NoiseSpec("rademacher", 99)
    fld = simulate_triangle(n, ModelParams(a, b), spec)
    k, ell = lattice_coords(n)
    grid = dict(zip(zip(k.tolist(), ell.tolist()), fld.eps.values.tolist()))
    ref = brute_force_field(n, a, b, grid)
    for (kk, ll), v in ref.items():
        assert fld[kk, ll] == pytest.approx(v, abs=1e-13)


def test_ma_examples():
    n = 2
    eps = TriangularField(n, np.ones(cell_count(n)))
    assert ma_representation(1, 0, ModelParams(0.3, 0.9), eps) == 1.0
    assert ma_representation(1, 1, ModelParams(0.5, 0.5), eps) == 2.0
    with pytest.raises(InvalidArgumentError):
        ma_representation(0, 0, ModelParams(0.5, 0.5), eps)
    with pytest.raises(InvalidArgumentError):
        ma_representation(3, 0, ModelParams(0.5, 0.5), eps)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(1, 12),
    st.floats(-0.9, 0.9),
    st.floats(-0.9, 0.9),
    st.integers(0, 2**64 - 1),
    st.sampled_from(["normal", "rademacher", "uniform"]),
)
def test_simulation_equals_moving_average(n, a, b, seed, kind):
    params = ModelParams(a, b)
    fld = simulate_triangle(n, params, NoiseSpec(kind, seed))
    k, ell = fld.coords
    ma = np.array([ma_representation(kk, ll, params, fld.eps) for kk, ll in zip(k.tolist(), ell.tolist())])
    np.testing.assert_allclose(fld.values, ma, rtol=0, atol=1e-9)


def test_restriction_to_smaller_triangle_is_consistent():
    params, spec = ModelParams(0.5, 0.5), NoiseSpec("normal", 4)
    small = simulate_triangle(5, params, spec)
    big = simulate_triangle(10, params, spec)
    for kk, ll in zip(*(c.tolist() for c in small.coords)):
        assert small[kk, ll] == big[kk, ll]


def test_determinism():
    spec = NoiseSpec("normal", 123)
    a = simulate_triangle(20, ModelParams(0.5, 0.5), spec)
    b = simulate_triangle(20, ModelParams(0.5, 0.5), spec)
    assert a.values.tobytes() == b.values.tobytes()


@pytest.mark.parametrize("mode", list(FlipMode))
def test_sign_flip_is_involution(mode):
    fld = simulate_triangle(6, ModelParams(0.3, 0.4), NoiseSpec("normal", 8))
    twice = sign_flip(sign_flip(fld, mode), mode)
    np.testing.assert_array_equal(twice.values, fld.values)
    np.testing.assert_array_equal(twice.eps.values, fld.eps.values)


@pytest.mark.parametrize(
    "mode, flip",
    [(FlipMode.BOTH, (-1, -1)), (FlipMode.ROW_ONLY, (-1, 1)), (FlipMode.COL_ONLY, (1, -1))],
)
def test_sign_flip_replays_model_with_flipped_coefficients(mode, flip):
    a, b, n = 0.35, 0.65, 9
    fld = simulate_triangle(n, ModelParams(a, b), NoiseSpec("normal", 31))
    flipped = sign_flip(fld, mode)
    replay = simulate_triangle(n, ModelParams(flip[0] * a, flip[1] * b), flipped.eps.values)
    np.testing.assert_array_equal(flipped.values, replay.values)


def test_sign_pattern_values():
    k, ell = lattice_coords(3)
    pat = sign_pattern_array(3, "both")
    np.testing.assert_array_equal(pat, (-1.0) ** (k + ell))


def test_stability_classification():
    assert ModelParams(0.3, 0.3).stability is Stability.STABLE
    assert ModelParams(0.5, -0.5).stability is Stability.UNSTABLE
    assert ModelParams(0.6, 0.6).stability is Stability.EXPLOSIVE
    assert ModelParams.unstable(-0.25, -1).beta == -0.75
    assert ModelParams(0.5, 0.0).sign_alpha is None
    with pytest.raises(InvalidArgumentError):
        ModelParams(0.5, 0.0).signs


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_invalid_order(bad):
    with pytest.raises(InvalidArgumentError):
        simulate_triangle(bad, ModelParams(0.5, 0.5), NoiseSpec())


@pytest.mark.parametrize("value", [math.nan, math.inf])
def test_non_finite_params(value):
    with pytest.raises(InvalidArgumentError):
        ModelParams(value, 0.5)


def test_field_rejects_bad_shapes_and_values():
    with pytest.raises(InvalidArgumentError):
        TriangularField(2, np.zeros(9))
    with pytest.raises(InvalidArgumentError):
        TriangularField(1, [0.0, math.nan, 1.0])
    with pytest.raises(InvalidArgumentError):
        TriangularField(2, np.zeros(10)).index(3, 0)


def test_serialisation_round_trips():
    fld = simulate_triangle(7, ModelParams(-0.4, 0.6), NoiseSpec("uniform", 2**63 + 5))
    from_json = TriangularField.from_json(fld.to_json())
    from_csv = TriangularField.from_csv(fld.to_csv())
    assert from_json.values.tobytes() == fld.values.tobytes()
    assert from_csv.values.tobytes() == fld.values.tobytes()
    assert from_json.params == fld.params and from_json.noise_spec == fld.noise_spec


def test_csv_rejects_duplicates_and_foreign_cells():
    text = "k,ell,value\n1,0,1\n1,0,2\n1,1,3\n"
    with pytest.raises(InvalidArgumentError):
        TriangularField.from_csv(text)
    with pytest.raises(InvalidArgumentError):
        TriangularField.from_csv("k,ell,value\n1,0,1\n0,1,2\n2,2,3\n")


def test_grid_and_diagonals():
    fld = simulate_triangle(3, ModelParams(0.5, 0.5), NoiseSpec("normal", 1))
    g = fld.grid()
    assert g[1 + 3, 2 + 3] == fld[1, 2]
    np.testing.assert_array_equal(fld.diagonal(2), [fld[k, 2 - k] for k in range(-1, 4)])
    assert np.all(noise_field(3, NoiseSpec("normal", 1)) == fld.eps.values)
