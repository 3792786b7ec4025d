import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arff.core import (
    Dataset,
    FourierModel,
    NormalizationStats,
    apply_normalization,
    augment_bias,
    build_design_matrix,
    denormalize_dataset,
    normalize_dataset,
    predict,
)
from arff.errors import ConstantColumnError, DimensionMismatchError
from arff.solver import SolveOptions, solve_amplitudes


def test_normalize_two_point_symmetry():
    data = Dataset(np.array([[0.0], [2.0]]), np.array([0.0, 2.0]))
    out, stats = normalize_dataset(data)
    r = 1.0 / np.sqrt(2.0)
    np.testing.assert_allclose(out.x[:, 0], [-r, r])
    np.testing.assert_allclose(out.y[:, 0], [-r, r])
    np.testing.assert_allclose(stats.x_mean, [1.0])
    np.testing.assert_allclose(stats.y_mean, [1.0])
    np.testing.assert_allclose(stats.x_std, [np.sqrt(2.0)])
    np.testing.assert_allclose(stats.y_std, [np.sqrt(2.0)])


def test_normalize_already_normalized_is_identity(rng):
    x = rng.standard_normal((500, 3))
    x = (x - x.mean(0)) / x.std(0, ddof=1)
    y = rng.standard_normal(500)
    y = (y - y.mean()) / y.std(ddof=1)
    data = Dataset(x, y)
    out, stats = normalize_dataset(data)
    np.testing.assert_allclose(out.x, data.x, atol=1e-12)
    np.testing.assert_allclose(out.y, data.y, atol=1e-12)
    np.testing.assert_allclose(stats.x_mean, 0.0, atol=1e-12)
    np.testing.assert_allclose(stats.x_std, 1.0, atol=1e-12)


def test_normalize_gaussian_samples(rng):
    # oracle: recompute mean/std of the output directly
    data = Dataset(rng.normal(5.0, 3.0, size=(1000, 2)), rng.normal(-1.0, 0.5, size=1000))
    out, _ = normalize_dataset(data)
    assert np.abs(out.x.mean(0)).max() < 1e-12
    np.testing.assert_allclose(out.x.std(0, ddof=1), 1.0, atol=1e-12)
    assert np.abs(out.y.mean()) < 1e-12
    np.testing.assert_allclose(out.y.std(ddof=1), 1.0, atol=1e-12)


def test_normalize_round_trip(rng):
    data = Dataset(rng.normal(2.0, 4.0, size=(50, 3)), rng.normal(size=(50, 2)))
    out, stats = normalize_dataset(data)
    back = denormalize_dataset(out, stats)
    np.testing.assert_allclose(back.x, data.x, atol=1e-12)
    np.testing.assert_allclose(back.y, data.y, atol=1e-12)


def test_normalize_rejects_constant_column(rng):
    x = rng.standard_normal((10, 3))
    x[:, 1] = 7.0
    with pytest.raises(ConstantColumnError) as exc:
        normalize_dataset(Dataset(x, rng.standard_normal(10)))
    assert exc.value.column == 1 and exc.value.which == "x"
    with pytest.raises(ConstantColumnError):
        normalize_dataset(Dataset(rng.standard_normal((10, 1)), np.zeros(10)))


def test_normalize_constant_column_unit_mode(rng):
    x = rng.standard_normal((10, 2))
    x[:, 0] = 3.0
    out, stats = normalize_dataset(Dataset(x, rng.standard_normal(10)), constant_columns="unit")
    assert stats.x_std[0] == 1.0
    np.testing.assert_allclose(out.x[:, 0], 0.0)  # mean-centered only


def test_augment_bias():
    np.testing.assert_array_equal(augment_bias(np.array([[2.0]])), [[2.0, 1.0]])
    out = augment_bias(np.arange(6.0).reshape(3, 2))
    assert out.shape == (3, 3)
    np.testing.assert_array_equal(out[:, 2], 1.0)


def test_design_matrix_zero_frequency_gives_ones(rng):
    s = build_design_matrix(rng.standard_normal((7, 3)), np.zeros((2, 3)))
    np.testing.assert_allclose(s, 1.0)


def test_design_matrix_pi_entry():
    s = build_design_matrix(np.array([[np.pi]]), np.array([[1.0]]))
    np.testing.assert_allclose(s[0, 0], -1.0, atol=1e-15)


def test_design_matrix_unit_modulus(rng):
    s = build_design_matrix(rng.standard_normal((40, 2)) * 10, rng.standard_normal((9, 2)) * 5)
    np.testing.assert_allclose(np.abs(s), 1.0, atol=1e-14)


def test_design_matrix_matches_libm_across_scales(rng):
    # the fast sincos path must agree with numpy's trig at angle-ulp level
    x = rng.standard_normal((200, 1))
    for scale in (1.0, 50.0, 2e3, 1e6):  # the last exceeds the fast-path bound
        omega = rng.standard_normal((40, 1)) * scale
        s = build_design_matrix(x, omega)
        theta = x @ omega.T
        ref = np.cos(theta) + 1j * np.sin(theta)
        tol = max(np.abs(theta).max() * 2e-16, 1e-15)
        assert np.abs(s - ref).max() < tol
        np.testing.assert_allclose(np.abs(s), 1.0, atol=1e-14)


def test_design_matrix_sigmoid(rng):
    x = np.array([[1.0, -1.0]])
    omega = np.array([[1.0, 1.0]])  # <omega, x> = 0
    s = build_design_matrix(x, omega, "sigmoid")
    assert s[0, 0] == 0.5 + 0.0j
    s = build_design_matrix(rng.standard_normal((30, 2)), rng.standard_normal((5, 2)), "sigmoid")
    assert (s.real > 0).all() and (s.real < 1).all()
    assert (s.imag == 0).all()


def test_design_matrix_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatchError):
        build_design_matrix(rng.standard_normal((4, 2)), rng.standard_normal((3, 5)))


def test_predict_constant_model():
    model = FourierModel(
        omega=np.zeros((1, 1)),
        beta=np.array([1.0 + 0.0j]),
        activation="fourier",
        stats=NormalizationStats.identity(1),
    )
    out = predict(model, np.linspace(-2, 2, 9)[:, None])
    np.testing.assert_allclose(out, 1.0)


def test_predict_cosine_from_conjugate_pair():
    model = FourierModel(
        omega=np.array([[1.0], [-1.0]]),
        beta=np.array([0.5 + 0.0j, 0.5 + 0.0j]),
        activation="fourier",
        stats=NormalizationStats.identity(1),
    )
    x = np.linspace(-3, 3, 25)[:, None]
    out, max_imag = predict(model, x, with_diagnostics=True)
    np.testing.assert_allclose(out[:, 0], np.cos(x[:, 0]), atol=1e-14)
    assert max_imag < 1e-15


def test_predict_matches_term_by_term_sum(rng):
    k, d = 6, 3
    omega = rng.standard_normal((k, d))
    beta = rng.standard_normal((k, 1)) + 1j * rng.standard_normal((k, 1))
    stats = NormalizationStats(
        rng.standard_normal(d), 1.0 + rng.random(d), rng.standard_normal(1), 1.0 + rng.random(1)
    )
    model = FourierModel(omega=omega, beta=beta, activation="fourier", stats=stats)
    x = rng.standard_normal((11, d))
    got = predict(model, x)
    xn = (x - stats.x_mean) / stats.x_std
    expected = np.zeros(11, dtype=complex)
    for j in range(k):
        expected += beta[j, 0] * np.exp(1j * xn @ omega[j])
    expected = expected.real * stats.y_std[0] + stats.y_mean[0]
    np.testing.assert_allclose(got[:, 0], expected, atol=1e-12)


def test_interpolation_at_k_equals_n(rng):
    # K = N = 8 distinct frequencies, ridge 0: training data are reproduced
    n = 8
    x = rng.standard_normal((n, 1))
    y = rng.standard_normal(n)
    omega = np.linspace(-3.0, 3.0, n)[:, None]
    s = build_design_matrix(x, omega)
    beta = solve_amplitudes(s, y, SolveOptions(ridge=0.0, method="svd"))
    model = FourierModel(
        omega=omega, beta=beta, activation="fourier", stats=NormalizationStats.identity(1)
    )
    np.testing.assert_allclose(predict(model, x)[:, 0], y, atol=1e-7)


def test_dataset_validation():
    with pytest.raises(DimensionMismatchError):
        Dataset(np.zeros((3, 1)), np.zeros(4))
    with pytest.raises(ValueError):
        Dataset(np.array([[np.inf]]), np.array([1.0]))
    with pytest.raises(DimensionMismatchError):
        Dataset(np.zeros((0, 1)), np.zeros(0))


@given(st.integers(2, 30), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_normalization_round_trip_property(n, d, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(3.0, 2.0, size=(n, d))
    x += np.linspace(0, 1, n)[:, None]  # guard against constant columns
    y = rng.normal(size=n) + np.linspace(0, 1, n)
    data = Dataset(x, y)
    out, stats = normalize_dataset(data)
    same = apply_normalization(data, stats)
    np.testing.assert_allclose(same.x, out.x, atol=1e-12)
    back = denormalize_dataset(out, stats)
    np.testing.assert_allclose(back.x, data.x, atol=1e-9)
    np.testing.assert_allclose(back.y, data.y, atol=1e-9)
