import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arff.core import Dataset, normalize_dataset
from arff.errors import NonFiniteAmplitudeError
from arff.experiments import case_target, generate_dataset
from arff.sampler import (
    AdaptiveCovConfig,
    RunningCovariance,
    SamplerConfig,
    covariance_update,
    metropolis_accept,
    propose,
    train,
)


def small_config(**kw):
    defaults = dict(
        num_features=8,
        iterations=30,
        step_size=1.0,
        exponent=1.0,
        ridge=0.1,
        refresh_every=5,
        seed=7,
    )
    defaults.update(kw)
    return SamplerConfig.from_iterations(**defaults)


def case1_data(n=400, seed=0):
    raw = generate_dataset(case_target(1), n, seed)
    return normalize_dataset(raw)


# ----------------------------------------------------------------------- propose


def test_propose_zero_step_is_identity(rng):
    omega = rng.standard_normal((5, 3))
    out = propose(omega, 0.0, None, rng)
    np.testing.assert_array_equal(out, omega)
    out = propose(omega, 0.0, np.eye(3), rng)
    np.testing.assert_array_equal(out, omega)


def test_propose_zero_covariance_is_identity(rng):
    omega = rng.standard_normal((4, 2))
    out = propose(omega, 1.0, np.zeros((2, 2)), rng)
    np.testing.assert_array_equal(out, omega)


def test_propose_standard_normal_statistics():
    rng = np.random.default_rng(42)
    omega = np.zeros((100_000, 2))
    steps = (propose(omega, 0.5, np.eye(2), rng) - omega) / 0.5
    assert np.abs(steps.mean(axis=0)).max() < 0.01
    np.testing.assert_allclose(np.cov(steps.T), np.eye(2), atol=0.02)


def test_propose_respects_covariance_shape():
    rng = np.random.default_rng(3)
    cov = np.array([[4.0, 1.0], [1.0, 1.0]])
    omega = np.zeros((200_000, 2))
    steps = propose(omega, 1.0, cov, rng)
    np.testing.assert_allclose(np.cov(steps.T), cov, atol=0.05)


def test_propose_repairs_indefinite_covariance(rng):
    # tiny negative eigenvalue from floating error must not crash
    cov = np.array([[1.0, 1.0], [1.0, 1.0 - 1e-15]])
    out = propose(np.zeros((3, 2)), 1.0, cov, rng)
    assert np.isfinite(out).all()


# -------------------------------------------------------------------- metropolis


def test_metropolis_examples():
    assert metropolis_accept(1.0, 2.0, 1.0, 0.5)  # ratio 2 > 0.5
    assert not metropolis_accept(2.0, 1.0, 2.0, 0.3)  # ratio 0.25 < 0.3
    assert metropolis_accept(0.0, 1.0, 1.0, 0.999)  # zero old amplitude
    assert metropolis_accept(0.0, 0.0, 1.0, 0.999)


def test_metropolis_vector_amplitudes():
    old = np.array([3.0 + 4.0j, 0.0])  # norm 5
    new = np.array([6.0 + 8.0j, 0.0])  # norm 10
    assert metropolis_accept(old, new, 1.0, 0.9)
    assert not metropolis_accept(new, old, 1.0, 0.9)


def test_metropolis_huge_exponent_no_overflow_misdecision():
    # ratio**2350 saturates to inf / 0 but the decisions stay correct
    assert metropolis_accept(1.0, 2.0, 2350.0, 0.999)
    assert not metropolis_accept(2.0, 1.0, 2350.0, 1e-12)
    assert metropolis_accept(1.0, 1.01, 2350.0, 0.999)
    assert not metropolis_accept(1.01, 1.0, 2350.0, 0.5)


@given(
    st.floats(1e-6, 1e6),
    st.floats(1e-6, 1e6),
    st.floats(0.1, 50.0),
    st.floats(0.0, 0.999),
    st.integers(-30, 30),
)
def test_metropolis_scale_invariance(old, new, exponent, r_u, log2_scale):
    scale = 2.0**log2_scale
    before = metropolis_accept(old, new, exponent, r_u)
    after = metropolis_accept(scale * old, scale * new, exponent, r_u)
    assert before == after


# -------------------------------------------------------------------- covariance


def test_covariance_identical_vectors():
    acc = RunningCovariance.zero(2)
    for _ in range(5):
        acc = covariance_update(acc, np.array([3.0, -1.0]))
    np.testing.assert_allclose(acc.mean(), [3.0, -1.0])
    np.testing.assert_allclose(acc.covariance(), 0.0, atol=1e-14)


def test_covariance_two_point_example():
    acc = RunningCovariance.zero(2)
    acc = covariance_update(acc, np.array([1.0, 0.0]))
    acc = covariance_update(acc, np.array([-1.0, 0.0]))
    np.testing.assert_allclose(acc.mean(), [0.0, 0.0])
    np.testing.assert_allclose(acc.covariance(), np.diag([1.0, 0.0]))


def test_covariance_statistical(rng):
    acc = RunningCovariance.zero(2)
    draws = rng.standard_normal((10_000, 2)) * np.array([2.0, 1.0])
    acc.update_rows(draws)
    np.testing.assert_allclose(acc.covariance(), np.diag([4.0, 1.0]), atol=0.1)
    # batch update matches repeated single updates
    one = RunningCovariance.zero(2)
    for row in draws[:50]:
        one = covariance_update(one, row)
    batch = RunningCovariance.zero(2)
    batch.update_rows(draws[:50])
    np.testing.assert_allclose(one.covariance(), batch.covariance(), atol=1e-10)
    assert one.count == batch.count == 50


# ------------------------------------------------------------------------- train


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(num_features=4, sampling_time=0.5, step_size=1.0, exponent=1.0)
    with pytest.raises(ValueError):
        small_config(exponent=0.0)
    with pytest.raises(ValueError):
        small_config(iterations=10, adaptive_cov=AdaptiveCovConfig(burn_in=10))
    cfg = small_config(iterations=123, step_size=0.37)
    assert cfg.iterations == 123


def test_train_deterministic():
    data, stats = case1_data()
    cfg = small_config()
    model1, trace1 = train(data, cfg, "fourier", stats)
    model2, trace2 = train(data, cfg, "fourier", stats)
    assert np.array_equal(model1.omega, model2.omega)
    assert np.array_equal(model1.beta, model2.beta)
    assert np.array_equal(trace1.acceptance, trace2.acceptance)
    model3, _ = train(data, small_config(seed=8), "fourier", stats)
    assert not np.array_equal(model1.omega, model3.omega)


def test_train_trace_contents():
    data, stats = case1_data()
    cfg = small_config(iterations=20, refresh_every=5)
    model, trace = train(data, cfg, "fourier", stats, record_omega=True)
    assert trace.acceptance.shape == (20,)
    assert ((trace.acceptance >= 0) & (trace.acceptance <= 1)).all()
    assert len(trace.refresh_loss) == 5  # 4 in-loop refreshes + final
    assert (trace.refresh_loss >= 0).all()
    assert len(trace.omega_snapshots) == 5
    assert model.omega.shape == (8, 1)
    assert model.beta.shape == (8, 1)


def test_train_max_radius_gate():
    data, stats = case1_data()
    cfg = small_config(
        iterations=40,
        step_size=2.0,
        adaptive_cov=AdaptiveCovConfig(burn_in=5, max_radius=1.5),
    )
    model, trace = train(data, cfg, "fourier", stats, record_omega=True)
    for snap in trace.omega_snapshots:
        assert (np.linalg.norm(snap, axis=1) < 1.5).all()


def test_train_adaptive_covariance_runs():
    data, stats = case1_data()
    cfg = small_config(iterations=30, adaptive_cov=AdaptiveCovConfig(burn_in=10))
    model, trace = train(data, cfg, "fourier", stats)
    assert np.isfinite(model.beta).all()


def test_train_rejects_nonfinite_amplitudes(monkeypatch):
    data, stats = case1_data()
    import arff.sampler as sampler_mod

    def bad_solve(s, y, opts):
        out = np.full((s.shape[1], y.shape[1]), np.nan, dtype=complex)
        return out

    monkeypatch.setattr(sampler_mod, "solve_amplitudes", bad_solve)
    with pytest.raises(NonFiniteAmplitudeError):
        train(data, small_config(), "fourier", stats)


def test_train_sigmoid_activation():
    raw = generate_dataset(case_target(1), 300, 3)
    data, stats = normalize_dataset(raw)
    from arff.core import augment_bias

    aug = Dataset(augment_bias(data.x), data.y)
    cfg = small_config(iterations=15, step_size=2.0)
    model, _ = train(aug, cfg, "sigmoid", stats)
    assert model.omega.shape == (8, 2)  # d + 1 columns carry the bias weight
    assert np.abs(model.beta.imag).max() < 1e-12  # real design keeps beta real


def test_train_single_frequency_finds_cosine_peak():
    # target cos(5 x): the spectrum is two point masses at +-5, so the one
    # sampled frequency should settle near radius 5
    finals = []
    for seed in range(12):
        rng = np.random.default_rng(100 + seed)
        x = rng.standard_normal((1000, 1))
        y = np.cos(5.0 * x[:, 0])
        data, stats = normalize_dataset(Dataset(x, y))
        cfg = SamplerConfig.from_iterations(
            num_features=1,
            iterations=300,
            step_size=1.0,
            exponent=4.0,  # sharp test keeps the lone walker out of the noise floor
            ridge=0.1,
            refresh_every=10,
            seed=seed,
        )
        model, _ = train(data, cfg, "fourier", stats)
        finals.append(abs(model.omega[0, 0]))
    assert abs(np.median(finals) - 5.0) < 1.0


@pytest.mark.slow
def test_equidistribution_tendency():
    # amplitude moduli should spread more evenly than right after the cold start
    wins = 0
    for seed in range(10):
        raw = generate_dataset(case_target(1), 2000, 500 + seed)
        data, stats = normalize_dataset(raw)
        cfg = SamplerConfig.from_iterations(
            num_features=256,
            iterations=1000,
            step_size=5.76,
            exponent=1.0,
            ridge=0.1,
            refresh_every=10,
            seed=seed,
        )
        _, trace = train(data, cfg, "fourier", stats)
        if trace.beta_cv[-1] < trace.beta_cv[0]:
            wins += 1
    assert wins >= 8
