"""Time-average estimators: exact-mode values, shot statistics, diagnostics."""

import math
import warnings

import numpy as np
import pytest

from ethsim import (
    ConfigError,
    DomainError,
    EthConfig,
    InitialState,
    PauliTerm,
    QpeConfig,
    StateVector,
    WeightSpec,
    basis_state,
    batch_means_standard_error,
    eigendecompose,
    estimate_inverse_expectation,
    estimate_logdet_gradient,
    from_pauli_terms,
    inverse_expectation_result,
    logdet_gradient_oracle,
    logdet_gradient_result,
    operator_from_matrix,
    projector_from_state,
    run_operator_form,
    run_vector_form,
    swap_test_estimate,
    thermalization_diagnostics,
    trace_weighted,
    uniform_superposition,
)
from ethsim.core import all_ones_delta, derivative_mask, identity_operator
from ethsim.estimators import _resolve_initial_state, running_mean, running_standard_error
from ethsim.presets import build_preset
from ethsim.rng import substream

DYADIC_2Q = from_pauli_terms(
    2, [PauliTerm(0.625, "II"), PauliTerm(0.25, "ZI"), PauliTerm(0.125, "IZ")]
)
DYADIC_QPE = QpeConfig(m=3, shift=0.0, scale=0.5)
DIAG_12 = from_pauli_terms(1, [PauliTerm(1.5, "I"), PauliTerm(-0.5, "Z")])
DIAG_12_QPE = QpeConfig(m=2, shift=0.0, scale=0.25)


class TestRunningStatistics:
    def test_running_mean(self):
        np.testing.assert_allclose(running_mean(np.array([1.0, 3.0, 5.0])), [1.0, 2.0, 3.0])

    def test_running_se_matches_direct_formula(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=40)
        se = running_standard_error(x)
        assert se[0] == 0.0
        for j in (1, 7, 39):
            head = x[: j + 1]
            expected = head.std(ddof=1) / math.sqrt(j + 1)
            assert se[j] == pytest.approx(expected, rel=1e-10)

    def test_batch_means_on_iid_noise(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=1000)
        se = batch_means_standard_error(x)
        # iid case: batch means SE estimates sigma/sqrt(n) = ~0.0316
        assert 0.015 < se < 0.06

    def test_batch_means_grows_with_correlation(self):
        rng = np.random.default_rng(12)
        eps = rng.normal(size=4000)
        ar = np.empty_like(eps)
        ar[0] = eps[0]
        for j in range(1, len(eps)):  # AR(1) with strong positive correlation
            ar[j] = 0.95 * ar[j - 1] + eps[j]
        assert batch_means_standard_error(ar) > 3 * len(ar) ** -0.5 * ar.std(ddof=1)

    def test_batch_means_needs_enough_samples(self):
        assert batch_means_standard_error(np.ones(3)) == 0.0


class TestEthConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            EthConfig(dt=0.0, num_steps=10)
        with pytest.raises(ConfigError):
            EthConfig(dt=0.1, num_steps=0)
        with pytest.raises(ConfigError):
            EthConfig(dt=0.1, num_steps=10, sampling="guess")
        with pytest.raises(ConfigError):
            EthConfig(dt=0.1, num_steps=10, sampling="shots", shots=0)
        with pytest.raises(ConfigError):
            EthConfig(dt=0.1, num_steps=10, repetitions=0)
        with pytest.raises(ConfigError):
            EthConfig(dt=0.1, num_steps=10, initial_state=InitialState(kind="w-state"))

    def test_explicit_state_needs_amplitudes(self):
        with pytest.raises(ConfigError):
            EthConfig(dt=0.1, num_steps=10, initial_state=InitialState(kind="explicit"))


class TestInitialStateResolution:
    def test_uniform(self):
        eth = EthConfig(dt=0.1, num_steps=4)
        state = _resolve_initial_state(eth, 2, rep=0)
        np.testing.assert_allclose(state.amplitudes, 0.5 * np.ones(4))

    def test_explicit(self):
        init = InitialState(kind="explicit", amplitudes=(math.sqrt(0.8), math.sqrt(0.2)))
        eth = EthConfig(dt=0.1, num_steps=4, initial_state=init)
        state = _resolve_initial_state(eth, 1, rep=0)
        np.testing.assert_allclose(np.abs(state.amplitudes) ** 2, [0.8, 0.2], atol=1e-12)

    def test_restarts_reseed_random_kinds(self):
        init = InitialState(kind="phase-product", seed=9)
        eth = EthConfig(dt=0.1, num_steps=4, initial_state=init)
        s0 = _resolve_initial_state(eth, 2, rep=0)
        s1 = _resolve_initial_state(eth, 2, rep=1)
        s0_again = _resolve_initial_state(eth, 2, rep=0)
        assert not np.allclose(s0.amplitudes, s1.amplitudes)
        np.testing.assert_array_equal(s0.amplitudes, s0_again.amplitudes)

    def test_restart_of_deterministic_kind_is_identical(self):
        eth = EthConfig(dt=0.1, num_steps=4)
        s0 = _resolve_initial_state(eth, 2, rep=0)
        s1 = _resolve_initial_state(eth, 2, rep=3)
        np.testing.assert_array_equal(s0.amplitudes, s1.amplitudes)


class TestOperatorForm:
    def test_identity_observable_is_one_at_every_step(self):
        eth = EthConfig(dt=0.13, num_steps=50)
        out = run_operator_form(DYADIC_2Q, identity_operator(2), WeightSpec(kind="unit"), eth, DYADIC_QPE)
        np.testing.assert_allclose(out.series, np.ones(50), atol=1e-12)
        assert out.estimate == pytest.approx(1.0, abs=1e-12)

    def test_converges_to_weighted_trace_over_n(self):
        phi = uniform_superposition(2)
        delta = projector_from_state(phi)
        w = WeightSpec(kind="inverse")
        eth = EthConfig(dt=math.pi / 32, num_steps=2560)
        out = run_operator_form(DYADIC_2Q, delta, w, eth, DYADIC_QPE)
        target = trace_weighted(eigendecompose(DYADIC_2Q), delta, w) / 4.0
        tol = max(3 * out.standard_error, 1e-10)
        assert abs(out.estimate - target) <= tol

    def test_diag_12_ground_state_projector(self):
        # A = diag(1, 2), uniform start, projector on |0>: time average 0.5
        delta = projector_from_state(basis_state(1, 0))
        eth = EthConfig(dt=2 * math.pi / 64, num_steps=640)
        out = run_operator_form(DIAG_12, delta, WeightSpec(kind="unit"), eth, DIAG_12_QPE)
        assert out.estimate == pytest.approx(0.5, abs=1e-10)

    def test_diag_12_inverse_weight_plus_state(self):
        # <+|A^{-1}|+> for A = diag(1, 2): (1/2)(1 + 1/2) = 0.75
        eth = EthConfig(dt=2 * math.pi / 64, num_steps=640)
        val = estimate_inverse_expectation(DIAG_12, uniform_superposition(1), eth, DIAG_12_QPE)
        assert val == pytest.approx(0.75, abs=1e-9)

    def test_cost_counters(self):
        eth = EthConfig(dt=0.1, num_steps=25, repetitions=2)
        out = run_operator_form(DYADIC_2Q, identity_operator(2), WeightSpec(kind="unit"), eth, DYADIC_QPE)
        assert out.cost.time_steps == 50
        assert out.cost.gate_tally == 3 * 50
        assert out.cost.shots == 0

    def test_series_length_is_steps_times_reps(self):
        eth = EthConfig(dt=0.1, num_steps=20, repetitions=3)
        out = run_operator_form(DYADIC_2Q, all_ones_delta(2), WeightSpec(kind="unit"), eth, DYADIC_QPE)
        assert len(out.series) == 60
        assert len(out.running_mean) == 60
        assert out.estimate == out.running_mean[-1]

    def test_shots_mode_consistency(self):
        delta = projector_from_state(uniform_superposition(2))
        w = WeightSpec(kind="inverse")
        exact = run_operator_form(
            DYADIC_2Q, delta, w, EthConfig(dt=math.pi / 32, num_steps=2560), DYADIC_QPE
        )
        eth = EthConfig(dt=math.pi / 32, num_steps=2560, sampling="shots", shots=2000, seed=7)
        noisy = run_operator_form(DYADIC_2Q, delta, w, eth, DYADIC_QPE)
        assert noisy.cost.shots == 2000 * 2560
        assert abs(noisy.estimate - exact.estimate) <= 4 * noisy.standard_error

    def test_shots_runs_are_reproducible(self):
        eth = EthConfig(dt=0.21, num_steps=40, sampling="shots", shots=64, seed=3)
        a = run_operator_form(DYADIC_2Q, all_ones_delta(2), WeightSpec(kind="unit"), eth, DYADIC_QPE)
        b = run_operator_form(DYADIC_2Q, all_ones_delta(2), WeightSpec(kind="unit"), eth, DYADIC_QPE)
        np.testing.assert_array_equal(a.series, b.series)

    def test_more_shots_tighten_error(self):
        delta = all_ones_delta(2)
        w = WeightSpec(kind="unit")
        ses = []
        for shots in (100, 400, 1600, 6400):
            eth = EthConfig(dt=0.37, num_steps=64, sampling="shots", shots=shots, seed=5)
            ses.append(run_operator_form(DYADIC_2Q, delta, w, eth, DYADIC_QPE).standard_error)
        assert ses[0] > ses[1] > ses[2] > ses[3]

    def test_repetitions_tighten_error(self):
        # merged register bins keep the series oscillating, and phase-product
        # restarts decorrelate it between repeats
        merged = QpeConfig(m=1, shift=0.0, scale=0.05)
        delta = all_ones_delta(2)
        init = InitialState(kind="phase-product", seed=2)
        base = dict(dt=0.37, num_steps=256, initial_state=init, seed=17)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            one = run_operator_form(
                DYADIC_2Q, delta, WeightSpec(kind="unit"), EthConfig(repetitions=1, **base), merged
            )
            four = run_operator_form(
                DYADIC_2Q, delta, WeightSpec(kind="unit"), EthConfig(repetitions=4, **base), merged
            )
        assert one.standard_error > 0
        assert four.standard_error < one.standard_error


class TestVectorForm:
    def test_flat_spectrum_matches_operator_form(self):
        # fully degenerate generator: one group, no collision to warn about
        a = identity_operator(2)
        qpe = QpeConfig(m=2, shift=0.0, scale=0.5)
        phi = uniform_superposition(2)
        eth = EthConfig(dt=0.3, num_steps=32)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            vec = run_vector_form(a, phi, eth, qpe)
            op = run_operator_form(
                a, projector_from_state(phi), WeightSpec(kind="unit"), eth, qpe
            )
        # weights are all 1 on the flat spectrum, so the two runs coincide
        np.testing.assert_allclose(vec.series, op.series, atol=1e-10)

    def test_diag_12_ground_state_overlap(self):
        # (1/N) sum_p |<0|p>|^2 / E_p = (1/2)(1/1) with Phi = |0>
        eth = EthConfig(dt=2 * math.pi / 64, num_steps=640)
        out = run_vector_form(DIAG_12, basis_state(1, 0), eth, DIAG_12_QPE)
        assert out.estimate == pytest.approx(0.5, abs=1e-9)

    def test_matches_operator_form_through_inverse_weight(self):
        phi = uniform_superposition(2)
        eth = EthConfig(dt=math.pi / 32, num_steps=2560)
        vec = inverse_expectation_result(DYADIC_2Q, phi, eth, DYADIC_QPE, form="vector")
        op = inverse_expectation_result(DYADIC_2Q, phi, eth, DYADIC_QPE, form="operator")
        assert vec.value == pytest.approx(op.value, abs=1e-9)

    def test_register_residual_zero_in_exact_binning(self):
        phi = uniform_superposition(2)
        eth = EthConfig(dt=0.19, num_steps=16)
        out = run_vector_form(DYADIC_2Q, phi, eth, DYADIC_QPE)
        assert out.register_residual <= 1e-13


class TestSwapTest:
    def test_identical_states(self):
        s = uniform_superposition(1)
        assert swap_test_estimate(s, s, shots=500, seed=1) == pytest.approx(1.0, abs=0.15)

    def test_orthogonal_states(self):
        est = swap_test_estimate(basis_state(1, 0), basis_state(1, 1), shots=500, seed=2)
        assert est == pytest.approx(0.0, abs=0.15)

    def test_half_overlap_large_shots(self):
        est = swap_test_estimate(basis_state(1, 0), uniform_superposition(1), shots=100_000, seed=3)
        assert est == pytest.approx(0.5, abs=0.01)

    def test_unbiased_over_seeds(self):
        a = basis_state(1, 0)
        b = uniform_superposition(1)
        vals = np.array([swap_test_estimate(a, b, shots=32, seed=s) for s in range(500)])
        assert vals.mean() == pytest.approx(0.5, abs=3 * vals.std(ddof=1) / math.sqrt(len(vals)))

    def test_validation(self):
        with pytest.raises(ConfigError):
            swap_test_estimate(basis_state(1, 0), basis_state(1, 0), shots=0, seed=1)
        with pytest.raises(DomainError):
            swap_test_estimate(basis_state(1, 0), basis_state(2, 0), shots=10, seed=1)


class TestThermalizationDiagnostics:
    def test_thermalizing_preset_verdict(self):
        from ethsim import PhaseCollisionWarning

        cfg = build_preset("paper-example")
        a = from_pauli_terms(1, [PauliTerm(c, ax) for c, ax in cfg.problem.terms])
        delta = all_ones_delta(1, scale=math.sqrt(2.0))
        # the preset merges both levels into one bin on purpose
        with pytest.warns(PhaseCollisionWarning):
            out = run_operator_form(a, delta, WeightSpec(kind="unit"), cfg.eth, cfg.qpe)
        assert out.thermalized.verdict == "THERMALIZED"
        assert out.thermalized.plateau == pytest.approx(1 / math.sqrt(2), abs=1e-6)

    def test_integrable_generator_is_vetoed(self):
        # observable commutes with the generator: no relaxation can occur
        from ethsim import PhaseCollisionWarning

        cfg = build_preset("integrable-counterexample")
        a = from_pauli_terms(1, [PauliTerm(c, ax) for c, ax in cfg.problem.terms])
        delta = all_ones_delta(1, scale=math.sqrt(2.0))
        with pytest.warns(PhaseCollisionWarning):
            out = run_operator_form(a, delta, WeightSpec(kind="unit"), cfg.eth, cfg.qpe)
        assert out.thermalized.verdict == "DIAGONAL-ENSEMBLE-ONLY"
        assert out.thermalized.commutator <= 1e-10
        assert abs(out.thermalized.plateau - out.thermalized.trace_target) > 0.1

    def test_nonstationary_series(self):
        # a series plateauing far from both oracle targets matches neither
        spec = eigendecompose(DIAG_12)
        drifting = np.linspace(5.0, 6.0, 200)
        verdict = thermalization_diagnostics(
            drifting, spec, all_ones_delta(1), uniform_superposition(1)
        )
        assert verdict.verdict == "NON-STATIONARY"


class TestInverseExpectation:
    def test_dyadic_closed_form(self):
        phi = uniform_superposition(2)
        eth = EthConfig(dt=math.pi / 32, num_steps=2560)
        val = estimate_inverse_expectation(DYADIC_2Q, phi, eth, DYADIC_QPE)
        assert val == pytest.approx(25.0 / 12.0, abs=1e-9)

    def test_normalization_is_dimension(self):
        phi = uniform_superposition(2)
        eth = EthConfig(dt=math.pi / 32, num_steps=2560)
        out = inverse_expectation_result(DYADIC_2Q, phi, eth, DYADIC_QPE)
        assert out.normalization == pytest.approx(4.0)
        assert out.value == pytest.approx(out.raw.estimate * 4.0)

    def test_degenerate_identity_needs_haar_averaging(self):
        # a single run gives N |<phi|r>|^2; only the restart average recovers 1
        a = identity_operator(2)
        qpe = QpeConfig(m=2, shift=0.0, scale=0.5)
        phi = uniform_superposition(2)
        init = InitialState(kind="haar", seed=21)
        eth = EthConfig(dt=0.3, num_steps=4, initial_state=init, repetitions=200)
        out = inverse_expectation_result(a, phi, eth, qpe)
        block = out.raw.series.reshape(200, 4).mean(axis=1)
        se = block.std(ddof=1) / math.sqrt(len(block))
        assert abs(out.value - 1.0) <= 3 * 4.0 * se


class TestLogdetGradient:
    def test_self_mask_gives_dimension(self):
        eth = EthConfig(dt=math.pi / 32, num_steps=2560)
        val = estimate_logdet_gradient(DYADIC_2Q, DYADIC_2Q, eth, DYADIC_QPE)
        assert val == pytest.approx(4.0, abs=1e-9)

    def test_matches_oracle_and_finite_difference(self):
        mask = derivative_mask(2, [(0, 0, 1.0), (3, 3, 1.0), (1, 2, 0.5), (2, 1, 0.5)])
        eth = EthConfig(dt=math.pi / 32, num_steps=2560)
        out = logdet_gradient_result(DYADIC_2Q, mask, eth, DYADIC_QPE)
        assert out.value == pytest.approx(5.0, abs=1e-9)
        assert logdet_gradient_oracle(DYADIC_2Q, mask) == pytest.approx(5.0, rel=1e-9)
        h = 1e-4
        up = np.linalg.slogdet(DYADIC_2Q.entries + h * mask.entries)[1]
        dn = np.linalg.slogdet(DYADIC_2Q.entries - h * mask.entries)[1]
        fd = (up - dn) / (2 * h)
        assert abs(out.value - fd) <= max(3 * 4.0 * out.raw.standard_error, 1e-3)


class TestDeterminism:
    def test_identical_configs_identical_series(self):
        eth = EthConfig(dt=0.23, num_steps=64, sampling="shots", shots=128, seed=19)
        w = WeightSpec(kind="inverse")
        delta = all_ones_delta(2)
        a = run_operator_form(DYADIC_2Q, delta, w, eth, DYADIC_QPE)
        b = run_operator_form(DYADIC_2Q, delta, w, eth, DYADIC_QPE)
        np.testing.assert_array_equal(a.series, b.series)
        assert a.estimate == b.estimate

    def test_seed_changes_shot_noise(self):
        w = WeightSpec(kind="inverse")
        delta = all_ones_delta(2)
        eth_a = EthConfig(dt=0.23, num_steps=64, sampling="shots", shots=128, seed=19)
        eth_b = EthConfig(dt=0.23, num_steps=64, sampling="shots", shots=128, seed=20)
        a = run_operator_form(DYADIC_2Q, delta, w, eth_a, DYADIC_QPE)
        b = run_operator_form(DYADIC_2Q, delta, w, eth_b, DYADIC_QPE)
        assert not np.array_equal(a.series, b.series)

    def test_substream_independence(self):
        s1 = substream(7, "shots", 0, 1).random(4)
        s2 = substream(7, "shots", 0, 2).random(4)
        s1_again = substream(7, "shots", 0, 1).random(4)
        assert not np.allclose(s1, s2)
        np.testing.assert_array_equal(s1, s1_again)
