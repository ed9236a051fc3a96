import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permix import exact
from permix.permcore import Permutation, delta
from permix.specmat import (
    FredholmModel,
    NonErgodicError,
    RateReport,
    Spectrum,
    algebraic_eigenvalue_check,
    build_A,
    build_B,
    build_C,
    build_P,
    build_Q,
    circulant_eigs,
    circulant_max_modulus,
    circulant_modulus,
    density_evolution_rate,
    eigen_spectrum,
    fredholm_determinant,
    fredholm_matrix,
    fredholm_zeros,
    invariant_density,
    lambda_sigma,
    match_spectra,
    multiply_model,
    r_ess_and_entropy,
    split_zero_cluster,
    stochastic_eta,
    subshift_model,
    subshift_permuted_model,
    transition_matrix,
    worst_permutation,
    worst_rate_bound,
    zero_eigenvalue_multiplicities,
    zeta_identity_check,
)

CYCLE = Permutation((1, 2, 0))  # the 3-cycle (0 1 2)


def sorted_close(values, expected, tol=1e-9):
    return match_spectra(np.asarray(values), np.asarray(expected, dtype=complex)) <= tol


class TestBuilders:
    def test_displayed_matrices(self):
        assert build_A(2, 3).tolist() == [[1, 1, 0], [1, 0, 1], [0, 1, 1]]
        assert build_A(3, 5).tolist() == [
            [1, 1, 1, 0, 0],
            [1, 0, 0, 1, 1],
            [0, 1, 1, 1, 0],
            [1, 1, 0, 0, 1],
            [0, 0, 1, 1, 1],
        ]
        assert build_C(2, 5).tolist() == [
            [1, 1, 0, 0, 0],
            [0, 1, 1, 0, 0],
            [0, 0, 1, 1, 0],
            [0, 0, 0, 1, 1],
            [1, 0, 0, 0, 1],
        ]
        half = [[1, 1, 0, 0, 0, 0], [0, 0, 1, 1, 0, 0], [0, 0, 0, 0, 1, 1]]
        assert build_B(2, 3).tolist() == half + half

    def test_permutation_matrices(self):
        assert build_P(CYCLE).tolist() == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
        Q = build_Q(CYCLE, 2)
        assert Q[0, 2] == Q[1, 3] == Q[2, 4] == Q[3, 5] == Q[4, 0] == Q[5, 1] == 1
        assert Q.sum() == 6
        assert (build_A(2, 3) @ build_P(CYCLE)).tolist() == [[0, 1, 1], [1, 1, 0], [1, 0, 1]]
        assert (build_B(2, 3) @ Q).tolist() == [
            [0, 0, 1, 1, 0, 0],
            [0, 0, 0, 0, 1, 1],
            [1, 1, 0, 0, 0, 0],
            [0, 0, 1, 1, 0, 0],
            [0, 0, 0, 0, 1, 1],
            [1, 1, 0, 0, 0, 0],
        ]
        assert np.array_equal(build_P(Permutation.identity(4)), np.eye(4))

    @given(st.integers(2, 6), st.integers(2, 20))
    def test_row_and_column_sums(self, m, N):
        for M in (build_A(m, N), build_B(m, N)):
            assert (M.sum(axis=0) == m).all() and (M.sum(axis=1) == m).all()
        if m <= N:
            C = build_C(m, N)
            assert (C.sum(axis=0) == m).all() and (C.sum(axis=1) == m).all()

    @settings(max_examples=40)
    @given(st.integers(2, 5), st.integers(2, 12), st.randoms())
    def test_transition_matrix_is_column_permutation(self, m, N, rnd):
        images = list(range(N))
        rnd.shuffle(images)
        sigma = Permutation(tuple(images))
        AP = transition_matrix(sigma, m)
        assert np.array_equal(AP, build_A(m, N) @ build_P(sigma))
        # row i of P(sigma) A is row sigma(i) of A
        assert np.array_equal(build_P(sigma) @ build_A(m, N), build_A(m, N)[list(sigma.images)])
        # m^-1 A P is doubly stochastic, exactly
        assert (AP.sum(axis=0) == m).all() and (AP.sum(axis=1) == m).all()

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            build_B(2, 4000)


class TestSpectrum:
    def test_paper_spectra(self):
        assert sorted_close(eigen_spectrum(build_A(2, 3)).values(), [2, 1, -1])
        assert sorted_close(eigen_spectrum(build_A(3, 5)).values(), [3, 1j, -1j, 1, -1])
        s = eigen_spectrum(build_B(2, 3))
        assert sorted_close(s.values(), [2, 1, -1, 0, 0, 0])
        assert s.dim == 6

    def test_multiplicities_sum_to_dimension(self):
        s = eigen_spectrum(build_B(2, 4) / 2)
        assert s.dim == 8
        zeros = exact.zero_root_multiplicity(exact.charpoly_int(build_B(2, 4)))
        assert sum(k for v, k in s.eigenvalues if abs(v) < 1e-4) == zeros == 7

    @given(st.integers(2, 5), st.integers(2, 10), st.randoms())
    def test_stochastic_spectrum_in_disc(self, m, N, rnd):
        images = list(range(N))
        rnd.shuffle(images)
        s = eigen_spectrum(transition_matrix(Permutation(tuple(images)), m) / m)
        assert np.all(np.abs(s.values()) <= 1 + 1e-9)

    def test_json_round_trip(self):
        s = eigen_spectrum(build_A(3, 5) / 3)
        back = Spectrum.from_dict(s.to_dict(0.5))
        assert back.eigenvalues == s.eigenvalues and back.unit_circle_count == s.unit_circle_count

    def test_tolerance_validated(self):
        with pytest.raises(ValueError):
            eigen_spectrum(np.eye(2), tol=1e-3)

    def test_exact_charpoly_agreement_small(self):
        rng = np.random.default_rng(0)
        for n in range(2, 7):
            M = rng.integers(0, 3, (n, n))
            roots = np.roots(exact.charpoly_int(M))
            assert match_spectra(eigen_spectrum(M).values(), roots) < 1e-6

    def test_split_zero_cluster(self):
        count, rest = split_zero_cluster([1e-5, -1e-5, 0.5, 1])
        assert count == 2 and sorted(rest.real) == [0.5, 1]


class TestCirculant:
    def test_examples(self):
        eigs = circulant_eigs(2, 4)
        assert abs(eigs[0] - 2) < 1e-12 and abs(eigs[2]) < 1e-12
        assert abs(abs(circulant_eigs(2, 5)[1]) - 2 * math.cos(math.pi / 5)) < 1e-12
        assert abs(exact.det_int(build_C(3, 5))) == 3
        assert abs(circulant_max_modulus(2, 3) - 1.0) < 1e-12
        assert abs(circulant_max_modulus(2, 5) - 1.6180339887498949) < 1e-12
        assert abs(circulant_max_modulus(3, 8) - math.sin(3 * math.pi / 8) / math.sin(math.pi / 8)) < 1e-12

    @pytest.mark.parametrize("N", [5, 12, 31, 64])
    def test_sine_ratio(self, N):
        for m in range(2, N):
            eigs = circulant_eigs(m, N)
            for j in range(1, N):
                assert abs(abs(eigs[j]) - circulant_modulus(m, N, j)) < 1e-12

    def test_argmax_at_j_one(self):
        for N in range(3, 513):
            for m in range(2, N):
                mods = np.abs(np.sin(m * np.arange(1, N) * np.pi / N) / np.sin(np.arange(1, N) * np.pi / N))
                best = mods.max()
                assert abs(mods[0] - best) <= 1e-9 * max(best, 1)


class TestRates:
    def test_identity_has_zero_rate(self):
        for m in (2, 3, 5):
            r = lambda_sigma(Permutation.identity(m), m)
            assert r.lambda_sigma < 1e-12 and r.r_ess == 1 / m
            spec = eigen_spectrum(build_B(m, m) @ build_Q(Permutation.identity(m), m) / m)
            assert sorted_close(spec.values(), [1] + [0] * (m * m - 1), 1e-6)

    def test_worst_permutation_rate(self):
        r = lambda_sigma(worst_permutation(2, 5), 2)
        assert abs(r.lambda_sigma - math.cos(math.pi / 5)) < 1e-12
        assert r.decelerates and r.spectral_mixing and r.eigenvalue_1_multiplicity == 1

    def test_nonmixing_is_not_spectrally_mixing(self):
        r = lambda_sigma(delta(2, 4).inverse(), 2)
        assert not r.spectral_mixing and r.unit_circle_count >= 2

    def test_report_round_trip(self):
        r = lambda_sigma(Permutation((3, 1, 4, 0, 2)), 2)
        assert RateReport.from_dict(r.to_dict()) == r

    @pytest.mark.parametrize("m,N,mult", [(2, 5, 3), (3, 5, 2), (2, 3, 2)])
    def test_worst_permutation(self, m, N, mult):
        tau = worst_permutation(m, N)
        assert list(tau.images) == [mult * i % N for i in range(N)]
        assert np.array_equal(build_P(tau) @ build_A(m, N), build_C(m, N))
        assert abs(lambda_sigma(tau, m).lambda_sigma - worst_rate_bound(m, N)) < 1e-10

    def test_worst_rate_bound(self):
        assert abs(worst_rate_bound(2, 3) - 0.5) < 1e-15
        assert abs(worst_rate_bound(2, 5) - 0.8090169943749475) < 1e-15
        with pytest.raises(ValueError):
            worst_rate_bound(2, 4)
        with pytest.raises(ValueError):
            worst_permutation(3, 6)

    def test_large_n_asymptotic(self):
        for m, N in [(2, 201), (3, 400), (5, 1001)]:
            gap = 1 - worst_rate_bound(m, N)
            approx = math.pi**2 * (m * m - 1) / (6 * N * N)
            assert abs(gap - approx) / approx < 0.02


class TestEta:
    def test_circulant(self):
        for m, N in [(2, 5), (3, 7), (4, 9)]:
            eta = stochastic_eta(build_C(m, N) / m)
            assert abs(math.sqrt(eta) - worst_rate_bound(m, N)) < 1e-12

    def test_trivial_cases(self):
        assert abs(stochastic_eta(np.full((5, 5), 0.2))) < 1e-14
        assert abs(stochastic_eta(build_P(Permutation((2, 0, 1, 3)))) - 1) < 1e-12
        with pytest.raises(ValueError):
            stochastic_eta(np.array([[0.5, 0.5], [0.2, 0.5]]))

    def test_bound_on_permuted_products(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            n = int(rng.integers(2, 17))
            B = rng.random((n, n))
            B /= B.sum(axis=0)
            P = np.eye(n)[rng.permutation(n)]
            root = math.sqrt(stochastic_eta(B))
            basis = np.linalg.svd(np.ones((1, n)))[2][1:].T
            BP = B @ P
            restricted = basis.T @ BP @ basis
            assert np.abs(np.linalg.eigvals(restricted)).max() <= root + 1e-10


class TestFredholm:
    def test_subshift_matrix_and_zeros(self):
        model = subshift_model()
        z = 0.37 + 0.1j
        assert np.allclose(fredholm_matrix(model, z), [[z / 2, z / 2], [z, 0]])
        zeros = fredholm_zeros(model)
        assert abs(zeros[0] - 1) < 1e-12 and abs(zeros[1] + 2) < 1e-12
        assert fredholm_determinant(model, 1) == 0 and fredholm_determinant(model, -2) == 0
        assert fredholm_determinant(model, 0) == 1
        assert fredholm_determinant(model, Fraction(1, 2)) == 1 - Fraction(1, 4) - Fraction(1, 8)

    def test_doubling_map(self):
        model = multiply_model(Permutation.identity(1), 2)
        assert np.allclose(fredholm_matrix(model, 1), [[0.5, 0.5], [0.5, 0.5]])
        assert not fredholm_matrix(model, 0).any()
        for z in (Fraction(1, 3), Fraction(-5, 7), 2):
            assert fredholm_determinant(model, z) == 1 - z
        assert abs(fredholm_determinant(model, 0.25 + 0.5j) - (0.75 - 0.5j)) < 1e-15

    def test_multiply_fredholm_is_scaled_bq(self):
        sigma = Permutation((2, 0, 3, 1))
        model = multiply_model(sigma, 3)
        assert np.allclose(fredholm_matrix(model, 1), build_B(3, 4) @ build_Q(sigma, 3) / 3)

    def test_densities(self):
        assert invariant_density(subshift_model()) == (Fraction(4, 3), Fraction(2, 3))
        for sigma, m in [(Permutation((1, 2, 0, 4, 3)), 2), (Permutation.identity(4), 3)]:
            rho = invariant_density(multiply_model(sigma, m))
            assert all(r == 1 for r in rho)

    def test_non_ergodic_rejected(self):
        with pytest.raises(NonErgodicError):
            invariant_density(multiply_model(delta(2, 4).inverse(), 2))

    def test_r_ess_and_entropy(self):
        r, h = r_ess_and_entropy(subshift_model())
        assert abs(r - 2 ** (-2 / 3)) < 1e-12
        assert abs(h - math.log((1 + math.sqrt(5)) / 2)) < 1e-12
        assert h < r  # recorded comparison: 0.481 against 0.630
        for m in (2, 5):
            r, h = r_ess_and_entropy(multiply_model(Permutation((1, 0, 2)), m))
            assert abs(r - 1 / m) < 1e-12 and abs(h - math.log(m)) < 1e-12

    def test_model_validation(self):
        with pytest.raises(ValueError):
            FredholmModel((Fraction(2),), ((0,),))
        assert not FredholmModel((Fraction(2), Fraction(1)), ((1, 1), (1, 0))).uniformly_expanding

    def test_permuted_subshift_model(self):
        sigma = Permutation((2, 0, 1, 3))
        model = subshift_permuted_model(sigma)
        assert model.q == 4
        assert model.transition[2] == (0, 0, 1, 0)  # cell 2 maps onto itself

    @pytest.mark.parametrize("z", [0.0, 0.3, -0.45, 0.2 + 0.3j, -0.1 - 0.4j])
    def test_zeta_identity(self, z):
        model = subshift_model()
        radius = 1.0
        for K in (5, 30):
            err = zeta_identity_check(model, z, K)
            q = abs(z) * radius
            assert err <= q ** (K + 1) / (1 - q) + 1e-14
        assert zeta_identity_check(model, 0.3, 30) < 1e-12

    def test_zeta_doubling(self):
        model = multiply_model(Permutation.identity(1), 2)
        assert zeta_identity_check(model, 0.5, 40) < 1e-12
        with pytest.raises(ValueError):
            zeta_identity_check(model, 1.5, 10)


class TestDensityEvolution:
    def test_immediate_equilibrium(self):
        assert density_evolution_rate(Permutation.identity(2), 2) == 0.0
        q = 2 * 5
        assert density_evolution_rate(worst_permutation(2, 5), 2, initial=[1] * q) == 0.0

    def test_worst_permutation_rate(self):
        assert abs(density_evolution_rate(worst_permutation(2, 5), 2) - 0.8090169943749475) < 0.01

    def test_rejects_nonmixing(self):
        with pytest.raises(ValueError):
            density_evolution_rate(delta(2, 4).inverse(), 2)


class TestAlgebraic:
    def test_identity_examples(self):
        c = algebraic_eigenvalue_check(Permutation.identity(3), 2)
        assert c.charpoly == (1, -2, -1, 2) and c.passed and c.rate_preserved
        c = algebraic_eigenvalue_check(Permutation.identity(5), 3)
        assert c.charpoly == (1, -3, 0, 0, -1, 3)  # (x-3)(x^2+1)(x-1)(x+1)
        assert c.passed and c.rate_preserved

    def test_random_s7(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            sigma = Permutation(tuple(int(x) for x in rng.permutation(7)))
            c = algebraic_eigenvalue_check(sigma, 2)
            assert c.passed
            assert c.rate_preserved == (not lambda_sigma(sigma, 2).decelerates)

    @pytest.mark.parametrize("m,N", [(2, 4), (2, 6), (3, 6)])
    def test_b_not_diagonalisable(self, m, N):
        alg, geo = zero_eigenvalue_multiplicities(build_B(m, N))
        assert geo < alg
