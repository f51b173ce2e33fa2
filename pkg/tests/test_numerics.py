import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh, expm

from qcatastrophe.asymptotic import entropy_from_ratio, ratio_general_theta, ratio_molar_diagonal
from qcatastrophe.numerics import (
    Basis,
    DomainTooSmallError,
    Grid1D,
    InvalidDensityMatrixError,
    NumericsError,
    TruncationError,
    TwoModeState,
    beam_splitter_amplitudes,
    beam_splitter_rotate,
    build_cusp_fock_hamiltonian,
    default_grid_1d,
    entropy_1d,
    entropy_2d,
    finite_mu_entropy,
    fock_coefficients,
    fock_cusp_entropy,
    hermite_functions,
    reduced_density_matrix,
    schmidt_entropy,
    solve_1d_ground_state,
    solve_2d_ground_state,
    von_neumann_entropy,
)
from qcatastrophe.potentials import cusp, molar

HALF_PI = math.pi / 2


def harmonic(eps):
    return lambda y: 0.5 * eps * eps * y * y


def ladder(n):
    return np.diag(np.sqrt(np.arange(1, n)), 1)


def expm_beam_splitter(c1, theta):
    """Apply exp(+(theta/2)(a1+ a2 - a1 a2+)) to (sum c_n |n>)|0> on a truncated space."""
    n = c1.size
    a = ladder(n)
    eye = np.eye(n)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    G = 0.5 * theta * (a1.T @ a2 - a1 @ a2.T)
    vac = np.zeros(n)
    vac[0] = 1.0
    out = expm(G) @ np.kron(c1, vac)
    return out.reshape(n, n)


class TestGrid:
    def test_minimum_points(self):
        with pytest.raises(ValueError):
            Grid1D(-1.0, 1.0, 10)

    def test_symmetric_grid_has_origin(self):
        g = Grid1D.symmetric(10.0, 0.05)
        assert g.n_points % 2 == 1
        assert g.points[g.n_points // 2] == pytest.approx(0.0, abs=1e-14)

    def test_default_grid_covers_wells(self):
        p = cusp(-1.0, 40.0)
        g = default_grid_1d(p, 0.02)
        assert g.y_max >= math.sqrt(40.0) + 5.0 / math.sqrt(math.sqrt(2.0))


class TestSolve1D:
    def test_harmonic_energy(self):
        e, psi = solve_1d_ground_state(harmonic(1.0), Grid1D.symmetric(10.0, 0.005))
        assert e == pytest.approx(0.5, abs=1e-6)
        g = Grid1D.symmetric(10.0, 0.005)
        gauss = math.pi ** -0.25 * np.exp(-0.5 * g.points ** 2)
        assert np.max(np.abs(psi - gauss)) < 1e-5

    def test_even_sector_matches_full_solve(self):
        # an off-centre grid disables the parity reduction
        g_sym = Grid1D.symmetric(9.0, 0.01)
        g_off = Grid1D(-9.0, 9.003, g_sym.n_points)
        V = lambda y: y ** 4 / 4 - y * y  # noqa: E731
        e1, _ = solve_1d_ground_state(V, g_sym)
        e2, _ = solve_1d_ground_state(V, g_off)
        assert e1 == pytest.approx(e2, abs=1e-6)

    def test_cusp_energy_against_perturbation_theory(self):
        # first-order anharmonic shift <y^4>/(4 mu) with <y^4> = 3/(4 eps^2)
        p = cusp(2.0, 10.0)
        eps = math.sqrt(2.0)
        e_coarse, _ = solve_1d_ground_state(p, default_grid_1d(p, 0.02))
        e_fine, _ = solve_1d_ground_state(p, default_grid_1d(p, 0.01))
        assert e_coarse == pytest.approx(e_fine, abs=1e-4)
        first_order = eps / 2 + 3.0 / (16.0 * eps ** 2 * 10.0)
        assert e_fine == pytest.approx(first_order, abs=2e-3)
        assert e_fine - eps / 2 == pytest.approx(3.0 / (16.0 * eps ** 2 * 10.0), rel=0.2)

    def test_double_well_parity_and_lobes(self):
        p = cusp(-1.0, 40.0)
        g = default_grid_1d(p, 0.02)
        _, psi = solve_1d_ground_state(p, g)
        assert np.max(np.abs(psi - psi[::-1])) < 1e-12
        y = g.points
        peak = abs(y[np.argmax(psi)])
        assert peak == pytest.approx(math.sqrt(40.0), abs=0.1)
        assert np.sum(psi[y > 0] ** 2) * g.spacing == pytest.approx(0.5, abs=1e-6)

    def test_normalisation_and_sign(self):
        g = Grid1D.symmetric(8.0, 0.02)
        _, psi = solve_1d_ground_state(harmonic(2.0), g)
        assert np.sum(psi ** 2) * g.spacing == pytest.approx(1.0, abs=1e-12)
        assert psi.sum() > 0

    def test_domain_too_small(self):
        with pytest.raises(DomainTooSmallError):
            solve_1d_ground_state(harmonic(0.1), Grid1D.symmetric(2.0, 0.01))


class TestFock:
    def test_hermite_orthonormal(self):
        g = Grid1D.symmetric(15.0, 0.01)
        H = hermite_functions(g.points, 60)
        assert H @ H.T * g.spacing == pytest.approx(np.eye(61), abs=1e-10)

    def test_harmonic_ground_state(self):
        g = Grid1D.symmetric(10.0, 0.005)
        _, psi = solve_1d_ground_state(harmonic(1.0), g)
        c = fock_coefficients(psi, g, 20)
        assert abs(c[0]) == pytest.approx(1.0, abs=1e-6)
        assert np.max(np.abs(c[1:])) < 1e-4

    def test_odd_coefficients_vanish(self):
        p = cusp(-1.0, 10.0)
        g = default_grid_1d(p, 0.02)
        _, psi = solve_1d_ground_state(p, g)
        c = fock_coefficients(psi, g, 120)
        assert np.max(np.abs(c[1::2])) < 1e-13

    @pytest.mark.parametrize("d", [1.0, 3.0, 5.0])
    def test_displaced_gaussian_pair(self, d):
        g = Grid1D.symmetric(20.0, 0.01)
        y = g.points
        psi = np.exp(-0.5 * (y - d) ** 2) + np.exp(-0.5 * (y + d) ** 2)
        psi /= math.sqrt(np.sum(psi ** 2) * g.spacing)
        n = np.arange(80)
        log_amp = -d * d / 4 + n * math.log(d / math.sqrt(2)) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
        coherent = np.exp(log_amp)
        expected = coherent * (1 + (-1.0) ** n)
        expected /= np.linalg.norm(expected)
        assert fock_coefficients(psi, g, 79) == pytest.approx(expected, abs=1e-9)

    def test_truncation_error(self):
        g = Grid1D.symmetric(20.0, 0.01)
        y = g.points
        psi = math.pi ** -0.25 * np.exp(-0.5 * (y - 6.0) ** 2)
        with pytest.raises(TruncationError):
            fock_coefficients(psi, g, 10)


class TestBeamSplitter:
    def test_vacuum(self):
        c = np.zeros(5)
        c[0] = 1.0
        M = beam_splitter_amplitudes(c, 1.234)
        assert M[0, 0] == 1.0 and np.count_nonzero(M) == 1

    def test_single_photon(self):
        M = beam_splitter_amplitudes(np.array([0.0, 1.0]), HALF_PI)
        r = math.sqrt(0.5)
        assert M == pytest.approx(np.array([[0.0, -r], [r, 0.0]]), abs=1e-15)

    def test_two_photons(self):
        M = beam_splitter_amplitudes(np.array([0.0, 0.0, 1.0]), HALF_PI)
        assert [M[2, 0] ** 2, M[1, 1] ** 2, M[0, 2] ** 2] == pytest.approx([0.25, 0.5, 0.25], abs=1e-15)
        assert np.sign(M[1, 1]) == -1

    @given(st.integers(0, 2 ** 32 - 1), st.floats(0.0, math.pi))
    @settings(max_examples=20, deadline=None)
    def test_matches_matrix_exponential(self, seed, theta):
        c = np.random.default_rng(seed).normal(size=12)
        c /= np.linalg.norm(c)
        ours = beam_splitter_amplitudes(c, theta)
        # truncated generator is exact on the number-conserving blocks that fit
        oracle = expm_beam_splitter(np.concatenate([c, np.zeros(12)]), theta)[:12, :12]
        assert ours == pytest.approx(oracle, abs=1e-10)

    @given(st.integers(0, 2 ** 32 - 1), st.floats(0.0, 2 * math.pi))
    @settings(max_examples=30, deadline=None)
    def test_unitarity_and_number_conservation(self, seed, theta):
        c = np.random.default_rng(seed).normal(size=61)
        c /= np.linalg.norm(c)
        M = beam_splitter_amplitudes(c, theta)
        assert np.sum(M ** 2) == pytest.approx(1.0, abs=1e-12)
        total = np.add.outer(np.arange(61), np.arange(61))
        blocks = np.bincount(total.ravel(), weights=(M ** 2).ravel())[:61]
        assert blocks == pytest.approx(c ** 2, abs=1e-12)

    def test_rotate_wraps_amplitudes(self):
        st_ = beam_splitter_rotate(np.array([0.0, 1.0]), HALF_PI)
        assert st_.basis is Basis.FOCK and st_.norm == pytest.approx(1.0)


class TestEntropy:
    def test_product_state(self):
        amps = np.outer([0.6, 0.8], [1.0, 0.0])
        rdm = reduced_density_matrix(TwoModeState(amps, Basis.FOCK))
        assert np.linalg.matrix_rank(rdm.entries) == 1
        assert von_neumann_entropy(rdm) == 0.0

    def test_bell_state(self):
        r = math.sqrt(0.5)
        rdm = reduced_density_matrix(TwoModeState(np.array([[0.0, -r], [r, 0.0]]), Basis.FOCK))
        assert rdm.entries == pytest.approx(np.diag([0.5, 0.5]))
        assert von_neumann_entropy(rdm) == pytest.approx(1.0)

    @pytest.mark.parametrize("diag, s", [([1.0], 0.0), ([0.5, 0.5], 1.0), ([0.5, 0.25, 0.25], 1.5)])
    def test_diagonal(self, diag, s):
        assert von_neumann_entropy(np.diag(diag)) == pytest.approx(s, abs=1e-14)

    def test_invalid(self):
        with pytest.raises(InvalidDensityMatrixError):
            von_neumann_entropy(np.diag([1.1, -0.1]))

    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 30), st.integers(2, 30))
    @settings(max_examples=40)
    def test_schmidt_symmetry(self, seed, n1, n2):
        amps = np.random.default_rng(seed).normal(size=(n1, n2))
        amps /= np.linalg.norm(amps)
        st_ = TwoModeState(amps, Basis.FOCK)
        s1 = von_neumann_entropy(reduced_density_matrix(st_, 1))
        s2 = von_neumann_entropy(reduced_density_matrix(st_, 0))
        assert s1 == pytest.approx(s2, abs=1e-8)
        assert schmidt_entropy(amps) == pytest.approx(s1, abs=1e-8)
        rdm = reduced_density_matrix(st_, 1).entries
        assert np.trace(rdm) == pytest.approx(1.0, abs=1e-12)
        assert np.array_equal(rdm, rdm.T)


class TestPipeline1D:
    @pytest.mark.parametrize("eps", [0.5, 2.0, 4.0])
    def test_gaussian_oracle(self, eps):
        exact = entropy_from_ratio(ratio_general_theta(eps, HALF_PI))
        assert finite_mu_entropy(harmonic(eps), HALF_PI) == pytest.approx(exact, abs=1e-4)

    @pytest.mark.parametrize("theta", [0.4, 1.1, 2.5])
    def test_gaussian_oracle_general_theta(self, theta):
        exact = entropy_from_ratio(ratio_general_theta(2.0, theta))
        assert entropy_1d(harmonic(2.0), theta, 0.01) == pytest.approx(exact, abs=1e-4)

    def test_unit_frequency_product(self):
        assert entropy_1d(harmonic(1.0), HALF_PI, 0.02) < 1e-8

    def test_cusp_a_one_decays(self):
        values = [finite_mu_entropy(cusp(1.0, mu)) for mu in (5.0, 20.0, 80.0)]
        assert values[0] > values[1] > values[2]
        assert values[2] < 1e-3

    def test_cusp_peak_on_negative_side(self):
        A = np.linspace(-2.0, 2.0, 41)
        S = [entropy_1d(cusp(a, 40.0), HALF_PI, 0.02) for a in A]
        i = int(np.argmax(S))
        assert A[i] < 0 and S[i] > 1.0

    def test_butterfly_approaches_triple_point(self):
        from qcatastrophe.potentials import butterfly
        s_near = entropy_1d(butterfly(0.9711, 20.0), HALF_PI, 0.01)
        s_above = entropy_1d(butterfly(1.05, 20.0), HALF_PI, 0.01)
        assert 1.4 < s_near < 1.8
        assert s_above < 0.1


class TestFockHamiltonian:
    def test_symmetric(self):
        H = build_cusp_fock_hamiltonian(-0.7, 10.0, 12)
        assert (H != H.T).nnz == 0

    def test_minimum_size(self):
        with pytest.raises(ValueError):
            build_cusp_fock_hamiltonian(1.0, 10.0, 9)

    def test_a_one_no_quadratic_coupling(self):
        H = build_cusp_fock_hamiltonian(1.0, 1e12, 12).toarray()
        assert np.count_nonzero(np.abs(H - np.diag(np.diag(H))) > 1e-9) == 0
        vals, vecs = eigh(H)
        assert abs(vecs[0, 0]) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("A, mu", [(2.0, 10.0), (-1.0, 10.0)])
    def test_agrees_with_grid(self, A, mu):
        assert fock_cusp_entropy(A, mu, 40) == pytest.approx(finite_mu_entropy(cusp(A, mu)), abs=1e-3)

    def test_matches_harmonic_limit(self):
        exact = entropy_from_ratio(ratio_general_theta(math.sqrt(2.0), HALF_PI))
        assert fock_cusp_entropy(2.0, 1e9, 30) == pytest.approx(exact, abs=1e-6)


class TestSolve2D:
    def test_rejects_1d_model(self):
        from qcatastrophe.potentials import CatastropheError
        with pytest.raises(CatastropheError):
            solve_2d_ground_state(cusp(1.0, 1.0))

    def test_memory_guard(self):
        with pytest.raises(NumericsError, match="coarser"):
            solve_2d_ground_state(molar(2.0, 1.0), n_points=4096)

    def test_harmonic_limit(self):
        # gamma = 0 with A > 0 is two decoupled identical oscillators
        gs = solve_2d_ground_state(molar(1e-9, 1e6, 1.0), n_points=128, half_width=8.0)
        assert gs.energy == pytest.approx(1.0, abs=2e-3)
        assert schmidt_entropy(gs.state.amplitudes, gs.state.spacing) < 1e-6

    def test_symmetries_post_hoc(self):
        gs = solve_2d_ground_state(molar(2.0, 10.0), n_points=128)
        psi = gs.state.amplitudes
        assert np.max(np.abs(psi - psi.T)) < 1e-8
        assert np.max(np.abs(psi - psi[::-1, :])) < 1e-8
        assert gs.state.norm == pytest.approx(1.0, abs=1e-10)

    def test_critical_point_richardson(self):
        p = molar(1.0, 20.0)
        s1, s2, s3 = (entropy_2d(p, n) for n in (96, 192, 384))
        # second-order stencil: successive differences shrink by about four
        assert abs(s3 - s2) < abs(s2 - s1)
        extrapolated = s3 + (s3 - s2) / 3.0
        assert abs(extrapolated - s3) < 5e-3
        assert 0.0 < extrapolated < 3.0

    def test_gamma_two_mu_thirty(self):
        assert finite_mu_entropy(molar(2.0, 30.0)) == pytest.approx(1.0, abs=0.1)

    def test_diagonal_lobes_mu_forty(self):
        target = entropy_from_ratio(ratio_molar_diagonal(0.8))
        assert finite_mu_entropy(molar(0.8, 40.0)) == pytest.approx(target, abs=0.1)
