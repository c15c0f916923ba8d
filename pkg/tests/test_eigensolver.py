import math

import numpy as np
import pytest

from retromech.core import Grid, GridFunction, UnitsConfig
from retromech.eigensolver import (
    build_hamiltonian,
    count_interior_nodes,
    default_grid,
    density,
    energy_functional,
    make_pair,
    solve_spectrum,
    stationarity_check,
    superposition_density,
)
from retromech.lagrangian import (
    FreePotential,
    HarmonicPotential,
    InfiniteWellPotential,
    PolynomialPotential,
)

WELL = InfiniteWellPotential(1.0)


@pytest.fixture(scope="module")
def well_solution():
    grid = default_grid(WELL, 2000)
    return solve_spectrum(build_hamiltonian(WELL, grid), 5)


class TestHamiltonian:
    def test_free_structure(self):
        grid = Grid(0.0, 1.0, 16)
        ham = build_hamiltonian(FreePotential(), grid)
        kinetic = 1.0 / grid.h**2
        assert ham.dimension == 14
        assert np.allclose(ham.diag, kinetic)
        assert np.allclose(ham.offdiag, -0.5 * kinetic)

    def test_well_is_zero_inside_with_dirichlet_walls(self):
        grid = default_grid(WELL, 64)
        ham = build_hamiltonian(WELL, grid)
        assert np.allclose(ham.diag, ham.diag[0])
        with pytest.raises(ValueError, match="walls"):
            build_hamiltonian(WELL, Grid(0.0, 2.0, 64))

    def test_harmonic_diagonal_carries_potential(self):
        grid = Grid(-6.0, 6.0, 64)
        ham = build_hamiltonian(HarmonicPotential(2.0), grid)
        x = grid.points()[1:-1]
        kinetic = 1.0 / grid.h**2
        assert np.allclose(ham.diag - kinetic, 0.5 * 2.0 * x**2)

    def test_units_scale_kinetic_term(self):
        grid = Grid(0.0, 1.0, 32)
        units = UnitsConfig(hbar=2.0, mass=4.0)
        ham = build_hamiltonian(FreePotential(), grid, units)
        assert np.allclose(ham.diag, 4.0 / (4.0 * grid.h**2))

    def test_coarse_grid_rejected(self):
        with pytest.raises(ValueError, match="too coarse"):
            build_hamiltonian(FreePotential(), Grid(0.0, 1.0, 8))


class TestSpectrum:
    def test_well_energies(self, well_solution):
        exact = (np.arange(1, 6) * math.pi) ** 2 / 2.0
        rel = np.abs(well_solution.energies - exact) / exact
        assert np.max(rel) <= 1e-3
        assert abs(well_solution.energies[0] - 4.9348) < 5e-3
        assert abs(well_solution.energies[1] - 19.7392) < 2e-2

    def test_harmonic_energies(self):
        pot = HarmonicPotential(1.0)
        grid = default_grid(pot, 2000)
        sol = solve_spectrum(build_hamiltonian(pot, grid), 6)
        exact = np.arange(6) + 0.5
        assert np.max(np.abs(sol.energies - exact) / exact) <= 1e-3

    def test_normalization_and_ordering(self, well_solution):
        h = well_solution.grid.h
        for psi in well_solution.eigenfunctions:
            assert abs(np.sum(psi.samples**2) * h - 1.0) <= 1e-10
        assert np.all(np.diff(well_solution.energies) > 0)

    def test_sturm_node_counts(self, well_solution):
        for n, psi in enumerate(well_solution.eigenfunctions):
            assert count_interior_nodes(psi) == n

    def test_rayleigh_quotient_consistency(self, well_solution):
        ham = build_hamiltonian(WELL, well_solution.grid)
        for n in range(well_solution.count):
            v = well_solution.eigenfunctions[n].samples[1:-1]
            rayleigh = float(v @ ham.matvec(v) / (v @ v))
            assert abs(rayleigh - well_solution.energies[n]) \
                <= 1e-8 * well_solution.energies[n]

    def test_separate_solves_share_spectrum(self):
        # the two stationary problems are the same discretized operator;
        # building and solving twice must reproduce identical eigenvalues
        grid = default_grid(WELL, 500)
        first = solve_spectrum(build_hamiltonian(WELL, grid), 3)
        second = solve_spectrum(build_hamiltonian(WELL, grid), 3)
        assert np.max(np.abs(first.energies - second.energies)) <= 1e-12

    def test_empty_and_invalid_counts(self):
        grid = default_grid(WELL, 100)
        ham = build_hamiltonian(WELL, grid)
        empty = solve_spectrum(ham, 0)
        assert empty.count == 0 and empty.eigenfunctions == ()
        with pytest.raises(ValueError, match="exceeds"):
            solve_spectrum(ham, ham.dimension + 1)

    def test_polynomial_potential_supported(self):
        pot = PolynomialPotential((0.0, 0.0, 0.5))  # same as harmonic k=1
        grid = Grid(-12.0, 12.0, 1500)
        sol = solve_spectrum(build_hamiltonian(pot, grid), 3)
        assert np.max(np.abs(sol.energies - (np.arange(3) + 0.5))) <= 1e-3

    def test_default_grid_requires_known_potential(self):
        with pytest.raises(ValueError, match="default domain"):
            default_grid(FreePotential(), 100)


class TestWaveFunctionPair:
    def test_index_out_of_range(self, well_solution):
        with pytest.raises(IndexError):
            make_pair(well_solution, 5)

    def test_phases_are_unity_at_t0(self, well_solution):
        pair = make_pair(well_solution, 0)
        plus = pair.psi_plus(0.0).samples
        minus = pair.psi_minus(0.0).samples
        assert np.array_equal(plus, minus)
        assert np.max(np.abs(plus.imag)) == 0.0
        assert np.array_equal(plus.real, pair.spatial.samples)

    @pytest.mark.parametrize("t", [0.1, 1.0, 7.3])
    def test_conjugacy_exact(self, well_solution, t):
        pair = make_pair(well_solution, 1)
        assert np.array_equal(pair.psi_minus(t).samples,
                              np.conj(pair.psi_plus(t).samples))

    def test_backward_phase_matches_direct_evaluation(self, well_solution):
        pair = make_pair(well_solution, 0)
        t = 0.37
        direct = pair.spatial.samples * np.exp(1j * pair.energy * t / pair.hbar)
        assert np.max(np.abs(pair.psi_minus(t).samples - direct)) <= 1e-15

    def test_quarter_period_phase_is_minus_i(self, well_solution):
        pair = make_pair(well_solution, 0)
        t = math.pi * pair.hbar / (2.0 * pair.energy)
        expected = -1j * pair.spatial.samples.astype(np.complex128)
        assert np.max(np.abs(pair.psi_plus(t).samples - expected)) <= 1e-12


class TestDensity:
    def test_ground_state_profile(self, well_solution):
        pair = make_pair(well_solution, 0)
        x = well_solution.grid.points()
        rho = density(pair, 0.0)
        assert np.max(np.abs(rho.samples - 2.0 * np.sin(math.pi * x) ** 2)) <= 1e-4

    def test_density_equals_modulus_squared(self, well_solution):
        pair = make_pair(well_solution, 2)
        for t in (0.0, 1.3):
            rho = density(pair, t).samples
            assert np.max(np.abs(rho - np.abs(pair.psi_plus(t).samples) ** 2)) <= 1e-12
            assert np.min(rho) >= 0.0

    def test_each_eigenstate_density_integrates_to_one(self, well_solution):
        h = well_solution.grid.h
        for n in range(well_solution.count):
            rho = density(make_pair(well_solution, n), 0.0)
            assert abs(np.sum(rho.samples) * h - 1.0) <= 1e-10

    def test_time_independence(self, well_solution):
        pair = make_pair(well_solution, 0)
        rho0 = density(pair, 0.0).samples
        rho5 = density(pair, 5.0).samples
        assert np.max(np.abs(rho0 - rho5)) <= 1e-12


class TestSuperposition:
    def test_single_coefficient_reduces_to_eigen_density(self, well_solution):
        rho_super = superposition_density(well_solution, [1.0], 2.0)
        rho_eigen = density(make_pair(well_solution, 0), 2.0)
        assert np.max(np.abs(rho_super.samples - rho_eigen.samples)) <= 1e-12

    def test_two_level_mix_reflects_after_half_beat(self, well_solution):
        coeffs = np.array([1.0, 1.0]) / math.sqrt(2.0)
        beat = math.pi / (well_solution.energies[1] - well_solution.energies[0])
        rho0 = superposition_density(well_solution, coeffs, 0.0).samples
        rho1 = superposition_density(well_solution, coeffs, beat).samples
        assert np.max(np.abs(rho1 - rho0[::-1])) <= 1e-6

    def test_unit_mass_at_random_times(self, well_solution):
        coeffs = np.array([0.6, 0.8j, 0.0, 0.0, 0.0])
        rng = np.random.default_rng(17)
        h = well_solution.grid.h
        for t in rng.uniform(0.0, 50.0, size=20):
            rho = superposition_density(well_solution, coeffs, float(t))
            assert abs(np.sum(rho.samples) * h - 1.0) <= 1e-10

    def test_unnormalized_rejected(self, well_solution):
        with pytest.raises(ValueError, match="unit norm"):
            superposition_density(well_solution, [1.0, 1.0], 0.0)


class TestEnergyFunctional:
    def test_vanishes_at_eigenpair(self, well_solution):
        for n in (0, 1):
            psi = well_solution.eigenfunctions[n]
            value = energy_functional(psi, psi, WELL,
                                      float(well_solution.energies[n]))
            assert abs(value) <= 1e-6

    def test_linear_in_energy_with_unit_slope(self, well_solution):
        psi = well_solution.eigenfunctions[0]
        value = energy_functional(psi, psi, WELL,
                                  float(well_solution.energies[0]) + 1.0)
        assert abs(value - (-1.0)) <= 1e-9

    def test_zero_functions(self, well_solution):
        zero = GridFunction(well_solution.grid, np.zeros(well_solution.grid.n))
        assert energy_functional(zero, zero, WELL, 3.0) == 0.0

    def test_grid_mismatch_rejected(self, well_solution):
        other = GridFunction(Grid(0.0, 1.0, 50), np.zeros(50))
        with pytest.raises(ValueError, match="mismatch"):
            energy_functional(well_solution.eigenfunctions[0], other, WELL, 1.0)


class TestStationarity:
    def test_quadratic_response_at_eigenpair(self, well_solution):
        report = stationarity_check(well_solution, 0, 1e-2)
        assert report.stationary
        assert report.min_exponent >= 1.9
        # exponent about 2 means |dF| shrinks about 100x from eps to eps/10
        assert all(1.9 <= e <= 2.1 for e in report.exponents)

    def test_zero_perturbation_changes_nothing(self, well_solution):
        psi = well_solution.eigenfunctions[0]
        e0 = float(well_solution.energies[0])
        assert energy_functional(psi, psi, WELL, e0) == \
            energy_functional(psi, psi, WELL, e0)

    def test_wrong_energy_reported_non_stationary(self, well_solution):
        report = stationarity_check(well_solution, 0, 1e-2,
                                    energy_override=float(well_solution.energies[0]) + 0.5)
        assert not report.stationary
        assert report.min_exponent < 1.5

    def test_scale_validation(self, well_solution):
        with pytest.raises(ValueError):
            stationarity_check(well_solution, 0, 0.5)
        with pytest.raises(ValueError):
            stationarity_check(well_solution, 0, 0.0)
