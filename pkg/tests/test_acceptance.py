"""Acceptance suite: every criterion at its stated tolerance, one printed
pass/fail line per criterion (run pytest with -s to see them inline)."""

import json
import math
from contextlib import contextmanager

import numpy as np

from retromech.cli import main
from retromech.core import Direction, Grid, GridFunction
from retromech.dampedwave import (
    DampedWaveParams,
    damped_well_modes,
    envelope_decay_rate,
    solve_damped_free,
)
from retromech.eigensolver import (
    build_hamiltonian,
    default_grid,
    density,
    energy_functional,
    make_pair,
    solve_spectrum,
    stationarity_check,
    superposition_density,
)
from retromech.fracops import (
    causal_frac_deriv,
    compose_half,
    retrocausal_frac_deriv,
)
from retromech.lagrangian import (
    HarmonicPotential,
    InfiniteWellPotential,
    LagrangianSpec,
    ProductTerm,
    derive_causal_eom,
    derive_retrocausal_eom,
    parse_lagrangian,
    reduce_integer_orders,
)
from retromech.oscillator import (
    OscillatorParams,
    solve_causal,
    solve_retrocausal,
    time_reverse,
)


@contextmanager
def criterion(number, label):
    try:
        yield
    except Exception:
        print(f"[criterion {number:02d}] FAIL - {label}")
        raise
    print(f"[criterion {number:02d}] PASS - {label}")


def grid_with_step(a, b, h):
    return Grid(a, b, int(round((b - a) / h)) + 1)


def test_criterion_01_fractional_power_law_suite():
    with criterion(1, "causal power-law oracle at n=4096, GL order >= 0.9"):
        for k in (1, 2, 3):
            for alpha in (0.25, 0.5, 0.75):
                errors = []
                for n in (2048, 4096):
                    grid = Grid(0.0, 1.0, n)
                    t = grid.points()
                    d = causal_frac_deriv(GridFunction(grid, (t - grid.a) ** k),
                                          alpha)
                    exact = (math.gamma(k + 1) / math.gamma(k + 1 - alpha)
                             * (t - grid.a) ** (k - alpha))
                    inside = t >= grid.a + 0.1 * (grid.b - grid.a)
                    errors.append(np.max(
                        np.abs(d.samples[inside] - exact[inside]) / exact[inside]))
                assert errors[1] <= 1e-2, (k, alpha, errors[1])
                order = math.log2(errors[0] / errors[1])
                assert order >= 0.9, (k, alpha, order)


def test_criterion_02_retrocausal_integer_reduction():
    with criterion(2, "alpha=1 retro = -d/dt within 1e-3; alpha=0 exact identity"):
        grid = Grid(0.0, 2.0, 2048)
        t = grid.points()
        for samples in (np.sin(t), np.exp(-t), t**3 - t):
            f = GridFunction(grid, samples)
            retro = retrocausal_frac_deriv(f, 1)
            fd = np.gradient(samples, grid.h, edge_order=2)
            assert np.max(np.abs(retro.samples + fd)) <= 1e-3
            for deriv in (causal_frac_deriv, retrocausal_frac_deriv):
                assert np.array_equal(deriv(f, 0).samples, samples)


def test_criterion_03_half_order_semigroup():
    with criterion(3, "half-derivative composed twice = d/dt within 2e-2"):
        grid = Grid(0.0, 1.0, 4096)
        t = grid.points()
        inside = t >= grid.a + 0.1 * (grid.b - grid.a)
        for k in (1, 2):
            res = compose_half(GridFunction(grid, (t - grid.a) ** k))
            exact = k * (t - grid.a) ** (k - 1)
            rel = np.max(np.abs(res.values.samples[inside] - exact[inside])
                         / np.abs(exact[inside]))
            assert rel <= 2e-2, (k, rel)


def test_criterion_04_euler_lagrange_reproduction():
    with criterion(4, "(m, C, k) reduces exactly to the signed ODE pair; "
                      "direction symmetry on 100 random specs"):
        spec = parse_lagrangian("1.0*q[1] + 0.3*q[0.5] + 4.0*q[0]")
        causal = reduce_integer_orders(derive_causal_eom(spec))
        retro = reduce_integer_orders(derive_retrocausal_eom(spec))
        assert (causal.mass_coeff, causal.damping_coeff,
                causal.stiffness_coeff) == (1.0, 0.3, 4.0)
        assert (retro.mass_coeff, retro.damping_coeff,
                retro.stiffness_coeff) == (1.0, -0.3, 4.0)
        rng = np.random.default_rng(2024)
        pool = np.arange(0, 9) / 4.0
        for _ in range(100):
            orders = rng.choice(pool, size=int(rng.integers(1, 5)), replace=False)
            random_spec = LagrangianSpec(tuple(
                ProductTerm(float(rng.uniform(0.1, 9.0)), str(o)) for o in orders))
            c_terms = derive_causal_eom(random_spec).terms
            r_terms = derive_retrocausal_eom(random_spec).terms
            assert sorted((t.coeff, t.total_order) for t in c_terms) == \
                   sorted((t.coeff, t.total_order) for t in r_terms)
            assert {t.direction for t in c_terms} == {Direction.CAUSAL}
            assert {t.direction for t in r_terms} == {Direction.RETROCAUSAL}


def test_criterion_05_oscillator_reflection_and_order():
    with criterion(5, "time-reversed causal solves the retro ODE (<= 1e-5); "
                      "RK4 order >= 3.7"):
        grid = grid_with_step(0.0, 3.0, 1e-3)
        cases = (OscillatorParams(1, 0.3, 4, 1, 0),
                 OscillatorParams(1, 2, 1, 1, -1),
                 OscillatorParams(1, 3, 1, 1, 0.5))
        for p in cases:
            forward = solve_causal(p, grid)
            mirrored = OscillatorParams(p.m, p.C, p.k, p.q0, -p.v0)
            backward = solve_retrocausal(mirrored, grid)
            dev = np.max(np.abs(backward.position.samples
                                - time_reverse(forward.position).samples))
            assert dev <= 1e-5, (p, dev)
        p = OscillatorParams(1, 0.3, 4, 1, 0)
        gamma = p.C / 2.0
        omega_d = math.sqrt(p.k - gamma**2)
        errors = []
        for h in (4e-3, 2e-3):
            g = grid_with_step(0.0, 2.0, h)
            t = g.points()
            exact = np.exp(-gamma * t) * (np.cos(omega_d * t)
                                          + gamma / omega_d * np.sin(omega_d * t))
            errors.append(np.max(np.abs(solve_causal(p, g).position.samples - exact)))
        assert math.log2(errors[0] / errors[1]) >= 3.7


def test_criterion_06_spectrum_oracles():
    with criterion(6, "well and harmonic spectra within 0.1% at n=2000"):
        well = InfiniteWellPotential(1.0)
        sol = solve_spectrum(build_hamiltonian(well, default_grid(well, 2000)), 5)
        exact = (np.arange(1, 6) * math.pi) ** 2 / 2.0
        assert np.max(np.abs(sol.energies - exact) / exact) <= 1e-3
        harmonic = HarmonicPotential(1.0)
        sol = solve_spectrum(
            build_hamiltonian(harmonic, default_grid(harmonic, 2000)), 6)
        exact = np.arange(6) + 0.5
        assert np.max(np.abs(sol.energies - exact) / exact) <= 1e-3


def test_criterion_07_conjugacy_and_density():
    with criterion(7, "exact conjugacy; rho = |psi|^2 (1e-12); eigen density "
                      "static (1e-12); superposition mass 1 (1e-10)"):
        well = InfiniteWellPotential(1.0)
        grid = default_grid(well, 2000)
        sol = solve_spectrum(build_hamiltonian(well, grid), 3)
        pair = make_pair(sol, 1)
        for t in (0.0, 0.1, 1.0, 7.3):
            plus = pair.psi_plus(t).samples
            assert np.array_equal(pair.psi_minus(t).samples, np.conj(plus))
            rho = density(pair, t).samples
            assert np.max(np.abs(rho - np.abs(plus) ** 2)) <= 1e-12
        rho0 = density(pair, 0.0).samples
        assert np.max(np.abs(rho0 - density(pair, 5.0).samples)) <= 1e-12
        coeffs = np.array([0.5, 0.5j, math.sqrt(0.5)])
        rng = np.random.default_rng(77)
        for t in rng.uniform(0.0, 25.0, size=20):
            rho = superposition_density(sol, coeffs, float(t))
            assert abs(np.sum(rho.samples) * grid.h - 1.0) <= 1e-10


def test_criterion_08_functional_stationarity():
    with criterion(8, "functional <= 1e-6 at eigenpairs; quadratic response "
                      "(exponent >= 1.9)"):
        well = InfiniteWellPotential(1.0)
        grid = default_grid(well, 2000)
        sol = solve_spectrum(build_hamiltonian(well, grid), 2)
        for n in range(2):
            psi = sol.eigenfunctions[n]
            value = energy_functional(psi, psi, well, float(sol.energies[n]))
            assert abs(value) <= 1e-6, (n, value)
        report = stationarity_check(sol, 0, 1e-2)
        assert report.min_exponent >= 1.9 and report.stationary


def test_criterion_09_damped_wave():
    with criterion(9, "closed form vs RK4 <= 1e-6; xi -> 0 limit; well modes "
                      "by shooting (1e-8); envelope rate within 1%"):
        rng = np.random.default_rng(41)
        grid = grid_with_step(0.0, 10.0, 1e-3)
        for _ in range(20):
            params = DampedWaveParams(float(rng.uniform(0.0, 2.5)),
                                      float(rng.uniform(0.1, 2.0)))
            sol = solve_damped_free(params, grid)
            assert sol.max_discrepancy <= 1e-6, params
        x = grid.points()
        zero_xi = solve_damped_free(DampedWaveParams(0.0, 0.5), grid)
        assert np.max(np.abs(zero_xi.closed_form.samples - np.cos(x))) <= 1e-6
        tiny_xi = solve_damped_free(DampedWaveParams(1e-8, 0.5), grid)
        assert np.max(np.abs(tiny_xi.closed_form.samples - np.cos(x))) <= 1e-6
        for xi in (0.0, 0.5, 1.0, 2.0):
            modes = damped_well_modes(xi, 1.0, count=5)
            exact = ((np.arange(1, 6) * math.pi) ** 2 + xi**2) / 2.0
            assert np.max(np.abs(modes.energies - exact)) <= 1e-12
            assert np.max(modes.shooting_residuals) <= 1e-8
        under = solve_damped_free(DampedWaveParams(0.2, 2.0), grid)
        rate = envelope_decay_rate(under.closed_form)
        assert abs(rate - 0.2) / 0.2 <= 0.01


def test_criterion_10_cli_contract(tmp_path, capsys):
    with criterion(10, "byte-identical reruns; exit codes 0/1/2"):
        argv = ["fracdiff", "--alpha", "0.5", "--fn", "t", "--n", "2048"]
        paths = [tmp_path / "run1.csv", tmp_path / "run2.csv"]
        for path in paths:
            assert main(argv + ["--output", str(path)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
        argv = ["eigensolve", "--potential", "well, 1.0", "--count", "2",
                "--n", "600"]
        jsons = [tmp_path / "s1.json", tmp_path / "s2.json"]
        for path in jsons:
            assert main(argv + ["--output", str(path)]) == 0
        assert jsons[0].read_bytes() == jsons[1].read_bytes()
        json.loads(jsons[0].read_text())

        # computation failure: exit 1, no partial file
        missing = tmp_path / "never.json"
        assert main(["dampedwave", "--B", "0", "--output", str(missing)]) == 1
        assert not missing.exists()
        assert "xi_from_params" in capsys.readouterr().err

        # usage error: exit 2
        assert main([]) == 2
        assert main(["oscillate", "--no-such-flag"]) == 2
        capsys.readouterr()
