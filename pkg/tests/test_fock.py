"""Truncated-basis oracle: structure, invariants, and convergence protocol."""

import math

import numpy as np
import pytest

from cohevol import (
    ConvergenceError,
    DimensionError,
    SystemParams,
    TailMassError,
    adaptive_dimension,
    build_hamiltonian,
    coherent_vector,
    hyperbolic_xn_average,
    ladder_matrices,
    make_hyperbolic_params,
    monomial_expectation,
    oracle_average,
    propagate_expectation,
)

HYP = make_hyperbolic_params(1.0, 0.1, 0.05)
ELL = SystemParams(1.0, 0.05, 0.1)


class TestLadderAndStructure:
    def test_commutator_on_interior_block(self):
        dim, hbar = 128, 0.1
        a, adag = ladder_matrices(dim, hbar)
        comm = a @ adag - adag @ a - hbar * np.eye(dim)
        interior = comm[: dim - 1, : dim - 1]
        assert np.max(np.abs(interior)) <= 1e-13
        # the defect is confined to the truncation edge
        assert abs(comm[dim - 1, dim - 1] + hbar * dim) <= 1e-10

    def test_elliptic_diagonal_spectrum_at_mu_zero(self):
        p = SystemParams(1.3, 0.0, 0.2)
        rep = build_hamiltonian("elliptic", p, 32)
        expected = np.diag(p.omega * p.hbar * np.arange(32))
        assert np.max(np.abs(rep.ham - expected)) <= 1e-13

    def test_hyperbolic_band_structure(self):
        rep = build_hamiltonian("hyperbolic", HYP, 24)
        for i in range(24):
            for j in range(24):
                if abs(i - j) not in (0, 2, 4):
                    assert rep.ham[i, j] == 0

    def test_hermiticity(self):
        for kind, p in (("elliptic", ELL), ("hyperbolic", HYP)):
            rep = build_hamiltonian(kind, p, 96)
            assert np.max(np.abs(rep.ham - rep.ham.conj().T)) <= 1e-13
            assert np.max(np.abs(rep.x_op - rep.x_op.conj().T)) <= 1e-13

    def test_vacuum_energy_of_hyperbolic_quartic(self):
        rep = build_hamiltonian("hyperbolic", HYP, 16)
        assert rep.ham[0, 0] == pytest.approx(-2.0 * HYP.mu * HYP.hbar**2, rel=1e-13)

    def test_minimum_dimension(self):
        with pytest.raises(DimensionError):
            build_hamiltonian("hyperbolic", HYP, 4)

    def test_mixed_position_momentum_form(self):
        # the quartic generator satisfies 2i xp + hbar = -(adag^2 - a^2), so
        # H also equals 2 w xp - i w hbar + mu (2i xp + hbar)^2; truncation
        # contaminates only the last few basis rows
        dim = 64
        rep = build_hamiltonian("hyperbolic", HYP, dim)
        a, adag = ladder_matrices(dim, HYP.hbar)
        x = (adag + a) / math.sqrt(2.0)
        p = 1j * (adag - a) / math.sqrt(2.0)
        xp = x @ p
        eye = np.eye(dim)
        alt = (
            2.0 * HYP.omega * xp
            - 1j * HYP.omega * HYP.hbar * eye
            + HYP.mu * np.linalg.matrix_power(2j * xp + HYP.hbar * eye, 2)
        )
        interior = slice(0, dim - 4)
        assert np.max(np.abs((rep.ham - alt)[interior, interior])) <= 1e-12


class TestCoherentVector:
    def test_vacuum(self):
        v = coherent_vector(0.0, 0.1, 8)
        assert v.coeffs[0] == 1.0
        assert np.all(v.coeffs[1:] == 0.0)
        assert v.tail_mass == 0.0

    def test_norm_approaches_one(self):
        norms = [
            np.linalg.norm(coherent_vector(1.2, 0.1, dim).coeffs)
            for dim in (16, 32, 64)
        ]
        assert norms[-1] == pytest.approx(1.0, abs=1e-12)
        assert all(b >= a for a, b in zip(norms, norms[1:]))

    def test_annihilation_eigenvector(self):
        alpha, hbar, dim = 0.8 + 0.5j, 0.1, 96
        a, _ = ladder_matrices(dim, hbar)
        v = coherent_vector(alpha, hbar, dim)
        residual = a @ v.coeffs - alpha * v.coeffs
        # truncation contaminates only the last entry
        assert np.linalg.norm(residual[: dim - 1]) <= 1e-12

    def test_number_expectation(self):
        alpha, hbar = 1.1 - 0.3j, 0.1
        v = coherent_vector(alpha, hbar, 128)
        _, adag = ladder_matrices(128, hbar)
        a, _ = ladder_matrices(128, hbar)
        value = np.vdot(v.coeffs, adag @ a @ v.coeffs)
        assert value.real == pytest.approx(abs(alpha) ** 2, rel=1e-12)

    def test_tail_mass_error(self):
        with pytest.raises(TailMassError):
            coherent_vector(3.0, 0.05, 32, tail_tol=1e-14)


class TestPropagation:
    def test_unitarity(self):
        rep = build_hamiltonian("hyperbolic", HYP, 256)
        v = coherent_vector(0.5 + 0.3j, HYP.hbar, 256)
        from cohevol.fock import _propagate

        for t in (0.1, 0.8, 2.0):
            out = _propagate(rep, v.coeffs, t)
            assert abs(np.linalg.norm(out) - np.linalg.norm(v.coeffs)) <= 1e-12

    def test_initial_mean_position(self):
        alpha = 0.5 + 0.3j
        rep = build_hamiltonian("hyperbolic", HYP, 128)
        v = coherent_vector(alpha, HYP.hbar, 128)
        value = propagate_expectation(rep, v, 1, 0.0)
        assert value == pytest.approx((alpha + alpha.conjugate()) / math.sqrt(2.0), abs=1e-12)

    def test_initial_moments_match_closed_forms(self):
        # every closed form agrees with the simulator already at t = 0
        rep = build_hamiltonian("hyperbolic", HYP, 192)
        for alpha in (0.4, 1j, 0.5 + 0.3j, -0.8 + 0.6j):
            v = coherent_vector(alpha, HYP.hbar, 192)
            for n in (1, 2, 3):
                closed = hyperbolic_xn_average(n, alpha, HYP, 0.0)
                orc = propagate_expectation(rep, v, n, 0.0)
                scale = max(abs(orc), HYP.hbar ** (n / 2.0))
                assert abs(closed - orc) <= 1e-12 * scale

    def test_quadratic_limit_stretch(self):
        p = make_hyperbolic_params(1.0, 0.0, 0.1)
        alpha = 0.6
        value = oracle_average("hyperbolic", p, alpha, 1, 0.9, tol=1e-9, dim_cap=2048)
        expected = math.exp(2.0 * p.omega * 0.9) * 2.0 * alpha / math.sqrt(2.0)
        assert abs(value - expected) / abs(expected) <= 1e-8

    def test_symmetrized_xp_conserved(self):
        # invariant of the hyperbolic flow; checked on the propagated state
        dim = 512
        rep = build_hamiltonian("hyperbolic", HYP, dim)
        a, adag = ladder_matrices(dim, HYP.hbar)
        x = (adag + a) / math.sqrt(2.0)
        p_op = 1j * (adag - a) / math.sqrt(2.0)
        sym = (x @ p_op + p_op @ x) / 2.0
        v = coherent_vector(0.5 + 0.3j, HYP.hbar, dim)
        from cohevol.fock import _propagate

        values = []
        for t in (0.0, 0.3, 0.6):
            state = _propagate(rep, v.coeffs, t)
            values.append(complex(np.vdot(state, sym @ state)))
        for value in values[1:]:
            assert abs(value - values[0]) <= 1e-9

    def test_matches_closed_form(self):
        alpha = 0.5 + 0.3j
        t = 0.7
        closed = hyperbolic_xn_average(1, alpha, HYP, t)
        orc = oracle_average("hyperbolic", HYP, alpha, 1, t, tol=1e-8, dim_cap=2048)
        assert abs(closed - orc) / abs(orc) <= 1e-6

    def test_elliptic_monomial_conserved(self):
        rep = build_hamiltonian("elliptic", ELL, 256)
        v = coherent_vector(0.9 + 0.2j, ELL.hbar, 256)
        values = [monomial_expectation(rep, v, 1, 1, t) for t in (0.0, 1.0, 2.0)]
        for value in values[1:]:
            assert abs(value - values[0]) <= 1e-12 * abs(values[0]) + 1e-15


class TestAdaptiveDimension:
    def test_vacuum_accepts_first_dimension(self):
        assert adaptive_dimension(0.0, SystemParams(1.0, 0.0, 0.5), 0.5, 1e-8) == 64

    def test_regression_anchor(self):
        # frozen on first run; later runs must reproduce it exactly
        assert adaptive_dimension(1.0, HYP, t_max=0.5, tol=1e-8, dim_cap=4096) == 1024

    def test_convergence_error_near_collapse(self):
        p = make_hyperbolic_params(1.0, 0.1, 0.1)
        t_collapse = math.pi / (32.0 * p.mu * p.hbar)
        with pytest.raises(ConvergenceError):
            adaptive_dimension(1j, p, t_max=0.98 * t_collapse, tol=1e-8, dim_cap=512)
