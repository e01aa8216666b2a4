import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import entropy_nats, scaled_i_series
from remnant.density import Branch, CouplingState, cycle_averaged_distribution, reduced_density_matrix
from remnant.entropy import (
    BITS,
    EntanglementReport,
    entanglement_report,
    hermitian_eigenvalues,
    jacobi_eigenvalues,
    linear_entropy,
    linear_entropy_closed_form,
    schmidt_number,
    spectral_entropy,
    von_neumann_entropy,
)
from remnant.errors import DomainError, PositivityError

CANONICAL = CouplingState(2.0, 0.0)


def random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


class TestVonNeumann:
    def test_point_mass(self):
        assert von_neumann_entropy(np.array([0.0, 1.0, 0.0])) == 0.0

    def test_uniform(self):
        assert von_neumann_entropy(np.full(4, 0.25)) == pytest.approx(math.log(4), abs=1e-15)

    def test_canonical(self):
        s = von_neumann_entropy(cycle_averaged_distribution(CANONICAL))
        ref = entropy_nats([scaled_i_series(k, 2.0) for k in range(-30, 31)])
        assert s == pytest.approx(ref, abs=1e-13)
        # |k| <= 12 already fixes S to ~1e-9
        short = entropy_nats([scaled_i_series(k, 2.0) for k in range(-12, 13)])
        assert s == pytest.approx(short, abs=1e-8)
        assert s == pytest.approx(1.761, abs=1e-3)

    def test_unnormalised(self):
        with pytest.raises(DomainError, match="1 - sum"):
            von_neumann_entropy(np.array([0.5, 0.4]))

    def test_increasing_in_q(self):
        s = [von_neumann_entropy(cycle_averaged_distribution(CouplingState(q, 0.0)))
             for q in (0.1, 0.5, 1.0, 2.0, 5.0)]
        assert all(b > a for a, b in zip(s, s[1:]))


class TestLinearEntropy:
    def test_examples(self):
        assert linear_entropy(np.array([1.0])) == 0.0
        assert linear_entropy(np.array([0.5, 0.5])) == 0.5

    def test_canonical(self):
        ref = 1.0 - float(mp.besseli(0, 4) * mp.exp(-4))
        assert linear_entropy(cycle_averaged_distribution(CANONICAL)) == pytest.approx(ref, abs=1e-14)
        assert ref == pytest.approx(0.79300, abs=1e-4)

    def test_closed_form_examples(self):
        assert linear_entropy_closed_form(CouplingState(0.0, 0.0), Branch.SMALL_KAPPA) == 0.0
        for q in (0.3, 2.0, 6.5):
            g = linear_entropy_closed_form(CouplingState(q, 0.0), Branch.GENERAL)
            s = linear_entropy_closed_form(CouplingState(q, 0.0), Branch.SMALL_KAPPA)
            assert abs(g - s) < 1e-13
        j = [float(mp.besselj(k, 2)) for k in range(-30, 31)]
        expected = 1.0 - sum(x**4 for x in j)
        assert linear_entropy_closed_form(CouplingState(0.0, 2.0), Branch.SMALL_Q) == pytest.approx(
            expected, abs=1e-14)

    @given(st.floats(0.0, 10.0), st.floats(0.0, 10.0))
    @settings(max_examples=50, deadline=None)
    def test_closed_form_matches_distribution(self, q, kappa):
        state = CouplingState(q, kappa)
        H = linear_entropy(cycle_averaged_distribution(state))
        assert abs(H - linear_entropy_closed_form(state)) < 1e-10

    def test_point_mass_iff_zero(self):
        assert linear_entropy(cycle_averaged_distribution(CouplingState(0.0, 0.0))) == 0.0
        assert linear_entropy(cycle_averaged_distribution(CouplingState(1e-3, 0.0))) > 1e-12


class TestSchmidt:
    def test_examples(self):
        assert schmidt_number(0.0) == 1.0
        assert schmidt_number(0.5) == 2.0
        H = 1.0 - float(mp.besseli(0, 4) * mp.exp(-4))
        assert schmidt_number(H) == pytest.approx(4.831, abs=1e-3)

    @pytest.mark.parametrize("H", [1.0, 1.5, -0.1])
    def test_domain(self, H):
        with pytest.raises(DomainError):
            schmidt_number(H)


class TestJacobi:
    @pytest.mark.parametrize("n,seed", [(1, 0), (2, 1), (5, 2), (16, 3), (33, 4), (80, 5)])
    def test_against_lapack(self, n, seed):
        a = random_hermitian(n, seed)
        ours = jacobi_eigenvalues(a)
        ref = np.linalg.eigvalsh(a)[::-1]
        assert np.max(np.abs(ours - ref)) < 1e-12 * np.linalg.norm(a)

    def test_diagonal(self):
        assert list(jacobi_eigenvalues(np.diag([0.2, 0.5, 0.3]))) == [0.5, 0.3, 0.2]

    def test_point_mass(self):
        m = np.zeros((4, 4))
        m[1, 1] = 1.0
        assert list(hermitian_eigenvalues(m)) == [1.0, 0.0, 0.0, 0.0]

    def test_density_trace(self):
        ev = hermitian_eigenvalues(reduced_density_matrix(CouplingState(0.5, 1.2, 0.4)))
        assert abs(np.sum(ev) - 1.0) < 1e-10
        assert np.all(np.diff(ev) <= 0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            hermitian_eigenvalues(np.array([[0.5, 0.1], [0.2, 0.5]]))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(PositivityError):
            hermitian_eigenvalues(np.diag([1.1, -0.1]))

    def test_clamps_round_off(self):
        ev = hermitian_eigenvalues(np.diag([1.0 + 1e-12, -1e-12]))
        assert list(ev) == [1.0, 0.0]

    def test_non_square(self):
        with pytest.raises(DomainError):
            jacobi_eigenvalues(np.zeros((2, 3)))


class TestReport:
    def test_canonical(self):
        r = entanglement_report(CANONICAL, t=31.0)
        assert r.S_diag == r.S_eigen
        assert r.H == pytest.approx(0.79300, abs=1e-4)
        assert r.K == pytest.approx(1.0 / (1.0 - r.H), rel=1e-12)

    @pytest.mark.parametrize("q,kappa", [(1.0, 3.0), (0.5, 1.2), (4.0, 2.0)])
    def test_alpha_invariance_and_majorisation(self, q, kappa):
        reports = [entanglement_report(CouplingState(q, kappa, a)) for a in (0.0, 1.0, 2.5)]
        s = [r.S_eigen for r in reports]
        assert max(s) - min(s) < 1e-10
        for r in reports:
            assert r.S_diag >= r.S_eigen - 1e-9

    def test_eigen_entropy_against_lapack(self):
        P = reduced_density_matrix(CouplingState(1.0, 3.0, 0.6))
        ref = np.clip(np.linalg.eigvalsh(P.entries), 0, 1)
        assert entanglement_report(CouplingState(1.0, 3.0, 0.6)).S_eigen == pytest.approx(
            spectral_entropy(ref), abs=1e-12)

    def test_bits(self):
        r = entanglement_report(CANONICAL, units=BITS)
        n = entanglement_report(CANONICAL)
        assert r.units == BITS
        assert r.S_diag == pytest.approx(n.S_diag / math.log(2))
        assert (r.H, r.K) == (n.H, n.K)
        assert r.to_bits() is r

    def test_bad_units(self):
        with pytest.raises(DomainError):
            entanglement_report(CANONICAL, units="hartley")

    def test_report_is_immutable(self):
        r = EntanglementReport(0.0, 0.0, 0.0, 0.0, 1.0)
        with pytest.raises(AttributeError):
            r.H = 0.5
