"""Tests for the quadratic lower bound and its truncated-Fock realization."""
import numpy as np
import pytest

from chargelab.bogolubov import (
    DENSE_CUTOFF,
    BogolubovModel,
    build_hamiltonian,
    closed_form_bound,
    ground_energy,
    sharpness_study,
)
from chargelab.errors import DomainError, PreconditionError, ResourceLimitError

BOUND_110 = -2.0 + np.sqrt(3.0)  # -0.26794919243112270
BOUND_111 = -3.0 + np.sqrt(5.0)  # -0.76393202250021030


class TestClosedFormBound:
    def test_reference_values(self):
        assert closed_form_bound(BogolubovModel(1, 1, 0)) == pytest.approx(
            BOUND_110, abs=1e-15
        )
        assert closed_form_bound(BogolubovModel(1, 1, 1)) == pytest.approx(
            BOUND_111, abs=1e-15
        )

    def test_free_case_is_zero(self):
        assert closed_form_bound(BogolubovModel(3.7, 0, 0)) == 0.0
        assert closed_form_bound(BogolubovModel(0, 0, 0)) == 0.0

    def test_nonpositive_and_symmetric(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            t, gp, gm = rng.uniform(0, 10, size=3)
            b = closed_form_bound(BogolubovModel(t, gp, gm))
            assert b <= 0.0
            assert b == closed_form_bound(BogolubovModel(t, gm, gp))

    def test_monotone_in_couplings(self):
        # nondecreasing in t, nonincreasing in g_plus
        ts = np.linspace(0.1, 4.0, 15)
        for g in (0.5, 2.0):
            vals = [closed_form_bound(BogolubovModel(t, g, 0.7)) for t in ts]
            assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))
        gs = np.linspace(0.0, 4.0, 15)
        for t in (0.5, 2.0):
            vals = [closed_form_bound(BogolubovModel(t, g, 0.3)) for g in gs]
            assert all(b <= a + 1e-14 for a, b in zip(vals, vals[1:]))

    def test_rejects_negative_couplings(self):
        with pytest.raises(DomainError):
            BogolubovModel(-1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            BogolubovModel(1.0, -0.1, 0.0)


class TestBuildHamiltonian:
    def test_dimension_and_symmetry(self):
        op = build_hamiltonian(BogolubovModel(1, 1, 1), 2)
        assert op.dimension == 81
        assert op.matrix.shape == (81, 81)
        diff = op.matrix - op.matrix.T
        assert diff.nnz == 0 or np.abs(diff.data).max() <= 1e-12

    def test_vacuum_diagonal_is_zero(self):
        op = build_hamiltonian(BogolubovModel(2.0, 1.5, 0.5), 3)
        assert op.matrix[0, 0] == 0.0

    def test_free_case_is_diagonal(self):
        op = build_hamiltonian(BogolubovModel(1.0, 0.0, 0.0), 2)
        dense = op.matrix.toarray()
        assert np.all(dense == np.diag(np.diag(dense)))
        # diagonal = total occupation, so eigenvalues are 0..4*n_max
        diag = np.sort(np.diag(dense))
        assert diag[0] == 0.0
        assert diag[-1] == 8.0

    def test_invalid_cutoff(self):
        with pytest.raises(PreconditionError):
            build_hamiltonian(BogolubovModel(1, 1, 1), 0)

    def test_resource_cap(self):
        with pytest.raises(ResourceLimitError):
            build_hamiltonian(BogolubovModel(1, 1, 1), 40)


class TestGroundEnergy:
    def test_zero_matrix(self):
        op = build_hamiltonian(BogolubovModel(0, 0, 0), 1)
        assert ground_energy(op) == 0.0

    def test_dense_sparse_agreement(self):
        # n_max=5 gives dimension 1296 > DENSE_CUTOFF, exercising ARPACK
        op = build_hamiltonian(BogolubovModel(1.0, 1.0, 1.0), 5)
        assert op.dimension > DENSE_CUTOFF
        sparse_val = ground_energy(op)
        dense_val = np.linalg.eigvalsh(op.matrix.toarray())[0]
        assert sparse_val == pytest.approx(dense_val, abs=1e-10)

    def test_never_below_bound(self):
        rng = np.random.default_rng(314)
        for _ in range(40):
            t, gp, gm = rng.uniform(0.0, 5.0, size=3)
            model = BogolubovModel(t, gp, gm)
            bound = closed_form_bound(model)
            for n_max in (1, 3):
                assert ground_energy(build_hamiltonian(model, n_max)) >= bound - 1e-10

    def test_monotone_in_cutoff(self):
        # truncation at n_max is a compression of the n_max+1 operator
        for t, gp, gm in [(1.0, 1.0, 0.0), (0.5, 1.5, 1.0), (2.0, 0.3, 0.8)]:
            model = BogolubovModel(t, gp, gm)
            energies = [
                ground_energy(build_hamiltonian(model, n)) for n in range(1, 5)
            ]
            assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))

    def test_swap_symmetry(self):
        e1 = ground_energy(build_hamiltonian(BogolubovModel(0.8, 2.0, 0.5), 4))
        e2 = ground_energy(build_hamiltonian(BogolubovModel(0.8, 0.5, 2.0), 4))
        assert e1 == pytest.approx(e2, abs=1e-10)


class TestSharpnessStudy:
    def test_converges_to_bound(self):
        rows = sharpness_study(BogolubovModel(1, 1, 0), [2, 4, 8, 12])
        assert [r[0] for r in rows] == [2, 4, 8, 12]
        gaps = [r[2] for r in rows]
        assert all(g >= -1e-9 for g in gaps)
        assert all(b <= a + 1e-9 for a, b in zip(gaps, gaps[1:]))
        # within 1% of the bound magnitude at the deepest cutoff
        assert gaps[-1] <= 0.01 * abs(BOUND_110)

    def test_two_coupling_case_within_one_percent(self):
        rows = sharpness_study(BogolubovModel(1, 1, 1), [4, 8, 12])
        assert rows[-1][2] <= 0.01 * abs(BOUND_111)
        assert rows[-1][1] == pytest.approx(BOUND_111, rel=1e-9)

    def test_validates_cutoff_list(self):
        with pytest.raises(PreconditionError):
            sharpness_study(BogolubovModel(1, 1, 0), [])
        with pytest.raises(PreconditionError):
            sharpness_study(BogolubovModel(1, 1, 0), [4, 4])
        with pytest.raises(PreconditionError):
            sharpness_study(BogolubovModel(1, 1, 0), [4, 2])
