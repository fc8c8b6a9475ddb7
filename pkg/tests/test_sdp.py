"""Tests for the SDP container, the interior-point solver and SDPA files."""

import numpy as np
import pytest

from polyopf.errors import SdpaFormatError
from polyopf.sdp import BlockKind, SdpProblem, SolverStatus, read_sdpa, smat, solve, svec, write_sdpa


def matrix_coeffs(block, mat):
    """Entry coefficients for ⟨mat, X⟩ under the once-per-upper-entry convention."""
    n = mat.shape[0]
    return {
        (block, i, j): (mat[i, i] if i == j else 2.0 * mat[i, j])
        for i in range(n)
        for j in range(i, n)
        if mat[i, j] != 0.0
    }


def eigenvalue_problem(c, maximize=False):
    n = c.shape[0]
    sdp = SdpProblem("eig", maximize=maximize)
    blk = sdp.add_block(n)
    for (b, i, j), value in matrix_coeffs(blk, c).items():
        sdp.add_objective(b, i, j, value)
    sdp.add_constraint({(blk, i, i): 1.0 for i in range(n)}, 1.0, tag="trace")
    return sdp


def random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return 0.5 * (a + a.T)


class TestProblem:
    def test_entry_convention(self):
        sdp = SdpProblem()
        sdp.add_block(2)
        sdp.add_constraint({(0, 0, 1): 1.0}, 0.5)
        X = np.array([[1.0, 0.5], [0.5, 2.0]])
        assert sdp.constraint_values([X])[0] == pytest.approx(0.5)
        form = sdp.standard_form()
        assert (form.A @ form.pack([X]))[0] == pytest.approx(0.5)

    def test_lower_triangle_keys_merge(self):
        sdp = SdpProblem()
        sdp.add_block(2)
        sdp.add_constraint({(0, 0, 1): 1.0, (0, 1, 0): -1.0, (0, 1, 1): 2.0}, 0.0)
        assert sdp.constraints[0].coeffs == {(0, 1, 1): 2.0}

    def test_invalid_entries(self):
        sdp = SdpProblem()
        sdp.add_block(2, BlockKind.NONNEG)
        with pytest.raises(IndexError):
            sdp.add_constraint({(0, 0, 1): 1.0}, 0.0)
        with pytest.raises(IndexError):
            sdp.add_objective(0, 2, 2, 1.0)
        with pytest.raises(ValueError):
            sdp.add_constraint({(0, 0, 0): 1.0}, 0.0, sense="<=")

    def test_describe(self):
        sdp = SdpProblem("t")
        sdp.add_block(3)
        sdp.add_block(2, BlockKind.NONNEG)
        sdp.add_block(1, BlockKind.FREE)
        assert sdp.describe() == "t: min, 0 rows, blocks [3,2n,1f]"
        assert sdp.num_scalars == 6 + 2 + 1
        assert sdp.psd_blocks() == [0]

    def test_svec_smat_inverse(self, rng):
        mat = random_symmetric(rng, 4)
        vec = svec(mat)
        assert vec.shape == (10,)
        assert np.dot(vec, vec) == pytest.approx(np.sum(mat * mat))
        assert np.allclose(smat(vec, 4), mat)


class TestSolver:
    def test_linear_program(self):
        sdp = SdpProblem("lp")
        blk = sdp.add_block(2, BlockKind.NONNEG)
        sdp.add_objective(blk, 0, 0, 1.0)
        sdp.add_objective(blk, 1, 1, 2.0)
        sdp.add_constraint({(blk, 0, 0): 1.0, (blk, 1, 1): 1.0}, 1.0, ">=")
        solution = solve(sdp)
        assert solution.status is SolverStatus.OPTIMAL
        assert solution.bound == pytest.approx(1.0, abs=1e-6)
        assert solution.X[0][0] == pytest.approx(1.0, abs=1e-5)

    def test_smallest_eigenvalue(self, rng):
        c = random_symmetric(rng, 5)
        solution = solve(eigenvalue_problem(c))
        assert solution.optimal
        assert solution.bound == pytest.approx(np.linalg.eigvalsh(c)[0], abs=1e-6)
        assert solution.primal_objective == pytest.approx(solution.dual_objective, abs=1e-5)

    def test_largest_eigenvalue_when_maximizing(self, rng):
        c = random_symmetric(rng, 4)
        solution = solve(eigenvalue_problem(c, maximize=True))
        assert solution.optimal
        assert solution.bound == pytest.approx(np.linalg.eigvalsh(c)[-1], abs=1e-6)

    def test_free_block_and_offset(self):
        sdp = SdpProblem("free")
        psd = sdp.add_block(2)
        free = sdp.add_block(1, BlockKind.FREE)
        sdp.add_objective(psd, 0, 0, 1.0)
        sdp.add_objective(psd, 1, 1, 3.0)
        sdp.add_objective(free, 0, 0, 1.0)
        sdp.objective_offset = 10.0
        sdp.add_constraint({(psd, 0, 0): 1.0, (free, 0, 0): 1.0}, 1.0)
        sdp.add_constraint({(psd, 1, 1): 1.0, (free, 0, 0): -1.0}, 1.0)
        solution = solve(sdp)
        assert solution.optimal
        # objective 4 + 3f with f in [-1, 1]
        assert solution.bound == pytest.approx(11.0, abs=1e-6)
        assert solution.X[free][0] == pytest.approx(-1.0, abs=1e-5)
        assert solution.X[psd][0, 0] == pytest.approx(2.0, abs=1e-5)

    def test_constructed_optimum(self, rng):
        """Build (X*, y*, S*) first, then the problem they solve."""
        n, m = 5, 6
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        x_star = q @ np.diag([3.0, 2.0, 1.0, 0.0, 0.0]) @ q.T
        s_star = q @ np.diag([0.0, 0.0, 0.0, 1.0, 2.0]) @ q.T
        y_star = rng.normal(size=m)
        mats = [random_symmetric(rng, n) for _ in range(m)]
        c = sum(y * a for y, a in zip(y_star, mats)) + s_star

        sdp = SdpProblem("constructed")
        blk = sdp.add_block(n)
        for (b, i, j), value in matrix_coeffs(blk, c).items():
            sdp.add_objective(b, i, j, value)
        for a in mats:
            sdp.add_constraint(matrix_coeffs(blk, a), float(np.sum(a * x_star)))

        solution = solve(sdp)
        assert solution.optimal
        assert solution.bound == pytest.approx(float(np.sum(c * x_star)), rel=1e-6, abs=1e-6)
        assert np.trace(solution.X[0] @ solution.S[0]) == pytest.approx(0.0, abs=1e-5)
        assert np.linalg.eigvalsh(solution.S[0])[0] > -1e-6

    def test_dependent_rows_are_dropped(self, rng):
        c = random_symmetric(rng, 3)
        sdp = eigenvalue_problem(c)
        sdp.add_constraint({(0, i, i): 2.0 for i in range(3)}, 2.0, tag="trace twice")
        solution = solve(sdp)
        assert solution.optimal
        assert solution.bound == pytest.approx(np.linalg.eigvalsh(c)[0], abs=1e-6)

    def test_infeasible_problem_is_not_optimal(self):
        sdp = SdpProblem("infeasible")
        sdp.add_block(1)
        sdp.add_constraint({(0, 0, 0): 1.0}, -1.0)
        solution = solve(sdp)
        assert not solution.optimal
        assert solution.status is not SolverStatus.OPTIMAL


class TestSdpa:
    def test_written_file_solves_to_same_bound(self, rng):
        c = random_symmetric(rng, 4)
        sdp = eigenvalue_problem(c)
        lp = sdp.add_block(1, BlockKind.NONNEG)
        sdp.add_objective(lp, 0, 0, 1.0)
        sdp.add_constraint({(lp, 0, 0): 1.0}, 0.5, ">=")
        sdp.objective_offset = 3.0

        text = write_sdpa(sdp)
        reread = read_sdpa(text)
        assert not reread.maximize
        assert reread.objective_offset == 3.0
        expected = np.linalg.eigvalsh(c)[0] + 0.5 + 3.0
        assert solve(sdp).bound == pytest.approx(expected, abs=1e-6)
        assert solve(reread).bound == pytest.approx(expected, abs=1e-5)

    def test_header(self):
        sdp = eigenvalue_problem(np.eye(2))
        sdp.add_block(3, BlockKind.NONNEG)
        lines = [line for line in write_sdpa(sdp).splitlines() if not line.startswith(('"', "*"))]
        assert lines[0] == "1"
        assert lines[1] == "2"
        assert lines[2] == "2 -3"

    def test_truncated_header(self):
        with pytest.raises(SdpaFormatError):
            read_sdpa("2\n")

    def test_off_diagonal_lp_entry(self):
        with pytest.raises(SdpaFormatError):
            read_sdpa("1\n1\n-2\n1.0\n1 1 1 2 1.0\n")

    def test_entry_outside_block(self):
        with pytest.raises(SdpaFormatError):
            read_sdpa("1\n1\n2\n1.0\n1 1 3 3 1.0\n")
