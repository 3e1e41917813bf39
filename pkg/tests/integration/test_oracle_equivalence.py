"""Integration tests comparing DCA, branch-and-bound and enumeration."""

import time

import numpy as np
import pytest

from dcaport.data.generator import generate_instance
from dcaport.dca.penalty import penalty_alpha
from dcaport.dca.solver import run_dca
from dcaport.dca.trace import descent_violations
from dcaport.exact.bnb import solve_exact_bb
from dcaport.exact.enumeration import enumerate_supports
from dcaport.exact.result import ExactStatus
from dcaport.model.feasibility import check_feasibility


def seeded_cases(count: int):
    """Deterministic (n, card, seed) triples with n in 4..8."""
    rng = np.random.default_rng(2024)
    cases = []
    for seed in range(count):
        n = int(rng.integers(4, 9))
        card = int(rng.integers(1, n))
        cases.append((n, card, seed))
    return cases


CASES = seeded_cases(100)


@pytest.mark.integration
@pytest.mark.slow
class TestOracleEquivalence:
    """Exact solvers agree and DCA is an upper bound."""

    @pytest.mark.parametrize('n,card,seed', CASES)
    def test_bnb_matches_enumeration(self, n, card, seed):
        """Test proved-optimal B&B against exhaustive enumeration."""
        inst = generate_instance(n, seed, card=card)
        en = enumerate_supports(inst)
        bb = solve_exact_bb(inst)
        assert en.status is ExactStatus.PROVED_OPTIMAL
        assert bb.status is ExactStatus.PROVED_OPTIMAL
        assert bb.objective == pytest.approx(en.objective, abs=1e-8)

    def test_exact_sweep_time(self):
        """Test that branch-and-bound clears every case within a minute."""
        t0 = time.perf_counter()
        for n, card, seed in CASES:
            result = solve_exact_bb(generate_instance(n, seed, card=card))
            assert result.status is ExactStatus.PROVED_OPTIMAL
        assert time.perf_counter() - t0 < 60.0

    @pytest.mark.parametrize('n,card,seed', CASES[:20])
    def test_polished_solutions_exactly_feasible(self, n, card, seed):
        """Test that enumerated and DCA solutions need no tolerance."""
        inst = generate_instance(n, seed, card=card)
        for solution in (enumerate_supports(inst).solution,
                         run_dca(inst).solution):
            report = check_feasibility(inst, solution.point, tol=0.0,
                                       binary_mode=True)
            assert report.feasible, report.max_violation

    @pytest.mark.parametrize('n,card,seed', CASES)
    def test_dca_upper_bound_and_trace(self, n, card, seed):
        """Test the upper-bound, descent and binariness properties."""
        inst = generate_instance(n, seed, card=card)
        en = enumerate_supports(inst)
        result = run_dca(inst)
        assert result.solution is not None
        assert result.objective >= en.objective - 1e-9
        assert descent_violations(result.trace, slack=1e-9) == []
        assert penalty_alpha(result.final_point.z) <= 1e-6

    def test_dca_gap_rate(self):
        """Test that DCA is near-exact on most instances."""
        close = 0
        for n, card, seed in CASES:
            inst = generate_instance(n, seed, card=card)
            gap = run_dca(inst).objective - enumerate_supports(inst).objective
            close += gap <= 1e-4
        assert close >= 70

    def test_permutation_invariance(self):
        """Test that reordering assets leaves the optimum unchanged."""
        inst = generate_instance(7, 11, card=3)
        order = [6, 2, 0, 5, 1, 4, 3]
        base = enumerate_supports(inst)
        permuted = enumerate_supports(inst.permuted(order))
        assert permuted.objective == pytest.approx(base.objective, abs=1e-8)
        mapped = tuple(sorted(order[j] for j in permuted.solution.support))
        assert mapped == base.solution.support
