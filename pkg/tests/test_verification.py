import numpy as np

from relaysim.combining import COMBINER
from relaysim.verification import CheckResult, run_checks


def test_clean_build_passes():
    results = run_checks()
    assert all(isinstance(r, CheckResult) for r in results)
    assert [r.name for r in results if not r.passed] == []


def test_perturbed_combiner_fails_orthonormality():
    bad = np.array(COMBINER)
    bad[0, 0] += 1e-3
    failed = {r.name for r in run_checks(combiner=bad) if not r.passed}
    assert "combiner rows orthonormal" in failed
    assert "single-relay combining identity" in failed
    # checks that never touch P are unaffected
    assert "2xN SVD" not in failed


def test_zero_rate_edge_has_no_spurious_failures():
    results = {r.name: r for r in run_checks(master_seed=7)}
    edge = [r for name, r in results.items() if "zero" in name]
    assert edge and all(r.passed for r in edge)
