"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""

import subprocess
import sys
import time

import numpy as np
import pytest

from twoweight.suite import run_gate

SEED = 42


@pytest.fixture
def report(capsys):
    def emit(number: int, passed: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}")
    return emit


def _gate(name):
    start = time.perf_counter()
    result = run_gate(name, SEED)
    return result, time.perf_counter() - start


def _describe(result, elapsed):
    metrics = ", ".join(f"{k}={v}" for k, v in sorted(result.metrics.items()))
    return f"{result.name} [{result.instances} instances, {elapsed:.1f}s] {metrics}"


def _check(report, number, name, limit=None):
    result, elapsed = _gate(name)
    ok = result.passed and (limit is None or elapsed < limit)
    detail = _describe(result, elapsed) + (f" (limit {limit}s)" if limit else "")
    report(number, ok, detail)
    assert result.passed, result.failures[:5]
    if limit is not None:
        assert elapsed < limit
    return result


def test_criterion_01_adjoint_identity(report):
    result = _check(report, 1, "adjoint", limit=10.0)
    assert result.instances == 1000 and result.metrics["max_error"] <= 1e-12


def test_criterion_02_mixed_norm_oracle(report):
    result = _check(report, 2, "mixed_norm")
    assert result.metrics["max_error"] <= 1e-12


def test_criterion_03_sparse_sum_bounds(report):
    result = _check(report, 3, "sparse_sums")
    assert result.instances == 200


def test_criterion_04_sparse_iff_carleson(report):
    result = _check(report, 4, "sparse_carleson")
    assert result.instances == 500


def test_criterion_05_allocation(report):
    result = _check(report, 5, "allocation")
    assert result.metrics["point_mass_atomic"].startswith("Infeasible")
    assert result.metrics["point_mass_fractional"] is True


def test_criterion_06_allocation_constant(report):
    result = _check(report, 6, "allocation_constant", limit=60.0)
    assert result.instances == 100


def test_criterion_07_witness(report):
    result = _check(report, 7, "witness")
    assert result.instances == 300


def test_criterion_08_endpoints(report):
    result = _check(report, 8, "endpoints")
    assert result.instances == 200


def test_criterion_09_reduction_equivalence(report):
    result = _check(report, 9, "reduction")
    m = result.metrics
    assert m["max_homogeneity_error"] <= 1e-10
    assert 1 / 32 <= m["band"][0] <= m["band"][1] <= 32
    assert m["max_norm_oracle_gap"] <= 0.01 and m["max_reduction_oracle_gap"] <= 0.01


def test_criterion_10_necessity(report):
    result = _check(report, 10, "necessity")
    assert result.metrics["max_cond1_ratio"] <= 16 and result.metrics["max_cond2_ratio"] <= 16


def test_criterion_11_wolff(report):
    result = _check(report, 11, "wolff")
    assert result.metrics["hand_value"] == [1.5, 1.5]
    assert result.metrics["max_ratio_over_limit"] <= 1


def test_criterion_12_cli_determinism(report, tmp_path):
    outputs = []
    for k in range(2):
        path = tmp_path / f"summary{k}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "twoweight", "suite", "--seed", str(SEED), "--threads", "1",
             "--output", str(path)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(path.read_bytes())
    same = outputs[0] == outputs[1]
    digest = np.frombuffer(outputs[0], dtype=np.uint8).sum()
    report(12, same, f"suite --seed {SEED} --threads 1 twice, {len(outputs[0])} bytes, byte sum {digest}")
    assert same
