"""The twelve acceptance criteria, each reported as a PASS/FAIL line.

Criteria 1-11 run the seeded groups in ``gradedq.verify``.  Where a criterion
is stated in a form that does not hold (6, 7, 8), the literal form is run as
written and marked as an expected failure; the corrected identity is a
separate, gating test.
"""

import io
import time
from functools import lru_cache
from pathlib import Path

import pytest

from gradedq import verify
from gradedq.cli import run

from conftest import ACCEPTANCE_LINES

SEED = 0
MODEL = Path(__file__).resolve().parent.parent / "demos" / "models" / "closed_h3.json"


@lru_cache(maxsize=None)
def group(k):
    start = time.perf_counter()
    checks = verify.GROUPS[k - 1](SEED, 3)
    return tuple(checks), time.perf_counter() - start


def report(k, label, checks):
    bad = [c for c in checks if not c.passed]
    status = "PASS" if not bad else "FAIL"
    line = f"criterion {k:2d} {label}: {status} ({len(checks) - len(bad)}/{len(checks)} checks)"
    if bad:
        line += f"; first failure: {bad[0].name}" + (f" [{bad[0].detail}]" if bad[0].detail else "")
    print(line)
    ACCEPTANCE_LINES.append(line)
    return not bad


def gating(k):
    checks, _ = group(k)
    assert all(c.criterion == k for c in checks)
    return [c for c in checks if c.gating]


def literal(k):
    return [c for c in group(k)[0] if not c.gating]


def test_criterion_01_master_equation():
    checks, elapsed = group(1)
    assert report(1, "master equation", checks)
    assert elapsed < len(checks)            # under a second per check


def test_criterion_02_convention_pinning():
    checks = gating(2)
    assert len(checks) >= 5
    assert report(2, "convention pinning", checks)


def test_criterion_03_curvature_components():
    checks = gating(3)
    assert len(checks) >= 5
    assert report(3, "curvature components", checks)


def test_criterion_04_torsion_components():
    checks = gating(4)
    assert len(checks) >= 5 and any("n=2" in c.name for c in checks) and any("n=3" in c.name for c in checks)
    assert report(4, "torsion components", checks)


def test_criterion_05_k_splits():
    assert report(5, "K-splits", gating(5))


def test_criterion_06_comparison_corrected():
    assert report(6, "comparison (H = 0 and exact residuals)", gating(6))


@pytest.mark.xfail(strict=True, reason="the stated comparison omits the H(X,Y,.) term and, for torsion, "
                                       "the 1/2 d<a,b> asymmetry of the Dorfman bracket")
def test_criterion_06_comparison_as_stated():
    assert report(6, "comparison as stated, random H", literal(6))


def test_criterion_07_tensoriality_corrected():
    assert report(7, "tensoriality (anomaly -1/2 <a,b> V_df)", gating(7))


@pytest.mark.xfail(strict=True, reason="the naive anomaly carries a factor -1/2")
def test_criterion_07_anomaly_as_stated():
    assert report(7, "anomaly <a,b> df as stated", literal(7))


def test_criterion_08_dirac_corrected():
    assert report(8, "Dirac (phi = +d pi)", gating(8))


@pytest.mark.xfail(strict=True, reason="phi = -d pi gives a non-lagrangian embedding")
def test_criterion_08_phi_as_stated():
    assert report(8, "phi = -d pi as stated", literal(8))


def test_criterion_09_lie_algebroid():
    assert report(9, "Lie algebroid cross-check", gating(9))


def test_criterion_10_scalar_curvature():
    checks = gating(10)
    assert any("n=2" in c.name for c in checks) and any("n=3" in c.name for c in checks)
    assert report(10, "scalar curvature", checks)


def test_criterion_11_q_bundle():
    assert report(11, "Q-bundle criterion", gating(11))


def test_criterion_12_determinism():
    outputs = []
    for _ in range(2):
        buf = io.StringIO()
        code = run(["verify-all", str(MODEL), "--seed", "5"], out=buf)
        outputs.append((code, buf.getvalue()))
    same = outputs[0] == outputs[1] and outputs[0][0] == 0
    line = f"criterion 12 determinism: {'PASS' if same else 'FAIL'} (verify-all run twice, " \
           f"{len(outputs[0][1].encode())} bytes)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert same
