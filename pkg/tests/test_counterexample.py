import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from virtual_boundary.counterexample import (
    CSV_FIELDS,
    SQRT2,
    VerificationError,
    atomic_write,
    boundary_witness,
    build_pair,
    build_segment,
    check_fringe_geometry,
    check_junctions,
    choose_fringe,
    default_n_values,
    divergence_report,
    junction_minimal,
    midpoint_divergence,
    parallel_offsets,
    period,
    ratio_bound,
    reports_to_csv,
    run_report,
    sublinearity_ratio,
)

HALF = 0.5


@pytest.fixture(scope="module")
def periods():
    return period(0.0), period(HALF)


# --- fringe choice and segment shape ---------------------------------------------------------------


@given(st.floats(0, 500, allow_nan=False))
def test_fringe_within_one_step_above(height):
    k = choose_fringe(height)
    assert height - 1e-9 <= k * SQRT2 < height + SQRT2


def test_fringe_on_a_level_is_that_level():
    assert choose_fringe(0.0) == 0
    assert choose_fringe(3 * SQRT2) == 3


def test_build_segment_rejects_bad_input():
    with pytest.raises(ValueError):
        build_segment(HALF, 0)
    with pytest.raises(ValueError):
        build_segment(-1.0, 1)


def test_fringe_below_entry_rejected():
    with pytest.raises(VerificationError):
        build_segment(HALF, 1, fringe_index=0)


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16])
def test_length_bounds(periods, n):
    l0, ld = periods
    seg0, segd, _ = build_pair(HALF, n)
    assert segd.length <= 2 * SQRT2 * (n * ld + 1) + 2 + 1e-9
    assert seg0.length <= n * SQRT2 * (ld + l0) + 2 * (1 + SQRT2) + 1e-9


@pytest.mark.parametrize("n", [1, 3, 8])
def test_straight_across_the_shared_wall(n):
    seg0, segd, _ = build_pair(HALF, n)
    for seg in (seg0, segd):
        assert check_junctions(seg)
        assert check_fringe_geometry(seg)


def test_middle_segment_angles():
    _, segd, _ = build_pair(HALF, 1)
    ar, as_, at = segd.middle_angles()
    assert ar == pytest.approx(math.pi / 2)
    assert as_ == pytest.approx(math.pi / 4) and at == pytest.approx(math.pi / 4)


def test_kinked_junction_detected():
    before, at, after = (0.0, -1.0, -1.0), (0.0, 0.0, 0.0), (0.0, 1.0, 0.2)
    assert not junction_minimal(before, at, after, (0.0, 1.0, 0.0))
    assert junction_minimal(before, at, (0.0, 1.0, 1.0), (0.0, 1.0, 0.0))


def test_segment_serializes():
    doc = json.loads(json.dumps(build_segment(HALF, 2).to_json()))
    assert len(doc["segments"]) == 3 and doc["n"] == 2


# --- divergence ---------------------------------------------------------------


def test_zero_periods_zero_divergence():
    assert midpoint_divergence(HALF, 0) == 0.0


@pytest.mark.parametrize("n", [1, 8, 32])
def test_divergence_identity(periods, n):
    l0, ld = periods
    assert midpoint_divergence(HALF, n) == pytest.approx(n / SQRT2 * (ld - l0), abs=1e-6 * n)


def test_divergence_doubles():
    for n in (2, 4, 8):
        assert midpoint_divergence(HALF, 2 * n) == pytest.approx(2 * midpoint_divergence(HALF, n), rel=1e-6)


def test_divergence_affine_and_increasing():
    ns = np.arange(1, 9)
    d = np.array([midpoint_divergence(HALF, int(n)) for n in ns])
    assert np.all(np.diff(d) > 0)
    slope, icpt = np.polyfit(ns, d, 1)
    assert np.max(np.abs(slope * ns + icpt - d)) <= 1e-6 * np.max(d)


def test_divergence_nondecreasing_in_delta():
    vals = [midpoint_divergence(d, 4) for d in (0.1, 0.5, 1.0)]
    assert vals == sorted(vals)


@pytest.mark.parametrize("n", [1, 4, 16, 64])
def test_ratio_between_bound_and_one(n):
    r = sublinearity_ratio(HALF, n)
    assert ratio_bound(HALF) <= r < 1


def test_bound_is_positive():
    for d in (0.1, 0.5, 1.0):
        assert ratio_bound(d) > 0


def test_witness_positive_and_linear(periods):
    l0, ld = periods
    w1 = boundary_witness(HALF, 1)
    assert w1 == pytest.approx(ld - l0, abs=1e-6) and w1 > 0
    assert boundary_witness(HALF, 16) == pytest.approx(16 * w1, rel=1e-6)
    # a longer ambient ray gives the same value
    assert boundary_witness(HALF, 4, n_total=16) == pytest.approx(4 * w1, rel=1e-6)


def test_witness_vanishes_without_thickening():
    for n in (1, 4):
        assert boundary_witness(0.0, n) == pytest.approx(0.0, abs=1e-9)


def test_witness_rejects_zero():
    with pytest.raises(ValueError):
        boundary_witness(HALF, 0)


@pytest.mark.parametrize("n", [1, 8])
def test_paths_stay_parallel(n):
    offs = parallel_offsets(HALF, n)
    assert max(offs) - min(offs) <= 1e-9
    assert offs[0] == pytest.approx(midpoint_divergence(HALF, n) * SQRT2, rel=1e-9)


# --- reports ---------------------------------------------------------------


def test_default_n_values():
    assert default_n_values(64) == [1, 2, 4, 8, 16, 32, 64]
    assert default_n_values(5) == [1, 2, 4]


def test_report_passes_and_serializes():
    rep = divergence_report(HALF, [1, 2, 4])
    assert rep.passed and all(rep.verdicts.values())
    doc = json.loads(json.dumps(rep.to_json()))
    assert doc["passed"] and len(doc["rows"]) == 3


def test_csv_has_one_row_per_n():
    text = reports_to_csv([divergence_report(HALF, [1, 2])])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 2 and list(rows[0]) == CSV_FIELDS


def test_run_report_writes_files(tmp_path):
    code, files, reports = run_report([HALF], 4, out_dir=tmp_path, svg=True)
    assert code == 0
    assert {f.name for f in files} == {"divergence.json", "divergence.csv", "period_chain.svg", "shared_wall.svg"}
    doc = json.loads((tmp_path / "divergence.json").read_text())
    assert doc["n_values"] == [1, 2, 4]
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".")]


def test_run_report_json_only(tmp_path):
    _, files, _ = run_report([HALF], 1, formats=("json",), out_dir=tmp_path)
    assert [f.name for f in files] == ["divergence.json"]


def test_wrong_pinned_value_fails(tmp_path):
    code, _, reports = run_report([HALF], 1, out_dir=tmp_path, pinned={"0": 1.0})
    assert code == 1 and any("pinned" in w for w in reports[0].witnesses)


@pytest.mark.parametrize("deltas,n_max", [([], 4), ([0.0], 4), ([-1.0], 4), ([HALF], 0)])
def test_run_report_usage_errors(tmp_path, deltas, n_max):
    with pytest.raises(ValueError):
        run_report(deltas, n_max, out_dir=tmp_path)


def test_run_report_unwritable_target(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        run_report([HALF], 1, out_dir=blocker / "sub")


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "a.txt"
    atomic_write(p, "one")
    atomic_write(p, "two")
    assert p.read_text() == "two"
    assert [x.name for x in tmp_path.iterdir()] == ["a.txt"]
