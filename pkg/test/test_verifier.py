# FILE: test/test_verifier.py
import numpy as np
import pytest

from src.config import REPORT_HEADER
from src.metric_dsl import load_metric
from src.verifier import (
    Tolerances,
    algebra_selftest,
    fmt_number,
    parse_box,
    point_residuals,
    render_report,
    run_verification,
    sample_points,
    verify_conservation,
    verify_freud,
    verify_identities,
    verify_missing_term,
    verify_pauli,
    verify_sparling,
)

BOXES = {
    "schwarzschild_standard": [(0.0, 1.0), (2.0, 3.0), (0.5, 2.6), (0.0, 6.0)],
    "schwarzschild_isotropic": [(0.0, 0.0), (1.0, 3.0), (1.0, 3.0), (1.0, 3.0)],
    "flrw": [(1.0, 3.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
    "minkowski_spherical": [(0.0, 1.0), (1.0, 4.0), (0.5, 2.6), (0.0, 6.0)],
}


def points_for(name, n=4, seed=3):
    return sample_points(BOXES[name], n, seed)


def test_sample_points_are_seeded_and_inside_the_box():
    box = BOXES["schwarzschild_standard"]
    a = sample_points(box, 20, seed=5)
    b = sample_points(box, 20, seed=5)
    assert np.array_equal(a, b)
    assert a.shape == (20, 4)
    for c, (lo, hi) in enumerate(box):
        assert np.all((a[:, c] >= lo) & (a[:, c] <= hi))
    pinned = sample_points([(0.0, 0.0), (1.0, 2.0), (1.0, 2.0), (1.0, 2.0)], 5, seed=1)
    assert np.all(pinned[:, 0] == 0.0)


def test_parse_box():
    coords = ("t", "x", "y", "z")
    assert parse_box("t:0..0, x:5..50", coords) == [(0.0, 0.0), (5.0, 50.0), (2.0, 3.0), (2.0, 3.0)]
    assert parse_box(None, coords) == [(2.0, 3.0)] * 4
    for bad in ("q:0..1", "x:3..1", "x:1-2"):
        with pytest.raises(ValueError):
            parse_box(bad, coords)


def test_fmt_number_uses_twelve_digits():
    assert fmt_number(1 / 3) == "0.333333333333"
    assert fmt_number(-0.0) == "0"
    assert fmt_number(1e-20) == "1e-20"


def test_algebra_selftest_passes():
    entry = algebra_selftest(seed=0, n_cases=60, n_metrics=5)
    assert entry.passed
    assert entry.residual < 1e-11
    assert entry.points_used == 60


@pytest.mark.parametrize("name", ["schwarzschild_standard", "schwarzschild_isotropic", "flrw"])
def test_freud_identity_holds_on_and_off_shell(name):
    entry = verify_freud(load_metric(name), points_for(name), threads=1)
    assert entry.passed, entry
    assert entry.points_used == 4


@pytest.mark.parametrize("name", sorted(BOXES))
def test_sparling_decomposition(name):
    entry = verify_sparling(load_metric(name), points_for(name, n=3))
    assert entry.passed, entry


@pytest.mark.parametrize("name", ["schwarzschild_standard", "schwarzschild_isotropic", "flrw"])
def test_pauli_identity(name):
    assert verify_pauli(load_metric(name), points_for(name, n=3)).passed


def test_missing_term_exhibit():
    spec = load_metric("schwarzschild_standard")
    with_term, without = verify_missing_term(spec, points_for("schwarzschild_standard"))
    assert with_term.passed
    assert with_term.residual < 1e-8
    assert without.expectation == "exceed"
    assert without.residual > 1e-5
    assert without.passed


def test_missing_term_is_degenerate_on_flat_cartesian():
    spec = load_metric("minkowski_cartesian")
    _, without = verify_missing_term(spec, sample_points([(0.0, 1.0)] * 4, 2, 0))
    assert without.residual == 0.0
    assert without.passed
    assert "degenerate" in without.note


def test_conservation_by_finite_differences():
    spec = load_metric("schwarzschild_standard")
    box = [(0.0, 1.0), (4.0, 6.0), (1.0, 2.0), (0.0, 1.0)]
    entry = verify_conservation(spec, sample_points(box, 2, 0), h=1e-3)
    assert entry.passed, entry
    assert entry.points_used == 2


def test_conservation_in_the_isotropic_far_field():
    spec = load_metric("schwarzschild_isotropic")
    box = [(0.0, 0.0), (5.5, 6.0), (5.5, 6.0), (5.5, 6.0)]
    entry = verify_conservation(spec, sample_points(box, 2, 1), h=1e-3)
    assert entry.passed, entry
    assert entry.residual < 1e-7


def test_notes_render_with_braced_indices():
    spec = load_metric("schwarzschild_standard")
    names = ("freud_split", "sparling", "sparling_scalar", "einstein_complex")
    _, notes = verify_identities(spec, points_for("schwarzschild_standard", n=2), names)
    assert any(n.startswith("d_rho U = sqrt(-g)(+Gamma^s_{rho s} S") for n in notes)
    assert any("t_l^r - g_lm d_k g^{mn} S_n^{kr}" in n for n in notes)
    assert any("dg^{rho l} ^ *S_l" in n for n in notes)


def test_jet_sparling_is_not_worse_than_finite_differences():
    spec = load_metric("schwarzschild_isotropic")
    jet, fd = verify_sparling(spec, points_for("schwarzschild_isotropic", n=2), fd_mode=True)
    assert jet.name == "sparling" and fd.name == "sparling_fd"
    assert jet.residual <= fd.residual


def test_point_residuals_report_sign_variants():
    spec = load_metric("schwarzschild_standard")
    out = point_residuals(spec, (0.0, 2.5, 1.1, 0.4), ["freud", "sparling", "einstein_complex"], with_fd=False)
    assert out["freud"][0] < 1e-8
    assert out["~freud_plus_orientation"][0] > 1e-3
    assert out["sparling"][0] < 1e-8
    assert out["~sparling_plus_G"][0] >= 0.0
    assert out["~sparling_printed_upper"][0] > 1e-6
    assert out["einstein_complex"][0] < 1e-8


def test_extra_entries_on_curved_charts():
    spec = load_metric("schwarzschild_standard")
    names = ("triple_equivalence", "einstein_complex", "landau_lifshitz_complex", "coderivative",
             "freud_split", "sparling_lowered", "sparling_scalar", "vacuum_ricci", "freud_divergence")
    entries, notes = verify_identities(spec, points_for("schwarzschild_standard", n=2), names, fd_points=1)
    by_name = {e.name: e for e in entries}
    assert "landau_lifshitz_symmetry" in by_name
    for e in entries:
        assert e.passed, e
    assert by_name["freud_divergence"].points_used == 1
    assert by_name["triple_equivalence"].points_used == 2
    assert any("Freud" in n or "d_rho U" in n for n in notes)


def test_vacuum_check_fails_on_flrw():
    entries, _ = verify_identities(load_metric("flrw"), points_for("flrw", n=2), ("vacuum_ricci",))
    assert not entries[0].passed


def test_points_outside_the_chart_are_skipped_and_fail_the_entry():
    spec = load_metric("schwarzschild_standard")
    points = sample_points([(0.0, 0.0), (1.0, 1.0), (1.0, 2.0), (0.0, 1.0)], 3, 0)
    entry = verify_freud(spec, points)
    assert entry.points_skipped == 3
    assert entry.points_used == 0
    assert not entry.passed


def test_flat_report_passes_and_renders_deterministically():
    spec = load_metric("minkowski_cartesian")
    kwargs = dict(n_points=3, seed=7, fd_points=1, algebra_cases=20, threads=1)
    report = run_verification(spec, parse_box(None, spec.coords), **kwargs)
    assert report.passed
    assert report.entry("freud").residual == 0.0
    text = render_report(report)
    assert text.splitlines()[0] == REPORT_HEADER
    assert text.splitlines()[-1] == "# result: PASS"
    again = render_report(run_verification(spec, parse_box(None, spec.coords), **kwargs))
    assert again == text
    kv = render_report(report, "kv")
    assert "identity=freud residual=0 " in kv
    assert kv.endswith("result=PASS\n")


def test_threads_do_not_change_the_report():
    spec = load_metric("schwarzschild_isotropic")
    box = parse_box("t:0..0, x:1..3, y:1..3, z:1..3", spec.coords)
    kwargs = dict(n_points=4, seed=7, fd_points=1, algebra_cases=20)
    one = render_report(run_verification(spec, box, threads=1, **kwargs))
    four = render_report(run_verification(spec, box, threads=4, **kwargs))
    assert one == four
    assert "# result: PASS" in one


def test_tolerances_validate():
    with pytest.raises(ValueError):
        Tolerances(jet=-1.0)
