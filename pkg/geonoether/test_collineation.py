import math

import numpy as np
import pytest
from pydantic import ValidationError

from geonoether.base import NonConstantMetricError
from geonoether.collineation import (
    CollineationClaim,
    bianchi_symmetry_catalog,
    bracket_residual,
    flat_projective_catalog,
    same_span,
    solve_determining_equations,
    sphere_killing_catalog,
    sphere_metric,
    sphere_structure_constants,
    verify_basis,
    verify_collineation,
)
from geonoether.expr import Const, CoordinateChart, evaluate, parse
from geonoether.geometry import Metric, SampleBox, Samples, SymmetryVector, halton_samples


SIGNATURES = [[1, 1], [1, 1, 1], [1, -1]]


def cube(n: int) -> SampleBox:
    return SampleBox(lower=[-1.0] * n, upper=[1.0] * n)


def flat_samples(n: int, count: int = 100) -> Samples:
    return halton_samples(Metric.flat([1] * n).chart, cube(n), count)


SPHERE_BOX = SampleBox(lower=[0.0, -math.pi], upper=[math.pi, math.pi])
BIANCHI_BOX = SampleBox(lower=[-1.0, -2.0, -2.0, -2.0], upper=[1.0, 2.0, 2.0, 2.0])


# ======================================================================================================================
# FLAT CATALOG
# ======================================================================================================================


@pytest.mark.parametrize(
    "signature, counts",
    [
        ([1, 1], {"KV": 3, "HV": 1, "AC": 4, "SPC": 2}),
        ([1, 1, 1], {"KV": 6, "HV": 1, "AC": 9, "SPC": 3}),
        ([1, -1], {"KV": 3, "HV": 1, "AC": 4, "SPC": 2}),
    ],
)
def test_flat_catalog_counts(signature, counts):
    catalog = flat_projective_catalog(len(signature), signature)
    assert catalog.counts() == counts
    assert catalog.provenance == "catalog"


def test_lorentzian_catalog_has_a_boost_instead_of_a_rotation():
    catalog = flat_projective_catalog(2, [1, -1])
    boost = catalog["X_xy"].vector
    for point in ([0.3, -0.7], [1.2, 0.4]):
        x, y = point
        assert evaluate(boost.eta[0], point) == pytest.approx(-y)
        assert evaluate(boost.eta[1], point) == pytest.approx(-x)


@pytest.mark.parametrize("signature", SIGNATURES)
def test_every_flat_catalog_entry_verifies(signature):
    catalog = flat_projective_catalog(len(signature), signature)
    samples = halton_samples(catalog.metric.chart, cube(len(signature)), 100)
    for report in verify_basis(catalog, samples, tol=1e-12):
        assert report.passed, (report.subject, report.residuals())
        assert report.evaluated == 100


def test_verify_collineation_examples():
    catalog = flat_projective_catalog(3)
    samples = flat_samples(3)
    report = verify_collineation(catalog["S_x"], catalog.metric, samples)
    assert report.passed
    assert report.maximum == 0.0
    assert set(report.residuals()) == {"metric", "gradient"}

    plane = flat_projective_catalog(2)
    h = plane["H"]
    as_killing = CollineationClaim(vector=h.vector, kind="KV")
    report = verify_collineation(as_killing, plane.metric, flat_samples(2))
    assert not report.passed
    assert report.maximum == pytest.approx(2.0)


def test_spc_claim_checks_the_projective_hessian():
    catalog = flat_projective_catalog(2)
    report = verify_collineation(catalog["P_x"], catalog.metric, flat_samples(2), tol=1e-12)
    assert report.passed
    assert set(report.residuals()) == {"connection", "projective_hessian"}

    bent = CollineationClaim(vector=catalog["P_x"].vector, kind="SPC", phi=parse("x^2", catalog.metric.chart))
    assert not verify_collineation(bent, catalog.metric, flat_samples(2)).passed


def test_conformal_claim_with_expression_factor():
    m = Metric.flat([1, 1])
    inversion_like = SymmetryVector.spatial(m.chart, ["x^2 - y^2", "2*x*y"])
    claim = CollineationClaim(vector=inversion_like, kind="CKV", psi=parse("2*x", m.chart))
    assert verify_collineation(claim, m, flat_samples(2), tol=1e-12).passed

    wrong = CollineationClaim(vector=inversion_like, kind="CKV", psi=parse("2*y", m.chart))
    assert not verify_collineation(wrong, m, flat_samples(2)).passed


def test_claims_are_validated():
    chart = CoordinateChart(["x", "y"])
    with pytest.raises(ValidationError):
        CollineationClaim(vector=SymmetryVector.spatial(chart, ["1", "0"]), kind="KV", psi=Const(1))
    with pytest.raises(ValidationError):
        CollineationClaim(vector=SymmetryVector.spatial(chart, ["t", "0"]), kind="KV")
    with pytest.raises(ValidationError):
        CollineationClaim(vector=SymmetryVector.spatial(chart, ["x", "y"]), kind="HV", psi=parse("x", chart))


# ======================================================================================================================
# SOLVER
# ======================================================================================================================


@pytest.mark.parametrize("signature", SIGNATURES)
def test_solver_dimensions(signature):
    n = len(signature)
    m = Metric.flat(signature)
    assert len(solve_determining_equations(m, "KV", 2)) == n * (n + 1) // 2
    assert len(solve_determining_equations(m, "HV", 2)) == 1
    assert len(solve_determining_equations(m, "AC", 2)) == n * n
    assert len(solve_determining_equations(m, "SPC", 2)) == n


@pytest.mark.parametrize("signature", SIGNATURES)
def test_solver_spans_the_catalog(signature):
    n = len(signature)
    m = Metric.flat(signature)
    catalog = flat_projective_catalog(n, signature)

    def vectors(claims):
        return [c.vector for c in claims]

    kv = solve_determining_equations(m, "KV")
    hv = solve_determining_equations(m, "HV")
    assert same_span(vectors(kv), vectors(catalog.of_kind("KV")))
    assert same_span(vectors(kv) + vectors(hv), vectors(catalog.homothetic_algebra()))
    assert same_span(vectors(solve_determining_equations(m, "AC")), vectors(catalog.of_kind("AC")))
    assert same_span(vectors(solve_determining_equations(m, "SPC")), vectors(catalog.of_kind("SPC")))


@pytest.mark.parametrize("signature", SIGNATURES)
def test_solver_output_verifies(signature):
    n = len(signature)
    m = Metric.flat(signature)
    samples = halton_samples(m.chart, cube(n), 100)
    for kind in ("KV", "HV", "AC", "SPC"):
        basis = solve_determining_equations(m, kind)
        assert basis.provenance == "solver" and basis.kind == kind
        for report in verify_basis(basis, samples, tol=1e-12):
            assert report.passed, (kind, report.subject, report.residuals())


def test_solver_plane_killing_basis():
    m = Metric.flat([1, 1])
    basis = solve_determining_equations(m, "KV", 2)
    expected = [SymmetryVector.spatial(m.chart, eta) for eta in (["1", "0"], ["0", "1"], ["y", "-x"])]
    assert same_span([c.vector for c in basis], expected)


def test_solver_lorentzian_plane_contains_the_boost():
    m = Metric.flat([1, -1])
    basis = solve_determining_equations(m, "KV", 2)
    boost = SymmetryVector.spatial(m.chart, ["y", "x"])
    found = [c.vector for c in basis]
    assert same_span(found, found + [boost])


def test_solver_homothetic_factor_is_normalised():
    hv = solve_determining_equations(Metric.flat([1, 1, 1]), "HV")
    assert hv.claims[0].psi_value == 1.0


def test_solver_rejects_curved_metrics():
    with pytest.raises(NonConstantMetricError):
        solve_determining_equations(sphere_metric(1), "KV")


def test_solver_with_too_small_degree_returns_what_it_finds():
    assert len(solve_determining_equations(Metric.flat([1, 1]), "SPC", 1)) == 0
    assert len(solve_determining_equations(Metric.flat([1, 1]), "KV", 0)) == 2


# ======================================================================================================================
# SPHERE
# ======================================================================================================================


@pytest.mark.parametrize("curvature", [1, -1])
def test_sphere_killing_vectors_verify(curvature):
    catalog = sphere_killing_catalog(curvature)
    samples = halton_samples(catalog.metric.chart, SPHERE_BOX, 100)
    for report in verify_basis(catalog, samples, tol=1e-10):
        assert report.passed, (report.subject, report.residuals())
    assert catalog.is_independent(samples)


def test_sphere_translation_is_exact():
    catalog = sphere_killing_catalog(1)
    samples = halton_samples(catalog.metric.chart, SPHERE_BOX, 100)
    assert verify_collineation(catalog["Y3"], catalog.metric, samples).maximum <= 1e-12


@pytest.mark.parametrize("curvature", [1, -1])
def test_sphere_killing_algebra_closes(curvature):
    catalog = sphere_killing_catalog(curvature)
    samples = halton_samples(catalog.metric.chart, SPHERE_BOX, 100)
    assert bracket_residual(catalog, sphere_structure_constants(curvature), samples) <= 1e-10
    assert bracket_residual(catalog, {("Y1", "Y2"): {"Y3": -curvature}}, samples) >= 1.0


def test_sphere_killing_vector_contracts_to_the_integral():
    catalog = sphere_killing_catalog(1)
    y1 = catalog["Y1"].vector
    phi, theta, dphi, dtheta = 0.8, 1.9, 0.3, -1.1
    g = catalog.metric.values([[phi, theta]])[0]
    y = y1.jet([[phi, theta]], [0.0]).eta[0]
    contraction = float(np.einsum("ij,i,j->", g, y, [dphi, dtheta]))
    expected = dphi * math.sin(theta) + dtheta * math.cos(theta) * math.sin(phi) * math.cos(phi)
    assert contraction == pytest.approx(expected, rel=1e-13)


def test_points_on_the_excluded_locus_are_skipped():
    catalog = sphere_killing_catalog(1)
    samples = Samples(points=np.array([[0.0, 0.3], [1.0, 0.3], [math.pi / 3, -1.0]]), times=np.zeros(3))
    report = verify_collineation(catalog["Y1"], catalog.metric, samples)
    assert report.skipped == 1
    assert report.evaluated == 2
    assert report.passed


# ======================================================================================================================
# BIANCHI
# ======================================================================================================================


def test_bianchi_catalog_verifies():
    catalog = bianchi_symmetry_catalog()
    samples = halton_samples(catalog.metric.chart, BIANCHI_BOX, 100)
    assert catalog.names == ["Y1", "Y2", "Y3", "Y4", "Y5", "Y6", "H"]
    for report in verify_basis(catalog, samples):
        assert report.passed, (report.subject, report.residuals())
    assert catalog.is_independent(samples)


def test_bianchi_homothetic_vector_is_gradient():
    catalog = bianchi_symmetry_catalog()
    samples = halton_samples(catalog.metric.chart, BIANCHI_BOX, 100)
    h = catalog["H"]
    assert h.is_gradient and h.psi_value == 1.0
    report = verify_collineation(h, catalog.metric, samples)
    assert report.block("gradient").maximum <= 1e-8

    y5 = verify_collineation(catalog["Y5"], catalog.metric, samples)
    assert y5.passed and "gradient" not in y5.residuals()


def test_bianchi_vacuum_catalog():
    catalog = bianchi_symmetry_catalog(vacuum=True)
    assert catalog.metric.chart.names == ("lambda", "b1", "b2")
    assert catalog.names == ["Y1", "Y2", "Y4", "H"]
    box = SampleBox(lower=[-1.0, -2.0, -2.0], upper=[1.0, 2.0, 2.0])
    samples = halton_samples(catalog.metric.chart, box, 50)
    assert all(r.passed for r in verify_basis(catalog, samples))


def test_bianchi_translation_is_not_homothetic():
    catalog = bianchi_symmetry_catalog()
    samples = halton_samples(catalog.metric.chart, BIANCHI_BOX, 50)
    wrong = CollineationClaim(vector=catalog["Y1"].vector, kind="HV", psi=Const(1))
    assert verify_collineation(wrong, catalog.metric, samples).maximum >= 1e-2
