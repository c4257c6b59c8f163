import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import conformally_flat_text, generic_text, sample
from kkweyl.conformal import (conformal_report, conformal_rescale, conformal_residual, cotton,
                              cotton_divergence, cotton_divergence_fd, cs_density_3d,
                              reduced_cs_density_2d, schouten, weyl)
from kkweyl.curvature import GeometryError, build_frame, lower_all, raise_all
from kkweyl.dsl import parse_metric_file
from kkweyl.solutions import load_fixture

FLAT2 = "dim 2\nsignature + -\ncoords t x\ng[0][0] = 1\ng[1][1] = -1\n"


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("dim", [3, 4])
def test_conformally_flat_template(dim, seed):
    rng = np.random.default_rng(100 * dim + seed)
    spec = parse_metric_file(conformally_flat_text(dim, rng)).metric
    order = 2 if dim == 4 else 3
    for p in sample(rng, dim, 5, 0.5):
        assert conformal_residual(build_frame(spec, p, order)) < 1e-8


def test_printed_weyl_combination_fails_template():
    # the displayed combination repeats the g^{KN} S^{ML} term; it is not traceless
    spec = load_fixture("conformally_flat4").metric
    frame = build_frame(spec, (0.2, 0.3, -0.1, 0.4), 2)
    r_up = raise_all(frame, lower_all(frame, frame.riemann.as_values())).values
    s, gi = schouten(frame).values, frame.inverse
    printed = (np.einsum("km,nl->klmn", gi, s) - np.einsum("kn,ml->klmn", gi, s)
               - np.einsum("kn,ml->klmn", gi, s) + np.einsum("ln,mk->klmn", gi, s))
    assert np.max(np.abs(r_up - printed / 2)) / frame.riemann_scale > 1e-3
    assert conformal_residual(frame) < 1e-9


def test_schouten_of_three_sphere():
    frame = build_frame(load_fixture("sphere3").metric, (0.5, 1.0, 0.2), 2)
    np.testing.assert_allclose(schouten(frame).values, 0.5 * frame.inverse, atol=1e-12)
    with pytest.raises(GeometryError):
        schouten(build_frame(load_fixture("sphere2").metric, (1.0, 0.0), 2))


def test_generic_weyl_is_nonzero_and_traceless():
    frame = build_frame(load_fixture("generic4").metric, (0.1, 0.2, -0.1, 0.05), 2)
    c = weyl(frame).values
    g = frame.metric
    assert np.max(np.abs(c)) > 1e-3
    for pair in ("kl,klmn->mn", "km,klmn->ln", "kn,klmn->lm", "lm,klmn->kn", "ln,klmn->km", "mn,klmn->kl"):
        assert np.max(np.abs(np.einsum(pair, g, c))) < 1e-10


def test_cotton_templates_and_symmetry():
    flat = load_fixture("conformally_flat3").metric
    assert conformal_residual(build_frame(flat, (0.3, 0.6, 1.0), 3)) < 1e-9
    frame = build_frame(load_fixture("solution_b").metric, (0.0, 1.2, 0.0), 3)
    c = cotton(frame).values
    assert np.max(np.abs(c)) > 1e-3
    assert np.max(np.abs(c - c.T)) < 1e-10
    assert abs(np.einsum("kl,kl->", frame.metric, c)) < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_cotton_identities_on_random_metrics(seed):
    rng = np.random.default_rng(seed)
    spec = parse_metric_file(generic_text(3, rng)).metric
    p = sample(rng, 3, 1)[0]
    frame = build_frame(spec, p, 4)
    c = cotton(frame).values
    scale = frame.riemann_scale
    assert np.max(np.abs(c - c.T)) < 1e-10 * scale
    assert abs(np.einsum("kl,kl->", frame.metric, c)) < 1e-10 * scale
    assert np.max(np.abs(cotton_divergence(frame))) < 1e-9 * scale
    assert np.max(np.abs(cotton_divergence_fd(spec, p))) < 1e-6 * scale


@pytest.mark.parametrize("dim", [3, 4])
def test_rescaling_weights_and_verdicts(dim):
    rng = np.random.default_rng(7 + dim)
    spec = parse_metric_file(generic_text(dim, rng)).metric
    sigma = "0.3*t + 0.2*x*x - 0.1*sin(z)"
    scaled = conformal_rescale(spec, sigma)
    assert conformal_rescale(spec, "0") is spec
    p = (0.1, -0.2, 0.15) if dim == 3 else (0.1, -0.2, 0.15, 0.05)
    s = 0.3 * p[0] + 0.2 * p[1] ** 2 - 0.1 * math.sin(p[-1])
    order = 2 if dim == 4 else 3
    f0, f1 = build_frame(spec, p, order), build_frame(scaled, p, order)
    if dim == 4:
        np.testing.assert_allclose(weyl(f1).values, math.exp(-6 * s) * weyl(f0).values, atol=1e-11)
    else:
        np.testing.assert_allclose(cotton(f1).values, math.exp(-5 * s) * cotton(f0).values, atol=1e-11)
    # flatness verdicts agree at every sample point, both ways
    flat = parse_metric_file(conformally_flat_text(dim, rng)).metric
    for base in (spec, flat):
        pts = sample(rng, dim, 5)
        v0 = [r < 1e-8 for _, r in conformal_report(base, pts).residuals]
        v1 = [r < 1e-8 for _, r in conformal_report(conformal_rescale(base, sigma), pts).residuals]
        assert v0 == v1


def test_cs_density():
    cart = parse_metric_file("dim 3\nsignature + - -\ncoords t x z\ng[0][0] = 1\ng[1][1] = -1\n"
                             "g[2][2] = -1\n").metric
    assert cs_density_3d(build_frame(cart, (0.1, 0.2, 0.3), 2)) == 0.0
    frame = build_frame(load_fixture("solution_b").metric, (0.0, 2.0, 0.0), 2)
    a, b = cs_density_3d(frame), cs_density_3d(build_frame(load_fixture("solution_b").metric,
                                                           (0.0, 2.0, 0.0), 2))
    assert math.isfinite(a) and a == b


def test_reduced_cs_density():
    frame = build_frame(parse_metric_file(FLAT2).metric, (0.0, 0.0), 2)
    assert reduced_cs_density_2d(frame, 0.0) == 0.0
    assert reduced_cs_density_2d(frame, 1.0) == pytest.approx(-1 / (8 * math.pi**2), abs=1e-15)
    assert -1 / (8 * math.pi**2) == pytest.approx(-0.0126651, abs=1e-7)
    # static family at x = 0.7: r' = -r_lib, arithmetic cross-check
    mf = load_fixture("static2d")
    fr = build_frame(mf.metric, (0.0, 0.7), 2)
    f = 0.7
    r = -float(fr.ricci[1].values)
    assert reduced_cs_density_2d(fr, f) == pytest.approx(-(f * r + f**3) * fr.volume / (8 * math.pi**2))
    with pytest.raises(GeometryError):
        reduced_cs_density_2d(build_frame(load_fixture("sphere2").metric, (1.0, 0.0), 2), 1.0)


def test_two_dimensions_rejected():
    with pytest.raises(GeometryError):
        conformal_report(load_fixture("sphere2").metric, [(1.0, 0.0)])
