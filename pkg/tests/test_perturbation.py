import math
from dataclasses import dataclass

import numpy as np
import pytest

from knotreps.perturbation import (ConventionMismatch, Infeasible, PerturbationFn,
                                   certify_graph, construct_g, default_tube,
                                   largest_certified_epsilon, perturbed_variety_is_empty,
                                   phi_from_g)
from knotreps.pillowcase import (PI, FillingLine, Slope, Tube, build_arc_S, reducible_locus,
                                 tube_contains, tube_contains_array)
from knotreps.su2 import IDENTITY, classfn_eval, random_su2

from oracles import brute_force_emptiness


@dataclass
class PointCloud:
    """Stand-in for a pillowcase image: canonical points plus a convention flag."""

    pts: np.ndarray
    twisted: bool = False

    def points(self):
        return np.asarray(self.pts, dtype=float).reshape(-1, 2)


@pytest.fixture(scope="module")
def g53():
    return construct_g(default_tube(Slope(5, 3), 0.05 * PI))


def test_feasible_example(g53):
    cert = g53.certification
    assert cert["ok"] and cert["samples"] == 100_000
    assert cert["max_tube_distance"] + cert["margin"]["tube"] <= 0.05 * PI
    assert cert["min_beta_pi_clearance"] - cert["margin"]["clearance"] >= 0.05 * PI / 4
    # the graph passes near the vertices away from beta = +-pi
    arc = build_arc_S(Slope(5, 3))
    for a, b in (arc.vertices[0], arc.vertices[5]):
        assert abs(-g53.g(a) - b) <= 1e-12


def test_infeasible_example():
    with pytest.raises(Infeasible):
        construct_g(default_tube(Slope(5, 3), 1e-9), max_degree=4)


def test_degenerate_flat_arc_tube():
    tube = default_tube(Slope(1, 1), 0.15)
    g = construct_g(tube)
    alpha = np.linspace(-PI, PI, 100_000)
    beta = -g.g(alpha)
    assert np.all(tube_contains_array(tube, alpha, beta, star=True))
    # spot-check the scalar form agrees
    for i in range(0, 100_000, 997):
        assert tube_contains(tube, (alpha[i], beta[i]), star=True)


def test_g_is_odd_and_vanishes_at_pi(g53):
    assert g53.g(PI) == pytest.approx(0.0, abs=1e-12)
    assert g53.g(-PI) == pytest.approx(0.0, abs=1e-12)
    t = np.linspace(-3, 3, 101)
    assert np.allclose(g53.g(-t), -g53.g(t), atol=1e-13)


def test_graph_is_symmetric_under_the_involution(g53):
    alpha = np.linspace(-PI, PI, 2001)
    graph = g53.graph(alpha)
    image = np.stack([-graph[:, 0], -graph[:, 1]], axis=1)
    # (a, -g(a)) -> (-a, g(a)) = (-a, -g(-a)) is the graph point over -a
    assert np.allclose(image[::-1], graph, atol=1e-12)


def test_monotone_certification(g53):
    tube = g53.target_tube
    for samples in (100_000, 200_000):
        assert certify_graph(g53.coefficients, tube, samples)["ok"]
    # the same series re-certified with trailing zero coefficients (higher K)
    padded = np.concatenate([g53.coefficients, np.zeros(256)])
    assert certify_graph(padded, tube)["ok"]


def test_serialization(g53):
    d = g53.to_dict()
    assert d["degree"] == len(d["coefficients"])
    assert d["certification"]["samples"] == 100_000
    assert set(d["certification"]["margin"]) == {"tube", "clearance"}
    assert d["target_tube"]["epsilon"] == pytest.approx(0.05 * PI)
    assert d["derivative_bound"] >= d["sup_norm"] > 0


def test_unknot_exterior_is_empty(g53):
    res = perturbed_variety_is_empty(PointCloud(np.zeros((0, 2)), True),
                                     [reducible_locus(True)], g53)
    assert res.empty and bool(res) and res.witness is None


def test_graph_as_image_is_not_empty(g53):
    alpha = np.linspace(0.1, 3.0, 50)
    res = perturbed_variety_is_empty(PointCloud(g53.graph(alpha), True), [], g53)
    assert not res.empty
    assert res.witness["kind"] == "image"
    assert "raw" in res.witness and "canonical" in res.witness


def test_zero_perturbation_meets_flat_line():
    zero = PerturbationFn.from_coefficients([])
    res = perturbed_variety_is_empty(PointCloud(np.zeros((0, 2))), [reducible_locus(False)], zero)
    assert not res.empty
    assert res.witness["kind"] == "reducible"
    assert abs(res.witness["raw"][1]) <= 1e-12


def test_convention_mismatch(g53):
    with pytest.raises(ConventionMismatch):
        perturbed_variety_is_empty(PointCloud(np.zeros((0, 2)), False),
                                   [reducible_locus(True)], g53)


def test_phi_from_g_examples():
    zero = phi_from_g(PerturbationFn.from_coefficients([]))
    assert classfn_eval(zero, random_su2(np.random.default_rng(0))) == 0.0
    phi = phi_from_g(PerturbationFn.from_coefficients([1.0]))
    rng = np.random.default_rng(1)
    for _ in range(20):
        u = random_su2(rng)
        assert classfn_eval(phi, u) == pytest.approx(1.0 - u.trace() / 2.0, abs=1e-14)
    assert classfn_eval(phi, IDENTITY) == pytest.approx(0.0, abs=1e-15)


def test_phi_from_g_finite_differences():
    rng = np.random.default_rng(2)
    g = PerturbationFn.from_coefficients(rng.standard_normal(8) / np.arange(1, 9))
    phi = phi_from_g(g)
    t = np.arange(-PI, PI, 1e-3)
    h = 1e-5
    fd = (phi.f(t + h) - phi.f(t - h)) / (2 * h)
    assert np.max(np.abs(fd - g.g(t))) <= 1e-8


def test_emptiness_agrees_with_brute_force_on_lines():
    rng = np.random.default_rng(3)
    for _ in range(5):
        g = PerturbationFn.from_coefficients(rng.uniform(-0.3, 0.3, 4))
        lines = [reducible_locus(True), FillingLine(1, 1, 0.0, True)]
        res = perturbed_variety_is_empty(PointCloud(np.zeros((0, 2)), True), lines, g)
        assert res.empty == brute_force_emptiness(np.zeros((0, 2)), lines, g.coefficients,
                                                  1e-6, 1_000_000)


def test_largest_certified_epsilon_for_unknot():
    arc = build_arc_S(Slope(1, 1))
    eps = largest_certified_epsilon(PointCloud(np.zeros((0, 2)), True), arc,
                                    [reducible_locus(True)], lo=0.05, hi=0.4, iters=3)
    assert eps is not None and 0.05 <= eps <= 0.4
    g = construct_g(Tube(arc, eps))
    assert perturbed_variety_is_empty(PointCloud(np.zeros((0, 2)), True),
                                      [reducible_locus(True)], g).empty
