"""Quadrature engine and the two averaging routes."""

import math

import numpy as np
import pytest

import dumbbell_averager as da
from dumbbell_averager.averaging import QUAD_START_NODES

SQRT3 = math.sqrt(3.0)


def const_lin(f1=None, f4=None):
    """LinearizedTorque with the given f1/f4 and zero elsewhere."""
    zero = lambda t, v1, v2: np.zeros(np.broadcast(t, v1, v2).shape)
    return da.LinearizedTorque(
        f1=f1 or zero, f2=zero, f3=zero, f4=f4 or zero
    )


def ones(t, v1, v2):
    return np.ones(np.broadcast(t, v1, v2).shape)


# closed forms obtained from the trigonometric moment expansion; checked
# below against an independent fixed-node trapezoid oracle
def t1_field_const(a):
    x, y = a
    return np.array([y / 6.0, x / 2.0])


def t1_field_v1sq(a):
    x, y = a
    return np.array([y * (3 * x**2 + y**2) / 24.0, x * (3 * x**2 + y**2) / 8.0])


def t1_field_resonant(a):
    x, y = a
    return np.array([-SQRT3 * x * y / 12.0, SQRT3 * (y**2 - 3 * x**2) / 24.0])


def t2_field_const(a):
    z, w = a
    return np.array([w / 4.0, z])


def t2_field_v2sq(a):
    z, w = a
    return np.array([w * (4 * z**2 + w**2) / 16.0, z * (4 * z**2 + w**2) / 4.0])


def brute_force_field(spec, lin, alpha, n=2**14):
    """Fixed-node trapezoid evaluation, independent of the adaptive path."""
    a1, a2 = alpha
    T = spec.window
    t = np.arange(n) * (T / n)
    if spec.mode is da.Mode.NUTATION_T1:
        c, s = np.cos(SQRT3 * t), np.sin(SQRT3 * t)
        d1 = a1 * c + a2 / SQRT3 * s
        d2 = a2 * c - SQRT3 * a1 * s
        core = d1 * lin.f1(t, d2, np.zeros_like(d2))
        w1, w2 = 1 / (2 * spec.p * math.pi), SQRT3 / (2 * spec.p * math.pi)
        return np.array(
            [np.sum(s * core) * (T / n) * w1, np.sum(c * core) * (T / n) * w2]
        )
    c, s = np.cos(2 * t), np.sin(2 * t)
    d3 = a1 * c + a2 / 2 * s
    d4 = a2 * c - 2 * a1 * s
    core = d3 * lin.f4(t, np.zeros_like(d4), d4)
    w1, w2 = 1 / (spec.p * math.pi), 2 / (spec.p * math.pi)
    return np.array([np.sum(s * core) * (T / n) * w1, np.sum(c * core) * (T / n) * w2])


T1_SPEC = da.ResonanceSpec(da.Mode.NUTATION_T1, 1, 1)
T2_SPEC = da.ResonanceSpec(da.Mode.PRECESSION_T2, 1, 1)


class TestPeriodicQuadrature:
    def test_squared_sine(self):
        got = da.periodic_quadrature(lambda t: np.sin(t) ** 2, 2 * math.pi, 1e-12)
        assert got == pytest.approx(math.pi, abs=1e-12)

    def test_wallis_moment(self):
        got = da.periodic_quadrature(
            lambda t: np.cos(t) ** 4 * np.sin(t) ** 2, 2 * math.pi, 1e-12
        )
        assert got == pytest.approx(math.pi / 8, abs=1e-12)

    def test_constant(self):
        got = da.periodic_quadrature(lambda t: np.ones_like(t), 5.0, 1e-12)
        assert got == pytest.approx(5.0, abs=1e-14)

    def test_unreachable_tolerance_raises(self):
        with pytest.raises(da.NoConvergenceError):
            da.periodic_quadrature(lambda t: np.sin(t) ** 2, 2 * math.pi, 0.0)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            da.periodic_quadrature(lambda t: t, -1.0, 1e-12)
        with pytest.raises(ValueError):
            da.periodic_quadrature(lambda t: t, 1.0, -1e-12)


class TestAveragedField:
    def test_constant_f1(self):
        fld = da.averaged_field(T1_SPEC, const_lin(f1=ones))
        rng = np.random.default_rng(10)
        for _ in range(6):
            a = rng.uniform(-2, 2, 2)
            assert np.allclose(fld.evaluate(a), t1_field_const(a), atol=1e-12)

    def test_velocity_squared_f1(self):
        fld = da.averaged_field(T1_SPEC, const_lin(f1=lambda t, v1, v2: v1**2))
        rng = np.random.default_rng(11)
        for _ in range(6):
            a = rng.uniform(-2, 2, 2)
            assert np.allclose(fld.evaluate(a), t1_field_v1sq(a), atol=1e-11)

    def test_origin_maps_to_exact_zero(self):
        fld = da.averaged_field(T1_SPEC, const_lin(f1=lambda t, v1, v2: v1**2))
        out = fld.evaluate(np.zeros(2))
        assert out[0] == 0.0 and out[1] == 0.0

    def test_constant_f4(self):
        fld = da.averaged_field(T2_SPEC, const_lin(f4=ones))
        rng = np.random.default_rng(12)
        for _ in range(6):
            a = rng.uniform(-2, 2, 2)
            assert np.allclose(fld.evaluate(a), t2_field_const(a), atol=1e-12)

    def test_closed_forms_agree_with_fixed_node_oracle(self):
        cases = [
            (T1_SPEC, const_lin(f1=ones), t1_field_const),
            (T1_SPEC, const_lin(f1=lambda t, v1, v2: v1**2), t1_field_v1sq),
            (
                T1_SPEC,
                const_lin(f1=lambda t, v1, v2: np.sin(SQRT3 * t) * v1),
                t1_field_resonant,
            ),
            (T2_SPEC, const_lin(f4=ones), t2_field_const),
            (T2_SPEC, const_lin(f4=lambda t, v1, v2: v2**2), t2_field_v2sq),
        ]
        rng = np.random.default_rng(13)
        for spec, lin, closed in cases:
            for _ in range(4):
                a = rng.uniform(-1.5, 1.5, 2)
                assert np.allclose(brute_force_field(spec, lin, a), closed(a), atol=1e-11)

    def test_batch_matches_single(self):
        fld = da.averaged_field(T2_SPEC, const_lin(f4=lambda t, v1, v2: v2**2))
        pts = np.array([[0.3, -0.9], [1.1, 0.4], [0.0, 0.0], [2.0, 1.0]])
        batch = fld.evaluate(pts)
        singles = np.array([fld.evaluate(p) for p in pts])
        assert np.array_equal(batch, singles)

    def test_pipeline_fields_of_bundled_cases(self):
        # closed forms from the moment expansion of the extracted coefficients
        case1 = da.BUNDLED_CASES["corollary1"]
        lin1 = da.extract_linearized(
            da.parse_torque(case1.f1star_text), da.parse_torque(case1.f2star_text)
        )
        fld1 = da.averaged_field(case1.spec, lin1)
        case2 = da.BUNDLED_CASES["corollary2"]
        lin2 = da.extract_linearized(
            da.parse_torque(case2.f1star_text), da.parse_torque(case2.f2star_text)
        )
        fld2 = da.averaged_field(case2.spec, lin2)
        rng = np.random.default_rng(14)
        for _ in range(8):
            x, y = rng.uniform(-1.5, 1.5, 2)
            got = fld1.evaluate([x, y])
            q = 3 * x**2 + y**2
            assert np.allclose(got, [y * q**2 / 48.0, x * q**2 / 16.0], atol=1e-11)
            z, w = rng.uniform(-1.5, 1.5, 2)
            got = fld2.evaluate([z, w])
            expect = [
                w * (4 + 4 * z - 4 * z**2 - w**2) / 16.0,
                (8 * z + 4 * z**2 - 8 * z**3 - w**2 - 2 * z * w**2) / 8.0,
            ]
            assert np.allclose(got, expect, atol=1e-11)

    def test_homogeneity_in_plane_point(self):
        # degree-d homogeneous f1 in v1 makes the field homogeneous of d+1
        for degree, f1 in ((1, lambda t, v1, v2: v1), (2, lambda t, v1, v2: v1**2)):
            fld = da.averaged_field(T1_SPEC, const_lin(f1=f1))
            base = fld.evaluate([0.43, -0.71])
            for lam in (2.0, 3.0):
                scaled = fld.evaluate([lam * 0.43, lam * -0.71])
                assert np.allclose(scaled, lam ** (degree + 1) * base, rtol=1e-10)

    def test_node_doubling_has_settled_by_512(self):
        case2 = da.BUNDLED_CASES["corollary2"]
        lin2 = da.extract_linearized(
            da.parse_torque(case2.f1star_text), da.parse_torque(case2.f2star_text)
        )
        a = (0.8, -0.6)
        coarse = brute_force_field(case2.spec, lin2, a, n=512)
        fine = brute_force_field(case2.spec, lin2, a, n=1024)
        assert np.abs(coarse - fine).max() < 1e-12

    def test_rejects_wrong_shape(self):
        fld = da.averaged_field(T1_SPEC, const_lin(f1=ones))
        with pytest.raises(ValueError):
            fld.evaluate([1.0, 2.0, 3.0])


class TestMalkinRoute:
    def test_zero_perturbation(self):
        g1 = lambda t, state: np.zeros((4,) + np.shape(t))
        for alpha in ([0.5, 0.5], [2.0, -1.0]):
            out = da.malkin_average(g1, T1_SPEC, alpha)
            assert np.allclose(out, 0.0, atol=1e-15)

    def test_matches_specialized_route_for_bundled_case1(self):
        case = da.BUNDLED_CASES["corollary1"]
        lin = da.extract_linearized(
            da.parse_torque(case.f1star_text), da.parse_torque(case.f2star_text)
        )
        fld = da.averaged_field(case.spec, lin)
        g1 = da.linearized_perturbation(lin)
        alpha = [0.5, 0.3]
        assert np.allclose(
            da.malkin_average(g1, case.spec, alpha), fld.evaluate(alpha), atol=1e-10
        )

    def test_linearity_in_perturbation(self):
        lin = const_lin(f1=lambda t, v1, v2: np.sin(SQRT3 * t) * v1)
        g1 = da.linearized_perturbation(lin)
        scaled = lambda t, state: 2.5 * np.asarray(g1(t, state))
        rng = np.random.default_rng(15)
        for _ in range(4):
            a = rng.uniform(-2, 2, 2)
            assert np.allclose(
                da.malkin_average(scaled, T1_SPEC, a),
                2.5 * da.malkin_average(g1, T1_SPEC, a),
                atol=1e-12,
            )

    @pytest.mark.parametrize(
        "spec,lin",
        [
            (T1_SPEC, const_lin(f1=lambda t, v1, v2: v1**2)),
            (T1_SPEC, const_lin(f1=lambda t, v1, v2: np.sin(SQRT3 * t) * v1 + v1**2)),
            (T2_SPEC, const_lin(f4=lambda t, v1, v2: 1.0 - np.sin(2 * t) * v2 - v2**2)),
        ],
    )
    def test_route_equivalence_on_annulus(self, spec, lin):
        fld = da.averaged_field(spec, lin)
        g1 = da.linearized_perturbation(lin)
        rng = np.random.default_rng(16)
        for _ in range(25):
            r = rng.uniform(0.1, 5.0)
            ang = rng.uniform(0, 2 * math.pi)
            alpha = [r * math.cos(ang), r * math.sin(ang)]
            assert np.allclose(
                da.malkin_average(g1, spec, alpha), fld.evaluate(alpha), atol=1e-9
            )
