import numpy as np
import pytest

from traceshift import paths, ssf, validate
from traceshift.errors import SupportExceedsProbes
from traceshift.ensembles import build_instance, random_laurent
from traceshift.paths import MultiplicativePath
from traceshift.symbols import LaurentPolynomial

from conftest import contraction, laurent, selfadjoint, unitary


def mult_path(seed, dim, norm=1.5, kind="unitary"):
    base = unitary(seed, dim) if kind == "unitary" else contraction(seed, dim)
    return MultiplicativePath(base=base, generator=selfadjoint(seed + 500, dim, norm))


class TestExtraction:
    def test_zero_generator_gives_zero_data(self):
        u0 = unitary(1, 3)
        a = validate(np.zeros((3, 3)), "selfadjoint", 1e-12)
        data = ssf.extract_mult_unitary(u0, a, 2, 6)
        assert all(abs(c) == 0.0 for c in data.hat_eta_n.values())
        assert all(abs(t) == 0.0 for t in data.probe_traces.values())

    def test_constant_probe_trace_vanishes(self):
        data = ssf.extract_mult(mult_path(2, 3), 2, 6)
        assert abs(data.probe_traces[0]) <= 1e-12

    def test_gauge_zeroes_low_degrees(self):
        data = ssf.extract_mult(mult_path(3, 3), 3, 7)
        for q in range(0, 3):
            assert q not in data.hat_eta_n

    def test_scalar_mult_roundtrip(self):
        u0 = validate([[1.0]], "unitary", 1e-12)
        a = validate([[0.7]], "selfadjoint", 1e-12)
        path = MultiplicativePath(base=u0, generator=a)
        data = ssf.extract_mult(path, 2, 12)
        f = laurent(4, 12)
        lhs = paths.remainder_mult(path, f, 2).trace
        assert ssf.predict_trace(data, f) == pytest.approx(lhs, rel=1e-9)

    def test_scalar_lin_second_order_probe(self):
        u0v, u1v = np.exp(0.4j), np.exp(1.3j)
        u0 = validate([[u0v]], "unitary", 1e-12)
        u1 = validate([[u1v]], "unitary", 1e-12)
        data = ssf.extract_lin(u0, u1, 2, 5)
        expected = (u1v - u0v) ** 2 / (2j * np.pi * 2)
        assert data.hat_eta_n[-1] == pytest.approx(expected)

    def test_lin_equal_endpoints(self):
        u0 = unitary(5, 3)
        data = ssf.extract_lin(u0, u0, 2, 5)
        assert max(abs(c) for c in data.hat_eta_n.values()) <= 1e-13

    def test_lin_low_probes_vanish(self):
        u0 = unitary(6, 4)
        u1 = mult_path(6, 4).point(1.0)
        data = ssf.extract_lin(u0, u1, 3, 6)
        for m in (1, 2):
            assert abs(data.probe_traces[m]) <= 1e-12

    @pytest.mark.parametrize("kind", ["unitary", "contraction"])
    def test_moment_symmetry(self, kind):
        data = ssf.extract_mult(mult_path(7, 4, kind=kind), 2, 6)
        for m in range(1, 7):
            gap = abs(data.probe_traces[-m] - np.conj(data.probe_traces[m]))
            assert gap <= 1e-10

    def test_eta1_support_confined(self):
        n = 4
        data = ssf.extract_mult(mult_path(8, 4), n, 8)
        low = data.eta_lower.get(1, {})
        assert set(low) <= {-m for m in range(1, n)}
        assert len(data.eta1_coeffs) == n - 1


class TestPredictTrace:
    def test_single_coefficient_formula(self):
        # hat(eta_2)(-1) = c pairs with f = z^2 as 4 pi i c
        c = 0.3 - 0.2j
        data = ssf.SpectralShiftData(
            n=2, kind="mult", gauge="eta1",
            hat_eta_n={-1: c}, eta_lower={}, probe_range=4, probe_traces={},
        )
        val = ssf.predict_trace(data, LaurentPolynomial({2: 1.0}))
        assert val == pytest.approx(2 * 2j * np.pi * c)

    def test_constant_function(self):
        data = ssf.extract_mult(mult_path(9, 3), 2, 5)
        assert ssf.predict_trace(data, LaurentPolynomial({0: 4.0})) == 0.0

    def test_additive(self):
        data = ssf.extract_mult(mult_path(10, 3), 2, 6)
        f, g = laurent(11, 5), laurent(12, 5)
        lhs = ssf.predict_trace(data, f + g)
        rhs = ssf.predict_trace(data, f) + ssf.predict_trace(data, g)
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_support_check(self):
        data = ssf.extract_mult(mult_path(13, 3), 2, 5)
        with pytest.raises(SupportExceedsProbes):
            ssf.predict_trace(data, LaurentPolynomial({6: 1.0}))

    @pytest.mark.parametrize("gauge", ["eta1", "diagonal"])
    def test_gauge_reproduces_probes(self, gauge):
        path = mult_path(14, 4)
        n, m_range = 3, 7
        data = ssf.extract_mult(path, n, m_range, gauge=gauge)
        for m in range(-m_range, m_range + 1):
            pred = ssf.predict_trace(data, LaurentPolynomial({m: 1.0}))
            assert pred == pytest.approx(data.probe_traces[m], abs=1e-12)

    def test_gauge_invariance_of_predictions(self):
        path = mult_path(15, 4)
        d1 = ssf.extract_mult(path, 3, 7, gauge="eta1")
        d2 = ssf.extract_mult(path, 3, 7, gauge="diagonal")
        for seed in range(5):
            f = laurent(seed + 900, 7)
            assert ssf.predict_trace(d1, f) == pytest.approx(
                ssf.predict_trace(d2, f), rel=1e-12, abs=1e-12
            )


class TestRoundTrips:
    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("n", [2, 3])
    def test_mult_unitary(self, seed, n):
        path = mult_path(seed + 20, 4, norm=2.0)
        data = ssf.extract_mult(path, n, 6)
        for k in range(3):
            f = laurent(seed * 10 + k, 6)
            lhs = paths.remainder_mult(path, f, n).trace
            rhs = ssf.predict_trace(data, f)
            assert abs(lhs - rhs) / max(abs(lhs), 1e-10) <= 1e-7

    @pytest.mark.parametrize("seed", range(3))
    def test_mult_contraction(self, seed):
        path = mult_path(seed + 30, 3, kind="contraction")
        data = ssf.extract_mult(path, 2, 6)
        for k in range(3):
            f = laurent(seed * 11 + k, 6)
            lhs = paths.remainder_mult(path, f, 2).trace
            rhs = ssf.predict_trace(data, f)
            assert abs(lhs - rhs) / max(abs(lhs), 1e-10) <= 1e-6

    @pytest.mark.parametrize("seed", range(3))
    def test_lin_unitary(self, seed):
        u0 = unitary(seed + 40, 4)
        u1 = mult_path(seed + 40, 4).point(1.0)
        data = ssf.extract_lin(u0, u1, 3, 6)
        for k in range(3):
            f = laurent(seed * 13 + k, 6)
            lhs = paths.remainder_lin(u0, u1, f, 3, ).trace
            rhs = ssf.predict_trace(data, f)
            assert abs(lhs - rhs) / max(abs(lhs), 1e-10) <= 1e-7


class TestHelton:
    def test_series_single_term_by_hand(self):
        data = ssf.SpectralShiftData(
            n=2, kind="mult", gauge="eta1",
            hat_eta_n={}, eta_lower={1: {-1: 1.0 + 0j}}, probe_range=4, probe_traces={},
        )
        val = ssf.helton_series(data, LaurentPolynomial({1: 1.0}))
        assert val == pytest.approx(2j * np.pi)

    def test_series_constant_vanishes(self):
        data = ssf.extract_mult(mult_path(16, 3), 2, 5)
        assert ssf.helton_series(data, LaurentPolynomial({0: 1.0})) == 0.0

    @pytest.mark.parametrize("seed", range(4))
    def test_series_equals_prediction(self, seed):
        data = ssf.extract_mult(mult_path(seed + 50, 4), 2, 6)
        f = laurent(seed + 60, 6)
        assert abs(ssf.helton_series(data, f) - ssf.predict_trace(data, f)) <= 1e-10

    def test_analytic_pair_integrand_vanishes(self):
        # both extensions holomorphic: every zbar-derivative factor is zero
        data = ssf.SpectralShiftData(
            n=2, kind="mult", gauge="eta1",
            hat_eta_n={2: 1.0 + 0j}, eta_lower={}, probe_range=4, probe_traces={},
        )
        val = ssf.helton_quadrature(data, LaurentPolynomial({3: 1.0}), 0.9, 64)
        assert abs(val) <= 1e-12

    def test_calibration_case_two_percent(self):
        data = ssf.SpectralShiftData(
            n=2, kind="mult", gauge="eta1",
            hat_eta_n={}, eta_lower={1: {-1: 1.0 + 0j}}, probe_range=4, probe_traces={},
        )
        f = LaurentPolynomial({1: 1.0})
        series = ssf.helton_series(data, f)
        q = ssf.helton_quadrature(data, f, 0.99, 256)
        assert abs(q - series) / abs(series) <= 0.02

    @pytest.mark.parametrize("seed", range(3))
    def test_radius_error_decreases(self, seed):
        data = ssf.extract_mult(mult_path(seed + 70, 3), 2, 5)
        f = laurent(seed + 80, 5)
        series = ssf.helton_series(data, f)
        e99 = abs(ssf.helton_quadrature(data, f, 0.99, 128) - series)
        e999 = abs(ssf.helton_quadrature(data, f, 0.999, 128) - series)
        assert e999 < e99


class TestExportAndJson:
    def test_csv_shape_and_values(self, tmp_path):
        data = ssf.extract_mult(mult_path(17, 3), 2, 5)
        out = tmp_path / "eta.csv"
        ssf.export_eta_csv(data, out, grid=128)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "theta,re_eta_n,im_eta_n"
        assert len(lines) == 129
        eta = data.eta_n_polynomial()
        theta, re, im = (float(x) for x in lines[5].split(","))
        val = eta(np.exp(1j * theta))
        assert complex(re, im) == pytest.approx(val, rel=1e-9)

    def test_json_schema(self):
        data = ssf.extract_mult(mult_path(18, 3), 2, 5)
        obj = data.to_json()
        assert obj["n"] == 2
        assert obj["gauge"] == "eta1"
        assert set(obj) >= {"hat_eta_n", "eta1", "probes", "probe_range"}
        assert all(len(v) == 2 for v in obj["hat_eta_n"].values())


class TestVerifyEngine:
    def test_zero_perturbation_all_errors_vanish(self):
        inst = build_instance("unitary-mult", 3, 0)
        inst["a"] = validate(np.zeros((3, 3)), "selfadjoint", 1e-12)
        rng = np.random.default_rng(0)
        funcs = [random_laurent(rng, 4) for _ in range(3)]
        rep = ssf.verify("unitary-mult", inst, funcs, 2)
        assert rep.passed
        assert all(r["abs_err"] <= 1e-12 for r in rep.results)

    @pytest.mark.parametrize(
        "theorem",
        [
            "unitary-mult",
            "contraction-mult",
            "helton",
            "dissipative",
            "lin-unitary",
            "selfadjoint-resolvent",
        ],
    )
    def test_each_theorem_passes(self, theorem):
        inst = build_instance(theorem, 3, 123)
        rng = np.random.default_rng(5)
        funcs = [random_laurent(rng, 4) for _ in range(3)]
        rep = ssf.verify(theorem, inst, funcs, 2)
        assert rep.passed, rep.results
        assert {"eta_l1", "schatten_ratio", "sup_ratio"} <= set(rep.diagnostics)

    def test_report_json_schema(self):
        inst = build_instance("contraction-mult", 3, 9)
        rng = np.random.default_rng(2)
        funcs = [random_laurent(rng, 4) for _ in range(2)]
        rep = ssf.verify("contraction-mult", inst, funcs, 2)
        obj = rep.to_json()
        assert set(obj) == {"theorem", "instance", "config", "results", "diagnostics", "passed"}
        row = obj["results"][0]
        assert set(row) == {"f_descriptor", "lhs", "rhs", "abs_err", "rel_err", "pass"}
        assert "dilation_gap" in obj["diagnostics"]
