import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscim.hardware import (BOARD_SPINS, DISCONNECT, CouplingSignError, QuantizerModel, code_range, code_to_resistance,
                            codes_to_csv, index_pair, levels, nearest_code, pack_codes, pair_index, quantize_problem,
                            resistance_to_coupling)
from oscim.problem import IsingProblem, gen_instance, maxcut_to_ising

DIGIPOT = QuantizerModel()
SERIES = QuantizerModel("r2r_series")
PARALLEL = QuantizerModel("r2r_parallel")


def antiferro(rng, n, lo, hi, density=1.0):
    """Random J <= 0 with magnitudes in [lo, hi]."""
    J = -np.triu(rng.uniform(lo, hi, (n, n)) * (rng.random((n, n)) < density), 1)
    return IsingProblem(J + J.T)


class TestResistanceModels:
    def test_digipot_end_points(self):
        assert code_to_resistance(DIGIPOT, 256) == 10075.0
        assert code_to_resistance(DIGIPOT, 0) == 75.0
        assert code_to_resistance(DIGIPOT, 128) == 5075.0

    def test_series_steps_are_even(self):
        d = np.diff([code_to_resistance(SERIES, k) for k in range(1, 16)])
        np.testing.assert_allclose(d, 10_000.0)

    def test_parallel_steps_are_uneven(self):
        r = [code_to_resistance(PARALLEL, k) for k in range(1, 16)]
        assert r[0] == 80_000.0 and r[-1] == pytest.approx(80_000.0 / 15)
        d = np.abs(np.diff(r))
        assert d.max() / d.min() > 10

    def test_disconnect(self):
        for m in (DIGIPOT, SERIES, PARALLEL):
            assert code_to_resistance(m, DISCONNECT) == math.inf
        assert code_to_resistance(PARALLEL, 0) == math.inf

    @pytest.mark.parametrize("m,code", [(DIGIPOT, 257), (DIGIPOT, -2), (SERIES, 0), (SERIES, 16), (PARALLEL, 16)])
    def test_out_of_range(self, m, code):
        with pytest.raises(ValueError):
            code_to_resistance(m, code)

    def test_digipot_strictly_increasing(self):
        r = np.array([code_to_resistance(DIGIPOT, c) for c in range(257)])
        assert np.all(np.diff(r) > 0)

    def test_series_strictly_increasing(self):
        assert np.all(np.diff([code_to_resistance(SERIES, c) for c in range(1, 16)]) > 0)

    def test_parallel_strictly_monotone(self):
        # more branches switched in means more conductance, so resistance falls with code
        assert np.all(np.diff([code_to_resistance(PARALLEL, c) for c in range(1, 16)]) < 0)

    def test_level_counts(self):
        assert len(levels(DIGIPOT)[0]) == 257
        assert len(levels(SERIES)[0]) == 15
        assert len(levels(PARALLEL)[0]) == 15
        for m in (DIGIPOT, SERIES, PARALLEL):
            lo, hi = code_range(m)
            assert DISCONNECT not in range(lo, hi + 1)

    def test_model_validation(self):
        with pytest.raises(ValueError):
            QuantizerModel("r2r")
        with pytest.raises(ValueError):
            QuantizerModel(R_wiper=0)
        assert QuantizerModel("r2r-series").variant == "r2r_series"


class TestCoupling:
    def test_examples(self):
        assert resistance_to_coupling(10_000, 1) == pytest.approx(1e-4)
        assert resistance_to_coupling(math.inf, 1) == 0.0
        assert resistance_to_coupling(10_000, 2) == pytest.approx(resistance_to_coupling(10_000, 1) / 2)

    @pytest.mark.parametrize("R,K", [(0, 1), (-5, 1), (100, 0), (100, -1)])
    def test_nonpositive(self, R, K):
        with pytest.raises(ValueError):
            resistance_to_coupling(R, K)

    def test_nearest_code_ties_low(self):
        # halfway between codes 0 and 1
        mid = 75.0 + 10_000.0 / 512
        assert nearest_code(DIGIPOT, mid) == 0
        assert nearest_code(DIGIPOT, mid + 1e-6) == 1
        assert nearest_code(DIGIPOT, 1e9) == 256
        assert nearest_code(DIGIPOT, 1.0) == 0


class TestQuantize:
    def test_zero_is_disconnect(self, star):
        codes, qp, report = quantize_problem(star, DIGIPOT, 1.0, j_scale=None)
        assert codes.code(0, 1) == DISCONNECT
        assert qp.J[0, 1] == 0.0
        assert len(codes.codes) == 6

    def test_star_exact(self, star):
        codes, qp, report = quantize_problem(star, DIGIPOT, 1.0, j_scale=1 / 10_075)
        assert report.max_rel_err == 0.0
        np.testing.assert_array_equal(qp.J, star.J)
        assert codes.code(0, 2) == 256
        assert qp.source == star.source

    def test_auto_scale_puts_weakest_on_largest_resistance(self, rng):
        p = antiferro(rng, 6, 1.0, 20.0)
        codes, _, report = quantize_problem(p, DIGIPOT, 2.0, j_scale=None)
        k = int(np.argmin(np.abs(report.J_target)))
        assert codes.codes[k] == 256
        assert report.rel_err[k] == pytest.approx(0.0, abs=1e-15)

    def test_half_step_bound_against_scan(self, rng):
        all_R = np.array([75.0 + 10_000.0 * c / 256 for c in range(257)])
        gap = 10_000.0 / 256
        for _ in range(10):
            K_c = float(rng.uniform(0.5, 2))
            p = antiferro(rng, 8, 1.0, 100.0, density=0.7)
            j_scale = 1 / (K_c * 10_075 * 1.0)
            codes, qp, report = quantize_problem(p, DIGIPOT, K_c, j_scale=j_scale)
            assert report.clamped == ()
            for k, (i, j) in enumerate(report.pairs):
                if p.J[i, j] == 0:
                    continue
                R_t = 1 / (K_c * j_scale * abs(p.J[i, j]))
                R_q = all_R[np.argmin(np.abs(all_R - R_t))]
                assert report.R_ohms[k] == R_q
                assert report.rel_err[k] == pytest.approx(abs(R_t - R_q) / R_q, rel=1e-9, abs=1e-15)
                assert report.rel_err[k] <= gap / (2 * R_q) * (1 + 1e-9)
            assert report.max_rel_err == report.rel_err.max()

    def test_idempotent(self, rng):
        for m in (DIGIPOT, SERIES, PARALLEL):
            for j_scale in (None, 2e-4):
                p = antiferro(rng, 8, 0.5, 3.0, density=0.6)
                codes, qp, _ = quantize_problem(p, m, 1.5, j_scale=j_scale)
                codes2, qp2, report2 = quantize_problem(qp, m, 1.5, j_scale=j_scale)
                assert codes2.codes == codes.codes
                np.testing.assert_allclose(qp2.J, qp.J, rtol=1e-12, atol=0)
                assert report2.max_rel_err < 1e-12

    def test_sign_error(self):
        p = IsingProblem([[0, 0.5, -1], [0.5, 0, 0], [-1, 0, 0]])
        with pytest.raises(CouplingSignError, match="J\\[0\\]\\[1\\]"):
            quantize_problem(p, DIGIPOT, 1.0)
        codes, qp, _ = quantize_problem(p, DIGIPOT, 1.0, signed=True, j_scale=None)
        assert qp.J[0, 1] > 0 and qp.J[0, 2] < 0

    def test_clamping_flagged(self):
        p = IsingProblem([[0, -1, -1000], [-1, 0, 0], [-1000, 0, 0]])
        codes, qp, report = quantize_problem(p, DIGIPOT, 1.0, j_scale=None)
        assert report.clamped == ((0, 2),)
        assert codes.code(0, 2) == 0

    def test_bad_inputs(self, star):
        with pytest.raises(ValueError):
            quantize_problem(star, DIGIPOT, 0.0)
        with pytest.raises(ValueError):
            quantize_problem(star, DIGIPOT, 1.0, j_scale=-1)

    def test_digipot_finer_than_series(self, rng):
        for _ in range(5):
            p = antiferro(rng, 8, 1.0, 5.0)
            d = quantize_problem(p, DIGIPOT, 1.0, j_scale=None).report.max_rel_err
            s = quantize_problem(p, SERIES, 1.0, j_scale=None).report.max_rel_err
            assert d <= s

    def test_quantized_problem_stays_a_graph(self):
        g = gen_instance("gnp", 8, seed=1)
        _, qp, _ = quantize_problem(maxcut_to_ising(g), DIGIPOT, 1.0, j_scale=None)
        assert qp.source is not None
        assert {(i, j) for i, j, _ in qp.source.edges} == {(i, j) for i, j, _ in g.edges}


class TestPacking:
    @pytest.mark.parametrize("pair,slot", [((0, 1), (0, 0)), ((6, 7), (6, 3)), ((0, 7), (1, 2))])
    def test_examples(self, pair, slot):
        assert divmod(pair_index(*pair, 8), 4) == slot

    def test_formula_matches_enumeration(self):
        for n in (2, 5, 8, 13):
            pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
            for idx, (i, j) in enumerate(pairs):
                assert pair_index(i, j, n) == idx
                assert pair_index(i, j, n) == sum(n - 1 - r for r in range(i)) + (j - i - 1)
                assert index_pair(idx, n) == (i, j)

    def test_board_bijection(self):
        n = BOARD_SPINS
        J = -np.ones((n, n)) + np.eye(n)
        codes, _, _ = quantize_problem(IsingProblem(J), DIGIPOT, 1.0, j_scale=None)
        layout = pack_codes(codes)
        assert layout.n_chips == 7 and len(layout.R) == 28
        slots = {layout.slot(i, j) for i in range(n) for j in range(i + 1, n)}
        assert slots == {(c, ch) for c in range(7) for ch in range(4)}
        for idx, (i, j) in enumerate(layout.slot_pairs):
            assert divmod(idx, 4) == layout.slot(i, j)
        assert layout.chip(6) == tuple(layout.R[24:28])

    def test_embedding_into_board(self, star):
        codes, _, _ = quantize_problem(star, DIGIPOT, 1.0, j_scale=None)
        layout = pack_codes(codes, 8)
        assert len(layout.R) == 28
        assert sum(c == DISCONNECT for c in layout.R) == 25
        assert layout.R[pair_index(1, 2, 8)] == 256
        with pytest.raises(IndexError):
            pack_codes(codes, 3)

    def test_general_n_chip_count(self):
        codes, _, _ = quantize_problem(IsingProblem(np.zeros((5, 5))), DIGIPOT, 1.0)
        layout = pack_codes(codes)
        assert layout.n_chips == 3 and len(layout.R) == 12
        assert layout.slot_pairs[10:] == (None, None)

    def test_index_errors(self):
        with pytest.raises(IndexError):
            pair_index(3, 3, 8)
        with pytest.raises(IndexError):
            pair_index(0, 8, 8)
        with pytest.raises(IndexError):
            index_pair(28, 8)

    def test_parallel_zero_serializes_as_disconnect(self):
        codes, _, _ = quantize_problem(IsingProblem([[0, -1], [-1, 0]]), PARALLEL, 1.0, j_scale=None)
        assert pack_codes(codes).R == (codes.codes[0], -1, -1, -1)


def test_csv_dump(star):
    codes, _, report = quantize_problem(star, DIGIPOT, 1.0, j_scale=None)
    lines = codes_to_csv(pack_codes(codes, 8), report).splitlines()
    assert lines[0] == "chip,channel,i,j,code,R_ohms,J_target,J_quant,rel_err"
    assert len(lines) == 29
    row = lines[1 + pair_index(0, 2, 8)].split(",")
    assert row[:5] == ["0", "1", "0", "2", "256"]
    assert float(row[5]) == 10075.0 and float(row[6]) == -1.0 and float(row[8]) == 0.0
    assert lines[1].split(",")[4] == "-1"


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0, 1e6), st.sampled_from(["digipot8", "r2r_series", "r2r_parallel"]))
def test_nearest_code_is_nearest(R, variant):
    m = QuantizerModel(variant)
    c = nearest_code(m, R)
    best = min(abs(code_to_resistance(m, k) - R) for k in range(*[code_range(m)[0], code_range(m)[1] + 1]))
    assert abs(code_to_resistance(m, c) - R) == best
