import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperfit.fit import fit_community
from hyperfit.stats import chi_square_sf, lrt, restricted_df, summarize

from conftest import complete_graph, graph_from_dense, planted_adjacency, star_graph


def poisson_tail(x, df):
    """Upper chi-square tail for even df via the Poisson-sum identity."""
    k = df // 2
    lam = x / 2
    return math.exp(-lam) * sum(lam**i / math.factorial(i) for i in range(k))


class TestChiSquare:
    def test_zero(self):
        assert chi_square_sf(0, 3) == 1

    def test_df2_closed_form(self):
        assert chi_square_sf(20, 2) == pytest.approx(math.exp(-10), rel=1e-14)

    @pytest.mark.parametrize("x", [0.1, 1.0, 7.5, 33.0, 150.0, 900.0])
    @pytest.mark.parametrize("df", [2, 4, 10, 30])
    def test_poisson_identity(self, x, df):
        assert chi_square_sf(x, df) == pytest.approx(poisson_tail(x, df), rel=1e-9, abs=1e-10)

    @given(st.floats(0, 1e4), st.floats(0, 1e4), st.integers(1, 60))
    def test_monotone(self, a, b, df):
        lo, hi = sorted((a, b))
        assert chi_square_sf(lo, df) >= chi_square_sf(hi, df)

    @given(st.floats(0, 1e4))
    def test_df2_exact(self, x):
        assert chi_square_sf(x, 2) == pytest.approx(math.exp(-x / 2), rel=1e-12, abs=1e-300)

    def test_bad_df(self):
        with pytest.raises(ValueError):
            chi_square_sf(1.0, 0)


class TestLrt:
    def test_examples(self):
        res = lrt(-100, -110, 2)
        assert res.statistic == 20 and res.df == 2
        assert res.p_value == pytest.approx(4.54e-5, rel=1e-3)
        assert lrt(-5, -5, 5).p_value == 1
        res = lrt(-110, -100, 1)
        assert res.statistic == -20 and res.p_value == 1

    def test_df_accounting(self):
        assert restricted_df("block", 7) == 14
        assert restricted_df("hycom", 7) == 7
        with pytest.raises(ValueError):
            restricted_df("other")

    def test_per_community_nonnegative(self, rng):
        for _ in range(5):
            A = planted_adjacency(12, 3, 40, 0.8, 0.05, rng)
            fit = fit_community(graph_from_dense(A), np.arange(40))
            assert lrt(fit.log_likelihood, fit.ll_block, 2).statistic >= 0
            assert lrt(fit.log_likelihood, fit.ll_hycom, 1).statistic >= 0


class TestSummary:
    def test_block_fits(self):
        fits = [fit_community(complete_graph(n), np.arange(n), mode="block") for n in (5, 10, 20)]
        s = summarize(fits)
        assert s.gamma_frac[1] == pytest.approx(9 / 10)
        assert s.x == (1.0, 1.0, 1.0)

    def test_stars(self):
        fits = [fit_community(star_graph(n), np.arange(n)) for n in (5, 10, 20)]
        s = summarize(fits)
        assert s.gamma_frac == (0, 0, 0) and s.h_frac == (0, 0, 0) and s.x == (0, 0, 0)

    def test_matches_sorting(self, rng):
        fits = []
        for _ in range(9):
            n = int(rng.integers(20, 50))
            fits.append(fit_community(graph_from_dense(planted_adjacency(8, 2, n, 0.8, 0.05, rng)),
                                      np.arange(n)))
        s = summarize(fits)
        vals = sorted(float(f.params.gamma) / f.n_c for f in fits)
        # nine values: quartiles fall exactly on sorted positions 2, 4, 6
        assert s.gamma_frac == pytest.approx((vals[2], vals[4], vals[6]))
        assert s.count == 9
        for q in (s.gamma_frac, s.h_frac, s.x):
            assert q[0] <= q[1] <= q[2]
        assert -1 <= s.x[0] and s.x[2] <= 1

    def test_empty(self):
        with pytest.raises(ValueError):
            summarize([])
