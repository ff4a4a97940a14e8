"""Profit curves, breakpoints, and best responses."""

import numpy as np
import pytest

from marketcells import (
    PriceVector,
    ValidationError,
    best_response,
    build_profile,
    find_breakpoints,
    profit_curve,
    profit_derivative,
    utility,
)
from marketcells.response import unimodality_defect

from helpers import (
    lattice_2d,
    line_scenario,
    random_line_scenario,
    random_plane_scenario,
    triple_q1,
)


def flank_scenario(price_upper=4.0):
    """Focal company at the origin, frozen flanks at unit distance."""
    return line_scenario(
        [-1.0, 0.0, 1.0], [1.0, 1.0, 1.0], price_upper=price_upper, margin=1.5
    )


class TestUtility:
    def test_unit_flanks(self):
        scn = flank_scenario()
        pv = PriceVector.from_scenario(scn)
        w, s = utility(scn, pv, 1, 1.0)
        assert (w, s) == (pytest.approx(1.0), pytest.approx(1.0))

    def test_zero_price_earns_nothing(self):
        scn = flank_scenario()
        w, s = utility(scn, PriceVector.from_scenario(scn), 1, 0.0)
        assert w == 0.0
        assert s == pytest.approx(2.0)  # area is still positive

    def test_above_choke_price(self):
        scn = flank_scenario()
        w, s = utility(scn, PriceVector.from_scenario(scn), 1, 3.5)
        assert w == 0.0
        assert s == 0.0

    def test_area_formula_against_hand_derivation(self):
        # S(P) = 2 - P between unit flanks at price 1
        scn = flank_scenario()
        pv = PriceVector.from_scenario(scn)
        for p in (0.3, 0.9, 1.4):
            _, s = utility(scn, pv, 1, p)
            assert s == pytest.approx(2.0 - p, abs=1e-12)


class TestBreakpoints:
    def test_interior_line_company_has_none_below_choke(self):
        scn = flank_scenario(price_upper=1.5)
        assert find_breakpoints(scn, PriceVector.from_scenario(scn), 1) == []

    def test_choke_price_is_a_breakpoint(self):
        scn = flank_scenario(price_upper=4.0)
        cuts = find_breakpoints(scn, PriceVector.from_scenario(scn), 1)
        assert len(cuts) == 1
        assert cuts[0] == pytest.approx(2.0, abs=1e-6)

    def test_wiped_out_company_has_none(self):
        scn = triple_q1(1.2, prices=(0.2, 1.0, 0.2))
        assert find_breakpoints(scn, PriceVector.from_scenario(scn), 1) == []

    def test_lattice_corner_engagement(self):
        # below the symmetric price the cell swallows its corners and the
        # diagonal companies become real neighbors
        scn = lattice_2d(n=5, boundary_price=1.0, interior_price=1.0)
        pv = PriceVector.from_scenario(scn)
        cuts = find_breakpoints(scn, pv, 12)
        assert any(abs(c - 1.0) < 1e-6 for c in cuts)
        profile = build_profile(scn, pv, 12)
        sig_of = {round(0.5 * (p.lo + p.hi), 3): p.signature for p in profile.pieces}
        below = [s for mid, s in sig_of.items() if 0.5 < mid < 0.99]
        above = [s for mid, s in sig_of.items() if 1.01 < mid < 1.5]
        if below and above:
            assert len(below[-1][1]) == 8
            assert len(above[0][1]) == 4

    def test_pieces_partition_the_range(self):
        scn = flank_scenario()
        profile = build_profile(scn, PriceVector.from_scenario(scn), 1)
        assert profile.pieces[0].lo == 0.0
        assert profile.pieces[-1].hi == scn.price_upper
        for a, b in zip(profile.pieces[:-1], profile.pieces[1:]):
            assert a.hi == b.lo
            assert a.signature != b.signature

    def test_sample_cache(self):
        scn = flank_scenario()
        profile = build_profile(scn, PriceVector.from_scenario(scn), 1, sample_count=9)
        assert len(profile.samples) == 9
        p, s, w, g = profile.samples[2]  # price 1.0 on the 9-point grid
        assert p == pytest.approx(1.0)
        assert s == pytest.approx(1.0)
        assert w == pytest.approx(1.0)
        assert g == pytest.approx(0.0, abs=1e-7)

    def test_profit_continuous_across_breakpoints(self):
        rng = np.random.default_rng(31)
        for maker in (
            lambda: random_line_scenario(rng, q=0),
            lambda: random_line_scenario(rng, q=1),
            random_plane_scenario if False else (lambda: random_plane_scenario(rng)),
        ):
            scn = maker()
            pv = PriceVector.from_scenario(scn)
            focal = [c.id for c in scn.companies if not c.frozen]
            cid = focal[0]
            _, profits = profit_curve(scn, pv, cid, samples=2_000)
            w_scale = max(profits.max(), 1e-9)
            delta = 1e-10 * scn.price_upper
            for cut in find_breakpoints(scn, pv, cid):
                if cut < 2 * delta or cut > scn.price_upper - 2 * delta:
                    continue
                w_lo, _ = utility(scn, pv, cid, cut - delta)
                w_hi, _ = utility(scn, pv, cid, cut + delta)
                assert abs(w_hi - w_lo) < 1e-7 * w_scale


class TestProfitCurve:
    @pytest.mark.parametrize("kind", ["line", "line_q1", "plane"])
    def test_fill_matches_exact_solves(self, kind):
        from helpers import random_scenario

        rng = np.random.default_rng(sum(map(ord, kind)))
        scn = random_scenario(rng, kind)
        pv = PriceVector.from_scenario(scn)
        cid = next(c.id for c in scn.companies if not c.frozen)
        grid, profits = profit_curve(scn, pv, cid, samples=3_000)
        check = np.random.default_rng(0).choice(len(grid), size=80, replace=False)
        for k in check:
            w, _ = utility(scn, pv, cid, float(grid[k]))
            assert profits[k] == pytest.approx(w, rel=1e-9, abs=1e-11)

    def test_unimodal_on_flanks(self):
        scn = flank_scenario()
        _, profits = profit_curve(scn, PriceVector.from_scenario(scn), 1, samples=5_000)
        assert unimodality_defect(profits) == 0.0


class TestBestResponse:
    def test_unit_flanks_vertex(self):
        scn = flank_scenario()
        pv = PriceVector.from_scenario(scn)
        for method in ("auto", "scan", "pieces"):
            br = best_response(scn, pv, 1, method=method)
            assert br.price == pytest.approx(1.0, abs=1e-8)
            assert br.profit == pytest.approx(1.0, abs=1e-9)
            assert not br.wiped_out

    def test_statically_dead_company_reports_wiped_out(self):
        # brand pull beyond the threshold with cheap flanks: no entry at
        # any price under the static ownership accounting
        scn = triple_q1(1.2, prices=(0.2, 1.0, 0.2))
        br = best_response(scn, PriceVector.from_scenario(scn), 1)
        assert br.wiped_out
        assert br.price == scn.price_upper
        assert br.profit == 0.0
        _, profits = profit_curve(scn, PriceVector.from_scenario(scn), 1, samples=2_000)
        assert np.all(profits == 0.0)

    def test_frozen_company_rejected(self):
        scn = flank_scenario()
        with pytest.raises(ValidationError, match="frozen"):
            best_response(scn, PriceVector.from_scenario(scn), 0)

    def test_closed_form_matches_numeric_on_random_lines(self):
        rng = np.random.default_rng(12)
        for _ in range(12):
            scn = random_line_scenario(rng, q=0)
            pv = PriceVector.from_scenario(scn)
            for c in scn.companies:
                if c.frozen:
                    continue
                auto = best_response(scn, pv, c.id, method="auto")
                scan = best_response(scn, pv, c.id, method="scan")
                assert auto.price == pytest.approx(scan.price, abs=1e-9)
                assert auto.profit == pytest.approx(scan.profit, abs=1e-9)

    def test_piece_enumeration_agrees_with_scan(self):
        rng = np.random.default_rng(21)
        scn = random_line_scenario(rng, q=1)
        pv = PriceVector.from_scenario(scn)
        cid = next(c.id for c in scn.companies if not c.frozen)
        pieces = best_response(scn, pv, cid, method="pieces")
        scan = best_response(scn, pv, cid, method="scan")
        assert pieces.profit == pytest.approx(scan.profit, rel=1e-8)

    @pytest.mark.parametrize("kind", ["line", "line_q1", "plane"])
    def test_never_beaten_by_dense_scan(self, kind):
        from helpers import random_scenario

        rng = np.random.default_rng(100 + sum(map(ord, kind)))
        scn = random_scenario(rng, kind)
        pv = PriceVector.from_scenario(scn)
        for c in scn.companies:
            if c.frozen:
                continue
            br = best_response(scn, pv, c.id)
            _, profits = profit_curve(scn, pv, c.id, samples=10_000)
            assert profits.max() - br.profit <= 1e-6 * max(br.profit, 1e-12)

    def test_profit_consistent_with_fresh_solve(self):
        scn = flank_scenario()
        pv = PriceVector.from_scenario(scn)
        br = best_response(scn, pv, 1)
        w, s = utility(scn, pv, 1, br.price)
        assert br.profit == pytest.approx(w, abs=1e-15)
        assert br.profit == pytest.approx(br.price * s, abs=1e-15)

    def test_ring_scenario_matches_scan_argmax(self):
        rng = np.random.default_rng(77)
        scn = random_plane_scenario(rng)
        pv = PriceVector.from_scenario(scn)
        cid = next(c.id for c in scn.companies if not c.frozen)
        br = best_response(scn, pv, cid)
        grid, profits = profit_curve(scn, pv, cid, samples=10_000)
        spacing = grid[1] - grid[0]
        assert abs(br.price - grid[int(np.argmax(profits))]) <= spacing
        assert profits.max() - br.profit <= 1e-6 * br.profit


class TestDerivative:
    def test_matches_parabola_slope(self):
        # W = P (2 - P) so dW/dP = 2 - 2P
        scn = flank_scenario()
        pv = PriceVector.from_scenario(scn)
        for p in (0.4, 1.0, 1.6):
            g = profit_derivative(scn, pv, 1, p)
            assert g == pytest.approx(2.0 - 2.0 * p, abs=1e-7)
