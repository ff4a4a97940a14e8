"""Market partition solvers: direct diagrams, brand feedback, wipe-out."""

import numpy as np
import pytest

from marketcells import (
    PriceVector,
    WindowTooSmall,
    aggregate_price,
    compute_wipeout_diagnostics,
    solve_areas_q0,
    solve_areas_q1_1d,
    solve_partition,
    wipeout_threshold,
)
from marketcells.errors import BoundaryCompany

from helpers import lattice_2d, line_scenario, random_line_scenario, triple_q1


class TestLineDirect:
    def test_symmetric_pair_splits_in_the_middle(self):
        scn = line_scenario([0.0, 2.0], [1.0, 1.0])
        part = solve_areas_q0(scn, PriceVector.from_scenario(scn))
        cell = part.cells[0]
        assert cell.hi == pytest.approx(1.0)
        assert part.areas[0] == pytest.approx(part.areas[1])

    def test_price_gap_boundary(self):
        # (price_right - price_left + x_r^2 - x_l^2) / (2 spacing) = 1.25
        scn = line_scenario([0.0, 2.0], [0.0, 1.0])
        part = solve_areas_q0(scn, PriceVector.from_scenario(scn))
        assert part.cells[0].hi == pytest.approx(1.25)
        assert part.cells[1].lo == pytest.approx(1.25)

    def test_consecutive_survivors_share_boundaries(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            scn = random_line_scenario(rng, q=0)
            part = solve_areas_q0(scn, PriceVector.from_scenario(scn))
            by_pos = sorted(
                part.survivors, key=lambda cid: scn.company(cid).position[0]
            )
            for a, b in zip(by_pos[:-1], by_pos[1:]):
                assert part.cells[a].hi == pytest.approx(part.cells[b].lo, abs=1e-12)

    def test_high_priced_company_eliminated_and_flagged_nowhere(self):
        scn = line_scenario([0.0, 1.0, 2.0], [1.0, 5.9, 1.0])
        part = solve_areas_q0(scn, PriceVector.from_scenario(scn))
        assert part.survivors == {0, 2}
        assert part.areas[1] == 0.0
        assert part.cells[1] is None
        # after elimination the remaining pair are each other's neighbors
        assert [e.company_id for e in part.neighbors[0]] == [2]

    def test_areas_cover_window(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            scn = random_line_scenario(rng, q=0)
            part = solve_areas_q0(scn, PriceVector.from_scenario(scn))
            total = sum(part.areas.values())
            assert total == pytest.approx(scn.window.measure, rel=1e-12)

    def test_window_too_small_when_focal_reaches_edge(self):
        # the frozen flanks are priced out of the entire line
        scn2 = line_scenario(
            [-1.0, 0.0, 1.0], [5.5, 0.1, 5.5], frozen=[True, False, True]
        )
        part = solve_areas_q0(scn2, PriceVector.from_scenario(scn2), check_window=False)
        assert part.survivors == {1}
        with pytest.raises(WindowTooSmall):
            solve_areas_q0(scn2, PriceVector.from_scenario(scn2))


class TestPlaneDirect:
    def test_unit_lattice_interior_cells(self):
        scn = lattice_2d(n=5)
        part = solve_areas_q0(scn, PriceVector.from_scenario(scn))
        mid = 12  # company at (2, 2)
        assert part.areas[mid] == pytest.approx(1.0, abs=1e-9)
        edges = {e.company_id: e for e in part.neighbors[mid] if e.border_length > 0}
        assert sorted(edges) == [7, 11, 13, 17]
        for e in edges.values():
            assert e.border_length == pytest.approx(1.0, abs=1e-7)
            assert e.distance == pytest.approx(1.0)
        # diagonal companies touch only at cell corners
        assert part.potential_competitors[mid] == {6, 8, 16, 18}

    def test_monotone_area_in_own_price(self):
        scn = lattice_2d(n=5)
        base = PriceVector.from_scenario(scn)
        mid = 12
        areas = []
        for price in np.linspace(0.2, 3.0, 12):
            part = solve_areas_q0(
                scn, base.with_price(scn, mid, float(price)), check_window=False
            )
            areas.append(part.areas[mid])
        diffs = np.diff(areas)
        assert np.all(diffs <= 1e-12)
        positive = [a for a in areas if a > 1e-9]
        assert np.all(np.diff(positive) < 0)

    def test_finite_difference_matches_border_sum(self):
        # dS/dP = -sum of border length over twice the distance
        scn = lattice_2d(n=5)
        base = PriceVector.from_scenario(scn)
        mid = 12
        part = solve_areas_q0(scn, base)
        gamma = part.gamma(mid)
        h = 1e-6
        up = solve_areas_q0(scn, base.with_price(scn, mid, 1.0 + h), check_window=False)
        dn = solve_areas_q0(scn, base.with_price(scn, mid, 1.0 - h), check_window=False)
        fd = (up.areas[mid] - dn.areas[mid]) / (2 * h)
        assert fd == pytest.approx(-gamma, rel=1e-6)

    def test_every_cell_is_convex(self):
        scn = lattice_2d(n=5)
        part = solve_areas_q0(scn, PriceVector.from_scenario(scn))
        for cid in part.survivors:
            assert part.cells[cid].is_convex()

    def test_neighbor_relation_symmetric(self):
        scn = lattice_2d(n=5)
        part = solve_areas_q0(scn, PriceVector.from_scenario(scn))
        for cid, edges in part.neighbors.items():
            for e in edges:
                back = {b.company_id: b for b in part.neighbors[e.company_id]}
                assert cid in back
                assert back[cid].border_length == pytest.approx(
                    e.border_length, abs=1e-9
                )


class TestBrandFeedbackLine:
    def test_beta_zero_matches_direct_solver(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            scn = random_line_scenario(rng, q=1)
            scn = scn.with_beta(0.0)
            pv = PriceVector.from_scenario(scn)
            part_q1, _ = solve_areas_q1_1d(scn, pv, check_window=False)
            part_q0 = solve_areas_q0(scn, pv, check_window=False)
            for cid in part_q0.areas:
                assert part_q1.areas[cid] == pytest.approx(
                    part_q0.areas[cid], abs=1e-12
                )

    def test_symmetric_triple_all_survive(self):
        part, diag = solve_areas_q1_1d(
            triple_q1(0.5), PriceVector.from_scenario(triple_q1(0.5))
        )
        assert part.survivors == {0, 1, 2}
        assert part.areas[1] == pytest.approx(1.0)
        assert diag.psi[1] > 0
        assert diag.thresholds[1] == pytest.approx(1.0)

    def test_asymmetric_prices_match_hand_solve(self):
        # dense 2x2 solve by hand: boundaries 0.1875 and 1.9375
        scn = triple_q1(0.4)
        pv = PriceVector((1.0, 0.8, 1.2))
        part, _ = solve_areas_q1_1d(scn, pv)
        assert part.areas[0] == pytest.approx(0.6875, abs=1e-12)
        assert part.areas[1] == pytest.approx(1.75, abs=1e-12)
        assert part.areas[2] == pytest.approx(0.5625, abs=1e-12)

    def test_strong_brand_weight_wipes_middle(self):
        scn = triple_q1(1.2)
        part, diag = solve_areas_q1_1d(scn, PriceVector.from_scenario(scn))
        assert part.survivors == {0, 2}
        assert part.areas[1] == 0.0
        assert diag.psi[1] <= 0.0
        assert diag.thresholds[1] == pytest.approx(1.0)

    def test_survival_flips_at_the_harmonic_threshold(self):
        for beta, survives in [(0.9, True), (1.1, False)]:
            scn = triple_q1(beta)
            part, _ = solve_areas_q1_1d(scn, PriceVector.from_scenario(scn))
            assert (1 in part.survivors) == survives

    def test_fixed_point_consistency(self):
        # re-evaluating aggregate prices with solved areas reproduces ownership
        rng = np.random.default_rng(17)
        for _ in range(10):
            scn = random_line_scenario(rng, q=1)
            pv = PriceVector.from_scenario(scn)
            part, _ = solve_areas_q1_1d(scn, pv, check_window=False)
            xs = np.linspace(scn.window.lo[0] + 1e-6, scn.window.hi[0] - 1e-6, 400)
            for x in xs:
                fields = {
                    c.id: aggregate_price(
                        scn, c.id, (x,), part.areas[c.id],
                        price=pv.price_of(scn, c.id),
                    )
                    for c in scn.companies
                }
                owner = min(fields, key=fields.get)
                cell = part.cells[owner]
                assert cell is not None
                assert cell.lo - 1e-7 <= x <= cell.hi + 1e-7

    def test_area_monotone_in_own_price(self):
        scn = triple_q1(0.4)
        base = PriceVector.from_scenario(scn)
        areas = []
        for price in np.linspace(0.0, 3.0, 16):
            part, _ = solve_areas_q1_1d(
                scn, base.with_price(scn, 1, float(price)), check_window=False
            )
            areas.append(part.areas[1])
        assert np.all(np.diff(areas) <= 1e-12)

    def test_dominant_middle_takes_window_when_cheap(self):
        # strong feedback plus a low price: the middle owns everything
        scn = triple_q1(0.9)
        pv = PriceVector((1.0, 0.0, 1.0))
        part, _ = solve_areas_q1_1d(scn, pv, check_window=False)
        assert part.survivors == {1}
        assert part.areas[1] == pytest.approx(3.0)


class TestWipeoutDiagnostics:
    def test_symmetric_triple_without_brand_weight(self):
        scn = triple_q1(0.0)
        pv = PriceVector.from_scenario(scn)
        part, _ = solve_areas_q1_1d(scn, pv)
        threshold, psi, entry = compute_wipeout_diagnostics(scn, pv, part, 1)
        assert entry == pytest.approx(1.0)
        assert psi == pytest.approx(1.0)
        assert threshold == pytest.approx(1.0)

    def test_overpriced_middle_cannot_survive(self):
        scn = triple_q1(0.0, prices=(1.0, 2.0, 1.0))
        pv = PriceVector.from_scenario(scn)
        part, _ = solve_areas_q1_1d(scn, pv)
        threshold, psi, entry = compute_wipeout_diagnostics(scn, pv, part, 1)
        # exact tie at the hidden boundary: margin zero, no market
        assert psi == pytest.approx(0.0, abs=1e-12)
        assert part.areas[1] == pytest.approx(0.0, abs=1e-9)
        scn2 = triple_q1(0.0, prices=(1.0, 2.5, 1.0))
        pv2 = PriceVector.from_scenario(scn2)
        part2, _ = solve_areas_q1_1d(scn2, pv2)
        _, psi2, _ = compute_wipeout_diagnostics(scn2, pv2, part2, 1)
        assert psi2 < 0
        assert part2.areas[1] == 0.0

    def test_hidden_reading_uses_reshared_areas(self):
        # hiding the middle hands each frozen flank half the window, so the
        # re-entry margin reflects those enlarged areas
        scn = triple_q1(1.2)
        pv = PriceVector.from_scenario(scn)
        part, _ = solve_areas_q1_1d(scn, pv)
        threshold, psi, entry = compute_wipeout_diagnostics(scn, pv, part, 1)
        assert entry == pytest.approx(1.0)
        assert psi == pytest.approx(1.0 - 1.2 * 1.5, abs=1e-12)  # = -0.8
        assert threshold == pytest.approx(1.0)

    def test_boundary_company_rejected(self):
        scn = triple_q1(0.5)
        pv = PriceVector.from_scenario(scn)
        part, _ = solve_areas_q1_1d(scn, pv)
        with pytest.raises(BoundaryCompany):
            compute_wipeout_diagnostics(scn, pv, part, 0)

    def test_threshold_arithmetic(self):
        assert wipeout_threshold(1.0, 1.0) == pytest.approx(1.0)
        assert wipeout_threshold(1.0, None) == pytest.approx(2.0)
        assert wipeout_threshold(None, None) == np.inf
        assert wipeout_threshold(2.0, 1.0) == pytest.approx(4.0 / 3.0)


class TestDegeneracies:
    def test_singular_brand_system(self):
        # at two thirds of the wipe-out threshold the boundary system of
        # the unit-spaced triple loses rank: a whole family of partitions
        # solves it, and the solver refuses to pick one
        from marketcells import SingularSystem

        scn = triple_q1(2.0 / 3.0)
        with pytest.raises(SingularSystem, match="threshold"):
            solve_areas_q1_1d(scn, PriceVector.from_scenario(scn))


class TestPotentialCompetitors:
    def test_exact_tie_on_line_flagged(self):
        # middle at price 2 ties the survivors exactly at x = 1
        scn = line_scenario([0.0, 1.0, 2.0], [1.0, 2.0, 1.0])
        part = solve_areas_q0(scn, PriceVector.from_scenario(scn))
        assert part.survivors == {0, 2}
        assert 1 in part.potential_competitors[0]
        assert 1 in part.potential_competitors[2]
        assert part.has_potential_competitor(0)

    def test_generic_prices_unflagged(self):
        scn = line_scenario([0.0, 1.0, 2.0], [1.0, 1.1, 1.0])
        part = solve_areas_q0(scn, PriceVector.from_scenario(scn))
        assert part.survivors == {0, 1, 2}
        assert not part.has_potential_competitor(0)
        assert not part.has_potential_competitor(1)


class TestInnerStep:
    def test_frozen_area_weights(self):
        # one brand-feedback step at explicitly supplied areas matches a
        # direct solve with hand-shifted weights
        scn = triple_q1(0.5)
        pv = PriceVector.from_scenario(scn)
        frozen_areas = {0: 1.0, 1: 2.0, 2: 0.5}
        part = solve_areas_q0(scn, pv, brand_areas=frozen_areas, check_window=False)
        shifted = line_scenario(
            [0.0, 1.0, 2.0],
            [1.0 - 0.5 * 1.0, 1.0 - 0.5 * 2.0, 1.0 - 0.5 * 0.5],
            beta=0.0,
            q=0,
            price_upper=5.0,
            margin=0.5,
        )
        ref = solve_areas_q0(shifted, PriceVector.from_scenario(shifted), check_window=False)
        for cid in part.areas:
            assert part.areas[cid] == pytest.approx(ref.areas[cid], abs=1e-12)
