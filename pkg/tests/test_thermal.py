import numpy as np
import pytest

from tsvplan.errors import SingularNetworkError, ThermalRunawayError
from tsvplan.thermal import (ConductanceNetwork, GridSpec, block_cell_weights,
                             build_network, composite_lateral_resistance,
                             composite_resistance, composite_vertical_resistance,
                             couple_leakage, field_stats, grid_for, rasterize,
                             resistance, solve_design, solve_steady_state,
                             system_matrix)
from conftest import MM, UM, block, farm, make_design, make_tech

AMBIENT = 298.15


# ---------------------------------------------------------------- rasterize

class TestRasterize:
    def test_half_cell_farm(self):
        d = make_design(farms=(farm("f", 0.0, 0.0, 0.05, 0.1, start=0, end=1),))
        grid = grid_for(d.stack)
        occ = rasterize(d, grid)
        assert occ.farm_fraction[0, 0, 0] == pytest.approx(0.5)
        assert occ.silicon_fraction[0, 0, 0] == pytest.approx(0.5)
        assert occ.farm_fraction[0].sum() == pytest.approx(0.5)

    def test_block_power_split_equally(self):
        d = make_design(blocks=(block("b", 0, 0.0, 0.0, 0.2, 0.2, power=1.0),))
        grid = grid_for(d.stack)
        occ = rasterize(d, grid)
        quarter = occ.power[0, :2, :2]
        assert quarter == pytest.approx(np.full((2, 2), 0.25))
        assert occ.power.sum() == pytest.approx(1.0)

    def test_fraction_sum_matches_pixel_sampling_oracle(self):
        # farm at an arbitrary offset crossing a 2x2 cell neighborhood
        f = farm("f", 0.13, 0.07, 0.14, 0.11, start=0, end=1)
        d = make_design(farms=(f,))
        grid = grid_for(d.stack)
        occ = rasterize(d, grid)
        total = occ.farm_fraction[0].sum()
        assert total == pytest.approx(f.width * f.height / grid.cell_size ** 2,
                                      rel=1e-9)
        # pixel-sampling oracle at 1000x subresolution per cell axis
        sub = 1000
        step = grid.cell_size / sub
        xs = (np.arange(4 * sub) + 0.5) * step
        ys = (np.arange(4 * sub) + 0.5) * step
        inside = ((xs[None, :] > f.x) & (xs[None, :] < f.x + f.width)
                  & (ys[:, None] > f.y) & (ys[:, None] < f.y + f.height))
        for cy in range(2):
            for cx in range(2):
                patch = inside[cy * sub:(cy + 1) * sub, cx * sub:(cx + 1) * sub]
                assert occ.farm_fraction[0, cy, cx] == pytest.approx(
                    patch.mean(), abs=1e-3)

    def test_landing_layer_has_no_lateral_blockage(self):
        d = make_design(farms=(farm("f", 0.5, 0.5, 0.4, 0.4, start=0, end=1),))
        occ = rasterize(d, grid_for(d.stack))
        assert occ.lateral_fraction[0].sum() > 0
        assert occ.lateral_fraction[1].sum() == 0
        assert occ.farm_fraction[1].sum() > 0  # vertical metal still present


# --------------------------------------------------------------- resistance

class TestResistance:
    def test_zero_thickness(self):
        assert resistance(0.0, 149.0, 1e-9) == 0.0

    def test_silicon_slab(self):
        # 100 um span, silicon, 1e-9 m^2 section
        assert resistance(1e-4, 149.0, 1e-9) == pytest.approx(671.1409395973154)

    def test_doubling_area_halves_resistance(self):
        r1 = resistance(1e-4, 149.0, 1e-9)
        r2 = resistance(1e-4, 149.0, 2e-9)
        assert r2 == pytest.approx(r1 / 2)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            resistance(1e-4, 0.0, 1e-9)
        with pytest.raises(ValueError):
            resistance(1e-4, 149.0, 0.0)
        with pytest.raises(ValueError):
            resistance(-1e-4, 149.0, 1e-9)


class TestCompositeResistance:
    def test_pure_farm_cell(self):
        r = composite_lateral_resistance(1e-4, 1e-5, 1.0, 2.75, 0.0, 149.0)
        assert r == pytest.approx(36363.636363636364)

    def test_pure_silicon_cell_reduces_to_slab(self):
        r = composite_lateral_resistance(1e-4, 1e-5, 0.0, 2.75, 1.0, 149.0)
        assert r == pytest.approx(671.1409395973154)

    def test_mixed_lateral_cell(self):
        r = composite_lateral_resistance(1e-4, 1e-5, 0.4, 2.75, 0.6, 149.0)
        assert r == pytest.approx(92027.65914175311)

    def test_mixed_vertical_cell(self):
        # 10 um thick layer, 100 um cell, tungsten vias
        r = composite_vertical_resistance(1e-5, 1e-4, 0.4, 173.0, 0.6, 149.0)
        assert r == pytest.approx(25.636549378645047)

    def test_no_material_is_domain_error(self):
        with pytest.raises(ValueError):
            composite_resistance(1e-4, 1e-9, 0.0, 2.75, 0.0, 149.0)


# ------------------------------------------------------------ build_network

def _single_cell_network(g_ambient):
    grid = GridSpec(1, 1, 1e-4, 1)
    return ConductanceNetwork(
        grid,
        g_x=np.zeros((1, 1, 0)), g_y=np.zeros((1, 0, 1)),
        g_z=np.zeros((0, 1, 1)),
        g_ambient=np.full((1, 1), g_ambient))


def _stacked_pair_network(g_z, g_ambient):
    grid = GridSpec(1, 1, 1e-4, 2)
    return ConductanceNetwork(
        grid,
        g_x=np.zeros((2, 1, 0)), g_y=np.zeros((2, 0, 1)),
        g_z=np.full((1, 1, 1), g_z),
        g_ambient=np.full((1, 1), g_ambient))


class TestBuildNetwork:
    def test_identical_cells_reproduce_single_cell_resistance(self):
        d = make_design(num_layers=1)
        grid = grid_for(d.stack)
        occ = rasterize(d, grid)
        net = build_network(occ, grid, d.stack)
        r_cell = composite_lateral_resistance(1e-4, 10 * UM, 0.0, 1.0, 1.0, 149.0)
        assert net.g_x == pytest.approx(np.full_like(net.g_x, 1.0 / r_cell))

    def test_matrix_symmetric_for_random_occupancy(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            x, y = rng.integers(1, 4, size=2) * 0.1
            f = farm("f", float(x), float(y), 0.3, 0.3, start=0, end=1,
                     k_lat=float(rng.uniform(0.5, 5.0)))
            d = make_design(farms=(f,))
            grid = grid_for(d.stack, 2e-4)
            net = build_network(rasterize(d, grid), grid, d.stack)
            m = system_matrix(net)
            assert (m - m.T).nnz == 0

    def test_farm_cell_coupling_weaker_than_silicon(self):
        d = make_design(farms=(farm("f", 0.0, 0.0, 0.1, 0.1, start=0, end=1),))
        grid = grid_for(d.stack)
        net = build_network(rasterize(d, grid), grid, d.stack)
        silicon_pair = net.g_x[0, 5, 5]
        farm_pair = net.g_x[0, 0, 0]
        assert farm_pair < silicon_pair

    def test_ambient_share_is_uniform(self):
        d = make_design()
        grid = grid_for(d.stack)
        net = build_network(rasterize(d, grid), grid, d.stack)
        share = 1.0 / (d.stack.tech.package_resistance * grid.cells_per_layer)
        assert net.g_ambient == pytest.approx(np.full_like(net.g_ambient, share))


# ------------------------------------------------------------------- solve

class TestSolve:
    def test_single_cell_ohms_law(self):
        net = _single_cell_network(g_ambient=0.1)  # 10 K/W to ambient
        field = solve_steady_state(net, np.full((1, 1, 1), 1.0), AMBIENT)
        assert field.t[0, 0, 0] == pytest.approx(308.15, abs=1e-9)

    def test_two_cells_in_series(self):
        # 1 W injected in the far (top) cell, 5 K/W per hop
        net = _stacked_pair_network(g_z=0.2, g_ambient=0.2)
        power = np.zeros((2, 1, 1))
        power[1] = 1.0
        field = solve_steady_state(net, power, AMBIENT)
        assert field.t[1, 0, 0] == pytest.approx(308.15, abs=1e-9)
        assert field.t[0, 0, 0] == pytest.approx(303.15, abs=1e-9)

    def test_energy_conservation(self, two_layer_design):
        d = two_layer_design
        grid = grid_for(d.stack)
        occ = rasterize(d, grid)
        net = build_network(occ, grid, d.stack)
        field = solve_steady_state(net, occ.power, AMBIENT)
        heat_out = float((net.g_ambient * (field.t[0] - AMBIENT)).sum())
        assert heat_out == pytest.approx(occ.power.sum(), rel=1e-6)

    def test_matches_dense_oracle_on_small_grids(self):
        rng = np.random.default_rng(3)
        for trial in range(10):
            grid = GridSpec(6, 6, 1e-4, 2)
            net = ConductanceNetwork(
                grid,
                g_x=rng.uniform(1e-4, 1e-2, (2, 6, 5)),
                g_y=rng.uniform(1e-4, 1e-2, (2, 5, 6)),
                g_z=rng.uniform(1e-2, 1.0, (1, 6, 6)),
                g_ambient=rng.uniform(1e-4, 1e-3, (6, 6)))
            power = rng.uniform(0.0, 0.5, (2, 6, 6))
            field = solve_steady_state(net, power, AMBIENT)
            dense = system_matrix(net).toarray()
            rhs = power.ravel().copy()
            rhs[:36] += net.g_ambient.ravel() * AMBIENT
            exact = np.linalg.solve(dense, rhs).reshape(2, 6, 6)
            assert np.abs(field.t - exact).max() < 1e-8

    def test_zero_power_gives_exact_ambient(self):
        d = make_design()
        grid = grid_for(d.stack)
        occ = rasterize(d, grid)
        net = build_network(occ, grid, d.stack)
        field = solve_steady_state(net, np.zeros_like(occ.power), AMBIENT)
        assert np.all(field.t == AMBIENT)

    def test_maximum_principle(self, two_layer_design):
        field = solve_design(two_layer_design)
        assert field.t.min() >= AMBIENT - 1e-6

    def test_floating_network_raises(self):
        net = _single_cell_network(g_ambient=0.0)
        with pytest.raises(SingularNetworkError):
            solve_steady_state(net, np.ones((1, 1, 1)), AMBIENT)

    def test_warm_start_agrees_with_cold(self, two_layer_design):
        grid = grid_for(two_layer_design.stack)
        cold = solve_design(two_layer_design, grid)
        warm = solve_design(two_layer_design, grid, x0=cold.t + 3.0)
        assert np.abs(warm.t - cold.t).max() < 1e-6

    def test_grid_refinement_consistency(self):
        # smooth fixture: broad block, peak moves < 2% of the rise on refinement
        d = make_design(blocks=(block("b", 0, 0.6, 0.6, 0.8, 0.8, power=1.0),))
        coarse = solve_design(d, grid_for(d.stack, 2e-4))
        fine = solve_design(d, grid_for(d.stack, 1e-4))
        rise_c = coarse.peak - AMBIENT
        rise_f = fine.peak - AMBIENT
        assert abs(rise_f - rise_c) / rise_c < 0.02

    def test_blockage_monotone_in_farm_conductivity(self):
        from tsvplan.benchmarks import blockage_design
        peaks = []
        for k in (0.5, 1.0, 2.75, 5.0, 23.1, 149.0):
            d = blockage_design(k_farm=k, leakage_ref=0.0)
            peaks.append(solve_design(d).peak)
        assert all(a >= b - 1e-9 for a, b in zip(peaks, peaks[1:]))

    def test_insulated_ring_raises_peak_over_no_ring(self):
        import dataclasses
        from tsvplan.benchmarks import blockage_design
        ringed = blockage_design(k_farm=0.5, leakage_ref=0.0)
        bare = ringed.with_floorplan(
            dataclasses.replace(ringed.floorplan, farms=()))
        assert solve_design(ringed).peak > solve_design(bare).peak + 1.0


# ---------------------------------------------------------- leakage coupling

class TestCoupleLeakage:
    def _leaky_design(self, lam=0.02):
        tech = make_tech(leakage_coeff=lam)
        return make_design(
            blocks=(block("hot", 0, 0.7, 0.7, 0.6, 0.6, power=1.0, leakage=0.2),),
            tech=tech)

    def test_zero_lambda_converges_in_two_solves(self):
        d = self._leaky_design(lam=0.0)
        grid = grid_for(d.stack)
        result = couple_leakage(d, grid)
        assert result.iterations == 2
        base = solve_design(d, grid)
        assert np.abs(result.field.t - base.t).max() < 1e-9

    def test_positive_lambda_heats_every_cell(self):
        d = self._leaky_design(lam=0.05)
        grid = grid_for(d.stack)
        coupled = couple_leakage(d, grid).field
        base = solve_design(d, grid)
        assert np.all(coupled.t >= base.t - 1e-9)
        assert coupled.peak > base.peak

    def test_agrees_with_bisection_oracle_on_reduced_system(self):
        # single block covering the whole 2x2x1 grid: one unknown, its avg T
        lam, t_ref = 0.05, 298.15
        tech = make_tech(footprint_width=0.2 * MM, footprint_height=0.2 * MM,
                         leakage_coeff=lam, package_resistance=50.0)
        d = make_design(blocks=(block("b", 0, 0.0, 0.0, 0.2, 0.2,
                                      power=1.0, leakage=0.2),),
                        num_layers=1, tech=tech)
        grid = grid_for(d.stack)
        assert (grid.cells_x, grid.cells_y) == (2, 2)
        blk = d.floorplan.blocks[0]
        weights = block_cell_weights(blk, grid)

        occ = rasterize(d, grid)
        net = build_network(occ, grid, d.stack)
        unit = solve_steady_state(net, weights[None, :, :], AMBIENT)
        r_eff = float((unit.t[0] * weights).sum()) - AMBIENT  # K per W

        def residual(t_avg):
            power = 1.0 + 0.2 * (1.0 + lam * (t_avg - t_ref))
            return AMBIENT + r_eff * power - t_avg

        lo, hi = AMBIENT, AMBIENT + 500.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if residual(mid) > 0:
                lo = mid
            else:
                hi = mid
        oracle_t = 0.5 * (lo + hi)

        coupled = couple_leakage(d, grid).field
        block_avg = float((coupled.t[0] * weights).sum())
        assert block_avg == pytest.approx(oracle_t, abs=0.02)

    def test_thermal_runaway_detected(self):
        tech = make_tech(leakage_coeff=0.5, package_resistance=100.0)
        d = make_design(blocks=(block("hot", 0, 0.7, 0.7, 0.6, 0.6,
                                      power=1.0, leakage=1.0),),
                        tech=tech)
        with pytest.raises(ThermalRunawayError):
            couple_leakage(d, grid_for(d.stack))


# ------------------------------------------------------------- field stats

class TestFieldStats:
    def test_uniform_field(self):
        net = _single_cell_network(0.1)
        field = solve_steady_state(net, np.zeros((1, 1, 1)), 300.0)
        stats = field_stats(field)
        assert stats.peak == stats.average == 300.0

    def test_two_value_field(self):
        from tsvplan.thermal import TemperatureField
        field = TemperatureField(np.array([[[300.0, 310.0]]]), 0.0)
        stats = field_stats(field)
        assert stats.average == pytest.approx(305.0)
        assert stats.peak == pytest.approx(310.0)

    def test_hottest_block_tie_breaks_lexicographically(self):
        from tsvplan.thermal import TemperatureField
        d = make_design(blocks=(block("zeta", 0, 0.0, 0.0, 0.2, 0.2),
                                block("alpha", 0, 1.0, 1.0, 0.2, 0.2)),
                        num_layers=1)
        grid = grid_for(d.stack)
        uniform = TemperatureField(np.full((1, grid.cells_y, grid.cells_x), 320.0), 0.0)
        stats = field_stats(uniform, d, grid)
        assert stats.hottest_block == "alpha"

    def test_layer_out_of_range(self):
        from tsvplan.thermal import TemperatureField
        field = TemperatureField(np.full((1, 2, 2), 300.0), 0.0)
        with pytest.raises(ValueError):
            field_stats(field, layer=3)

    def test_hottest_block_identified(self, two_layer_design):
        d = two_layer_design
        grid = grid_for(d.stack)
        field = solve_design(d, grid)
        stats = field_stats(field, d, grid)
        assert stats.hottest_block == "alpha"  # carries 1 W vs beta's 0.5 W


def test_grid_must_tile_footprint():
    from tsvplan.errors import GridError
    d = make_design()
    with pytest.raises(GridError):
        grid_for(d.stack, 3e-4)  # 2 mm / 0.3 mm is not integral
