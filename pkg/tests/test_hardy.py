"""Frequency grids and Hardy norm estimation."""

import numpy as np
import pytest

import sgmor as sg
from sgmor.descriptor import DescriptorSystem


def first_order():
    return DescriptorSystem(np.eye(1), -np.eye(1), np.ones((1, 1)), np.ones((1, 1)))


class TestFrequencyGrid:
    def test_default_shape(self):
        grid = sg.FrequencyGrid.default()
        assert grid.omegas[0] == 0.0
        assert abs(grid.omegas[1] - 1e-2) < 1e-16
        assert abs(grid.omegas[-1] - 1e10) < 1.0
        assert len(grid) == 12 * 60 + 2

    def test_monotone_required(self):
        with pytest.raises(ValueError):
            sg.FrequencyGrid(np.array([1.0, 1.0, 2.0]))
        with pytest.raises(ValueError):
            sg.FrequencyGrid(np.array([-1.0, 1.0]))

    def test_refine(self):
        grid = sg.FrequencyGrid.logspaced(-1, 1, 10)
        fine = grid.refine()
        assert fine.points_per_decade == 20
        assert fine.omegas[0] == 0.0


class TestSampleTransfer:
    def test_scalar_values(self):
        grid = sg.FrequencyGrid(np.array([0.0, 1.0]))
        H = sg.sample_transfer(first_order(), grid)
        assert abs(H[0, 0] - 1.0) < 1e-14
        assert abs(abs(H[0, 1]) - 1.0 / np.sqrt(2.0)) < 1e-14

    def test_rows_are_outputs(self, desk_galerkin):
        grid = sg.FrequencyGrid(np.array([0.0, 1.0, 10.0]))
        H = sg.sample_transfer(desk_galerkin.system, grid)
        assert H.shape == (desk_galerkin.m, 3)
        for i in range(desk_galerkin.m):
            hi = sg.transfer_eval(desk_galerkin.system, 1.0j)[i, 0]
            assert abs(H[i, 1] - hi) < 1e-12


class TestHardyNorms:
    def test_analytic_first_order(self):
        rep = sg.transfer_norms(first_order())
        assert abs(rep.h2[0] - 1.0 / np.sqrt(2.0)) < 1e-4
        assert abs(rep.hinf[0] - 1.0) < 1e-6
        assert rep.argmax_omega[0] == 0.0
        assert rep.strictly_proper_ok[0]

    def test_zero_transfer(self):
        grid = sg.FrequencyGrid.logspaced(-1, 2, 10)
        rep = sg.hardy_norms(np.zeros((2, len(grid))), grid)
        assert np.all(rep.h2 == 0.0) and np.all(rep.hinf == 0.0)

    def test_scaling_homogeneity(self):
        grid = sg.FrequencyGrid.default()
        H = sg.sample_transfer(first_order(), grid)
        a = sg.hardy_norms(H, grid)
        b = sg.hardy_norms(-2.5 * H, grid)
        assert abs(b.h2[0] - 2.5 * a.h2[0]) < 1e-12
        assert abs(b.hinf[0] - 2.5 * a.hinf[0]) < 1e-12

    def test_hinf_at_least_every_sample(self, desk_norms):
        samples, _, rep = desk_norms
        assert np.all(rep.hinf[:, None] >= np.abs(samples) - 1e-15)

    def test_grid_refinement_monotone_hinf(self):
        # resonant system so the discrete maximum depends on the grid
        A = np.array([[0.0, 1.0], [-1.0, -0.05]])
        sys = DescriptorSystem(np.eye(2), A, np.array([[0.0], [1.0]]), np.array([[1.0, 0.0]]))
        grid = sg.FrequencyGrid.logspaced(-2, 2, 5)
        coarse = sg.hardy_norms(sg.sample_transfer(sys, grid), grid)
        fine_grid = grid.refine(4)
        fine = sg.hardy_norms(sg.sample_transfer(sys, fine_grid), fine_grid)
        assert fine.hinf[0] >= coarse.hinf[0]

    def test_h2_convergence_beyond_100ppd(self):
        vals = []
        for ppd in (200, 400):
            grid = sg.FrequencyGrid.logspaced(-3, 4, ppd)
            vals.append(sg.hardy_norms(sg.sample_transfer(first_order(), grid), grid).h2[0])
        assert abs(vals[1] - vals[0]) < 1e-5

    def test_refine_hinf_parabolic(self):
        A = np.array([[0.0, 1.0], [-1.0, -0.05]])
        sys = DescriptorSystem(np.eye(2), A, np.array([[0.0], [1.0]]), np.array([[1.0, 0.0]]))
        grid = sg.FrequencyGrid.logspaced(-2, 2, 8)
        H = sg.sample_transfer(sys, grid)
        plain = sg.hardy_norms(H, grid)
        sharp = sg.hardy_norms(H, grid, refine_hinf=True)
        assert sharp.hinf[0] >= plain.hinf[0]

    def test_improper_flagged(self):
        # constant transfer function: no decay at the top decade
        grid = sg.FrequencyGrid.logspaced(-1, 3, 10)
        rep = sg.hardy_norms(np.ones((1, len(grid))), grid)
        assert not rep.strictly_proper_ok[0]

    def test_csv_json_export(self, desk_norms, tmp_path):
        _, _, rep = desk_norms
        rep.to_csv(tmp_path / "n.csv")
        rep.to_json(tmp_path / "n.json")
        lines = (tmp_path / "n.csv").read_text().strip().splitlines()
        assert len(lines) == rep.n_out + 1
        assert lines[0].startswith("output,")


class TestDifferenceNorms:
    def test_identical_systems(self, desk_galerkin):
        grid = sg.FrequencyGrid.logspaced(-1, 2, 10)
        rep = sg.difference_norms(desk_galerkin.system, desk_galerkin.system, grid)
        assert np.all(rep.h2 == 0.0) and np.all(rep.hinf == 0.0)

    def test_downsized_difference_structure(self, desk_galerkin, desk_norms):
        from sgmor.galerkin import Selection

        samples, grid, rep = desk_norms
        sel = Selection(kept=(0, 1, 2, 3), m=desk_galerkin.m)
        small = sg.downsize(desk_galerkin, sel)
        diff = sg.difference_norms(
            desk_galerkin.system, small.system, grid, samples_a=samples
        )
        for i in sel.dropped:
            assert abs(diff.h2[i] - rep.h2[i]) < 1e-12
            assert abs(diff.hinf[i] - rep.hinf[i]) < 1e-12

    def test_full_projection_reduction_exact(self, desk_galerkin):
        red = sg.arnoldi_reduce(desk_galerkin, 1.0, desk_galerkin.dimension)
        grid = sg.FrequencyGrid.logspaced(-2, 3, 10)
        diff = sg.difference_norms(desk_galerkin.system, red.system, grid)
        assert np.all(diff.h2 < 1e-8) and np.all(diff.hinf < 1e-8)

    def test_output_mismatch_rejected(self, desk_galerkin):
        with pytest.raises(ValueError, match="output count"):
            sg.difference_norms(desk_galerkin.system, first_order())

    def test_triangle_inequality(self, desk_galerkin):
        grid = sg.FrequencyGrid.logspaced(-2, 4, 15)
        full = desk_galerkin.system
        red1 = sg.arnoldi_reduce(desk_galerkin, 1.0, 6).system
        red2 = sg.arnoldi_reduce(desk_galerkin, 1.0, 10).system
        ab = sg.difference_norms(full, red1, grid)
        bc = sg.difference_norms(red1, red2, grid)
        ac = sg.difference_norms(full, red2, grid)
        for kind in ("h2", "hinf"):
            a = getattr(ac, kind)
            b = getattr(ab, kind) + getattr(bc, kind)
            assert np.all(a <= b + 1e-10)
