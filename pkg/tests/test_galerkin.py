"""Stochastic Galerkin assembly and downsizing."""

import numpy as np
import pytest
import scipy.sparse as sp

import sgmor as sg
from sgmor.galerkin import ParametricSystem, Selection, linear_moment_matrix


def scalar_affine():
    """E = 1, A = -(2 + p), B = C = 1 with p uniform on [-1, 1]."""
    return ParametricSystem(
        n=1,
        q=1,
        E0=np.eye(1),
        A0=np.array([[-2.0]]),
        B0=np.ones((1, 1)),
        C0=np.ones((1, 1)),
        A_terms=[np.array([[-1.0]])],
    )


def scalar_spec(d=1):
    return sg.BasisSpec.uniform([(-1.0, 1.0)], sg.build_index_set(1, d))


class TestAssemble:
    def test_parameter_independent_block_diagonal(self):
        psys = ParametricSystem(
            n=2,
            q=2,
            E0=np.eye(2),
            A0=np.array([[-1.0, 0.5], [0.0, -2.0]]),
            B0=np.array([[1.0], [0.0]]),
            C0=np.array([[1.0, 1.0]]),
        )
        spec = sg.BasisSpec.uniform([(-1, 1)] * 2, sg.build_index_set(2, 2))
        g = sg.assemble(psys, spec)
        A = sp.csr_matrix(g.system.A).toarray()
        expect = np.kron(np.eye(spec.m), psys.A0)
        assert np.abs(A - expect).max() < 1e-14
        B = sp.csr_matrix(g.system.B).toarray()
        assert np.abs(B[:2] - psys.B0).max() < 1e-14
        assert np.abs(B[2:]).max() == 0.0

    def test_scalar_affine_analytic_blocks(self):
        g = sg.assemble(scalar_affine(), scalar_spec())
        A = sp.csr_matrix(g.system.A).toarray()
        c = 1.0 / np.sqrt(3.0)
        assert np.abs(A - np.array([[-2.0, -c], [-c, -2.0]])).max() < 1e-14
        assert np.abs(sp.csr_matrix(g.system.E).toarray() - np.eye(2)).max() < 1e-14
        assert np.abs(sp.csr_matrix(g.system.C).toarray() - np.eye(2)).max() < 1e-14

    def test_block_symmetry(self, desk_psys, desk_spec):
        g = sg.assemble(desk_psys, desk_spec)
        E = sp.csr_matrix(g.system.E)
        # E(p) affine in p3 only: the coupled matrix inherits the symmetry
        # of the moment matrices E[Phi_i Phi_j p3]
        n = g.block_dim
        m = g.m
        for i in range(m):
            for j in range(i):
                Bij = E[i * n : (i + 1) * n, j * n : (j + 1) * n].toarray()
                Bji = E[j * n : (j + 1) * n, i * n : (i + 1) * n].toarray()
                assert np.abs(Bij - Bji).max() < 1e-12

    def test_mean_field_degree_zero(self, desk_psys):
        spec0 = sg.BasisSpec.uniform([(-1.0, 1.0)] * 3, sg.build_index_set(3, 0))
        g = sg.assemble(desk_psys, spec0)
        assert g.m == 1 and g.dimension == 4
        # uniform on symmetric intervals: the mean system is the p=0 system
        E, A, B, C = desk_psys.evaluate(np.zeros(3))
        assert np.abs(sp.csr_matrix(g.system.A).toarray() - A).max() < 1e-14
        assert np.abs(sp.csr_matrix(g.system.E).toarray() - E).max() < 1e-14

    def test_brute_force_quadrature_oracle(self):
        psys = scalar_affine()
        spec = scalar_spec(d=2)
        g = sg.assemble(psys, spec)
        quad = sg.build_quadrature(spec, mode="tensor", level=8)
        phi = sg.eval_basis_matrix(spec, quad.nodes)
        m, n = spec.m, psys.n
        Ahat = np.zeros((m * n, m * n))
        for node, w, row in zip(quad.nodes, quad.weights, phi):
            _, A, _, _ = psys.evaluate(node)
            Ahat += w * np.kron(np.outer(row, row), A)
        assert np.abs(sp.csr_matrix(g.system.A).toarray() - Ahat).max() < 1e-12

    def test_generic_evaluator_path_matches_affine(self, desk_psys, desk_spec):
        generic = ParametricSystem(n=4, q=3, evaluator=desk_psys.evaluate)
        quad = sg.build_quadrature(desk_spec, mode="tensor", level=3)
        g_gen = sg.assemble(generic, desk_spec, quad=quad)
        g_aff = sg.assemble(desk_psys, desk_spec)
        for name in ("E", "A", "B", "C"):
            Mg = sp.csr_matrix(getattr(g_gen.system, name)).toarray()
            Ma = sp.csr_matrix(getattr(g_aff.system, name)).toarray()
            assert np.abs(Mg - Ma).max() < 1e-12

    def test_q_mismatch_rejected(self, desk_psys):
        spec = sg.BasisSpec.uniform([(-1, 1)] * 2, sg.build_index_set(2, 1))
        with pytest.raises(ValueError, match="q"):
            sg.assemble(desk_psys, spec)

    def test_dimension_limit(self, desk_psys, desk_spec):
        from sgmor.basis import SizingError

        with pytest.raises(SizingError):
            sg.assemble(desk_psys, desk_spec, dimension_limit=10)

    def test_affine_reconstruction_matches_evaluator(self, desk_psys):
        rng = np.random.default_rng(11)
        for _ in range(5):
            p = rng.uniform(-1, 1, 3)
            E, A, B, C = desk_psys.evaluate(p)
            manual_A = desk_psys.A0 + sum(
                p[l] * t for l, t in enumerate(desk_psys.A_terms) if t is not None
            )
            assert np.abs(A - manual_A).max() < 1e-12


class TestLinearMomentMatrix:
    def test_scalar_tridiagonal(self):
        spec = scalar_spec(d=3)
        G = linear_moment_matrix(spec, 0).toarray()
        quad = sg.build_quadrature(spec, mode="tensor", level=5)
        ref = sg.expectation_tensors(spec, quad, weight=lambda p: p[:, 0], weight_degree=1)
        assert np.abs(G - ref).max() < 1e-13

    def test_shifted_interval_diagonal(self):
        spec = sg.BasisSpec.uniform([(0.9, 1.1)], sg.build_index_set(1, 2))
        G = linear_moment_matrix(spec, 0).toarray()
        assert np.allclose(np.diag(G), 1.0)  # midpoint of [0.9, 1.1]
        assert abs(G[0, 1] - 0.1 / np.sqrt(3.0)) < 1e-14


class TestDownsize:
    def test_full_selection_transfer_identity(self, desk_galerkin):
        sel = Selection(kept=tuple(range(desk_galerkin.m)), m=desk_galerkin.m)
        small = sg.downsize(desk_galerkin, sel)
        for s in (0.0, 1.0j, 0.3 + 2.0j):
            ha = sg.transfer_eval(desk_galerkin.system, s)
            hb = sg.transfer_eval(small.system, s)
            assert np.abs(ha - hb).max() < 1e-12

    def test_keep_constant_block_only(self):
        g = sg.assemble(scalar_affine(), scalar_spec())
        small = sg.downsize(g, Selection(kept=(0,), m=2))
        assert small.dimension == 1
        assert np.abs(sp.csr_matrix(small.system.A).toarray() - [[-2.0]]).max() < 1e-14
        C = sp.csr_matrix(small.system.C).toarray()
        assert C.shape[0] == 2 and np.abs(C[1]).max() == 0.0

    def test_dropped_outputs_identically_zero(self, desk_galerkin):
        sel = Selection(kept=(0, 1, 2), m=desk_galerkin.m)
        small = sg.downsize(desk_galerkin, sel)
        H = sg.transfer_eval(small.system, 1.0j)
        assert np.abs(H[list(sel.dropped)]).max() == 0.0

    def test_output_count_preserved(self, desk_galerkin):
        small = sg.downsize(desk_galerkin, Selection(kept=(0, 4), m=desk_galerkin.m))
        assert small.m == desk_galerkin.m
        assert small.dimension == 2 * desk_galerkin.block_dim

    def test_idempotence(self, desk_galerkin):
        sel = Selection(kept=(0, 1, 5), m=desk_galerkin.m)
        once = sg.downsize(desk_galerkin, sel)
        twice = sg.downsize(once, sel)
        assert twice.dimension == once.dimension
        assert twice.basis_positions == once.basis_positions
        assert (sp.csr_matrix(twice.system.A) != sp.csr_matrix(once.system.A)).nnz == 0

    def test_selection_forces_constant_index(self):
        sel = Selection(kept=(3, 5), m=8)
        assert 0 in sel.kept

    def test_empty_selection_rejected(self):
        with pytest.raises(ValueError):
            Selection(kept=(), m=4)
