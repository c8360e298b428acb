"""Tests for the inertia-pair matrix models and the isogeny bookkeeping."""

import dataclasses

import pytest

from semistable_lab.galois import (
    build_rep,
    component_transfer,
    dual_transfer_roundtrip,
    filtration,
    find_ell_maximal,
    group_ring_span,
    identities_pass,
    node_lattice,
    product_kernel,
    quotient_group_structure,
    sigma_trivial_mod_ell,
    stable_submodules,
    teichmuller_unit,
    toric_complement_check,
    verify_identities,
)
from semistable_lab.padic import Lattice, PadicContext, PadicMatrix


class TestTeichmuller:
    def test_lift_of_two_mod_25(self):
        assert teichmuller_unit(PadicContext(5, 2), 2) == 7

    def test_lift_of_two_mod_625(self):
        assert teichmuller_unit(PadicContext(5, 4), 2) == 182

    def test_lift_is_a_fourth_root_of_unity(self):
        ctx = PadicContext(5, 9)
        w = teichmuller_unit(ctx, 2)
        assert pow(w, 4, ctx.modulus) == 1
        assert w % 5 == 2

    def test_mod_three_lift_of_two_is_minus_one(self):
        ctx = PadicContext(3, 5)
        assert teichmuller_unit(ctx, 2) == ctx.modulus - 1

    def test_non_unit_seed_rejected(self):
        with pytest.raises(ValueError, match="unit"):
            teichmuller_unit(PadicContext(5, 3), 10)


class TestBuildRep:
    def test_ell_two_tau_block_is_the_swap(self):
        rep = build_rep(2, 1, 2, 4)
        assert rep.tau.rows == ((0, 1), (1, 0))
        assert rep.omega == rep.ctx.modulus - 1

    def test_sigma_block_structure(self):
        rep = build_rep(3, 2, 6, 4)
        m = rep.ctx.modulus
        assert rep.rank == 4
        assert rep.sigma.rows == (
            (1, 6, 0, 0), (0, 1, 0, 0), (0, 0, 1, 6), (0, 0, 0, 1))
        # off-block corners of tau vanish
        assert all(rep.tau.entry(i, j) == 0
                   for i in (0, 1) for j in (2, 3))
        assert rep.tau.entry(0, 1) == (-rep.omega) % m

    def test_tau_satisfies_its_quadratic(self):
        for ell in (2, 3, 5):
            rep = build_rep(ell, 1, ell, 5)
            ctx, w = rep.ctx, rep.omega
            quad = (rep.tau @ rep.tau - rep.tau.scale(1 + w)
                    + PadicMatrix.identity(ctx, 2).scale(w))
            assert not any(x for row in quad.rows for x in row)
            assert rep.tau.det() == w

    @pytest.mark.parametrize(
        "args, message",
        [
            ((7, 1, 7, 4), "ell must be"),
            ((2, 0, 2, 4), "d must be"),
            ((2, 1, 2, 2), "precision"),
            ((2, 1, 3, 4), "multiple of ell"),
            ((2, 1, 0, 4), "multiple of ell"),
            ((2, 1, 16, 4), "vanishes"),
        ],
    )
    def test_invalid_inputs(self, args, message):
        with pytest.raises(ValueError, match=message):
            build_rep(*args)


class TestIdentities:
    def test_full_parameter_grid_passes(self):
        for ell in (2, 3, 5):
            for s in (ell, 2 * ell):
                for precision in (4, 6):
                    for d in (1, 2):
                        rep = build_rep(ell, d, s, precision)
                        checks = verify_identities(rep)
                        assert len(checks) == 2
                        assert all(c.passed for c in checks), (ell, s, precision, d)

    def test_identity_names_by_residue(self):
        names2 = [c.name for c in verify_identities(build_rep(2, 1, 2, 4))]
        names5 = [c.name for c in verify_identities(build_rep(5, 1, 5, 4))]
        assert names2 == ["twisted-commutation", "conjugate-difference"]
        assert names5 == ["twisted-commutation-tau-squared",
                          "conjugate-difference"]

    def test_conjugate_difference_prefactor_is_minus_s_squared_omega(self):
        # for l = 5 the inverse of omega is -omega, so the right-hand side
        # can be written with prefactor -s^2 omega; check that form verbatim
        rep = build_rep(5, 1, 5, 4)
        m, w, s = rep.ctx.modulus, rep.omega, rep.s
        assert (w * w) % m == m - 1
        check = verify_identities(rep)[1]
        expected = PadicMatrix.from_rows(
            rep.ctx, [[1, 2 * (1 + w)], [0, -1]]).scale(-s * s * w)
        assert check.rhs.rows == expected.rows
        assert check.lhs.rows == expected.rows

    def test_unit_rescaled_s_still_passes(self):
        # s only matters through its residue class times units
        assert identities_pass(build_rep(3, 1, 15, 5))
        assert identities_pass(build_rep(5, 2, 35, 4))
        assert identities_pass(build_rep(2, 1, -2, 4))

    def test_lhs_and_rhs_are_recorded(self):
        check = verify_identities(build_rep(2, 1, 2, 4))[0]
        assert check.lhs.rows == check.rhs.rows == ((2, 0), (0, 2))


class TestGroupRingSpan:
    def test_depth_zero_is_scalar_span_of_identity(self):
        lat, contains = group_ring_span(build_rep(5, 1, 5, 4), 0)
        assert lat.basis == ((1, 0, 0, 1),)
        assert not contains

    @pytest.mark.parametrize(
        "ell, counts, flags",
        [
            (2, [2**4, 2**11, 2**14, 2**14], [False, False, True, True]),
            (3, [3**4, 3**11, 3**14, 3**14], [False, False, True, True]),
            (5, [5**4, 5**11, 5**14, 5**14], [False, False, True, True]),
        ],
    )
    def test_span_growth_and_matrix_ring_capture(self, ell, counts, flags):
        rep = build_rep(ell, 1, ell, 4)
        for depth, (count, flag) in enumerate(zip(counts, flags)):
            lat, contains = group_ring_span(rep, depth)
            assert lat.member_count() == count
            assert contains == flag

    def test_span_is_monotone_and_stabilizes_by_depth_four(self):
        rep = build_rep(3, 1, 3, 4)
        prev = None
        for depth in range(6):
            lat, _ = group_ring_span(rep, depth)
            if prev is not None:
                assert all(lat.contains(b) for b in prev.basis)
            prev = lat
        deep, _ = group_ring_span(rep, 4)
        deeper, _ = group_ring_span(rep, 5)
        assert deep.same_module(deeper)

    def test_d_two_rejected(self):
        with pytest.raises(ValueError, match="d = 1"):
            group_ring_span(build_rep(2, 2, 2, 4), 1)

    def test_negative_depth_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            group_ring_span(build_rep(2, 1, 2, 4), -1)


class TestQuotientGroupStructure:
    def test_ell_two_bound(self):
        q = quotient_group_structure(2)
        assert (q.order, q.abelian, q.label) == (4, True, "Z/2 x Z/2")
        assert q.tau_square_inverts_core is None

    def test_ell_three_bound(self):
        q = quotient_group_structure(3)
        assert (q.order, q.abelian, q.label) == (6, False, "S3")
        assert q.core_order == 3

    def test_ell_five_bound(self):
        q = quotient_group_structure(5)
        assert q.order == 100
        assert q.label == "(Z/5 x Z/5) : Z/4"
        assert (q.core_order, q.core_abelian) == (25, True)
        assert (q.core_exponent, q.core_rank) == (5, 2)
        assert q.tau_square_inverts_core is True

    def test_relators_follow_the_residue(self):
        assert quotient_group_structure(3).relators[0] == "s^3"
        assert "t^4" in quotient_group_structure(5).relators

    def test_other_residues_rejected(self):
        with pytest.raises(ValueError):
            quotient_group_structure(7)


class TestStableSubmodules:
    def test_ell_two_level_one_frozen(self):
        rep = build_rep(2, 1, 2, 4)
        bases = [lat.basis for lat in stable_submodules(rep, 1)]
        assert bases == [(), ((1, 1),), ((1, 0), (0, 1))]

    def test_ell_three_level_one_has_both_diagonal_lines(self):
        rep = build_rep(3, 1, 3, 4)
        bases = [lat.basis for lat in stable_submodules(rep, 1)]
        assert bases == [(), ((1, 1),), ((1, 2),), ((1, 0), (0, 1))]

    def test_ell_five_level_one_lines_solve_the_tau_quadratic(self):
        rep = build_rep(5, 1, 5, 4)
        subs = stable_submodules(rep, 1)
        lines = [lat.basis[0] for lat in subs if lat.declared_rank == 1]
        # c^2 + (1 + w^-1)c + w^-1 = 0 mod 5 has roots 2 and 4
        assert lines == [(1, 2), (1, 4)]

    def test_everything_returned_is_stable(self):
        for ell, d, n in ((2, 1, 2), (2, 2, 1), (3, 1, 1), (5, 1, 1)):
            rep = build_rep(ell, d, ell, 5)
            ctx = PadicContext(ell, n)
            sg = PadicMatrix.from_rows(ctx, rep.sigma.rows)
            tu = PadicMatrix.from_rows(ctx, rep.tau.rows)
            subs = stable_submodules(rep, n)
            assert subs[0].is_zero()
            assert subs[-1].same_module(Lattice.full(ctx, rep.rank))
            for lat in subs:
                for b in lat.basis:
                    assert lat.contains(sg.apply(b))
                    assert lat.contains(tu.apply(b))

    def test_size_guard(self):
        with pytest.raises(ValueError, match="l\\^n <= 9"):
            stable_submodules(build_rep(5, 1, 5, 4), 2)
        with pytest.raises(ValueError, match="at least 1"):
            stable_submodules(build_rep(2, 1, 2, 4), 0)


class TestComponentTransfer:
    def setup_method(self):
        self.rep = build_rep(2, 1, 2, 5)
        self.filt = filtration(self.rep, 1)
        self.ctx = PadicContext(2, 1)

    def test_diagonal_kernel_halves_the_order(self):
        diag = Lattice.from_generators(self.ctx, 2, [(1, 1)])
        assert component_transfer(diag, 2, self.filt) == 1

    def test_toric_kernel_multiplies_by_ell(self):
        assert component_transfer(self.filt.M2, 1, self.filt) == 2

    def test_zero_kernel_is_the_identity_isogeny(self):
        zero = Lattice.zero(self.ctx, 2)
        assert component_transfer(zero, 7, self.filt) == 7

    def test_full_kernel_is_multiplication_by_ell(self):
        assert component_transfer(Lattice.full(self.ctx, 2), 6, self.filt) == 6

    def test_non_integral_transfer_rejected(self):
        diag = Lattice.from_generators(self.ctx, 2, [(1, 1)])
        with pytest.raises(ValueError, match="not integral"):
            component_transfer(diag, 1, self.filt)

    def test_mismatched_modules_rejected(self):
        kernel = Lattice.from_generators(PadicContext(2, 2), 2, [(1, 1)])
        with pytest.raises(ValueError, match="different modules"):
            component_transfer(kernel, 2, self.filt)
        with pytest.raises(ValueError, match="positive"):
            component_transfer(self.filt.M2, 0, self.filt)


class TestMaximalSearch:
    def test_two_node_graph_frozen(self):
        rep = build_rep(2, 1, 2, 5)
        report = find_ell_maximal(rep, 2, 1)
        assert [(n.lattice.basis, n.ell_part, n.sigma_trivial)
                for n in report.nodes] == [
            (((1, 0), (0, 1)), 2, True),
            (((1, 1), (0, 2)), 1, False),
        ]
        assert report.maximal_part == 2
        assert report.maximal_count == 1
        assert report.sigma_trivial_exactly_on_maximal

    def test_deeper_levels_add_no_new_nodes(self):
        rep = build_rep(2, 1, 2, 6)
        one = find_ell_maximal(rep, 2, 1)
        three = find_ell_maximal(rep, 2, 3)
        assert [n.lattice.basis for n in one.nodes] == \
            [n.lattice.basis for n in three.nodes]
        # level-2 and level-3 kernels pile extra witnesses onto the same nodes
        assert sum(len(n.kernels) for n in three.nodes) > \
            sum(len(n.kernels) for n in one.nodes)
        assert three.maximal_part == 2 and three.maximal_count == 1

    def test_product_graph_is_multiplicatively_maximal(self):
        single = find_ell_maximal(build_rep(2, 1, 2, 5), 2, 1)
        product = find_ell_maximal(build_rep(2, 2, 2, 5), 4, 1)
        assert product.maximal_part == single.maximal_part ** 2
        assert product.sigma_trivial_exactly_on_maximal
        bases = {n.lattice.basis: n for n in product.nodes}
        standard = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))
        diagonal = ((1, 0, 1, 0), (0, 1, 0, 1), (0, 0, 2, 0), (0, 0, 0, 2))
        assert bases[standard].ell_part == 4
        assert bases[diagonal].ell_part == 4
        assert len(product.nodes) == 14

    def test_transfer_is_multiplicative_on_product_kernels(self):
        rep1 = build_rep(2, 1, 2, 5)
        rep2 = build_rep(2, 2, 2, 5)
        filt1, filt2 = filtration(rep1, 1), filtration(rep2, 1)
        subs = stable_submodules(rep1, 1)
        for k1 in subs:
            for k2 in subs:
                combined = component_transfer(product_kernel(k1, k2), 4, filt2)
                assert combined == (component_transfer(k1, 2, filt1)
                                    * component_transfer(k2, 2, filt1))

    def test_sigma_triviality_is_checked_in_the_node_basis(self):
        rep = build_rep(2, 1, 2, 5)
        ctx1 = PadicContext(2, 1)
        diag = Lattice.from_generators(ctx1, 2, [(1, 1)])
        quotient = node_lattice(rep, diag, 1)
        assert quotient.basis == ((1, 1), (0, 2))
        assert not sigma_trivial_mod_ell(rep, quotient)
        assert sigma_trivial_mod_ell(rep, Lattice.full(rep.ctx, 2))

    def test_input_guards(self):
        rep = build_rep(2, 1, 2, 4)
        with pytest.raises(ValueError, match="positive"):
            find_ell_maximal(rep, 0, 1)
        with pytest.raises(ValueError, match="at least 1"):
            find_ell_maximal(rep, 2, 0)
        with pytest.raises(ValueError, match="precision too small"):
            find_ell_maximal(rep, 2, 3)


class TestToricComplement:
    @pytest.mark.parametrize("ell, d", [(2, 1), (3, 1), (5, 1), (5, 2), (2, 2)])
    def test_tau_image_complements_the_toric_line(self, ell, d):
        assert toric_complement_check(build_rep(ell, d, ell, 4))

    def test_corrupted_tau_fails(self):
        rep = build_rep(2, 1, 2, 4)
        broken = dataclasses.replace(
            rep, tau=PadicMatrix.identity(rep.ctx, 2))
        assert not toric_complement_check(broken)


class TestDualRoundtrip:
    def test_every_stable_kernel_roundtrips(self):
        for ell in (2, 3, 5):
            rep = build_rep(ell, 1, ell, 6)
            for kernel in stable_submodules(rep, 1):
                mid, back = dual_transfer_roundtrip(rep, kernel, ell, 1)
                assert back == ell, (ell, kernel.basis, mid)

    def test_level_two_roundtrip(self):
        rep = build_rep(2, 1, 2, 6)
        for kernel in stable_submodules(rep, 2):
            _, back = dual_transfer_roundtrip(rep, kernel, 2, 2)
            assert back == 2

    def test_midpoint_matches_direct_transfer(self):
        rep = build_rep(2, 1, 2, 6)
        ctx1 = PadicContext(2, 1)
        diag = Lattice.from_generators(ctx1, 2, [(1, 1)])
        mid, back = dual_transfer_roundtrip(rep, diag, 2, 1)
        assert mid == component_transfer(diag, 2, filtration(rep, 1))
        assert back == 2

    def test_precision_guard(self):
        rep = build_rep(2, 1, 2, 5)
        kernel = Lattice.zero(PadicContext(2, 2), 2)
        with pytest.raises(ValueError, match="precision"):
            dual_transfer_roundtrip(rep, kernel, 2, 2)
