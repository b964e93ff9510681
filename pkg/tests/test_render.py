"""Compositing, transmittance, soft removal, flow gather, disocclusion."""

import numpy as np
import pytest
from conftest import make_camera, over_composite_oracle, random_mpi

from mpilab.errors import DegenerateHomographyError, ValidationError
from mpilab.geometry import DisparitySampling, camera_at_offset
from mpilab.mpi import Mpi
from mpilab.render import (
    FlowVolume,
    VisibleVolume,
    composite,
    cumulative_visible_renders,
    disocclusion_mask,
    flow_gather,
    soft_remove_hidden,
    transmittance_reference,
    transmittance_target,
)
from mpilab.scenes import SceneSpec, analytic_disocclusion_band, build_scene


def constant_plane_mpi(alphas, colors, width=6, height=6):
    """MPI whose planes are spatially constant; index 0 is farthest."""
    cam = make_camera(width, height)
    count = len(alphas)
    color = np.zeros((height, width, count, 3))
    alpha = np.zeros((height, width, count))
    for i, (a, c) in enumerate(zip(alphas, colors)):
        color[:, :, i, :] = c
        alpha[:, :, i] = a
    return Mpi(cam, DisparitySampling(0.0, 1.0, count), color, alpha)


class TestComposite:
    def test_single_opaque_plane(self):
        mpi = constant_plane_mpi([1.0, 1.0], [(0.3, 0.6, 0.9), (0.3, 0.6, 0.9)])
        image, acc = composite(mpi, mpi.reference)
        np.testing.assert_allclose(image, np.broadcast_to((0.3, 0.6, 0.9), image.shape), atol=1e-9)
        np.testing.assert_allclose(acc, 1.0, atol=1e-9)

    def test_over_arithmetic_two_planes(self):
        # Far plane opaque black, near plane half-transparent white.
        mpi = constant_plane_mpi([1.0, 0.5], [(0.0, 0.0, 0.0), (1.0, 1.0, 1.0)])
        image, acc = composite(mpi, mpi.reference)
        np.testing.assert_allclose(image, 0.5, atol=1e-9)
        np.testing.assert_allclose(acc, 1.0, atol=1e-9)

    def test_matches_scalar_oracle_at_reference(self, rng):
        for _ in range(10):
            mpi = random_mpi(rng, width=8, height=8, count=4)
            image, acc = composite(mpi, mpi.reference)
            want_img, want_acc = over_composite_oracle(mpi.color, mpi.alpha)
            assert np.abs(image - want_img).max() < 1e-6
            assert np.abs(acc - want_acc).max() < 1e-6

    def test_degenerate_target_raises(self, rng):
        mpi = random_mpi(rng, width=8, height=8, count=3)
        inside = camera_at_offset(mpi.reference, (0.0, 0.0), 2.0)
        with pytest.raises(DegenerateHomographyError):
            composite(mpi, inside)

    def test_iterative_matches_product_form(self, rng):
        # The back-to-front recurrence must equal the closed-form sum of
        # premultiplied colors weighted by survival products, both at the
        # reference view and through warps.
        from mpilab.geometry import plane_homography, warp_image

        mpi = random_mpi(rng, width=10, height=9, count=5)
        target = camera_at_offset(mpi.reference, (1.3, -0.8), 0.0)
        image, acc = composite(mpi, target)

        warped_pre = []
        warped_alpha = []
        for i, d in enumerate(mpi.disparities()):
            hom = plane_homography(mpi.reference, target, d)
            rgba = np.concatenate(
                [mpi.color[:, :, i, :] * mpi.alpha[:, :, i, None], mpi.alpha[:, :, i, None]],
                axis=2,
            )
            out = warp_image(rgba, hom, 10, 9)
            warped_pre.append(out[:, :, :3])
            warped_alpha.append(out[:, :, 3])
        survival = np.ones((9, 10))
        product_form = np.zeros((9, 10, 3))
        for i in reversed(range(5)):
            product_form += warped_pre[i] * survival[:, :, None]
            survival = survival * (1.0 - warped_alpha[i])
        assert np.abs(image - product_form).max() < 1e-6
        assert np.abs(acc - (1.0 - survival)).max() < 1e-6

    def test_linear_in_premultiplied_color(self, rng):
        # With alpha fixed, the composite is linear in color.
        cam = make_camera(8, 8)
        sampling = DisparitySampling(0.0, 1.0, 3)
        alpha = rng.random((8, 8, 3))
        c1 = rng.random((8, 8, 3, 3)) * 0.5
        c2 = rng.random((8, 8, 3, 3)) * 0.5
        target = camera_at_offset(cam, (1.0, 0.5), 0.0)
        img1, _ = composite(Mpi(cam, sampling, c1, alpha), target)
        img2, _ = composite(Mpi(cam, sampling, c2, alpha), target)
        both, _ = composite(Mpi(cam, sampling, c1 + c2, alpha), target)
        assert np.abs(both - (img1 + img2)).max() < 1e-6


class TestTransmittance:
    def test_hand_values_three_half_planes(self):
        mpi = constant_plane_mpi([0.5, 0.5, 0.5], [(1, 1, 1)] * 3)
        t = transmittance_reference(mpi)
        # Closest plane first when read nearest-to-farthest: 0.5, 0.25, 0.125.
        np.testing.assert_allclose(t[:, :, 2], 0.5)
        np.testing.assert_allclose(t[:, :, 1], 0.25)
        np.testing.assert_allclose(t[:, :, 0], 0.125)
        np.testing.assert_allclose(t.sum(axis=2), 1 - 0.5**3)

    def test_opaque_front_blocks_all(self):
        mpi = constant_plane_mpi([0.7, 0.3, 1.0], [(1, 1, 1)] * 3)
        t = transmittance_reference(mpi)
        np.testing.assert_allclose(t[:, :, 2], 1.0)
        np.testing.assert_allclose(t[:, :, :2], 0.0)

    def test_all_transparent(self):
        mpi = constant_plane_mpi([0.0, 0.0], [(1, 1, 1)] * 2)
        assert np.all(transmittance_reference(mpi) == 0.0)

    def test_sum_identity_random(self, rng):
        for _ in range(20):
            mpi = random_mpi(rng, width=6, height=6, count=5)
            t = transmittance_reference(mpi)
            lhs = t.sum(axis=2)
            rhs = 1.0 - np.prod(1.0 - mpi.alpha, axis=2)
            assert np.abs(lhs - rhs).max() < 1e-6

    def test_target_equals_reference_at_reference(self, rng):
        mpi = random_mpi(rng, width=8, height=8, count=4)
        t_ref = transmittance_reference(mpi)
        t_tgt = transmittance_target(mpi, mpi.reference)
        assert np.abs(t_ref - t_tgt).max() < 1e-6

    def test_single_plane_is_warped_alpha(self, rng):
        cam = make_camera(8, 8)
        # Two planes but only the far one carries alpha, so the product term
        # is empty for it.
        color = np.zeros((8, 8, 2, 3))
        alpha = np.zeros((8, 8, 2))
        alpha[:, :, 0] = rng.random((8, 8))
        mpi = Mpi(cam, DisparitySampling(0.0, 1.0, 2), color, alpha)
        target = camera_at_offset(cam, (1.0, 0.0), 0.0)
        t = transmittance_target(mpi, target)
        from mpilab.geometry import plane_homography, warp_image

        hom = plane_homography(cam, target, 0.0)
        warped = warp_image(alpha[:, :, 0], hom, 8, 8)
        np.testing.assert_allclose(t[:, :, 0], warped, atol=1e-9)
        np.testing.assert_allclose(t[:, :, 1], 0.0)

    def test_background_transmittance_rises_in_band(self):
        # Two-layer scene viewed from the side: the background plane's
        # target-view transmittance equals its alpha (1) exactly inside the
        # geometrically disoccluded strip.
        scene = build_scene(SceneSpec(kind="two-layer", width=64, height=64, num_planes=8, texture_seed=5))
        u = 10.0
        target = camera_at_offset(scene.reference, (u, 0.0), 0.0)
        t = transmittance_target(scene.mpi, target)
        bg_index = int(np.argmax(scene.mpi.alpha.sum(axis=(0, 1)) > 0))
        x_lo, x_hi, y0, y1 = analytic_disocclusion_band(scene.geometry, u)
        xs = np.arange(64)
        inner = (xs >= np.ceil(x_lo) + 1) & (xs <= np.floor(x_hi) - 2)
        row = (y0 + y1) // 2
        assert inner.any()
        np.testing.assert_allclose(t[row, inner, bg_index], 1.0, atol=1e-6)
        # Well outside the band (behind the occluder) it stays 0.
        covered = (xs < x_lo - 3) & (xs >= scene.geometry["occluder"][0] - int(u))
        center_cols = xs[(xs > scene.geometry["occluder"][0] + 2) & (xs < x_lo - 3)]
        if center_cols.size:
            assert t[row, center_cols, bg_index].max() < 1e-6


class TestSoftRemoval:
    def test_opaque_front_zeroes_hidden(self):
        mpi = constant_plane_mpi([0.4, 1.0], [(0.2, 0.2, 0.2), (0.9, 0.9, 0.9)])
        vis = soft_remove_hidden(mpi)
        np.testing.assert_allclose(vis.alpha_vis[:, :, 0], 0.0)
        np.testing.assert_allclose(vis.c_vis[:, :, 0, :], 0.0)
        np.testing.assert_allclose(vis.alpha_vis[:, :, 1], 1.0)

    def test_all_transparent(self):
        mpi = constant_plane_mpi([0.0, 0.0], [(1, 1, 1)] * 2)
        vis = soft_remove_hidden(mpi)
        assert np.all(vis.c_vis == 0.0) and np.all(vis.alpha_vis == 0.0)

    def test_contribution_sum_is_reference_composite(self, rng):
        for _ in range(10):
            mpi = random_mpi(rng, width=7, height=5, count=6)
            vis = soft_remove_hidden(mpi)
            image, _ = composite(mpi, mpi.reference)
            assert np.abs(vis.c_vis.sum(axis=2) - image).max() < 1e-6


class TestCumulativeRenders:
    def test_single_plane(self, rng):
        cam = make_camera(4, 4)
        c = rng.random((4, 4, 2, 3)) * np.array([1.0, 0.0])[None, None, :, None]
        a = np.zeros((4, 4, 2))
        a[:, :, 0] = 0.5
        vis = VisibleVolume(c * 0.5, a * 0.0 + a, cam, DisparitySampling(0.0, 1.0, 2))
        r = cumulative_visible_renders(vis)
        np.testing.assert_allclose(r[:, :, 0], vis.c_vis[:, :, 0])

    def test_zero_input(self):
        cam = make_camera(4, 4)
        vis = VisibleVolume(
            np.zeros((4, 4, 3, 3)), np.zeros((4, 4, 3)), cam, DisparitySampling(0.0, 1.0, 3)
        )
        assert np.all(cumulative_visible_renders(vis) == 0.0)

    def test_prefix_sum_identity_and_monotonicity(self, rng):
        mpi = random_mpi(rng, width=6, height=6, count=5)
        vis = soft_remove_hidden(mpi)
        r = cumulative_visible_renders(vis)
        diffs = np.diff(r, axis=2)
        np.testing.assert_allclose(diffs, vis.c_vis[:, :, 1:, :], atol=1e-12)
        assert diffs.min() >= -1e-12
        image, _ = composite(mpi, mpi.reference)
        assert np.abs(r[:, :, -1, :] - image).max() < 1e-6


class TestFlowGather:
    def test_zero_flow_identity(self, rng):
        r = rng.random((5, 6, 3, 3))
        flows = FlowVolume.zero(5, 6, 3)
        out = flow_gather(r, flows)
        assert np.array_equal(out, r)

    def test_constant_shift_on_ramp(self):
        ramp = np.tile(np.arange(8.0)[None, :, None, None] / 7.0, (4, 1, 1, 3))
        flows = FlowVolume(np.ones((4, 8, 1)), np.zeros((4, 8, 1)))
        out = flow_gather(ramp, flows)
        np.testing.assert_allclose(out[:, :7], ramp[:, 1:], atol=1e-12)
        np.testing.assert_allclose(out[:, 7], ramp[:, 7], atol=1e-12)

    def test_border_clamp(self, rng):
        r = rng.random((4, 4, 1, 3))
        flows = FlowVolume(np.full((4, 4, 1), 4.0), np.zeros((4, 4, 1)))
        out = flow_gather(r, flows)
        np.testing.assert_allclose(out[:, :, 0, :], r[:, 3:4, 0, :].repeat(4, axis=1))

    def test_flow_volume_validation(self):
        with pytest.raises(ValidationError):
            FlowVolume(np.full((4, 4, 1), np.inf), np.zeros((4, 4, 1)))
        with pytest.raises(ValidationError):
            FlowVolume(np.full((4, 4, 1), 100.0), np.full((4, 4, 1), 100.0))


class TestDisocclusionMask:
    def test_reference_view_empty_for_all_epsilon(self, rng):
        mpi = random_mpi(rng, width=8, height=8, count=4)
        for eps in (0.01, 0.075, 0.5, 1.0):
            mask = disocclusion_mask(mpi, mpi.reference, eps)
            assert mask.pixel_count == 0

    def test_epsilon_validation(self, rng):
        mpi = random_mpi(rng)
        with pytest.raises(ValidationError):
            disocclusion_mask(mpi, mpi.reference, 0.0)
        with pytest.raises(ValidationError):
            disocclusion_mask(mpi, mpi.reference, 1.5)

    def test_unattainable_threshold(self):
        mpi = constant_plane_mpi([0.3, 0.4], [(1, 1, 1)] * 2, width=8, height=8)
        target = camera_at_offset(mpi.reference, (2.0, 0.0), 0.0)
        mask = disocclusion_mask(mpi, target, 1.0)
        assert mask.pixel_count == 0

    def test_two_layer_band_geometry(self):
        scene = build_scene(
            SceneSpec(kind="two-layer", width=64, height=64, num_planes=8, texture_seed=2)
        )
        for u in (6.0, 10.0, -8.0):
            target = camera_at_offset(scene.reference, (u, 0.0), 0.0)
            mask = disocclusion_mask(scene.mpi, target, 0.075).mask
            x_lo, x_hi, y0, y1 = analytic_disocclusion_band(scene.geometry, u)
            expected = (y1 - y0) * (x_hi - x_lo)
            measured = int(mask.sum())
            tolerance = 0.05 * expected + 2.0 * (y1 - y0)
            assert abs(measured - expected) <= tolerance
            # All mask pixels lie inside the dilated analytic band.
            ys, xs = np.nonzero(mask)
            assert xs.min() >= np.floor(x_lo) - 2 and xs.max() <= np.ceil(x_hi) + 2
            assert ys.min() >= y0 - 2 and ys.max() <= y1 + 2


class TestVisibleVolumeInvariants:
    def test_rejects_transmittance_sum_above_one(self):
        cam = make_camera(4, 4)
        with pytest.raises(ValidationError):
            VisibleVolume(
                np.zeros((4, 4, 2, 3)),
                np.full((4, 4, 2), 0.8),
                cam,
                DisparitySampling(0.0, 1.0, 2),
            )
