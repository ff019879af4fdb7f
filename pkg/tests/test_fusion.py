import numpy as np
import pytest

from sarcontext.embed.fusion import fit_fusion, fuse


def _dependent_views(rng, n=400, d=6):
    latent = rng.normal(size=(n, d))
    mix = rng.normal(size=(d, d))
    return latent, latent @ mix


def test_dependent_views_reach_unit_correlation():
    rng = np.random.default_rng(0)
    a, b = _dependent_views(rng)
    model = fit_fusion(a, b, out_dim=6, eps=1e-9)
    assert (model.correlations >= 1.0 - 1e-6).all()
    assert (model.correlations <= 1.0).all()


def test_independent_views_stay_weak():
    for seed in range(8):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(400, 6))
        b = rng.normal(size=(400, 6))
        model = fit_fusion(a, b, out_dim=6, eps=0.5)
        assert model.correlations.max() < 0.25


def test_fit_is_deterministic_including_signs():
    rng = np.random.default_rng(4)
    a, b = _dependent_views(rng)
    m1 = fit_fusion(a, b, out_dim=4, eps=1e-3)
    m2 = fit_fusion(a, b, out_dim=4, eps=1e-3)
    np.testing.assert_array_equal(m1.proj_a, m2.proj_a)
    np.testing.assert_array_equal(m1.proj_b, m2.proj_b)
    for j in range(4):
        col = m1.proj_a[:, j]
        assert col[np.argmax(np.abs(col))] >= 0


def test_fuse_single_and_batch_agree():
    rng = np.random.default_rng(1)
    a, b = _dependent_views(rng, n=50)
    model = fit_fusion(a, b, out_dim=5)
    batch = fuse(model, a[:3], b[:3])
    assert batch.shape == (3, 5)
    one = fuse(model, a[0], b[0])
    assert one.shape == (5,)
    np.testing.assert_allclose(batch[0], one)


def test_out_dim_beyond_rank_pads_with_zeros():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(60, 3))
    b = rng.normal(size=(60, 8))
    model = fit_fusion(a, b, out_dim=8)
    # cross-covariance rank is at most min(3, 8)
    assert not model.correlations[3:].any()
    fused = fuse(model, a, b)
    assert fused.shape == (60, 8)
    np.testing.assert_array_equal(fused[:, 3:], np.zeros((60, 5)))


def test_fused_coordinates_track_canonical_strength():
    """Strong shared signal in one coordinate, noise elsewhere: fusion should
    put much more mass on the shared direction than on the noise ones."""
    rng = np.random.default_rng(7)
    shared = rng.normal(size=(300, 1))
    a = np.hstack([shared, rng.normal(size=(300, 4))])
    b = np.hstack([shared, rng.normal(size=(300, 4))])
    model = fit_fusion(a, b, out_dim=5, eps=1.0)
    assert model.correlations[0] > 2 * model.correlations[1]
    fused = fuse(model, a, b)
    mass = np.abs(fused).mean(axis=0)
    assert mass[0] > mass[1:].max()


def test_bad_inputs_rejected():
    rng = np.random.default_rng(3)
    a, b = _dependent_views(rng, n=30)
    with pytest.raises(ValueError, match="2-D"):
        fit_fusion(a[0], b, out_dim=2)
    with pytest.raises(ValueError, match="sample count"):
        fit_fusion(a[:10], b[:9], out_dim=2)
    with pytest.raises(ValueError, match="out_dim"):
        fit_fusion(a, b, out_dim=0)
    with pytest.raises(ValueError, match="at least 2"):
        fit_fusion(a[:1], b[:1], out_dim=2)
    with pytest.raises(ValueError, match="eps"):
        fit_fusion(a, b, out_dim=2, eps=0.0)
    model = fit_fusion(a, b, out_dim=2)
    with pytest.raises(ValueError, match="do not match"):
        fuse(model, a[:, :3], b)
    with pytest.raises(ValueError, match="do not match"):
        fuse(model, a[:5], b[:4])
