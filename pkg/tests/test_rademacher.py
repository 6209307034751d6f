import numpy as np
import pytest

from zigzag.linalg import LpTag, SupTag
from zigzag.rademacher import (
    DyadicTree,
    hitczenko_check,
    maximal_rad_estimate,
    maximal_rad_exact,
    rad_estimate,
    rad_exact,
    umd_check,
)
from zigzag.rng import substream

ABS = LpTag(2.0)  # absolute value in one dimension


def test_tree_shapes_and_cap():
    rng = substream(0, "tree")
    tree = DyadicTree.random_gaussian(4, 2, rng)
    assert [lvl.shape for lvl in tree.levels] == [(1, 2), (2, 2), (4, 2), (8, 2)]
    with pytest.raises(ValueError):
        DyadicTree.random_gaussian(15, 1, rng)


def test_path_gather_consistency():
    rng = substream(1, "tree")
    tree = DyadicTree.random_gaussian(5, 3, rng)
    signs, values = tree.enumerate_paths()
    assert signs.shape == (32, 5)
    # manual walk for a handful of paths
    for row in (0, 7, 31):
        idx = 0
        for t in range(5):
            assert np.allclose(values[row, t], tree.levels[t][idx])
            bit = (signs[row, t] + 1) // 2
            idx |= int(bit) << t


def test_constant_tree_is_non_anticipating():
    vecs = np.arange(6.0).reshape(3, 2)
    tree = DyadicTree.constant(3, vecs)
    _, values = tree.enumerate_paths()
    assert np.allclose(values, np.broadcast_to(vecs, (8, 3, 2)))


def test_prefix_sign_tree_pushes_away_from_zero():
    tree = DyadicTree.prefix_sign(6)
    signs, values = tree.enumerate_paths()
    vals = values.squeeze(-1)
    prefix = np.zeros(len(signs))
    for t in range(6):
        expected = np.where(prefix >= 0.0, 1.0, -1.0)
        assert np.allclose(vals[:, t], expected)
        prefix = prefix + signs[:, t] * vals[:, t]


def test_rad_single_vector_and_empty():
    z = np.array([[0.3, -0.4]])
    mean, se = rad_estimate(z, LpTag(2.0), 500, seed=0)
    assert mean == pytest.approx(0.5)
    assert se == pytest.approx(0.0)
    assert rad_estimate(np.zeros((0, 2)), LpTag(2.0), 500, 0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        rad_estimate(z, LpTag(2.0), 50, 0)


def test_rad_exact_two_scalars():
    zs = np.array([[1.0], [1.0]])
    # enumeration over 4 patterns: |2|, |0|, |0|, |2| -> mean 1
    assert rad_exact(zs, ABS) == pytest.approx(1.0)
    mean, se = rad_estimate(zs, ABS, 4000, seed=1)
    assert abs(mean - 1.0) <= 3.0 * se


def test_maximal_values():
    zs = np.array([[1.0], [-1.0]])
    # prefix maxima per pattern: 1, 2, 2, 1 -> mean 1.5
    assert maximal_rad_exact(zs, ABS) == pytest.approx(1.5)
    mean, se = maximal_rad_estimate(zs, ABS, 4000, seed=2)
    assert abs(mean - 1.5) <= 3.0 * se
    z = np.array([[0.3, -0.4]])
    assert maximal_rad_estimate(z, LpTag(2.0), 500, 0)[0] == pytest.approx(0.5)


def test_maximal_dominates_plain():
    rng = substream(3, "dom")
    for _ in range(10):
        zs = rng.normal(size=(8, 3))
        assert maximal_rad_exact(zs, LpTag(2.0)) >= rad_exact(zs, LpTag(2.0)) - 1e-12


def test_mc_matches_enumeration():
    rng = substream(4, "oracle")
    for trial in range(5):
        n = int(rng.integers(3, 11))
        zs = rng.normal(size=(n, 2))
        exact = rad_exact(zs, LpTag(2.0))
        mean, se = rad_estimate(zs, LpTag(2.0), 3000, seed=trial)
        assert abs(mean - exact) <= 3.0 * se
        exact_m = maximal_rad_exact(zs, LpTag(2.0))
        mean_m, se_m = maximal_rad_estimate(zs, LpTag(2.0), 3000, seed=trial)
        assert abs(mean_m - exact_m) <= 3.0 * se_m


def test_contraction_sanity():
    # multiplying by gradients |c_t| <= 1 can only shrink the expectation
    rng = substream(5, "contraction")
    for _ in range(10):
        zs = rng.normal(size=(9, 3))
        cs = rng.uniform(-1, 1, size=9)
        assert rad_exact(cs[:, None] * zs, LpTag(2.0)) <= rad_exact(zs, LpTag(2.0)) + 1e-12


def test_umd_scalar_p2_identity():
    rng = substream(6, "umd")
    for depth in (3, 6, 10):
        tree = DyadicTree.random_gaussian(depth, 1, rng)
        report = umd_check(2.0, ABS, tree, n_patterns=16, seed=depth)
        assert report.exact
        for _, lhs, _, ratio in report.patterns:
            assert ratio == pytest.approx(1.0, abs=1e-12)
        assert report.max_ratio_root == pytest.approx(1.0, abs=1e-12)


def test_umd_single_step_any_p():
    tree = DyadicTree.random_gaussian(1, 2, substream(7, "one"))
    for p in (1.5, 2.0, 3.0):
        report = umd_check(p, LpTag(2.0), tree, seed=0)
        assert report.max_ratio_root == pytest.approx(1.0, abs=1e-12)


def test_umd_sup_norm_report():
    tree = DyadicTree.random_gaussian(8, 16, substream(8, "sup"))
    report = umd_check(2.0, SupTag(), tree, n_patterns=16, seed=0)
    assert np.isfinite(report.max_ratio_root)
    assert report.max_ratio_root >= 1.0 - 1e-9
    assert report.reference["value"] == pytest.approx(np.log(16))


def test_umd_degenerate_tree_rejected():
    tree = DyadicTree.constant(3, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        umd_check(2.0, LpTag(2.0), tree, seed=0)


def test_hitczenko_depth_one_and_constant():
    tree = DyadicTree.constant(1, np.array([[0.7]]))
    rep = hitczenko_check(tree, p=2.0)
    assert rep.exact
    assert rep.lhs_mean == pytest.approx(rep.rhs_mean)
    assert rep.empirical_constant == pytest.approx(1.0)

    tree = DyadicTree.constant(6, np.linspace(0.2, 1.0, 6)[:, None])
    for p in (1.0, 2.0, 4.0):
        rep = hitczenko_check(tree, p=p)
        assert rep.lhs_mean == pytest.approx(rep.rhs_mean, rel=1e-12)


def magnitude_tree(depth):
    """Scalar tree whose magnitudes adapt to the walk: x_t = 1 + |prefix|/2."""
    levels = [np.ones((1, 1))]
    prefix = np.zeros(1)
    for t in range(1, depth):
        parent_vals = levels[t - 1][:, 0]
        new_prefix = np.empty(2**t)
        for parent in range(2 ** (t - 1)):
            for bit, eps in ((0, -1.0), (1, 1.0)):
                child = parent | (bit << (t - 1))
                new_prefix[child] = prefix[parent] + eps * parent_vals[parent]
        levels.append((1.0 + 0.5 * np.abs(new_prefix))[:, None])
        prefix = new_prefix
    return DyadicTree(levels)


def test_hitczenko_sign_adaptive_tree_is_walk_like():
    # predictable +-1 multipliers preserve the law of the random walk, so
    # both sides coincide even for the prefix-sign tree
    tree = DyadicTree.prefix_sign(8)
    rep = hitczenko_check(tree, p=1.0)
    assert rep.exact
    assert rep.bound_ok
    assert rep.empirical_constant == pytest.approx(1.0, rel=1e-12)
    # Monte Carlo agrees with the exact double enumeration
    mc = hitczenko_check(tree, p=1.0, k_samples=20000, seed=3, exact=False)
    assert abs(mc.lhs_mean - rep.lhs_mean) <= 3.0 * max(mc.lhs_se, 1e-12)
    assert abs(mc.rhs_mean - rep.rhs_mean) <= 3.0 * max(mc.rhs_se, 1e-12)


def test_hitczenko_magnitude_adaptive_tree_separates():
    tree = magnitude_tree(8)
    # p = 2 is an exact identity by orthogonality of the differences
    assert hitczenko_check(tree, p=2.0).empirical_constant == pytest.approx(1.0, rel=1e-12)
    # away from p = 2 the decoupled side genuinely differs
    rep4 = hitczenko_check(tree, p=4.0)
    assert rep4.empirical_constant > 1.05
    assert rep4.bound_ok
    rep1 = hitczenko_check(tree, p=1.0)
    assert rep1.empirical_constant < 0.95
    assert rep1.bound_ok


def test_hitczenko_requires_scalar_tree():
    tree = DyadicTree.random_gaussian(3, 2, substream(9, "vec"))
    with pytest.raises(ValueError):
        hitczenko_check(tree, p=2.0)
