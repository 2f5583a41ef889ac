import numpy as np
import pytest

from normcluster.clustering import (
    NOISE,
    ClusterAssignment,
    DbscanParams,
    KMeansParams,
    dbscan,
    inertia,
    kmeans,
)


def two_blobs(rng, n_per=5, sep=8.0, sigma=0.4):
    a = rng.normal(0.0, sigma, (n_per, 2))
    b = rng.normal(0.0, sigma, (n_per, 2)) + sep
    return np.vstack([a, b])


def brute_force_two_partition(points):
    """Inertia-optimal split into two non-empty clusters, by enumeration."""
    n = len(points)
    best_inertia, best_sets = np.inf, None
    for mask in range(1, 2 ** (n - 1)):  # point 0 stays in side A
        side_a = [0] + [i for i in range(1, n) if mask >> (i - 1) & 1]
        side_b = [i for i in range(1, n) if not mask >> (i - 1) & 1]
        if not side_b:
            continue
        total = 0.0
        for side in (side_a, side_b):
            center = points[side].mean(axis=0)
            total += ((points[side] - center) ** 2).sum()
        if total < best_inertia:
            best_inertia, best_sets = total, (frozenset(side_a), frozenset(side_b))
    return best_inertia, best_sets


def reference_dbscan(points, eps, min_members):
    """Straightforward quadratic DBSCAN used as an independent oracle."""
    n = len(points)
    neighbors = []
    for i in range(n):
        neighbors.append(
            [j for j in range(n) if np.sqrt(((points[i] - points[j]) ** 2).sum()) <= eps]
        )
    core = [len(nb) >= min_members for nb in neighbors]
    labels = [None] * n
    cid = 0
    for i in range(n):
        if not core[i] or labels[i] is not None:
            continue
        labels[i] = cid
        frontier = [i]
        while frontier:
            j = frontier.pop(0)
            if not core[j]:
                continue
            for nb in neighbors[j]:
                if labels[nb] is None:
                    labels[nb] = cid
                    frontier.append(nb)
        cid += 1
    return np.array([NOISE if l is None else l for l in labels]), core


# --- k-means ------------------------------------------------------------------


def test_kmeans_k1_centroid_is_mean():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(7, 3))
    result = kmeans(pts, KMeansParams(k=1, seed=0))
    assert np.array_equal(result.labels, np.zeros(7, dtype=np.int64))
    assert np.allclose(result.centroids[0], pts.mean(axis=0), atol=1e-12)
    assert result.n_clusters == 1


def test_kmeans_saturated_k_zero_inertia():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    result = kmeans(pts, KMeansParams(k=4, seed=3, tol=0.0))
    assert result.inertia == 0.0
    assert sorted(result.labels.tolist()) == [0, 1, 2, 3]


def test_kmeans_matches_enumeration_on_blobs():
    rng = np.random.default_rng(42)
    pts = two_blobs(rng)
    result = kmeans(pts, KMeansParams(k=2, seed=7, restarts=10))
    _, best_sets = brute_force_two_partition(pts)
    got = (
        frozenset(np.flatnonzero(result.labels == 0).tolist()),
        frozenset(np.flatnonzero(result.labels == 1).tolist()),
    )
    assert set(got) == set(best_sets)


def test_kmeans_deterministic_for_seed():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(20, 4))
    params = KMeansParams(k=3, seed=123)
    a = kmeans(pts, params)
    b = kmeans(pts, params)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.centroids, b.centroids)
    assert a.inertia == b.inertia


def test_kmeans_inertia_trace_non_increasing():
    rng = np.random.default_rng(11)
    for trial in range(10):
        pts = rng.normal(size=(15, 3)) * rng.uniform(0.5, 3.0)
        traces = {}
        kmeans(
            pts,
            KMeansParams(k=4, seed=trial, restarts=3),
            on_iter=lambda r, i, v: traces.setdefault(r, []).append(v),
        )
        for trace in traces.values():
            assert all(a >= b - 1e-9 for a, b in zip(trace, trace[1:]))


def test_kmeans_translation_invariance():
    rng = np.random.default_rng(9)
    pts = rng.integers(-20, 20, size=(12, 3)).astype(float)
    params = KMeansParams(k=3, seed=2)
    base = kmeans(pts, params)
    shifted = kmeans(pts + np.array([100.0, -50.0, 7.0]), params)
    assert np.array_equal(base.labels, shifted.labels)


def test_kmeans_assigns_to_nearest_centroid():
    rng = np.random.default_rng(21)
    pts = rng.normal(size=(30, 2))
    result = kmeans(pts, KMeansParams(k=5, seed=4))
    dists = ((pts[:, None, :] - result.centroids[None, :, :]) ** 2).sum(axis=2)
    assert np.array_equal(result.labels, dists.argmin(axis=1))


def test_kmeans_errors():
    pts = np.ones((3, 2))
    with pytest.raises(ValueError, match="exceeds"):
        kmeans(pts, KMeansParams(k=4))
    with pytest.raises(ValueError, match="non-empty"):
        kmeans(np.empty((0, 2)), KMeansParams(k=1))
    with pytest.raises(ValueError):
        KMeansParams(k=0)
    with pytest.raises(ValueError):
        KMeansParams(k=2, restarts=0)
    with pytest.raises(ValueError):
        KMeansParams(k=2, tol=-0.1)


def test_kmeans_reseeds_empty_clusters():
    # ask for 3 clusters among 3 distinct points; reseeding keeps ids 0..2 populated
    pts = np.array([[0.0, 0.0], [0.1, 0.0], [9.0, 9.0]])
    result = kmeans(pts, KMeansParams(k=3, seed=0, restarts=5, tol=0.0))
    assert result.n_clusters == 3
    assert result.inertia == 0.0


# --- inertia -------------------------------------------------------------------


def test_inertia_zero_when_points_equal_centroids():
    pts = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert inertia(pts, [0, 1], pts.copy()) == 0.0


def test_inertia_squared_distance():
    assert inertia(np.array([[2.0, 0.0]]), [0], np.array([[0.0, 0.0]])) == 4.0


def test_inertia_matches_double_loop():
    rng = np.random.default_rng(13)
    pts = rng.normal(size=(8, 3))
    centroids = rng.normal(size=(3, 3))
    labels = rng.integers(0, 3, size=8)
    expected = 0.0
    for p, l in zip(pts, labels):
        for a, b in zip(p, centroids[l]):
            expected += (a - b) ** 2
    assert inertia(pts, labels, centroids) == pytest.approx(expected, rel=1e-12)


def test_inertia_rejects_out_of_range_labels():
    pts = np.ones((2, 2))
    with pytest.raises(ValueError, match="range"):
        inertia(pts, [0, 5], np.ones((2, 2)))
    with pytest.raises(ValueError, match="range"):
        inertia(pts, [-1, 0], np.ones((2, 2)))


# --- dbscan --------------------------------------------------------------------


def test_dbscan_all_noise_when_spread():
    pts = np.array([[0.0], [10.0], [20.0], [30.0]])
    result = dbscan(pts, DbscanParams(eps=1.0, min_members=2))
    assert np.all(result.labels == NOISE)
    assert result.n_clusters == 0


def test_dbscan_chain_forms_one_cluster():
    pts = np.array([[0.0], [1.0], [2.0], [3.0], [4.0]])
    result = dbscan(pts, DbscanParams(eps=1.5, min_members=2))
    assert result.n_clusters == 1
    assert np.all(result.labels == 0)
    ref_labels, _ = reference_dbscan(pts, 1.5, 2)
    assert np.array_equal(result.labels, ref_labels)


def test_dbscan_core_set_matches_brute_force():
    rng = np.random.default_rng(17)
    pts = rng.uniform(0.0, 2.0, size=(30, 3))
    params = DbscanParams(eps=0.5, min_members=3)
    result = dbscan(pts, params)
    ref_labels, core = reference_dbscan(pts, 0.5, 3)
    sq = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    my_core = [(sq[i] <= 0.25).sum() >= 3 for i in range(30)]
    assert my_core == core
    assert np.array_equal(result.labels, ref_labels)


def test_dbscan_core_and_noise_invariant_under_permutation():
    rng = np.random.default_rng(23)
    pts = rng.uniform(0.0, 3.0, size=(25, 2))
    params = DbscanParams(eps=0.8, min_members=3)
    base = dbscan(pts, params)
    perm = rng.permutation(25)
    permuted = dbscan(pts[perm], params)
    base_noise = {tuple(p) for p, l in zip(pts, base.labels) if l == NOISE}
    perm_noise = {tuple(p) for p, l in zip(pts[perm], permuted.labels) if l == NOISE}
    assert base_noise == perm_noise
    assert base.n_clusters == permuted.n_clusters


def test_dbscan_min_members_one_has_no_noise():
    rng = np.random.default_rng(29)
    pts = rng.uniform(size=(12, 2)) * 50
    result = dbscan(pts, DbscanParams(eps=0.01, min_members=1))
    assert np.all(result.labels != NOISE)


def test_dbscan_translation_invariance():
    rng = np.random.default_rng(31)
    pts = rng.integers(0, 10, size=(15, 2)).astype(float)
    params = DbscanParams(eps=2.0, min_members=2)
    base = dbscan(pts, params)
    shifted = dbscan(pts + 1000.0, params)
    assert np.array_equal(base.labels, shifted.labels)


def test_dbscan_every_cluster_contains_a_core_point():
    rng = np.random.default_rng(37)
    pts = rng.uniform(0.0, 2.5, size=(28, 2))
    params = DbscanParams(eps=0.6, min_members=3)
    result = dbscan(pts, params)
    _, core = reference_dbscan(pts, 0.6, 3)
    for cid in range(result.n_clusters):
        members = np.flatnonzero(result.labels == cid)
        assert any(core[i] for i in members)


def test_dbscan_param_validation():
    with pytest.raises(ValueError):
        DbscanParams(eps=0.0, min_members=2)
    with pytest.raises(ValueError):
        DbscanParams(eps=1.0, min_members=0)
    with pytest.raises(ValueError, match="non-empty"):
        dbscan(np.empty((0, 2)), DbscanParams(eps=1.0, min_members=1))


def test_cluster_assignment_from_labels():
    a = ClusterAssignment.from_labels([0, 0, 1, NOISE, 2])
    assert a.n_clusters == 3
    assert a.labels.dtype == np.int64
