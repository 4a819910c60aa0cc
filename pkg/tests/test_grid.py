import numpy as np
import pytest

from lsfm.grid import Grid2D, admissible_summary, disk_mask, entry_columns, entry_depth, make_grid


def test_tau_full_resolution():
    assert make_grid(257).tau == pytest.approx(2 / 258)
    assert make_grid(257).tau == pytest.approx(0.0077519, abs=1e-7)


def test_tau_unit_square():
    assert make_grid(3, (0, 1, 0, 1)).tau == pytest.approx(0.25)


@pytest.mark.parametrize("N", [1, 0, -3, 2.5])
def test_bad_size(N):
    with pytest.raises(ValueError):
        make_grid(N)


def test_bad_extent():
    with pytest.raises(ValueError):
        make_grid(5, (1, 1, 0, 1))
    with pytest.raises(ValueError):
        make_grid(5, (0, 1, 2, 1))


def test_coordinates():
    g = make_grid(7)
    assert np.allclose(np.diff(g.xs), g.tau)
    assert np.allclose(np.diff(g.ys), -g.tau_y)
    assert g.xs[0] == pytest.approx(g.tau)
    assert g.ys[0] == pytest.approx(1 - g.tau_y)
    # columns and rows are symmetric about the domain centre
    assert np.allclose(g.xs + g.xs[::-1], 2.0)
    assert np.allclose(g.ys + g.ys[::-1], 0.0)
    X, Y = g.meshgrid()
    assert X.shape == Y.shape == (7, 7)


def test_column_of_x1_full():
    g = make_grid(257)
    assert g.column_of(1.0) == 128
    assert g.xs[128] == pytest.approx(1.0)
    assert g.row_of(0.0) == 128


def test_entry_depth_full_mask():
    mask = np.ones((5, 5), bool)
    assert all(entry_depth(mask, r) == 0 for r in range(5))


def test_entry_depth_empty_row():
    mask = np.zeros((4, 4), bool)
    mask[1, 2] = True
    assert entry_depth(mask, 0) is None
    assert entry_depth(mask, 1) == 2


def test_entry_depth_out_of_range():
    with pytest.raises(ValueError):
        entry_depth(np.ones((3, 3), bool), 3)
    with pytest.raises(ValueError):
        entry_depth(np.ones((3, 3), bool), -1)


def test_entry_depth_disk_scan():
    g = make_grid(41)
    mask = disk_mask(g)
    for r in range(g.N):
        scan = next((j for j in range(g.N) if mask[r, j]), None)
        assert entry_depth(mask, r) == scan
    assert np.array_equal(entry_columns(mask), [(-1 if entry_depth(mask, r) is None else entry_depth(mask, r))
                                                for r in range(g.N)])


def test_full_rectangle_admissible():
    g = make_grid(9)
    sec = admissible_summary(np.ones(g.shape, bool), g)
    assert sec.s_minus == 0 and sec.s_plus == g.N - 1
    assert sec.in_Y.all()
    assert sec.admissible


def test_empty_mask_rejected():
    g = make_grid(5)
    with pytest.raises(ValueError):
        admissible_summary(np.zeros(g.shape, bool), g)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        admissible_summary(np.ones((4, 4), bool), make_grid(5))


def _brute_force_s_plus(mask):
    # largest s whose every segment [x_h, s] x {h}, h in Y_s, lies in the mask
    N = mask.shape[1]
    best = None
    for s in range(N):
        ok, nonempty = True, False
        for h in range(mask.shape[0]):
            hits = np.flatnonzero(mask[h])
            if hits.size and hits[0] <= s:
                nonempty = True
                ok &= bool(mask[h, hits[0]:s + 1].all())
        if nonempty and ok:
            best = s
    return best


@pytest.mark.parametrize("N", [17, 32, 41, 64])
def test_disk_s_plus_brute_force(N):
    g = make_grid(N)
    mask = disk_mask(g, radius=0.7)
    sec = admissible_summary(mask, g)
    assert sec.s_plus == _brute_force_s_plus(mask)
    # tangency at the centre column, up to the flat top run of a pixelated
    # rim whose half-length is about sqrt(2 R tau)
    assert abs(g.xs[sec.s_plus] - 1.0) <= np.sqrt(2 * 0.7 * g.tau) + g.tau


def test_admissible_random_masks(rng):
    for _ in range(20):
        N = int(rng.integers(4, 20))
        g = make_grid(N)
        mask = rng.random((N, N)) < 0.6
        if not mask.any():
            continue
        sec = admissible_summary(mask, g)
        assert sec.s_plus == _brute_force_s_plus(mask)


def test_Y_monotone_and_gamma_consistent():
    g = make_grid(48)
    mask = disk_mask(g, radius=0.8)
    sec = admissible_summary(mask, g)
    for s in range(g.N - 1):
        assert not np.any(sec.in_Y[s] & ~sec.in_Y[s + 1])
    for h in sec.Y(sec.s_plus):
        col = g.column_of(sec.gamma[h])
        assert mask[h, col]
        assert col == 0 or not mask[h, col - 1]
    assert sec.y_low_row(sec.s_minus) is not None
    assert sec.y_low_row(0) is None or sec.s_minus == 0


def test_segments_inside_when_admissible():
    g = make_grid(40)
    mask = disk_mask(g, radius=0.8)
    sec = admissible_summary(mask, g)
    for s in range(sec.s_minus, sec.s_plus + 1):
        for h in sec.Y(s):
            assert mask[h, sec.entry[h]:s + 1].all()


def test_two_disks_not_admissible():
    g = make_grid(64)
    mask = disk_mask(g, (0.5, 0.0), 0.4) | disk_mask(g, (1.5, 0.0), 0.4)
    sec = admissible_summary(mask, g)
    assert not sec.admissible
    assert sec.s_plus == _brute_force_s_plus(mask)
    assert g.xs[sec.s_plus] < 1.0


def test_grid_frozen():
    g = Grid2D(5)
    with pytest.raises(Exception):
        g.N = 6
