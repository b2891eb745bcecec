import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtschwarz.geometry import (BOUNDARY, EXTERIOR, INTERIOR, build_grid,
                                build_partition_of_unity, chebyshev_distance, decompose)
from oracles import box_membership, classify_points

TAGS = {"interior": INTERIOR, "boundary": BOUNDARY, "exterior": EXTERIOR}
L_SHAPE = [(0, 1, 0, 1), (1, 2, 0, 1), (0, 1, 1, 2)]


def test_unit_square_counts():
    g = build_grid([(0, 1, 0, 1)], 0.25)
    assert (g.nx, g.nz) == (5, 5)
    assert g.interior.size == 9
    assert g.boundary.size == 16


def test_two_squares_lattice(two_square_grid):
    g = two_square_grid
    assert (g.nx, g.nz) == (59, 30)
    assert g.interior.size == 57 * 28
    i, k = g.ik
    inner = g.classes == INTERIOR
    assert i[inner].min() == 1 and i[inner].max() == 57
    assert k[inner].min() == 1 and k[inner].max() == 28


def _compare_with_oracle(rects, h):
    g = build_grid(rects, h)
    expected, nx, nz = classify_points(rects, h)
    assert (g.nx, g.nz) == (nx, nz)
    for (i, k), name in expected.items():
        assert g.node_class[k, i] == TAGS[name], (i, k)
    return g


def test_l_shape_matches_point_oracle():
    g = _compare_with_oracle(L_SHAPE, 0.5)
    # re-entrant corner sits on the boundary
    assert g.node_class[2, 2] == BOUNDARY


@st.composite
def rectangle_unions(draw):
    n = draw(st.integers(1, 4))
    rects = []
    for _ in range(n):
        x0 = draw(st.integers(0, 5))
        z0 = draw(st.integers(0, 5))
        rects.append((x0, x0 + draw(st.integers(1, 3)), z0, z0 + draw(st.integers(1, 3))))
    return rects


@settings(max_examples=60, deadline=None)
@given(rectangle_unions(), st.sampled_from([1.0, 0.5]))
def test_random_unions_match_point_oracle(rects, h):
    try:
        g = _compare_with_oracle(rects, h)
    except ValueError as exc:
        assert "disconnected" in str(exc) or "too small" in str(exc)
        return
    # no interior stencil reaches the exterior
    i, k = g.ik
    inner = g.classes == INTERIOR
    for di, dk in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        assert np.all(g.node_class[k[inner] + dk, i[inner] + di] != EXTERIOR)


def test_node_indexing_is_row_major():
    g = build_grid(L_SHAPE, 0.5)
    i, k = g.ik
    assert np.all(np.diff(k * g.nx + i) > 0)
    assert np.all(np.diff(g.lattice_index) > 0)


def test_off_grid_corner_rejected():
    with pytest.raises(ValueError, match="off the grid"):
        build_grid([(0, 1, 0, 1), (1, 1.3, 0, 1)], 0.25)


def test_disconnected_union_rejected():
    with pytest.raises(ValueError, match="disconnected"):
        build_grid([(0, 1, 0, 1), (2, 3, 0, 1)], 0.5)
    # corner contact only is not a connection
    with pytest.raises(ValueError, match="disconnected"):
        build_grid([(0, 1, 0, 1), (1, 2, 1, 2)], 0.5)


def test_too_small_and_bad_spacing_rejected():
    with pytest.raises(ValueError):
        build_grid([(0, 1, 0, 1)], 1.0)
    with pytest.raises(ValueError):
        build_grid([(0, 1, 0, 1)], -0.1)
    with pytest.raises(ValueError):
        build_grid([(0, 0, 0, 1)], 0.5)


def test_single_tile_has_no_interface(two_square_grid):
    for d in (2, 5):
        (sd,) = decompose(two_square_grid, [(0, 2, 0, 1)], d)
        assert sd.interface.size == 0
        assert sd.nodes.size == two_square_grid.n_nodes
        np.testing.assert_array_equal(sd.inner, two_square_grid.interior)


def test_two_square_interfaces(two_square_grid):
    g = two_square_grid
    h = g.h
    sd1, sd2 = decompose(g, [(0, 1, 0, 1), (1, 2, 0, 1)], 6)
    np.testing.assert_allclose(g.x[sd1.interface], 1 + 6 * h, atol=1e-12)
    np.testing.assert_allclose(g.x[sd2.interface], 1 - 6 * h, atol=1e-12)
    assert sd1.interface.size == 28 and sd2.interface.size == 28
    assert np.all((g.z[sd1.interface] > 0) & (g.z[sd1.interface] < 1))
    assert np.intersect1d(sd1.interface, sd1.physical).size == 0
    # local unknown count: 34 inner columns x 28 rows, by enumeration
    count = sum(1 for i in range(1, 35) for k in range(1, 29))
    assert sd1.inner.size == count


def test_two_by_two_tiling_membership():
    h, d = 0.125, 2
    rects = [(0, 2, 0, 2)]
    tiles = [(0, 1, 0, 1), (1, 2, 0, 1), (0, 1, 1, 2), (1, 2, 1, 2)]
    g = build_grid(rects, h)
    classes, nx, nz = classify_points(rects, h)
    subs = decompose(g, tiles, d)
    i, k = g.ik
    label = {p: (int(i[p]), int(k[p])) for p in range(g.n_nodes)}
    for sd, tile in zip(subs, tiles):
        box = tuple(int(round(v / h)) for v in tile)
        nodes, inner, iface, phys = box_membership(nx, nz, box, d, classes)
        assert {label[p] for p in sd.nodes} == nodes
        assert {label[p] for p in sd.inner} == inner
        assert {label[p] for p in sd.interface} == iface
        assert {label[p] for p in sd.physical} == phys
    # the first subdomain is the square [0, 1 + 2h]^2
    assert np.isclose(g.x[subs[0].nodes].max(), 1 + 2 * h)
    assert np.isclose(g.z[subs[0].nodes].max(), 1 + 2 * h)


def test_decompose_rejections(two_square_grid):
    tiles = [(0, 1, 0, 1), (1, 2, 0, 1)]
    with pytest.raises(ValueError, match="d >= 2"):
        decompose(two_square_grid, tiles, 1)
    with pytest.raises(ValueError, match="off the grid"):
        decompose(two_square_grid, [(0, 1.01, 0, 1), (1.01, 2, 0, 1)], 3)
    with pytest.raises(ValueError, match="overlaps"):
        decompose(two_square_grid, [(0, 1, 0, 1), (0, 2, 0, 1)], 3)
    with pytest.raises(ValueError, match="cover"):
        decompose(two_square_grid, [(0, 1, 0, 1)], 3)


@pytest.mark.parametrize("d", [2, 3, 6])
def test_l_shape_covering_and_overlap(d):
    g = build_grid(L_SHAPE, 1 / 12)
    subs = decompose(g, L_SHAPE, d)
    covered = np.zeros(g.n_nodes, bool)
    for sd in subs:
        covered[sd.nodes] = True
        assert np.all(np.isin(sd.interface, g.interior))
        boundary = np.union1d(sd.interface, sd.physical)
        assert np.intersect1d(boundary, sd.inner).size == 0
        np.testing.assert_array_equal(np.union1d(boundary, sd.inner), sd.nodes)
    assert covered.all()


def test_chebyshev_distance_matches_enumeration():
    g = build_grid(L_SHAPE, 0.25)
    targets = np.array([3, 17, 30])
    dist = chebyshev_distance(g, targets)
    i, k = g.ik
    for p in range(g.n_nodes):
        expected = min(max(abs(i[p] - i[t]), abs(k[p] - k[t])) for t in targets)
        assert dist[p] == expected


def test_pou_single_subdomain(two_square_grid):
    subs = decompose(two_square_grid, [(0, 2, 0, 1)], 2)
    pou = build_partition_of_unity(two_square_grid, subs)
    np.testing.assert_array_equal(pou.chi, 1.0)


def test_pou_two_square_cross_section(two_square_grid):
    g = two_square_grid
    subs = decompose(g, [(0, 1, 0, 1), (1, 2, 0, 1)], 6)
    pou = build_partition_of_unity(g, subs)
    i, k = g.ik
    row = np.flatnonzero(k == 15)
    # hand evaluation of the weight formula along the row: interfaces at i = 35 and i = 23
    for p in row:
        ii = int(i[p])
        w1 = max(0, abs(ii - 35) - 1) if ii <= 35 else 0
        w2 = max(0, abs(ii - 23) - 1) if ii >= 23 else 0
        assert pou.chi[0, p] == pytest.approx(w1 / (w1 + w2), abs=1e-15)
    chi1 = pou.chi[0, row]
    assert np.all(chi1[i[row] <= 24] == 1.0)
    assert np.all(chi1[i[row] >= 34] == 0.0)
    assert np.all((chi1[(i[row] > 24) & (i[row] < 34)] > 0) & (chi1[(i[row] > 24) & (i[row] < 34)] < 1))


@pytest.mark.parametrize("rects,tiles,h,d", [
    ([(0, 1, 0, 1), (1, 2, 0, 1)], [(0, 1, 0, 1), (1, 2, 0, 1)], 1 / 29, 6),
    ([(0, 2, 0, 2)], [(0, 1, 0, 1), (1, 2, 0, 1), (0, 1, 1, 2), (1, 2, 1, 2)], 1 / 10, 2),
    (L_SHAPE, L_SHAPE, 1 / 8, 3),
])
def test_pou_invariants(rects, tiles, h, d):
    g = build_grid(rects, h)
    subs = decompose(g, tiles, d)
    pou = build_partition_of_unity(g, subs)
    assert np.max(np.abs(pou.chi.sum(axis=0) - 1.0)) < 1e-14
    assert pou.chi.min() >= 0 and pou.chi.max() <= 1
    for sd, support in zip(subs, pou.supports):
        assert np.all(np.isin(support, sd.nodes))
        if sd.interface.size:
            assert chebyshev_distance(g, sd.interface)[support].min() >= 2
    again = build_partition_of_unity(g, decompose(g, tiles, d))
    assert again.chi.tobytes() == pou.chi.tobytes()


def test_pou_rejects_thin_overlap(two_square_grid):
    subs = decompose(two_square_grid, [(0, 1, 0, 1), (1, 2, 0, 1)], 2)
    broken = [dataclasses.replace(subs[0], interface=subs[0].nodes)]
    with pytest.raises(ValueError, match="overlap too thin"):
        build_partition_of_unity(two_square_grid, broken)
