"""Grid geometry, overlapping decomposition and partition of unity.

Domains are unions of closed axis-aligned rectangles ``(x0, x1, z0, z1)``
whose corners lie on the lattice of spacing ``h``.  Geometry is tracked
through *cells* (the squares between four lattice nodes): a rectangle union
is exactly a set of covered cells, which makes node classification exact.

Node numbering
--------------
Lattice nodes are numbered row-major by ``(z, x)``: ``k * nx + i``.  Domain
nodes (interior and physical boundary) get a compact index in the same
order; every field in this package is a vector over that compact index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import ndimage

EXTERIOR = 0
INTERIOR = 1
BOUNDARY = 2

CLASS_NAMES = {EXTERIOR: "exterior", INTERIOR: "interior", BOUNDARY: "physical_boundary"}

_GRID_TOL = 1e-9


def _as_rectangle(rect):
    x0, x1, z0, z1 = (float(v) for v in rect)
    if not (x1 > x0 and z1 > z0):
        raise ValueError(f"degenerate rectangle {rect!r}: need x0 < x1 and z0 < z1")
    return (x0, x1, z0, z1)


def _to_lattice(value, origin, h, rect):
    t = (value - origin) / h
    n = round(t)
    if abs(t - n) > _GRID_TOL * max(1.0, abs(t)):
        raise ValueError(f"rectangle {rect!r} has a corner off the grid of spacing h={h!r}")
    return int(n)


def _cell_box(rect, x0, z0, h):
    """Lattice index box ``(i0, i1, k0, k1)`` of a grid-aligned rectangle."""
    return (_to_lattice(rect[0], x0, h, rect), _to_lattice(rect[1], x0, h, rect),
            _to_lattice(rect[2], z0, h, rect), _to_lattice(rect[3], z0, h, rect))


def _node_classes(cells):
    """Classify lattice nodes from a cell coverage mask of shape ``(nz-1, nx-1)``."""
    nzc, nxc = cells.shape
    padded = np.zeros((nzc + 2, nxc + 2), dtype=bool)
    padded[1:-1, 1:-1] = cells
    # node (k, i) touches cells (k-1|k, i-1|i), i.e. padded (k|k+1, i|i+1)
    sw, se = padded[:-1, :-1], padded[:-1, 1:]
    nw, ne = padded[1:, :-1], padded[1:, 1:]
    touched = sw | se | nw | ne
    surrounded = sw & se & nw & ne
    classes = np.full(touched.shape, EXTERIOR, dtype=np.int8)
    classes[touched] = BOUNDARY
    classes[surrounded] = INTERIOR
    return classes


@dataclass(frozen=True, eq=False)
class GlobalGrid:
    """Uniform lattice over a union of grid-aligned rectangles.

    Use :func:`build_grid` rather than the constructor.
    """

    h: float
    origin: tuple[float, float]
    nx: int
    nz: int
    node_class: np.ndarray  # (nz, nx) int8 tags
    cells: np.ndarray  # (nz-1, nx-1) bool coverage
    rectangles: tuple = ()
    lattice_index: np.ndarray = field(init=False, repr=False)
    node_id: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        flat = self.node_class.ravel()
        lattice_index = np.flatnonzero(flat != EXTERIOR)
        node_id = np.full(flat.size, -1, dtype=np.int64)
        node_id[lattice_index] = np.arange(lattice_index.size)
        object.__setattr__(self, "lattice_index", lattice_index)
        object.__setattr__(self, "node_id", node_id)
        for arr in (self.node_class, self.cells, lattice_index, node_id):
            arr.setflags(write=False)

    @property
    def shape(self):
        return (self.nz, self.nx)

    @property
    def n_nodes(self):
        """Number of domain nodes (interior plus physical boundary)."""
        return self.lattice_index.size

    @property
    def classes(self):
        """Class tag of every domain node."""
        return self.node_class.ravel()[self.lattice_index]

    @property
    def interior(self):
        """Domain indices of interior nodes."""
        return np.flatnonzero(self.classes == INTERIOR)

    @property
    def boundary(self):
        """Domain indices of physical boundary nodes."""
        return np.flatnonzero(self.classes == BOUNDARY)

    @property
    def ik(self):
        """``(i, k)`` lattice coordinates of every domain node."""
        k, i = np.divmod(self.lattice_index, self.nx)
        return i, k

    @property
    def x(self):
        return self.origin[0] + self.h * self.ik[0]

    @property
    def z(self):
        return self.origin[1] + self.h * self.ik[1]

    def to_lattice(self, values, fill=0.0):
        """Scatter a domain field onto the full ``(nz, nx)`` lattice."""
        values = np.asarray(values)
        out = np.full(self.nz * self.nx, fill, dtype=np.result_type(values, type(fill)))
        out[self.lattice_index] = values
        return out.reshape(self.shape)

    def from_lattice(self, array):
        return np.asarray(array).reshape(-1)[self.lattice_index]

    def sample(self, func):
        """Evaluate ``func(x, z)`` at every domain node."""
        return np.asarray(func(self.x, self.z)) * np.ones(self.n_nodes)

    def cell_box(self, rect):
        return _cell_box(_as_rectangle(rect), self.origin[0], self.origin[1], self.h)


def parse_spacing(h):
    """Accept floats, ints, Fractions or strings such as ``"1/29"``."""
    if isinstance(h, str):
        h = Fraction(h.strip())
    h = float(h)
    if not np.isfinite(h) or h <= 0:
        raise ValueError(f"grid spacing must be positive, got {h!r}")
    return h


def build_grid(domain_spec, h):
    """Build the lattice over a connected union of rectangles.

    Parameters
    ----------
    domain_spec : sequence of ``(x0, x1, z0, z1)``
        Closed rectangles; corners must sit on the lattice of spacing ``h``
        anchored at the lower-left corner of their bounding box.
    h : float or str
        Uniform spacing in both directions.

    Raises
    ------
    ValueError
        Off-grid corners, a disconnected union, or fewer than 3 nodes
        in either direction.
    """
    h = parse_spacing(h)
    rects = tuple(_as_rectangle(r) for r in domain_spec)
    if not rects:
        raise ValueError("domain_spec must contain at least one rectangle")
    x0 = min(r[0] for r in rects)
    z0 = min(r[2] for r in rects)
    boxes = [_cell_box(r, x0, z0, h) for r in rects]
    nx = max(b[1] for b in boxes) + 1
    nz = max(b[3] for b in boxes) + 1
    if nx < 3 or nz < 3:
        raise ValueError(f"lattice too small ({nx}x{nz} nodes); need at least 3x3")

    cells = np.zeros((nz - 1, nx - 1), dtype=bool)
    for i0, i1, k0, k1 in boxes:
        cells[k0:k1, i0:i1] = True
    _, n_components = ndimage.label(cells)
    if n_components != 1:
        raise ValueError(f"domain union is disconnected ({n_components} components)")

    return GlobalGrid(h=h, origin=(x0, z0), nx=nx, nz=nz,
                      node_class=_node_classes(cells), cells=cells, rectangles=rects)


@dataclass(frozen=True, eq=False)
class Subdomain:
    """Overlapping subdomain; all node sets are sorted domain indices.

    ``id`` counts from 1.  ``nodes`` is the closure of the subdomain,
    ``inner`` its non-boundary nodes (the local unknowns), ``interface`` the
    boundary part inside the global domain and ``physical`` the part lying
    on the physical boundary.
    """

    id: int
    nodes: np.ndarray
    inner: np.ndarray
    interface: np.ndarray
    physical: np.ndarray
    overlap_d: int
    tile: tuple
    cells: np.ndarray = field(repr=False)

    def local_positions(self, global_nodes):
        """Positions of ``global_nodes`` inside :attr:`nodes`."""
        return np.searchsorted(self.nodes, global_nodes)


def _check_tiling(grid, tiles):
    owner = np.zeros(grid.cells.shape, dtype=np.int64)
    boxes = []
    for j, rect in enumerate(tiles, start=1):
        i0, i1, k0, k1 = grid.cell_box(rect)
        if i0 < 0 or k0 < 0 or i1 > grid.nx - 1 or k1 > grid.nz - 1:
            raise ValueError(f"tile {rect!r} extends outside the grid")
        block = owner[k0:k1, i0:i1]
        if np.any(block != 0):
            raise ValueError(f"tile {rect!r} overlaps another tile")
        if not np.all(grid.cells[k0:k1, i0:i1]):
            raise ValueError(f"tile {rect!r} is not contained in the domain")
        block[...] = j
        boxes.append((i0, i1, k0, k1))
    if np.any(grid.cells & (owner == 0)):
        raise ValueError("tiles do not cover the domain")
    return boxes


def decompose(grid, tiling, d):
    """Enlarge a non-overlapping tiling by ``d`` grid layers.

    Each subdomain is the connected part (containing its tile) of the tile's
    cell box grown by ``d`` cells in every direction and clipped to the
    domain.
    """
    d = int(d)
    if d < 2:
        raise ValueError(f"overlap d={d} too small: a partition of unity supported away "
                         "from the interfaces needs d >= 2")
    boxes = _check_tiling(grid, [_as_rectangle(t) for t in tiling])
    nzc, nxc = grid.cells.shape
    classes = grid.node_class
    subdomains = []
    for j, ((i0, i1, k0, k1), rect) in enumerate(zip(boxes, tiling), start=1):
        grown = np.zeros_like(grid.cells)
        grown[max(k0 - d, 0):min(k1 + d, nzc), max(i0 - d, 0):min(i1 + d, nxc)] = True
        grown &= grid.cells
        labels, _ = ndimage.label(grown)
        cells = labels == labels[k0, i0]
        local = _node_classes(cells)
        on_boundary = local == BOUNDARY
        inner = grid.from_lattice(local == INTERIOR)
        closure = grid.from_lattice(local != EXTERIOR)
        interface = grid.from_lattice(on_boundary & (classes == INTERIOR))
        physical = grid.from_lattice(on_boundary & (classes == BOUNDARY))
        cells.setflags(write=False)
        subdomains.append(Subdomain(
            id=j,
            nodes=np.flatnonzero(closure),
            inner=np.flatnonzero(inner),
            interface=np.flatnonzero(interface),
            physical=np.flatnonzero(physical),
            overlap_d=d,
            tile=tuple(float(v) for v in rect),
            cells=cells,
        ))
    check_decomposition(grid, subdomains)
    return subdomains


def chebyshev_distance(grid, nodes):
    """Chessboard distance (in node layers) from each domain node to ``nodes``.

    Returns ``inf`` everywhere when ``nodes`` is empty.
    """
    if len(nodes) == 0:
        return np.full(grid.n_nodes, np.inf)
    mask = np.ones(grid.nz * grid.nx, dtype=bool)
    mask[grid.lattice_index[nodes]] = False
    dist = ndimage.distance_transform_cdt(mask.reshape(grid.shape), metric="chessboard")
    return grid.from_lattice(dist).astype(float)


def check_decomposition(grid, subdomains):
    """Raise ``ValueError`` unless covering and strong overlap hold."""
    covered = np.zeros(grid.n_nodes, dtype=bool)
    for sd in subdomains:
        covered[sd.nodes] = True
    if not covered.all():
        first = int(np.flatnonzero(~covered)[0])
        raise ValueError(f"node {first} is not covered by any subdomain")
    for sd in subdomains:
        if sd.interface.size == 0:
            continue
        ok = np.zeros(sd.interface.size, dtype=bool)
        for other in subdomains:
            if other.id == sd.id:
                continue
            inside = np.isin(sd.interface, other.inner)
            dist = chebyshev_distance(grid, other.interface)[sd.interface]
            ok |= inside & (dist >= sd.overlap_d - 1)
        if not ok.all():
            bad = int(sd.interface[~ok][0])
            raise ValueError(f"interface node {bad} of subdomain {sd.id} is not strongly "
                             "overlapped by another subdomain")


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    """Weights ``chi[j, p]`` for subdomain ``j`` (0-based row) at domain node ``p``."""

    chi: np.ndarray

    @property
    def supports(self):
        """Support ``K_j`` of each weight as sorted domain indices."""
        return [np.flatnonzero(row > 0) for row in self.chi]

    def glue(self, subdomains, local_fields):
        """Blend local fields into a global one, summing over ``j`` in order."""
        out = np.zeros(self.chi.shape[1], dtype=complex)
        for sd, values in zip(subdomains, local_fields):
            out[sd.nodes] += self.chi[sd.id - 1, sd.nodes] * values
        return out


def build_partition_of_unity(grid, subdomains):
    """Distance-based partition of unity.

    The raw weight of subdomain ``j`` at node ``p`` is
    ``max(0, dist(p, interface_j) - 1)`` on its nodes and zero elsewhere, so
    every weight vanishes on its interface and on the adjacent node layer.
    Subdomains without an interface get the constant ``nx + nz``.
    """
    raw = np.zeros((len(subdomains), grid.n_nodes))
    for row, sd in zip(raw, subdomains):
        if sd.interface.size == 0:
            row[sd.nodes] = grid.nx + grid.nz
        else:
            dist = chebyshev_distance(grid, sd.interface)
            row[sd.nodes] = np.maximum(0.0, dist[sd.nodes] - 1.0)
    total = raw.sum(axis=0)
    if np.any(total <= 0):
        bad = int(np.flatnonzero(total <= 0)[0])
        x, z = grid.x[bad], grid.z[bad]
        raise ValueError(f"partition of unity undefined at node {bad} (x={x!r}, z={z!r}): "
                         "overlap too thin")
    chi = raw / total
    chi.setflags(write=False)
    return PartitionOfUnity(chi=chi)
