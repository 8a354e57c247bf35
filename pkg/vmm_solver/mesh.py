"""
    Simplicial meshes of intervals, rectangles and inscribed-polygon disks.
    Meshes are immutable after construction and safe to share between threads.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from vmm_solver.consts import (
    MESH_COLLINEAR_TOLERANCE,
    MESH_DEFAULT_QUASI_UNIFORMITY_BOUND,
    MESH_DEFAULT_SHAPE_RATIO_BOUND,
)
from vmm_solver.exceptions import MeshConstructionError
from vmm_solver.internal.files import atomic_write_text

logger = logging.getLogger(__name__)

# Local edge k of a triangle is opposite to local vertex k.
LOCAL_EDGES = ((1, 2), (2, 0), (0, 1))

# Tolerance of the barycentric inside test used by `locate_points`.
_LOCATE_TOLERANCE = 1e-12


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Mesh:
    """
    Conforming simplicial mesh.

    Cells are segments (1-D) or positively oriented triangles (2-D).
    Edges carry a unique global orientation from the lower to the higher vertex index.
    """

    dimension: int
    vertices: np.ndarray  # (n_vertices, dimension)
    cells: np.ndarray  # (n_cells, dimension + 1)
    edges: np.ndarray  # (n_edges, 2), sorted pairs; empty in 1-D
    cell_edges: np.ndarray  # (n_cells, 3), local edge k -> global edge; empty in 1-D
    edge_cells: np.ndarray  # (n_edges, 2), -1 where there is no second cell
    boundary_vertices: np.ndarray
    boundary_edges: np.ndarray
    h: float

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_cells(self) -> int:
        return int(self.cells.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def cell_coordinates(self, cell_index: int) -> np.ndarray:
        """
        Returns physical coordinates of the vertices of one cell, shape (dimension + 1, dimension).
        """
        return self.vertices[self.cells[cell_index]]

    def cell_measures(self) -> np.ndarray:
        """
        Returns signed lengths (1-D) or signed areas (2-D) of all cells.
        """
        return _signed_measures(self.dimension, self.vertices, self.cells)

    def cell_diameters(self) -> np.ndarray:
        """
        Returns the diameter (longest edge) of every cell.
        """
        return _cell_diameters(self.dimension, self.vertices, self.cells)


@dataclass(frozen=True)
class MeshReport:
    """
    Result of `validate_mesh`.
    """

    h: float
    min_diameter: float
    max_diameter: float
    worst_shape_ratio: float
    quasi_uniformity: float
    conforming: bool
    issues: List[str] = field(default_factory=list)


def _signed_measures(
    dimension: int, vertices: np.ndarray, cells: np.ndarray
) -> np.ndarray:
    if dimension == 1:
        return vertices[cells[:, 1], 0] - vertices[cells[:, 0], 0]
    p0 = vertices[cells[:, 0]]
    p1 = vertices[cells[:, 1]]
    p2 = vertices[cells[:, 2]]
    return 0.5 * (
        (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
        - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
    )


def _edge_lengths(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """
    Lengths of the three local edges of every triangle, shape (n_cells, 3).
    """
    lengths = np.empty((cells.shape[0], 3))
    for k, (a, b) in enumerate(LOCAL_EDGES):
        lengths[:, k] = np.linalg.norm(
            vertices[cells[:, b]] - vertices[cells[:, a]], axis=1
        )
    return lengths


def _cell_diameters(
    dimension: int, vertices: np.ndarray, cells: np.ndarray
) -> np.ndarray:
    if dimension == 1:
        return np.abs(_signed_measures(1, vertices, cells))
    return _edge_lengths(vertices, cells).max(axis=1)


def _shape_ratios(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """
    Circumradius / inradius of every triangle (2 for the equilateral one).
    """
    lengths = _edge_lengths(vertices, cells)
    areas = np.abs(_signed_measures(2, vertices, cells))
    semi_perimeter = 0.5 * lengths.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        circumradius = lengths.prod(axis=1) / (4.0 * areas)
        inradius = areas / semi_perimeter
        ratios = circumradius / inradius
    return np.where(np.isfinite(ratios), ratios, np.inf)


def _triangle_topology(
    n_vertices: int, cells: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Builds edges, cell -> edge and edge -> cell maps, boundary sets for a triangulation.
    """
    local_pairs = np.stack(
        [np.stack([cells[:, a], cells[:, b]], axis=1) for a, b in LOCAL_EDGES],
        axis=1,
    )  # (n_cells, 3, 2)
    sorted_pairs = np.sort(local_pairs.reshape(-1, 2), axis=1)
    edges, inverse, counts = np.unique(
        sorted_pairs, axis=0, return_inverse=True, return_counts=True
    )
    inverse = inverse.reshape(-1)
    cell_edges = inverse.reshape(cells.shape[0], 3)

    edge_cells = np.full((edges.shape[0], 2), -1, dtype=np.int64)
    for flat_index, edge_index in enumerate(inverse):
        cell_index = flat_index // 3
        slot = 0 if edge_cells[edge_index, 0] < 0 else 1
        edge_cells[edge_index, slot] = cell_index

    boundary_edges = np.flatnonzero(counts == 1)
    boundary_vertices = np.unique(edges[boundary_edges].reshape(-1))
    return edges, cell_edges, edge_cells, boundary_edges, boundary_vertices


def _assemble_triangle_mesh(vertices: np.ndarray, cells: np.ndarray) -> Mesh:
    vertices = np.asarray(vertices, dtype=float)
    cells = np.asarray(cells, dtype=np.int64)
    (
        edges,
        cell_edges,
        edge_cells,
        boundary_edges,
        boundary_vertices,
    ) = _triangle_topology(vertices.shape[0], cells)
    h = float(_cell_diameters(2, vertices, cells).max())
    return Mesh(
        dimension=2,
        vertices=_readonly(vertices),
        cells=_readonly(cells),
        edges=_readonly(edges.astype(np.int64)),
        cell_edges=_readonly(cell_edges.astype(np.int64)),
        edge_cells=_readonly(edge_cells),
        boundary_vertices=_readonly(boundary_vertices.astype(np.int64)),
        boundary_edges=_readonly(boundary_edges.astype(np.int64)),
        h=h,
    )


def build_interval_mesh(a: float, b: float, n: int) -> Mesh:
    """
    Uniform mesh of [a, b] with `n` segments.

    :param a: Left endpoint.
    :param b: Right endpoint.
    :param n: Number of cells.
    """
    if not a < b:
        raise MeshConstructionError(f"Interval must satisfy a < b, got ({a}, {b})!")
    if int(n) < 1:
        raise MeshConstructionError(f"Interval mesh needs at least one cell, got {n}!")
    n = int(n)

    vertices = np.linspace(a, b, n + 1).reshape(-1, 1)
    cells = np.stack([np.arange(n), np.arange(1, n + 1)], axis=1).astype(np.int64)
    mesh = Mesh(
        dimension=1,
        vertices=_readonly(vertices),
        cells=_readonly(cells),
        edges=_readonly(np.zeros((0, 2), dtype=np.int64)),
        cell_edges=_readonly(np.zeros((n, 0), dtype=np.int64)),
        edge_cells=_readonly(np.zeros((0, 2), dtype=np.int64)),
        boundary_vertices=_readonly(np.array([0, n], dtype=np.int64)),
        boundary_edges=_readonly(np.zeros(0, dtype=np.int64)),
        h=(b - a) / n,
    )
    logger.debug("Built interval mesh (%s, %s) with %d cells.", a, b, n)
    return mesh


def build_rectangle_mesh(
    x_bounds: Tuple[float, float], y_bounds: Tuple[float, float], n: int
) -> Mesh:
    """
    n x n grid of rectangles, each split by the diagonal from its lower left to its upper right corner.

    :param x_bounds: (x_min, x_max).
    :param y_bounds: (y_min, y_max).
    :param n: Number of subdivisions per axis.
    """
    (x0, x1), (y0, y1) = x_bounds, y_bounds
    if not (x0 < x1 and y0 < y1):
        raise MeshConstructionError(
            f"Rectangle bounds are degenerate: {x_bounds} x {y_bounds}!"
        )
    if int(n) < 1:
        raise MeshConstructionError(f"Rectangle mesh needs n >= 1, got {n}!")
    n = int(n)

    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    grid_x, grid_y = np.meshgrid(xs, ys)  # Row j holds y = ys[j]; vertex j * (n + 1) + i.
    vertices = np.stack([grid_x.reshape(-1), grid_y.reshape(-1)], axis=1)

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.reshape(-1), j.reshape(-1)
    v00 = j * (n + 1) + i
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    lower = np.stack([v00, v10, v11], axis=1)
    upper = np.stack([v00, v11, v01], axis=1)
    cells = np.stack([lower, upper], axis=1).reshape(-1, 3)

    mesh = _assemble_triangle_mesh(vertices, cells)
    logger.debug(
        "Built rectangle mesh %s x %s with n=%d (%d triangles).",
        x_bounds,
        y_bounds,
        n,
        mesh.n_cells,
    )
    return mesh


def _refine_uniformly(
    vertices: np.ndarray, cells: np.ndarray, radius: Optional[float]
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Splits every triangle into four through its edge midpoints.
    When `radius` is given, midpoints of boundary edges are projected onto the circle of that radius.
    """
    mesh = _assemble_triangle_mesh(vertices, cells)
    midpoints = 0.5 * (vertices[mesh.edges[:, 0]] + vertices[mesh.edges[:, 1]])
    if radius is not None and mesh.boundary_edges.size:
        boundary_midpoints = midpoints[mesh.boundary_edges]
        norms = np.linalg.norm(boundary_midpoints, axis=1, keepdims=True)
        midpoints[mesh.boundary_edges] = radius * boundary_midpoints / norms

    n_old = vertices.shape[0]
    new_vertices = np.vstack([vertices, midpoints])
    edge_vertex = n_old + mesh.cell_edges  # (n_cells, 3): midpoint opposite to vertex k.
    a, b, c = cells[:, 0], cells[:, 1], cells[:, 2]
    m_bc, m_ca, m_ab = edge_vertex[:, 0], edge_vertex[:, 1], edge_vertex[:, 2]
    children = np.stack(
        [
            np.stack([a, m_ab, m_ca], axis=1),
            np.stack([m_ab, b, m_bc], axis=1),
            np.stack([m_ca, m_bc, c], axis=1),
            np.stack([m_ab, m_bc, m_ca], axis=1),
        ],
        axis=1,
    ).reshape(-1, 3)
    return new_vertices, children


def build_disk_mesh(radius: float, n_boundary: int, refine_levels: int) -> Mesh:
    """
    Fan triangulation of the inscribed regular polygon, uniformly refined.
    New boundary vertices are projected onto the circle at every refinement.

    :param radius: Disk radius (centered at the origin).
    :param n_boundary: Number of polygon vertices on the circle (at least 6).
    :param refine_levels: Number of uniform refinements.
    """
    if not radius > 0:
        raise MeshConstructionError(f"Disk radius must be positive, got {radius}!")
    if int(n_boundary) < 6:
        raise MeshConstructionError(
            f"Disk mesh needs at least 6 boundary vertices, got {n_boundary}!"
        )
    if int(refine_levels) < 0:
        raise MeshConstructionError(
            f"Refinement levels must be nonnegative, got {refine_levels}!"
        )
    n_boundary = int(n_boundary)

    angles = 2.0 * np.pi * np.arange(n_boundary) / n_boundary
    ring = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    vertices = np.vstack([np.zeros((1, 2)), ring])
    k = np.arange(n_boundary)
    cells = np.stack(
        [np.zeros(n_boundary, dtype=np.int64), 1 + k, 1 + (k + 1) % n_boundary],
        axis=1,
    )

    for _ in range(int(refine_levels)):
        vertices, cells = _refine_uniformly(vertices, cells, radius)

    mesh = _assemble_triangle_mesh(vertices, cells)
    logger.debug(
        "Built disk mesh r=%s with %d boundary vertices, %d refinements (%d triangles).",
        radius,
        n_boundary,
        refine_levels,
        mesh.n_cells,
    )
    return mesh


def validate_mesh(
    mesh: Mesh,
    *,
    shape_ratio_bound: float = MESH_DEFAULT_SHAPE_RATIO_BOUND,
    quasi_uniformity_bound: float = MESH_DEFAULT_QUASI_UNIFORMITY_BOUND,
) -> MeshReport:
    """
    Checks orientation, conformity, shape regularity and quasi-uniformity.
    Never raises, the outcome is the `conforming` flag of the report.

    :param mesh: Mesh to validate.
    :param shape_ratio_bound: Maximal allowed circumradius / inradius.
    :param quasi_uniformity_bound: Maximal allowed max / min cell diameter.
    """
    issues: List[str] = []
    cells = np.asarray(mesh.cells)
    vertices = np.asarray(mesh.vertices)

    measures = _signed_measures(mesh.dimension, vertices, cells)
    if np.any(measures <= 0):
        issues.append(
            f"{int(np.count_nonzero(measures <= 0))} cell(s) with nonpositive signed measure"
        )

    diameters = _cell_diameters(mesh.dimension, vertices, cells)
    min_diameter = float(diameters.min())
    max_diameter = float(diameters.max())
    quasi_uniformity = max_diameter / min_diameter if min_diameter > 0 else np.inf
    if quasi_uniformity > quasi_uniformity_bound:
        issues.append(
            f"quasi-uniformity {quasi_uniformity:.3g} exceeds {quasi_uniformity_bound}"
        )

    worst_shape_ratio = 1.0
    if mesh.dimension == 2:
        ratios = _shape_ratios(vertices, cells)
        worst_shape_ratio = float(ratios.max())
        if worst_shape_ratio > shape_ratio_bound:
            issues.append(
                f"shape ratio {worst_shape_ratio:.3g} exceeds {shape_ratio_bound}"
            )
        issues.extend(_edge_sharing_issues(cells))
        issues.extend(_hanging_vertex_issues(vertices, cells))

    report = MeshReport(
        h=float(mesh.h),
        min_diameter=min_diameter,
        max_diameter=max_diameter,
        worst_shape_ratio=worst_shape_ratio,
        quasi_uniformity=float(quasi_uniformity),
        conforming=not issues,
        issues=issues,
    )
    logger.debug("Mesh validation: %s", report)
    return report


def _edge_sharing_issues(cells: np.ndarray) -> List[str]:
    """
    Every edge must be used once (boundary) or twice with opposite directions (interior).
    """
    directed = {}
    for cell in cells:
        for a, b in LOCAL_EDGES:
            key = (int(cell[a]), int(cell[b]))
            directed[key] = directed.get(key, 0) + 1

    issues = []
    undirected = {}
    for (p, q), count in directed.items():
        if count > 1:
            issues.append(f"edge ({p}, {q}) traversed in the same direction twice")
        undirected[(min(p, q), max(p, q))] = undirected.get((min(p, q), max(p, q)), 0) + count
    overshared = [edge for edge, count in undirected.items() if count > 2]
    if overshared:
        issues.append(f"{len(overshared)} edge(s) shared by more than two cells")
    return issues


def _hanging_vertex_issues(vertices: np.ndarray, cells: np.ndarray) -> List[str]:
    """
    A vertex strictly inside an edge used by a single cell is a hanging node.
    """
    counts = {}
    for cell in cells:
        for a, b in LOCAL_EDGES:
            key = (min(int(cell[a]), int(cell[b])), max(int(cell[a]), int(cell[b])))
            counts[key] = counts.get(key, 0) + 1

    issues = []
    for (p, q), count in sorted(counts.items()):
        if count != 1:
            continue
        start = vertices[p]
        direction = vertices[q] - start
        length_squared = float(direction @ direction)
        offsets = vertices - start
        cross = direction[0] * offsets[:, 1] - direction[1] * offsets[:, 0]
        along = offsets @ direction / length_squared
        on_edge = (np.abs(cross) <= MESH_COLLINEAR_TOLERANCE * length_squared) & (along > 0.0) & (along < 1.0)
        on_edge[[p, q]] = False
        for vertex in np.flatnonzero(on_edge):
            issues.append(f"hanging vertex {int(vertex)} on edge ({p}, {q})")
    return issues


def dump_mesh(mesh: Mesh, path: str) -> None:
    """
    Writes the mesh in the plain text format documented in the README.

    :param mesh: Mesh to write.
    :param path: Destination path (written atomically).
    """

    def write(stream) -> None:
        stream.write("# vmm-solver mesh\n")
        stream.write(f"dimension {mesh.dimension}\n")
        stream.write(f"h {float(mesh.h)!r}\n")
        stream.write(f"vertices {mesh.n_vertices}\n")
        for index, point in enumerate(mesh.vertices):
            coordinates = " ".join(repr(float(value)) for value in point)
            stream.write(f"{index} {coordinates}\n")
        stream.write(f"cells {mesh.n_cells}\n")
        for index, cell in enumerate(mesh.cells):
            stream.write(f"{index} " + " ".join(str(int(v)) for v in cell) + "\n")
        stream.write(f"boundary_vertices {mesh.boundary_vertices.size}\n")
        for vertex in mesh.boundary_vertices:
            stream.write(f"{int(vertex)}\n")
        stream.write(f"boundary_edges {mesh.boundary_edges.size}\n")
        for edge in mesh.boundary_edges:
            p, q = mesh.edges[edge]
            stream.write(f"{int(edge)} {int(p)} {int(q)}\n")

    atomic_write_text(path, write)
    logger.info("Mesh written to %s.", path)


def locate_points(mesh: Mesh, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Finds the owning cell of every point.

    Returns `(cell_indices, reference_coordinates)`; points outside the mesh get cell -1.
    Reference coordinates are t in [0, 1] (1-D) or (s, t) with x = p0 + s (p1 - p0) + t (p2 - p0) (2-D).

    :param mesh: Mesh to search.
    :param points: Array of shape (n_points, dimension).
    """
    points = np.asarray(points, dtype=float).reshape(-1, mesh.dimension)
    n_points = points.shape[0]
    owners = np.full(n_points, -1, dtype=np.int64)
    reference = np.zeros((n_points, mesh.dimension))

    if mesh.dimension == 1:
        nodes = mesh.vertices[:, 0]
        x = points[:, 0]
        position = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, mesh.n_cells - 1)
        left, right = nodes[position], nodes[position + 1]
        t = (x - left) / (right - left)
        inside = (t >= -_LOCATE_TOLERANCE) & (t <= 1 + _LOCATE_TOLERANCE)
        owners[inside] = position[inside]
        reference[inside, 0] = np.clip(t[inside], 0.0, 1.0)
        return owners, reference

    corners = mesh.vertices[mesh.cells]  # (n_cells, 3, 2)
    centroids = corners.mean(axis=1)
    tree = cKDTree(centroids)
    n_neighbours = min(mesh.n_cells, 12)
    _, candidates = tree.query(points, k=n_neighbours)
    candidates = np.asarray(candidates).reshape(n_points, n_neighbours)

    for point_index, point in enumerate(points):
        cell_index, st = _find_owner(corners, point, candidates[point_index])
        if cell_index < 0:
            cell_index, st = _find_owner(corners, point, range(mesh.n_cells))
        if cell_index >= 0:
            owners[point_index] = cell_index
            reference[point_index] = st
    return owners, reference


def _find_owner(corners: np.ndarray, point: np.ndarray, candidates) -> Tuple[int, np.ndarray]:
    for cell_index in candidates:
        p0, p1, p2 = corners[cell_index]
        jacobian = np.column_stack([p1 - p0, p2 - p0])
        s, t = np.linalg.solve(jacobian, point - p0)
        if (
            s >= -_LOCATE_TOLERANCE
            and t >= -_LOCATE_TOLERANCE
            and s + t <= 1 + _LOCATE_TOLERANCE
        ):
            return int(cell_index), np.array([s, t])
    return -1, np.zeros(2)


__all__ = [
    "Mesh",
    "MeshReport",
    "LOCAL_EDGES",
    "build_interval_mesh",
    "build_rectangle_mesh",
    "build_disk_mesh",
    "validate_mesh",
    "dump_mesh",
    "locate_points",
]
