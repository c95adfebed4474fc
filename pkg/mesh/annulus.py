"""
Structured curved-edge triangulation of the annulus a <= r <= R.

Nodes sit at r_i = a + (R - a) i / L, theta_j = 2 pi j / S. Every polar
cell (i, j) is split along the diagonal P(i, j) -> P(i+1, j+1) into

    A = (P(i, j), P(i, j+1), P(i+1, j+1))    id 2 (i S + j)
    B = (P(i, j), P(i+1, j+1), P(i+1, j))    id 2 (i S + j) + 1

Edges on r = a and r = R are exact polar arcs, all other edges are straight.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from config.settings import QUADRATURE_CONFIG
from logging_config.logger import get_logger

logger = get_logger(__name__)


class MeshConstructionError(ValueError):
    """Raised for degenerate mesh specifications."""


class EdgeKind(str, Enum):
    """Skeleton classes."""
    INTERIOR = "interior"
    DIRICHLET = "dirichlet"
    ARTIFICIAL = "artificial"


class AnnulusMeshSpec(BaseModel):
    """Structured annulus mesh parameters."""
    model_config = {"frozen": True}

    a: float = Field(gt=0, description="Scatterer radius")
    R: float = Field(gt=0, description="Artificial boundary radius")
    n_layers: int = Field(ge=1, description="Radial layers")
    n_sectors: int = Field(ge=3, description="Angular sectors")

    @model_validator(mode="after")
    def _check_radii(self):
        if not self.a < self.R:
            raise ValueError(f"Need a < R, got a={self.a}, R={self.R}")
        return self


@dataclass(frozen=True)
class Edge:
    """
    One edge of the skeleton.

    The normal convention is outward from elements[0]. Arcs carry their
    radius and angular range (theta_range[1] > theta_range[0]); straight
    edges carry a constant unit normal.
    """
    index: int
    kind: EdgeKind
    elements: Tuple[int, ...]
    vertices: Tuple[int, int]
    start: np.ndarray
    end: np.ndarray
    radius: Optional[float] = None
    theta_range: Optional[Tuple[float, float]] = None
    normal: Optional[np.ndarray] = None

    @property
    def is_arc(self) -> bool:
        return self.radius is not None

    @property
    def normal_sign(self) -> float:
        """+1 when the arc normal points away from the origin."""
        return -1.0 if self.kind == EdgeKind.DIRICHLET else 1.0

    @property
    def length(self) -> float:
        if self.is_arc:
            return self.radius * (self.theta_range[1] - self.theta_range[0])
        return float(np.linalg.norm(self.end - self.start))

    def normal_at(self, points: np.ndarray) -> np.ndarray:
        """Unit normals (n, 2) at points on the edge."""
        points = np.atleast_2d(points)
        if self.is_arc:
            radial = points / np.linalg.norm(points, axis=1, keepdims=True)
            return self.normal_sign * radial
        return np.tile(self.normal, (points.shape[0], 1))


@dataclass(frozen=True)
class Mesh:
    """
    Immutable annulus triangulation.

    Attributes:
        spec: Construction parameters
        vertices: Node coordinates (n_vertices, 2)
        elements: Vertex triples (n_elements, 3)
        edges: Skeleton edges
        element_edges: Edge indices per element
        element_diameters: Minimal enclosing circle diameter per element
        h: Mesh width, max of element_diameters
    """
    spec: AnnulusMeshSpec
    vertices: np.ndarray
    elements: np.ndarray
    edges: List[Edge]
    element_edges: List[Tuple[int, ...]]
    element_diameters: np.ndarray
    h: float
    radii: np.ndarray = field(repr=False)

    @property
    def n_elements(self) -> int:
        return int(self.elements.shape[0])

    @property
    def delta_theta(self) -> float:
        return 2.0 * math.pi / self.spec.n_sectors

    def edges_of_kind(self, kind: EdgeKind) -> List[Edge]:
        return [edge for edge in self.edges if edge.kind == kind]

    def edge_counts(self) -> Dict[str, int]:
        counts = {kind.value: 0 for kind in EdgeKind}
        for edge in self.edges:
            counts[edge.kind.value] += 1
        return counts

    def boundary_elements(self, kind: EdgeKind) -> np.ndarray:
        """Sorted ids of elements owning an edge of the given boundary kind."""
        return np.array(sorted({edge.elements[0] for edge in self.edges_of_kind(kind)}), dtype=int)

    def locate(self, points: np.ndarray, tolerance: float = 1e-12) -> np.ndarray:
        """
        Element containing each point, by ring/sector arithmetic.

        Args:
            points: (n, 2) coordinates with a <= |x| <= R
            tolerance: Relative slack on the radial bounds

        Returns:
            Element ids (n,)

        Raises:
            ValueError: A point lies outside the annulus
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        spec = self.spec
        S, L = spec.n_sectors, spec.n_layers
        r = np.hypot(points[:, 0], points[:, 1])
        if np.any(r < spec.a * (1.0 - tolerance)) or np.any(r > spec.R * (1.0 + tolerance)):
            raise ValueError("Point outside the annulus")

        dtheta = self.delta_theta
        theta = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2.0 * math.pi)
        sector = np.minimum((theta / dtheta).astype(int), S - 1)

        # chords of ring i sit at chordal radius r_i along the sector bisector
        mid = (sector + 0.5) * dtheta
        chordal = (points[:, 0] * np.cos(mid) + points[:, 1] * np.sin(mid)) / math.cos(0.5 * dtheta)
        ring = np.clip(np.searchsorted(self.radii, chordal, side="right") - 1, 0, L - 1)

        base = self.vertices[ring * S + sector]
        upper = self.vertices[(ring + 1) * S + (sector + 1) % S]
        side = self.vertices[ring * S + (sector + 1) % S]
        diagonal = upper - base
        point_side = diagonal[:, 0] * (points[:, 1] - base[:, 1]) - diagonal[:, 1] * (points[:, 0] - base[:, 0])
        a_side = diagonal[:, 0] * (side[:, 1] - base[:, 1]) - diagonal[:, 1] * (side[:, 0] - base[:, 0])
        in_a = point_side * a_side >= 0.0
        return 2 * (ring * S + sector) + np.where(in_a, 0, 1)


# ============================================================================
# ENCLOSING CIRCLES
# ============================================================================

def _circle_from_diameter(p: np.ndarray, q: np.ndarray) -> Tuple[np.ndarray, float]:
    centre = 0.5 * (p + q)
    return centre, float(np.linalg.norm(p - centre))


def _circumcircle(p, q, r) -> Optional[Tuple[np.ndarray, float]]:
    d = 2.0 * (p[0] * (q[1] - r[1]) + q[0] * (r[1] - p[1]) + r[0] * (p[1] - q[1]))
    if d == 0.0:
        return None
    sp, sq, sr = p @ p, q @ q, r @ r
    centre = np.array([
        (sp * (q[1] - r[1]) + sq * (r[1] - p[1]) + sr * (p[1] - q[1])) / d,
        (sp * (r[0] - q[0]) + sq * (p[0] - r[0]) + sr * (q[0] - p[0])) / d,
    ])
    return centre, float(np.linalg.norm(p - centre))


def _inside(circle, point, slack: float = 1e-12) -> bool:
    centre, radius = circle
    return float(np.linalg.norm(point - centre)) <= radius * (1.0 + slack) + slack


def _cross(p, q, r) -> float:
    return float((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))


def _circle_two_points(points, p, q):
    circle = _circle_from_diameter(p, q)
    left = right = None
    for r in points:
        if _inside(circle, r):
            continue
        cross = _cross(p, q, r)
        candidate = _circumcircle(p, q, r)
        if candidate is None:
            continue
        if cross > 0.0 and (left is None or _cross(p, q, candidate[0]) > _cross(p, q, left[0])):
            left = candidate
        elif cross < 0.0 and (right is None or _cross(p, q, candidate[0]) < _cross(p, q, right[0])):
            right = candidate
    if left is None and right is None:
        return circle
    if left is None:
        return right
    if right is None:
        return left
    return left if left[1] <= right[1] else right


def _circle_one_point(points, p):
    circle = (p, 0.0)
    for i, q in enumerate(points):
        if not _inside(circle, q):
            if circle[1] == 0.0:
                circle = _circle_from_diameter(p, q)
            else:
                circle = _circle_two_points(points[: i + 1], p, q)
    return circle


def minimal_enclosing_diameter(points: np.ndarray, seed: int = 0) -> float:
    """Diameter of the smallest circle containing all points (incremental Welzl)."""
    order = np.random.default_rng(seed).permutation(len(points))
    shuffled = np.asarray(points, dtype=float)[order]
    circle = None
    for i, p in enumerate(shuffled):
        if circle is None or not _inside(circle, p):
            circle = _circle_one_point(shuffled[: i + 1], p)
    return 2.0 * circle[1]


def _arc_points(radius: float, theta0: float, theta1: float, n: int) -> np.ndarray:
    theta = np.linspace(theta0, theta1, n)
    return radius * np.column_stack([np.cos(theta), np.sin(theta)])


def _ring_diameters(a: float, R: float, n_layers: int, n_sectors: int) -> np.ndarray:
    """Diameters of elements A and B in sector 0 of every ring, shape (L, 2)."""
    radii = a + (R - a) * np.arange(n_layers + 1) / n_layers
    dtheta = 2.0 * math.pi / n_sectors
    samples = QUADRATURE_CONFIG["arc_samples"]
    diameters = np.empty((n_layers, 2))
    for i in range(n_layers):
        p00 = radii[i] * np.array([1.0, 0.0])
        p01 = radii[i] * np.array([math.cos(dtheta), math.sin(dtheta)])
        p10 = radii[i + 1] * np.array([1.0, 0.0])
        p11 = radii[i + 1] * np.array([math.cos(dtheta), math.sin(dtheta)])
        points_a = [np.array([p00, p01, p11])]
        points_b = [np.array([p00, p11, p10])]
        if i == 0:
            points_a.append(_arc_points(a, 0.0, dtheta, samples))
        if i == n_layers - 1:
            points_b.append(_arc_points(R, 0.0, dtheta, samples))
        diameters[i, 0] = minimal_enclosing_diameter(np.vstack(points_a))
        diameters[i, 1] = minimal_enclosing_diameter(np.vstack(points_b))
    return diameters


# ============================================================================
# CONSTRUCTION
# ============================================================================

def _straight_edge(index, kind, elements, vertices, coords, element_nodes) -> Edge:
    start, end = coords[vertices[0]], coords[vertices[1]]
    tangent = end - start
    normal = np.array([tangent[1], -tangent[0]]) / np.linalg.norm(tangent)
    centroid = coords[element_nodes[elements[0]]].mean(axis=0)
    if normal @ (0.5 * (start + end) - centroid) < 0.0:
        normal = -normal
    return Edge(
        index=index,
        kind=kind,
        elements=tuple(elements),
        vertices=tuple(vertices),
        start=start,
        end=end,
        normal=normal,
    )


def build_annulus_mesh(spec: AnnulusMeshSpec) -> Mesh:
    """
    Build the structured annulus triangulation.

    Args:
        spec: Radii, layers and sectors

    Returns:
        Mesh with 2 * n_layers * n_sectors elements and (3L + 1) S edges

    Raises:
        MeshConstructionError: Skeleton does not close every element
    """
    L, S = spec.n_layers, spec.n_sectors
    radii = spec.a + (spec.R - spec.a) * np.arange(L + 1) / L
    dtheta = 2.0 * math.pi / S
    theta = dtheta * np.arange(S)

    def node(i: int, j: int) -> int:
        return i * S + j % S

    coords = np.column_stack([
        np.repeat(radii, S) * np.tile(np.cos(theta), L + 1),
        np.repeat(radii, S) * np.tile(np.sin(theta), L + 1),
    ])

    elements = np.empty((2 * L * S, 3), dtype=int)
    for i in range(L):
        for j in range(S):
            cell = 2 * (i * S + j)
            elements[cell] = (node(i, j), node(i, j + 1), node(i + 1, j + 1))
            elements[cell + 1] = (node(i, j), node(i + 1, j + 1), node(i + 1, j))

    def elem_a(i: int, j: int) -> int:
        return 2 * (i * S + j % S)

    def elem_b(i: int, j: int) -> int:
        return 2 * (i * S + j % S) + 1

    edges: List[Edge] = []
    for j in range(S):
        arc = (float(theta[j]), float(theta[j] + dtheta))
        edges.append(Edge(
            index=len(edges), kind=EdgeKind.DIRICHLET, elements=(elem_a(0, j),),
            vertices=(node(0, j), node(0, j + 1)),
            start=coords[node(0, j)], end=coords[node(0, j + 1)],
            radius=float(spec.a), theta_range=arc,
        ))
        edges.append(Edge(
            index=len(edges), kind=EdgeKind.ARTIFICIAL, elements=(elem_b(L - 1, j),),
            vertices=(node(L, j), node(L, j + 1)),
            start=coords[node(L, j)], end=coords[node(L, j + 1)],
            radius=float(spec.R), theta_range=arc,
        ))

    for i in range(L):
        for j in range(S):
            if i > 0:
                edges.append(_straight_edge(
                    len(edges), EdgeKind.INTERIOR, (elem_b(i - 1, j), elem_a(i, j)),
                    (node(i, j), node(i, j + 1)), coords, elements,
                ))
            edges.append(_straight_edge(
                len(edges), EdgeKind.INTERIOR, (elem_b(i, j), elem_a(i, j - 1)),
                (node(i, j), node(i + 1, j)), coords, elements,
            ))
            edges.append(_straight_edge(
                len(edges), EdgeKind.INTERIOR, (elem_a(i, j), elem_b(i, j)),
                (node(i, j), node(i + 1, j + 1)), coords, elements,
            ))

    incidence: List[List[int]] = [[] for _ in range(2 * L * S)]
    for edge in edges:
        for element in edge.elements:
            incidence[element].append(edge.index)
    if any(len(found) != 3 for found in incidence):
        raise MeshConstructionError("Skeleton does not close every element")

    ring_diameters = _ring_diameters(spec.a, spec.R, L, S)
    # congruent under rotation, so sector 0 stands for the whole ring
    diameters = np.broadcast_to(ring_diameters[:, None, :], (L, S, 2)).reshape(-1).copy()
    h = float(diameters.max())

    mesh = Mesh(
        spec=spec,
        vertices=coords,
        elements=elements,
        edges=edges,
        element_edges=[tuple(found) for found in incidence],
        element_diameters=diameters,
        h=h,
        radii=radii,
    )
    logger.info(
        f"Annulus mesh built: layers={L}, sectors={S}, elements={mesh.n_elements}, "
        f"edges={len(edges)}, h={h:.4f}"
    )
    logger.debug(f"Edge counts: {mesh.edge_counts()}")
    return mesh


def balanced_sectors(a: float, R: float, n_layers: int) -> int:
    """Sector count making the outer arc spacing match the radial spacing."""
    return max(3, int(round(2.0 * math.pi * R * n_layers / (R - a))))


def mesh_for_target_h(a: float, R: float, h_target: float, max_layers: int = 200) -> AnnulusMeshSpec:
    """
    Coarsest balanced structured mesh whose width does not exceed h_target.

    Raises:
        MeshConstructionError: Target not reached within max_layers
    """
    if h_target <= 0.0:
        raise MeshConstructionError(f"h_target must be positive, got {h_target}")
    for layers in range(1, max_layers + 1):
        sectors = balanced_sectors(a, R, layers)
        achieved = float(_ring_diameters(a, R, layers, sectors).max())
        if achieved <= h_target:
            logger.debug(f"Target h={h_target} met by layers={layers}, sectors={sectors}, h={achieved:.4f}")
            return AnnulusMeshSpec(a=a, R=R, n_layers=layers, n_sectors=sectors)
    raise MeshConstructionError(f"No mesh with <= {max_layers} layers reaches h={h_target}")


def dump_mesh(mesh: Mesh, path: Path) -> Path:
    """
    Write a line-oriented listing of the mesh.

    Layout:
        # pwdg annulus mesh a=<a> R=<R> layers=<L> sectors=<S> h=<h>
        # nodes <count>          then "index x y"
        # elements <count>       then "index v0 v1 v2 diameter"
        # edges <count>          then "index kind e0 [e1] v0 v1 [radius theta0 theta1]"
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    spec = mesh.spec
    lines = [
        f"# pwdg annulus mesh a={spec.a} R={spec.R} layers={spec.n_layers} "
        f"sectors={spec.n_sectors} h={mesh.h:.12e}",
        f"# nodes {mesh.vertices.shape[0]}",
    ]
    lines += [f"{i} {x:.15e} {y:.15e}" for i, (x, y) in enumerate(mesh.vertices)]
    lines.append(f"# elements {mesh.n_elements}")
    lines += [
        f"{i} {v[0]} {v[1]} {v[2]} {mesh.element_diameters[i]:.12e}"
        for i, v in enumerate(mesh.elements)
    ]
    lines.append(f"# edges {len(mesh.edges)}")
    for edge in mesh.edges:
        owners = " ".join(str(e) for e in edge.elements)
        line = f"{edge.index} {edge.kind.value} {owners} {edge.vertices[0]} {edge.vertices[1]}"
        if edge.is_arc:
            line += f" {edge.radius:.15e} {edge.theta_range[0]:.15e} {edge.theta_range[1]:.15e}"
        lines.append(line)
    path.write_text("\n".join(lines) + "\n")
    logger.info(f"Mesh written to {path}")
    return path
