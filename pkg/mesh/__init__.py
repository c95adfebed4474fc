from .annulus import (
    AnnulusMeshSpec,
    Edge,
    EdgeKind,
    Mesh,
    MeshConstructionError,
    balanced_sectors,
    build_annulus_mesh,
    dump_mesh,
    mesh_for_target_h,
    minimal_enclosing_diameter,
)
from .quadrature import QuadratureRule, annulus_l2_quadrature, edge_quadrature, gauss_legendre
