"""
Mesh command - export adapted meshes as legacy VTK
"""
import logging
import os

from fem import FiniteElementSpace, build_mesh
from utils.vtk_export import export_vtk
from .examples import build_example
from .options import add_common_arguments
from .runner import ExperimentConfig, make_grid

logger = logging.getLogger(__name__)


def export_mesh(cfg: ExperimentConfig, h: float, delta: float):
    """Write the mesh for (h, delta) with the nodal interpolant of the exact solution as u_h"""
    example = build_example(cfg.example, cfg.shift(h, delta))
    mesh = build_mesh(make_grid(h), example.level_set)
    space = FiniteElementSpace(mesh)
    spec = example.problem
    values = space.interpolate(lambda x: spec.exact(spec.level_set.side(x), x))
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, f"mesh_{cfg.example}_h{1.0 / h:g}_d{delta:g}.vtk")
    export_vtk(mesh, space, values, path)
    logger.info("wrote %s (PN=%d, n_l=%d)", path, mesh.PN, mesh.n_l)
    return mesh, path


class Mesh:
    name = "mesh"
    defaults = {"example": "circle", "h": "1/32", "delta": 0.0}

    def __init__(self, subparsers):
        parser = subparsers.add_parser(self.name, help="write the adapted mesh as legacy VTK")
        add_common_arguments(parser)
        parser.set_defaults(command=self)

    def run(self, cfg: ExperimentConfig):
        for h in cfg.h_list:
            for delta in cfg.deltas():
                mesh, path = export_mesh(cfg, h, delta)
                print(f"✅ {path}: PN={mesh.PN}, n_l={mesh.n_l}, fallback patches={mesh.n_fallback_patches}")
        return []


def setup(subparsers):
    return Mesh(subparsers)
