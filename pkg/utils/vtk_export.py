"""
Legacy ASCII VTK output for adapted patch meshes

Uncut sub-quads are written as VTK_QUAD through their four corners,
straight and fallback sub-triangles as VTK_TRIANGLE, curved ones as
VTK_QUADRATIC_TRIANGLE with the node order v0, v1, v2, m01, m12, m20.
"""
import numpy as np
import vtk

from fem import Curvature

# corners of a biquadratic quad in a + 3 b numbering, counter-clockwise
QUAD_CORNERS = [0, 2, 8, 6]


def mesh_cells(space):
    """(connectivity, cell types, side, curvature) of all sub-elements"""
    cells, types, side, curvature = [], [], [], []
    quads = space.quads
    for dofs, s in zip(quads.dofs.tolist(), quads.side.tolist()):
        cells.append([dofs[k] for k in QUAD_CORNERS])
        types.append(vtk.VTK_QUAD)
        side.append(s)
        curvature.append(int(Curvature.STRAIGHT))
    triangles = space.triangles
    for dofs, s, c in zip(triangles.dofs.tolist(), triangles.side.tolist(), triangles.curvature.tolist()):
        if c == Curvature.QUADRATIC:
            cells.append(dofs)
            types.append(vtk.VTK_QUADRATIC_TRIANGLE)
        else:
            cells.append(dofs[:3])
            types.append(vtk.VTK_TRIANGLE)
        side.append(s)
        curvature.append(int(c))
    return cells, types, side, curvature


def _int_array(name, values):
    array = vtk.vtkIntArray()
    array.SetName(name)
    for v in values:
        array.InsertNextValue(int(v))
    return array


def build_grid(space, solution):
    """vtkUnstructuredGrid with the sub-elements, their side and curvature, and u_h at the nodes"""
    coords = np.asarray(space.node_coordinates, dtype=float)
    solution = np.asarray(solution, dtype=float)
    if len(solution) != len(coords):
        raise ValueError(f"solution has {len(solution)} values for {len(coords)} nodes")

    points = vtk.vtkPoints()
    points.SetDataTypeToDouble()
    points.Allocate(len(coords))
    for x, y in coords.tolist():
        points.InsertNextPoint(x, y, 0.0)

    grid = vtk.vtkUnstructuredGrid()
    grid.SetPoints(points)
    cells, types, side, curvature = mesh_cells(space)
    grid.Allocate(len(cells))
    for cell, cell_type in zip(cells, types):
        nodes = vtk.vtkIdList()
        for node in cell:
            nodes.InsertNextId(int(node))
        grid.InsertNextCell(cell_type, nodes)

    grid.GetCellData().AddArray(_int_array("side", side))
    grid.GetCellData().AddArray(_int_array("curvature", curvature))
    values = vtk.vtkDoubleArray()
    values.SetName("u_h")
    for v in solution.tolist():
        values.InsertNextValue(v)
    grid.GetPointData().AddArray(values)
    return grid


def _writer(grid, title):
    writer = vtk.vtkUnstructuredGridWriter()
    writer.SetInputData(grid)
    writer.SetHeader(title)
    writer.SetFileTypeToASCII()
    return writer


def vtk_text(mesh, space, solution, title="lmfem adapted patch mesh"):
    writer = _writer(build_grid(space, solution), title)
    writer.WriteToOutputStringOn()
    writer.Write()
    return writer.GetOutputString()


def export_vtk(mesh, space, solution, path):
    """
    Write mesh and nodal values to a legacy VTK file

    Raises:
        OSError: with the path in the message
    """
    writer = _writer(build_grid(space, solution), "lmfem adapted patch mesh")
    writer.SetFileName(str(path))
    if writer.Write() != 1:
        raise OSError(f"cannot write VTK file {path}")
    return path
