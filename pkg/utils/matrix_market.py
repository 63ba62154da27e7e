"""
MatrixMarket export of assembled stiffness matrices
"""
import scipy.io
import scipy.sparse as sp


def export_matrix(matrix, path):
    """Write the symmetric matrix in coordinate MatrixMarket format (lower triangle stored)"""
    try:
        scipy.io.mmwrite(path, sp.coo_matrix(matrix), symmetry="symmetric")
    except OSError as e:
        raise OSError(f"cannot write matrix file {path}: {e}") from e
    return path
