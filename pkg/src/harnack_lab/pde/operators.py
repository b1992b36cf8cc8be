"""
Sparse finite-difference operators with reflecting (homogeneous Neumann)
boundaries, and assembly of L = 1/2 sum a_ij d_ij + sum b_i d_i at the nodes.
"""
import numpy as np
import scipy.sparse as sp

from harnack_lab.errors import PreconditionError
from harnack_lab.fields.coefficient_field import CoefficientField, FieldKind
from harnack_lab.pde.grid import SpaceTimeGrid

ELLIPTICITY_FLOOR = 1e-12


def first_difference(M: int, h: float) -> sp.csr_matrix:
    upper = np.full(M - 1, 1.0 / (2.0 * h))
    upper[0] = 0.0
    lower = np.full(M - 1, -1.0 / (2.0 * h))
    lower[-1] = 0.0
    return sp.diags([lower, upper], [-1, 1], shape=(M, M), format="csr")


def second_difference(M: int, h: float) -> sp.csr_matrix:
    main = np.full(M, -2.0 / h ** 2)
    upper = np.full(M - 1, 1.0 / h ** 2)
    lower = np.full(M - 1, 1.0 / h ** 2)
    # ghost node mirrored across the boundary
    upper[0] = 2.0 / h ** 2
    lower[-1] = 2.0 / h ** 2
    return sp.diags([lower, main, upper], [-1, 0, 1], shape=(M, M), format="csr")


class DifferenceStencils:
    """Partial derivative matrices on the flattened ('ij' ordered) node vector."""

    def __init__(self, grid: SpaceTimeGrid):
        M, h, d = grid.nodes, grid.h, grid.dimension
        D1, D2, I = first_difference(M, h), second_difference(M, h), sp.identity(M, format="csr")
        if d == 1:
            self.first = [D1]
            self.second = {(0, 0): D2}
        else:
            self.first = [sp.kron(D1, I, format="csr"), sp.kron(I, D1, format="csr")]
            self.second = {
                (0, 0): sp.kron(D2, I, format="csr"),
                (1, 1): sp.kron(I, D2, format="csr"),
                (0, 1): sp.kron(D1, D1, format="csr"),
            }
        self.size = grid.size
        self.dimension = d


def node_covariance(a: CoefficientField, t: float, nodes: np.ndarray) -> np.ndarray:
    A = a.checked_batch(t, nodes)
    if a.kind != FieldKind.MATRIX:
        raise PreconditionError(f"{a.name} is not a matrix field")
    A = 0.5 * (A + np.swapaxes(A, 1, 2))
    smallest = float(np.linalg.eigvalsh(A).min())
    if smallest <= ELLIPTICITY_FLOOR:
        raise PreconditionError(f"{a.name} is not elliptic on the grid (smallest eigenvalue {smallest:.3g})")
    return A


def generator_matrix(stencils: DifferenceStencils, A: np.ndarray, B: np.ndarray | None) -> sp.csr_matrix:
    """L u = 1/2 sum_ij a_ij d_ij u + sum_i b_i d_i u, a and b given per node."""
    d = stencils.dimension
    L = sp.csr_matrix((stencils.size, stencils.size))
    for i in range(d):
        L = L + sp.diags(0.5 * A[:, i, i]) @ stencils.second[(i, i)]
        for j in range(i + 1, d):
            # a_ij d_ij appears twice in the symmetric sum
            L = L + sp.diags(A[:, i, j]) @ stencils.second[(i, j)]
        if B is not None:
            L = L + sp.diags(B[:, i]) @ stencils.first[i]
    return L.tocsc()


def covariance_field(sigma: CoefficientField) -> CoefficientField:
    """a = sigma sigma^T as a matrix field."""

    def evaluate(t: float, X: np.ndarray) -> np.ndarray:
        S = sigma.batch(t, X)
        return S @ np.swapaxes(S, 1, 2)

    bound = None if sigma.sup_norm is None else sigma.sup_norm ** 2
    return CoefficientField(sigma.dimension, FieldKind.MATRIX, evaluate, sigma.regularity,
                            name=f"a[{sigma.name}]", horizon=sigma.horizon, sup_norm=bound,
                            time_dependent=sigma.time_dependent, constant=sigma.constant)
