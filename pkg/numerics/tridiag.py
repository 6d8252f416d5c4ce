from typing import Literal

import numpy as np

EndKind = Literal["neumann", "dirichlet"]


def banded_operator(n: int, diag: float, off: float, left: EndKind, right: EndKind) -> np.ndarray:
    """(1, 1)-banded storage of diag*I + off*(shift_left + shift_right) with ghost-node ends.

    A Neumann end reflects the ghost node, doubling the inward coupling. A Dirichlet end
    becomes an identity row so the caller pins that node through the right-hand side.
    """
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1, :] = diag
    ab[2, :-1] = off
    if left == "neumann":
        ab[0, 1] = 2.0 * off
    else:
        ab[1, 0] = 1.0
        ab[0, 1] = 0.0
    if right == "neumann":
        ab[2, n - 2] = 2.0 * off
    else:
        ab[1, n - 1] = 1.0
        ab[2, n - 2] = 0.0
    return ab


def symmetric_laplacian(n: int, length: float, kind: Literal["mixed", "dirichlet"]):
    """Symmetrized second-difference matrix on the unknowns of an n-node grid over `length`.

    Returns (diag, offdiag, index) where `index` selects the unknown nodes. The mixed case
    keeps nodes 0..n-2 (Neumann ghost at 0, Dirichlet at n-1) and rescales node 0 by sqrt(2)
    so the ghost doubling becomes symmetric.
    """
    dx = length / (n - 1)
    inv = 1.0 / (dx * dx)
    if kind == "mixed":
        index = np.arange(0, n - 1)
        off = np.full(index.size - 1, inv)
        off[0] = np.sqrt(2.0) * inv
    else:
        index = np.arange(1, n - 1)
        off = np.full(index.size - 1, inv)
    diag = np.full(index.size, -2.0 * inv)
    return diag, off, index


def symmetrizer(n_unknowns: int, kind: Literal["mixed", "dirichlet"]) -> np.ndarray:
    """Diagonal D with D^-1 A D symmetric; u = D w maps symmetric coordinates back to nodal values."""
    d = np.ones(n_unknowns)
    if kind == "mixed":
        d[0] = np.sqrt(2.0)
    return d
