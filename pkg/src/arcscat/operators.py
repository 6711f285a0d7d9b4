"""Dense Nystrom matrices of the weighted boundary integral operators.

Layout is component-major: rows and columns are ordered (u1 at every node,
u2 at every node, p at every node), so a 3N x 3N matrix has 3 x 3 blocks of
size N x N.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import ArcParametrization
from .kernels import BLOCKS, KernelCoefficients, PairGeometry, SplitEvaluator, build_regularized_family
from .medium import MediumParams, WaveNumbers
from .quadrature import ChebyshevGrid, log_weights, tangential_derivative_ops

TAGS = ("I", "V1w", "V2w", "V3w", "V4w", "V2wV1w", "V4wV3w")
_COMPOSITIONS = {("V2w", "V1w"): "V2wV1w", ("V4w", "V3w"): "V4wV3w"}
_MAGIC = b"ARCS"


@dataclass(frozen=True)
class DiscreteOperator:
    matrix: np.ndarray = field(repr=False)
    grid: ChebyshevGrid
    tag: str

    def __post_init__(self):
        n = 3 * self.grid.n_points
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match 3N = {n}")
        if self.tag not in TAGS:
            raise ValueError(f"unknown operator tag {self.tag!r}")

    def __matmul__(self, x):
        return self.matrix @ x

    def block(self, r: int, c: int) -> np.ndarray:
        n = self.grid.n_points
        return self.matrix[r * n:(r + 1) * n, c * n:(c + 1) * n]


def identity_operator(grid: ChebyshevGrid) -> DiscreteOperator:
    return DiscreteOperator(np.eye(3 * grid.n_points, dtype=complex), grid, "I")


def _assemble_family(which: str, m: MediumParams, w: WaveNumbers | None,
                     arc: ArcParametrization, grid: ChebyshevGrid) -> np.ndarray:
    n = grid.n_points
    coef = KernelCoefficients.of(m, w)
    ev = SplitEvaluator(coef, PairGeometry.grid(arc, grid.nodes))
    R = log_weights(n).matrix
    jac = arc.jacobian(grid.nodes)
    sin = np.sin(grid.angles)
    col_factor = {p: (np.pi / n) * jac * sin ** p for p in (0, 2)}
    ops = tangential_derivative_ops(arc, grid)
    left_ops = {None: None, "Ds": ops.ds}
    right_ops = {None: None, "Dsw": ops.dsw}

    # sum kernel matrices sharing the same (entry, left, right) before applying derivatives
    groups: dict = {}
    for term in build_regularized_family(which, m, coef.w):
        s = term.kernel(ev)
        rows, cols = BLOCKS[term.block]
        f = col_factor[term.sin_power][None, :]
        for a in range(rows.stop - rows.start):
            for b in range(cols.stop - cols.start):
                mat = (s.one[:, :, a, b] * R + s.two[:, :, a, b]) * f
                key = (rows.start + a, cols.start + b, term.left, term.right)
                groups[key] = groups[key] + mat if key in groups else mat

    out = np.zeros((3 * n, 3 * n), dtype=complex)
    for (r, c, left, right), mat in groups.items():
        if left is not None:
            mat = left_ops[left] @ mat
        if right is not None:
            mat = mat @ right_ops[right]
        out[r * n:(r + 1) * n, c * n:(c + 1) * n] += mat
    return out


def assemble_v1w(m: MediumParams, w: WaveNumbers | None, arc: ArcParametrization,
                 grid: ChebyshevGrid) -> DiscreteOperator:
    """Weighted single-layer operator (weight 1/w on every density component)."""
    return DiscreteOperator(_assemble_family("V1", m, w, arc, grid), grid, "V1w")


def assemble_regularized(which: str, m: MediumParams, w: WaveNumbers | None,
                         arc: ArcParametrization, grid: ChebyshevGrid) -> DiscreteOperator:
    """V2w, V3w or V4w as sums of L S R with weakly singular S."""
    families = {"V2w": "V2", "V3w": "V3", "V4w": "V4"}
    if which not in families:
        raise ValueError(f"unknown operator {which!r}; expected V2w, V3w or V4w")
    return DiscreteOperator(_assemble_family(families[which], m, w, arc, grid), grid, which)


def assemble(which: str, m: MediumParams, w: WaveNumbers | None, arc: ArcParametrization,
             grid: ChebyshevGrid) -> DiscreteOperator:
    if which == "V1w":
        return assemble_v1w(m, w, arc, grid)
    return assemble_regularized(which, m, w, arc, grid)


def compose(a: DiscreteOperator, b: DiscreteOperator) -> DiscreteOperator:
    """The product a * b (apply b first)."""
    if a.grid.n_points != b.grid.n_points:
        raise ValueError(f"grid mismatch: {a.grid.n_points} vs {b.grid.n_points} points")
    if a.tag == "I":
        tag = b.tag
    elif b.tag == "I":
        tag = a.tag
    else:
        try:
            tag = _COMPOSITIONS[(a.tag, b.tag)]
        except KeyError:
            raise ValueError(f"incompatible tags for composition: {a.tag} o {b.tag}") from None
    return DiscreteOperator(a.matrix @ b.matrix, a.grid, tag)


def dump_operator(op: DiscreteOperator, path) -> Path:
    """Write header (b"ARCS", u32 N, u8 tag index) then row-major little-endian complex128."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<IB", op.grid.n_points, TAGS.index(op.tag)))
        fh.write(np.ascontiguousarray(op.matrix, dtype="<c16").tobytes())
    return path


def load_operator(path) -> DiscreteOperator:
    data = Path(path).read_bytes()
    if data[:4] != _MAGIC:
        raise ValueError("not an operator dump: bad magic")
    n, tag = struct.unpack("<IB", data[4:9])
    mat = np.frombuffer(data[9:], dtype="<c16")
    if mat.size != 9 * n * n:
        raise ValueError("truncated operator dump")
    return DiscreteOperator(mat.reshape(3 * n, 3 * n).astype(complex), ChebyshevGrid(n), TAGS[tag])
