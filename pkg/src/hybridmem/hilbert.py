"""Composite Hilbert-space plumbing: layouts, operators, states, fidelity.

Everything is dense complex numpy. A SpaceLayout records the ordered
subsystem dimensions of a composite space; operators and states carry the
layout they were built on, and every binary operation checks layouts so a
qubit operator can never silently act on the wrong slot.

Conventions
-----------
* Basis index is row-major with slot 0 most significant: for dims
  (d0, d1, d2) the product state |n0, n1, n2> has index
  (n0*d1 + n1)*d2 + n2. This matches nested numpy.kron in slot order.
* sigma_z = |1><1| - |0><0| (excited state has eigenvalue +1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

# Validation tolerances for state-like objects.
KET_NORM_TOL = 1e-12
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
MIN_EIGENVALUE_FLOOR = -1e-8
PROJECTION_THRESHOLD = 1e-12


def _frozen_array(values, shape_check: Callable | None = None) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if shape_check is not None:
        shape_check(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered subsystem dimensions of a composite Hilbert space.

    Parameters
    ----------
    dims : tuple of int
        Dimension of each subsystem, in tensor order. Each must be >= 2.
    labels : tuple of str, optional
        Human-readable name per subsystem ("cbjj", "tlr", ...). Defaults
        to "sub0", "sub1", ...
    """

    dims: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise ValueError("layout needs at least one subsystem")
        for i, d in enumerate(dims):
            if d < 2:
                raise ValueError(f"subsystem {i} has dimension {d}, need >= 2")
        labels = tuple(self.labels) or tuple(f"sub{i}" for i in range(len(dims)))
        if len(labels) != len(dims):
            raise ValueError(
                f"{len(labels)} labels for {len(dims)} subsystems"
            )
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        """Total dimension (product of subsystem dimensions)."""
        return int(np.prod(self.dims))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def slot(self, label: str) -> int:
        """Index of the subsystem with the given label."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no subsystem labeled {label!r} in {self.labels}")

    def basis_index(self, occupations: Sequence[int]) -> int:
        """Flat index of the product basis state |n0, n1, ...>."""
        if len(occupations) != len(self.dims):
            raise ValueError(
                f"{len(occupations)} occupation numbers for "
                f"{len(self.dims)} subsystems"
            )
        idx = 0
        for n, d in zip(occupations, self.dims):
            if not 0 <= n < d:
                raise ValueError(f"occupation {n} out of range for dim {d}")
            idx = idx * d + n
        return idx

    def __mul__(self, other: "SpaceLayout") -> "SpaceLayout":
        return SpaceLayout(self.dims + other.dims, self.labels + other.labels)


def _check_same_layout(a, b, what: str):
    if a.layout.dims != b.layout.dims:
        raise ValueError(
            f"{what}: layout mismatch {a.layout.dims} vs {b.layout.dims}"
        )


@dataclass(frozen=True)
class Operator:
    """A dense complex matrix tied to a SpaceLayout.

    The matrix is copied on construction and frozen; all arithmetic
    returns new operators on the same layout.
    """

    matrix: np.ndarray
    layout: SpaceLayout

    def __post_init__(self):
        def check(arr):
            d = self.layout.dim
            if arr.shape != (d, d):
                raise ValueError(
                    f"matrix shape {arr.shape} does not match layout "
                    f"dimension {d}"
                )
        object.__setattr__(self, "matrix", _frozen_array(self.matrix, check))

    @property
    def dim(self) -> int:
        return self.layout.dim

    def dag(self) -> "Operator":
        """Hermitian conjugate."""
        return Operator(self.matrix.conj().T, self.layout)

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def __add__(self, other: "Operator") -> "Operator":
        _check_same_layout(self, other, "operator add")
        return Operator(self.matrix + other.matrix, self.layout)

    def __sub__(self, other: "Operator") -> "Operator":
        _check_same_layout(self, other, "operator sub")
        return Operator(self.matrix - other.matrix, self.layout)

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, self.layout)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.matrix * scalar, self.layout)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_same_layout(self, other, "operator matmul")
        return Operator(self.matrix @ other.matrix, self.layout)

    def expectation(self, state: "DensityMatrix | Ket") -> complex:
        """<A> in the given state."""
        _check_same_layout(self, state, "expectation")
        if isinstance(state, Ket):
            return complex(state.amplitudes.conj() @ self.matrix
                           @ state.amplitudes)
        return complex(np.trace(self.matrix @ state.matrix))


@dataclass(frozen=True)
class Ket:
    """Normalized pure state on a SpaceLayout.

    Raises if the supplied amplitudes have norm deviating from 1 by more
    than KET_NORM_TOL, unless normalize=True is passed.
    """

    amplitudes: np.ndarray
    layout: SpaceLayout
    normalize: bool = field(default=False, repr=False)

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if arr.shape != (self.layout.dim,):
            raise ValueError(
                f"amplitude vector length {arr.size} does not match layout "
                f"dimension {self.layout.dim}"
            )
        norm = np.linalg.norm(arr)
        if self.normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            arr = arr / norm
        elif abs(norm - 1.0) > KET_NORM_TOL:
            raise ValueError(f"ket norm {norm!r} deviates from 1")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)
        object.__setattr__(self, "normalize", False)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def overlap(self, other: "Ket") -> complex:
        """<self|other>."""
        _check_same_layout(self, other, "overlap")
        return complex(self.amplitudes.conj() @ other.amplitudes)

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes,
                                      self.amplitudes.conj()), self.layout)


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix with validation on construction.

    Hermiticity within 1e-10 and unit trace within 1e-9 are enforced;
    the minimum eigenvalue must stay above -1e-8 (asserted, never
    silently repaired).
    """

    matrix: np.ndarray
    layout: SpaceLayout

    def __post_init__(self):
        def check(arr):
            d = self.layout.dim
            if arr.shape != (d, d):
                raise ValueError(
                    f"matrix shape {arr.shape} does not match layout "
                    f"dimension {d}"
                )
        arr = _frozen_array(self.matrix, check)
        herm = np.max(np.abs(arr - arr.conj().T))
        if herm > HERMITICITY_TOL:
            raise ValueError(f"density matrix not Hermitian: error {herm:.3e}")
        tr = np.trace(arr)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr!r} deviates from 1")
        min_eig = float(np.linalg.eigvalsh(arr).min())
        if min_eig < MIN_EIGENVALUE_FLOOR:
            raise ValueError(
                f"density matrix has negative eigenvalue {min_eig:.3e}"
            )
        object.__setattr__(self, "matrix", arr)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def trace_error(self) -> float:
        return abs(complex(np.trace(self.matrix)) - 1.0)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())


def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product; the result layout is a's subsystems then b's."""
    return Operator(np.kron(a.matrix, b.matrix), a.layout * b.layout)


def tensor_ket(a: Ket, b: Ket) -> Ket:
    return Ket(np.kron(a.amplitudes, b.amplitudes), a.layout * b.layout)


def embed(op: Operator, slot: int, layout: SpaceLayout) -> Operator:
    """Lift a single-subsystem operator into `slot` of a composite layout.

    Identities fill every other slot. The operator must be square on
    exactly the dimension layout.dims[slot].
    """
    if not 0 <= slot < layout.n_subsystems:
        raise ValueError(f"slot {slot} out of range for {layout.dims}")
    d_slot = layout.dims[slot]
    if op.layout.n_subsystems != 1 or op.layout.dims[0] != d_slot:
        raise ValueError(
            f"operator on dims {op.layout.dims} cannot occupy slot {slot} "
            f"of dimension {d_slot}"
        )
    out = np.array([[1.0 + 0.0j]])
    for i, d in enumerate(layout.dims):
        out = np.kron(out, op.matrix if i == slot else np.eye(d))
    return Operator(out, layout)


def identity(layout: SpaceLayout) -> Operator:
    return Operator(np.eye(layout.dim), layout)


def annihilation(dim: int) -> Operator:
    """Truncated bosonic annihilation operator, <n-1|a|n> = sqrt(n)."""
    if dim < 2:
        raise ValueError(f"annihilation needs dim >= 2, got {dim}")
    mat = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)
    return Operator(mat, SpaceLayout((dim,), ("mode",)))


def qubit_ops() -> dict[str, Operator]:
    """Standard two-level operators on a single-qubit layout.

    Returns sigma_plus = |1><0|, sigma_minus = |0><1|,
    sigma_z = |1><1| - |0><0|, and the two level projectors.
    """
    layout = SpaceLayout((2,), ("qubit",))
    sp = np.zeros((2, 2)); sp[1, 0] = 1.0
    sm = np.zeros((2, 2)); sm[0, 1] = 1.0
    sz = np.diag([-1.0, 1.0])
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    return {
        "sigma_plus": Operator(sp, layout),
        "sigma_minus": Operator(sm, layout),
        "sigma_z": Operator(sz, layout),
        "project_0": Operator(p0, layout),
        "project_1": Operator(p1, layout),
    }


def basis_ket(layout: SpaceLayout, occupations: Sequence[int]) -> Ket:
    """Product basis state |n0, n1, ...> on the layout."""
    amps = np.zeros(layout.dim, dtype=complex)
    amps[layout.basis_index(occupations)] = 1.0
    return Ket(amps, layout)


def superpose(terms: Iterable[tuple[complex, Ket]], normalize: bool = False) -> Ket:
    """Linear combination of kets on a common layout."""
    terms = list(terms)
    if not terms:
        raise ValueError("superpose needs at least one term")
    layout = terms[0][1].layout
    amps = np.zeros(layout.dim, dtype=complex)
    for coeff, ket in terms:
        _check_same_layout(terms[0][1], ket, "superpose")
        amps = amps + coeff * ket.amplitudes
    return Ket(amps, layout, normalize=normalize)


def fidelity(target: Ket, rho: DensityMatrix) -> float:
    """<target| rho |target>, checked real.

    Real-valued within 1e-10 by construction for a valid density matrix;
    a larger imaginary part raises.
    """
    _check_same_layout(target, rho, "fidelity")
    val = complex(target.amplitudes.conj() @ rho.matrix @ target.amplitudes)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"fidelity has imaginary part {val.imag:.3e}")
    return float(val.real)


def project(
    rho: DensityMatrix,
    projector: Operator,
    threshold: float = PROJECTION_THRESHOLD,
) -> tuple[DensityMatrix, float]:
    """Measurement update: (P rho P / p, p) with p = Tr(P rho P).

    Raises if the success probability falls below `threshold` (the
    conditional state is then undefined to working precision).
    """
    _check_same_layout(rho, projector, "project")
    p_mat = projector.matrix
    reduced = p_mat @ rho.matrix @ p_mat.conj().T
    prob = float(np.real(np.trace(reduced)))
    if prob < threshold:
        raise ValueError(
            f"projection probability {prob:.3e} below threshold {threshold:.3e}"
        )
    return DensityMatrix(reduced / prob, rho.layout), prob
