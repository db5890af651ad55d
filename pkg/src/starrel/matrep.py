"""
Finite-dimensional representations
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Evaluation of NC expressions on tuples of complex matrices via spectral
functional calculus, operator norms, positivity tests, direct sums and the
normal form ``a -> U (a (x) I_k (+) 0_z) U*`` of *-homomorphisms between
full matrix algebras.

Matrices are numpy ``complex128`` arrays of shape ``(n, n)``; ``n = 0`` is
the zero C*-algebra. The internal evaluator also accepts stacked arrays of
shape ``(..., n, n)``, which the search module uses to evaluate many
parameter points at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from . import ncexpr as nc
from .errors import (
    DimMismatch,
    DomainMismatch,
    NotHermitian,
    NotPSD,
    Singular,
    UnboundGenerator,
)

DEFAULT_TOL = 1e-9
COND_LIMIT = 1e12


def as_matrix(m, dim: int | None = None) -> np.ndarray:
    a = np.array(m, dtype=np.complex128)
    if a.size == 0 and dim in (None, 0):
        a = a.reshape(0, 0)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise DimMismatch(f"expected dimension {dim}, got {a.shape[0]}")
    a.setflags(write=False)
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def op_norm(m: np.ndarray) -> float:
    """Largest singular value; 0 for the empty matrix."""
    m = np.asarray(m)
    if m.shape[-1] == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def _op_norms(m: np.ndarray) -> np.ndarray:
    if m.shape[-1] == 0:
        return np.zeros(m.shape[:-2])
    return np.linalg.svd(m, compute_uv=False)[..., 0]


def is_hermitian(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return op_norm(m - dagger(m)) <= tol * (1 + op_norm(m))


def is_psd(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    if m.shape[-1] == 0:
        return True
    scale = tol * (1 + op_norm(m))
    if op_norm(m - dagger(m)) > scale:
        return False
    return float(np.linalg.eigvalsh((m + dagger(m)) / 2)[0]) >= -scale


def hermitian_eig(m: np.ndarray):
    """Eigendecomposition of the Hermitian part with a canonical phase.

    Eigenvalues ascend; each eigenvector is scaled so its first entry of
    non-negligible magnitude is real positive. Works on stacked input.
    """
    h = (m + dagger(m)) / 2
    w, v = np.linalg.eigh(h)
    mag = np.abs(v)
    lead = np.argmax(mag > 1e-12 * mag.max(axis=-2, keepdims=True), axis=-2)
    pivot = np.take_along_axis(v, lead[..., None, :], axis=-2)
    phase = pivot / np.where(np.abs(pivot) == 0, 1, np.abs(pivot))
    return w, v / np.where(phase == 0, 1, phase)


def _spectral(m: np.ndarray, fn) -> np.ndarray:
    w, v = hermitian_eig(m)
    return (v * fn(w)[..., None, :]) @ dagger(v)


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    return _spectral(m, lambda w: np.sqrt(np.clip(w, 0, None)))


def expm_hermitian(m: np.ndarray) -> np.ndarray:
    return _spectral(m, np.exp)


def absm(m: np.ndarray) -> np.ndarray:
    return sqrtm_psd(dagger(m) @ m)


class _Evaluator:
    """Recursive evaluator over (possibly stacked) generator arrays.

    In strict mode precondition failures raise; in lenient mode the
    functional calculus is applied to the nearest admissible argument and
    the squared size of each violation is added to ``self.penalty``.
    """

    def __init__(self, arrays: Mapping[str, np.ndarray], dim: int, batch=(), tol=DEFAULT_TOL, lenient=False):
        self.arrays = arrays
        self.dim = dim
        self.batch = tuple(batch)
        self.tol = tol
        self.lenient = lenient
        self.penalty = np.zeros(self.batch)
        self._eye = np.broadcast_to(np.eye(dim, dtype=np.complex128), self.batch + (dim, dim))
        self._cache: dict = {}

    def __call__(self, e: nc.NCExpr) -> np.ndarray:
        # keyed by identity: structural hashing of deep trees is quadratic
        hit = self._cache.get(id(e))
        if hit is None:
            hit = self._eval(e)
            self._cache[id(e)] = hit
        return hit

    def _eval(self, e):
        if isinstance(e, nc.Gen):
            try:
                return self.arrays[e.name]
            except KeyError:
                raise UnboundGenerator(f"generator {e.name!r} is not assigned") from None
        if isinstance(e, nc.Unit):
            return self._eye
        if isinstance(e, nc.Adjoint):
            return dagger(self(e.arg))
        if isinstance(e, nc.ScalarMul):
            return e.coeff * self(e.arg)
        if isinstance(e, nc.Sum):
            out = self(e.terms[0])
            for t in e.terms[1:]:
                out = out + self(t)
            return out
        if isinstance(e, nc.Product):
            out = self(e.factors[0])
            for f in e.factors[1:]:
                out = out @ self(f)
            return out
        if isinstance(e, nc.Func):
            arg = self(e.arg)
            if self.dim == 0:
                return arg
            return getattr(self, "_" + e.name)(arg)
        raise TypeError(f"not an expression: {e!r}")

    def _scale(self, m):
        return self.tol * (1 + _op_norms(m))

    def _herm_defect(self, m):
        return _op_norms(m - dagger(m))

    def _sqrt(self, m):
        defect = self._herm_defect(m)
        w, v = hermitian_eig(m)
        neg = np.clip(-w, 0, None)
        if self.lenient:
            self.penalty = self.penalty + defect**2 + np.sum(neg**2, axis=-1)
        else:
            scale = self._scale(m)
            if np.any(defect > scale) or np.any(neg.max(axis=-1) > scale):
                raise NotPSD("sqrt of a matrix that is not positive semidefinite")
        return (v * np.sqrt(np.clip(w, 0, None))[..., None, :]) @ dagger(v)

    def _abs(self, m):
        return sqrtm_psd(dagger(m) @ m)

    def _exp(self, m):
        defect = self._herm_defect(m)
        if self.lenient:
            self.penalty = self.penalty + defect**2
        elif np.any(defect > self._scale(m)):
            raise NotHermitian("exp is only defined here for Hermitian arguments")
        return expm_hermitian(m)

    def _inv(self, m):
        u, s, vh = np.linalg.svd(m)
        small = s[..., -1] * COND_LIMIT <= s[..., 0]
        if self.lenient:
            self.penalty = self.penalty + small.astype(float)
        elif np.any(small):
            raise Singular("inv of a numerically singular matrix")
        s_inv = np.where(s > s[..., :1] / COND_LIMIT, 1 / np.where(s == 0, 1, s), 0)
        return (dagger(vh) * s_inv[..., None, :]) @ dagger(u)


def evaluate_arrays(e: nc.NCExpr, arrays: Mapping[str, np.ndarray], dim: int, batch=(),
                    tol: float = DEFAULT_TOL, lenient: bool = False):
    """Evaluate on raw arrays; returns ``(value, penalty)``."""
    ev = _Evaluator(arrays, dim, batch, tol, lenient)
    return ev(e), ev.penalty


@dataclass(frozen=True)
class RepTuple:
    """Assignment of each generator to an ``dim x dim`` complex matrix."""

    dim: int
    gens: Mapping[str, np.ndarray]

    def __post_init__(self):
        if self.dim < 0:
            raise DimMismatch("dimension must be non-negative")
        fixed = {g: as_matrix(m, self.dim) for g, m in self.gens.items()}
        object.__setattr__(self, "gens", MappingProxyType(fixed))

    @classmethod
    def of(cls, **mats) -> "RepTuple":
        fixed = {g: as_matrix(m) for g, m in mats.items()}
        dims = {m.shape[0] for m in fixed.values()}
        if len(dims) > 1:
            raise DimMismatch(f"mixed dimensions {sorted(dims)}")
        return cls(dims.pop() if dims else 0, fixed)

    @classmethod
    def zero(cls, generators: Sequence[str], dim: int = 0) -> "RepTuple":
        return cls(dim, {g: np.zeros((dim, dim), dtype=np.complex128) for g in generators})

    def __getitem__(self, g: str) -> np.ndarray:
        return self.gens[g]

    def domain(self) -> frozenset[str]:
        return frozenset(self.gens)

    def __eq__(self, other):
        if not isinstance(other, RepTuple):
            return NotImplemented
        return (self.dim == other.dim and self.gens.keys() == other.gens.keys()
                and all(np.array_equal(self.gens[g], other.gens[g]) for g in self.gens))

    __hash__ = None

    def allclose(self, other: "RepTuple", atol: float = 1e-10) -> bool:
        return (self.dim == other.dim and self.gens.keys() == other.gens.keys()
                and all(np.allclose(self.gens[g], other.gens[g], atol=atol, rtol=0) for g in self.gens))


def evaluate(e: nc.NCExpr, rep: RepTuple, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Value of ``e`` at ``rep``; the unit maps to the identity of ``rep.dim``."""
    value, _ = evaluate_arrays(e, rep.gens, rep.dim, tol=tol)
    return np.array(value)


def direct_sum(*reps: RepTuple) -> RepTuple:
    """Block-diagonal assignment per generator."""
    if not reps:
        raise DomainMismatch("direct sum of no representations")
    domain = reps[0].domain()
    for r in reps[1:]:
        if r.domain() != domain:
            raise DomainMismatch("direct summands assign different generators")
    dim = sum(r.dim for r in reps)
    out = {}
    for g in domain:
        m = np.zeros((dim, dim), dtype=np.complex128)
        at = 0
        for r in reps:
            m[at:at + r.dim, at:at + r.dim] = r.gens[g]
            at += r.dim
        out[g] = m
    return RepTuple(dim, out)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class MatHom:
    """*-homomorphism ``M_n -> M_{kn+z}``, ``a -> U (a (x) I_k (+) 0_z) U*``."""

    source_dim: int
    multiplicity: int = 1
    zero_pad: int = 0
    unitary: np.ndarray | None = None

    def __post_init__(self):
        if self.source_dim < 0 or self.multiplicity < 0 or self.zero_pad < 0:
            raise DimMismatch("dimensions and multiplicities must be non-negative")
        t = self.target_dim
        u = np.eye(t, dtype=np.complex128) if self.unitary is None else as_matrix(self.unitary, t)
        if t and np.linalg.norm(dagger(u) @ u - np.eye(t), 2) > 1e-10:
            raise ValueError("conjugator is not unitary")
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)

    @property
    def target_dim(self) -> int:
        return self.source_dim * self.multiplicity + self.zero_pad

    @property
    def injective(self) -> bool:
        return self.multiplicity >= 1 or self.source_dim == 0

    @property
    def unital(self) -> bool:
        return self.zero_pad == 0

    @classmethod
    def identity(cls, n: int) -> "MatHom":
        return cls(n, 1, 0)

    @classmethod
    def random(cls, n: int, k: int, z: int, rng: np.random.Generator) -> "MatHom":
        return cls(n, k, z, random_unitary(n * k + z, rng))

    def __call__(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a)
        if a.shape != (self.source_dim, self.source_dim):
            raise DimMismatch(f"expected a {self.source_dim}x{self.source_dim} matrix")
        t = self.target_dim
        inner = np.zeros((t, t), dtype=np.complex128)
        kn = self.source_dim * self.multiplicity
        inner[:kn, :kn] = np.kron(a, np.eye(self.multiplicity))
        return self.unitary @ inner @ dagger(self.unitary)


def pushforward(rep: RepTuple, phi: MatHom) -> RepTuple:
    if phi.source_dim != rep.dim:
        raise DimMismatch(f"map expects dimension {phi.source_dim}, tuple has {rep.dim}")
    return RepTuple(phi.target_dim, {g: phi(m) for g, m in rep.gens.items()})


# --------------------------------------------------------------------------
# JSON mirror


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m)
    return {"dim": int(m.shape[0]),
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m]}


def matrix_from_json(obj: dict) -> np.ndarray:
    dim = int(obj["dim"])
    rows = obj["entries"]
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise DimMismatch(f"entries do not form a {dim}x{dim} matrix")
    a = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)
    return as_matrix(a.reshape(dim, dim), dim)


def rep_to_json(rep: RepTuple) -> dict:
    return {"dim": rep.dim, "gens": {g: matrix_to_json(rep.gens[g]) for g in sorted(rep.gens)}}


def rep_from_json(obj: dict) -> RepTuple:
    dim = int(obj["dim"])
    return RepTuple(dim, {g: matrix_from_json(m) for g, m in obj["gens"].items()})
