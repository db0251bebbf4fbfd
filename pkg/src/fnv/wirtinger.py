"""Finite-difference engine for holomorphic/antiholomorphic derivatives.

A scalar field on C^m is differentiated through its real coordinates
(x_1, y_1, ..., x_m, y_m) with fourth-order central stencils and the real
partials are recombined into Wirtinger derivatives:

    d/dz^k    = (d/dx_k - i d/dy_k) / 2
    d/dzbar^k = (d/dx_k + i d/dy_k) / 2

The module also houses the (1,1)-form container used everywhere else.  The
normalization is fixed once and for all by the requirement that the mass of
the complex Hessian of log(1 + |z|^2) over the whole plane equal one:

    ddc f = (sqrt(-1) / 2 pi) * sum_{j,k} (d^2 f / dz^j dzbar^k) dz^j ^ dzbar^k
    dc f  = (sqrt(-1) / 4 pi) * (dbar f - d f)

so that d(dc f) = ddc f and the unit circle carries dc log|z|^2 mass one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import NonFinite, StencilOutsideDomain, ZeroVector

TWO_PI = 2.0 * np.pi
#: scalar s in "form = s * sum H[j,k] dz^j ^ dzbar^k"; fixed by the mass-1 oracle
DDC_SCALE = 1j / TWO_PI

#: default relative finite-difference step, scaled by (1 + |p|)
DEFAULT_STEP = 1e-4

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ScalarField:
    """A deterministic scalar field on C^m.

    ``fn`` must accept a complex array of shape (..., arity) and return values
    of shape (...); it must be vectorized over all leading axes and re-entrant.
    ``guard`` (optional) maps points to booleans; the jet engine refuses to
    place a stencil across a guarded point.
    """

    arity: int
    fn: Callable[[np.ndarray], np.ndarray]
    real_valued: bool = False
    guard: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return self.fn(np.asarray(pts))


@dataclass
class WirtingerJet:
    """Value and Wirtinger derivatives of a scalar field at one point.

    ``d``/``dbar`` are the holomorphic/antiholomorphic gradients, ``ddbar``
    the mixed complex Hessian (row = holomorphic index) and ``dd`` the pure
    holomorphic Hessian.  The ``err_*`` arrays are embedded stencil error
    estimates (difference between the fourth- and second-order results plus a
    rounding floor).
    """

    value: complex
    d: np.ndarray
    dbar: np.ndarray
    ddbar: np.ndarray
    dd: np.ndarray
    step: float
    err_d: np.ndarray = field(default=None, repr=False)
    err_ddbar: np.ndarray = field(default=None, repr=False)
    err_dd: np.ndarray = field(default=None, repr=False)


class JetBatch:
    """Structure-of-arrays jets for a batch of points (leading axis B)."""

    __slots__ = ("value", "d", "dbar", "ddbar", "dd", "step",
                 "err_d", "err_ddbar", "err_dd")

    def __init__(self, value, d, dbar, ddbar, dd, step, err_d, err_ddbar, err_dd):
        self.value = value
        self.d = d
        self.dbar = dbar
        self.ddbar = ddbar
        self.dd = dd
        self.step = step
        self.err_d = err_d
        self.err_ddbar = err_ddbar
        self.err_dd = err_dd

    def __getitem__(self, b: int) -> WirtingerJet:
        return WirtingerJet(
            value=self.value[b], d=self.d[b], dbar=self.dbar[b],
            ddbar=self.ddbar[b], dd=self.dd[b],
            step=float(np.atleast_1d(self.step)[b] if np.ndim(self.step) else self.step),
            err_d=self.err_d[b], err_ddbar=self.err_ddbar[b], err_dd=self.err_dd[b],
        )


# first-derivative stencil (order 4): offsets and weights, to be divided by h
_OFF1 = np.array([-2.0, -1.0, 1.0, 2.0])
_C1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
# diagonal second derivative (order 4) on offsets [-2,-1,0,1,2], divided by h^2
_C2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


@lru_cache(maxsize=None)
def _stencil(m: int):
    """Offset table and index maps for arity m (2m real directions)."""
    d = 2 * m
    points = {(0,) * d: 0}

    def key_of(vals):
        return tuple(vals)

    def add(vals):
        k = key_of(vals)
        if k not in points:
            points[k] = len(points)
        return points[k]

    idx_axis = np.zeros((d, 4), dtype=np.int64)          # +-1, +-2 per axis
    for a in range(d):
        for j, o in enumerate(_OFF1):
            vals = [0.0] * d
            vals[a] = o
            idx_axis[a, j] = add(vals)

    pairs = [(a, b) for a in range(d) for b in range(a + 1, d)]
    idx_pair = np.zeros((len(pairs), 4, 4), dtype=np.int64)
    for p, (a, b) in enumerate(pairs):
        for j, oa in enumerate(_OFF1):
            for k, ob in enumerate(_OFF1):
                vals = [0.0] * d
                vals[a] = oa
                vals[b] = ob
                idx_pair[p, j, k] = add(vals)

    offsets = np.zeros((len(points), d))
    for vals, i in points.items():
        offsets[i] = vals
    # complex offsets: column 2k is Re z_k, 2k+1 is Im z_k
    offc = offsets[:, 0::2] + 1j * offsets[:, 1::2]
    return offc, idx_axis, idx_pair, pairs


def _eval_chunked(fld: ScalarField, pts: np.ndarray, chunk: int = 1 << 21) -> np.ndarray:
    flat = pts.reshape(-1, pts.shape[-1])
    if flat.shape[0] <= chunk:
        out = np.asarray(fld(flat))
    else:
        parts = [np.asarray(fld(flat[i:i + chunk]))
                 for i in range(0, flat.shape[0], chunk)]
        out = np.concatenate(parts)
    return out.reshape(pts.shape[:-1])


def _real_jet(F: np.ndarray, h: np.ndarray, m: int):
    """Real gradient/Hessian (and 2nd-order variants) from stencil values.

    F has shape (B, n_st, *T); h broadcasts against (B,).  Returns
    value (B, *T), g (B, d, *T), H (B, d, d, *T) and their low-order
    counterparts used for error estimation.
    """
    offc, idx_axis, idx_pair, pairs = _stencil(m)
    d = 2 * m
    B = F.shape[0]
    trailing = F.shape[2:]
    h = np.asarray(h, dtype=float).reshape((B,) + (1,) * len(trailing))
    f0 = F[:, 0]

    ax = F[:, idx_axis]                      # (B, d, 4, *T)
    g = np.einsum("j,bdj...->bd...", _C1, ax) / h[:, None]
    g2 = (ax[:, :, 2] - ax[:, :, 1]) / (2.0 * h[:, None])

    H = np.zeros((B, d, d) + trailing, dtype=F.dtype)
    H2 = np.zeros_like(H)
    diag_vals = np.stack(
        [ax[:, :, 0], ax[:, :, 1],
         np.broadcast_to(f0[:, None], ax[:, :, 1].shape),
         ax[:, :, 2], ax[:, :, 3]], axis=2)   # (B, d, 5, *T)
    diag = np.einsum("j,bdj...->bd...", _C2, diag_vals) / h[:, None] ** 2
    diag2 = (ax[:, :, 1] - 2.0 * f0[:, None] + ax[:, :, 2]) / h[:, None] ** 2
    for a in range(d):
        H[:, a, a] = diag[:, a]
        H2[:, a, a] = diag2[:, a]

    if pairs:
        pv = F[:, idx_pair]                   # (B, P, 4, 4, *T)
        mixed = np.einsum("j,k,bpjk...->bp...", _C1, _C1, pv) / h[:, None] ** 2
        # (+1,+1), (+1,-1), (-1,+1), (-1,-1) live at indices (2,2),(2,1),(1,2),(1,1)
        mixed2 = (pv[:, :, 2, 2] - pv[:, :, 2, 1] - pv[:, :, 1, 2] + pv[:, :, 1, 1]) \
            / (4.0 * h[:, None] ** 2)
        for p, (a, b) in enumerate(pairs):
            H[:, a, b] = mixed[:, p]
            H[:, b, a] = mixed[:, p]
            H2[:, a, b] = mixed2[:, p]
            H2[:, b, a] = mixed2[:, p]

    scale = np.max(np.abs(F), axis=1)         # (B, *T)
    floor_g = 3.0 * _EPS * scale / h
    floor_H = 8.0 * _EPS * scale / h ** 2
    err_g = np.abs(g - g2) + floor_g[:, None]
    err_H = np.abs(H - H2) + floor_H[:, None, None]
    return f0, g, H, err_g, err_H


def _to_wirtinger(g: np.ndarray, H: np.ndarray, err_g: np.ndarray, err_H: np.ndarray, m: int):
    """Combine real partials into Wirtinger first/second derivatives."""
    gx, gy = g[:, 0::2], g[:, 1::2]
    dz = 0.5 * (gx - 1j * gy)
    dzb = 0.5 * (gx + 1j * gy)

    Hxx = H[:, 0::2, 0::2]
    Hyy = H[:, 1::2, 1::2]
    Hxy = H[:, 0::2, 1::2]
    Hyx = H[:, 1::2, 0::2]
    ddbar = 0.25 * (Hxx + Hyy + 1j * (Hxy - Hyx))
    dd = 0.25 * (Hxx - Hyy - 1j * (Hxy + Hyx))

    e1 = 0.5 * (err_g[:, 0::2] + err_g[:, 1::2])
    e2 = 0.25 * (err_H[:, 0::2, 0::2] + err_H[:, 1::2, 1::2]
                 + err_H[:, 0::2, 1::2] + err_H[:, 1::2, 0::2])
    return dz, dzb, ddbar, dd, e1, e2


def step_for(points: np.ndarray, rel_step: float) -> np.ndarray:
    """Per-point step rel_step * (1 + |p|)."""
    pts = np.atleast_2d(points)
    return rel_step * (1.0 + np.linalg.norm(pts, axis=-1))


def jet2_batch(fld: ScalarField, points: np.ndarray,
               rel_step: float = DEFAULT_STEP, step: np.ndarray | None = None) -> JetBatch:
    """Second-order Wirtinger jets of ``fld`` at a batch of points.

    ``points`` has shape (B, arity).  ``step`` (absolute, per point) overrides
    ``rel_step``.  Raises StencilOutsideDomain / NonFinite per the field's
    guard and the finiteness of its values.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    m = fld.arity
    if pts.shape[-1] != m:
        raise ValueError(f"points have arity {pts.shape[-1]}, field needs {m}")
    offc, _, _, _ = _stencil(m)
    h = np.asarray(step if step is not None else step_for(pts, rel_step), dtype=float)
    h = np.broadcast_to(h, pts.shape[:1]).astype(float)

    cloud = pts[:, None, :] + h[:, None, None] * offc[None, :, :]
    if fld.guard is not None:
        ok = np.asarray(fld.guard(cloud))
        if not np.all(ok):
            bad = np.argwhere(~ok)
            raise StencilOutsideDomain(
                f"stencil point outside domain of {fld.name or 'field'} "
                f"near index {tuple(bad[0])}")
    F = _eval_chunked(fld, cloud).astype(complex)
    if not np.all(np.isfinite(F)):
        raise NonFinite(f"non-finite value from {fld.name or 'field'}")

    f0, g, H, err_g, err_H = _real_jet(F, h, m)
    dz, dzb, ddbar, dd, e1, e2 = _to_wirtinger(g, H, err_g, err_H, m)
    return JetBatch(f0, dz, dzb, ddbar, dd, h, e1, e2, e2)


def jet2(fld: ScalarField, p: np.ndarray, rel_step: float = DEFAULT_STEP,
         step: float | None = None) -> WirtingerJet:
    """Wirtinger jet of a scalar field at a single point."""
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    batch = jet2_batch(fld, p[None, :], rel_step=rel_step,
                       step=None if step is None else np.array([step]))
    return batch[0]


def matrix_jet_batch(matfn: Callable[[np.ndarray], np.ndarray], arity: int,
                     points: np.ndarray, rel_step: float):
    """First and mixed-second Wirtinger derivatives of a matrix-valued field.

    ``matfn`` maps (B, arity) points to (B, k, k) matrices.  Returns
    (value, d, dbar, ddbar) with shapes (B,k,k), (B,m,k,k), (B,m,k,k),
    (B,m,m,k,k); this is the outer level of the nested differentiation used
    for curvature tensors.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    m = arity
    offc, _, _, _ = _stencil(m)
    h = step_for(pts, rel_step)
    cloud = (pts[:, None, :] + h[:, None, None] * offc[None, :, :])
    B, n_st = cloud.shape[0], cloud.shape[1]
    M = matfn(cloud.reshape(B * n_st, m))
    k = M.shape[-1]
    F = M.reshape(B, n_st, k, k)
    if not np.all(np.isfinite(F)):
        raise NonFinite("non-finite value from matrix field")
    f0, g, H, err_g, err_H = _real_jet(F, h, m)
    dz, dzb, ddbar, dd, e1, e2 = _to_wirtinger(g, H, err_g, err_H, m)
    return f0, dz, dzb, ddbar


class Form11:
    """A (1,1)-form at a point, stored as its coefficient matrix.

    The form is DDC_SCALE * sum_{j,k} coeff[j,k] dz^j ^ dzbar^k.  For a real
    form the matrix is Hermitian and positivity questions are answered by its
    eigenvalues.
    """

    __slots__ = ("coeff",)

    def __init__(self, coeff: np.ndarray):
        self.coeff = np.atleast_2d(np.asarray(coeff, dtype=complex))

    @property
    def dim(self) -> int:
        return self.coeff.shape[0]

    def hermitized(self) -> np.ndarray:
        return 0.5 * (self.coeff + self.coeff.conj().T)

    def hermiticity_defect(self) -> float:
        return float(np.linalg.norm(self.coeff - self.coeff.conj().T))

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.hermitized())

    def min_eig(self) -> float:
        return float(self.eigvals()[0])

    def quad(self, u: np.ndarray) -> float:
        """Hermitian pairing sum coeff[j,k] u^j conj(u^k)."""
        u = np.asarray(u, dtype=complex)
        return float(np.real(np.einsum("jk,j,k->", self.coeff, u, u.conj())))

    def pair(self, u: np.ndarray, w: np.ndarray) -> complex:
        u = np.asarray(u, dtype=complex)
        w = np.asarray(w, dtype=complex)
        return complex(np.einsum("jk,j,k->", self.coeff, u, w.conj()))

    def on_tangents(self, u: np.ndarray, w: np.ndarray) -> float:
        """Evaluate the real 2-form on two real tangent vectors.

        The tangents are given by their complex coordinate components.
        """
        s = np.einsum("jk,j,k->", self.coeff, u, np.conj(w))
        t = np.einsum("jk,j,k->", self.coeff, w, np.conj(u))
        return float(np.real(DDC_SCALE * (s - t)))

    def density(self) -> float:
        """Lebesgue density of the top power form^dim / dim! ... for dim = 1.

        For one variable the form is (coeff/pi) dA; higher-dimensional wedge
        densities live in ``wedge_density``/``top_density``.
        """
        if self.dim != 1:
            raise ValueError("density() is the 1-dimensional case; "
                             "use top_density for m > 1")
        return float(np.real(self.coeff[0, 0])) / np.pi

    def __add__(self, other: "Form11") -> "Form11":
        return Form11(self.coeff + other.coeff)

    def __sub__(self, other: "Form11") -> "Form11":
        return Form11(self.coeff - other.coeff)

    def __mul__(self, a: float) -> "Form11":
        return Form11(self.coeff * a)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Form11({self.coeff!r})"


def wedge_density(A: np.ndarray, B: np.ndarray) -> float:
    """Lebesgue density on C^2 of the 4-form alpha ^ beta.

    ``A`` and ``B`` are the coefficient matrices of the two (1,1)-forms in
    the DDC_SCALE convention.
    """
    val = (A[0, 0] * B[1, 1] + A[1, 1] * B[0, 0]
           - A[0, 1] * B[1, 0] - A[1, 0] * B[0, 1])
    return float(np.real(val)) / np.pi ** 2


def top_density(C: np.ndarray) -> float:
    """Lebesgue density of form^m for an m x m coefficient matrix."""
    C = np.atleast_2d(C)
    m = C.shape[0]
    return float(np.real(np.linalg.det(C))) * np.math.factorial(m) / np.pi ** m \
        if hasattr(np, "math") else float(np.real(np.linalg.det(C))) * _factorial(m) / np.pi ** m


def _factorial(m: int) -> int:
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


def ddc(fld: ScalarField, p: np.ndarray, rel_step: float = DEFAULT_STEP) -> Form11:
    """The normalized complex Hessian of ``fld`` at ``p`` as a (1,1)-form."""
    return Form11(jet2(fld, p, rel_step=rel_step).ddbar)


def ddc_batch(fld: ScalarField, points: np.ndarray,
              rel_step: float = DEFAULT_STEP) -> np.ndarray:
    """Coefficient matrices of ddc(fld) at a batch of points, shape (B,m,m)."""
    return jet2_batch(fld, points, rel_step=rel_step).ddbar


def levi_min_eig(fld: ScalarField, p: np.ndarray,
                 rel_step: float = DEFAULT_STEP) -> float:
    """Smallest eigenvalue of the Levi form of ``fld`` at ``p``."""
    return ddc(fld, p, rel_step=rel_step).min_eig()


def dc_on_tangent(d: np.ndarray, u: np.ndarray) -> float:
    """Value of dc f on a real tangent u, from the holomorphic gradient of f.

    Valid for real-valued f, where dc f (u) = Im(sum_k (df/dz^k) u^k) / 2pi.
    """
    a = np.einsum("...k,...k->...", np.asarray(d), np.asarray(u))
    return np.imag(a) / TWO_PI


def du_dcu_matrix(d: np.ndarray) -> np.ndarray:
    """Coefficient matrix of du ^ dc u from the holomorphic gradient of u.

    For real u the 2-form du ^ dc u equals DDC_SCALE * sum (d_j u)(dbar_k u)
    dz^j ^ dzbar^k, a rank-one positive semidefinite matrix.
    """
    d = np.asarray(d, dtype=complex)
    return np.outer(d, d.conj())


def unit_vector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ZeroVector("zero direction vector")
    return v / nrm
