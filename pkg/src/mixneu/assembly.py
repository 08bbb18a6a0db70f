"""Galerkin assembly of the mixed local/nonlocal Neumann forms.

The assembled bilinear form is the one appearing in the weak
formulation,

    B(u, v) = alpha * int_a^b u' v' dx
            + (beta/2) * iint_Q (u(x)-u(y)) (v(x)-v(y)) |x-y|^(-1-2s) dx dy,

with Q the cross-shaped region (Omega x Omega) u (Omega x Omega^c) u
(Omega^c x Omega).  The induced seminorm carries the halved
coefficients (alpha/2, beta/4); ``seminorm_sq`` returns B(v, v)/2
accordingly.  Eigenvalues and Rayleigh quotients reported elsewhere use
B itself.

Discretization: piecewise-linear hats on all nodes of the collared
mesh.  The exterior beyond the collar enters through an analytic tail
correction under constant extension of u past the outermost nodes: for
y beyond b + collar_width,

    int (y - x)^(-1-2s) dy = (b + collar_width - x)^(-2s) / (2s),

so the tail contributes beta * int_Omega psi_i psi_j T(x) dx with
psi_i = phi_i - delta_{i, end}.  The correction is symmetric positive
semidefinite and vanishes on constants, so no structural invariant is
lost to truncation.

Element-pair quadrature:

* identical pairs: difference quotients of P1 hats are constant on an
  element, and iint_{e x e} |x-y|^(1-2s) has a closed form -- exact;
* vertex-touching pairs: two-triangle Duffy split; the radial direction
  separates exactly and leaves three moment integrals
  J_ab = iint xi^a ups^b (xi+ups)^(-1-2s) per pair, computed by graded
  composite Gauss on [0, 1] -- accurate to machine precision;
* separated pairs: tensor Gauss after recursive comparable splitting
  (a pair is admissible once its gap is at least the longer element
  length; otherwise the longer side is bisected, down to the rule's
  split depth).  These are the hot loops and run in the compiled
  kernel when available.

All functions are pure; no shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import AssemblyError, FieldSpecError
from .fields import OperatorParams, PiecewiseField, WeightDiagnostics, weight_diagnostics
from .mesh import Mesh1D, QuadratureRule, gauss_rule

_CHUNK = 8192  # leaves per kernel call; bounds fallback memory

# panel rule for the Duffy moment integrals
_J_PTS, _J_WTS = np.polynomial.legendre.leggauss(24)
_J_PTS = 0.5 * (_J_PTS + 1.0)
_J_WTS = 0.5 * _J_WTS


@dataclass(frozen=True, eq=False)
class AssembledForms:
    """Dense Galerkin matrices of one problem instance.

    B = K_loc + K_frac is the weak-form energy matrix; W the weighted
    mass matrix of m; M the plain mass matrix over Omega; c_vec the
    constraint vector (c_vec . u = int_Omega m u).  ``active`` lists the
    degrees of freedom carrying energy: all nodes when beta != 0,
    interior nodes only in the classical limit beta == 0 (collar hats
    have no energy there and are excluded from solves).
    """

    mesh: Mesh1D
    params: OperatorParams
    weight: PiecewiseField
    quad: QuadratureRule
    K_loc: np.ndarray = field(repr=False)
    K_frac: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    c_vec: np.ndarray = field(repr=False)
    diagnostics: WeightDiagnostics
    active: np.ndarray = field(repr=False)
    tail_model: str = "constant-extension"

    @property
    def n_dof(self) -> int:
        return self.mesh.n_nodes


def _check_field_domain(mesh: Mesh1D, f: PiecewiseField, what: str):
    if f.a != mesh.a or f.b != mesh.b:
        raise FieldSpecError(
            f"{what} field lives on ({f.a}, {f.b}); mesh interval is "
            f"({mesh.a}, {mesh.b})")


def _local_stiffness(mesh: Mesh1D) -> np.ndarray:
    """int_Omega phi_i' phi_j' dx (no alpha factor)."""
    n = mesh.n_nodes
    K = np.zeros((n, n))
    xl, xr = mesh.element_bounds()
    for e in mesh.interior_elements():
        c = 1.0 / (xr[e] - xl[e])
        K[e, e] += c
        K[e + 1, e + 1] += c
        K[e, e + 1] -= c
        K[e + 1, e] -= c
    return K


def _piece_overlaps(mesh: Mesh1D, f: PiecewiseField):
    """Yield (element, t0, t1, value): constant pieces of f per element,
    in local coordinates t = (x - x_left)/len of the element."""
    xl, xr = mesh.element_bounds()
    pieces = f.pieces()
    for e in mesh.interior_elements():
        x0, x1 = xl[e], xr[e]
        inv = 1.0 / (x1 - x0)
        for p0, p1, v in pieces:
            lo, hi = max(p0, x0), min(p1, x1)
            if hi <= lo:
                continue
            yield e, (lo - x0) * inv, (hi - x0) * inv, v


def _field_mass_matrix(mesh: Mesh1D, f: PiecewiseField) -> np.ndarray:
    """int_Omega f phi_i phi_j dx, exact for piecewise-constant f."""
    n = mesh.n_nodes
    A = np.zeros((n, n))
    xl, xr = mesh.element_bounds()
    for e, t0, t1, v in _piece_overlaps(mesh, f):
        le = (xr[e] - xl[e]) * v
        ill = le * ((1 - t0) ** 3 - (1 - t1) ** 3) / 3.0
        irr = le * (t1 ** 3 - t0 ** 3) / 3.0
        ilr = le * ((t1 ** 2 / 2 - t1 ** 3 / 3) - (t0 ** 2 / 2 - t0 ** 3 / 3))
        A[e, e] += ill
        A[e + 1, e + 1] += irr
        A[e, e + 1] += ilr
        A[e + 1, e] += ilr
    return A


def load_vector(mesh: Mesh1D, f: PiecewiseField) -> np.ndarray:
    """F_i = int_Omega f phi_i dx, exact for piecewise-constant f."""
    _check_field_domain(mesh, f, f.role)
    n = mesh.n_nodes
    F = np.zeros(n)
    xl, xr = mesh.element_bounds()
    for e, t0, t1, v in _piece_overlaps(mesh, f):
        le = (xr[e] - xl[e]) * v
        F[e] += le * ((1 - t0) ** 2 - (1 - t1) ** 2) / 2.0
        F[e + 1] += le * (t1 ** 2 - t0 ** 2) / 2.0
    return F


def _mass_matrix(mesh: Mesh1D) -> np.ndarray:
    """Plain P1 mass matrix over Omega."""
    one = PiecewiseField(mesh.a, mesh.b, (), (1.0,), role="coefficient")
    return _field_mass_matrix(mesh, one)


# --- nonlocal part -----------------------------------------------------------


def _duffy_panel_integral(m: int, c: float, s: float) -> float:
    """Q(m, c, s) = int_0^1 t^m (1 + c t)^(-1-2s) dt by graded composite Gauss.

    The integrand has a pole at t = -1/c; for large aspect ratios c the
    panels are graded geometrically toward 0 so every panel sees the
    pole at a comparable distance.
    """
    if c <= 2.0:
        cuts = [0.0, 1.0]
    else:
        cuts = [0.0]
        t = 1.0 / c
        while t < 1.0:
            cuts.append(t)
            t *= 2.0
        cuts.append(1.0)
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        t = lo + (hi - lo) * _J_PTS
        total += (hi - lo) * np.sum(_J_WTS * t ** m * (1.0 + c * t) ** (-1.0 - 2.0 * s))
    return total


def _duffy_moments(de: float, df: float, s: float) -> tuple[float, float, float]:
    """J_20, J_11, J_02 with J_ab = iint_{[0,de]x[0,df]} xi^a ups^b (xi+ups)^(-1-2s)."""
    pw = 3.0 - 2.0 * s
    c, cp = df / de, de / df
    out = []
    for a, b in ((2, 0), (1, 1), (0, 2)):
        t1 = c ** (b + 1) * de ** pw / pw * _duffy_panel_integral(b, c, s)
        t2 = cp ** (a + 1) * df ** pw / pw * _duffy_panel_integral(a, cp, s)
        out.append(t1 + t2)
    return out[0], out[1], out[2]


def _identical_blocks(K: np.ndarray, mesh: Mesh1D, beta: float, s: float):
    """Exact closed form: on e x e the integrand is
    slope_i slope_j |x-y|^(1-2s), and iint_{e x e} |x-y|^(1-2s)
    = 2 len^(3-2s) / ((2-2s)(3-2s))."""
    xl, xr = mesh.element_bounds()
    for e in mesh.interior_elements():
        le = xr[e] - xl[e]
        i0 = 2.0 * le ** (3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s))
        c = 0.5 * beta * i0 / (le * le)
        K[e, e] += c
        K[e + 1, e + 1] += c
        K[e, e + 1] -= c
        K[e + 1, e] -= c


def _adjacent_blocks(K: np.ndarray, mesh: Mesh1D, beta: float, s: float):
    """Duffy blocks for vertex-touching pairs (e, e+1) meeting Q.

    With xi = v - x into the left element and ups = y - v into the right
    one, phi_g(x) - phi_g(y) = p_g xi + r_g ups is homogeneous linear,
    so the pair block is a quadratic form in the moments J_ab.
    """
    xl, xr = mesh.element_bounds()
    lo, hi = mesh.n_col, mesh.n_col + mesh.n_in
    for e in range(lo - 1, hi):
        de = xr[e] - xl[e]
        df = xr[e + 1] - xl[e + 1]
        j20, j11, j02 = _duffy_moments(de, df, s)
        p = np.array([1.0 / de, -1.0 / de, 0.0])
        r = np.array([0.0, 1.0 / df, -1.0 / df])
        block = (np.outer(p, p) * j20 + (np.outer(p, r) + np.outer(r, p)) * j11
                 + np.outer(r, r) * j02)
        idx = (e, e + 1, e + 2)
        K[np.ix_(idx, idx)] += beta * block


def _separated_leaves(mesh: Mesh1D, depth: int):
    """Leaf rectangles for all separated pairs meeting Q.

    Unordered pairs (e, f), f >= e + 2, at least one interior.  A leaf
    is admissible when its gap dominates both side lengths; otherwise
    the longer side is bisected, at most ``depth`` times per side pair.
    Yields (rects, e_idx, f_idx) chunks.
    """
    xl, xr = mesh.element_bounds()
    n_el = mesh.n_elements
    lo, hi = mesh.n_col, mesh.n_col + mesh.n_in
    e_all, f_all = np.triu_indices(n_el, k=2)
    keep = ((e_all >= lo) & (e_all < hi)) | ((f_all >= lo) & (f_all < hi))
    e_all, f_all = e_all[keep], f_all[keep]

    rects = np.stack([xl[e_all], xr[e_all], xl[f_all], xr[f_all]], axis=1)
    owners = np.stack([e_all, f_all], axis=1)
    for _ in range(depth + 1):
        if rects.shape[0] == 0:
            return
        lex = rects[:, 1] - rects[:, 0]
        ley = rects[:, 3] - rects[:, 2]
        gap = rects[:, 2] - rects[:, 1]
        ok = gap >= np.maximum(lex, ley) * (1.0 - 1e-12)
        if ok.any():
            yield rects[ok], owners[ok, 0], owners[ok, 1]
        rects, owners = rects[~ok], owners[~ok]
        if rects.shape[0] == 0:
            return
        lex, ley = lex[~ok], ley[~ok]
        split_x = lex >= ley
        mid_x = 0.5 * (rects[:, 0] + rects[:, 1])
        mid_y = 0.5 * (rects[:, 2] + rects[:, 3])
        left = rects.copy()
        right = rects.copy()
        # split the x side where it is longer, else the y side
        left[split_x, 1] = mid_x[split_x]
        right[split_x, 0] = mid_x[split_x]
        left[~split_x, 3] = mid_y[~split_x]
        right[~split_x, 2] = mid_y[~split_x]
        rects = np.concatenate([left, right])
        owners = np.concatenate([owners, owners])
    if rects.shape[0]:
        yield rects, owners[:, 0], owners[:, 1]  # depth cap reached


def _separated_matrix(mesh: Mesh1D, beta: float, s: float,
                      quad: QuadratureRule) -> np.ndarray:
    """Assemble all separated-pair contributions through the kernel backend."""
    n = mesh.n_nodes
    xl, xr = mesh.element_bounds()
    expo = 1.0 + 2.0 * s
    rows_l: list[np.ndarray] = []
    cols_l: list[np.ndarray] = []
    vals_l: list[np.ndarray] = []
    for rects, e_idx, f_idx in _separated_leaves(mesh, quad.split_depth):
        for start in range(0, rects.shape[0], _CHUNK):
            sl = slice(start, start + _CHUNK)
            rc, ee, ff = rects[sl], e_idx[sl], f_idx[sl]
            L = rc.shape[0]
            vx = np.zeros((L, 4, 2))
            vy = np.zeros((L, 4, 2))
            for side, (col0, col1) in enumerate(((0, 1), (2, 3))):
                el = ee if side == 0 else ff
                tgt = vx if side == 0 else vy
                inv = 1.0 / (xr[el] - xl[el])
                slot = 2 * side
                # hat at the left node of the element, then the right one
                tgt[:, slot, 0] = (xr[el] - rc[:, col0]) * inv
                tgt[:, slot, 1] = (xr[el] - rc[:, col1]) * inv
                tgt[:, slot + 1, 0] = (rc[:, col0] - xl[el]) * inv
                tgt[:, slot + 1, 1] = (rc[:, col1] - xl[el]) * inv
            blocks = _kernels.pair_blocks(
                np.ascontiguousarray(rc), np.ascontiguousarray(vx),
                np.ascontiguousarray(vy), expo, quad.points, quad.weights)
            blocks *= beta  # (beta/2) times the two ordered copies
            idx = np.stack([ee, ee + 1, ff, ff + 1], axis=1)
            rows_l.append(np.repeat(idx, 4, axis=1).ravel())
            cols_l.append(np.tile(idx, (1, 4)).ravel())
            vals_l.append(blocks.ravel())
    if not rows_l:
        return np.zeros((n, n))
    acc = sp.coo_matrix(
        (np.concatenate(vals_l), (np.concatenate(rows_l), np.concatenate(cols_l))),
        shape=(n, n))
    return acc.toarray()


def _graded_segments(x0: float, x1: float, sing: float, toward_right: bool,
                     max_splits: int = 60):
    """Split [x0, x1] so each piece is no longer than its distance to the
    singularity at ``sing`` (beyond the x1 end iff toward_right), carving
    from the near end and at least halving per step."""
    segs = []
    lo, hi = x0, x1
    for _ in range(max_splits):
        if toward_right:
            dist = sing - hi
            if hi - lo <= dist:
                break
            cut = max(hi - dist, 0.5 * (lo + hi))
            segs.append((cut, hi))
            hi = cut
        else:
            dist = lo - sing
            if hi - lo <= dist:
                break
            cut = min(lo + dist, 0.5 * (lo + hi))
            segs.append((lo, cut))
            lo = cut
    segs.append((lo, hi))
    return segs


def _tail_matrix(mesh: Mesh1D, beta: float, s: float,
                 quad: QuadratureRule) -> np.ndarray:
    """Constant-extension tail correction.

    For each side, beta * int_Omega psi_i psi_j T(x) dx with
    T(x) = dist(x, outer node)^(-2s) / (2s) and psi_i = phi_i - delta at
    that side's outermost node.  Elements longer than their distance to
    the outer node are graded first.
    """
    n = mesh.n_nodes
    K = np.zeros((n, n))
    xl, xr = mesh.element_bounds()
    pts, wts = quad.points, quad.weights
    for right_side in (False, True):
        outer = mesh.nodes[-1] if right_side else mesh.nodes[0]
        end_idx = n - 1 if right_side else 0
        for e in mesh.interior_elements():
            x0, x1 = xl[e], xr[e]
            inv = 1.0 / (x1 - x0)
            idx = (e, e + 1, end_idx)
            block = np.zeros((3, 3))
            for s0, s1 in _graded_segments(x0, x1, outer, right_side):
                x = s0 + (s1 - s0) * pts
                T = np.abs(outer - x) ** (-2.0 * s) / (2.0 * s)
                w = (s1 - s0) * wts * T
                psi = np.stack([(xr[e] - x) * inv, (x - xl[e]) * inv,
                                np.full_like(x, -1.0)])
                block += np.einsum("p,ip,jp->ij", w, psi, psi)
            K[np.ix_(idx, idx)] += beta * block
    return K


def _nonlocal_matrix(mesh: Mesh1D, params: OperatorParams,
                     quad: QuadratureRule) -> np.ndarray:
    beta, s = params.beta, params.s
    n = mesh.n_nodes
    K = np.zeros((n, n))
    if beta == 0.0:
        return K
    _identical_blocks(K, mesh, beta, s)
    _adjacent_blocks(K, mesh, beta, s)
    K += _separated_matrix(mesh, beta, s, quad)
    K += _tail_matrix(mesh, beta, s, quad)
    return K


def assemble(params: OperatorParams, mesh: Mesh1D, weight: PiecewiseField,
             quad: QuadratureRule | None = None) -> AssembledForms:
    """Assemble all dense forms of one problem instance.

    Raises AssemblyError for dimension mismatches or if the assembled
    matrices violate the structural invariants (symmetry, B 1 = 0).
    """
    if params.n != 1:
        raise AssemblyError(f"assembly is one-dimensional; got n = {params.n}")
    _check_field_domain(mesh, weight, "weight")
    if quad is None:
        quad = gauss_rule()

    K_loc = params.alpha * _local_stiffness(mesh)
    K_frac = _nonlocal_matrix(mesh, params, quad)
    B = K_loc + K_frac
    W = _field_mass_matrix(mesh, weight)
    M = _mass_matrix(mesh)
    c_vec = load_vector(mesh, weight)

    scale = max(np.abs(B).max(), 1e-300)
    if np.abs(B - B.T).max() > 1e-13 * scale:
        raise AssemblyError("assembled B lost symmetry")
    if np.abs(B @ np.ones(mesh.n_nodes)).max() > 1e-10 * scale * math.sqrt(mesh.n_nodes):
        raise AssemblyError("assembled B does not annihilate constants")

    if params.beta != 0.0:
        active = np.arange(mesh.n_nodes)
    else:
        active = np.flatnonzero(mesh.interior_mask)
    return AssembledForms(
        mesh=mesh, params=params, weight=weight, quad=quad,
        K_loc=K_loc, K_frac=K_frac, B=B, W=W, M=M, c_vec=c_vec,
        diagnostics=weight_diagnostics(weight), active=active)


def seminorm_sq(forms: AssembledForms, v: np.ndarray) -> float:
    """Squared Gagliardo-type seminorm of the nodal vector v: B(v, v)/2,
    i.e. (alpha/2) int |v'|^2 + (beta/4) iint_Q."""
    v = np.asarray(v, dtype=float)
    if v.shape != (forms.B.shape[0],):
        raise AssemblyError(
            f"vector of length {v.shape} does not match "
            f"{forms.B.shape[0]} mesh nodes")
    return 0.5 * float(v @ forms.B @ v)


@dataclass(frozen=True, eq=False)
class GraphForm:
    """Nonnegative-weight difference form v -> sum_ij w_ij (v_i - v_j)^2.

    Edges are unordered node pairs.  ``value`` accepts a single vector
    or a batch (..., n_nodes).
    """

    n_nodes: int
    ii: np.ndarray = field(repr=False)
    jj: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)

    def __post_init__(self):
        if np.any(self.w < 0) or not np.all(np.isfinite(self.w)):
            raise AssemblyError("graph-form weights must be finite and >= 0")
        if self.ii.shape != self.jj.shape or self.ii.shape != self.w.shape:
            raise AssemblyError("graph-form edge arrays must share a shape")

    def value(self, v: np.ndarray) -> float | np.ndarray:
        v = np.asarray(v, dtype=float)
        d = v[..., self.ii] - v[..., self.jj]
        out = (self.w * d * d).sum(axis=-1)
        return float(out) if out.ndim == 0 else out


def graph_form(params: OperatorParams, mesh: Mesh1D,
               quad: QuadratureRule | None = None) -> GraphForm:
    """Collocation of the nonlocal form at node pairs.

    w_ij = beta * omega_i omega_j |x_i - x_j|^(-1-2s) for unordered
    pairs with at least one node in [a, b]; omega are trapezoid node
    weights (quad is accepted for interface uniformity but the
    collocation weights are always trapezoidal).  The value on smooth
    nodal vectors tracks v' K_frac v to first order in the mesh size
    (consistency is monitored, not exact).
    """
    x = mesh.nodes
    n = x.size
    el_len = np.diff(x)
    omega = np.zeros(n)
    omega[:-1] += 0.5 * el_len
    omega[1:] += 0.5 * el_len
    ii, jj = np.triu_indices(n, k=1)
    keep = mesh.interior_mask[ii] | mesh.interior_mask[jj]
    ii, jj = ii[keep], jj[keep]
    w = params.beta * omega[ii] * omega[jj] * np.abs(x[ii] - x[jj]) ** (-1.0 - 2.0 * params.s)
    return GraphForm(n_nodes=n, ii=ii, jj=jj, w=w)
