"""Weighted eigenproblem, source solve, and boundary-condition residuals.

The eigenproblem B u = lambda W u is posed on the subspace
V = {u : sum_i c_i u_i = 0} (discrete zero weighted mean).  Constants are
excluded from V whenever the weight has nonzero integral, so B restricted
to V is positive definite and a Cholesky reduction applies:

    B_V = L L^T,   S = L^-1 W_V L^-T  (symmetric),
    S y = mu y,    lambda = 1 / mu,   u = Vb L^-T y.

The k_pos largest positive mu give the smallest positive lambdas and the
k_neg most negative mu give the negative lambdas closest to zero.  The
zero eigenvalue is attached analytically with a constant eigenvector.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .assembly import AssembledForms, load_vector
from .errors import (
    DegenerateDirectionError,
    DegenerateWeightError,
    DiscretePoincareError,
    NumericalError,
    ZeroFluxViolationError,
)
from .fields import PiecewiseField
from .mesh import Mesh1D

_GAUSS_PTS, _GAUSS_WTS = np.polynomial.legendre.leggauss(16)
_GAUSS_PTS = 0.5 * (_GAUSS_PTS + 1.0)
_GAUSS_WTS = 0.5 * _GAUSS_WTS


class ReducedCountWarning(UserWarning):
    """Fewer eigenvalues than requested exist on one side of zero."""


@dataclass(frozen=True, eq=False)
class EigenPair:
    """One eigenvalue with its nodal eigenvector.

    index is 0 for the zero mode, k >= 1 for the k-th positive
    eigenvalue, -k for the k-th negative one.  normalization stores the
    achieved value of u'Wu (or u'Mu = 1 for the zero mode).
    """

    index: int
    value: float
    u: np.ndarray
    residual: float
    normalization: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Two-sided spectrum around the zero mode.

    negatives is descending (closest to zero first), positives ascending.
    weight_integral is carried along so structure queries can pick the
    principal side without re-deriving the weight.
    """

    negatives: tuple
    zero: EigenPair
    positives: tuple
    k_pos: int
    k_neg: int
    weight_integral: float

    def all_pairs(self):
        return (*self.negatives, self.zero, *self.positives)


@dataclass(frozen=True)
class FirstEigenStructure:
    side: str
    simple: bool
    gap: float
    signed: bool
    min_over_max: float


@dataclass(frozen=True)
class NeumannResiduals:
    """Boundary-condition residuals; a dropped condition reports None."""

    collar_x: np.ndarray
    ns_values: np.ndarray | None
    normal_deriv: tuple | None


def householder_null_basis(c):
    """Orthonormal basis of {v : c.v = 0} as columns, shape (n, n-1).

    Columns 1: of the Householder reflection sending c to a multiple of
    e_1; exact orthogonality to c up to rounding.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise DegenerateWeightError("constraint vector must be a nonempty 1-d array")
    nrm = np.linalg.norm(c)
    if nrm == 0.0:
        raise DegenerateWeightError(
            "constraint vector is zero: the weight pairs to zero with every "
            "basis function, so the zero-weighted-mean subspace is undefined"
        )
    w = c.copy()
    w[0] += nrm if c[0] >= 0 else -nrm
    H = np.eye(c.size) - (2.0 / (w @ w)) * np.outer(w, w)
    return H[:, 1:]


def v_basis(forms: AssembledForms):
    """Basis of the discrete zero-weighted-mean subspace on active DOFs."""
    c = forms.c_vec[forms.active]
    scale = np.abs(forms.W).max()
    if np.linalg.norm(c) <= 1e-14 * max(scale, 1e-300) * np.sqrt(c.size):
        raise DegenerateWeightError(
            "weight integrates to zero against every basis function; "
            "a nonzero weight integral is required"
        )
    return householder_null_basis(c)


def _embed(forms: AssembledForms, v_act):
    """Lift an active-DOF vector to all nodes.

    In the classical limit (beta = 0) collar nodes carry no energy; they
    are filled by constant extension of the boundary values so profiles
    stay flat outside the interval.
    """
    mesh = forms.mesh
    u = np.zeros(mesh.n_nodes)
    u[forms.active] = v_act
    if forms.params.beta == 0.0:
        u[: mesh.n_col] = u[mesh.n_col]
        u[mesh.n_col + mesh.n_in + 1 :] = u[mesh.n_col + mesh.n_in]
    return u


def _orient(forms: AssembledForms, u):
    """Flip sign so the interval integral is >= 0.

    When the integral is numerically zero (symmetric modes), fall back to
    the sign of the largest-magnitude entry so output stays deterministic.
    """
    g = forms.M @ np.ones(u.size)
    z = g @ u
    if abs(z) > 1e-10 * np.linalg.norm(g) * np.linalg.norm(u):
        s = 1.0 if z > 0 else -1.0
    else:
        s = 1.0 if u[np.argmax(np.abs(u))] >= 0 else -1.0
    return s * u


def _pair_residual(forms: AssembledForms, lam, u):
    r = forms.B @ u - lam * (forms.W @ u)
    den = np.linalg.norm(forms.B @ u) + abs(lam) * np.linalg.norm(forms.W @ u)
    return float(np.linalg.norm(r) / den)


def _zero_pair(forms: AssembledForms):
    mesh = forms.mesh
    u = np.full(mesh.n_nodes, 1.0 / np.sqrt(mesh.b - mesh.a))
    # residual relative to operator scale: the natural denominator
    # |Bu| + |lam||Wu| vanishes together with the numerator here
    num = np.linalg.norm(forms.B @ u)
    den = np.linalg.norm(forms.B, "fro") * np.linalg.norm(u)
    residual = float(num / den) if den > 0 else 0.0
    norm_val = float(u @ forms.M @ u)
    return EigenPair(index=0, value=0.0, u=u, residual=residual, normalization=norm_val)


def solve_spectrum(forms: AssembledForms, k_pos: int, k_neg: int, diagnostic: bool = False) -> Spectrum:
    """Solve the two-sided weighted eigenproblem on V.

    diagnostic=True waives the sign-change requirement on the weight
    (used for classical-limit checks with a one-signed weight); the
    nonzero-integral requirement always applies.
    """
    if not (isinstance(k_pos, (int, np.integer)) and isinstance(k_neg, (int, np.integer))):
        raise TypeError("eigenvalue counts must be integers")
    if k_pos < 0 or k_neg < 0:
        raise ValueError("eigenvalue counts must be >= 0")
    d = forms.diagnostics
    if d.integral_vanishes:
        raise DegenerateWeightError(
            "weight integral vanishes: the constant direction cannot be "
            "split off and the spectral reduction is unavailable"
        )
    if not diagnostic and (d.plus_vanishes or d.minus_vanishes):
        missing = "positive" if d.plus_vanishes else "negative"
        raise DegenerateWeightError(
            f"weight has no {missing} part; a two-sided spectrum requires "
            "a sign-changing weight (pass diagnostic=True to waive)"
        )

    act = forms.active
    B = forms.B[np.ix_(act, act)]
    W = forms.W[np.ix_(act, act)]
    Vb = v_basis(forms)
    B_V = Vb.T @ B @ Vb
    W_V = Vb.T @ W @ Vb
    B_V = 0.5 * (B_V + B_V.T)
    W_V = 0.5 * (W_V + W_V.T)

    try:
        L = np.linalg.cholesky(B_V)
    except np.linalg.LinAlgError as exc:
        raise DiscretePoincareError(
            "energy form is not positive definite on the zero-weighted-mean "
            "subspace; the discrete Poincare inequality fails on this mesh"
        ) from exc

    Y = sla.solve_triangular(L, W_V, lower=True)
    S = sla.solve_triangular(L, Y.T, lower=True)
    asym = np.abs(S - S.T).max()
    if asym > 1e-10 * max(np.abs(S).max(), 1e-300):
        raise NumericalError("transformed eigenproblem lost symmetry")
    S = 0.5 * (S + S.T)
    mu, Z = np.linalg.eigh(S)

    cutoff = np.abs(mu).max() * mu.size * np.finfo(float).eps if mu.size else 0.0
    pos_idx = np.flatnonzero(mu > cutoff)[::-1]      # descending mu -> ascending lambda
    neg_idx = np.flatnonzero(mu < -cutoff)           # ascending mu -> descending lambda
    if len(pos_idx) < k_pos or len(neg_idx) < k_neg:
        warnings.warn(
            f"only {len(pos_idx)} positive / {len(neg_idx)} negative "
            f"eigenvalues available (requested {k_pos}/{k_neg})",
            ReducedCountWarning,
            stacklevel=2,
        )

    def make_pair(j, index):
        lam = 1.0 / mu[j]
        x = sla.solve_triangular(L, Z[:, j], lower=True, trans="T")
        u = _embed(forms, Vb @ x)
        q = float(u @ forms.W @ u)
        if q * np.sign(lam) <= 0:
            raise NumericalError("eigenvector has inconsistent weighted norm sign")
        u = _orient(forms, u / np.sqrt(abs(q)))
        return EigenPair(
            index=index,
            value=float(lam),
            u=u,
            residual=_pair_residual(forms, lam, u),
            normalization=float(u @ forms.W @ u),
        )

    positives = tuple(make_pair(j, k + 1) for k, j in enumerate(pos_idx[:k_pos]))
    negatives = tuple(make_pair(j, -(k + 1)) for k, j in enumerate(neg_idx[:k_neg]))
    return Spectrum(
        negatives=negatives,
        zero=_zero_pair(forms),
        positives=positives,
        k_pos=int(k_pos),
        k_neg=int(k_neg),
        weight_integral=d.integral,
    )


def rayleigh(forms: AssembledForms, v) -> float:
    """Weak-form Rayleigh quotient v'Bv / v'Wv on full nodal vectors."""
    v = np.asarray(v, dtype=float)
    num = float(v @ forms.B @ v)
    den = float(v @ forms.W @ v)
    if abs(den) <= 1e-14 * max(np.abs(forms.W).max(), 1e-300) * float(v @ v):
        raise DegenerateDirectionError(
            "direction has zero weighted norm; the Rayleigh quotient is undefined"
        )
    return num / den


def first_eigen_structure(spectrum: Spectrum, refined: Spectrum | None = None) -> FirstEigenStructure:
    """Structure of the principal eigenvalue: simplicity gap and sign.

    The principal side is the positive one when the weight integral is
    negative, mirrored otherwise.  With a refined spectrum supplied,
    simplicity additionally requires the gap to persist there.
    """
    if spectrum.weight_integral < 0:
        side, pairs = "positive", spectrum.positives
    else:
        side, pairs = "negative", spectrum.negatives
    if len(pairs) < 2:
        raise NumericalError(
            f"need at least two {side} eigenvalues to assess the principal "
            f"gap, have {len(pairs)}"
        )
    lam1, lam2 = pairs[0].value, pairs[1].value
    gap = abs(lam2 - lam1) / abs(lam1)
    simple = gap > 1e-6
    if refined is not None:
        sub = first_eigen_structure(refined)
        simple = simple and sub.gap > 1e-6
    u = pairs[0].u
    umin, umax = float(u.min()), float(u.max())
    signed = umin >= -1e-8 * max(umax, 0.0)
    mom = umin / umax if umax != 0.0 else np.inf
    return FirstEigenStructure(
        side=side, simple=bool(simple), gap=float(gap), signed=bool(signed), min_over_max=float(mom)
    )


def solve_source(forms: AssembledForms, f: PiecewiseField):
    """Solve B u = F for a zero-flux source, gauged to zero interval mean.

    F_i = integral of f against the i-th hat.  Compatibility requires the
    source to integrate to zero; the solution is unique in the gauge
    because constants span the kernel of B.
    """
    mesh = forms.mesh
    if not (f.a == mesh.a and f.b == mesh.b):
        raise ZeroFluxViolationError("source field domain does not match the mesh interval")
    l1 = f.lq_norm(1.0)
    if abs(f.integral()) > 1e-10 * l1:
        raise ZeroFluxViolationError(
            "source does not integrate to zero over the interval; testing the "
            "weak form against the constant function shows no solution exists"
        )
    act = forms.active
    B = forms.B[np.ix_(act, act)]
    F = load_vector(mesh, f)[act]
    g_full = forms.M @ np.ones(mesh.n_nodes)
    G = householder_null_basis(g_full[act])
    try:
        cho = sla.cho_factor(G.T @ B @ G)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("gauged source system is singular") from exc
    u_act = G @ sla.cho_solve(cho, G.T @ F)

    nF = np.linalg.norm(F)
    res = np.linalg.norm(B @ u_act - F) / nF if nF > 0 else float(np.linalg.norm(B @ u_act))
    if res > 1e-10:
        raise NumericalError(f"source solve residual {res:.3e} exceeds 1e-10")

    u = _embed(forms, u_act)
    u -= (g_full @ u) / (mesh.b - mesh.a)   # exact re-gauge after embedding
    return u


def neumann_residuals(forms: AssembledForms, mesh: Mesh1D, pair) -> NeumannResiduals:
    """Evaluate both boundary prescriptions for an eigenpair or nodal vector.

    The nonlocal profile is the kernel-weighted deviation of u(x) from u
    over the interval, evaluated at every collar node; the local part is
    the one-sided exterior-normal difference quotient at each endpoint.
    A condition dropped by the operator (alpha = 0 or beta = 0) reports
    None rather than an error.
    """
    u = pair.u if isinstance(pair, EigenPair) else np.asarray(pair, dtype=float)
    if u.shape != (mesh.n_nodes,):
        raise ValueError("nodal vector length does not match the mesh")
    params = forms.params
    collar = np.flatnonzero(~mesh.interior_mask)
    collar_x = mesh.nodes[collar]

    ns_values = None
    if params.beta != 0.0:
        from .assembly import _graded_segments

        expo = 1.0 + 2.0 * params.s
        xl, xr = mesh.element_bounds()
        vals = np.empty(collar.size)
        for row, i in enumerate(collar):
            x, ux = mesh.nodes[i], u[i]
            total = 0.0
            for e in mesh.interior_elements():
                lo, hi = xl[e], xr[e]
                dist = max(lo - x, x - hi)
                segs = _graded_segments(lo, hi, x, x > hi) if dist < (hi - lo) else ((lo, hi),)
                for s0, s1 in segs:
                    y = s0 + (s1 - s0) * _GAUSS_PTS
                    uy = u[e] + (u[e + 1] - u[e]) * (y - lo) / (hi - lo)
                    total += (s1 - s0) * float(
                        np.sum(_GAUSS_WTS * (ux - uy) * np.abs(x - y) ** (-expo))
                    )
            vals[row] = total
        ns_values = vals

    normal_deriv = None
    if params.alpha != 0.0:
        la, ra = mesh.n_col, mesh.n_col + mesh.n_in
        h = mesh.h
        left = (u[la] - u[la + 1]) / h     # exterior normal at a points left
        right = (u[ra] - u[ra - 1]) / h    # exterior normal at b points right
        normal_deriv = (float(left), float(right))

    return NeumannResiduals(collar_x=collar_x, ns_values=ns_values, normal_deriv=normal_deriv)
