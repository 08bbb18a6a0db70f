"""Inequality toolkit and the level-truncation (De Giorgi) machinery.

Level profiles are computed in closed form on the piecewise-linear
interpolant, so monotonicity checks see no sampling noise.  The scalar
inequality checkers allow a few ulps of slack in products to keep true
inequalities from flagging as violated through rounding alone; the random
audits draw from bounded ranges where the mathematical margins dominate
that slack by many orders of magnitude.

Random audits use counter-based streams: Philox keyed by (seed, stream id)
with the stream ids published in STREAMS, so any run is reproducible from
the seed alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .assembly import AssembledForms, GraphForm, seminorm_sq
from .errors import (
    ConvergenceError,
    DegenerateWeightError,
    DiscretePoincareError,
    IntegrabilityError,
    NumericalError,
)
from .fields import PiecewiseField, critical_exponent, sobolev_exponent
from .mesh import Mesh1D
from .spectral import v_basis

_EPS = np.finfo(float).eps

STREAMS = {
    "mediant": 1,
    "truncation": 2,
    "product": 3,
    "decomposition": 4,
    "subspace": 5,
    "sobolev": 6,
    "cone": 7,
}


def stream_rng(seed: int, stream: str) -> np.random.Generator:
    """Counter-based generator for a named audit stream."""
    return np.random.Generator(np.random.Philox(key=[int(seed), STREAMS[stream]]))


@dataclass(frozen=True)
class LevelSetData:
    k: float
    measure: float
    phi: float


@dataclass(frozen=True)
class DeGiorgiReport:
    kappa: float
    K_level: float
    c_star: float
    ladder: tuple
    converged: bool
    bound: float
    sup_plus: float
    C_emp: float


@dataclass(frozen=True)
class SobolevCheck:
    lhs: float
    rhs: float
    ratio: float


@dataclass(frozen=True)
class DecompositionCheck:
    lhs: float
    rhs_plus: float
    rhs_minus: float
    ok: bool


@dataclass(frozen=True)
class AuditResult:
    name: str
    count: int
    violations: int


def poincare_constant(forms: AssembledForms) -> float:
    """Smallest discrete C with int u^2 <= C * seminorm_sq(u) on V.

    Equivalently the largest Rayleigh quotient of the mass form against
    the seminorm form over the zero-weighted-mean subspace.
    """
    if forms.diagnostics.integral_vanishes:
        raise DegenerateWeightError(
            "weight integral vanishes; the zero-weighted-mean subspace does "
            "not exclude constants and no Poincare constant exists"
        )
    act = forms.active
    Vb = v_basis(forms)
    A_V = Vb.T @ (0.5 * forms.B[np.ix_(act, act)]) @ Vb
    M_V = Vb.T @ forms.M[np.ix_(act, act)] @ Vb
    A_V = 0.5 * (A_V + A_V.T)
    M_V = 0.5 * (M_V + M_V.T)
    try:
        L = np.linalg.cholesky(A_V)
    except np.linalg.LinAlgError as exc:
        raise DiscretePoincareError(
            "seminorm form is not positive definite on the subspace"
        ) from exc
    Y = sla.solve_triangular(L, M_V, lower=True)
    S = sla.solve_triangular(L, Y.T, lower=True)
    return float(np.linalg.eigvalsh(0.5 * (S + S.T))[-1])


def project_to_v(forms: AssembledForms, v):
    """Euclidean projection of a nodal vector onto {c_vec . v = 0}."""
    v = np.asarray(v, dtype=float)
    c = forms.c_vec
    cc = c @ c
    if cc == 0.0:
        raise DegenerateWeightError("weight functional vanishes; V is undefined")
    return v - c * ((c @ v) / cc)


def _abs_power_integral(w0: float, w1: float, length: float, eta: float) -> float:
    """int over one element of |linear|^eta, split at a sign change."""

    def one_signed(a, b, ln):
        # divided difference of t^(eta+1) on |values|; stable as a -> b
        a, b = abs(a), abs(b)
        if abs(b - a) <= 1e-12 * max(a, b, 1e-300):
            return ln * (0.5 * (a + b)) ** eta
        return ln * (b ** (eta + 1.0) - a ** (eta + 1.0)) / ((eta + 1.0) * (b - a))

    if w0 == 0.0 and w1 == 0.0:
        return 0.0
    if w0 * w1 >= 0.0:
        return one_signed(w0, w1, length)
    t = w0 / (w0 - w1)
    return one_signed(w0, 0.0, length * t) + one_signed(0.0, w1, length * (1.0 - t))


def sobolev_check(forms: AssembledForms, mesh: Mesh1D, params, q, v) -> SobolevCheck:
    """Compare int |v|^eta against the full energy to the power eta/2.

    The caller supplies v in V (see project_to_v); the interval integral
    is exact on the interpolant per one-signed linear piece.
    """
    v = np.asarray(v, dtype=float)
    eta = sobolev_exponent(params, q)
    xl, xr = mesh.element_bounds()
    lhs = 0.0
    for e in mesh.interior_elements():
        lhs += _abs_power_integral(v[e], v[e + 1], xr[e] - xl[e], eta)
    energy = float(v @ forms.B @ v)
    rhs = energy ** (eta / 2.0) if energy > 0.0 else 0.0
    if rhs == 0.0:
        if lhs > 1e-12:
            raise NumericalError(
                "zero energy with nonzero interval mass: the vector was not "
                "projected into the zero-weighted-mean subspace"
            )
        return SobolevCheck(lhs=float(lhs), rhs=0.0, ratio=0.0)
    return SobolevCheck(lhs=float(lhs), rhs=float(rhs), ratio=float(lhs / rhs))


def check_mediant(a1: float, a2: float, b1: float, b2: float) -> str:
    """Dichotomy for the mediant (a1+a2)/(b1+b2) of two positive ratios.

    Returns "equal-case" when the two ratios agree to 1e-12 relative (the
    mediant then equals the common ratio to the same tolerance) and
    "strict-case" otherwise (the mediant lies strictly below the larger
    ratio, asserted up to 4 ulps).
    """
    if not (a1 > 0 and a2 > 0 and b1 > 0 and b2 > 0):
        raise ValueError("mediant dichotomy requires strictly positive inputs")
    r1, r2 = a1 / b1, a2 / b2
    med = (a1 + a2) / (b1 + b2)
    rmax, rmin = max(r1, r2), min(r1, r2)
    if abs(r1 - r2) <= 1e-12 * rmax:
        tol = 1e-12 * rmax
        if not (rmin - tol <= med <= rmax + tol):
            raise NumericalError("mediant left the bracket of equal ratios")
        return "equal-case"
    if med > rmax * (1.0 + 4.0 * _EPS):
        raise NumericalError("mediant exceeded the larger ratio")
    return "strict-case"


def check_truncation(ux, uy, k):
    """Violation flag for (ux-uy)(v(ux)-v(uy)) >= (v(ux)-v(uy))^2, v = (.-k)+.

    Accepts scalars or arrays; k must be nonnegative.  A few ulps of
    slack absorb rounding in the products.
    """
    ux = np.asarray(ux, dtype=float)
    uy = np.asarray(uy, dtype=float)
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("truncation level must be nonnegative")
    vx = np.maximum(ux - k, 0.0)
    vy = np.maximum(uy - k, 0.0)
    d = vx - vy
    lhs = (ux - uy) * d
    rhs = d * d
    scale = np.abs(ux) + np.abs(uy) + 2.0 * k
    return lhs - rhs < -64.0 * _EPS * scale * scale


def check_product_bound(ux, k):
    """Violation flag for |ux| (ux-k)+ <= 4((ux-k)+^2 + k^2), k >= 0."""
    ux = np.asarray(ux, dtype=float)
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("truncation level must be nonnegative")
    vx = np.maximum(ux - k, 0.0)
    lhs = np.abs(ux) * vx
    rhs = 4.0 * (vx * vx + k * k)
    scale = np.abs(ux) + k
    return lhs - rhs > 64.0 * _EPS * scale * scale


def check_decomposition(g: GraphForm, v) -> DecompositionCheck:
    """Check form(v) >= form(v+) + form(v-) for nodal positive/negative parts."""
    v = np.asarray(v, dtype=float)
    lhs = float(g.value(v))
    rp = float(g.value(np.maximum(v, 0.0)))
    rm = float(g.value(np.maximum(-v, 0.0)))
    ok = lhs >= rp + rm - 1e-12 * abs(lhs)
    return DecompositionCheck(lhs=lhs, rhs_plus=rp, rhs_minus=rm, ok=bool(ok))


def level_profile(mesh: Mesh1D, u, k: float) -> LevelSetData:
    """Exact measure of {u > k} and phi(k) = int (u-k)+^2 on the interpolant."""
    u = np.asarray(u, dtype=float)
    if not np.isfinite(k):
        raise ValueError("level must be finite")
    xl, xr = mesh.element_bounds()
    measure = 0.0
    phi = 0.0
    for e in mesh.interior_elements():
        w0, w1 = u[e] - k, u[e + 1] - k
        ln = xr[e] - xl[e]
        if w0 <= 0.0 and w1 <= 0.0:
            continue
        if w0 >= 0.0 and w1 >= 0.0:
            measure += ln
            phi += ln * (w0 * w0 + w0 * w1 + w1 * w1) / 3.0
        else:
            t = w0 / (w0 - w1)                    # crossing in local coords
            wpos = w1 if w1 > 0.0 else w0
            lpos = ln * (1.0 - t) if w1 > 0.0 else ln * t
            measure += lpos
            phi += lpos * wpos * wpos / 3.0
    return LevelSetData(k=float(k), measure=float(measure), phi=float(phi))


def _sup_plus(mesh: Mesh1D, u) -> float:
    vals = np.asarray(u, dtype=float)[mesh.interior_mask]
    return float(max(vals.max(), 0.0))


def degiorgi_bound(mesh: Mesh1D, forms: AssembledForms, u, f: PiecewiseField | None,
                   q, c_star: float, max_iter: int = 20) -> DeGiorgiReport:
    """Run the level ladder k_l = k_(l-1) + K/2^l and certify a sup bound.

    kappa = ||u+||_L2 / sqrt(c_star) and K = kappa + ||f||_Lq.  The ladder
    is built incrementally with exact dyadic increments, so the step
    identity k_l - k_(l-1) = K/2^l holds bit for bit.  Convergence means
    phi collapsed by twelve orders; the certified bound is then kappa + K.
    Membership of u in the admissible class is the caller's assertion.
    """
    q = float(q)
    q_bar = critical_exponent(forms.params)
    if not np.isfinite(q) or q <= q_bar:
        raise IntegrabilityError(
            f"level iteration needs finite integrability q > {q_bar}, got {q}"
        )
    if not (0.0 < c_star <= mesh.b - mesh.a):
        raise ValueError("c_star must lie in (0, interval length]")
    u = np.asarray(u, dtype=float)

    phi0_full = level_profile(mesh, u, 0.0).phi      # = ||u+||_L2^2
    kappa = float(np.sqrt(phi0_full / c_star))
    fq = float(f.lq_norm(q)) if f is not None else 0.0
    K = kappa + fq

    k = kappa
    phi_k = level_profile(mesh, u, k).phi
    ladder = [(0, k, phi_k)]
    phi_start = phi_k
    converged = phi_start == 0.0
    for ell in range(1, max_iter + 1):
        if converged:
            break
        k = k + K / 2.0 ** ell
        phi_prev = phi_k
        phi_k = level_profile(mesh, u, k).phi
        if phi_k > phi_prev * (1.0 + 1e-12) + 1e-15 * max(phi_start, 1.0):
            raise NumericalError("level energy increased along the ladder")
        ladder.append((ell, k, phi_k))
        if phi_k < 1e-12 * phi_start:
            converged = True

    sup_plus = _sup_plus(mesh, u)
    denom = float(np.sqrt(phi0_full)) + fq
    c_emp = sup_plus / denom if denom > 0.0 else 0.0
    return DeGiorgiReport(
        kappa=kappa,
        K_level=float(K),
        c_star=float(c_star),
        ladder=tuple(ladder),
        converged=bool(converged),
        bound=float(kappa + K),
        sup_plus=sup_plus,
        C_emp=float(c_emp),
    )


def degiorgi_certificate(mesh: Mesh1D, forms: AssembledForms, u, f: PiecewiseField | None,
                         q, max_halvings: int = 20, max_iter: int = 20) -> DeGiorgiReport:
    """Search a smallness threshold by geometric halving from |interval|.

    Returns the first report whose ladder converged and whose certified
    bound dominates the nodal sup; smaller c_star raises the bound, so the
    search terminates for any bounded input.
    """
    c = mesh.b - mesh.a
    for _ in range(max_halvings + 1):
        rep = degiorgi_bound(mesh, forms, u, f, q, c, max_iter=max_iter)
        if rep.converged and rep.sup_plus <= rep.bound + 1e-9:
            return rep
        c *= 0.5
    raise ConvergenceError(
        f"no smallness threshold certified the sup bound within {max_halvings} halvings"
    )


def audit_mediant(count: int, seed: int) -> AuditResult:
    """Random audit of the mediant dichotomy on bounded positive inputs."""
    rng = stream_rng(seed, "mediant")
    draws = rng.random((count, 4))
    a1, a2, b1, b2 = (0.1 + 10.0 * draws[:, j] for j in range(4))
    r1, r2 = a1 / b1, a2 / b2
    med = (a1 + a2) / (b1 + b2)
    rmax = np.maximum(r1, r2)
    rmin = np.minimum(r1, r2)
    equal = np.abs(r1 - r2) <= 1e-12 * rmax
    tol = 1e-12 * rmax
    bad_equal = equal & ((med > rmax + tol) | (med < rmin - tol))
    bad_strict = ~equal & (med > rmax * (1.0 + 4.0 * _EPS))
    return AuditResult("mediant", count, int(np.count_nonzero(bad_equal | bad_strict)))


def audit_truncation(count: int, seed: int) -> AuditResult:
    rng = stream_rng(seed, "truncation")
    ux = rng.uniform(-5.0, 5.0, count)
    uy = rng.uniform(-5.0, 5.0, count)
    k = rng.uniform(0.0, 3.0, count)
    return AuditResult("truncation", count, int(np.count_nonzero(check_truncation(ux, uy, k))))


def audit_product_bound(count: int, seed: int) -> AuditResult:
    rng = stream_rng(seed, "product")
    ux = rng.uniform(-5.0, 5.0, count)
    k = rng.uniform(0.0, 3.0, count)
    return AuditResult("product", count, int(np.count_nonzero(check_product_bound(ux, k))))


def audit_decomposition(g: GraphForm, count: int, seed: int) -> AuditResult:
    rng = stream_rng(seed, "decomposition")
    violations = 0
    chunk = 512
    done = 0
    while done < count:
        n = min(chunk, count - done)
        V = rng.normal(size=(n, g.n_nodes))
        lhs = g.value(V)
        rp = g.value(np.maximum(V, 0.0))
        rm = g.value(np.maximum(-V, 0.0))
        violations += int(np.count_nonzero(lhs < rp + rm - 1e-12 * np.abs(lhs)))
        done += n
    return AuditResult("decomposition", count, violations)


def random_v_samples(forms: AssembledForms, count: int, seed: int):
    """Random nodal vectors projected into V, one per row."""
    rng = stream_rng(seed, "subspace")
    act = forms.active
    c = forms.c_vec
    X = np.zeros((count, forms.mesh.n_nodes))
    X[:, act] = rng.normal(size=(count, act.size))
    X -= np.outer((X @ c) / (c @ c), c)
    return X


def random_smooth_samples(forms: AssembledForms, count: int, seed: int,
                          modes: int = 12):
    """Mesh-coherent random smooth functions in V, one per row.

    Rows are fixed continuum functions (random cosine series over the
    collared interval, coefficients decaying like 1/j) shifted by the
    constant that zeroes the weight integral, then sampled at the nodes.
    The same (seed, count, modes) therefore describes the same functions
    on every refinement of one collared interval, which is what makes
    empirical functional constants comparable across meshes; white nodal
    noise has no continuum limit and its extremal ratios collapse under
    refinement.
    """
    mesh = forms.mesh
    c = forms.c_vec
    total = float(c @ np.ones(mesh.n_nodes))
    if abs(total) <= 1e-14 * np.abs(c).sum():
        raise DegenerateWeightError(
            "weight integral vanishes: the constant shift into V is unavailable")
    rng = stream_rng(seed, "sobolev")
    coef = rng.standard_normal((count, modes)) / np.arange(1.0, modes + 1.0)
    lo, hi = mesh.nodes[0], mesh.nodes[-1]
    t = (mesh.nodes - lo) / (hi - lo)
    basis = np.cos(np.pi * np.outer(np.arange(1, modes + 1), t))
    X = coef @ basis
    # subtract the weighted mean as a constant: stays smooth, lands in V
    X -= ((X @ c) / total)[:, None]
    return X


def random_cone_samples(forms: AssembledForms, count: int, seed: int):
    """Random v in V with v'Wv > 0, one per row.

    A plain Gaussian in V almost never has a positive weighted norm when
    the negative part of the weight dominates, so samples are built from
    the sign-split eigenbasis of W on V: a Gaussian positive-subspace
    component plus a negative-subspace component scaled by a random
    factor strictly below the norm-cancelling one.
    """
    from .errors import DegenerateDirectionError

    rng = stream_rng(seed, "cone")
    act = forms.active
    Vb = v_basis(forms)
    W_V = Vb.T @ forms.W[np.ix_(act, act)] @ Vb
    mu, Q = np.linalg.eigh(0.5 * (W_V + W_V.T))
    pos = mu > 0.0
    if not pos.any():
        raise DegenerateDirectionError("weight form has no positive directions on V")
    Zp = rng.normal(size=(count, int(pos.sum())))
    Zn = rng.normal(size=(count, int((~pos).sum())))
    p = Zp * Zp @ mu[pos]
    n = -(Zn * Zn @ mu[~pos])
    with np.errstate(divide="ignore"):
        t_max = np.where(n > 0.0, np.sqrt(p / np.where(n > 0.0, n, 1.0)), np.inf)
    t = rng.random(count) * 0.9 * np.minimum(t_max, 1e6)
    Y = Zp @ Q[:, pos].T + (t[:, None] * Zn) @ Q[:, ~pos].T
    X = np.zeros((count, forms.mesh.n_nodes))
    X[:, act] = Y @ Vb.T
    return X


def sample_rayleigh_min(forms: AssembledForms, lam1: float, count: int, seed: int) -> AuditResult:
    """Count samples v in V with positive weighted norm whose Rayleigh
    quotient drops below lam1 - 1e-8 (none should)."""
    X = random_cone_samples(forms, count, seed)
    num = np.einsum("ij,jk,ik->i", X, forms.B, X)
    den = np.einsum("ij,jk,ik->i", X, forms.W, X)
    usable = den > 0.0
    bad = num[usable] / den[usable] < lam1 - 1e-8
    return AuditResult("rayleigh-min", int(np.count_nonzero(usable)), int(np.count_nonzero(bad)))


def sample_poincare(forms: AssembledForms, count: int, seed: int) -> AuditResult:
    """Count samples v in V violating v'Mv <= C * seminorm_sq(v) + 1e-10."""
    C = poincare_constant(forms)
    X = random_v_samples(forms, count, seed)
    mass = np.einsum("ij,jk,ik->i", X, forms.M, X)
    semi = 0.5 * np.einsum("ij,jk,ik->i", X, forms.B, X)   # seminorm_sq row-wise
    bad = mass > C * semi + 1e-10
    return AuditResult("poincare", count, int(np.count_nonzero(bad)))
