"""Operator parameters, piecewise-constant data fields, exponent arithmetic.

The operator is  -alpha * Laplacian + beta * (-Laplacian)^s  on an
interval, with the kernel normalization constant dropped: the nonlocal
kernel is exactly |x - y|^(-(n + 2s)), n = 1 in the solvers.

The exponent machinery tracks which Lebesgue exponent q of the data is
strong enough for the regularity estimates:

* critical exponent  q_bar = n/2, n/(2s) or 1 depending on which part of
  the operator is active and on the dimension/order relation;
* summability exponent  eta = 2n/(n-2s) (nonlocal-dominated), 2n/(n-2)
  (classical), and otherwise any value above 2q/(q-1); here the pinned
  convention eta = 2q/(q-1) + 1 is used;
* dual exponent  eta' = 1/(1 - 1/q - 1/eta)  and  vartheta = 2/eta';
* margin  eps0 = 1 - 1/q - 2/eta > 0,  equivalent to the admissibility
  relation 1/q + 1/eta < 1 with room for the iteration.

q = math.inf is accepted (1/q = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FieldSpecError, IntegrabilityError, InvalidParamsError

ROLES = ("weight", "coefficient", "source")


@dataclass(frozen=True)
class OperatorParams:
    """Coefficients of  -alpha*Lap + beta*(-Lap)^s  in dimension n.

    alpha, beta >= 0 with alpha + beta > 0; s in (0, 1).  Meshes and
    solvers require n == 1; the exponent formulas accept any n >= 1.
    """

    alpha: float
    beta: float
    s: float
    n: int = 1

    def __post_init__(self):
        for name in ("alpha", "beta", "s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidParamsError(f"{name} must be a finite number, got {v!r}")
        if self.alpha < 0 or self.beta < 0:
            raise InvalidParamsError(
                f"alpha and beta must be nonnegative, got ({self.alpha}, {self.beta})")
        if self.alpha + self.beta <= 0:
            raise InvalidParamsError("alpha + beta must be positive")
        if not 0.0 < self.s < 1.0:
            raise InvalidParamsError(f"s must lie in (0, 1), got {self.s}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise InvalidParamsError(f"n must be an integer >= 1, got {self.n!r}")


def critical_exponent(params: OperatorParams) -> float:
    """Critical integrability exponent q_bar for the data.

    n/2 when only the classical part is active and n > 2; n/(2s) when the
    nonlocal part is active and n > 2s; 1 otherwise.
    """
    n, s = params.n, params.s
    if params.beta == 0:
        return n / 2 if n > 2 else 1.0
    return n / (2 * s) if n > 2 * s else 1.0


def _check_q(params: OperatorParams, q: float) -> float:
    q_bar = critical_exponent(params)
    if not (isinstance(q, (int, float)) and (q == math.inf or math.isfinite(q))):
        raise IntegrabilityError(f"q must be a number or inf, got {q!r}")
    if not q > q_bar:
        raise IntegrabilityError(
            f"q = {q} is not admissible: the estimates require q > q_bar = {q_bar}")
    return q_bar


def sobolev_exponent(params: OperatorParams, q: float) -> float:
    """Summability exponent eta attached to (params, q); requires q > q_bar."""
    _check_q(params, q)
    n, s = params.n, params.s
    if params.beta != 0 and n > 2 * s:
        return 2 * n / (n - 2 * s)
    if params.beta == 0 and n > 2:
        return 2 * n / (n - 2)
    # below the Sobolev threshold any eta > 2q/(q-1) works; pin the "+1" choice
    inv_q = 0.0 if q == math.inf else 1.0 / q
    return 2.0 / (1.0 - inv_q) + 1.0


@dataclass(frozen=True)
class ExponentPack:
    """Exponents driving the level-set iteration for one (params, q)."""

    q: float
    q_bar: float
    eta: float
    eta_prime: float
    vartheta: float
    eps0: float


def exponent_pack(params: OperatorParams, q: float) -> ExponentPack:
    """Assemble the admissible exponent family for data in L^q.

    Guarantees 1/q + 1/eta < 1, eps0 > 0 and vartheta >= 1 - 1/q; raises
    IntegrabilityError when q <= q_bar.
    """
    q_bar = _check_q(params, q)
    eta = sobolev_exponent(params, q)
    inv_q = 0.0 if q == math.inf else 1.0 / q
    slack = 1.0 - inv_q - 1.0 / eta
    if not slack > 0:
        raise IntegrabilityError(
            f"admissibility 1/q + 1/eta < 1 fails for q={q}, eta={eta}")
    eta_prime = 1.0 / slack
    vartheta = 2.0 / eta_prime
    eps0 = 1.0 - inv_q - 2.0 / eta
    if not eps0 > 0:
        raise IntegrabilityError(
            f"iteration margin eps0 = 1 - 1/q - 2/eta is not positive "
            f"for q={q}, eta={eta}")
    return ExponentPack(q=float(q), q_bar=q_bar, eta=eta,
                        eta_prime=eta_prime, vartheta=vartheta, eps0=eps0)


class PiecewiseField:
    """Piecewise-constant field on [a, b] given by breakpoints and values.

    values[i] holds on (breakpoints[i-1], breakpoints[i]) with the
    convention breakpoints[-1] = a, breakpoints[len] = b.  Exact
    integrals, L^q norms and sign decompositions are closed-form.
    """

    def __init__(self, a: float, b: float, breakpoints=(), values=(0.0,),
                 role: str = "weight"):
        breakpoints = tuple(float(x) for x in breakpoints)
        values = tuple(float(v) for v in values)
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise FieldSpecError(f"field domain must satisfy a < b, got ({a}, {b})")
        if len(values) != len(breakpoints) + 1:
            raise FieldSpecError(
                f"need len(values) == len(breakpoints) + 1, "
                f"got {len(values)} values for {len(breakpoints)} breakpoints")
        if any(not math.isfinite(x) for x in breakpoints + values):
            raise FieldSpecError("breakpoints and values must be finite")
        if any(x2 <= x1 for x1, x2 in zip(breakpoints, breakpoints[1:])):
            raise FieldSpecError("breakpoints must be strictly increasing")
        if breakpoints and not (a < breakpoints[0] and breakpoints[-1] < b):
            raise FieldSpecError(
                f"breakpoints must lie strictly inside ({a}, {b})")
        if role not in ROLES:
            raise FieldSpecError(f"role must be one of {ROLES}, got {role!r}")
        self.a = float(a)
        self.b = float(b)
        self.breakpoints = breakpoints
        self.values = values
        self.role = role

    def __repr__(self):
        return (f"PiecewiseField(a={self.a}, b={self.b}, "
                f"breakpoints={self.breakpoints}, values={self.values}, "
                f"role={self.role!r})")

    def __eq__(self, other):
        return (isinstance(other, PiecewiseField)
                and (self.a, self.b, self.breakpoints, self.values, self.role)
                == (other.a, other.b, other.breakpoints, other.values, other.role))

    def pieces(self) -> list[tuple[float, float, float]]:
        """(x0, x1, value) for every constant piece."""
        xs = (self.a,) + self.breakpoints + (self.b,)
        return [(xs[i], xs[i + 1], self.values[i]) for i in range(len(self.values))]

    def value(self, x):
        """Field value at x (right-continuous at breakpoints)."""
        idx = np.searchsorted(np.asarray(self.breakpoints), x, side="right")
        return np.asarray(self.values)[idx]

    def integral(self) -> float:
        return math.fsum(v * (x1 - x0) for x0, x1, v in self.pieces())

    def positive_mass(self) -> float:
        """Integral of the positive part."""
        return math.fsum(v * (x1 - x0) for x0, x1, v in self.pieces() if v > 0)

    def negative_mass(self) -> float:
        """Integral of the negative part (nonnegative number)."""
        return math.fsum(-v * (x1 - x0) for x0, x1, v in self.pieces() if v < 0)

    def lq_norm(self, q: float) -> float:
        """L^q(a, b) norm; q = inf gives the essential sup."""
        if q == math.inf:
            return max(abs(v) for v in self.values)
        if not q >= 1:
            raise FieldSpecError(f"L^q norm needs q >= 1 or inf, got {q}")
        return math.fsum(abs(v) ** q * (x1 - x0)
                         for x0, x1, v in self.pieces()) ** (1.0 / q)


@dataclass(frozen=True)
class WeightDiagnostics:
    """Sign-structure summary of a weight field."""

    integral: float
    plus_mass: float
    minus_mass: float
    plus_vanishes: bool
    minus_vanishes: bool
    integral_vanishes: bool


def weight_diagnostics(field: PiecewiseField,
                       mesh=None) -> WeightDiagnostics:
    """Exact integral and sign masses of m, with vanishing flags.

    The integral flag uses a 1e-14 relative tolerance against the total
    variation of mass, so exactly-cancelling piecewise data is detected.
    Integrals come from the piecewise data directly; when a mesh is
    given it is only checked for interval agreement with the field.
    """
    if mesh is not None and (field.a != mesh.a or field.b != mesh.b):
        raise FieldSpecError(
            "field interval (%g, %g) does not match mesh interval (%g, %g)"
            % (field.a, field.b, mesh.a, mesh.b))
    integral = field.integral()
    plus = field.positive_mass()
    minus = field.negative_mass()
    tol = 1e-14 * max(plus + minus, 1.0)
    return WeightDiagnostics(
        integral=integral, plus_mass=plus, minus_mass=minus,
        plus_vanishes=(plus == 0.0), minus_vanishes=(minus == 0.0),
        integral_vanishes=(abs(integral) <= tol))
