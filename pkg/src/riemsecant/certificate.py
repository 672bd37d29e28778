"""Semilocal convergence certificate for the secant iteration.

Given a starting pair ``(p_-1, p_0)`` and a modulus ``omega`` bounding how far
divided differences at nearby pairs differ after transport,

    ||[p1,p2;X] o P - P o [q1,q2;X]|| <= omega(d(p1,q1), d(p2,q2)),

the iteration converges to the unique zero in ``B(p_0, R)``, where ``R`` is the
smallest positive root of ``u = (b(u) a(u) / (1 - c(u)) + a(u) + 1) eta``, and
the error contracts at least by the factor ``c(R)`` per step.

Solver convention: the certificate's ``(p_-1, p_0)`` are the solver's
``(p0, p1)``.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import constants as C
from .divided_difference import operator_norm, solve, transport_matrix
from .errors import InsufficientData, InvalidConfig, SingularOperator, Undefined
from .fields import VectorFieldProblem, evaluate
from .manifolds import Kind, ManifoldPoint, distance, norm, random_point_in_ball
from .solver import SolverConfig

log = logging.getLogger(__name__)


class OmegaFamily(str, enum.Enum):
    LIPSCHITZ = "lipschitz"
    HOELDER = "hoelder"


@dataclass(frozen=True)
class OmegaFunction:
    """``K (u + v)`` (Lipschitz) or ``K (u**a + v**a)`` (Hoelder, ``0 < a <= 1``)."""

    family: OmegaFamily = OmegaFamily.LIPSCHITZ
    K: float = 0.0
    exponent: float = 1.0
    empirical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", OmegaFamily(self.family))
        if not (self.K >= 0 and math.isfinite(self.K)):
            raise InvalidConfig(f"omega constant K must be finite and >= 0, got {self.K!r}")
        if self.family is OmegaFamily.HOELDER and not 0 < self.exponent <= 1:
            raise InvalidConfig(f"Hoelder exponent must lie in (0, 1], got {self.exponent!r}")

    def _power(self, u):
        if self.family is OmegaFamily.LIPSCHITZ:
            return u
        return np.power(u, self.exponent)

    def __call__(self, u, v):
        return self.K * (self._power(u) + self._power(v))

    def basis_value(self, u, v):
        """``omega(u, v) / K``."""
        return self._power(u) + self._power(v)


# ---------------------------------------------------------------------------
# scalar part
# ---------------------------------------------------------------------------

def _abc_arrays(omega: OmegaFunction, alpha: float, beta: float, u):
    u = np.asarray(u, dtype=float)
    d1 = 1.0 - beta * omega(alpha, u)
    d2 = 1.0 - beta * omega(alpha + u, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = beta * omega(alpha, u) / d1
        b = beta * omega(u, 2 * u) / d2
        c = beta * omega(2 * u, 2 * u) / d2
    return a, b, c, (d1 > 0) & (d2 > 0)


def abc(omega: OmegaFunction, alpha: float, beta: float, u: float) -> tuple[float, float, float]:
    if u < 0:
        raise Undefined(f"u must be >= 0, got {u!r}")
    a, b, c, ok = _abc_arrays(omega, alpha, beta, u)
    if not ok:
        raise Undefined(f"1 - beta*omega vanishes or turns negative at u = {u!r}")
    return float(a), float(b), float(c)


def _g(omega: OmegaFunction, alpha: float, beta: float, eta: float, u):
    a, b, c, ok = _abc_arrays(omega, alpha, beta, u)
    ok = ok & (c < 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (b * a / (1.0 - c) + a + 1.0) * eta - u
    return g, ok


def find_root_R(omega: OmegaFunction, alpha: float, beta: float, eta: float) -> Optional[float]:
    """Smallest positive root of ``g(u) = (b a / (1 - c) + a + 1) eta - u``.

    Scans upward from 0 in steps of ``eta / 1000`` (at least ``1e-9``) for the
    first sign change inside the admissible range, then bisects to ``1e-12``.
    Returns ``None`` when the admissible range ends first.
    """
    if eta < 0:
        raise ValueError("eta must be >= 0")
    if eta == 0:
        return 0.0
    if omega.K == 0:
        return float(eta)

    step = max(eta * C.ROOT_SCAN_FRACTION, C.ROOT_SCAN_FLOOR)
    chunk = 100_000
    start = 0
    while start < C.ROOT_SCAN_MAX_POINTS:
        u = (start + np.arange(chunk)) * step
        g, ok = _g(omega, alpha, beta, eta, u)
        bad = np.flatnonzero(~ok)
        end = bad[0] if len(bad) else chunk
        hits = np.flatnonzero(g[:end] <= 0)
        if len(hits):
            k = int(hits[0])
            if g[k] == 0 or start + k == 0:
                return float(u[k])
            return _bisect(omega, alpha, beta, eta, float(u[k] - step), float(u[k]))
        if len(bad):
            return None
        start += chunk
    log.warning("root scan gave up after %d points", C.ROOT_SCAN_MAX_POINTS)
    return None


def _bisect(omega, alpha, beta, eta, lo, hi):
    # invariant: g(lo) > 0 >= g(hi), both admissible
    while hi - lo > C.ROOT_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g, _ = _g(omega, alpha, beta, eta, mid)
        if g > 0:
            lo = mid
        else:
            hi = mid
    g_lo, _ = _g(omega, alpha, beta, eta, lo)
    g_hi, _ = _g(omega, alpha, beta, eta, hi)
    return float(lo if abs(g_lo) < abs(g_hi) else hi)


# ---------------------------------------------------------------------------
# geometric part
# ---------------------------------------------------------------------------

def compute_alpha_beta_eta(
    problem: VectorFieldProblem,
    p_m1: ManifoldPoint,
    p_0: ManifoldPoint,
    config: SolverConfig | None = None,
) -> tuple[float, float, float]:
    """``alpha = d(p_0, p_-1)``, ``beta = ||[p_-1,p_0;X]^-1||``, ``eta = ||[p_-1,p_0;X]^-1 X(p_0)||``."""
    config = config or SolverConfig()
    op = config.operator(problem, p_m1, p_0)
    beta = operator_norm(op, inverse=True)
    eta = norm(solve(op, evaluate(problem, p_0)))
    return distance(p_0, p_m1), beta, eta


@dataclass(frozen=True)
class Checks:
    root_exists: bool
    beta_omega_lt_1: bool
    c_lt_1: bool
    ball_in_domain: bool

    @property
    def all(self) -> bool:
        return self.root_exists and self.beta_omega_lt_1 and self.c_lt_1 and self.ball_in_domain


@dataclass(frozen=True)
class CertificateReport:
    alpha: float
    beta: float
    eta: float
    R: Optional[float]
    a_R: Optional[float]
    b_R: Optional[float]
    c_R: Optional[float]
    checks: Checks
    omega: OmegaFunction
    domain_radius: float

    @property
    def certified(self) -> bool:
        return self.checks.all

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "eta": self.eta,
            "R": self.R,
            "a_R": self.a_R,
            "b_R": self.b_R,
            "c_R": self.c_R,
            "checks": asdict(self.checks),
            "certified": self.certified,
            "empirical": self.omega.empirical,
            "omega": {
                "family": self.omega.family.value,
                "K": self.omega.K,
                "exponent": self.omega.exponent,
            },
            "domain_radius": self.domain_radius,
        }


def _check_radius(center: ManifoldPoint, radius: float) -> None:
    if not radius > 0:
        raise InvalidConfig("domain radius must be positive")
    if center.manifold.kind is Kind.SPHERE and radius >= math.pi / 2:
        raise InvalidConfig("on the sphere the domain radius must be below pi/2")


def certify(
    problem: VectorFieldProblem,
    p_m1: ManifoldPoint,
    p_0: ManifoldPoint,
    omega: OmegaFunction,
    domain_radius: float,
    config: SolverConfig | None = None,
) -> CertificateReport:
    """Check the convergence hypotheses for the pair ``(p_-1, p_0)`` on ``B(p_0, domain_radius)``."""
    _check_radius(p_0, domain_radius)
    alpha, beta, eta = compute_alpha_beta_eta(problem, p_m1, p_0, config)
    R = find_root_R(omega, alpha, beta, eta)
    if eta == 0.0:
        # p_0 is already the zero; nothing about the iteration needs checking
        try:
            a_R, b_R, c_R = abc(omega, alpha, beta, 0.0)
        except Undefined:
            a_R = b_R = c_R = None
        checks = Checks(True, True, True, True)
        return CertificateReport(alpha, beta, eta, 0.0, a_R, b_R, c_R, checks, omega, domain_radius)
    if R is None:
        checks = Checks(False, False, False, False)
        return CertificateReport(alpha, beta, eta, None, None, None, None, checks, omega, domain_radius)
    try:
        a_R, b_R, c_R = abc(omega, alpha, beta, R)
    except Undefined:
        a_R = b_R = c_R = None
    checks = Checks(
        root_exists=True,
        beta_omega_lt_1=bool(beta * omega(R + alpha, R) < 1.0),
        c_lt_1=c_R is not None and c_R < 1.0,
        ball_in_domain=R <= domain_radius,
    )
    return CertificateReport(alpha, beta, eta, R, a_R, b_R, c_R, checks, omega, domain_radius)


@dataclass
class OmegaSamples:
    """Measured left-hand sides of the omega condition and their arguments."""

    lhs: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    discarded: int = 0
    tuples: list = field(default_factory=list, repr=False)


def sample_omega_condition(
    problem: VectorFieldProblem,
    center: ManifoldPoint,
    radius: float,
    samples: int,
    config: SolverConfig | None = None,
    seed: int | np.random.SeedSequence = 0,
) -> OmegaSamples:
    """Draw 4-tuples ``(p1, p2, q1, q2)`` in ``B(center, radius)`` and measure
    ``||[p1,p2;X] o P - P o [q1,q2;X]||`` with ``P`` the transport ``q2 -> p2``.

    Each sample gets its own child seed, so results do not depend on evaluation
    order.  Samples whose operators cannot be built are discarded and counted.
    """
    config = config or SolverConfig()
    _check_radius(center, radius)
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    lhs, d1, d2, tuples = [], [], [], []
    discarded = 0
    for child in seq.spawn(samples):
        rng = np.random.default_rng(child)
        p1, p2, q1, q2 = (random_point_in_ball(center, radius, rng) for _ in range(4))
        try:
            op_p = config.operator(problem, p1, p2)
            op_q = config.operator(problem, q1, q2)
        except SingularOperator:
            discarded += 1
            continue
        t = transport_matrix(q2, p2, op_q.basis, op_p.basis)
        diff = op_p.matrix @ t - t @ op_q.matrix
        lhs.append(float(np.linalg.norm(diff, 2)))
        d1.append(distance(p1, q1))
        d2.append(distance(p2, q2))
        tuples.append((p1, p2, q1, q2))
    return OmegaSamples(np.array(lhs), np.array(d1), np.array(d2), discarded, tuples)


def estimate_K(
    problem: VectorFieldProblem,
    center: ManifoldPoint,
    radius: float,
    samples: int,
    config: SolverConfig | None = None,
    family: OmegaFamily | str = OmegaFamily.LIPSCHITZ,
    exponent: float = 1.0,
    seed: int | np.random.SeedSequence = 0,
) -> OmegaFunction:
    """Smallest ``K`` of the family dominating all sampled tuples, inflated by 10%."""
    if samples < 10:
        raise InvalidConfig("estimate_K needs at least 10 samples")
    family = OmegaFamily(family)
    probe = OmegaFunction(family, 1.0, exponent)
    data = sample_omega_condition(problem, center, radius, samples, config, seed)
    if len(data.lhs) == 0:
        raise InsufficientData(f"all {samples} omega samples were discarded")
    if data.discarded:
        log.info("estimate_K: discarded %d of %d samples", data.discarded, samples)
    scale = probe.basis_value(data.d1, data.d2)
    ratios = np.where(scale > 0, data.lhs / np.where(scale > 0, scale, 1.0), 0.0)
    return OmegaFunction(family, C.K_INFLATION * float(ratios.max()), exponent, empirical=True)
