"""Single-particle structure of the open anisotropic chain.

The quadratic form behind the spin Hamiltonian is encoded in a 2L x 2L
complex symmetric block matrix M = [[A, B], [-B, -A]] built from the
nearest-neighbour couplings.  Its spectrum comes in two families
("modes"), each governed by a boundary polynomial in the Chebyshev
variable x; every root x yields a quasi-energy pair +-eps and an
explicitly known eigenvector with checkerboard support.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInput,
    EpsilonZero,
    LambdaSingular,
    TrigSingular,
)
from .errors import ModeCoincidenceWarning, NearEPWarning
from .polyalg import DensePoly, poly_roots

__all__ = [
    "ChainSpec",
    "QuasiHamiltonian",
    "SpectralPoint",
    "ModeVector",
    "MODES",
    "gamma_to_lambda",
    "lambda_to_gamma",
    "x_of_eps",
    "eps_of_x",
    "build_quasi_hamiltonian",
    "boundary_polynomial",
    "quasi_energies",
    "mode_vector_poly",
    "mode_vector_trig",
    "momentum_residual",
    "mode_equation_residual",
]

MODES = ("I", "II")

# boundary-root pairs closer than this trigger NearEPWarning; the
# splitting scales like sqrt of the distance to the exceptional gamma,
# so this catches anisotropies within roughly 1e-8 of an EP
NEAR_EP_TOL = 1e-4
_TRIG_GUARD = 1e-12


@dataclass(frozen=True)
class ChainSpec:
    """Chain length and complex anisotropy.

    ``L`` must be even and at least 2.  ``gamma = -1`` is excluded
    outright: the boundary parameter lambda has a pole there.
    """

    L: int
    gamma: complex

    def __post_init__(self):
        if self.L < 2 or self.L % 2:
            raise DegenerateInput(f"chain length must be even and >= 2, got {self.L}")
        object.__setattr__(self, "gamma", complex(self.gamma))
        if self.gamma == -1:
            raise LambdaSingular("gamma = -1 is a pole of the boundary parameter")

    @property
    def n_pairs(self) -> int:
        return self.L // 2

    @property
    def lam(self) -> complex:
        return gamma_to_lambda(self.gamma)


def gamma_to_lambda(gamma: complex) -> complex:
    """Boundary parameter lambda = -(1 - gamma) / (1 + gamma)."""
    gamma = complex(gamma)
    if gamma == -1:
        raise LambdaSingular("lambda diverges at gamma = -1")
    return -(1 - gamma) / (1 + gamma)


def lambda_to_gamma(lam: complex) -> complex:
    """Inverse map gamma = (1 + lambda) / (1 - lambda)."""
    lam = complex(lam)
    if lam == 1:
        raise LambdaSingular("gamma diverges at lambda = 1")
    return (1 + lam) / (1 - lam)


def x_of_eps(gamma: complex, eps: complex) -> complex:
    """Chebyshev variable x for a quasi-energy eps."""
    if gamma * gamma == 1:
        raise LambdaSingular("x(eps) degenerates at gamma = +-1")
    return (2 * eps * eps - 1 - gamma * gamma) / (1 - gamma * gamma)


def eps_of_x(gamma: complex, x: complex) -> complex:
    """Principal quasi-energy branch: Re eps >= 0, ties broken to Im eps >= 0."""
    e2 = ((1 - gamma * gamma) * x + 1 + gamma * gamma) / 2
    e = np.sqrt(complex(e2))
    if e.real < 0 or (e.real == 0 and e.imag < 0):
        e = -e
    return complex(e)


@dataclass(frozen=True)
class QuasiHamiltonian:
    """The block matrix M together with its ingredients A, B and the involution S."""

    spec: ChainSpec
    A: np.ndarray
    B: np.ndarray
    M: np.ndarray
    S: np.ndarray


def build_quasi_hamiltonian(spec: ChainSpec) -> QuasiHamiltonian:
    """Assemble M = [[A, B], [-B, -A]] for the open chain."""
    L, g = spec.L, spec.gamma
    A = np.zeros((L, L), dtype=complex)
    B = np.zeros((L, L), dtype=complex)
    for j in range(L - 1):
        A[j, j + 1] = A[j + 1, j] = 0.5
        B[j, j + 1] = g / 2
        B[j + 1, j] = -g / 2
    M = np.block([[A, B], [-B, -A]])
    eye = np.eye(L)
    S = np.block([[eye, eye], [eye, -eye]]) / np.sqrt(2.0)
    return QuasiHamiltonian(spec=spec, A=A, B=B, M=M, S=S)


def boundary_polynomial(spec: ChainSpec, mode: str) -> DensePoly:
    """Quantization polynomial in x for one mode.

    Mode I imposes U_n(x) - lambda U_{n-1}(x) = 0 with n = L/2; mode II
    uses 1/lambda instead.  Degree is exactly n.  Raises
    :class:`LambdaSingular` at gamma = +-1 where lambda degenerates to
    0 or infinity.
    """
    if mode not in MODES:
        raise DegenerateInput(f"mode must be one of {MODES}, got {mode!r}")
    g = spec.gamma
    if g == 1 or g == -1:
        raise LambdaSingular("boundary polynomial undefined at gamma = +-1")
    lam = spec.lam
    factor = lam if mode == "I" else 1 / lam
    from .polyalg import chebyshev_u_poly

    n = spec.n_pairs
    un = chebyshev_u_poly(n).coeffs
    un1 = chebyshev_u_poly(n - 1).coeffs
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[: un.size] = un
    coeffs[: un1.size] -= factor * un1
    return DensePoly(coeffs)


@dataclass(frozen=True)
class SpectralPoint:
    """One labelled quasi-energy: mode, branch index within the mode, and sign."""

    mode: str
    branch: int
    sign: int
    epsilon: complex
    x: complex

    def negated(self) -> "SpectralPoint":
        return SpectralPoint(self.mode, self.branch, -self.sign,
                             -self.epsilon, self.x)


def quasi_energies(spec: ChainSpec, warn: bool = True) -> list[SpectralPoint]:
    """The L positive-branch quasi-energies, labelled by mode and branch.

    Within each mode, branches are numbered 1..L/2 in order of
    decreasing (Re eps, Im eps).  Emits :class:`NearEPWarning` when two
    roots of one boundary polynomial nearly coincide (see NEAR_EP_TOL)
    and :class:`ModeCoincidenceWarning` at gamma = 0 where the two
    modes have identical spectra.
    """
    if warn and abs(spec.lam + 1) < 1e-14:
        warnings.warn("gamma = 0: both modes share one boundary condition",
                      ModeCoincidenceWarning, stacklevel=2)
    points = []
    for mode in MODES:
        roots = poly_roots(boundary_polynomial(spec, mode))
        xs = roots.expanded()
        xs = np.array([_polish_boundary_root(spec, mode, x) for x in xs])
        if warn:
            for i in range(xs.size):
                for j in range(i + 1, xs.size):
                    if abs(xs[i] - xs[j]) <= NEAR_EP_TOL * (1 + abs(xs[i])):
                        warnings.warn(
                            f"mode {mode}: boundary roots {xs[i]:.6g} and "
                            f"{xs[j]:.6g} nearly coincide; an exceptional "
                            "point may be close", NearEPWarning, stacklevel=2)
        eps = np.array([eps_of_x(spec.gamma, x) for x in xs])
        order = np.lexsort((-eps.imag, -eps.real))
        for rank, idx in enumerate(order):
            points.append(SpectralPoint(mode=mode, branch=rank + 1, sign=+1,
                                        epsilon=complex(eps[idx]),
                                        x=complex(xs[idx])))
    return points


@dataclass(frozen=True)
class ModeVector:
    """Eigenvector data (phi, psi) of one spectral point.

    phi lives on even sites and psi on odd sites for mode I; mode II
    swaps the supports.  Normalized so phi.phi + psi.psi = 1 under the
    unconjugated bilinear form, with a deterministic overall sign.
    ``boundary_residual`` is the value of the would-be component just
    outside the chain, which vanishes exactly on a quantized root.
    """

    mode: str
    sign: int
    epsilon: complex
    phi: np.ndarray
    psi: np.ndarray
    scale: complex
    boundary_residual: float


def _polish_boundary_root(spec: ChainSpec, mode: str, x: complex) -> complex:
    """Newton-polish a boundary root with stable recurrence evaluation.

    Monomial-basis root finding leaves a few-1e-12 of forward error at
    the larger sizes; two Newton steps on the recurrence-evaluated
    polynomial push that to machine precision.  Steps larger than 1e-6
    indicate a near-double root where polishing cannot help and are
    skipped.
    """
    n = spec.L // 2
    lam_pow = spec.lam if mode == "I" else 1 / spec.lam
    z = complex(x)
    for _ in range(2):
        u, du = _chebyshev_values(z, n)
        f = u[n + 1] - lam_pow * u[n]
        df = du[n + 1] - lam_pow * du[n]
        if df == 0:
            break
        step = f / df
        if abs(step) > 1e-6:
            break
        z -= step
    return z


def _chebyshev_values(x: complex, n: int):
    """U_{-1}..U_n and their derivatives at x, by the three-term recurrence."""
    u = np.zeros(n + 2, dtype=complex)
    du = np.zeros(n + 2, dtype=complex)
    u[0], u[1] = 0.0, 1.0          # U_{-1}, U_0
    du[0], du[1] = 0.0, 0.0
    for m in range(1, n + 1):
        u[m + 1] = 2 * x * u[m] - u[m - 1]
        du[m + 1] = 2 * u[m] + 2 * x * du[m] - du[m - 1]
    return u, du


def _raw_mode_arrays(spec: ChainSpec, mode: str, eps: complex, x: complex):
    """Unnormalized (phi, psi) for the +eps branch, plus the boundary value.

    Even sites carry plain Chebyshev values; odd sites carry the
    eps-dependent combination.  Division by eps is what makes eps = 0
    unusable here, but det(A +- B) is a nonzero constant for
    gamma != +-1 so that case never arises from a boundary root.
    """
    L, g = spec.L, spec.gamma
    n = spec.n_pairs
    if eps == 0:
        raise EpsilonZero("mode construction divides by the quasi-energy")
    u, _ = _chebyshev_values(x, n)
    phi = np.zeros(L, dtype=complex)
    psi = np.zeros(L, dtype=complex)
    even = u[1: n + 1]                       # U_0 .. U_{n-1} on sites 2,4,..,L
    if mode == "I":
        ca, cb = 1 + g, 1 - g
    else:
        ca, cb = 1 - g, 1 + g
    odd = (ca * u[1: n + 1] + cb * u[0: n]) / (2 * eps)  # sites 1,3,..,L-1
    # site s (1-based) lives at array index s-1
    if mode == "I":
        phi[1::2] = even
        psi[0::2] = odd[: n]
    else:
        psi[1::2] = even
        phi[0::2] = odd[: n]
    boundary = (ca * u[n + 1] + cb * u[n]) / (2 * eps)
    return phi, psi, boundary


def _bilinear_normalize(phi: np.ndarray, psi: np.ndarray):
    """Scale so phi.phi + psi.psi = 1 and fix the sign deterministically."""
    n2 = phi @ phi + psi @ psi
    if abs(n2) < 1e-300:
        raise DegenerateInput("mode vector is bilinearly null; cannot normalize")
    s = 1.0 / np.sqrt(complex(n2))
    phi, psi = phi * s, psi * s
    stacked = np.concatenate([phi, psi])
    lead = stacked[int(np.argmax(np.abs(stacked)))]
    if lead.real < 0 or (lead.real == 0 and lead.imag < 0):
        phi, psi, s = -phi, -psi, -s
    return phi, psi, s


def mode_vector_poly(spec: ChainSpec, point: SpectralPoint) -> ModeVector:
    """Eigenvector of M at a spectral point, from Chebyshev values.

    The -eps partner is produced from the +eps one by flipping phi, so
    the pair relation (phi, psi) -> (-phi, psi) holds exactly.
    """
    eps_plus = point.epsilon if point.sign > 0 else -point.epsilon
    phi, psi, boundary = _raw_mode_arrays(spec, point.mode, eps_plus, point.x)
    phi, psi, s = _bilinear_normalize(phi, psi)
    if point.sign < 0:
        phi = -phi
    return ModeVector(mode=point.mode, sign=point.sign, epsilon=point.epsilon,
                      phi=phi, psi=psi, scale=s,
                      boundary_residual=abs(s * boundary))


def mode_vector_trig(spec: ChainSpec, point: SpectralPoint) -> ModeVector:
    """Same eigenvector from sine patterns in the momentum k = arccos(x)/2.

    The relative sign delta between the two sublattice patterns is not
    fixed by the closed form; both choices are tried and the one
    minimizing the first mode-equation residual wins.  Agrees with
    :func:`mode_vector_poly` up to overall complex scale.
    """
    L = spec.L
    n = spec.n_pairs
    k = 0.5 * cmath.acos(complex(point.x))
    if abs(cmath.sin(2 * k)) < _TRIG_GUARD:
        raise TrigSingular("sin(2k) ~ 0: sine patterns collapse")
    eps_plus = point.epsilon if point.sign > 0 else -point.epsilon
    m = np.arange(1, n + 1)
    even = np.array([cmath.sin(2 * mm * k) for mm in m])
    mm2 = np.arange(0, n)
    other = np.array([cmath.sin((L - 2 * mm) * k) for mm in mm2])

    qh = build_quasi_hamiltonian(spec)
    best = None
    for delta in (1.0, -1.0):
        phi = np.zeros(L, dtype=complex)
        psi = np.zeros(L, dtype=complex)
        if point.mode == "I":
            phi[1::2] = even
            psi[0::2] = -delta * other
        else:
            psi[1::2] = even
            phi[0::2] = -delta * other
        norm = np.linalg.norm(np.concatenate([phi, psi]))
        if norm < _TRIG_GUARD:
            raise TrigSingular("sine pattern is numerically zero")
        phi, psi = phi / norm, psi / norm
        resid = np.linalg.norm((qh.A + qh.B) @ phi - eps_plus * psi)
        if best is None or resid < best[0]:
            best = (resid, phi, psi)
    _, phi, psi = best
    phi, psi, s = _bilinear_normalize(phi, psi)
    if point.sign < 0:
        phi = -phi
    return ModeVector(mode=point.mode, sign=point.sign, epsilon=point.epsilon,
                      phi=phi, psi=psi, scale=s, boundary_residual=0.0)


def momentum_residual(spec: ChainSpec, k: complex, mode: str) -> complex:
    """Defect of the momentum quantization condition at k.

    Zero exactly when sin((L+2)k)/sin(Lk) equals lambda (mode I) or
    1/lambda (mode II).  Guards against vanishing denominators.
    """
    if mode not in MODES:
        raise DegenerateInput(f"mode must be one of {MODES}, got {mode!r}")
    L = spec.L
    sl = cmath.sin(L * k)
    if abs(sl) < _TRIG_GUARD or abs(cmath.cos(k)) < _TRIG_GUARD \
            or abs(cmath.cos((L + 1) * k)) < _TRIG_GUARD:
        raise TrigSingular("momentum condition evaluated at a trigonometric zero")
    target = spec.lam if mode == "I" else 1 / spec.lam
    return cmath.sin((L + 2) * k) / sl - target


def mode_equation_residual(spec: ChainSpec, mv: ModeVector) -> float:
    """max of ||(A+B)phi - eps psi|| and ||(A-B)psi - eps phi||."""
    qh = build_quasi_hamiltonian(spec)
    r1 = np.linalg.norm((qh.A + qh.B) @ mv.phi - mv.epsilon * mv.psi)
    r2 = np.linalg.norm((qh.A - qh.B) @ mv.psi - mv.epsilon * mv.phi)
    return float(max(r1, r2))
