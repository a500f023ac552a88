"""Independent many-body checks by dense exact diagonalization.

Everything here is built straight from Pauli matrices and fermion
strings, with no input from the closed-form spectral data, so it can
arbitrate the analytic route.  Dense matrices cap the reachable sizes;
the limits are enforced explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CardinalityMismatch,
    ClusterAmbiguity,
    LimitRequired,
    SizeLimit,
    VacuumNotFound,
)

__all__ = [
    "EDResult",
    "L4ClosedForm",
    "MatchResult",
    "ClusterRecord",
    "EPStates",
    "build_spin_hamiltonian",
    "jordan_wigner_modes",
    "ed_eigen",
    "l4_closed_form",
    "geometric_multiplicities",
    "realize_operator",
    "realize_quadratic_form",
    "build_ep_states",
    "match_spectra",
]

SPIN_LIMIT = 12        # dense 2^L x 2^L Hamiltonians
VECTOR_LIMIT = 10      # full eigenvector computation
REALIZE_LIMIT = 8      # Jordan-Wigner operator realization
EP_STATE_LIMIT = 6     # explicit many-body states at an exceptional point

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
_SM = np.array([[0.0, 1.0], [0.0, 0.0]])   # annihilates the down state
_ID = np.eye(2)

# Site 1 is the first Kronecker factor (most significant bit of the
# basis index); spin up encodes bit 0.
_XX4 = np.kron(_SX, _SX)
_YY4 = np.kron(_SY, _SY).real


def _bond_term(L: int, j: int, bond4: np.ndarray) -> np.ndarray:
    """bond4 acting on sites (j, j+1), 1-based, padded with identities."""
    left = 2 ** (j - 1)
    right = 2 ** (L - j - 1)
    out = np.kron(np.eye(left), np.kron(bond4, np.eye(right)))
    return out


def build_spin_hamiltonian(L: int, gamma: complex) -> np.ndarray:
    """Dense open-chain Hamiltonian with complex anisotropy.

    H = -(1/2) sum_j [ (1+gamma)/2 sx.sx + (1-gamma)/2 sy.sy ].
    Complex symmetric by construction (H == H.T exactly).
    """
    if L < 2:
        raise SizeLimit(f"need at least two sites, got {L}")
    if L > SPIN_LIMIT:
        raise SizeLimit(f"dense spin Hamiltonian capped at L = {SPIN_LIMIT}")
    gamma = complex(gamma)
    H = np.zeros((2 ** L, 2 ** L), dtype=complex)
    for j in range(1, L):
        H -= 0.25 * (1 + gamma) * _bond_term(L, j, _XX4)
        H -= 0.25 * (1 - gamma) * _bond_term(L, j, _YY4)
    return H


def jordan_wigner_modes(L: int) -> list[np.ndarray]:
    """Phased fermion annihilators c_j as dense matrices.

    The string construction carries an extra alternating sign
    (-1)^j which flips every bond term of the induced quadratic form;
    with it, the spin Hamiltonian equals +(1/2) C^+ M C for the block
    matrix M used throughout, rather than its negative.
    """
    if L > REALIZE_LIMIT:
        raise SizeLimit(f"operator realization capped at L = {REALIZE_LIMIT}")
    modes = []
    for j in range(1, L + 1):
        factors = [_SZ] * (j - 1) + [_SM] + [_ID] * (L - j)
        op = factors[0]
        for f in factors[1:]:
            op = np.kron(op, f)
        modes.append(((-1) ** j) * op.astype(complex))
    return modes


@dataclass(frozen=True)
class EDResult:
    """Eigenvalues (and optionally eigenvectors) sorted by (Re, Im)."""

    values: np.ndarray
    vectors: np.ndarray | None
    max_residual: float
    h_norm: float


def ed_eigen(H: np.ndarray, want_vectors: bool = True) -> EDResult:
    """Dense nonsymmetric eigensolve with a backward-error report.

    Vectors are only computed up to 2^10; values alone up to 2^12.
    """
    N = H.shape[0]
    if want_vectors and N > 2 ** VECTOR_LIMIT:
        raise SizeLimit(f"eigenvectors capped at dimension 2^{VECTOR_LIMIT}")
    if N > 2 ** SPIN_LIMIT:
        raise SizeLimit(f"eigenvalues capped at dimension 2^{SPIN_LIMIT}")
    h_norm = float(np.linalg.norm(H, np.inf))
    if want_vectors:
        vals, vecs = np.linalg.eig(H)
        order = np.lexsort((vals.imag, vals.real))
        vals, vecs = vals[order], vecs[:, order]
        resid = float(np.max(np.abs(H @ vecs - vecs * vals[None, :])))
        return EDResult(values=vals, vectors=vecs,
                        max_residual=resid, h_norm=h_norm)
    vals = np.linalg.eigvals(H)
    order = np.lexsort((vals.imag, vals.real))
    return EDResult(values=vals[order], vectors=None,
                    max_residual=0.0, h_norm=h_norm)


@dataclass(frozen=True)
class L4ClosedForm:
    """All sixteen closed-form eigenpairs of the four-site chain."""

    gamma: complex
    energies: np.ndarray
    vectors: np.ndarray           # columns, unnormalized closed forms
    labels: list[str]


def l4_closed_form(gamma: complex) -> L4ClosedForm:
    """Radical-form spectrum and eigenvectors for L = 4.

    The displayed denominators vanish at gamma in {0, +1, -1}; those
    parameters need limiting forms and raise :class:`LimitRequired`.
    """
    g = complex(gamma)
    if g in (0, 1, -1) or g * g == 1:
        raise LimitRequired("closed forms degenerate at gamma in {0, +1, -1}")
    dp = np.sqrt(5 * g * g + 6 * g + 5 + 0j)
    dm = np.sqrt(5 * g * g - 6 * g + 5 + 0j)

    energies: list[complex] = []
    vectors: list[np.ndarray] = []
    labels: list[str] = []

    def add(E, v, label):
        energies.append(complex(E))
        vectors.append(np.asarray(v, dtype=complex))
        labels.append(label)

    add(0.5, [0, 0, 0, -1, 0, 1, 0, 0, 0, 0, -1, 0, 1, 0, 0, 0], "half+")
    add(-0.5, [0, 0, 0, -1, 0, -1, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0], "half-")
    add(g / 2, [-1, 0, 0, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 1], "gammahalf+")
    add(-g / 2, [-1, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0, 0, 0, 0, 0, 1], "gammahalf-")

    for sgn, tag in ((1, "+"), (-1, "-")):
        E = (g - 1 + sgn * dm) / 4
        a = (g - 2 * E) / (g - 1)
        b = -a
        add(E, [0, -1, a, 0, a, 0, 0, 1, -1, 0, 0, b, 0, b, 1, 0], f"f1{tag}")
    for sgn, tag in ((1, "+"), (-1, "-")):
        E = (1 + g + sgn * dp) / 4
        a = (g - 2 * E) / (g + 1)
        b = -a
        add(E, [0, 1, a, 0, b, 0, 0, -1, -1, 0, 0, b, 0, a, 1, 0], f"f2{tag}")
    for sgn, tag in ((1, "+"), (-1, "-")):
        E = (1 - g + sgn * dm) / 4
        a = (-g - 2 * E) / (g - 1)
        b = (g + 2 * E) / (g - 1)
        add(E, [0, -1, a, 0, b, 0, 0, -1, 1, 0, 0, a, 0, b, 1, 0], f"f3{tag}")
    for sgn, tag in ((1, "+"), (-1, "-")):
        E = -(1 + g + sgn * dp) / 4
        a = (-g - 2 * E) / (g + 1)
        add(E, [0, 1, a, 0, a, 0, 0, 1, 1, 0, 0, a, 0, a, 1, 0], f"f4{tag}")
    for eta in (1, -1):
        for s in (1, -1):
            E = -(eta * dp + s * dm) / 4
            c = (4 * E ** 3 - (5 * g * g + 8) * E) / (6 * g)
            d = -5 * g / 4 + E * E / g
            e = (-4 * E ** 3 + (5 * g * g + 2) * E) / (3 * g)
            add(E, [1, 0, 0, c, 0, d, e, 0, 0, e, d, 0, c, 0, 0, 1],
                f"f5({eta:+d},{s:+d})")

    return L4ClosedForm(gamma=g, energies=np.array(energies),
                        vectors=np.column_stack(vectors), labels=labels)


@dataclass(frozen=True)
class ClusterRecord:
    """One eigenvalue cluster with algebraic and geometric multiplicity."""

    value: complex
    algebraic: int
    geometric: int
    spread: float


def geometric_multiplicities(H: np.ndarray, cluster_tol: float = 1e-7,
                             rank_tol: float = 1e-8,
                             gap_factor: float = 10.0) -> list[ClusterRecord]:
    """Cluster eigenvalues and measure each cluster's eigenspace dimension.

    Defective eigenvalues of a dense solve scatter by roughly the
    square root of machine precision, so ``cluster_tol`` must sit above
    that scatter; a cluster whose distance to the rest is not at least
    ``gap_factor`` times the tolerance raises :class:`ClusterAmbiguity`.
    Geometric multiplicity is the number of singular values of
    H - mu I below ``rank_tol`` times the largest.
    """
    vals = np.linalg.eigvals(H)
    n = vals.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) <= cluster_tol:
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    records = []
    eye = np.eye(H.shape[0])
    for members in groups.values():
        cluster = vals[members]
        mu = complex(np.mean(cluster))
        spread = float(max(abs(c - mu) for c in cluster))
        outside = np.delete(vals, members)
        if outside.size:
            d_out = float(np.min(np.abs(outside - mu)))
            if d_out < gap_factor * cluster_tol:
                raise ClusterAmbiguity(
                    f"cluster at {mu:.6g} is only {d_out:.3e} away from "
                    "the rest of the spectrum")
        sv = np.linalg.svd(H - mu * eye, compute_uv=False)
        geom = int(np.sum(sv < rank_tol * sv[0]))
        records.append(ClusterRecord(value=mu, algebraic=len(members),
                                     geometric=geom, spread=spread))
    records.sort(key=lambda r: (r.value.real, r.value.imag))
    return records


def realize_operator(L: int, row: np.ndarray,
                     modes: list[np.ndarray] | None = None) -> np.ndarray:
    """Dense matrix of the operator with coefficient row (a | b).

    X = (1/sqrt2) sum_j [ a_j (c_j + c_j^+) + b_j (c_j - c_j^+) ] over
    the phased Jordan-Wigner modes.
    """
    row = np.asarray(row, dtype=complex)
    if row.size != 2 * L:
        raise CardinalityMismatch(f"coefficient row must have length {2 * L}")
    if modes is None:
        modes = jordan_wigner_modes(L)
    X = np.zeros((2 ** L, 2 ** L), dtype=complex)
    for j in range(L):
        c = modes[j]
        cd = c.conj().T
        X += row[j] * (c + cd) + row[L + j] * (c - cd)
    return X / np.sqrt(2.0)


def realize_quadratic_form(L: int, M: np.ndarray) -> np.ndarray:
    """Dense matrix of (1/2) C^+ M C over the phased modes.

    C stacks the L annihilators followed by the L creators.  With the
    alternating-phase convention this reproduces the spin Hamiltonian
    exactly.
    """
    modes = jordan_wigner_modes(L)
    C = modes + [c.conj().T for c in modes]
    H = np.zeros((2 ** L, 2 ** L), dtype=complex)
    for a in range(2 * L):
        Ca_dag = C[a].conj().T
        for b in range(2 * L):
            if M[a, b] != 0:
                H += 0.5 * M[a, b] * (Ca_dag @ C[b])
    return H


@dataclass(frozen=True)
class MatchResult:
    """Outcome of pairing two spectra value by value."""

    max_abs_diff: float
    greedy_used: bool
    order_a: np.ndarray
    order_b: np.ndarray


def match_spectra(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> MatchResult:
    """Pair two equal-length spectra and report the worst separation.

    Primary strategy: sort both by (Re rounded to 1e-9, Im) and pair in
    order.  If that leaves a pair further apart than ``tol``, fall back
    to greedy nearest-neighbour matching.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise CardinalityMismatch(f"spectra differ in size: {a.size} vs {b.size}")

    def sorted_order(v):
        return np.lexsort((v.imag, np.round(v.real, 9)))

    oa, ob = sorted_order(a), sorted_order(b)
    diff = np.abs(a[oa] - b[ob])
    if diff.size == 0 or diff.max() <= tol:
        return MatchResult(max_abs_diff=float(diff.max(initial=0.0)),
                           greedy_used=False, order_a=oa, order_b=ob)

    used = np.zeros(b.size, dtype=bool)
    pair = np.empty(b.size, dtype=int)
    worst = 0.0
    for idx in oa:
        d = np.abs(b - a[idx])
        d[used] = np.inf
        j = int(np.argmin(d))
        used[j] = True
        pair[idx] = j
        worst = max(worst, float(d[j]))
    return MatchResult(max_abs_diff=worst, greedy_used=True,
                       order_a=oa, order_b=pair[oa])


# ---------------------------------------------------------------------------
# explicit many-body states at an exceptional point
# ---------------------------------------------------------------------------

def _joint_null_space(ops: list[np.ndarray], rank_tol: float = 1e-8) -> np.ndarray:
    stacked = np.vstack(ops)
    _, sv, vh = np.linalg.svd(stacked)
    smax = sv[0] if sv.size else 0.0
    keep = np.sum(sv > rank_tol * smax)
    null = vh[keep:].conj().T
    if null.shape[1] == 0:
        raise VacuumNotFound("the requested annihilation conditions admit no state")
    return null


@dataclass(frozen=True)
class EPStates:
    """Explicit eigenstates at an exceptional point, organized by sector.

    The two degenerate quasi-particle slots support three sign sectors.
    Mixed-sector eigenvectors are shared between the two vacua; the
    (+,+) sector exists only through the first vacuum because repeated
    naive raising with the defective eigenvector squares to zero
    (``naive_square_norm``).
    """

    sectors: list[str]
    occupations: list[tuple[int, ...]]
    energies: np.ndarray
    states: np.ndarray
    max_eigen_residual: float
    rank: int
    vacuum_dims: tuple[int, int]
    mixed_overlap_min: float
    naive_square_norm: float
    h_norm: float


def build_ep_states(spec, jordan, seed: int = 0) -> EPStates:
    """Construct all 3 * 2^(L-2) eigenstates at an exceptional point.

    ``jordan`` must be a Jordan decomposition of the quasi-Hamiltonian
    at the EP (see the ep module); its column data supplies the
    coefficient rows for every quasi-particle operator.  Two joint
    vacua are found by explicit null-space computation, then sector
    projectors fill in the occupation patterns.
    """
    L = spec.L
    if L > EP_STATE_LIMIT:
        raise SizeLimit(f"explicit EP states capped at L = {EP_STATE_LIMIT}")
    H = build_spin_hamiltonian(L, spec.gamma)
    h_norm = float(np.linalg.norm(H, np.inf))
    modes = jordan_wigner_modes(L)

    def lop(col):
        # annihilator-side operator attached to column `col` of V
        return realize_operator(
            L, np.concatenate([col.phi, -col.psi]), modes)

    def rop(col):
        # V^{-1}-row operator; the row equals the partner column transposed
        return realize_operator(
            L, np.concatenate([col.phi, col.psi]), modes)

    cols = jordan.columns
    p = jordan.chain_start
    wp, up, wm, um = cols[p], cols[p + 1], cols[p + 2], cols[p + 3]

    # sector projectors of the degenerate 2x2 Jordan blocks
    proj_hat_plus = lop(wp) @ rop(up)
    proj_tilde_plus = lop(up) @ rop(wp)
    proj_hat_minus = lop(wm) @ rop(um)
    proj_tilde_minus = lop(um) @ rop(wm)

    # vacuum 1: killed by the +block annihilator and the -block row op
    omega1_basis = _joint_null_space([lop(wp), rop(wm)])
    # vacuum 2: the mirrored pair of conditions
    omega2_basis = _joint_null_space([lop(wm), rop(wp)])
    rng = np.random.default_rng(seed)

    def pick(basis):
        coef = rng.standard_normal(basis.shape[1]) \
            + 1j * rng.standard_normal(basis.shape[1])
        v = basis @ coef
        return v / np.linalg.norm(v)

    omega1 = pick(omega1_basis)
    omega2 = pick(omega2_basis)

    # number projectors of the simple pairs, in column-pair order
    pair_info = []
    for i in range(0, p, 2):
        plus_col, minus_col = cols[i], cols[i + 1]
        pair_info.append((plus_col.epsilon,
                          lop(plus_col) @ rop(plus_col),
                          lop(minus_col) @ rop(minus_col)))

    eps_ep = up.epsilon
    sectors, occupations, energies, states = [], [], [], []
    mixed_overlap_min = 1.0
    n_pairs = len(pair_info)
    for bits in range(2 ** n_pairs):
        pattern = tuple((bits >> (n_pairs - 1 - k)) & 1 for k in range(n_pairs))
        base = 0j
        projected1 = omega1
        projected2 = omega2
        for k, (eps_k, p_plus, p_minus) in enumerate(pair_info):
            op = p_plus if pattern[k] else p_minus
            base += (0.5 if pattern[k] else -0.5) * eps_k
            projected1 = op @ projected1
            projected2 = op @ projected2
        for sector, vec, shift, occ_pair in (
                ("plus_plus", proj_tilde_plus @ projected1, eps_ep, (1, 1)),
                ("mixed", proj_hat_minus @ projected1, 0.0, (1, 0)),
                ("minus_minus", proj_tilde_minus @ projected2, -eps_ep, (0, 0)),
        ):
            nrm = np.linalg.norm(vec)
            if nrm < 1e-12:
                raise VacuumNotFound(
                    f"sector {sector} pattern {pattern} collapsed to zero")
            states.append(vec / nrm)
            sectors.append(sector)
            occupations.append(pattern + occ_pair)
            energies.append(base + shift)
        # the mixed state is reachable from either vacuum; record agreement
        alt = proj_hat_plus @ projected2
        nrm = np.linalg.norm(alt)
        if nrm > 1e-12:
            ov = abs(np.vdot(states[-2], alt / nrm))
            mixed_overlap_min = min(mixed_overlap_min, float(ov))

    states_mat = np.column_stack(states)
    energies_arr = np.array(energies)
    resid = float(np.max(np.abs(H @ states_mat - states_mat * energies_arr[None, :])))
    sv = np.linalg.svd(states_mat, compute_uv=False)
    rank = int(np.sum(sv > 1e-8 * sv[0]))

    # naive double raising with the defective eigenvector collapses
    naive = rop(wp) @ rop(wp)
    naive_sq = float(np.linalg.norm(naive) /
                     max(np.linalg.norm(rop(wp)) ** 2, 1e-300))

    return EPStates(sectors=sectors, occupations=occupations,
                    energies=energies_arr, states=states_mat,
                    max_eigen_residual=resid, rank=rank,
                    vacuum_dims=(omega1_basis.shape[1], omega2_basis.shape[1]),
                    mixed_overlap_min=mixed_overlap_min,
                    naive_square_norm=naive_sq, h_norm=h_norm)
