"""Parameter-space topology: rigidity maps, monodromy loops, branch scaling.

The quantities here probe how eigenstates move when the anisotropy is
varied in the complex plane: the bilinear self-overlap of a tracked
many-body state (which vanishes at an exceptional point), the
permutation of quasi-energy labels around closed loops, and the
square-root scaling of the level splitting near a defective parameter.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .chain import ChainSpec, boundary_polynomial, eps_of_x, quasi_energies
from .ep import EPRecord, locate_eps
from .errors import (
    AmbiguousContinuation,
    DegenerateInput,
    SizeLimit,
    ZeroVector,
)
from .oracle import build_spin_hamiltonian, ed_eigen
from .polyalg import poly_roots

__all__ = [
    "OverlapGrid",
    "SheetStitch",
    "LoopResult",
    "ScalingFit",
    "phase_rigidity",
    "overlap_grid",
    "sheet_stitch",
    "track_loop",
    "branch_scaling_probe",
]

POLE_RADIUS = 1e-2
_GRID_SIZE_LIMIT = 8


def phase_rigidity(v: np.ndarray) -> complex:
    """Bilinear self-overlap (v.v) / (v*.v) of a state vector.

    Equals 1 for any real vector, 0 for a bilinearly self-orthogonal
    one such as a coalescing eigenvector.  The magnitude is gauge
    independent; the phase rotates with the gauge of v.
    """
    v = np.asarray(v, dtype=complex).ravel()
    d = np.vdot(v, v).real
    if d < 1e-300:
        raise ZeroVector("phase rigidity of the zero vector is undefined")
    return complex((v @ v) / d)


def resolve_threads(requested: int | None) -> int:
    """Thread count: explicit argument, else XYEP_THREADS, else one."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("XYEP_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


@dataclass(frozen=True)
class OverlapGrid:
    """Tracked-pair overlap data over a rectangle of anisotropies.

    ``overlap_a[i, j]`` is the complex self-overlap of the first
    tracked state at gamma = re_vals[i] + 1j * im_vals[j]; cells inside
    ``pole_mask`` sit within the excluded discs around gamma = +-1 and
    hold NaN.  ``parity`` records which tracked state currently sorts
    first, whose sign changes delineate the branch-cut seam.
    """

    L: int
    re_vals: np.ndarray
    im_vals: np.ndarray
    overlap_a: np.ndarray
    overlap_b: np.ndarray
    energy_a: np.ndarray
    energy_b: np.ndarray
    parity: np.ndarray
    pole_mask: np.ndarray
    ep_gamma: complex
    occupation_a: tuple[int, ...]
    occupation_b: tuple[int, ...]


def _default_selector(L: int, center: complex):
    """Occupation patterns of a pair that merges at the EP nearest center.

    All slots sit at their minus sign except the two coalescing
    branches of the degenerate mode, which carry (1,0) and (0,1).
    Returns (ep_record, pattern_a, pattern_b); patterns index the L
    slots as mode I branches then mode II branches.
    """
    eps = locate_eps(L, "both")
    if not eps:
        raise DegenerateInput(f"no exceptional points exist at L = {L}")
    ep = min(eps, key=lambda r: abs(r.gamma - center))
    n = L // 2
    a = [0] * L
    b = [0] * L
    offset = 0 if ep.mode == "I" else n
    # the coalescing pair is identified per cell as the two closest
    # branches of the degenerate mode; here slots 0 and 1 of that mode
    a[offset], b[offset + 1] = 1, 1
    return ep, tuple(a), tuple(b)


def _pair_energies_at(spec: ChainSpec, ep: EPRecord,
                      pattern_a, pattern_b) -> tuple[complex, complex]:
    """Analytic energies of the two tracked patterns at one anisotropy.

    Slots of the degenerate mode are ordered so that the two branches
    closest to coalescing come first; remaining slots keep the usual
    quasi-energy order.  This pins the tracked pair near the EP without
    reference to any previous cell.
    """
    pts = quasi_energies(spec, warn=False)
    out = []
    for mode in ("I", "II"):
        eps_m = [p.epsilon for p in pts if p.mode == mode]
        xs_m = [p.x for p in pts if p.mode == mode]
        if mode == ep.mode:
            order = np.argsort([abs(x - ep.x) for x in xs_m])
            eps_m = [eps_m[i] for i in order]
        out.extend(eps_m)
    eps_arr = np.array(out)

    def energy(pattern):
        signs = 2 * np.array(pattern) - 1
        return complex(0.5 * signs @ eps_arr)

    return energy(pattern_a), energy(pattern_b)


def overlap_grid(L: int, re_min: float, re_max: float, im_min: float,
                 im_max: float, n_re: int, n_im: int,
                 selector=None, threads: int | None = None) -> OverlapGrid:
    """Track a merging pair of eigenstates over a rectangle of gamma.

    The pair is anchored analytically at the grid cell nearest the
    selected EP, where the occupation patterns identify it without
    ambiguity, and continued outward by continuity: along the anchor
    row across columns, then column by column away from the anchor
    row.  (Seeding at a far corner instead can latch onto branches
    that never merge, because the pattern labels rely on orderings
    that are only locally stable around the EP.)  The tracked vectors
    are phase-aligned along each path so the complex overlap varies
    continuously away from the seam.  Cells within 1e-2 of
    gamma = +-1 are masked as poles.
    """
    if L > _GRID_SIZE_LIMIT:
        raise SizeLimit(f"overlap grids are capped at L = {_GRID_SIZE_LIMIT}")
    if n_re < 2 or n_im < 2:
        raise DegenerateInput("grid needs at least 2 points per axis")
    re_vals = np.linspace(re_min, re_max, n_re)
    im_vals = np.linspace(im_min, im_max, n_im)
    center = complex((re_min + re_max) / 2, (im_min + im_max) / 2)
    if selector is None:
        ep, pat_a, pat_b = _default_selector(L, center)
    else:
        ep, pat_a, pat_b = selector

    shape = (n_re, n_im)
    overlap_a = np.full(shape, np.nan, dtype=complex)
    overlap_b = np.full(shape, np.nan, dtype=complex)
    energy_a = np.full(shape, np.nan, dtype=complex)
    energy_b = np.full(shape, np.nan, dtype=complex)
    parity = np.zeros(shape, dtype=np.int8)
    pole_mask = np.zeros(shape, dtype=bool)

    def is_pole(g: complex) -> bool:
        return abs(g - 1) < POLE_RADIUS or abs(g + 1) < POLE_RADIUS

    def eig_cell(g: complex):
        H = build_spin_hamiltonian(L, g)
        return ed_eigen(H, want_vectors=True)

    def seed_pair(g: complex):
        spec = ChainSpec(L, g)
        ea, eb = _pair_energies_at(spec, ep, pat_a, pat_b)
        res = eig_cell(g)
        cost = np.abs(np.array([[ea], [eb]]) - res.values[None, :])
        rows, cols = linear_sum_assignment(cost)
        pick = dict(zip(rows, cols))
        va = res.vectors[:, pick[0]].copy()
        vb = res.vectors[:, pick[1]].copy()
        return (res.values[pick[0]], va), (res.values[pick[1]], vb)

    def advance(prev, res):
        """Match the tracked pair into the next cell's eigensystem."""
        (ea, va), (eb, vb) = prev
        cost = np.abs(np.array([ea, eb])[:, None] - res.values[None, :])
        rows, cols = linear_sum_assignment(cost)
        pick = dict(zip(rows, cols))
        out = []
        for tracked_vec, col in ((va, pick[0]), (vb, pick[1])):
            v = res.vectors[:, col].copy()
            ip = np.vdot(tracked_vec, v)
            if abs(ip) > 0:
                v *= np.conj(ip) / abs(ip)
            out.append((res.values[col], v))
        return tuple(out)

    # anchor cell: non-pole cell nearest the EP, preferring one at least
    # half a cell diagonal away so its eigenvectors are not defective
    dre = re_vals[1] - re_vals[0] if n_re > 1 else 0.0
    dim = im_vals[1] - im_vals[0] if n_im > 1 else 0.0
    half_diag = 0.5 * float(np.hypot(dre, dim))
    candidates = [(i, j) for i in range(n_re) for j in range(n_im)
                  if not is_pole(complex(re_vals[i], im_vals[j]))]
    if not candidates:
        raise DegenerateInput("every grid cell sits inside a pole disc")

    def ep_dist(cell):
        return abs(complex(re_vals[cell[0]], im_vals[cell[1]]) - ep.gamma)

    offset = [c for c in candidates if ep_dist(c) >= half_diag]
    anchor_i, anchor_j = min(offset or candidates, key=ep_dist)

    # anchor row: seed at the anchor, continuity-track left and right
    n_threads = resolve_threads(threads)
    row_pairs: list = [None] * n_re
    row_pairs[anchor_i] = seed_pair(complex(re_vals[anchor_i],
                                            im_vals[anchor_j]))
    for step in (1, -1):
        prev = row_pairs[anchor_i]
        i = anchor_i + step
        while 0 <= i < n_re:
            g = complex(re_vals[i], im_vals[anchor_j])
            if not is_pole(g):
                prev = advance(prev, eig_cell(g))
                row_pairs[i] = prev
            i += step

    def run_column(i: int):
        col_overlap_a = np.full(n_im, np.nan, dtype=complex)
        col_overlap_b = np.full(n_im, np.nan, dtype=complex)
        col_ea = np.full(n_im, np.nan, dtype=complex)
        col_eb = np.full(n_im, np.nan, dtype=complex)
        col_parity = np.zeros(n_im, dtype=np.int8)
        col_pole = np.zeros(n_im, dtype=bool)

        def record(j, cur):
            (ea, va), (eb, vb) = cur
            col_ea[j], col_eb[j] = ea, eb
            col_overlap_a[j] = phase_rigidity(va)
            col_overlap_b[j] = phase_rigidity(vb)
            key_a, key_b = (ea.real, ea.imag), (eb.real, eb.imag)
            col_parity[j] = 0 if key_a <= key_b else 1

        start = row_pairs[i]
        if start is None:
            # anchor row blocked by a pole disc; seed at the nearest
            # usable cell of this column instead
            usable = [j for j in range(n_im)
                      if not is_pole(complex(re_vals[i], im_vals[j]))]
            for j in range(n_im):
                col_pole[j] = j not in usable
            if not usable:
                return (col_overlap_a, col_overlap_b, col_ea, col_eb,
                        col_parity, col_pole)
            j0 = min(usable, key=lambda j: abs(j - anchor_j))
            start = seed_pair(complex(re_vals[i], im_vals[j0]))
        else:
            j0 = anchor_j
        record(j0, start)
        for step in (1, -1):
            prev = start
            j = j0 + step
            while 0 <= j < n_im:
                g = complex(re_vals[i], im_vals[j])
                if is_pole(g):
                    col_pole[j] = True
                else:
                    prev = advance(prev, eig_cell(g))
                    record(j, prev)
                j += step
        return (col_overlap_a, col_overlap_b, col_ea, col_eb,
                col_parity, col_pole)

    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        col_data = list(pool.map(run_column, range(n_re)))
    for i, (ca, cb, ce, cf, cp, cm) in enumerate(col_data):
        overlap_a[i], overlap_b[i] = ca, cb
        energy_a[i], energy_b[i] = ce, cf
        parity[i], pole_mask[i] = cp, cm | pole_mask[i]

    return OverlapGrid(L=L, re_vals=re_vals, im_vals=im_vals,
                       overlap_a=overlap_a, overlap_b=overlap_b,
                       energy_a=energy_a, energy_b=energy_b,
                       parity=parity, pole_mask=pole_mask,
                       ep_gamma=ep.gamma,
                       occupation_a=pat_a, occupation_b=pat_b)


@dataclass(frozen=True)
class SheetStitch:
    """Two overlap sheets plus the seam where their labels exchange."""

    sheet_a: np.ndarray
    sheet_b: np.ndarray
    seam_points: list[complex]
    ep_gamma: complex
    cell_diag: float


def sheet_stitch(grid: OverlapGrid) -> SheetStitch:
    """Locate the branch-cut seam as midpoints of parity flips.

    The seam is reported as a polyline of cell-boundary midpoints
    ordered by imaginary part; on a grid straddling an exceptional
    point it terminates at (within one cell of) the EP.
    """
    seam = []
    n_re, n_im = grid.parity.shape
    dre = grid.re_vals[1] - grid.re_vals[0] if n_re > 1 else 0.0
    dim = grid.im_vals[1] - grid.im_vals[0] if n_im > 1 else 0.0
    for i in range(n_re - 1):
        for j in range(n_im):
            if grid.pole_mask[i, j] or grid.pole_mask[i + 1, j]:
                continue
            if grid.parity[i, j] != grid.parity[i + 1, j]:
                seam.append(complex((grid.re_vals[i] + grid.re_vals[i + 1]) / 2,
                                    grid.im_vals[j]))
    for i in range(n_re):
        for j in range(n_im - 1):
            if grid.pole_mask[i, j] or grid.pole_mask[i, j + 1]:
                continue
            if grid.parity[i, j] != grid.parity[i, j + 1]:
                seam.append(complex(grid.re_vals[i],
                                    (grid.im_vals[j] + grid.im_vals[j + 1]) / 2))
    seam.sort(key=lambda z: (z.imag, z.real))
    return SheetStitch(sheet_a=grid.overlap_a, sheet_b=grid.overlap_b,
                       seam_points=seam, ep_gamma=grid.ep_gamma,
                       cell_diag=float(np.hypot(dre, dim)))


# ---------------------------------------------------------------------------
# monodromy loops
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LoopResult:
    """Permutation of quasi-energy labels after one closed parameter loop."""

    L: int
    center: complex
    radius: float
    steps: int
    refinements: int
    permutation: list[int]
    sign_flips: list[bool]
    closed: bool
    closure_defect: float

    def as_jsonable(self) -> dict:
        return {
            "L": self.L,
            "center": [self.center.real, self.center.imag],
            "radius": self.radius,
            "steps": self.steps,
            "refinements": self.refinements,
            "permutation": self.permutation,
            "sign_flips": [bool(f) for f in self.sign_flips],
            "closed": self.closed,
        }


def _branch_values(L: int, g: complex) -> np.ndarray:
    """All 2L signed quasi-energies at one anisotropy, mode-major."""
    spec = ChainSpec(L, g)
    vals = []
    for mode in ("I", "II"):
        roots = poly_roots(boundary_polynomial(spec, mode))
        for x in roots.expanded():
            e = eps_of_x(g, x)
            vals.extend([e, -e])
    return np.array(vals)


class _RefinementBudget:
    def __init__(self, per_step: int):
        self.per_step = per_step
        self.total = 0


def _continue_values(L: int, prev: np.ndarray, g0: complex, g1: complex,
                     depth: int, budget: _RefinementBudget) -> np.ndarray:
    cand = _branch_values(L, g1)
    cost = np.abs(prev[:, None] - cand[None, :])
    rows, cols = linear_sum_assignment(cost)
    new = cand[cols[np.argsort(rows)]]
    srt = np.sort(cost, axis=1)
    ambiguous = bool(np.any((srt[:, 1] == 0) |
                            (srt[:, 0] > 0.5 * srt[:, 1])))
    if not ambiguous:
        return new
    if depth >= budget.per_step:
        raise AmbiguousContinuation(
            f"branch matching stayed ambiguous after {depth} bisections "
            f"between gamma = {g0:.6g} and {g1:.6g}")
    budget.total += 1
    mid = (g0 + g1) / 2
    half = _continue_values(L, prev, g0, mid, depth + 1, budget)
    return _continue_values(L, half, mid, g1, depth + 1, budget)


def track_loop(L: int, center: complex, radius: float, steps: int = 256,
               max_refinements: int = 12, orientation: int = 1) -> LoopResult:
    """Drag all quasi-energy branches around a circle and read the permutation.

    Branches are continued by globally optimal nearest matching; a step
    whose best and second-best candidate distances differ by less than
    a factor of two is bisected, up to ``max_refinements`` levels,
    after which :class:`AmbiguousContinuation` is raised.  The returned
    permutation acts on the L positive-branch labels (mode I branches,
    then mode II); ``sign_flips[k]`` reports a label returning to its
    partner's negative.  ``orientation`` +1 traverses counterclockwise,
    -1 clockwise; reversing it inverts the permutation.
    """
    if steps < 8:
        raise DegenerateInput("a loop needs at least 8 steps")
    if orientation not in (1, -1):
        raise DegenerateInput("orientation must be +1 or -1")
    center = complex(center)
    gammas = [center + radius * np.exp(orientation * 2j * np.pi * t / steps)
              for t in range(steps)]
    gammas.append(gammas[0])

    start = _branch_values(L, gammas[0])
    budget = _RefinementBudget(max_refinements)
    vals = start.copy()
    for t in range(steps):
        vals = _continue_values(L, vals, gammas[t], gammas[t + 1], 0, budget)

    cost = np.abs(vals[:, None] - start[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm2 = cols[np.argsort(rows)]
    defect = float(np.max(np.abs(vals - start[perm2])))
    closed = defect <= 1e-8 * (1 + float(np.max(np.abs(start))))

    n_labels = L
    permutation = []
    sign_flips = []
    for q in range(n_labels):
        target = int(perm2[2 * q])
        permutation.append(target // 2)
        sign_flips.append(target % 2 == 1)
    return LoopResult(L=L, center=center, radius=float(radius), steps=steps,
                      refinements=budget.total, permutation=permutation,
                      sign_flips=sign_flips, closed=closed,
                      closure_defect=defect)


# ---------------------------------------------------------------------------
# splitting exponent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of log-splitting against log-distance."""

    ep_gamma: complex
    exponent: float
    prefactor: float
    radii: np.ndarray
    splittings: np.ndarray
    fit_residual: float


def branch_scaling_probe(ep: EPRecord, radii: np.ndarray | None = None,
                         direction: complex = 1.0 + 0.0j) -> ScalingFit:
    """Measure the splitting exponent of the coalescing pair near an EP.

    Evaluates the two nearest boundary roots at gamma = gamma_EP +
    r * direction for a decade ladder of radii and fits
    log|eps1 - eps2| = alpha log r + const; alpha -> 1/2 at a plain
    square-root branch point.
    """
    if radii is None:
        radii = np.geomspace(1e-4, 1e-7, 8)
    direction = complex(direction)
    if direction == 0:
        raise DegenerateInput("direction must be nonzero")
    direction /= abs(direction)
    splittings = []
    for r in radii:
        g = ep.gamma + r * direction
        spec = ChainSpec(ep.L, g)
        roots = poly_roots(boundary_polynomial(spec, ep.mode))
        xs = roots.expanded()
        order = np.argsort(np.abs(xs - ep.x))
        e1 = eps_of_x(g, complex(xs[order[0]]))
        e2 = eps_of_x(g, complex(xs[order[1]]))
        splittings.append(abs(e1 - e2))
    splittings = np.array(splittings)
    if np.any(splittings == 0):
        raise DegenerateInput("splitting vanished at a probe radius")
    lx, ly = np.log(np.asarray(radii, dtype=float)), np.log(splittings)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.max(np.abs(ly - (slope * lx + intercept))))
    return ScalingFit(ep_gamma=ep.gamma, exponent=float(slope),
                      prefactor=float(np.exp(intercept)), radii=radii,
                      splittings=splittings, fit_residual=resid)
