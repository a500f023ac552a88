"""Acceptance gate: one test per published capability of the package.

Each test carries one numbered criterion so the ``pytest -v`` report
reads as a pass/fail checklist.  Tolerances are the contract values,
not what the implementation happens to achieve.
"""

import time
import warnings

import numpy as np
import pytest

from xyep.basis import (anticommutator, assemble_basis, many_body_energies,
                        operator_coefficients)
from xyep.chain import ChainSpec, build_quasi_hamiltonian, quasi_energies
from xyep.ep import (generalized_eigenvector, jordan_decomposition,
                     locate_eps, reference_ep_gammas)
from xyep.oracle import (build_ep_states, build_spin_hamiltonian, ed_eigen,
                         geometric_multiplicities, l4_closed_form,
                         match_spectra, realize_operator)
from xyep.topology import branch_scaling_probe, overlap_grid, track_loop

warnings.simplefilter("ignore", UserWarning)

L4_EP = 0.6 + 0.8j
EVEN_L = (2, 4, 6, 8, 10, 12, 14)


def sample_gammas(rng, count, radius=1.5, exclude=(), margin=5e-2):
    """Random complex couplings avoiding the poles and listed points."""
    out = []
    holes = [1.0, -1.0] + list(exclude)
    while len(out) < count:
        g = complex(*rng.uniform(-radius, radius, size=2))
        if abs(g) >= radius:
            continue
        if min(abs(g - h) for h in holes) < margin:
            continue
        out.append(g)
    return out


def expected_anticommutator(fam_a, i, fam_b, j):
    conjugate = {"R": "Lstar", "Lstar": "R", "Rstar": "L", "L": "Rstar"}
    if conjugate[fam_a] == fam_b:
        return 1.0 if i == j else 0.0
    if fam_a == fam_b:
        same_branch = (i + 1) // 2 == (j + 1) // 2
        return -1.0 if (same_branch and i != j) else 0.0
    return 0.0


def test_criterion_01_ep_table_matches_reference_to_four_decimals():
    start = time.monotonic()
    for L in (4, 6, 8, 10, 12, 14):
        records = locate_eps(L, "both")
        for mode in ("I", "II"):
            got = [r.gamma for r in records if r.mode == mode]
            refs = reference_ep_gammas(L, mode)
            assert len(got) == len(refs) == 2 * (L - 2) // 2
            for ref in refs:
                # reference values carry four decimals, so the honest
                # comparison is per component
                dev = min(max(abs(g.real - ref.real), abs(g.imag - ref.imag))
                          for g in got)
                assert dev < 5e-5, f"L={L} mode {mode} ref {ref}: {dev:.2e}"
    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"EP search took {elapsed:.1f}s"


def test_criterion_02_l4_closed_form_spectrum_100_random_couplings():
    rng = np.random.default_rng(42)
    eps = [r.gamma for r in locate_eps(4, "both")]
    for g in sample_gammas(rng, 100, radius=2.0, exclude=eps, margin=1e-2):
        analytic = many_body_energies(ChainSpec(4, g)).energies
        closed = l4_closed_form(g).energies
        m = match_spectra(analytic, closed, tol=1e-10)
        assert m.max_abs_diff < 1e-10, f"gamma={g}: {m.max_abs_diff:.2e}"


def test_criterion_03_analytic_spectra_match_dense_diagonalization():
    start = time.monotonic()
    rng = np.random.default_rng(7)
    for L in (2, 4, 6, 8):
        for g in sample_gammas(rng, 25):
            analytic = many_body_energies(ChainSpec(L, g)).energies
            ed = ed_eigen(build_spin_hamiltonian(L, g),
                          want_vectors=False).values
            scale = float(np.max(np.abs(ed)))
            m = match_spectra(analytic, ed, tol=1e-8 * scale)
            assert m.max_abs_diff < 1e-8 * scale, \
                f"L={L} gamma={g}: {m.max_abs_diff / scale:.2e}"
    elapsed = time.monotonic() - start
    assert elapsed < 120.0, f"oracle comparison took {elapsed:.1f}s"


def test_criterion_04_mode_vectors_solve_the_eigenproblem():
    from xyep.chain import mode_vector_poly

    rng = np.random.default_rng(11)
    root2 = np.sqrt(2.0)
    for L in EVEN_L:
        for g in sample_gammas(rng, 10):
            spec = ChainSpec(L, g)
            qh = build_quasi_hamiltonian(spec)
            m_norm = float(np.linalg.norm(qh.M))
            for pt in quasi_energies(spec, warn=False):
                mv = mode_vector_poly(spec, pt)
                for sgn, phi, psi in ((+1, mv.phi, mv.psi),
                                      (-1, -mv.phi, mv.psi)):
                    col = np.concatenate([(phi + psi), (phi - psi)]) / root2
                    resid = np.linalg.norm(qh.M @ col - sgn * pt.epsilon * col)
                    rel = resid / (m_norm * np.linalg.norm(col))
                    assert rel < 1e-10, f"L={L} gamma={g} {pt.mode}:{pt.branch}"


def test_criterion_05_anticommutator_table():
    # scalar table, all families and indices
    for L in (2, 6, 14):
        coeffs = operator_coefficients(assemble_basis(
            ChainSpec(L, 0.35 - 0.55j)))
        for fam_a in ("R", "Rstar", "L", "Lstar"):
            for fam_b in ("R", "Rstar", "L", "Lstar"):
                for i in range(1, L + 1):
                    for j in range(1, L + 1):
                        got = anticommutator(coeffs, fam_a, i, fam_b, j)
                        want = expected_anticommutator(fam_a, i, fam_b, j)
                        assert abs(got - want) < 1e-10, \
                            f"L={L} {{{fam_a}_{i}, {fam_b}_{j}}}"
    # matrix-realized operators reproduce every scalar, including the
    # nilpotency R_i R_i = 0 through {R_i, R_i} = 0
    for L in (2, 4, 6):
        coeffs = operator_coefficients(assemble_basis(
            ChainSpec(L, -0.4 + 0.8j)))
        eye = np.eye(2 ** L)
        ops = {}
        for fam in ("R", "Rstar", "L", "Lstar"):
            for i in range(1, L + 1):
                ops[(fam, i)] = realize_operator(
                    L, getattr(coeffs, fam)[i - 1])
        for (fam_a, i), X in ops.items():
            for (fam_b, j), Y in ops.items():
                want = expected_anticommutator(fam_a, i, fam_b, j)
                assert np.max(np.abs(X @ Y + Y @ X - want * eye)) < 1e-9, \
                    f"L={L} {{{fam_a}_{i}, {fam_b}_{j}}} realized"


def test_criterion_06_diagonalization_reconstructs_m():
    rng = np.random.default_rng(23)
    for L in (2, 4, 6, 8, 10, 12):
        holes = [] if L == 2 else [r.gamma for r in locate_eps(L, "both")]
        for g in sample_gammas(rng, 5, exclude=holes):
            spec = ChainSpec(L, g)
            qh = build_quasi_hamiltonian(spec)
            b = assemble_basis(spec)
            recon = b.V @ np.diag(b.Lambda) @ b.V_inv
            rel = np.linalg.norm(qh.M - recon) / np.linalg.norm(qh.M)
            assert rel <= 1e-9, f"L={L} gamma={g}: {rel:.2e}"


def test_criterion_07_jordan_form_at_every_tabulated_ep():
    for L in (4, 6, 8):
        for ep in locate_eps(L, "both"):
            spec = ChainSpec(L, ep.gamma)
            for sign in (+1, -1):
                ch = generalized_eigenvector(spec, ep, sign)
                assert ch.chain_residual < 1e-8
                # off-parity components of the generalized vector vanish
                if ep.mode == "II":
                    off = (ch.phi_u[1::2], ch.psi_u[0::2])
                else:
                    off = (ch.phi_u[0::2], ch.psi_u[1::2])
                for arr in off:
                    assert np.max(np.abs(arr)) < 1e-12
            jd = jordan_decomposition(spec, ep)
            assert jd.jordan_residual <= 1e-8
            p = jd.chain_start
            off = jd.J - np.diag(np.diag(jd.J))
            assert off[p, p + 1] == 1.0 and off[p + 2, p + 3] == 1.0
            off[p, p + 1] = off[p + 2, p + 3] = 0.0
            assert np.max(np.abs(off)) == 0.0
            assert jd.J[p, p] == pytest.approx(ep.epsilon)
            assert jd.J[p + 2, p + 2] == pytest.approx(-ep.epsilon)
            assert jd.rank_deficiency_plus == 1
            assert jd.rank_deficiency_minus == 1


def test_criterion_08_many_body_census_at_the_l4_ep():
    ep = min(locate_eps(4, "both"), key=lambda r: abs(r.gamma - L4_EP))
    spec = ChainSpec(4, ep.gamma)
    H = build_spin_hamiltonian(4, ep.gamma)
    records = geometric_multiplicities(H)
    assert sum(r.geometric for r in records) == 12 == 3 * 2 ** (4 - 2)
    defective = [r for r in records if r.algebraic == 2 and r.geometric == 1]
    assert len(defective) == 4
    st = build_ep_states(spec, jordan_decomposition(spec, ep))
    assert st.states.shape[1] == 12
    assert st.rank == 12
    assert st.max_eigen_residual < 1e-8


def test_criterion_09_rigidity_collapses_only_at_the_ep():
    # endpoint values, tracked along a finely stepped segment so the
    # continuation cannot hop branches
    ends = overlap_grid(4, 0.6, 0.8, 0.8, 0.9, 9, 2)
    at_ep = abs(ends.overlap_a[0, 0])      # gamma = 0.6 + 0.8i
    away = abs(ends.overlap_a[-1, 0])      # gamma = 0.8 + 0.8i
    assert at_ep < 1e-6
    assert away > 0.05
    # vertical scan along Re gamma = 0.6: a single zero at Im gamma = 0.8
    scan = overlap_grid(4, 0.58, 0.62, 0.4, 1.2, 3, 17)
    col = np.abs(scan.overlap_a[1])
    ep_j = int(np.argmin(np.abs(scan.im_vals - 0.8)))
    assert col[ep_j] < 1e-6
    others = np.delete(col, ep_j)
    assert np.min(others) > 1e-3
    assert int(np.sum(col < 1e-4)) == 1


def test_criterion_10_monodromy_around_and_away_from_the_ep():
    looped = track_loop(4, L4_EP, 0.05)
    moved = [k for k, p in enumerate(looped.permutation) if p != k]
    assert len(moved) == 2                       # a single transposition
    assert looped.closed
    p = looped.permutation
    assert [p[p[k]] for k in range(4)] == [0, 1, 2, 3]   # double traversal
    reverse = track_loop(4, L4_EP, 0.05, orientation=-1)
    inverse = [0] * 4
    for k, t in enumerate(p):
        inverse[t] = k
    assert reverse.permutation == inverse        # reversal inverts
    free = track_loop(4, 0.2 + 0.1j, 0.05)
    assert free.permutation == [0, 1, 2, 3]
    assert not any(free.sign_flips)


def test_criterion_11_hermitian_and_real_coupling_limits():
    for L in EVEN_L:
        pts = quasi_energies(ChainSpec(L, 0.0), warn=False)
        assert max(abs(p.epsilon.imag) for p in pts) < 1e-12
        got = np.sort(np.array([p.epsilon.real for p in pts]))
        # both modes coincide, so each cos(n pi/(L+1)), n <= L/2, is doubled
        want = np.sort(np.array(
            [np.cos(n * np.pi / (L + 1))
             for n in range(1, L // 2 + 1)] * 2))
        assert np.max(np.abs(got - want)) < 1e-12
    for L in (2, 8, 14):
        for g in (0.35, -0.8, 1.7, 2.5):
            pts = quasi_energies(ChainSpec(L, g), warn=False)
            assert max(abs(p.epsilon.imag) for p in pts) < 1e-10


def test_criterion_12_ep_moduli():
    for r in locate_eps(4, "both"):
        assert abs(abs(r.gamma) - 1.0) < 1e-9
    for r in locate_eps(6, "both"):
        assert abs(abs(r.gamma) - 1.0) > 0.1


def test_criterion_13_square_root_splitting_at_every_ep():
    for L in (4, 6, 8):
        for ep in locate_eps(L, "both"):
            fit = branch_scaling_probe(ep)
            assert abs(fit.exponent - 0.5) < 0.05, \
                f"L={L} gamma={ep.gamma}: {fit.exponent:.4f}"
