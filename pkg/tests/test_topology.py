"""Rigidity maps, branch-cut seams, monodromy loops, splitting exponents."""

import warnings

import numpy as np
import pytest

from xyep.ep import locate_eps
from xyep.errors import (AmbiguousContinuation, DegenerateInput, SizeLimit,
                         ZeroVector)
from xyep.topology import (branch_scaling_probe, overlap_grid, phase_rigidity,
                           resolve_threads, sheet_stitch, track_loop)

L4_EP = 0.6 + 0.8j
RNG = np.random.default_rng(7)

warnings.simplefilter("ignore", UserWarning)


def test_phase_rigidity_basic_identities():
    v = RNG.standard_normal(12) + 1j * RNG.standard_normal(12)
    r = phase_rigidity(v)
    assert abs(r) <= 1 + 1e-12               # Cauchy-Schwarz bound
    # magnitude is gauge independent, phase rotates with the gauge
    c = 0.3 - 1.7j
    assert abs(phase_rigidity(c * v)) == pytest.approx(abs(r), abs=1e-12)
    real_v = RNG.standard_normal(9)
    assert phase_rigidity(real_v) == pytest.approx(1.0, abs=1e-14)
    # a bilinearly self-orthogonal vector has rigidity zero
    assert abs(phase_rigidity(np.array([1.0, 1j]))) < 1e-15
    with pytest.raises(ZeroVector):
        phase_rigidity(np.zeros(4))


def test_resolve_threads_precedence(monkeypatch):
    monkeypatch.delenv("XYEP_THREADS", raising=False)
    assert resolve_threads(None) == 1
    assert resolve_threads(6) == 6
    assert resolve_threads(0) == 1
    monkeypatch.setenv("XYEP_THREADS", "4")
    assert resolve_threads(None) == 4
    assert resolve_threads(2) == 2          # explicit argument wins
    monkeypatch.setenv("XYEP_THREADS", "not-a-number")
    assert resolve_threads(None) == 1


def test_overlap_grid_strip_through_ep():
    grid = overlap_grid(4, 0.55, 0.65, 0.75, 0.85, 5, 5)
    assert grid.ep_gamma == pytest.approx(L4_EP, abs=1e-10)
    # slots: two mode I branches then two mode II; the EP lives in mode II
    assert grid.occupation_a == (0, 0, 1, 0)
    assert grid.occupation_b == (0, 0, 0, 1)
    assert not grid.pole_mask.any()
    mags = np.abs(grid.overlap_a)
    ij = np.unravel_index(np.argmin(mags), mags.shape)
    g_min = complex(grid.re_vals[ij[0]], grid.im_vals[ij[1]])
    assert abs(g_min - L4_EP) < 1e-10       # overlap collapses at the EP cell
    assert mags[ij] < 1e-4
    assert np.max(mags) > 0.2               # and recovers away from it


def test_overlap_grid_no_ep_window_is_smooth():
    grid = overlap_grid(4, -0.2, 0.2, -0.1, 0.1, 4, 4)
    stitch = sheet_stitch(grid)
    assert stitch.seam_points == []
    assert np.nanmin(np.abs(grid.overlap_a)) > 0.9
    assert np.nanmin(np.abs(grid.overlap_b)) > 0.9


def test_overlap_grid_pole_masking():
    grid = overlap_grid(4, 0.95, 1.05, -0.05, 0.05, 5, 5)
    assert grid.pole_mask.sum() == 1        # only gamma = 1 sits in the disc
    assert np.isnan(grid.overlap_a[grid.pole_mask]).all()
    assert not np.isnan(grid.overlap_a[~grid.pole_mask]).any()


def test_sheet_stitch_seam_ends_at_ep():
    grid = overlap_grid(4, 0.55, 0.65, 0.75, 0.85, 5, 5)
    stitch = sheet_stitch(grid)
    assert stitch.seam_points             # the branch cut crosses this window
    nearest = min(abs(z - grid.ep_gamma) for z in stitch.seam_points)
    assert nearest <= 2 * stitch.cell_diag


def test_overlap_grid_selector_override():
    ep = min(locate_eps(4, "I"), key=lambda r: abs(r.gamma - (-0.6 + 0.8j)))
    pat_a = (1, 0, 0, 0)
    pat_b = (0, 1, 0, 0)
    grid = overlap_grid(4, -0.65, -0.55, 0.75, 0.85, 5, 5,
                        selector=(ep, pat_a, pat_b))
    assert grid.ep_gamma == pytest.approx(ep.gamma, abs=1e-12)
    assert grid.occupation_a == pat_a
    assert np.min(np.abs(grid.overlap_a)) < 1e-3


def test_overlap_grid_limits_and_validation():
    with pytest.raises(SizeLimit):
        overlap_grid(10, 0, 1, 0, 1, 3, 3)
    with pytest.raises(DegenerateInput):
        overlap_grid(4, 0, 1, 0, 1, 1, 3)


def test_overlap_grid_thread_count_does_not_change_values():
    kw = dict(re_min=0.3, re_max=0.9, im_min=0.5, im_max=1.1, n_re=7, n_im=7)
    g1 = overlap_grid(4, threads=1, **kw)
    g2 = overlap_grid(4, threads=3, **kw)
    assert np.array_equal(g1.overlap_a, g2.overlap_a, equal_nan=True)
    assert np.array_equal(g1.overlap_b, g2.overlap_b, equal_nan=True)
    assert np.array_equal(g1.parity, g2.parity)


def test_track_loop_around_ep_swaps_the_pair():
    r = track_loop(4, L4_EP, 0.05, steps=64)
    assert r.permutation == [0, 1, 3, 2]
    assert r.sign_flips == [False] * 4
    assert r.closed and r.closure_defect < 1e-10
    # a transposition is an involution: composing the loop with itself
    # restores every label
    p = r.permutation
    assert [p[p[k]] for k in range(4)] == [0, 1, 2, 3]


def test_track_loop_orientation_reversal_inverts():
    ccw = track_loop(4, L4_EP, 0.05, steps=64)
    cw = track_loop(4, L4_EP, 0.05, steps=64, orientation=-1)
    inverse = [0] * 4
    for k, t in enumerate(ccw.permutation):
        inverse[t] = k
    assert cw.permutation == inverse
    assert cw.closed


def test_track_loop_without_ep_is_identity():
    r = track_loop(4, 0.2 + 0.1j, 0.05, steps=64)
    assert r.permutation == [0, 1, 2, 3]
    assert r.sign_flips == [False] * 4
    assert r.closed and r.closure_defect < 1e-10


def test_track_loop_validation():
    with pytest.raises(DegenerateInput):
        track_loop(4, 0.2, 0.05, steps=4)
    with pytest.raises(DegenerateInput):
        track_loop(4, 0.2, 0.05, orientation=0)


def test_track_loop_through_ep_is_ambiguous():
    # the circle passes through the exceptional point itself, where the
    # tracked branches genuinely coincide and no bisection can resolve them
    with pytest.raises(AmbiguousContinuation):
        track_loop(4, L4_EP + 0.05, 0.05, steps=64)


def test_branch_scaling_square_root():
    for L in (4, 6):
        for ep in locate_eps(L, "II"):
            fit = branch_scaling_probe(ep)
            assert abs(fit.exponent - 0.5) < 0.05
            assert fit.fit_residual < 1e-3
            assert fit.splittings.shape == fit.radii.shape
    ep = locate_eps(4, "II")[0]
    assert branch_scaling_probe(ep, direction=2.0).exponent == \
        branch_scaling_probe(ep, direction=1.0).exponent
    with pytest.raises(DegenerateInput):
        branch_scaling_probe(ep, direction=0.0)
