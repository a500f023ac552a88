import numpy as np
import pytest

from xyep.basis import (
    FAMILIES,
    anticommutator,
    assemble_basis,
    many_body_energies,
    operator_coefficients,
    pairing_structure,
    vacuum_energy,
)
from xyep.chain import ChainSpec, build_quasi_hamiltonian
from xyep.errors import DefectiveBasis, DegenerateInput

RNG = np.random.default_rng(77)


def random_gamma():
    return complex(RNG.uniform(-1.5, 1.5), RNG.uniform(0.2, 1.5))


def test_biorthogonality_and_reconstruction():
    for L in (2, 6, 12):
        spec = ChainSpec(L, random_gamma())
        basis = assemble_basis(spec)
        qh = build_quasi_hamiltonian(spec)
        eye = np.eye(2 * L)
        assert np.max(np.abs(basis.V @ basis.V_inv - eye)) < 1e-9
        assert np.max(np.abs(basis.V_inv @ basis.V - eye)) < 1e-9
        rebuilt = basis.V @ np.diag(basis.Lambda) @ basis.V_inv
        assert np.linalg.norm(rebuilt - qh.M) < 1e-9 * np.linalg.norm(qh.M)
        # transpose-structured inverse away from EPs
        np.testing.assert_allclose(basis.V_inv, basis.V.T, atol=1e-9)


def test_columns_come_in_sign_pairs():
    spec = ChainSpec(6, 0.3 - 0.7j)
    basis = assemble_basis(spec)
    lam = basis.Lambda
    assert lam.shape == (12,)
    np.testing.assert_allclose(lam[0::2], -lam[1::2], atol=1e-14)
    eps = [p.epsilon for p in basis.points[0::2]]
    np.testing.assert_allclose(lam[0::2], eps, atol=1e-14)


def test_defective_basis_raised_at_ep():
    with pytest.raises(DefectiveBasis):
        with pytest.warns(Warning):
            assemble_basis(ChainSpec(4, 0.6 + 0.8j))


def test_bilinear_halves_split_evenly():
    # the +eps row against the -eps column forces phi.phi = psi.psi = 1/2
    spec = ChainSpec(8, 0.9 + 0.4j)
    basis = assemble_basis(spec)
    for k in range(0, 16, 2):
        phi, psi = basis.phis[:, k], basis.psis[:, k]
        assert abs(phi @ phi - 0.5) < 1e-10
        assert abs(psi @ psi - 0.5) < 1e-10


def expected_anticommutator(fam_a, i, fam_b, j):
    conjugate = {"R": "Lstar", "Lstar": "R", "Rstar": "L", "L": "Rstar"}
    if conjugate[fam_a] == fam_b:
        return 1.0 if i == j else 0.0
    if fam_a == fam_b:
        # same family: -1 between the two signs of one branch
        same_branch = (i + 1) // 2 == (j + 1) // 2
        return -1.0 if (same_branch and i != j) else 0.0
    # cross-mode combinations vanish by parity support
    return 0.0


def test_anticommutator_full_table():
    for L in (2, 6, 14):
        spec = ChainSpec(L, random_gamma())
        coeffs = operator_coefficients(assemble_basis(spec))
        worst = 0.0
        for fam_a in FAMILIES:
            for fam_b in FAMILIES:
                for i in range(1, L + 1):
                    for j in range(1, L + 1):
                        got = anticommutator(coeffs, fam_a, i, fam_b, j)
                        want = expected_anticommutator(fam_a, i, fam_b, j)
                        worst = max(worst, abs(got - want))
        assert worst < 1e-10


def test_anticommutator_validates_input():
    spec = ChainSpec(4, 0.5 + 0.5j)
    coeffs = operator_coefficients(assemble_basis(spec))
    with pytest.raises(DegenerateInput):
        anticommutator(coeffs, "Q", 1, "R", 1)
    with pytest.raises(DegenerateInput):
        anticommutator(coeffs, "R", 0, "R", 1)
    with pytest.raises(DegenerateInput):
        anticommutator(coeffs, "R", 5, "R", 1)


def test_many_body_spectrum_shape_and_ground():
    spec = ChainSpec(6, 0.4 + 0.2j)
    mb = many_body_energies(spec)
    assert mb.energies.shape == (64,)
    assert mb.occupations.shape == (64, 6)
    vac = vacuum_energy(spec)
    # the all-minus configuration is -E0/2 = -(sum eps)/2
    eps_sum = complex(np.sum(mb.epsilons_I) + np.sum(mb.epsilons_II))
    assert vac.ground == pytest.approx(-eps_sum / 2, abs=1e-12)
    assert np.min(mb.energies.real) == pytest.approx(vac.ground.real, abs=1e-10)
    # spectrum is symmetric under global sign flip
    flipped = np.sort_complex(-mb.energies)
    np.testing.assert_allclose(np.sort_complex(mb.energies), flipped,
                               atol=1e-10)


def test_occupation_energy_consistency():
    spec = ChainSpec(4, 0.7 + 0.1j)
    mb = many_body_energies(spec)
    eps = np.concatenate([mb.epsilons_I, mb.epsilons_II])
    for bits, energy in zip(mb.occupations, mb.energies):
        expect = 0.5 * (2 * bits - 1) @ eps
        assert abs(energy - expect) < 1e-12


def test_pairing_structure_defects_vanish():
    spec = ChainSpec(8, -0.6 + 1.1j)
    records = pairing_structure(assemble_basis(spec))
    assert len(records) == 8
    worst = max(max(r["phi_defect"], r["psi_defect"]) for r in records)
    assert worst < 1e-9
