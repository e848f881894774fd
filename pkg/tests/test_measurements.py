import numpy as np
import pytest

from locc_lab.errors import BadPriors, DimensionMismatch, TooManyStates
from locc_lab.measurements import (
    Povm,
    check_ppt,
    discrimination_matrix,
    ppt_discriminator,
    pt_floor,
    success_probability,
    validate_povm,
)
from locc_lab.numerics import identity
from locc_lab.states import (
    MaxEntSet,
    PAULI_X,
    build_even_family,
    build_lattice_state,
    build_mod3_family,
    builtin_triples_at,
    even_spec,
    mod3_spec,
    std_mes,
)


def basis_projectors(n):
    return tuple(np.diag(np.eye(n)[i]).astype(complex) for i in range(n))


# -------------------------------------------------------- validate_povm


def test_validate_basis_projectors():
    p = Povm(elements=basis_projectors(4), dims=(4,))
    rep = validate_povm(p)
    assert rep["pass"]
    assert rep["completeness_residual"] == 0.0
    assert max(rep["hermiticity_residuals"]) == 0.0


def test_validate_ppt_discriminator_d6():
    s = build_even_family(even_spec(6))
    rep = validate_povm(ppt_discriminator(s), tol=1e-10)
    assert rep["pass"]


def test_validate_scaled_elements_completeness_residual():
    n = 4
    p = Povm(elements=tuple(1.01 * m for m in basis_projectors(n)), dims=(n,))
    rep = validate_povm(p)
    assert not rep["pass"]
    assert abs(rep["completeness_residual"] - 0.01 * np.sqrt(n)) <= 1e-12


# ----------------------------------------------------- ppt_discriminator


def test_discriminator_floor_even_d4():
    s = build_even_family(even_spec(4))
    rep = check_ppt(ppt_discriminator(s))
    assert abs(pt_floor(3, 4) - 0.0) <= 1e-15
    assert min(rep.min_pt_eigenvalues) >= pt_floor(3, 4) - 1e-9
    assert rep.pass_


def test_discriminator_floor_d6_is_one_ninth():
    s = build_even_family(even_spec(6))
    rep = check_ppt(ppt_discriminator(s))
    assert abs(pt_floor(3, 6) - 1 / 9) <= 1e-15
    assert min(rep.min_pt_eigenvalues) >= 1 / 9 - 1e-9


def test_discriminator_bell_pair():
    s = MaxEntSet(d=2, unitaries=(identity(2), PAULI_X))
    p = ppt_discriminator(s)
    assert validate_povm(p)["pass"]
    assert np.allclose(discrimination_matrix(s, p), np.eye(2), atol=1e-12)


def test_discriminator_refuses_then_forces_lattice_set():
    # four states sharing the first Bell factor: canonical POVM leaves PPT
    lat = MaxEntSet(
        d=4,
        unitaries=tuple(build_lattice_state(0, y) for y in range(4)),
    )
    with pytest.raises(TooManyStates):
        ppt_discriminator(lat)
    rep = check_ppt(ppt_discriminator(lat, force=True))
    assert not rep.pass_
    assert abs(min(rep.min_pt_eigenvalues) - (-0.125)) <= 1e-12


# ------------------------------------------------------------ check_ppt


def test_check_ppt_separable_projector():
    e00 = np.zeros((4, 4), dtype=complex)
    e00[0, 0] = 1.0
    p = Povm(elements=(e00, identity(4) - e00), dims=(2, 2))
    rep = check_ppt(p)
    assert abs(rep.min_pt_eigenvalues[0]) <= 1e-12
    assert rep.pass_


def test_check_ppt_mes_projector_fails():
    d = 4
    phi = std_mes(d)
    proj = np.outer(phi, phi.conj())
    p = Povm(elements=(proj, identity(d * d) - proj), dims=(d, d))
    rep = check_ppt(p)
    assert abs(rep.min_pt_eigenvalues[0] - (-1 / d)) <= 1e-12
    assert not rep.pass_


def test_check_ppt_discriminator_mod3_d5():
    s = build_mod3_family(mod3_spec(5))
    rep = check_ppt(ppt_discriminator(s))
    assert rep.pass_
    assert abs(pt_floor(3, 5) - 1 / 15) <= 1e-15
    assert min(rep.min_pt_eigenvalues) >= 1 / 15 - 1e-9


def test_check_ppt_requires_bipartite_dims():
    p = Povm(elements=basis_projectors(4), dims=(4,))
    with pytest.raises(DimensionMismatch):
        check_ppt(p)


# ------------------------------------------------- discrimination matrix


@pytest.mark.parametrize("d", [4, 5, 6, 8])
def test_discriminator_is_exact_on_builtins(d):
    for s in builtin_triples_at(d):
        dm = discrimination_matrix(s, ppt_discriminator(s))
        assert np.abs(dm - np.eye(s.k)).max() <= 1e-9, s.label
        assert np.allclose(dm.sum(axis=1), 1.0, atol=1e-10)


def test_maximally_mixed_povm_gives_uniform_rows():
    s = build_even_family(even_spec(4))
    k, n = s.k, s.d * s.d
    p = Povm(elements=tuple(identity(n) / k for _ in range(k)), dims=(s.d, s.d))
    dm = discrimination_matrix(s, p)
    assert np.allclose(dm, 1.0 / k, atol=1e-12)


def test_discrimination_matrix_size_mismatch():
    s = build_even_family(even_spec(4))
    p = Povm(elements=basis_projectors(16)[:2], dims=(4, 4))
    with pytest.raises(DimensionMismatch):
        discrimination_matrix(s, p)


# --------------------------------------------------- success_probability


def test_success_perfect_discriminator():
    s = build_mod3_family(mod3_spec(5))
    p = ppt_discriminator(s)
    for priors in ([1 / 3] * 3, [0.5, 0.3, 0.2]):
        assert abs(success_probability(s, p, priors) - 1.0) <= 1e-9


def test_success_maximally_mixed():
    s = build_even_family(even_spec(4))
    k, n = s.k, s.d * s.d
    p = Povm(elements=tuple(identity(n) / k for _ in range(k)), dims=(s.d, s.d))
    assert abs(success_probability(s, p, [1 / 3] * 3) - 1 / 3) <= 1e-12


def test_success_rejects_bad_priors():
    s = build_even_family(even_spec(4))
    p = ppt_discriminator(s)
    with pytest.raises(BadPriors):
        success_probability(s, p, [0.5, 0.5])
    with pytest.raises(BadPriors):
        success_probability(s, p, [0.7, 0.4, -0.1])
