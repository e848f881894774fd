"""One-way LOCC analysis: witnesses, impossibility certificates, and the
randomized near-optimal protocol.

A first-round measurement element M of any perfect one-way protocol must
satisfy Tr(U_j^dag U_i M) = 0 for every pair of states i != j. Those trace
constraints form a real linear system over Hermitian matrices; when its null
space forces the top-left block of every solution to be scalar, no complete
rank-one first round exists and the certificate concludes impossibility.
The certificate is numerical: it certifies the specific phase values of the
family it is given, not the generic statement.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadPriors,
    NotCoisometry,
    NotDiagonal,
    SpecInvalid,
    UnknownBlockStructure,
)
from .measurements import Povm
from .numerics import dag, diagonalize_unitary, frob, identity, kron
from .states import MaxEntSet, pauli_product

ONE_WAY_IMPOSSIBLE = "OneWayImpossible"
INCONCLUSIVE = "Inconclusive"

# singular values below this fraction of the largest are treated as zero;
# the genericity margin on phases keeps true small singular values far above
NULLSPACE_RTOL = 1e-8

SCALAR_TOL = 1e-8


# ------------------------------------------------------------------ witnesses


@dataclass(frozen=True)
class IsometryCandidate:
    """A d x r matrix W with W W^dag = I_d.

    The columns encode the directions and weights of a rank-one first-round
    measurement; W W^dag = I is its completeness.
    """

    w: np.ndarray

    @staticmethod
    def identity(d):
        return IsometryCandidate(w=identity(d))

    def check(self, tol=1e-9):
        d = self.w.shape[0]
        residual = frob(self.w @ dag(self.w) - identity(d))
        if residual > tol * max(1.0, np.sqrt(d)):
            raise NotCoisometry(f"W W^dag deviates from identity by {residual:.3e}")


def check_isometry_witness(mes, cand, tol=1e-9):
    """Zero-diagonal test certifying one-way distinguishability.

    For each pair i != j the r x r matrix W^dag U_i^dag U_j W must have zero
    diagonal; a pass means the columns of W define a working first round.
    """
    cand.check()
    w = cand.w
    diag_max = {}
    for i in range(mes.k):
        for j in range(mes.k):
            if i == j:
                continue
            m = dag(w) @ dag(mes.unitaries[i]) @ mes.unitaries[j] @ w
            diag_max[(i, j)] = float(np.abs(np.diag(m)).max())
    worst = max(diag_max.values())
    return {"diag_max": diag_max, "worst": worst, "pass": worst <= tol}


# ----------------------------------------------------------- trace constraints


def trace_coords(t, d):
    """Coordinates of Tr(t M) against the orthonormal Hermitian basis of M."""
    out = np.empty(d * d, dtype=complex)
    out[:d] = np.diag(t)
    idx = d
    s = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            out[idx] = s * (t[j, i] + t[i, j])
            out[idx + 1] = s * 1j * (t[j, i] - t[i, j])
            idx += 2
    return out


def hermitian_coords(m):
    """Real coordinates of a Hermitian matrix in the orthonormal basis."""
    d = m.shape[0]
    out = np.empty(d * d)
    out[:d] = np.diag(m).real
    idx = d
    s = np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            out[idx] = m[i, j].real * s
            out[idx + 1] = m[i, j].imag * s
            idx += 2
    return out


def hermitian_from_coords(c, d):
    """Inverse of hermitian_coords."""
    m = np.zeros((d, d), dtype=complex)
    np.fill_diagonal(m, c[:d])
    idx = d
    s = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            m[i, j] = (c[idx] + 1j * c[idx + 1]) * s
            m[j, i] = (c[idx] - 1j * c[idx + 1]) * s
            idx += 2
    return m


@dataclass(frozen=True)
class ConstraintSystem:
    """Real linear system mapping Hermitian M to (Re, Im) of Tr(U_j^dag U_i M)."""

    d: int
    pairs: tuple
    real_matrix: np.ndarray

    def evaluate(self, m):
        return self.real_matrix @ hermitian_coords(m)


def build_constraint_system(mes):
    """Stack the pairwise trace constraints of a state set as a real matrix."""
    d = mes.d
    pairs = tuple((i, j) for i in range(mes.k) for j in range(i + 1, mes.k))
    mat = np.zeros((2 * len(pairs), d * d))
    for p, (i, j) in enumerate(pairs):
        t = dag(mes.unitaries[j]) @ mes.unitaries[i]
        coords = trace_coords(t, d)
        mat[2 * p] = coords.real
        mat[2 * p + 1] = coords.imag
    return ConstraintSystem(d=d, pairs=pairs, real_matrix=mat)


def nullspace(cs, rtol=NULLSPACE_RTOL):
    """Orthonormal Hermitian basis of the constraint system's null space."""
    rows, cols = cs.real_matrix.shape
    if rows == 0:
        return [hermitian_from_coords(e, cs.d) for e in np.eye(cols)]
    _, svals, vt = np.linalg.svd(cs.real_matrix)
    smax = svals[0] if len(svals) else 0.0
    rank = int(np.sum(svals > rtol * smax)) if smax > 0 else 0
    return [hermitian_from_coords(v, cs.d) for v in vt[rank:]]


# --------------------------------------------------------------- certificates


@dataclass(frozen=True)
class ImpossibilityCertificate:
    family: object
    nullspace_dim: int
    top_block_size: int
    top_block_image_dim: int
    forced_scalar: bool
    conclusion: str
    residuals: dict
    reduction_holds: bool = None

    def to_json(self):
        return {
            "family": self.family.to_json(),
            "nullspace_dim": self.nullspace_dim,
            "top_block_size": self.top_block_size,
            "top_block_image_dim": self.top_block_image_dim,
            "forced_scalar": bool(self.forced_scalar),
            "conclusion": self.conclusion,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "reduction_holds": self.reduction_holds,
        }


def certify_impossible(mes, rtol=NULLSPACE_RTOL):
    """Null-space analysis of the first-round trace constraints.

    Projects every null-space basis element onto its top-left block; if each
    block is a multiple of the identity, a complete rank-one first round is
    ruled out. For k-state families the certificate additionally reports
    whether the constraints force Tr(A X_i X_j) = 0 against the base Pauli
    products (reduction_holds); for k > 3 the conclusion stays Inconclusive
    because the remaining step rests on properties of the base set that this
    analysis does not re-derive.
    """
    spec = mes.spec
    if spec is None or spec.kind not in ("even_d", "mod3", "k_state"):
        kind = None if spec is None else spec.kind
        raise UnknownBlockStructure(
            f"no known top-block structure for family kind {kind!r}"
        )
    m_top = spec.top_block_size()
    cs = build_constraint_system(mes)
    basis = nullspace(cs, rtol)

    max_constraint = 0.0
    max_scalar_dev = 0.0
    max_reduction = 0.0
    image_rows = []
    base_products = None
    if spec.kind == "k_state":
        xs = [pauli_product(t) for t in spec.lattice_indices]
        base_products = [
            (i, j, xs[i] @ xs[j])
            for i in range(spec.k)
            for j in range(spec.k)
            if i != j
        ]

    for n in basis:
        max_constraint = max(max_constraint, float(np.abs(cs.evaluate(n)).max()))
        a = n[:m_top, :m_top]
        dev = frob(a - (np.trace(a) / m_top) * identity(m_top))
        max_scalar_dev = max(max_scalar_dev, dev / max(1.0, frob(n)))
        image_rows.append(a.reshape(-1))
        if base_products is not None:
            for _, _, prod in base_products:
                val = abs(np.trace(a @ prod))
                max_reduction = max(max_reduction, val / max(1.0, frob(n)))

    forced_scalar = bool(max_scalar_dev <= SCALAR_TOL)
    if image_rows:
        svals = np.linalg.svd(np.array(image_rows), compute_uv=False)
        image_dim = int(np.sum(svals > rtol * max(svals[0], 1e-300)))
    else:
        image_dim = 0

    reduction_holds = None
    if spec.kind == "k_state":
        reduction_holds = bool(max_reduction <= SCALAR_TOL)

    conclusion = ONE_WAY_IMPOSSIBLE if forced_scalar else INCONCLUSIVE
    if spec.kind == "k_state" and spec.k > 3:
        conclusion = INCONCLUSIVE

    residuals = {
        "max_constraint_residual": max_constraint,
        "max_scalar_deviation": max_scalar_dev,
    }
    if reduction_holds is not None:
        residuals["max_reduction_residual"] = max_reduction

    return ImpossibilityCertificate(
        family=spec,
        nullspace_dim=len(basis),
        top_block_size=m_top,
        top_block_image_dim=image_dim,
        forced_scalar=forced_scalar,
        conclusion=conclusion,
        residuals=residuals,
        reduction_holds=reduction_holds,
    )


# ------------------------------------------------------- randomized protocol


def _require_standard_triple(mes, tol=1e-9):
    if mes.k != 3:
        raise SpecInvalid(f"randomized protocol needs exactly 3 states, got {mes.k}")
    d = mes.d
    if frob(mes.unitaries[0] - identity(d)) > tol:
        raise SpecInvalid("randomized protocol needs u_0 = identity")
    u1 = mes.unitaries[1]
    off = u1 - np.diag(np.diag(u1))
    if frob(off) > tol:
        raise NotDiagonal(
            f"u_1 deviates from diagonal by {frob(off):.3e}; "
            "rotate the set with standardize_triple first"
        )


def standardize_triple(mes):
    """Rotate a 3-state set so that u_0 = I and u_1 is diagonal.

    First absorbs u_0 by a fixed rotation on Bob's side (u_i -> u_i u_0^dag),
    then conjugates with the eigenbasis of the new u_1; both steps are local
    rotations, so probabilities of any discrimination strategy are unchanged.
    """
    if mes.k != 3:
        raise SpecInvalid("standardize_triple expects a 3-state set")
    u0 = mes.unitaries[0]
    us = mes.unitaries
    if frob(u0 - identity(mes.d)) > 1e-12:
        us = tuple(u @ dag(u0) for u in us)
    v, _ = diagonalize_unitary(us[1])
    rotated = tuple(dag(v) @ u @ v for u in us)
    return MaxEntSet(d=mes.d, unitaries=rotated, spec=None, label=mes.label + "|standardized")


def fourier_basis(d):
    """Columns are |phi_j> = (1/sqrt d) sum_k exp(2 pi i jk/d)|k>."""
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)


def randomized_measurement_at(mes, x):
    """Three-outcome one-way measurement at dephasing angles x.

    Outcomes 0 and 1 perfectly identify the first two states; outcome 2 is
    the remainder and is attributed to the third state.
    """
    _require_standard_triple(mes)
    d = mes.d
    x = np.asarray(x, dtype=float)
    if x.shape != (d,):
        raise SpecInvalid(f"need {d} dephasing angles, got shape {x.shape}")
    wx = np.exp(2j * np.pi * x)
    f = fourier_basis(d)
    u1 = mes.unitaries[1]
    n2 = d * d
    pi0 = np.zeros((n2, n2), dtype=complex)
    pi1 = np.zeros((n2, n2), dtype=complex)
    for j in range(d):
        a = wx * f[:, j]
        b = np.conj(wx) * f[:, (d - j) % d]
        b1 = np.conj(wx) * (u1 @ f[:, (d - j) % d])
        pi0 += kron(np.outer(a, a.conj()), np.outer(b, b.conj()))
        pi1 += kron(np.outer(a, a.conj()), np.outer(b1, b1.conj()))
    pi2 = identity(n2) - pi0 - pi1
    return Povm(elements=(pi0, pi1, pi2), dims=(d, d), label=f"randomized(x)[{mes.label}]")


def averaged_operators(mes):
    """Exact dephasing averages of the first two randomized outcomes.

    Returns (Pi0, Pi1) with Pi_t = |psi_t><psi_t| + R/d, where R projects
    onto the off-diagonal product basis states |i (x) j>, i != j.
    """
    _require_standard_triple(mes)
    d = mes.d
    r = np.ones(d * d)
    r[:: d + 1] = 0.0
    r = np.diag(r).astype(complex)
    psi0, psi1 = mes.state(0), mes.state(1)
    pi0 = np.outer(psi0, psi0.conj()) + r / d
    pi1 = np.outer(psi1, psi1.conj()) + r / d
    return pi0, pi1


def averaged_povm(mes):
    """The averaged operators completed to a 3-outcome measurement."""
    pi0, pi1 = averaged_operators(mes)
    pi2 = identity(mes.d * mes.d) - pi0 - pi1
    return Povm(elements=(pi0, pi1, pi2), dims=(mes.d, mes.d), label=f"averaged[{mes.label}]")


def randomized_error_exact(mes, priors):
    """Exact error probability of the randomized protocol.

    Priors must be sorted descending; the protocol perfectly distinguishes
    the two most likely states, so only the third contributes error:
    p_2 <psi_2|(Pi0 + Pi1)|psi_2>, at most 2/(3d) under uniform priors.
    """
    priors = np.asarray(priors, dtype=float)
    if priors.shape != (3,) or np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-12:
        raise BadPriors("need 3 nonnegative priors summing to 1")
    if not (priors[0] >= priors[1] >= priors[2]):
        raise BadPriors("priors must be sorted descending (protocol targets the two most likely states)")
    work = mes
    off = mes.unitaries[1] - np.diag(np.diag(mes.unitaries[1]))
    if frob(off) > 1e-9 or frob(mes.unitaries[0] - identity(mes.d)) > 1e-9:
        work = standardize_triple(mes)
    pi0, pi1 = averaged_operators(work)
    psi2 = work.state(2)
    return float(priors[2] * np.real(np.vdot(psi2, (pi0 + pi1) @ psi2)))


def randomized_error_bound(d):
    """Uniform-prior guarantee for the randomized protocol."""
    return 2.0 / (3.0 * d)
