"""POVM representation, PPT membership testing, and discrimination statistics.

The canonical complete discriminating measurement for k orthogonal maximally
entangled states is M_i = (1/k)(I + (k-1) rho_i - sum_{j != i} rho_j); its
partial transposes stay positive whenever k <= d/2 + 1, with per-element
eigenvalue floor (1/k)(1 - 2(k-1)/d).
"""

from dataclasses import dataclass

import numpy as np

from .errors import BadPriors, DimensionMismatch, TooManyStates
from .numerics import dag, eig_hermitian, frob, identity, partial_transpose

PSD_TOL = 1e-9


@dataclass(frozen=True)
class Povm:
    """Positive operators summing to identity, with a provenance label."""

    elements: tuple
    dims: tuple  # (dimA, dimB) for bipartite operators, (d,) otherwise
    label: str = ""

    @property
    def total_dim(self):
        return int(np.prod(self.dims))

    @property
    def k(self):
        return len(self.elements)


@dataclass(frozen=True)
class PptReport:
    """Minimum partial-transpose eigenvalue per element against the floor."""

    min_pt_eigenvalues: tuple
    bound: float
    pass_: bool

    def to_json(self):
        return {
            "min_pt_eigenvalues": [float(v) for v in self.min_pt_eigenvalues],
            "bound": float(self.bound),
            "pass": bool(self.pass_),
        }


def validate_povm(p, tol=PSD_TOL):
    """Hermiticity, positivity, and completeness residuals for a POVM."""
    n = p.total_dim
    herm = [frob(m - dag(m)) for m in p.elements]
    min_eigs = [float(eig_hermitian((m + dag(m)) / 2).eigenvalues[0]) for m in p.elements]
    completeness = frob(sum(p.elements) - identity(n))
    return {
        "hermiticity_residuals": herm,
        "min_eigenvalues": min_eigs,
        "completeness_residual": completeness,
        "pass": max(herm) <= tol and min(min_eigs) >= -tol and completeness <= tol,
    }


def ppt_discriminator(mes, force=False):
    """Complete measurement distinguishing the states of an orthogonal set.

    Element i is (1/k)(I + (k-1) rho_i - sum_{j != i} rho_j). Positivity of
    the partial transposes is only guaranteed for k <= d/2 + 1; larger sets
    raise TooManyStates unless force is set, in which case the measurement is
    still built so the failure can be inspected via check_ppt.
    """
    d, k = mes.d, mes.k
    if k > d / 2 + 1 and not force:
        raise TooManyStates(
            f"k={k} exceeds d/2+1={d / 2 + 1}; PT positivity not guaranteed "
            "(pass force=True to build anyway)"
        )
    rhos = [np.outer(v, v.conj()) for v in mes.states()]
    total = sum(rhos)
    elements = tuple(
        (identity(d * d) + k * rhos[i] - total) / k for i in range(k)
    )
    return Povm(elements=elements, dims=(d, d), label=f"ppt_discriminator[{mes.label}]")


def pt_floor(k, d):
    """Analytic lower bound on PT eigenvalues of the discriminator elements."""
    return (1.0 / k) * (1.0 - 2.0 * (k - 1) / d)


def check_ppt(p, tol=PSD_TOL):
    """Minimum eigenvalue of each element's partial transpose."""
    if len(p.dims) != 2:
        raise DimensionMismatch("check_ppt needs bipartite dims (dimA, dimB)")
    da, db = p.dims
    mins = []
    for m in p.elements:
        pt = partial_transpose(m, da, db)
        mins.append(float(eig_hermitian((pt + dag(pt)) / 2).eigenvalues[0]))
    bound = pt_floor(p.k, min(da, db))
    return PptReport(
        min_pt_eigenvalues=tuple(mins),
        bound=bound,
        pass_=min(mins) >= -tol,
    )


def discrimination_matrix(mes, p):
    """Matrix of outcome probabilities: entry (i, j) = <psi_i| M_j |psi_i>."""
    if p.k != mes.k:
        raise DimensionMismatch(
            f"POVM has {p.k} elements but the set has {mes.k} states"
        )
    if p.total_dim != mes.d * mes.d:
        raise DimensionMismatch("POVM dimension does not match the state space")
    out = np.zeros((mes.k, p.k))
    for i, psi in enumerate(mes.states()):
        for j, m in enumerate(p.elements):
            out[i, j] = np.real(np.vdot(psi, m @ psi))
    return out


def _check_priors(priors, k):
    priors = np.asarray(priors, dtype=float)
    if priors.shape != (k,):
        raise BadPriors(f"need {k} prior probabilities, got shape {priors.shape}")
    if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-12:
        raise BadPriors("priors must be nonnegative and sum to 1")
    return priors


def success_probability(mes, p, priors):
    """Probability of a correct guess: sum_i priors[i] <psi_i| M_i |psi_i>."""
    priors = _check_priors(priors, mes.k)
    return float(priors @ np.diag(discrimination_matrix(mes, p)))
