"""Adaptive LOCC protocols as executable trees.

A protocol is a tree of local nodes: Measure (Kraus operators on one party,
one subtree per outcome), Apply (a fixed isometry on one party), and Decide
leaves. Classical communication is implicit in the branching: acting after
the other party's measurement consumes one message.

Evaluation propagates non-normalized state matrices (rows = Alice's levels,
columns = Bob's) down every branch; the squared norm at a leaf is the branch
probability. Kraus operators may be rectangular, so parties can shed
subsystems they have measured away.

Conventions: Alice's side of a prepared state (I (x) u)|Phi> carries the
transpose of whatever acts on Bob's side, so constructors that realize a
textbook measurement "M" on Alice store its transpose as the literal Kraus.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChannelTooSmall,
    DuplicateStates,
    MalformedTree,
    NotOrthogonal,
    NotUnitary,
    RelabelingNotFound,
    SpecInvalid,
    UnsupportedR,
)
from .measurements import _check_priors
from .numerics import dag, diagonalize_unitary, frob, identity, is_unitary, kron
from .states import MaxEntSet, PAULIS, block_diag, cycle_permutation

TREE_TOL = 1e-9


# ------------------------------------------------------------------- nodes


@dataclass(frozen=True)
class Decide:
    guess: int


@dataclass(frozen=True)
class Apply:
    party: str
    op: np.ndarray
    child: object


@dataclass(frozen=True)
class Measure:
    party: str
    kraus: tuple
    children: tuple


@dataclass(frozen=True)
class ProtocolTree:
    root: object
    round_count: int
    label: str = ""


def _measure_rounds(node, last_party):
    if isinstance(node, Decide):
        return 0
    if isinstance(node, Apply):
        return _measure_rounds(node.child, last_party)
    step = 1 if (last_party is not None and node.party != last_party) else 0
    return step + max(_measure_rounds(c, node.party) for c in node.children)


def round_count(root):
    """Number of A<->B alternations along the deepest measurement path."""
    return _measure_rounds(root, None)


def _one_way(node, bob_acted):
    if isinstance(node, Decide):
        return True
    if isinstance(node, Apply):
        if node.party == "A" and bob_acted:
            return False
        return _one_way(node.child, bob_acted)
    if node.party == "A" and bob_acted:
        return False
    acted = bob_acted or node.party == "B"
    return all(_one_way(c, acted) for c in node.children)


def is_one_way(tree):
    """True when every classical message flows from Alice to Bob."""
    return _one_way(tree.root, False)


def make_tree(root, label=""):
    validate_tree(root)
    return ProtocolTree(root=root, round_count=round_count(root), label=label)


def validate_tree(node):
    """Check Kraus completeness, isometry of applies, and Decide leaves."""
    if isinstance(node, Decide):
        if not isinstance(node.guess, int) or node.guess < 0:
            raise MalformedTree(f"bad decision index {node.guess!r}")
        return
    if isinstance(node, Apply):
        if node.party not in ("A", "B"):
            raise MalformedTree(f"bad party {node.party!r}")
        op = node.op
        n = op.shape[1]
        if frob(dag(op) @ op - identity(n)) > TREE_TOL * max(1.0, np.sqrt(n)):
            raise MalformedTree("Apply operator is not an isometry")
        validate_tree(node.child)
        return
    if isinstance(node, Measure):
        if node.party not in ("A", "B"):
            raise MalformedTree(f"bad party {node.party!r}")
        if len(node.kraus) == 0 or len(node.kraus) != len(node.children):
            raise MalformedTree("Measure needs one child per Kraus operator")
        n = node.kraus[0].shape[1]
        total = np.zeros((n, n), dtype=complex)
        for k in node.kraus:
            if k.shape[1] != n:
                raise MalformedTree("Kraus operators disagree on input dimension")
            total += dag(k) @ k
        if frob(total - identity(n)) > TREE_TOL * max(1.0, np.sqrt(n)):
            raise MalformedTree(
                f"Kraus completeness violated by {frob(total - identity(n)):.3e}"
            )
        for c in node.children:
            validate_tree(c)
        return
    raise MalformedTree(f"unknown node type {type(node).__name__}")


def count_leaves(node):
    if isinstance(node, Decide):
        return 1
    if isinstance(node, Apply):
        return count_leaves(node.child)
    return sum(count_leaves(c) for c in node.children)


# -------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class ExactEvaluation:
    confusion: np.ndarray
    success: float
    transcript_count: int


def _apply_node_op(m, party, op):
    if party == "A":
        if op.shape[1] != m.shape[0]:
            raise MalformedTree(
                f"operator expects dimension {op.shape[1]}, Alice holds {m.shape[0]}"
            )
        return op @ m
    if op.shape[1] != m.shape[1]:
        raise MalformedTree(
            f"operator expects dimension {op.shape[1]}, Bob holds {m.shape[1]}"
        )
    return m @ op.T


def _walk_exact(node, m, k, out_row):
    if isinstance(node, Decide):
        if node.guess >= k:
            raise MalformedTree(f"decision index {node.guess} out of range for {k} states")
        out_row[node.guess] += np.linalg.norm(m) ** 2
        return
    if isinstance(node, Apply):
        _walk_exact(node.child, _apply_node_op(m, node.party, node.op), k, out_row)
        return
    for kr, child in zip(node.kraus, node.children):
        _walk_exact(child, _apply_node_op(m, node.party, kr), k, out_row)


def evaluate_exact(tree, mes, priors=None):
    """Walk every branch, accumulating exact decision probabilities."""
    validate_tree(tree.root)
    k = mes.k
    priors = _check_priors([1.0 / k] * k if priors is None else priors, k)
    confusion = np.zeros((k, k))
    for i in range(k):
        psi = mes.state(i).reshape(mes.d, mes.d)
        _walk_exact(tree.root, psi, k, confusion[i])
    success = float(priors @ np.diag(confusion))
    return ExactEvaluation(
        confusion=confusion, success=success, transcript_count=count_leaves(tree.root)
    )


# ------------------------------------------------------------ serialization


def _mat_to_json(m):
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def _mat_from_json(doc):
    return np.array(doc["re"], dtype=float) + 1j * np.array(doc["im"], dtype=float)


def _node_to_json(node):
    if isinstance(node, Decide):
        return {"kind": "decide", "guess": node.guess}
    if isinstance(node, Apply):
        return {
            "kind": "apply",
            "party": node.party,
            "op": _mat_to_json(node.op),
            "child": _node_to_json(node.child),
        }
    return {
        "kind": "measure",
        "party": node.party,
        "kraus": [_mat_to_json(k) for k in node.kraus],
        "children": [_node_to_json(c) for c in node.children],
    }


def _node_from_json(doc):
    kind = doc["kind"]
    if kind == "decide":
        return Decide(guess=int(doc["guess"]))
    if kind == "apply":
        return Apply(party=doc["party"], op=_mat_from_json(doc["op"]), child=_node_from_json(doc["child"]))
    if kind == "measure":
        return Measure(
            party=doc["party"],
            kraus=tuple(_mat_from_json(k) for k in doc["kraus"]),
            children=tuple(_node_from_json(c) for c in doc["children"]),
        )
    raise MalformedTree(f"unknown node kind {kind!r}")


def tree_to_json(tree):
    return {"root": _node_to_json(tree.root), "round_count": tree.round_count, "label": tree.label}


def tree_from_json(doc):
    root = _node_from_json(doc["root"])
    return make_tree(root, label=doc.get("label", ""))


# ------------------------------------------------------------- primitives


def _bra(v):
    return np.conj(v).reshape(1, -1)


def _bell_pair_subtree(ua, ub, decisions, tol=TREE_TOL):
    """Two-round discrimination of (I (x) ua)|Phi_2> vs (I (x) ub)|Phi_2>.

    Alice measures a basis along which ua^dag ub has zero diagonal (the
    mixed eigenvectors of that traceless unitary); Bob then projects onto
    the two orthogonal conditional states.
    """
    u = dag(ua) @ ub
    if abs(np.trace(u)) > tol:
        raise NotOrthogonal(f"|tr(ua^dag ub)| = {abs(np.trace(u)):.3e}")
    v, _ = diagonalize_unitary(u)
    phis = ((v[:, 0] + v[:, 1]) / np.sqrt(2), (v[:, 0] - v[:, 1]) / np.sqrt(2))
    children = []
    kraus = []
    for phi in phis:
        # Alice's literal operator is the transposed projector: bra of conj(phi)
        kraus.append(_bra(np.conj(phi)))
        w0 = ua @ phi
        w1 = ub @ phi
        children.append(
            Measure(
                party="B",
                kraus=(_bra(w0), _bra(w1)),
                children=(Decide(decisions[0]), Decide(decisions[1])),
            )
        )
    return Measure(party="A", kraus=tuple(kraus), children=tuple(children))


def bell_pair_discriminator(ua, ub):
    """One-way tree perfectly distinguishing two orthogonal qubit states."""
    ua = np.asarray(ua, dtype=complex)
    ub = np.asarray(ub, dtype=complex)
    if ua.shape != (2, 2) or ub.shape != (2, 2):
        raise SpecInvalid("bell_pair_discriminator expects 2x2 unitaries")
    for u in (ua, ub):
        if not is_unitary(u, 1e-9):
            raise NotUnitary("bell_pair_discriminator expects unitaries")
    return make_tree(_bell_pair_subtree(ua, ub, (0, 1)), label="bell_pair")


def _weyl_ops(n):
    """The n^2 unitaries X^a Z^b on an n-level system."""
    x = cycle_permutation(n)
    z = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    ops = []
    xa = identity(n)
    for a in range(n):
        zb = identity(n)
        for b in range(n):
            ops.append(xa @ zb)
            zb = z @ zb
        xa = x @ xa
    return ops


def _teleport_kraus(n):
    """Alice's n^2 joint Bell bras on (channel (x) qubit), qubit embedded
    in the first two channel levels."""
    kraus = []
    for u in _weyl_ops(n):
        k = np.zeros((1, 2 * n), dtype=complex)
        for c in range(n):
            for t in range(2):
                k[0, c * 2 + t] = np.conj(u[t, c]) / np.sqrt(n)
        kraus.append(k)
    return kraus


def _embedded_bell_measure(m_b, shift, candidate_sigmas, decisions):
    """Bob's final Bell-basis measurement on (levels shift, shift+1) (x) qubit."""
    emb = np.zeros((m_b, 2))
    emb[shift, 0] = 1.0
    emb[shift + 1, 1] = 1.0
    kraus = []
    children = []
    proj = np.zeros((2 * m_b, 2 * m_b), dtype=complex)
    for sig, dec in zip(candidate_sigmas, decisions):
        beta = sum(kron(emb[:, t], PAULIS[sig][:, t]) for t in range(2)) / np.sqrt(2)
        kraus.append(_bra(beta))
        children.append(Decide(dec))
        proj += np.outer(beta, beta.conj())
    kraus.append(identity(2 * m_b) - proj)
    children.append(Decide(decisions[0]))
    return Measure(party="B", kraus=tuple(kraus), children=tuple(children))


def _teleport_branch(n, m_b, shift, decisions, corrections=True, twist=None):
    """Teleport Alice's qubit through an n-level channel, then let Bob decide.

    Alice holds C^n (x) C^2; Bob holds C^m_b (x) C^2 with his channel half on
    levels shift..shift+n-1. The candidates are the Bell pairs (I (x) sigma)
    for sigma in (I, X, Z), decided per `decisions`.
    """
    s = np.zeros((m_b, n))
    for c in range(n):
        s[shift + c, c] = 1.0
    rest = identity(m_b) - s @ s.T
    children = []
    for u in _weyl_ops(n):
        cu = u if twist is None else u @ twist
        correction = s @ cu @ dag(s) + rest
        final = _embedded_bell_measure(m_b, shift, (0, 1, 2, 3), (decisions[0], decisions[1], decisions[0], decisions[2]))
        node = final
        if corrections:
            node = Apply(party="B", op=kron(correction, identity(2)), child=node)
        children.append(node)
    return Measure(party="A", kraus=tuple(_teleport_kraus(n)), children=tuple(children))


def teleport_subprotocol(channel_dim, corrections=True):
    """Standalone teleport-and-measure tree for the three Bell candidates.

    The shared state is an n-level maximally entangled channel times one of
    the qubit Bell pairs (I (x) sigma)|Phi_2>, sigma in (I, X, Z); after
    teleportation Bob holds both qubit halves and decides with a local
    Bell-basis measurement.
    """
    n = channel_dim
    if n < 2:
        raise ChannelTooSmall(f"teleportation channel needs dimension >= 2, got {n}")
    root = _teleport_branch(n, n, 0, (0, 1, 2), corrections=corrections)
    return make_tree(root, label=f"teleport(n={n})")


def teleport_candidate_set(channel_dim):
    """The state set teleport_subprotocol discriminates."""
    n = channel_dim
    sigmas = (PAULIS[0], PAULIS[1], PAULIS[3])
    return MaxEntSet(
        d=2 * n,
        unitaries=tuple(kron(identity(n), s) for s in sigmas),
        label=f"channel+bell(n={n})",
    )


# --------------------------------------------------- two-way, even dimension


def _elimination_weights(omega, gamma):
    """Nonnegative weights orthogonal to (1, omega, gamma).

    Valid whenever the imaginary parts of conj(omega), gamma, and
    conj(gamma)*omega share one sign.
    """
    return (
        abs(np.imag(np.conj(gamma) * omega)),
        abs(np.imag(gamma)),
        abs(np.imag(omega)),
    )


def _sign_condition(omega, gamma, margin=1e-9):
    ims = (
        np.imag(np.conj(omega)),
        np.imag(gamma),
        np.imag(np.conj(gamma) * omega),
    )
    if any(abs(v) < margin for v in ims):
        raise SpecInvalid(
            "phase configuration is within margin of the sign-condition boundary"
        )
    return all(v > 0 for v in ims) or all(v < 0 for v in ims)


# sign of sigma_j sigma_k sigma_j relative to sigma_k
_CONJ_SIGN = {
    (0, 1): 1, (1, 1): 1, (2, 1): -1, (3, 1): -1,  # conjugating X
    (0, 3): 1, (1, 3): -1, (2, 3): -1, (3, 3): 1,  # conjugating Z
}


def _select_rotation(omega, gamma):
    hits = []
    for j in range(4):
        op = omega * _CONJ_SIGN[(j, 1)]
        gp = gamma * _CONJ_SIGN[(j, 3)]
        if _sign_condition(op, gp):
            hits.append((j, op, gp))
    if len(hits) != 1:
        raise SpecInvalid(
            f"sign condition selected {len(hits)} rotations instead of exactly one"
        )
    return hits[0]


def _eliminating_measure(m, j, kk, phases, weights, children):
    """Bob's three-outcome POVM killing one candidate on span{|0>, |j>}."""
    e0 = np.zeros(m, dtype=complex)
    e0[0] = 1.0
    ej = np.zeros(m, dtype=complex)
    ej[j] = 1.0
    total = sum(weights)
    kraus = []
    for i in range(3):
        b = (e0 - (-1) ** kk * np.conj(phases[i]) * ej) / np.sqrt(2)
        scale = np.sqrt(2 * weights[i] / total)
        kraus.append(scale * kron(_bra(b), identity(2)))
    rest = identity(m) - np.outer(e0, e0.conj()) - np.outer(ej, ej.conj())
    kraus.append(kron(rest, identity(2)))
    return Measure(party="B", kraus=tuple(kraus), children=tuple(children))


def build_twoway_even(spec):
    """Two-way protocol distinguishing the even-dimension family exactly.

    An initializing controlled-Pauli rotation moves the phases into the
    convex-position configuration; Alice then measures superposition
    directions on her m-level system (plus, for m > 2, a collect-everything
    outcome that funnels into teleportation), Bob's weighted POVM eliminates
    one candidate, and a final qubit Bell-pair round decides between the two
    survivors.
    """
    spec.validate()
    if spec.kind != "even_d":
        raise SpecInvalid(f"expected an even_d spec, got {spec.kind!r}")
    if not spec.is_generic:
        raise SpecInvalid("two-way construction needs generic phases")
    d = spec.d
    m = d // 2
    j_rot, omega_p, gamma_p = _select_rotation(spec.omega, spec.gamma)
    phases = (1.0, omega_p, gamma_p)
    weights = _elimination_weights(omega_p, gamma_p)
    sigmas = (PAULIS[0], PAULIS[1], PAULIS[3])

    kraus = []
    children = []
    if m > 2:
        # collect levels 1..m-1; the shared state there is phase-free
        restrict = np.zeros((m - 1, m))
        for c in range(m - 1):
            restrict[c, c + 1] = 1.0
        kraus.append(np.sqrt((m - 2) / (m - 1)) * kron(restrict, identity(2)))
        children.append(_teleport_branch(m - 1, m, 1, (0, 1, 2)))
    for jj in range(1, m):
        for kk in range(2):
            a = np.zeros(m, dtype=complex)
            a[0] = 1.0
            a[jj] = (-1) ** kk
            a /= np.sqrt(2)
            # Alice realizes the transposed projector onto a (a is real)
            kraus.append(kron(_bra(np.conj(a)), identity(2)) / np.sqrt(m - 1))
            subchildren = []
            for i in range(3):
                pair = [l for l in range(3) if l != i]
                subchildren.append(
                    _bell_pair_subtree(sigmas[pair[0]], sigmas[pair[1]], tuple(pair))
                )
            subchildren.append(Decide(0))  # off-span remainder, probability 0
            children.append(_eliminating_measure(m, jj, kk, phases, weights, subchildren))

    alice = Measure(party="A", kraus=tuple(kraus), children=tuple(children))
    wj = block_diag(PAULIS[j_rot], identity(d - 2))
    root = Apply(party="A", op=np.conj(wj), child=Apply(party="B", op=wj, child=alice))
    return make_tree(root, label=f"twoway_even(d={d},rotation={j_rot})")


# ----------------------------------------------------- two-way, d = 2 + 3r


def refinement_isometry(omega, gamma):
    """The 15 x 5 isometry refining Bob's side of the five-level family.

    Columns of its adjoint are built from the three Pauli eigenbases on the
    qubit block paired with matched phases on the cyclic block, plus three
    bare basis directions.
    """
    s3 = np.sqrt(3.0)
    s32 = np.sqrt(1.5)
    s10 = np.sqrt(10.0)
    cg = np.conj(gamma)
    cw = np.conj(omega)
    iwg = 1j * omega * np.conj(gamma)
    cols = [
        [s3, 0, 1, 0, -cg],
        [-s3, 0, 1, 0, -cg],
        [0, s3, 1, 0, cg],
        [0, -s3, 1, 0, cg],
        [s32, s32, 1, -cw, 0],
        [-s32, -s32, 1, -cw, 0],
        [s32, -s32, 1, cw, 0],
        [-s32, s32, 1, cw, 0],
        [s32, -1j * s32, 0, 1, -iwg],
        [-s32, 1j * s32, 0, 1, -iwg],
        [s32, 1j * s32, 0, 1, iwg],
        [-s32, -1j * s32, 0, 1, iwg],
        [0, 0, s10, 0, 0],
        [0, 0, 0, s10, 0],
        [0, 0, 0, 0, s10],
    ]
    w_adj = np.array(cols, dtype=complex).T / np.sqrt(18.0)  # 5 x 15
    return dag(w_adj)  # 15 x 5


def first_round_elements(r=1):
    """Alice's diagonal first-round POVM elements for the d = 2+3r family."""
    d = 2 + 3 * r
    out = []
    for k in range(3 * r):
        a = np.zeros(d)
        a[0] = a[1] = 1.0 / (3 * r)
        a[2 + k] = 1.0
        out.append(np.diag(a).astype(complex))
    return out


def build_twoway_mod3(spec):
    """Two-way protocol distinguishing the d = 5 family exactly.

    Alice applies a diagonal weakening measurement, Bob embeds his system
    through the 15-outcome refinement isometry and measures the standard
    basis, and Alice finishes with a projective measurement onto her three
    orthogonal conditional states.
    """
    spec.validate()
    if spec.kind != "mod3":
        raise SpecInvalid(f"expected a mod3 spec, got {spec.kind!r}")
    if spec.r != 1:
        raise UnsupportedR(
            "the 15-outcome refinement is defined for r = 1 (d = 5) only"
        )
    if not spec.is_generic:
        raise SpecInvalid("two-way construction needs generic phases")
    d = 5
    from .states import build_mod3_family

    mes = build_mod3_family(spec)
    w15 = refinement_isometry(spec.omega, spec.gamma)
    q = cycle_permutation(3)

    elements = first_round_elements(r=1)
    alice_kraus = []
    branches = []
    qk = identity(3)
    for k in range(3):
        a_sqrt = np.sqrt(elements[k].real).astype(complex)  # diagonal, real
        alice_kraus.append(a_sqrt.T)
        gk = block_diag(identity(2), qk)
        wk = w15 @ dag(gk)
        outcome_children = []
        for x in range(15):
            vecs = [a_sqrt.T @ u.T @ wk.T[:, x] for u in mes.unitaries]
            norms = [np.linalg.norm(v) for v in vecs]
            kraus = []
            children = []
            proj = np.zeros((d, d), dtype=complex)
            for i, (v, nv) in enumerate(zip(vecs, norms)):
                if nv <= 1e-12:
                    continue
                unit = v / nv
                kraus.append(_bra(unit))
                children.append(Decide(i))
                proj += np.outer(unit, unit.conj())
            kraus.append(identity(d) - proj)
            children.append(Decide(0))
            outcome_children.append(
                Measure(party="A", kraus=tuple(kraus), children=tuple(children))
            )
        basis_kraus = tuple(_bra(np.eye(15)[x]) for x in range(15))
        bob = Measure(party="B", kraus=basis_kraus, children=tuple(outcome_children))
        branches.append(Apply(party="B", op=wk, child=bob))
        qk = q @ qk
    root = Measure(party="A", kraus=tuple(alice_kraus), children=tuple(branches))
    return make_tree(root, label="twoway_mod3(d=5)")


# ------------------------------------------------------------ lattice triples


def _pauli_index_of_product(a, b):
    """Index f with sigma_a sigma_b proportional to sigma_f."""
    table = {
        (0, 0): 0, (0, 1): 1, (0, 2): 2, (0, 3): 3,
        (1, 0): 1, (1, 1): 0, (1, 2): 3, (1, 3): 2,
        (2, 0): 2, (2, 1): 3, (2, 2): 0, (2, 3): 1,
        (3, 0): 3, (3, 1): 2, (3, 2): 1, (3, 3): 0,
    }
    return table[(a, b)]


def _pair_discrimination_basis(target, others):
    """Qubit basis whose rows separate sigma_target from the other labels.

    Returns eigenvectors of the Pauli that anticommutes with every relevant
    product, so all conditional states stay orthogonal.
    """
    products = {_pauli_index_of_product(target, o) for o in others if o != target}
    choices = [h for h in (1, 2, 3) if h not in products]
    h = min(choices)
    vals, vecs = np.linalg.eigh(PAULIS[h])
    return vecs[:, 0], vecs[:, 1]


def _swap_gate():
    s = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            s[b * 2 + a, a * 2 + b] = 1.0
    return s


def _lattice_teleport_tree(indices):
    """Teleport branch for triples whose first labels all agree."""
    x = indices[0][0]
    ys = [t[1] for t in indices]
    kraus = []
    children = []
    for u in _weyl_ops(2):
        k = np.zeros((1, 4), dtype=complex)
        for a1 in range(2):
            for a2 in range(2):
                k[0, a1 * 2 + a2] = np.conj(u[a2, a1]) / np.sqrt(2)
        kraus.append(k)
        correction = kron(u @ PAULIS[x], identity(2))
        bell_kraus = []
        bell_children = []
        for y in range(4):
            beta = sum(kron(np.eye(2)[:, t] + 0j, PAULIS[y][:, t]) for t in range(2)) / np.sqrt(2)
            bell_kraus.append(_bra(beta))
            bell_children.append(Decide(ys.index(y) if y in ys else 0))
        bob = Measure(party="B", kraus=tuple(bell_kraus), children=tuple(bell_children))
        children.append(Apply(party="B", op=correction, child=bob))
    return Measure(party="A", kraus=tuple(kraus), children=tuple(children))


def _lattice_parallel_tree(indices, order):
    """Two parallel pair discriminations resolved by the decision table."""
    xs = [indices[i][0] for i in order]
    ys = [indices[i][1] for i in order]
    phi1 = _pair_discrimination_basis(xs[1], (xs[0], xs[2]))
    phi2 = _pair_discrimination_basis(ys[2], (ys[0], ys[1]))
    kraus = []
    children = []
    for f1 in phi1:
        for f2 in phi2:
            kraus.append(kron(_bra(np.conj(f1)), _bra(np.conj(f2))))
            w1 = PAULIS[xs[1]] @ f1
            w1_perp = np.array([-np.conj(w1[1]), np.conj(w1[0])])
            w2 = PAULIS[ys[2]] @ f2
            w2_perp = np.array([-np.conj(w2[1]), np.conj(w2[0])])
            # outcome 0 = matched the singled-out direction on that factor
            decisions = {
                (1, 1): order[0],  # neither matched
                (0, 1): order[1],  # first factor matched its singleton
                (1, 0): order[2],  # second factor matched its singleton
                (0, 0): order[0],  # cannot occur; probability 0
            }
            bob_kraus = []
            bob_children = []
            for o1, v1 in ((0, w1), (1, w1_perp)):
                for o2, v2 in ((0, w2), (1, w2_perp)):
                    bob_kraus.append(kron(_bra(v1), _bra(v2)))
                    bob_children.append(Decide(decisions[(o1, o2)]))
            children.append(
                Measure(party="B", kraus=tuple(bob_kraus), children=tuple(bob_children))
            )
    return Measure(party="A", kraus=tuple(kraus), children=tuple(children))


def build_lattice_triple_protocol(indices):
    """One-way tree distinguishing any three distinct two-qubit lattice states.

    Triples sharing a label on one factor teleport the other factor to Bob;
    all remaining triples admit a relabeling that splits into two parallel
    qubit pair discriminations with a two-by-two decision table.
    """
    indices = tuple((int(a), int(b)) for a, b in indices)
    if len(set(indices)) != 3:
        raise DuplicateStates(f"need three distinct index pairs, got {indices}")
    xs = [t[0] for t in indices]
    ys = [t[1] for t in indices]
    if len(set(xs)) == 1:
        return make_tree(_lattice_teleport_tree(indices), label=f"lattice_teleport{indices}")
    if len(set(ys)) == 1:
        swapped = tuple((b, a) for a, b in indices)
        inner = _lattice_teleport_tree(swapped)
        sw = _swap_gate()
        root = Apply(party="A", op=sw, child=Apply(party="B", op=sw, child=inner))
        return make_tree(root, label=f"lattice_teleport_swapped{indices}")
    for order in itertools.permutations(range(3)):
        x_ok = xs[order[1]] not in (xs[order[0]], xs[order[2]])
        y_ok = ys[order[2]] not in (ys[order[0]], ys[order[1]])
        if x_ok and y_ok:
            return make_tree(
                _lattice_parallel_tree(indices, order), label=f"lattice_parallel{indices}"
            )
    raise RelabelingNotFound(f"no valid relabeling for {indices}")


def all_lattice_triples():
    """Every 3-subset of the sixteen two-qubit lattice states."""
    labels = [(x, y) for x in range(4) for y in range(4)]
    return list(itertools.combinations(labels, 3))
