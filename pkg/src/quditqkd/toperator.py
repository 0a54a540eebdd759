"""The basis-cycling unitary T and its conjugation action on Pauli labels.

For every prime power N there is a unitary T, unique up to global phase,
whose conjugation maps X_a Z_b to a phase times X_a' Z_b' with (a', b')
given by a symmetric unit-determinant matrix M over GF(N) whose
characteristic polynomial has a root of multiplicative order N+1.  T
itself has order N+1 up to phase, and its powers applied to the standard
basis generate mutually unbiased bases.

Construction is verified before anything is returned: unitarity, the
conjugation relation for every label, and the order are all checked at
1e-10, and a T failing any of them is never handed out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exceptions import InvariantViolation
from .fields import GF, make_quadratic_extension
from .pauli import PauliLabel, add_phases, normalize_phase, pauli_matrix, phase_value


@dataclass(frozen=True)
class SymplecticParams:
    """Entries of M = [[alpha, beta], [beta, gamma]] plus c = -(alpha+gamma)."""

    alpha: int
    beta: int
    gamma: int
    c: int


@dataclass
class VerificationReport:
    unitarity_residual: float
    conjugation_residual: float
    order_up_to_phase: int
    order_ok: bool
    mub_powers_checked: int
    mub_max_deviation: float
    mub_ok: bool
    lambda_flatness: float
    route: str
    all_ok: bool
    notes: list[str] = field(default_factory=list)


@dataclass
class TOperator:
    gf: GF
    params: SymplecticParams
    matrix: np.ndarray
    coeffs: np.ndarray  # Lambda_ab, indexed [a, b]
    f_table: dict[tuple[int, int], tuple[int, int]]
    route: str


@lru_cache(maxsize=None)
def _quadratic_extension(gf: GF):
    return make_quadratic_extension(gf)


def find_char_poly(gf: GF) -> int:
    """Smallest c for which y^2 + c*y + 1 is irreducible with a root of
    multiplicative order exactly N+1 in GF(N^2)."""
    ext, embed = _quadratic_extension(gf)
    for c in gf.elements():
        # irreducible over GF(N) <=> no root in GF(N)
        if any(gf.add(gf.add(gf.mul(y, y), gf.mul(c, y)), 1) == 0 for y in gf.elements()):
            continue
        xi = _root_in_extension(gf, ext, embed, c)
        if ext.mult_order(xi) == gf.N + 1:
            return c
    raise InvariantViolation(f"no order-{gf.N + 1} characteristic polynomial over GF({gf.N})")


def _root_in_extension(gf: GF, ext: GF, embed, c: int) -> int:
    ce = embed[c]
    one = embed[1]
    for z in ext.elements():
        if ext.add(ext.add(ext.mul(z, z), ext.mul(ce, z)), one) == 0:
            return z
    raise InvariantViolation("irreducible quadratic without root in the quadratic extension")


def choose_M(gf: GF, c: int) -> SymplecticParams:
    """Pick (alpha, beta, gamma) with alpha*gamma - beta^2 = 1 and
    alpha + gamma = -c, following the two solvable cases."""
    p = gf.p
    if p == 2 or p % 4 == 1:
        beta = gf.sqrt(gf.neg(1))
        if beta is None:
            raise InvariantViolation("sqrt(-1) missing in a p = 2 or p = 1 mod 4 field")
        alpha, gamma = 0, gf.neg(c)
    else:
        alpha = 1
        gamma = gf.neg(gf.add(c, 1))
        ext, embed = _quadratic_extension(gf)
        back = {v: k for k, v in enumerate(embed)}
        xi = _root_in_extension(gf, ext, embed, c)
        eta = ext.sqrt(xi)
        if eta is None:
            raise InvariantViolation("root of the characteristic polynomial has no square root")
        cands = []
        for e in (eta, ext.neg(eta)):
            bx = ext.sub(e, ext.inv(e))
            if bx in back:
                cands.append(back[bx])
        if not cands:
            raise InvariantViolation("beta = xi^(1/2) - xi^(-1/2) did not land in the base field")
        beta = min(cands)
    params = SymplecticParams(alpha, beta, gamma, c)
    lhs = gf.sub(gf.mul(alpha, gamma), gf.mul(beta, beta))
    if lhs != 1:
        raise InvariantViolation("alpha*gamma - beta^2 != 1 (construction bug)")
    return params


def m_power(gf: GF, params: SymplecticParams, k: int):
    """M^k as a 2x2 tuple over GF(N); k is reduced mod N+1."""
    k %= gf.N + 1
    m = ((1, 0), (0, 1))
    step = ((params.alpha, params.beta), (params.beta, params.gamma))
    for _ in range(k):
        m = _mat2_mul(gf, m, step)
    return m


def _mat2_mul(gf: GF, x, y):
    return tuple(
        tuple(gf.add(gf.mul(x[i][0], y[0][j]), gf.mul(x[i][1], y[1][j])) for j in range(2))
        for i in range(2)
    )


def conjugate_label(gf: GF, params: SymplecticParams, label: tuple[int, int], k: int) -> tuple[int, int]:
    """M^k applied to (a, b); the phase-free orbit map."""
    m = m_power(gf, params, k)
    a, b = label
    return (
        gf.add(gf.mul(m[0][0], a), gf.mul(m[0][1], b)),
        gf.add(gf.mul(m[1][0], a), gf.mul(m[1][1], b)),
    )


def equiv_classes(gf: GF, params: SymplecticParams) -> list[tuple[tuple[int, int], ...]]:
    """Orbits of GF(N)^2 under iteration of M, canonically sorted."""
    seen = set()
    classes = []
    for a in gf.elements():
        for b in gf.elements():
            if (a, b) in seen:
                continue
            orbit = set()
            cur = (a, b)
            while cur not in orbit:
                orbit.add(cur)
                cur = conjugate_label(gf, params, cur, 1)
            seen |= orbit
            classes.append(tuple(sorted(orbit)))
    classes.sort(key=lambda cls: cls[0])
    return classes


def conjugation_tables(gf: GF, params: SymplecticParams) -> tuple[np.ndarray, np.ndarray]:
    """(N+1, N, N) lookup tables: label (a, b) conjugated by T^k maps to
    (conj_a[k, a, b], conj_b[k, a, b]).  Used by the protocol kernels."""
    N = gf.N
    addt, mult = gf.add_table, gf.mul_table
    ca = np.empty((N + 1, N, N), dtype=np.uint8)
    cb = np.empty((N + 1, N, N), dtype=np.uint8)
    ar = np.arange(N)
    for k in range(N + 1):
        m = m_power(gf, params, k)
        a_part0 = mult[ar, m[0][0]][:, None]
        b_part0 = mult[ar, m[0][1]][None, :]
        ca[k] = addt[a_part0, b_part0]
        a_part1 = mult[ar, m[1][0]][:, None]
        b_part1 = mult[ar, m[1][1]][None, :]
        cb[k] = addt[a_part1, b_part1]
    return ca, cb


# ----------------------------------------------------------------------
# The phase function f and the explicit coefficients of T
# ----------------------------------------------------------------------

def _int_trace(gf: GF, a: int) -> int:
    return gf.trace(a)


def phase_exponent_f(gf: GF, params: SymplecticParams, a: int, b: int) -> tuple[int, int]:
    """Exponent of omega_p in the conjugation relation
    X_a Z_b T = omega_p^f(a,b) T X_a' Z_b', as (num, den) with den in {1, 2}.

    For odd p the half is absorbed by 2^-1 in GF(p) and the exponent is
    integral.  For p = 2 the half-integral diagonal terms are evaluated
    per basis coefficient with omega_2^(1/2) = +i.
    """
    al, be, ga = params.alpha, params.beta, params.gamma
    p = gf.p
    aa, bb = gf.mul(a, a), gf.mul(b, b)
    half_arg = gf.mul(be, gf.add(gf.mul(aa, al), gf.mul(bb, ga)))
    cross = gf.mul(gf.mul(a, b), gf.mul(be, be))
    if p != 2:
        inv2 = pow(2, p - 2, p)
        f = (inv2 * _int_trace(gf, half_arg) + _int_trace(gf, cross)) % p
        return normalize_phase(p, f, 1)
    # p = 2: per-coefficient half-integral terms plus the i > j correction
    ac, bc = gf.to_coeffs(a), gf.to_coeffs(b)
    ab_, bg = gf.mul(al, be), gf.mul(be, ga)
    s = 0
    for j in range(gf.n):
        gj2 = gf.mul(gf.basis[j], gf.basis[j])
        if ac[j]:
            s += _int_trace(gf, gf.mul(ab_, gj2))
        if bc[j]:
            s += _int_trace(gf, gf.mul(bg, gj2))
    corr = 0
    for i in range(gf.n):
        for j in range(i):
            gij = gf.mul(gf.basis[i], gf.basis[j])
            term = gf.add(
                gf.scalar_mul(ac[i] * ac[j], gf.mul(gij, al)),
                gf.scalar_mul(bc[i] * bc[j], gf.mul(gij, ga)),
            )
            corr = gf.add(corr, term)
    t = _int_trace(gf, gf.add(cross, gf.mul(be, corr)))
    return normalize_phase(2, s + 2 * t, 2)


def _phi_tables(gf: GF, params: SymplecticParams):
    """phi_1 and phi_2 of the explicit coefficient formula, per label."""
    al, be, ga = params.alpha, params.beta, params.gamma
    two = gf.scalar_mul(2, 1)
    t2 = gf.sub(two, gf.add(al, ga))  # 2 - alpha - gamma, nonzero
    dinv = gf.inv(gf.mul(t2, t2))
    one = 1
    g1 = gf.sub(ga, one)
    a1 = gf.sub(al, one)
    be2 = gf.mul(be, be)
    # coefficients of a^2, ab, b^2 inside phi_1
    c_a2 = gf.mul(gf.mul(be, be2), g1)
    c_ab = gf.neg(gf.mul(g1, gf.add(gf.mul(a1, a1), gf.mul(be2, gf.sub(gf.add(al, al), one)))))
    c_b2 = gf.mul(be, gf.add(gf.mul(gf.mul(al, ga), a1), g1))
    # coefficients inside phi_2
    d_sym = gf.sub(gf.add(al, ga), gf.scalar_mul(2, gf.mul(al, ga)))  # alpha+gamma-2*alpha*gamma
    phi1 = {}
    phi2 = {}
    for a in gf.elements():
        for b in gf.elements():
            aa, bb, ab = gf.mul(a, a), gf.mul(b, b), gf.mul(a, b)
            v1 = gf.mul(dinv, gf.add(gf.add(gf.mul(c_a2, aa), gf.mul(c_ab, ab)), gf.mul(c_b2, bb)))
            if gf.p == 2:
                ta = gf.div(gf.sub(gf.mul(g1, a), gf.mul(be, b)), t2)
                tb = gf.div(gf.sub(gf.mul(a1, b), gf.mul(be, a)), t2)
                tac, tbc = gf.to_coeffs(ta), gf.to_coeffs(tb)
                corr = 0
                for i in range(gf.n):
                    for j in range(i):
                        gij = gf.mul(gf.basis[i], gf.basis[j])
                        term = gf.add(
                            gf.scalar_mul(tac[i] * tac[j], gf.mul(gij, al)),
                            gf.scalar_mul(tbc[i] * tbc[j], gf.mul(gij, ga)),
                        )
                        corr = gf.add(corr, term)
                v1 = gf.add(v1, gf.mul(be, corr))
            sym = gf.add(gf.add(aa, gf.scalar_mul(2, gf.mul(be, ab))), bb)
            mix = gf.scalar_mul(2, gf.mul(be2, gf.add(gf.mul(ga, aa), gf.mul(al, bb))))
            v2 = gf.mul(gf.mul(be, dinv), gf.add(gf.mul(d_sym, sym), mix))
            phi1[(a, b)] = v1
            phi2[(a, b)] = v2
    return phi1, phi2


def _coeffs_direct(gf: GF, params: SymplecticParams, branch_per_coeff: bool) -> np.ndarray:
    """Lambda_ab from the explicit formula; theta = 0 (Lambda_00 real positive)."""
    N, p = gf.N, gf.p
    phi1, phi2 = _phi_tables(gf, params)
    lam = np.empty((N, N), dtype=np.complex128)
    if p != 2:
        inv2 = pow(2, p - 2, p)
        omega = np.exp(2j * np.pi / p)
        for (a, b), v1 in phi1.items():
            e = (_int_trace(gf, v1) - inv2 * _int_trace(gf, phi2[(a, b)])) % p
            lam[a, b] = omega**e / N
        return lam
    # p = 2: phi_2 = (beta/c) * (a+b)^2; the half of its trace is taken
    # per basis coefficient of w = a+b (branch omega_2^(1/2) = +i), or
    # globally on Tr(phi_2) when branch_per_coeff is False.
    u = gf.div(params.beta, gf.add(params.alpha, params.gamma))
    ug2 = [_int_trace(gf, gf.mul(u, gf.mul(g, g))) for g in gf.basis]
    for (a, b), v1 in phi1.items():
        t1 = _int_trace(gf, v1)
        if branch_per_coeff:
            w = gf.add(a, b)
            s2 = sum(t for t, wj in zip(ug2, gf.to_coeffs(w)) if wj)
        else:
            s2 = _int_trace(gf, phi2[(a, b)])
        lam[a, b] = 1j ** ((2 * t1 - s2) % 4) / N
    return lam


def _coeffs_closure(gf: GF, params: SymplecticParams, f_table) -> np.ndarray:
    """Lambda_ab propagated from Lambda_00 = 1/N through the defining
    relation, hopping each (i, j) to (0, 0) via (M - I)^(-1)."""
    N, p = gf.N, gf.p
    al, be, ga = params.alpha, params.beta, params.gamma
    det = gf.sub(gf.scalar_mul(2, 1), gf.add(al, ga))  # det(M - I) = 2-alpha-gamma
    dinv = gf.inv(det)
    i00, i01 = gf.mul(dinv, gf.sub(ga, 1)), gf.neg(gf.mul(dinv, be))
    i11 = gf.mul(dinv, gf.sub(al, 1))
    g1 = gf.sub(ga, 1)
    lam = np.empty((N, N), dtype=np.complex128)
    lam[0, 0] = 1.0 / N
    for i in gf.elements():
        for j in gf.elements():
            if i == 0 and j == 0:
                continue
            a = gf.add(gf.mul(i00, i), gf.mul(i01, j))
            b = gf.add(gf.mul(i01, i), gf.mul(i11, j))
            ap = gf.add(gf.mul(a, al), gf.mul(b, be))
            inner = gf.sub(gf.sub(j, gf.mul(a, be)), gf.mul(b, g1))
            extra = (_int_trace(gf, gf.mul(ap, inner)) - _int_trace(gf, gf.mul(b, i))) % p
            num, den = add_phases(p, f_table[(a, b)], (extra, 1))
            lam[i, j] = phase_value(p, num, den) / N
    return lam


def _assemble(gf: GF, lam: np.ndarray) -> np.ndarray:
    N = gf.N
    omega = np.exp(2j * np.pi / gf.p)
    zchar = np.empty((N, N), dtype=np.complex128)
    for b in gf.elements():
        for j in gf.elements():
            zchar[b, j] = omega ** gf.trace(gf.mul(b, j))
    T = np.zeros((N, N), dtype=np.complex128)
    addt = gf.add_table
    cols = np.arange(N)
    for a in gf.elements():
        rows = addt[a, cols]
        for b in gf.elements():
            T[rows, cols] += lam[a, b] * zchar[b]
    return T


def left_pauli_apply(gf: GF, a: int, b: int, T: np.ndarray) -> np.ndarray:
    """(X_a Z_b) @ T without materializing the Pauli matrix."""
    omega = np.exp(2j * np.pi / gf.p)
    src = np.array([gf.sub(u, a) for u in gf.elements()])
    ph = np.array([omega ** gf.trace(gf.mul(b, w)) for w in src])
    return ph[:, None] * T[src, :]


def right_pauli_apply(gf: GF, T: np.ndarray, a: int, b: int) -> np.ndarray:
    """T @ (X_a Z_b); column v of the product is omega^Tr(b v) T[:, a+v]."""
    omega = np.exp(2j * np.pi / gf.p)
    cols = np.array([gf.add(a, v) for v in gf.elements()])
    ph = np.array([omega ** gf.trace(gf.mul(b, v)) for v in gf.elements()])
    return T[:, cols] * ph[None, :]


def _conjugation_residual(gf: GF, params: SymplecticParams, T: np.ndarray, f_table) -> float:
    worst = 0.0
    for a in gf.elements():
        for b in gf.elements():
            ap, bp = conjugate_label(gf, params, (a, b), 1)
            ph = phase_value(gf.p, *f_table[(a, b)])
            resid = np.abs(left_pauli_apply(gf, a, b, T) - ph * right_pauli_apply(gf, T, ap, bp)).max()
            worst = max(worst, float(resid))
    return worst


def _scalar_order(T: np.ndarray, tol: float) -> int:
    """Smallest k >= 1 with T^k a scalar multiple of the identity; 0 if none
    found within 2(N+1) powers."""
    N = T.shape[0]
    P = np.eye(N, dtype=np.complex128)
    for k in range(1, 2 * (N + 1) + 1):
        P = P @ T
        scal = np.trace(P) / N
        if np.abs(P - scal * np.eye(N)).max() < tol and abs(scal) > 0.5:
            return k
    return 0


def build_T(gf: GF, params: SymplecticParams, tol: float = 1e-10) -> TOperator:
    """Construct T, trying the explicit-coefficient formula first and the
    relation-propagation construction second; every candidate must pass
    unitarity, the conjugation relation, and the order check before it
    is accepted."""
    if gf.N > 16:
        raise ValueError("T construction is supported for N <= 16")
    f_table = {
        (a, b): phase_exponent_f(gf, params, a, b) for a in gf.elements() for b in gf.elements()
    }
    routes = []
    if gf.p == 2:
        routes.append(("explicit", lambda: _coeffs_direct(gf, params, branch_per_coeff=True)))
        routes.append(("explicit-global-branch", lambda: _coeffs_direct(gf, params, branch_per_coeff=False)))
    else:
        routes.append(("explicit", lambda: _coeffs_direct(gf, params, branch_per_coeff=False)))
    routes.append(("closure", lambda: _coeffs_closure(gf, params, f_table)))

    failures = []
    for route, maker in routes:
        lam = maker()
        T = _assemble(gf, lam)
        uni = float(np.abs(T.conj().T @ T - np.eye(gf.N)).max())
        if uni > tol:
            failures.append(f"{route}: unitarity residual {uni:.2e}")
            continue
        conj = _conjugation_residual(gf, params, T, f_table)
        if conj > tol:
            failures.append(f"{route}: conjugation residual {conj:.2e}")
            continue
        order = _scalar_order(T, tol)
        if order != gf.N + 1:
            failures.append(f"{route}: order up to phase is {order}, want {gf.N + 1}")
            continue
        return TOperator(gf, params, T, lam, f_table, route)
    raise InvariantViolation("T construction failed every route: " + "; ".join(failures))


def make_t_operator(gf: GF) -> TOperator:
    """End-to-end helper: characteristic polynomial, M, then T."""
    return build_T(gf, choose_M(gf, find_char_poly(gf)))


def verify_T(top: TOperator, tol: float = 1e-10) -> VerificationReport:
    """Re-run every invariant on a built T and report residuals.

    The mutually-unbiased-bases check covers powers 1..N for p = 2 and
    1..(N-1)/2 for p > 2 (a T^m with all squared entries 1/N makes the
    bases of T^i and T^(i+m) unbiased).  For p > 2 the power (N+1)/2
    maps the standard basis to itself, so it closes the cycle rather
    than adding a basis.
    """
    gf, T = top.gf, top.matrix
    N = gf.N
    uni = float(np.abs(T.conj().T @ T - np.eye(N)).max())
    conj = _conjugation_residual(gf, top.params, T, top.f_table)
    order = _scalar_order(T, tol)
    notes = []

    max_power = N if gf.p == 2 else (N - 1) // 2
    mub_dev = 0.0
    P = np.eye(N, dtype=np.complex128)
    for _ in range(max_power):
        P = P @ T
        mub_dev = max(mub_dev, float(np.abs(np.abs(P) ** 2 - 1.0 / N).max()))
    if gf.p != 2:
        Q = np.linalg.matrix_power(T, (N + 1) // 2)
        perm_resid = float(np.abs(np.sort(np.abs(Q), axis=0)[:-1, :]).max())
        notes.append(f"T^((N+1)/2) permutes the standard basis (residual {perm_resid:.2e})")
        if perm_resid > tol:
            notes.append("WARNING: expected standard-basis permutation at power (N+1)/2")

    flat = float(np.abs(np.abs(top.coeffs) - 1.0 / N).max())
    rep = VerificationReport(
        unitarity_residual=uni,
        conjugation_residual=conj,
        order_up_to_phase=order,
        order_ok=order == N + 1,
        mub_powers_checked=max_power,
        mub_max_deviation=mub_dev,
        mub_ok=mub_dev < tol,
        lambda_flatness=flat,
        route=top.route,
        all_ok=False,
        notes=notes,
    )
    rep.all_ok = uni < tol and conj < tol and rep.order_ok and rep.mub_ok and flat < tol
    return rep
