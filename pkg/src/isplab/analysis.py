"""Auxiliary norms, the sets K_n and the cyclicity demonstration.

``‖x‖_N = p_N(x) + Σ_j (1/C_{j+1}) Σ_{n in E_j} 2^{-n} p_{j+1}(x_n e_n)``; the
second summand is the *weighted part* and makes ``‖·‖_N`` a norm on finitely
supported vectors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .errors import (
    CertificateFailure,
    FrameError,
    HorizonError,
    HorizonTooShort,
    PreconditionError,
    ZeroVectorError,
)
from .numeric import REL_TOL
from .operator import Polynomial, apply_poly, to_e, to_gamma, to_u
from .spaces import SpaceDescriptor
from .state import ConstructionState
from .vectors import E_FRAME, FinVector

ILL_CONDITIONED = 1e-12


def weighted_part(space: SpaceDescriptor, v: FinVector):
    F = space.field
    total = F.zero()
    for e, c in v.coords.items():
        lvl = space.level(e)
        term = space.seminorm(lvl + 1, FinVector.basis(e, c))
        total += term * F.pow2(-e) / space.basis_constant(lvl + 1)
    return total


def space_norm(space: SpaceDescriptor, N: int, v: FinVector):
    if v.frame != E_FRAME:
        raise ValueError("space_norm expects an e-frame vector")
    return space.seminorm(N, v) + weighted_part(space, v)


def norm_N(state: ConstructionState, N: int, v: FinVector):
    """‖v‖_N; u- and γ-frame inputs are converted first."""
    return space_norm(state.space, N, to_e(state, v))


def tau_restrict(state: ConstructionState, n: int, y: FinVector) -> FinVector:
    """τ_n: drop the γ-coordinates with index >= a_n."""
    g = to_gamma(state, y)
    if any(j >= state.Delta[n + 1] for j in g.coords):
        raise FrameError(f"τ_{n} is defined on span(γ_0, ..., γ_{state.Delta[n + 1] - 1})")
    a_n = state.a_(n)
    return g.restrict(lambda j: j < a_n)


# ---------------------------------------------------------------------------
# K_n
# ---------------------------------------------------------------------------


@dataclass
class KnMembership:
    n: int
    norm1: object
    tau_norm1: object
    in_set: bool
    in_span: bool = True


def kn_membership(state: ConstructionState, n: int, y: FinVector) -> KnMembership:
    if n > state.stages_done:
        raise HorizonError(f"K_{n} needs stage {n} committed")
    F = state.field
    try:
        g = to_gamma(state, y)
    except HorizonError:
        return KnMembership(n, None, None, False, in_span=False)
    if any(j >= state.Delta[n + 1] for j in g.coords):
        return KnMembership(n, norm_N(state, 1, g), None, False, in_span=False)
    norm1 = norm_N(state, 1, g)
    tau1 = norm_N(state, 1, g.restrict(lambda j: j < state.a_(n)))
    three_halves = F.coerce(3) / 2
    half = F.one() / 2
    in_set = F.geq(three_halves, norm1) and F.geq(tau1, half)
    return KnMembership(n, norm1, tau1, in_set)


def project_u(state: ConstructionState, x: FinVector, n: int) -> FinVector:
    """π^(u)_{[0, Δ_{n+1})} x: keep the e-coordinates placed below Δ_{n+1}."""
    inv = state.index_to_pos
    bound = state.Delta[n + 1]
    return x.restrict(lambda e: e in inv and inv[e] < bound)


@dataclass
class KnLocateResult:
    M: object
    m0: int
    entries: list = field(default_factory=list)


def kn_locate(state: ConstructionState, x: FinVector, N: int, k_range=None) -> KnLocateResult:
    """For each stage ``n_k`` scale the projection of ``x`` by M_k and test K_{n_k} membership."""
    if not x:
        raise ZeroVectorError("kn_locate needs a nonzero vector")
    if x.frame != E_FRAME:
        x = to_e(state, x)
    sp = state.space
    M, m0 = None, None
    for m in range(1, state.stages_done + 1):
        proj = project_u(state, x, m)
        cand = space_norm(sp, 1, proj) - sp.seminorm(1, proj)
        if cand > 0:
            M, m0 = cand, m
            break
    if M is None:
        raise HorizonTooShort("no committed stage captures a nonzero part of x; build more stages")
    if k_range is None:
        k_range = [n for n in range(1, state.stages_done + 1) if state.N_(n) == N]
    entries = []
    for nk in k_range:
        proj = project_u(state, x, nk)
        Mk = space_norm(sp, 1, proj)
        if Mk == 0:
            entries.append({"n_k": nk, "M_k": Mk, "in_set": False})
            continue
        mem = kn_membership(state, nk, proj / Mk)
        entries.append({"n_k": nk, "M_k": Mk, "in_set": mem.in_set, "membership": mem})
    return KnLocateResult(M, m0, entries)


# ---------------------------------------------------------------------------
# D_n
# ---------------------------------------------------------------------------


def certify_D(state: ConstructionState, n: int):
    """Upper bound for Σ|y_j| over y = Σ y_j γ_j in K_n.

    ``‖y‖_1 <= 3/2`` bounds each e-coordinate by (3/2) 2^i C_{l+1} / p_{l+1}(e_i)
    with ``l`` the level of ``i``; dividing by |α_j| bounds the u-coordinate.
    Every u_j is γ_j or γ_j - γ_{j - a_k}, so a u-coordinate feeds at most two
    γ-coordinates.  The sum is rounded up to a power of two.
    """
    if n > state.stages_done:
        raise HorizonError(f"D_{n} needs stage {n} committed")
    F = state.field
    sp = state.space
    three_halves = F.coerce(3) / 2
    total = F.zero()
    for j in range(state.Delta[n + 1]):
        e = state.pos_to_index[j]
        alpha = state.alpha[j]
        if alpha == 0:
            raise CertificateFailure(f"D_{n}: α_{j} is zero", ["D"])
        lvl = sp.level(e)
        b = three_halves * F.pow2(e) * sp.basis_constant(lvl + 1) / (state.e_seminorm(lvl + 1, e) * abs(alpha))
        if state.block_of(j) is not None:
            b = 2 * b
        total += b
    D = F.pow2_ceil(total) if total > 0 else F.one()
    return max(D, state.D_(n - 1), F.one())


# ---------------------------------------------------------------------------
# polynomial finder
# ---------------------------------------------------------------------------


@dataclass
class PolyResult:
    P: Polynomial
    remainder: dict  # m -> c_m for m in [Δ_{n+1}, 2Δ_{n+1})
    abs_P: object
    abs_c: object
    error: object  # ‖P(T)y - u_0‖_{N_n}
    bound: object  # 2‖u_{a_n}‖ + max(|P|, Σ|c_m|) max_j ‖u_j‖
    bound_D: object  # same with D_n inside the max
    budget_flag: bool
    verified: bool


def find_cyclic_poly(state: ConstructionState, n: int, y: FinVector, check_membership: bool = True) -> PolyResult:
    """Solve for P with P(T) y = γ_{a_n} + (terms at γ_m, m >= Δ_{n+1})."""
    if n + 1 > state.stages_done:
        raise HorizonError(f"find_cyclic_poly at n={n} needs stage {n + 1} committed")
    F = state.field
    g = to_gamma(state, y)
    if check_membership:
        mem = kn_membership(state, n, g)
        if not mem.in_set:
            raise PreconditionError(f"y is not in K_{n} (norm1={mem.norm1}, tau_norm1={mem.tau_norm1})")
    if not g:
        raise PreconditionError("y = 0")
    a_n, D1 = state.a_(n), state.Delta[n + 1]
    v = min(g.coords)
    if v >= a_n:
        raise PreconditionError(f"val(y) = {v} >= a_{n} = {a_n}")
    yv = g.coords[v]
    if not F.exact:
        ymax = max(abs(c) for c in g.coords.values())
        if abs(yv) < ILL_CONDITIONED * ymax:
            warnings.warn(
                f"pivot y_{v} is tiny relative to max|y_j|; retry in rational mode for an exact solve",
                RuntimeWarning,
                stacklevel=2,
            )
    ycoef = g.coords
    rho = [F.zero()] * (D1 - v)
    r0 = a_n - v
    rho[r0] = F.one() / yv
    for m in range(a_n + 1, D1):
        r = m - v
        acc = F.zero()
        for rp in range(r0, r):
            yc = ycoef.get(m - rp)
            if yc is not None:
                acc += rho[rp] * yc
        rho[r] = -acc / yv
    P = Polynomial(tuple(rho))
    img = apply_poly(state, P, g)
    remainder = {}
    slack = F.zero() if F.exact else REL_TOL * max(abs(c) for c in img.coords.values())
    for m, c in img.coords.items():
        target = F.one() if m == a_n else F.zero()
        if m < D1:
            if abs(c - target) > slack:
                raise CertificateFailure(f"solver residual at γ_{m}: {c}", ["poly"])
        else:
            remainder[m] = c
    if any(m >= 2 * D1 for m in remainder):
        raise CertificateFailure("remainder escapes [Δ_{n+1}, 2Δ_{n+1})", ["poly"])
    Nn = state.N_(n)
    sp = state.space
    u0 = state.u_vector(0)
    diff = to_e(state, img) - u0
    error = space_norm(sp, Nn, diff)
    ua = space_norm(sp, Nn, state.u_vector(a_n))
    umax = max(space_norm(sp, Nn, state.u_vector(j)) for j in range(D1, 2 * D1))
    abs_P = P.abs_sum()
    abs_c = sum((abs(c) for c in remainder.values()), F.zero())
    Dn = state.D_(n)
    bound = 2 * ua + max(abs_P, abs_c) * umax
    bound_D = 2 * ua + max(abs_P, abs_c, Dn) * umax
    return PolyResult(
        P=P,
        remainder=dict(sorted(remainder.items())),
        abs_P=abs_P,
        abs_c=abs_c,
        error=error,
        bound=bound,
        bound_D=bound_D,
        budget_flag=bool(abs_P <= Dn and abs_c <= Dn),
        verified=F.geq(bound, error),
    )


# ---------------------------------------------------------------------------
# tails
# ---------------------------------------------------------------------------


def tail_margin(state: ConstructionState, n: int, P: Polynomial, x_tail: FinVector):
    """4 max(1, |P|/D_n) p_{N_n+2}(x) - p_{N_n}(P(T) x) for x supported at positions >= Δ_{n+1}."""
    if P.val is not None and P.val < 1:
        raise PreconditionError("tail_margin needs val(P) >= 1")
    if P.deg is not None and P.deg >= state.Delta[n + 1]:
        raise PreconditionError("tail_margin needs deg(P) < Δ_{n+1}")
    F = state.field
    if not x_tail:
        return F.zero()
    xu = to_u(state, x_tail)
    if min(xu.coords) < state.Delta[n + 1]:
        raise PreconditionError(f"x_tail must live at positions >= Δ_{n + 1} = {state.Delta[n + 1]}")
    Nn = state.N_(n)
    sp = state.space
    scale = max(F.one(), F.coerce(P.abs_sum()) / state.D_(n))
    img = apply_poly(state, P, xu, E_FRAME)
    return 4 * scale * sp.seminorm(Nn + 2, to_e(state, xu)) - sp.seminorm(Nn, img)


# ---------------------------------------------------------------------------
# cyclicity
# ---------------------------------------------------------------------------


@dataclass
class CyclicityWitness:
    x: FinVector
    N: int
    eps: object
    n_k: int | None
    M_k: object
    M: object
    Q: Polynomial
    achieved_error: object
    bound: object
    budget_flag: bool
    shortcut: bool = False

    def to_json(self, F) -> dict:
        s = F.to_str
        return {
            "x": [[k, s(v)] for k, v in self.x.items()],
            "N": self.N,
            "eps": s(self.eps),
            "n_k": self.n_k,
            "M_k": None if self.M_k is None else s(self.M_k),
            "M": None if self.M is None else s(self.M),
            "Q": [s(c) for c in self.Q.coeffs],
            "achieved_error": s(self.achieved_error),
            "bound": None if self.bound is None else s(self.bound),
            "budget_flag": self.budget_flag,
            "shortcut": self.shortcut,
        }


def witness_error(state: ConstructionState, x: FinVector, Q: Polynomial, N: int):
    """p_N(Q(T) x - u_0), recomputed from scratch."""
    img = apply_poly(state, Q, to_e(state, x), E_FRAME)
    return state.space.seminorm(N, img - state.u_vector(0))


def cyclic_approx(state: ConstructionState, x: FinVector, N: int, eps) -> CyclicityWitness:
    if not x:
        raise ZeroVectorError("the zero vector is not cyclic")
    F = state.field
    eps = F.coerce(eps)
    x = to_e(state, x)
    inv = state.index_to_pos
    outside = [e for e in x.coords if e not in inv]
    if outside:
        raise HorizonTooShort(f"basis indices {outside[:5]} are not placed yet; build more stages")
    u = to_u(state, x)
    if set(u.coords) == {0}:
        Q = Polynomial((F.one() / u.coords[0],))
        err = witness_error(state, x, Q, N)
        return CyclicityWitness(x, N, eps, None, None, None, Q, err, F.zero(), True, shortcut=True)
    loc = kn_locate(state, x, N, [n for n in range(1, state.stages_done) if state.N_(n) == N])
    tried = []
    for entry in sorted(loc.entries, key=lambda d: -d["n_k"]):
        nk = entry["n_k"]
        if not entry["in_set"]:
            tried.append((nk, "projection not in K"))
            continue
        Mk = entry["M_k"]
        proj = project_u(state, x, nk)
        y = proj / Mk
        try:
            res = find_cyclic_poly(state, nk, y, check_membership=False)
            Q = res.P / Mk
            err = witness_error(state, x, Q, N)
        except HorizonError as exc:
            tried.append((nk, str(exc)))
            continue
        tail = x - proj
        bound = F.coerce(3) * F.pow2(-nk) + 4 * state.space.seminorm(N + 2, tail) / loc.M
        if err < eps:
            return CyclicityWitness(x, N, eps, nk, Mk, loc.M, Q, err, bound, res.budget_flag)
        tried.append((nk, f"achieved {F.to_str(err)}"))
    eps_f = float(eps)
    need = 1
    while state.N_(need) != N or 3 * 2.0 ** (-need) >= eps_f:
        need += 1
    raise HorizonTooShort(
        f"no committed stage yields error < eps (tried {tried}); "
        f"the bound 3/2^n < eps first holds at a stage n = {need} with N_n = {N}, which needs {need + 1} stages"
    )
