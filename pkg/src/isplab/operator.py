"""The perturbed forward shift T, its orbit γ_j = T^j u_0 and continuity data.

On the u-basis

    T u_j = u_{a_n} + u_0                 if j = a_n - 1
    T u_j = u_{a_n+Δ_n} - u_{Δ_n}         if j = a_n + Δ_n - 1
    T u_j = u_{j+1}                       otherwise

and on the orbit basis T γ_j = γ_{j+1}.  The two bases are related by
``γ_j = u_j + γ_{j - a_n}`` for ``j`` in ``[a_n, a_n + Δ_n)`` and ``γ_j = u_j``
elsewhere.  Nothing here extends the construction: touching a position at or
beyond the horizon raises :class:`HorizonError`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FrameError, HorizonError
from .state import ConstructionState
from .vectors import E_FRAME, GAMMA_FRAME, U_FRAME, FinVector


@dataclass(frozen=True)
class Polynomial:
    """ρ_0 + ρ_1 t + ... + ρ_d t^d."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = list(self.coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @classmethod
    def monomial(cls, r: int, c=1) -> "Polynomial":
        return cls((0,) * r + (c,))

    @property
    def val(self) -> int | None:
        return next((r for r, c in enumerate(self.coeffs) if c != 0), None)

    @property
    def deg(self) -> int | None:
        return len(self.coeffs) - 1 if self.coeffs else None

    def abs_sum(self):
        """|P| = Σ |ρ_r|."""
        return sum((abs(c) for c in self.coeffs), 0)

    def __truediv__(self, c) -> "Polynomial":
        return Polynomial(tuple(x / c for x in self.coeffs))

    def __mul__(self, c) -> "Polynomial":
        return Polynomial(tuple(x * c for x in self.coeffs))

    __rmul__ = __mul__

    def items(self):
        return [(r, c) for r, c in enumerate(self.coeffs) if c != 0]


# ---------------------------------------------------------------------------
# frame conversions
# ---------------------------------------------------------------------------


def gamma_u(state: ConstructionState, j: int) -> FinVector:
    """γ_j in the u-frame (all coefficients are 1)."""
    state.check_position(j)
    keys = [j]
    k = state.block_of(j)
    while k is not None:
        j = j - state.a_(k)
        keys.append(j)
        k = state.block_of(j)
    return FinVector({m: 1 for m in keys}, U_FRAME)


def gamma(state: ConstructionState, j: int) -> FinVector:
    """γ_j = T^j u_0 in the e-frame, memoised on the state."""
    memo = state._cache.setdefault("gamma", {})
    g = memo.get(j)
    if g is None:
        state.check_position(j)
        k = state.block_of(j)
        g = state.u_vector(j)
        if k is not None:
            g = g + gamma(state, j - state.a_(k))
        memo[j] = g
    return g


def to_u(state: ConstructionState, v: FinVector) -> FinVector:
    if v.frame == U_FRAME:
        return v
    if v.frame == E_FRAME:
        return state.e_to_u(v)
    if v.frame != GAMMA_FRAME:
        raise FrameError(v.frame)
    out: dict = {}
    for j, c in v.coords.items():
        for m in gamma_u(state, j).coords:
            out[m] = out.get(m, 0) + c
    return FinVector(out, U_FRAME)


def to_gamma(state: ConstructionState, v: FinVector) -> FinVector:
    if v.frame == GAMMA_FRAME:
        return v
    v = to_u(state, v)
    out: dict = {}
    for j, c in v.coords.items():
        state.check_position(j)
        out[j] = out.get(j, 0) + c
        k = state.block_of(j)
        if k is not None:
            m = j - state.a_(k)
            out[m] = out.get(m, 0) - c
    return FinVector(out, GAMMA_FRAME)


def to_e(state: ConstructionState, v: FinVector) -> FinVector:
    if v.frame == E_FRAME:
        return v
    return state.u_to_e(to_u(state, v))


def to_frame(state: ConstructionState, v: FinVector, frame: str) -> FinVector:
    if frame == E_FRAME:
        return to_e(state, v)
    if frame == U_FRAME:
        return to_u(state, v)
    if frame == GAMMA_FRAME:
        return to_gamma(state, v)
    raise FrameError(f"unknown frame {frame!r}")


# ---------------------------------------------------------------------------
# T and polynomials in T
# ---------------------------------------------------------------------------


def _special_positions(state: ConstructionState):
    sp = state._cache.get("special")
    if sp is None:
        before_a = {state.a_(n) - 1: n for n in range(1, len(state.a) + 1)}
        block_end = {state.Delta[n + 1] - 1: n for n in range(1, len(state.a) + 1)}
        sp = (before_a, block_end)
        state._cache["special"] = sp
    return sp


def apply_T(state: ConstructionState, v: FinVector, frame: str | None = None) -> FinVector:
    """T v, returned in ``frame`` (default: the frame of ``v``)."""
    frame = frame or v.frame
    H = state.horizon
    if v.frame == GAMMA_FRAME:
        for j in v.coords:
            if j + 1 >= H:
                raise HorizonError(f"T γ_{j} = γ_{j + 1} is beyond the horizon {H}")
        out = FinVector({j + 1: c for j, c in v.coords.items()}, GAMMA_FRAME)
        return to_frame(state, out, frame)
    u = to_u(state, v)
    before_a, block_end = _special_positions(state)
    out: dict = {}
    for j, c in u.coords.items():
        if j < 0 or j + 1 >= H:
            raise HorizonError(f"T u_{j} needs u_{j + 1}, beyond the horizon {H}")
        if j in before_a:
            n = before_a[j]
            terms = ((state.a_(n), c), (0, c))
        elif j in block_end:
            n = block_end[j]
            terms = ((state.Delta[n + 1], c), (state.Delta[n], -c))
        else:
            terms = ((j + 1, c),)
        for m, x in terms:
            out[m] = out.get(m, 0) + x
    return to_frame(state, FinVector(out, U_FRAME), frame)


def apply_poly(state: ConstructionState, P: Polynomial, v: FinVector, frame: str | None = None) -> FinVector:
    """P(T) v, computed in the orbit basis where T is the plain shift."""
    frame = frame or v.frame
    g = to_gamma(state, v)
    H = state.horizon
    out: dict = {}
    for r, rho in P.items():
        for j, y in g.coords.items():
            m = j + r
            if m >= H:
                raise HorizonError(f"P(T) reaches γ_{m}, beyond the horizon {H}")
            out[m] = out.get(m, 0) + rho * y
    return to_frame(state, FinVector(out, GAMMA_FRAME), frame)


def apply_poly_horner(state: ConstructionState, P: Polynomial, v: FinVector) -> FinVector:
    """P(T) v by Horner's rule on repeated :func:`apply_T` (slow reference path)."""
    if not P.coeffs:
        return FinVector({}, v.frame)
    acc = v * P.coeffs[-1]
    for c in reversed(P.coeffs[:-1]):
        acc = apply_T(state, acc) + v * c
    return acc


# ---------------------------------------------------------------------------
# continuity
# ---------------------------------------------------------------------------


def continuity_constant(state: ConstructionState, N: int):
    """L_N = max{2^j p_N(T u_j) / p_{N+1}(u_j) : p_{N+1}(u_j) != 0, j < Δ_{N+1} - 1} + 1."""
    if N < 1 or N > state.stages_done:
        raise HorizonError(f"L_{N} needs stage {N} committed (have {state.stages_done})")
    F = state.field
    sp = state.space
    best = F.zero()
    for j in range(state.Delta[N + 1] - 1):
        den = sp.seminorm(N + 1, state.u_vector(j))
        if den == 0:
            continue
        Tu = apply_T(state, FinVector.basis(j, F.one(), U_FRAME), E_FRAME)
        val = F.pow2(j) * sp.seminorm(N, Tu) / den
        if val > best:
            best = val
    return best + 1


def continuity_margin(state: ConstructionState, N: int, v: FinVector, L=None):
    """8 C_{N+1} L_N p_{N+2}(v) - p_N(T v)."""
    if L is None:
        L = state.L_(N) if N <= len(state.L) else continuity_constant(state, N)
    sp = state.space
    ve = to_e(state, v)
    Tv = apply_T(state, v, E_FRAME)
    return 8 * state.C(N + 1) * L * sp.seminorm(N + 2, ve) - sp.seminorm(N, Tv)
