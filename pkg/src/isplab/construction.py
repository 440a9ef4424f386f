"""Stage-by-stage construction of u_j = α_j e_{i_j} and of the parameters a_n.

Stage ``n`` fixes the positions ``[Δ_n, Δ_{n+1})`` in three steps:

1. ``[Δ_n, 2Δ_n)`` takes fresh indices of level ``n`` with α small enough for
   the ``final2`` budget of stage ``n - 1``;
2. the block ``[a_n, a_n + Δ_n)`` takes fresh indices of level ``N_n``; the
   offsets ``1..Δ_n - 1`` get α large enough for ``K1``, ``finalcont1bis`` and
   ``tail1bis``, and offset 0 gets the explicit coefficient

       (Δ_n 2^(Δ_n+1) C_{n+1} D_{n-1} max_t p_n(u_{a_n+t}) + 2^Δ_n ‖u_0‖_1) / p_{N_n+1}(e_i)

   on the smallest fresh index ``i`` with ``‖u_{a_n}‖_{N_n} <= 2^-(n+1)``;
3. ``[2Δ_n, a_n)`` is the family 𝒦: ``Δ_n`` seeds per level ``0..n+2``, every
   unused index up to ``s_{n+1}`` and one padding index per missing level,
   listed by decreasing level.  α is chosen backwards for ``finalcont1``,
   ``finalcont2``, ``tail1`` and ``tail3``.

Stage 1 is the same scheme with ``Δ_1 = 1``; its first step also places
``u_0``.  Every "sufficiently big α" is twice the largest lower bound, rounded
up to a power of two.
"""

from __future__ import annotations

import logging
import math
from collections import deque

from .analysis import certify_D, space_norm
from .certificates import content_digest, verify_certificates
from .errors import CertificateFailure, ConstructionRefused, ExponentRangeError, StageBudgetExceeded
from .operator import continuity_constant, gamma
from .spaces import SpaceDescriptor, classify_isp, fresh_indices
from .state import DEFAULT_MAX_EXACT_BITS, DEFAULT_MAX_POSITIONS, ConstructionState, nn_schedule
from .vectors import FinVector

log = logging.getLogger(__name__)

__all__ = ["nn_schedule", "init_construction", "advance_stage", "build", "u_vector"]


def u_vector(state: ConstructionState, j: int) -> FinVector:
    return state.u_vector(j)


class _Bounds:
    """Collects lower bounds ``rhs / coef`` for one α."""

    def __init__(self, F, pos):
        self.F = F
        self.pos = pos
        self.best = None

    def need(self, rhs, coef, cond):
        if rhs == 0:
            return
        if coef == 0:
            raise CertificateFailure(f"{cond} cannot be met at position {self.pos}: left side vanishes", [cond])
        b = rhs / coef
        if self.best is None or b > self.best:
            self.best = b

    def alpha(self, floor=None):
        a = self.F.one() if self.best is None else self.F.pow2_ceil(2 * self.best)
        if floor is not None and floor > a:
            return floor
        return a


class _Stage:
    def __init__(self, state: ConstructionState, n: int):
        self.prev = state
        self.n = n
        self.sp: SpaceDescriptor = state.space
        self.F = state.field
        self.pe_cache: dict = {}

    def pe(self, l, e):
        key = (l, e)
        v = self.pe_cache.get(key)
        if v is None:
            v = self.sp.basis_seminorm(l, e)
            self.pe_cache[key] = v
        return v

    def floor(self, e):
        """Smallest power of two making the weighted part of ‖α e‖_1 at least 1.

        Positions without an upper bound on α get at least this much, which
        keeps their contribution to D_n bounded.
        """
        lvl = self.sp.level(e)
        return self.F.pow2_ceil(self.F.pow2(e) * self.sp.basis_constant(lvl + 1) / self.pe(lvl + 1, e))

    def run(self) -> ConstructionState:
        F, sp, n, prev = self.F, self.sp, self.n, self.prev
        Dn = prev.Delta[n]
        Nn = nn_schedule(n)
        Dprev = prev.D_(n - 1)
        C = sp.basis_constant(n + 1)
        used = set(prev.pos_to_index)
        idx: dict[int, int] = {}
        alpha: dict[int, object] = {}

        # step (i)
        if n == 1:
            first = fresh_indices(sp, 1, 2, used)
            for j, e in zip((0, 1), first):
                idx[j], alpha[j] = e, F.one()
        else:
            Nprev = prev.N_(n - 1)
            for t, e in enumerate(fresh_indices(sp, n, Dn, used)):
                norm_e = space_norm(sp, Nprev, FinVector.basis(e, F.one()))
                bound = F.one() / (F.pow2(n - 1) * Dprev * norm_e)
                idx[Dn + t], alpha[Dn + t] = e, F.pow2_floor(bound / 2)
        used.update(idx.values())
        u0 = FinVector.basis(idx[0], alpha[0]) if n == 1 else prev.u_vector(0)
        u0_norm1 = space_norm(sp, 1, u0)

        def pu(l, e, a):
            return abs(a) * self.pe(l, e)

        # step (ii): offsets 1..Δ_n-1 of the block, filled backwards
        block_idx = fresh_indices(sp, Nn, Dn - 1, used)
        used.update(block_idx)
        b_idx = {t: block_idx[t - 1] for t in range(1, Dn)}
        b_alpha: dict[int, object] = {}
        suffix = {l: F.zero() for l in range(1, n + 1)}
        two_D = F.pow2(Dn)
        for t in range(Dn - 1, 0, -1):
            e = b_idx[t]
            bd = _Bounds(F, f"a_{n}+{t}")
            g = gamma(prev, t)
            bd.need(two_D * space_norm(sp, 1, g), self.pe(Nn + 1, e), "K1")
            for l in range(1, n + 1):
                if t + 1 < Dn:
                    nxt = pu(l, b_idx[t + 1], b_alpha[t + 1])
                    bd.need(Dn * two_D * nxt, self.pe(l + 1, e), "finalcont1bis")
                if n >= 2:
                    bd.need(Dn * 2 * two_D * C * Dprev * suffix[l], self.pe(l + 1, e), "tail1bis")
            b_alpha[t] = bd.alpha(self.floor(e))
            for l in suffix:
                suffix[l] = max(suffix[l], pu(l, e, b_alpha[t]))

        # offset 0: explicit coefficient on a sufficiently big index
        coef = Dn * 2 * two_D * C * Dprev * suffix.get(n, F.zero()) + two_D * u0_norm1
        target = F.pow2(-(n + 1))
        start = max(0, int(math.floor(F.log2(coef))) + n - 1)
        ia = None
        for e in sp.level_members(Nn, start):
            if e in used:
                continue
            a_val = coef / self.pe(Nn + 1, e)
            if space_norm(sp, Nn, FinVector.basis(e, a_val)) <= target:
                ia = e
                break
        used.add(ia)
        b_idx[0], b_alpha[0] = ia, a_val

        # step (iii): the family 𝒦
        seeds: list[int] = []
        for l in range(n + 3):
            seeds += fresh_indices(sp, l, Dn, used | set(seeds))
        s_next = max(max(used), max(seeds))
        if s_next + 1 > prev.max_positions:
            raise StageBudgetExceeded(
                f"stage {n} needs s_{n + 1} = {s_next}, i.e. more than {s_next + 1} positions "
                f"(budget {prev.max_positions}); committed stages: {prev.stages_done}"
            )
        kset = set(seeds)
        kset.update(e for e in range(s_next + 1) if e not in used)
        levels = {e: sp.level(e) for e in kset}
        present = set(levels.values())
        for m in range(max(present)):
            if m not in present:
                (pad,) = fresh_indices(sp, m, 1, used | kset, min_enum=s_next + 1)
                kset.add(pad)
                levels[pad] = m
        K = sorted(kset, key=lambda e: (-levels[e], e))
        a_n = len(K) + 2 * Dn
        D_next = a_n + Dn
        if F.exact and a_n * a_n // 2 > prev.max_exact_bits:
            raise StageBudgetExceeded(
                f"stage {n}: a_{n} = {a_n}; exact-rational α would need about {a_n * a_n // 2} bits "
                f"(budget {prev.max_exact_bits}); use binary64 mode"
            )
        log.info("stage %d: Δ=%d a=%d s=%d", n, Dn, a_n, s_next)

        for t in range(Dn):
            idx[a_n + t], alpha[a_n + t] = b_idx[t], b_alpha[t]
        for r, e in enumerate(K):
            idx[2 * Dn + r] = e

        # α on 𝒦, backwards from a_n - 1
        def pos_pu(l, j):
            if j < Dn and n > 1:
                return prev.pu(l, j)
            return pu(l, idx[j], alpha[j])

        Gmax = F.zero()
        if n >= 2:
            Gmax = max(sp.seminorm(n, gamma(prev, m)) for m in range(Dn))
        p_n_u0 = sp.seminorm(n, u0)
        windows = {l: deque() for l in range(1, n + 1)}
        added = min(a_n - 1 + Dn - 1, D_next - 1) + 1
        for j in range(a_n - 1, 2 * Dn - 1, -1):
            e = idx[j]
            hi = min(j + Dn - 1, D_next - 1)
            if n >= 2:
                while added > j + 1:
                    added -= 1
                    for l, dq in windows.items():
                        val = pos_pu(l, added)
                        while dq and dq[-1][1] <= val:
                            dq.pop()
                        dq.append((added, val))
                for dq in windows.values():
                    while dq and dq[0][0] > hi:
                        dq.popleft()
            bd = _Bounds(F, j)
            two_j1 = F.pow2(j + 1)
            for l in range(1, n + 1):
                bd.need(two_j1 * pos_pu(l, j + 1), self.pe(l + 1, e), "finalcont1")
                if n >= 2 and windows[l]:
                    bd.need(two_j1 * C * Dprev * windows[l][0][1], self.pe(l + 1, e), "tail1")
            if j == a_n - 1:
                bd.need(F.pow2(a_n) * p_n_u0, self.pe(1, e), "finalcont2")
            if n >= 2 and j >= a_n - Dn:
                bd.need(two_j1 * C * Dprev * Gmax, self.pe(1, e), "tail3")
            alpha[j] = bd.alpha(self.floor(e))

        # commit
        new = prev.copy()
        new.pos_to_index = list(prev.pos_to_index) + [idx[j] for j in range(len(prev.pos_to_index), D_next)]
        new.alpha = list(prev.alpha) + [alpha[j] for j in range(len(prev.alpha), D_next)]
        new.stages_done = n
        new.Delta.append(D_next)
        new.a.append(a_n)
        new.s.append(s_next)
        new.N.append(Nn)
        new.clear_cache()
        new.D.append(certify_D(new, n))
        new.L.append(continuity_constant(new, n))
        report = verify_certificates(new, n)
        if not report.passed:
            raise CertificateFailure(f"stage {n} failed its certificates: {report.failures()}", report.failures())
        new.certificates.append(report)
        new.digests.append({"certificate": report.digest(), "content": content_digest(new, n)})
        return new


def init_construction(
    space: SpaceDescriptor,
    max_positions: int = DEFAULT_MAX_POSITIONS,
    max_exact_bits: int = DEFAULT_MAX_EXACT_BITS,
) -> ConstructionState:
    """Stage 1 on a space failing the ISP criterion."""
    verdict = classify_isp(space)
    if verdict.satisfies_isp:
        raise ConstructionRefused(f"{space.name} satisfies the ISP criterion ({verdict.describe()})")
    state = ConstructionState(space, max_positions=max_positions, max_exact_bits=max_exact_bits)
    return advance_stage(state)


def advance_stage(state: ConstructionState) -> ConstructionState:
    """Commit stage ``stages_done + 1`` and return the new state."""
    n = state.stages_done + 1
    try:
        return _Stage(state, n).run()
    except ExponentRangeError as exc:
        raise ExponentRangeError(f"stage {n}: {exc}; committed stages: {state.stages_done}") from None


def build(space: SpaceDescriptor, stages: int, progress=None, **budget) -> ConstructionState:
    if stages < 1:
        raise ValueError("stages must be >= 1")
    state = init_construction(space, **budget)
    if progress:
        progress(state)
    while state.stages_done < stages:
        state = advance_stage(state)
        if progress:
            progress(state)
    return state
