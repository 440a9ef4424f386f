"""Randomised suites for the continuity, K_n and tail bounds, shared by ``verify`` and the tests."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .analysis import certify_D, kn_membership, norm_N, tail_margin
from .operator import Polynomial, apply_poly, apply_T, continuity_margin, to_gamma
from .state import ConstructionState
from .vectors import E_FRAME, U_FRAME, FinVector


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)
    worst: object = None

    @property
    def passed(self) -> bool:
        return not self.failures


def _coef(rng: random.Random) -> Fraction:
    num = 0
    while num == 0:
        num = rng.randint(-9, 9)
    return Fraction(num, rng.randint(1, 9))


def random_u_vector(state: ConstructionState, rng: random.Random, lo: int, hi: int, k: int = 4, balanced=False):
    """A random u-frame vector on ``k`` positions in ``[lo, hi)``.

    With ``balanced`` each coordinate is divided by ‖u_j‖_1, so that no single
    position dominates the ‖·‖_1 norm.
    """
    F = state.field
    k = min(k, hi - lo)
    positions = rng.sample(range(lo, hi), k)
    coords = {}
    for j in positions:
        c = F.coerce(_coef(rng))
        if balanced:
            c = c / norm_N(state, 1, state.u_vector(j))
        coords[j] = c
    return FinVector(coords, U_FRAME)


def continuity_suite(state: ConstructionState, N: int, samples: int, rng: random.Random) -> SuiteResult:
    """p_N(Tv) <= 8 C_{N+1} L_N p_{N+2}(v) on random v below the horizon."""
    F = state.field
    res = SuiteResult(f"continuity N={N}")
    H = state.horizon
    for _ in range(samples):
        v = random_u_vector(state, rng, 0, H - 1, k=rng.randint(1, 6))
        lhs = state.space.seminorm(N, apply_T(state, v, E_FRAME))
        rhs = continuity_margin(state, N, v) + lhs
        res.cases += 1
        m = rhs - lhs
        if res.worst is None or m < res.worst:
            res.worst = m
        if not F.geq(rhs, lhs):
            res.failures.append(sorted(v.coords))
    return res


def kn_d_suite(state: ConstructionState, n: int, samples: int, rng: random.Random) -> SuiteResult:
    """Rejection-sample y in K_n and check Σ|y_j| <= D_n."""
    F = state.field
    res = SuiteResult(f"K_{n} vs D_{n}")
    Dn = state.D_(n) if n <= len(state.D) else certify_D(state, n)
    H = state.Delta[n + 1]
    attempts = 0
    while res.cases < samples and attempts < 20 * samples:
        attempts += 1
        v = random_u_vector(state, rng, 0, H, k=rng.randint(1, 5), balanced=True)
        norm = norm_N(state, 1, v)
        target = F.coerce(Fraction(rng.randint(1, 150), 100))
        y = v * (target / norm)
        mem = kn_membership(state, n, y)
        if not mem.in_set:
            res.skipped += 1
            continue
        res.cases += 1
        total = sum((abs(c) for c in to_gamma(state, y).coords.values()), F.zero())
        if res.worst is None or total > res.worst:
            res.worst = total
        if not F.geq(Dn, total):
            res.failures.append(sorted(v.coords))
    return res


def random_tail_pair(state: ConstructionState, n: int, rng: random.Random):
    """(P, x_tail) with val(P) >= 1, deg(P) < Δ_{n+1}, |P| <= D_n, x_tail beyond Δ_{n+1}."""
    F = state.field
    D1, H = state.Delta[n + 1], state.horizon
    room = H - D1 - 1
    if room < 2:
        return None
    deg = rng.randint(1, min(D1 - 1, room - 1, 40))
    coeffs = [F.zero()] + [F.coerce(_coef(rng)) if rng.random() < 0.5 else F.zero() for _ in range(deg)]
    coeffs[deg] = F.coerce(_coef(rng))
    P = Polynomial(tuple(coeffs))
    scale = F.coerce(Fraction(rng.randint(1, 100), 100)) * state.D_(n) / F.coerce(P.abs_sum())
    P = P * scale
    x = random_u_vector(state, rng, D1, H - 1 - deg, k=rng.randint(1, 4))
    return P, x


def tail_suite(state: ConstructionState, n: int, samples: int, rng: random.Random) -> SuiteResult:
    F = state.field
    res = SuiteResult(f"tail n={n}")
    for _ in range(samples):
        pair = random_tail_pair(state, n, rng)
        if pair is None:
            res.skipped += 1
            continue
        P, x = pair
        m = tail_margin(state, n, P, x)
        res.cases += 1
        if res.worst is None or m < res.worst:
            res.worst = m
        lhs = state.space.seminorm(state.N_(n), apply_poly(state, P, x, E_FRAME))
        if not F.geq(lhs + m, lhs):
            res.failures.append((P.deg, sorted(x.coords)))
    return res
