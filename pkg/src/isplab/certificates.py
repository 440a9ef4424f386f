"""Per-stage certificates.

Every inequality the construction relies on is re-evaluated from the seminorm
oracle over its full quantifier range.  A check's margin is the worst
``log2(lhs / rhs)`` over its instances (the headroom in bits): ``+inf`` when
all right-hand sides vanish, ``-inf`` when an equality or structural
requirement fails.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass, field

from .errors import CertificateFailure, HorizonError
from .state import ConstructionState

CONDITIONS = (
    "tn",
    "tn2",
    "param",
    "finalcont1",
    "finalcont1bis",
    "finalcont2",
    "finalcont3",
    "finalcont4",
    "K1",
    "tail1",
    "tail1bis",
    "tail2",
    "tail3",
    "final1",
    "final2",
)
EXTRA = ("D", "L")

# seminorm index beyond which a nonzero basis vector is assumed visible
_MAX_LEVEL_SCAN = 1 << 16


@dataclass
class Check:
    condition: str
    lo: int
    hi: int
    count: int = 0
    margin: float = math.inf
    passed: bool = True
    worst: int | None = None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "range": [self.lo, self.hi],
            "count": self.count,
            "margin": _fmt_margin(self.margin),
            "passed": self.passed,
            "worst": self.worst,
            "note": self.note,
        }


def _fmt_margin(m: float) -> str:
    if math.isinf(m):
        return "inf" if m > 0 else "-inf"
    return f"{m:.6f}"


@dataclass
class CertificateReport:
    stage: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        return [c.condition for c in self.checks if not c.passed]

    def get(self, condition: str) -> Check | None:
        return next((c for c in self.checks if c.condition == condition), None)

    def to_json(self) -> dict:
        return {"stage": self.stage, "checks": [c.to_json() for c in self.checks]}

    @classmethod
    def from_json(cls, d: dict) -> "CertificateReport":
        checks = []
        for c in d["checks"]:
            m = c["margin"]
            checks.append(
                Check(
                    c["condition"],
                    c["range"][0],
                    c["range"][1],
                    c["count"],
                    float(m),
                    c["passed"],
                    c["worst"],
                    c.get("note", ""),
                )
            )
        return cls(d["stage"], checks)

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


class _Acc:
    def __init__(self, F, check: Check):
        self.F = F
        self.c = check

    def _record(self, margin: float, ok: bool, pos):
        c = self.c
        c.count += 1
        if margin < c.margin or (not ok and c.passed):
            c.margin = min(margin, c.margin)
            c.worst = pos
        if not ok:
            c.passed = False

    def geq(self, lhs, rhs, pos):
        F = self.F
        if rhs == 0:
            self._record(math.inf, lhs >= 0, pos)
            return
        if lhs == 0:
            self._record(-math.inf, False, pos)
            return
        self._record(F.log2(lhs) - F.log2(rhs), F.geq(lhs, rhs), pos)

    def leq(self, lhs, rhs, pos):
        self.geq(rhs, lhs, pos)

    def gt(self, lhs, rhs, pos):
        F = self.F
        if rhs == 0:
            self._record(math.inf if lhs > 0 else -math.inf, lhs > 0, pos)
            return
        if lhs == 0:
            self._record(-math.inf, False, pos)
            return
        self._record(F.log2(lhs) - F.log2(rhs), F.gt(lhs, rhs) and lhs != rhs, pos)

    def holds(self, ok: bool, pos):
        self._record(math.inf if ok else -math.inf, ok, pos)


def _window_max(values: list, width: int) -> list:
    """out[i] = max(values[i+1 : i+width]) (``None`` when empty)."""
    out = [None] * len(values)
    dq: deque = deque()
    for i in range(len(values) - 1, -1, -1):
        # window for i is (i, i + width)
        while dq and dq[0] >= i + width:
            dq.popleft()
        out[i] = values[dq[0]] if dq else None
        while dq and values[dq[-1]] <= values[i]:
            dq.pop()
        dq.append(i)
    return out


def _vanishing_order(state: ConstructionState, j: int) -> int:
    """Largest l with p_l(u_j) = 0 (0 if p_1(u_j) > 0), by monotone search."""
    if state.pu(1, j) > 0:
        return 0
    lo, hi = 1, 2
    while state.pu(hi, j) == 0:
        lo, hi = hi, hi * 2
        if hi > _MAX_LEVEL_SCAN:
            raise CertificateFailure(f"u_{j} vanishes under every seminorm", ["finalcont4"])
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if state.pu(mid, j) == 0:
            lo = mid
        else:
            hi = mid
    return lo


def verify_certificates(state: ConstructionState, n: int) -> CertificateReport:
    """Recompute every stage-``n`` condition from the seminorm oracle."""
    from .analysis import certify_D, space_norm
    from .operator import continuity_constant, gamma

    if n < 1 or n > state.stages_done:
        raise HorizonError(f"stage {n} is not committed")
    F = state.field
    sp = state.space
    report = CertificateReport(n)
    Dn = state.Delta[n]
    H = state.Delta[n + 1]
    a_n = state.a_(n)
    Nn = state.N_(n)
    C = state.C(n + 1)
    Dprev = state.D_(n - 1)
    p = state.pu

    def run(cond, lo, hi, fn):
        chk = Check(cond, lo, hi)
        acc = _Acc(F, chk)
        try:
            fn(acc)
        except CertificateFailure as exc:
            chk.passed, chk.margin, chk.note = False, -math.inf, str(exc)
        except (ArithmeticError, IndexError, KeyError, ValueError, TypeError, HorizonError) as exc:
            chk.passed, chk.margin, chk.note = False, -math.inf, f"{type(exc).__name__}: {exc}"
        report.checks.append(chk)

    def tn(acc):
        s = state.s_(n + 1)
        image = set(state.pos_to_index[:H])
        missing = [e for e in range(s + 1) if e not in image]
        acc.holds(not missing, missing[0] if missing else None)

    def tn2(acc):
        s = state.s_(n + 1)
        for j in range(H):
            e = state.pos_to_index[j]
            if e > s:
                acc.holds(sp.basis_seminorm(n + 3, e) == 0, j)

    def param(acc):
        D = state.Delta
        acc.holds(D[0] == 0 and D[1] == 1, 0)
        acc.holds(D[n + 1] == state.a_(n) + D[n], H)
        acc.holds(2 * D[n] < state.a_(n), a_n)
        acc.holds(len(state.pos_to_index) >= H and len(state.alpha) >= H, H)
        acc.holds(len(set(state.pos_to_index[:H])) == H, None)

    def finalcont1(acc):
        for j in range(Dn, a_n):
            for l in range(1, n + 1):
                acc.geq(p(l + 1, j), F.pow2(j + 1) * p(l, j + 1), j)

    def finalcont1bis(acc):
        k = Dn * F.pow2(Dn)
        for j in range(a_n, H - 1):
            for l in range(1, n + 1):
                acc.geq(p(l + 1, j), k * p(l, j + 1), j)

    def finalcont2(acc):
        acc.gt(p(1, a_n - 1), F.pow2(a_n) * p(n, 0), a_n - 1)

    def finalcont3(acc):
        acc.holds(p(n, Dn) == 0, Dn)
        acc.gt(p(n + 1, Dn), F.zero(), Dn)
        acc.gt(p(n + 1, H - 1), F.zero(), H - 1)

    def finalcont4(acc):
        start = Dn - 1 if n >= 2 else 0
        stop = H if state.stages_done > n else H - 1
        orders = {}
        for j in range(start, stop):
            z = orders.get(j)
            if z is None:
                z = orders[j] = _vanishing_order(state, j)
            # p_{l+1}(u_j) = 0 exactly for l <= z - 1; by monotonicity it suffices
            # that p_{z-1}(u_{j+1}) = 0
            if z >= 2:
                acc.holds(p(z - 1, j + 1) == 0, j)
            else:
                acc.holds(True, j)

    def K1(acc):
        k = F.pow2(Dn)
        for j in range(a_n, H):
            acc.holds(p(Nn, j) == 0 and p(Nn + 1, j) > 0, j)
            acc.geq(p(Nn + 1, j), k * space_norm(sp, 1, gamma(state, j - a_n)), j)

    def _tail1_like(acc, lo, hi, factor_of_j):
        for l in range(1, n + 1):
            vals = [p(l, j) for j in range(Dn, H)]
            wmax = _window_max(vals, Dn)
            for j in range(lo, hi):
                w = wmax[j - Dn]
                if w is None:
                    continue
                acc.geq(p(l + 1, j), factor_of_j(j) * C * Dprev * w, j)

    def tail1(acc):
        _tail1_like(acc, Dn, a_n, lambda j: F.pow2(j + 1))

    def tail1bis(acc):
        k = Dn * F.pow2(Dn + 1)
        _tail1_like(acc, a_n, H, lambda j: k)

    def tail2(acc):
        for j in range(Dn, 2 * Dn):
            acc.holds(p(n, j) == 0, j)

    def tail3(acc):
        G = max(sp.seminorm(n, gamma(state, m)) for m in range(Dn))
        for j in range(a_n - Dn, a_n):
            acc.geq(p(1, j), F.pow2(j + 1) * C * Dprev * G, j)

    def final1(acc):
        acc.leq(space_norm(sp, Nn, state.u_vector(a_n)), F.pow2(-n), a_n)

    def final2(acc):
        Nprev = state.N_(n - 1)
        bound = F.one() / (F.pow2(n - 1) * Dprev)
        for j in range(Dn, 2 * Dn):
            acc.leq(space_norm(sp, Nprev, state.u_vector(j)), bound, j)

    def D_check(acc):
        acc.geq(state.D_(n), certify_D(state, n), H)

    def L_check(acc):
        fresh = continuity_constant(state, n)
        acc.holds(F.close(fresh, state.L_(n)), H)

    run("tn", 0, H, tn)
    run("tn2", 0, H, tn2)
    run("param", 0, H, param)
    run("finalcont1", Dn, a_n, finalcont1)
    run("finalcont1bis", a_n, H - 1, finalcont1bis)
    run("finalcont2", a_n - 1, a_n, finalcont2)
    run("finalcont3", Dn, H, finalcont3)
    run("finalcont4", Dn - 1 if n >= 2 else 0, H, finalcont4)
    run("K1", a_n, H, K1)
    if n >= 2:
        run("tail1", Dn, a_n, tail1)
        run("tail1bis", a_n, H, tail1bis)
        run("tail2", Dn, 2 * Dn, tail2)
        run("tail3", a_n - Dn, a_n, tail3)
    run("final1", a_n, a_n + 1, final1)
    if n >= 2:
        run("final2", Dn, 2 * Dn, final2)
    if len(state.D) >= n:
        run("D", 0, H, D_check)
    if len(state.L) >= n:
        run("L", 0, H, L_check)
    return report


def content_digest(state: ConstructionState, n: int) -> str:
    """Hash of the stage-``n`` positions, indices and coefficients."""
    F = state.field
    lo, hi = state.Delta[n], state.Delta[n + 1]
    if n == 1:
        lo = 0
    body = {
        "n": n,
        "Delta": state.Delta[n],
        "a": state.a_(n),
        "s": state.s_(n + 1),
        "index": state.pos_to_index[lo:hi],
        "alpha": [F.to_str(x) for x in state.alpha[lo:hi]],
    }
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class StateVerification:
    reports: list
    digest_mismatch: list  # stages whose stored digests disagree

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports) and not self.digest_mismatch

    def failures(self) -> list[tuple[int, str]]:
        out = [(r.stage, c) for r in self.reports for c in r.failures()]
        out += [(n, "digest") for n in self.digest_mismatch]
        return out


def verify_state(state: ConstructionState, stored_digests=None) -> StateVerification:
    """Re-verify every committed stage; compare digests when given."""
    reports = []
    mismatch = []
    for n in range(1, state.stages_done + 1):
        rep = verify_certificates(state, n)
        reports.append(rep)
        if stored_digests is not None:
            try:
                content = content_digest(state, n)
            except (IndexError, KeyError):
                content = None
            stored = stored_digests[n - 1] if n - 1 < len(stored_digests) else None
            if stored is None or stored.get("content") != content:
                mismatch.append(n)
    return StateVerification(reports, mismatch)
