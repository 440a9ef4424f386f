"""The staged construction record."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import FrameError, HorizonError
from .spaces import SpaceDescriptor
from .vectors import E_FRAME, U_FRAME, FinVector

DEFAULT_MAX_POSITIONS = 200_000
# exact-rational α values grow like 2^(a_n^2 / 2); beyond this many bits a
# stage is refused rather than left to exhaust memory
DEFAULT_MAX_EXACT_BITS = 4_000_000


def nn_schedule(m: int) -> int:
    """N_m from the triangular word 1; 1,2; 1,2,3; ..."""
    if m < 1:
        raise ValueError(f"schedule index must be >= 1, got {m}")
    b = (math.isqrt(8 * m + 1) - 1) // 2
    if b * (b + 1) // 2 < m:
        b += 1
    return m - (b - 1) * b // 2


@dataclass
class ConstructionState:
    """Positions ``[0, Delta[stages_done + 1])`` together with their parameters.

    ``a[k - 1] = a_k``, ``s[k - 1] = s_{k+1}``, ``N[k - 1] = N_k``,
    ``D[k - 1] = D_k`` and ``L[k - 1] = L_k``.  ``pos_to_index[j]`` is the
    basis ``enum_no`` of ``u_j`` and ``alpha[j]`` its coefficient.
    """

    space: SpaceDescriptor
    stages_done: int = 0
    Delta: list = field(default_factory=lambda: [0, 1])
    a: list = field(default_factory=list)
    s: list = field(default_factory=list)
    N: list = field(default_factory=list)
    pos_to_index: list = field(default_factory=list)
    alpha: list = field(default_factory=list)
    D: list = field(default_factory=list)
    L: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    digests: list = field(default_factory=list)
    max_positions: int = DEFAULT_MAX_POSITIONS
    max_exact_bits: int = DEFAULT_MAX_EXACT_BITS
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- parameters ---------------------------------------------------------
    @property
    def field(self):
        return self.space.field

    @property
    def horizon(self) -> int:
        return self.Delta[self.stages_done + 1]

    def Delta_(self, n: int) -> int:
        return self.Delta[n]

    def a_(self, n: int) -> int:
        return self.a[n - 1]

    def s_(self, n: int) -> int:
        """s_n for ``2 <= n <= stages_done + 1``."""
        return self.s[n - 2]

    def N_(self, n: int) -> int:
        return self.N[n - 1] if n <= len(self.N) else nn_schedule(n)

    def D_(self, n: int):
        if n == 0:
            return self.field.one()
        return self.D[n - 1]

    def L_(self, n: int):
        return self.L[n - 1]

    def C(self, j: int):
        return self.space.basis_constant(j)

    def stage_of(self, j: int) -> int:
        """The stage whose interval ``[Delta_n, Delta_{n+1})`` holds position ``j``."""
        for n in range(1, self.stages_done + 1):
            if j < self.Delta[n + 1]:
                return n
        raise HorizonError(f"position {j} is beyond the horizon {self.horizon}")

    def block_of(self, j: int) -> int | None:
        """``n`` with ``j`` in ``[a_n, a_n + Delta_n)``, else ``None``."""
        blocks = self._cache.get("blocks")
        if blocks is None:
            blocks = {}
            for n in range(1, len(self.a) + 1):
                for t in range(self.Delta[n]):
                    blocks[self.a[n - 1] + t] = n
            self._cache["blocks"] = blocks
        return blocks.get(j)

    # -- basis bookkeeping ----------------------------------------------------
    @property
    def index_to_pos(self) -> dict:
        inv = self._cache.get("inv")
        if inv is None:
            inv = {e: j for j, e in enumerate(self.pos_to_index)}
            self._cache["inv"] = inv
        return inv

    def check_position(self, j: int):
        if not 0 <= j < self.horizon:
            raise HorizonError(f"position {j} is outside [0, {self.horizon})")

    def u_vector(self, j: int) -> FinVector:
        """u_j = α_j e_{i_j} in the e-frame."""
        self.check_position(j)
        return FinVector.basis(self.pos_to_index[j], self.alpha[j])

    def sigma(self, enum_no: int) -> int:
        """The position carrying ``e_{enum_no}``."""
        try:
            return self.index_to_pos[enum_no]
        except KeyError:
            raise HorizonError(f"basis index {enum_no} is not placed below the horizon") from None

    def lam(self, enum_no: int):
        """λ with ``e_{enum_no} = λ u_{σ(enum_no)}``."""
        return self.field.one() / self.alpha[self.sigma(enum_no)]

    def level_at(self, j: int) -> int:
        return self.space.level(self.pos_to_index[j])

    def e_seminorm(self, l: int, enum_no: int):
        cache = self._cache.setdefault("pe", {})
        key = (l, enum_no)
        val = cache.get(key)
        if val is None:
            val = self.space.basis_seminorm(l, enum_no)
            cache[key] = val
        return val

    def pu(self, l: int, j: int):
        """p_l(u_j), evaluated by the seminorm oracle and cached."""
        cache = self._cache.setdefault("pu", {})
        key = (l, j)
        val = cache.get(key)
        if val is None:
            val = self.space.seminorm(l, self.u_vector(j))
            cache[key] = val
        return val

    # -- frames --------------------------------------------------------------
    def e_to_u(self, v: FinVector) -> FinVector:
        if v.frame == U_FRAME:
            return v
        if v.frame != E_FRAME:
            raise FrameError(f"expected an e-frame vector, got {v.frame}")
        out = {}
        for e, c in v.coords.items():
            j = self.sigma(e)
            out[j] = c / self.alpha[j]
        return FinVector(out, U_FRAME)

    def u_to_e(self, v: FinVector) -> FinVector:
        if v.frame == E_FRAME:
            return v
        if v.frame != U_FRAME:
            raise FrameError(f"expected a u-frame vector, got {v.frame}")
        out = {}
        for j, c in v.coords.items():
            self.check_position(j)
            out[self.pos_to_index[j]] = c * self.alpha[j]
        return FinVector(out, E_FRAME)

    # -- copying -------------------------------------------------------------
    def copy(self) -> "ConstructionState":
        return ConstructionState(
            space=self.space,
            stages_done=self.stages_done,
            Delta=list(self.Delta),
            a=list(self.a),
            s=list(self.s),
            N=list(self.N),
            pos_to_index=list(self.pos_to_index),
            alpha=list(self.alpha),
            D=list(self.D),
            L=list(self.L),
            certificates=list(self.certificates),
            digests=list(self.digests),
            max_positions=self.max_positions,
            max_exact_bits=self.max_exact_bits,
        )

    def clear_cache(self):
        self._cache.clear()

    def summary(self) -> dict:
        return {
            "space": self.space.name,
            "scalar_mode": self.field.name,
            "stages_done": self.stages_done,
            "Delta": list(self.Delta),
            "a": list(self.a),
            "s": list(self.s),
            "N": list(self.N),
        }
