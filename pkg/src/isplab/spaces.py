"""Fréchet spaces without continuous norm, described by seminorm oracles.

A descriptor fixes an enumeration ``enum_no -> label`` of a Schauder basis,
evaluates the graded seminorms ``p_j`` on finitely supported e-frame vectors,
and carries the analytic metadata the construction needs: the level function
(``i`` lies in ``E_j`` iff ``p_j(e_i) = 0 < p_{j+1}(e_i)``), the basis
constants ``C_j`` and the codimension of ``ker p_{j+1}`` in ``ker p_j``.

Built-in descriptors are already normalised: ``J = j + 1`` in the partial-sum
inequality and, for the non-ISP spaces, every level set is infinite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import count as _count
from pathlib import Path
from typing import Iterator

from .errors import ConfigError, DescriptorMismatch, LevelExhausted, Unclassifiable
from .numeric import Field, get_field
from .vectors import E_FRAME, FinVector

INF = math.inf


def _tri(d: int) -> int:
    return d * (d + 1) // 2


def diagonal_enum(a: int, b: int) -> int:
    """Cantor diagonal position of the pair ``(a, b)``, ``a, b >= 0``.

    Diagonals ``a + b = d`` are listed in order of ``d``; inside a diagonal the
    entries are ordered by ``b``.
    """
    return _tri(a + b) + b


def diagonal_pair(m: int) -> tuple[int, int]:
    d = (math.isqrt(8 * m + 1) - 1) // 2
    b = m - _tri(d)
    return d - b, b


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------


class SpaceDescriptor:
    """Base class.  Subclasses implement the basis/seminorm specifics."""

    name = "space"
    config_name: str | None = None
    level_infinite = False
    # codim(j) is finite/infinite uniformly for j >= codim_stable_from
    codim_stable_from = 1
    has_codim = True
    uses_sqrt = False

    def __init__(self, field_: Field):
        if self.uses_sqrt and field_.exact:
            raise ConfigError(
                f"{self.name}: rational mode is reserved for max-type and l1-type spaces; use binary64"
            )
        self.field = field_

    # -- basis ---------------------------------------------------------------
    def label(self, enum_no: int) -> tuple:
        raise NotImplementedError

    def enum(self, label: tuple) -> int:
        raise NotImplementedError

    def level(self, enum_no: int) -> int:
        raise NotImplementedError

    def level_members(self, level: int, start: int = 0) -> Iterator[int]:
        """Ascending ``enum_no`` values of ``E_level`` that are ``>= start``."""
        raise NotImplementedError

    # -- seminorms -------------------------------------------------------------
    def seminorm(self, j: int, v: FinVector):
        if j < 1:
            raise ValueError(f"seminorm index must be >= 1, got {j}")
        if v.frame != E_FRAME:
            raise ValueError(f"seminorm expects an e-frame vector, got {v.frame}")
        for k in v.coords:
            self._check_enum(k)
        return self._seminorm(j, v.coords)

    def _seminorm(self, j: int, coords: dict):
        raise NotImplementedError

    def basis_seminorm(self, j: int, enum_no: int):
        return self.seminorm(j, FinVector.basis(enum_no, self.field.one()))

    def basis_constant(self, j: int):
        if j < 1:
            raise ValueError(j)
        return self.field.one()

    def codim(self, j: int):
        """Codimension of ``ker p_{j+1}`` in ``ker p_j`` (an int or ``INF``)."""
        raise NotImplementedError

    def _check_enum(self, k):
        if not isinstance(k, int) or k < 0:
            raise DescriptorMismatch(f"{self.name}: invalid basis index {k!r}")

    def config(self) -> dict:
        return {"space": self.config_name or self.name, "scalar_mode": self.field.name}

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} [{self.field.name}]>"


class OmegaSpace(SpaceDescriptor):
    """ω: all sequences ``(x_1, x_2, ...)`` with ``p_j(x) = max_{n<=j} |x_n|``.

    Labels are ``(n,)`` with ``n >= 1`` and ``enum_no = n - 1``; ``E_j = {e_{j+1}}``.
    """

    name = "omega"
    config_name = "omega"

    def label(self, enum_no):
        self._check_enum(enum_no)
        return (enum_no + 1,)

    def enum(self, label):
        if len(label) != 1 or label[0] < 1:
            raise DescriptorMismatch(f"omega: invalid label {label!r}")
        return label[0] - 1

    def level(self, enum_no):
        self._check_enum(enum_no)
        return enum_no

    def level_members(self, level, start=0):
        if level >= start:
            yield level

    def _seminorm(self, j, coords):
        return max((abs(v) for k, v in coords.items() if k < j), default=self.field.zero())

    def codim(self, j):
        return 1


class OmegaPlusL2(SpaceDescriptor):
    """ω ⊕ ℓ₂ with ``p_j(x, y) = max(max_{n<=j} |x_n|, ||y||_2)``.

    The ℓ₂ summand is seen by ``p_1`` already, so it sits in ``E_0``.  Labels:
    ``(1, n)`` for the ω vector ``e_n`` (``n >= 1``, ``enum_no = 2n - 2``) and
    ``(2, k)`` for the ℓ₂ vector ``f_k`` (``enum_no = 2k + 1``).
    """

    name = "omega_plus_l2"
    config_name = "omega_plus_l2"
    uses_sqrt = True

    def label(self, enum_no):
        self._check_enum(enum_no)
        if enum_no % 2 == 0:
            return (1, enum_no // 2 + 1)
        return (2, enum_no // 2)

    def enum(self, label):
        if len(label) == 2 and label[0] == 1 and label[1] >= 1:
            return 2 * label[1] - 2
        if len(label) == 2 and label[0] == 2 and label[1] >= 0:
            return 2 * label[1] + 1
        raise DescriptorMismatch(f"omega_plus_l2: invalid label {label!r}")

    def level(self, enum_no):
        self._check_enum(enum_no)
        return enum_no // 2 if enum_no % 2 == 0 else 0

    def level_members(self, level, start=0):
        if level == 0:
            if start <= 0:
                yield 0
            first = max(start, 1)
            first += (first + 1) % 2
            yield from _count(first, 2)
        elif 2 * level >= start:
            yield 2 * level

    def _seminorm(self, j, coords):
        F = self.field
        omega_part = max((abs(v) for k, v in coords.items() if k % 2 == 0 and k // 2 < j), default=F.zero())
        sq = sum((v * v for k, v in coords.items() if k % 2 == 1), F.zero())
        return max(omega_part, F.sqrt(F.coerce(sq)))

    def codim(self, j):
        return 1


# -- base spaces for X^N -------------------------------------------------------


@dataclass(frozen=True)
class BaseSpace:
    """A Fréchet space with basis ``(e_k)_{k>=0}`` used as the factor of X^N.

    ``levels`` gives the least ``l`` with ``q_{l+1}(e_k) > 0`` via ``level_of``;
    ``quotient_dim(j)`` is ``dim X / ker q_j``.
    """

    name: str
    kind: str  # "l1" | "l2" | "omega" | "finite"
    dim: float = INF

    @property
    def omega_like(self) -> bool:
        return self.kind == "omega"

    def level_of(self, k: int) -> int:
        return k if self.kind == "omega" else 0

    def quotient_dim(self, j: int):
        if self.kind == "omega":
            return j
        return self.dim

    def q(self, j: int, coords: dict, F: Field):
        if self.kind == "l1":
            return sum((abs(v) for v in coords.values()), F.zero())
        if self.kind == "l2":
            return F.sqrt(F.coerce(sum((v * v for v in coords.values()), F.zero())))
        if self.kind == "omega":
            return max((abs(v) for k, v in coords.items() if k < j), default=F.zero())
        return max((abs(v) for v in coords.values()), default=F.zero())


L1 = BaseSpace("l1", "l1")
L2 = BaseSpace("l2", "l2")
OMEGA = BaseSpace("omega", "omega")


def finite_base(d: int) -> BaseSpace:
    if d < 1:
        raise ValueError("finite base needs dimension >= 1")
    return BaseSpace(f"K{d}", "finite", d)


class PowerSpace(SpaceDescriptor):
    """X^N with ``p_j((x_n)_n) = max{q_j(x_n) : n <= j}``.

    Labels are ``(copy, coord)`` with ``copy >= 1``.  For infinite-dimensional
    factors the enumeration is the Cantor diagonal on ``(copy - 1, coord)``;
    for ``K^d`` it is copy-major.
    """

    def __init__(self, base: BaseSpace, field_: Field):
        self.base = base
        self.uses_sqrt = base.kind == "l2"
        self.name = f"{base.name}_power"
        self.config_name = self.name
        super().__init__(field_)
        self.level_infinite = base.dim == INF and not base.omega_like

    # enumeration
    def enum(self, label):
        if len(label) != 2:
            raise DescriptorMismatch(f"{self.name}: invalid label {label!r}")
        c, k = label
        if c < 1 or k < 0 or k >= self.base.dim:
            raise DescriptorMismatch(f"{self.name}: invalid label {label!r}")
        if self.base.dim == INF:
            return diagonal_enum(c - 1, k)
        return (c - 1) * int(self.base.dim) + k

    def label(self, enum_no):
        self._check_enum(enum_no)
        if self.base.dim == INF:
            a, b = diagonal_pair(enum_no)
            return (a + 1, b)
        d = int(self.base.dim)
        return (enum_no // d + 1, enum_no % d)

    def level(self, enum_no):
        c, k = self.label(enum_no)
        return max(c - 1, self.base.level_of(k))

    def _copy_members(self, c: int, start: int, k_max=None) -> Iterator[int]:
        """Ascending enums of copy ``c`` (coords ``<= k_max``) that are ``>= start``."""
        if self.base.dim != INF:
            d = int(self.base.dim)
            lo = (c - 1) * d
            hi = lo + d if k_max is None else lo + min(d, k_max + 1)
            yield from range(max(lo, start), hi)
            return
        # smallest k with diagonal_enum(c - 1, k) >= start
        lo_k, hi_k = 0, 1
        while diagonal_enum(c - 1, hi_k) < start:
            hi_k *= 2
        while lo_k < hi_k:
            mid = (lo_k + hi_k) // 2
            if diagonal_enum(c - 1, mid) >= start:
                hi_k = mid
            else:
                lo_k = mid + 1
        k = lo_k
        while k_max is None or k <= k_max:
            yield diagonal_enum(c - 1, k)
            k += 1

    def level_members(self, level, start=0):
        if not self.base.omega_like:
            yield from self._copy_members(level + 1, start)
            return
        # ω factor: max(c - 1, k) == level, a finite set
        found = set(self._copy_members(level + 1, start, k_max=level))
        for c in range(1, level + 1):
            e = self.enum((c, level))
            if e >= start:
                found.add(e)
        yield from sorted(found)

    def _seminorm(self, j, coords):
        F = self.field
        per_copy: dict[int, dict] = {}
        for e, v in coords.items():
            c, k = self.label(e)
            if c <= j:
                per_copy.setdefault(c, {})[k] = v
        return max((self.base.q(j, cc, F) for cc in per_copy.values()), default=F.zero())

    def codim(self, j):
        qd_next = self.base.quotient_dim(j + 1)
        if qd_next == INF:
            return INF
        return j * (qd_next - self.base.quotient_dim(j)) + qd_next


def power_space(base: BaseSpace, field_: Field | str = "binary64") -> PowerSpace:
    if isinstance(field_, str):
        field_ = get_field(field_)
    return PowerSpace(base, field_)


# ---------------------------------------------------------------------------
# registry / config
# ---------------------------------------------------------------------------

_DEFAULT_MODE = {
    "omega": "rational",
    "l1_power": "rational",
    "l2_power": "binary64",
    "omega_plus_l2": "binary64",
    "omega_power": "rational",
}


def make_space(name: str, scalar_mode: str | None = None) -> SpaceDescriptor:
    """Build one of the named descriptors."""
    if name not in _DEFAULT_MODE:
        raise ConfigError(f"unknown space {name!r}; expected one of {sorted(_DEFAULT_MODE)}")
    try:
        F = get_field(scalar_mode or _DEFAULT_MODE[name])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if name == "omega":
        return OmegaSpace(F)
    if name == "omega_plus_l2":
        return OmegaPlusL2(F)
    base = {"l1_power": L1, "l2_power": L2, "omega_power": OMEGA}[name]
    return PowerSpace(base, F)


def space_from_config(cfg: dict, scalar_mode: str | None = None) -> SpaceDescriptor:
    if not isinstance(cfg, dict) or "space" not in cfg:
        raise ConfigError("space config must be an object with a 'space' key")
    return make_space(cfg["space"], scalar_mode or cfg.get("scalar_mode"))


def load_space_config(path: str | Path, scalar_mode: str | None = None) -> SpaceDescriptor:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read space config {path}: {exc}") from None
    return space_from_config(cfg, scalar_mode)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def seminorm(space: SpaceDescriptor, j: int, v: FinVector):
    return space.seminorm(j, v)


def level_of(space: SpaceDescriptor, i: int) -> int:
    return space.level(i)


def basis_constant(space: SpaceDescriptor, j: int):
    return space.basis_constant(j)


def fresh_indices(space: SpaceDescriptor, level: int, count: int, exclude=(), min_enum: int = 0) -> list[int]:
    """The ``count`` smallest-enumerated members of ``E_level`` outside ``exclude``."""
    if count <= 0:
        return []
    out = []
    for e in space.level_members(level, min_enum):
        if e in exclude:
            continue
        out.append(e)
        if len(out) == count:
            return out
    raise LevelExhausted(
        f"{space.name}: level set E_{level} has only {len(out)} fresh indices >= {min_enum}, {count} requested"
    )


@dataclass
class ISPVerdict:
    satisfies_isp: bool
    j0: int | None = None
    infinite_levels: list[int] = field(default_factory=list)
    truncated_at: int | None = None

    def describe(self) -> str:
        if self.satisfies_isp:
            return f"ISP: yes (ker p_(j+1) has finite codimension in ker p_j for every j >= {self.j0})"
        every = self.infinite_levels == list(range(1, self.truncated_at + 1))
        if every:
            return "ISP: no (infinite codimension at every level)"
        shown = ", ".join(map(str, self.infinite_levels))
        return f"ISP: no (infinite codimension at levels {shown}, ...)"


def classify_isp(space: SpaceDescriptor, show: int = 8) -> ISPVerdict:
    """Decide whether ``ker p_{j+1}`` is eventually of finite codimension in ``ker p_j``."""
    if not getattr(space, "has_codim", False):
        raise Unclassifiable(f"{space.name}: no codimension metadata")
    stable = space.codim_stable_from
    if space.codim(stable) != INF:
        j0 = stable
        while j0 > 1 and space.codim(j0 - 1) != INF:
            j0 -= 1
        return ISPVerdict(True, j0=j0)
    horizon = max(stable, show)
    infinite = [j for j in range(1, horizon + 1) if space.codim(j) == INF]
    return ISPVerdict(False, infinite_levels=infinite, truncated_at=horizon)
