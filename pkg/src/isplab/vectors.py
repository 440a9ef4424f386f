"""Finitely supported vectors over integer keys.

Keys are basis ``enum_no`` values in the e-frame and construction positions in
the u- and γ-frames.  Zero entries are never stored.
"""

from __future__ import annotations

E_FRAME = "e"
U_FRAME = "u"
GAMMA_FRAME = "gamma"
FRAMES = (E_FRAME, U_FRAME, GAMMA_FRAME)


class FinVector:
    __slots__ = ("coords", "frame")

    def __init__(self, coords=None, frame: str = E_FRAME):
        if frame not in FRAMES:
            raise ValueError(f"unknown frame {frame!r}")
        self.frame = frame
        self.coords = {k: v for k, v in (coords or {}).items() if v != 0}

    @classmethod
    def basis(cls, key: int, coeff=1, frame: str = E_FRAME) -> "FinVector":
        return cls({key: coeff}, frame)

    def _check(self, other: "FinVector"):
        if self.frame != other.frame:
            raise ValueError(f"frame mismatch: {self.frame} vs {other.frame}")

    def __add__(self, other: "FinVector") -> "FinVector":
        self._check(other)
        out = dict(self.coords)
        for k, v in other.coords.items():
            out[k] = out.get(k, 0) + v
        return FinVector(out, self.frame)

    def __sub__(self, other: "FinVector") -> "FinVector":
        return self + (-other)

    def __neg__(self) -> "FinVector":
        return FinVector({k: -v for k, v in self.coords.items()}, self.frame)

    def __mul__(self, c) -> "FinVector":
        return FinVector({k: c * v for k, v in self.coords.items()}, self.frame)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "FinVector":
        return FinVector({k: v / c for k, v in self.coords.items()}, self.frame)

    def __eq__(self, other):
        if not isinstance(other, FinVector):
            return NotImplemented
        return self.frame == other.frame and self.coords == other.coords

    def __hash__(self):
        return hash((self.frame, tuple(sorted(self.coords.items()))))

    def __bool__(self):
        return bool(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, key):
        return self.coords.get(key, 0)

    def items(self):
        return sorted(self.coords.items())

    def support(self) -> list[int]:
        return sorted(self.coords)

    def restrict(self, keep) -> "FinVector":
        """Keep only the keys for which ``keep(key)`` is true."""
        return FinVector({k: v for k, v in self.coords.items() if keep(k)}, self.frame)

    def truncate(self, upto: int) -> "FinVector":
        return self.restrict(lambda k: k <= upto)

    def l1(self):
        return sum((abs(v) for v in self.coords.values()), 0)

    def __repr__(self):
        body = ", ".join(f"({k}: {v})" for k, v in self.items())
        return f"FinVector[{self.frame}]({body})"
