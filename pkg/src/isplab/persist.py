"""State files.

A state file is canonical JSON (sorted keys) so that identical builds give
byte-identical files.  Scalars are written with the field's exact text form:
``p/q`` fractions in rational mode, hex floats such as ``0x3p-2`` in binary64.
"""

from __future__ import annotations

import json
from pathlib import Path

from .certificates import CertificateReport
from .errors import ConfigError
from .spaces import space_from_config
from .state import ConstructionState

FORMAT = "isplab-state/1"


def state_to_json(state: ConstructionState) -> dict:
    F = state.field
    s = F.to_str
    return {
        "format": FORMAT,
        "space": state.space.config(),
        "stages_done": state.stages_done,
        "Delta": list(state.Delta),
        "a": list(state.a),
        "s": list(state.s),
        "N": list(state.N),
        "D": [s(x) for x in state.D],
        "L": [s(x) for x in state.L],
        "pos_to_index": [[j, e] for j, e in enumerate(state.pos_to_index)],
        "alpha": [s(x) for x in state.alpha],
        "certificates": [r.to_json() for r in state.certificates],
        "digests": list(state.digests),
        "budget": {"max_positions": state.max_positions, "max_exact_bits": state.max_exact_bits},
    }


def state_from_json(d: dict) -> ConstructionState:
    if d.get("format") != FORMAT:
        raise ConfigError(f"not an isplab state file (format {d.get('format')!r})")
    space = space_from_config(d["space"])
    F = space.field
    pairs = sorted(d["pos_to_index"])
    if [j for j, _ in pairs] != list(range(len(pairs))):
        raise ConfigError("pos_to_index must list every position once")
    budget = d.get("budget", {})
    state = ConstructionState(
        space=space,
        stages_done=d["stages_done"],
        Delta=list(d["Delta"]),
        a=list(d["a"]),
        s=list(d["s"]),
        N=list(d["N"]),
        pos_to_index=[e for _, e in pairs],
        alpha=[F.parse(x) for x in d["alpha"]],
        D=[F.parse(x) for x in d["D"]],
        L=[F.parse(x) for x in d["L"]],
        certificates=[CertificateReport.from_json(r) for r in d.get("certificates", [])],
        digests=list(d.get("digests", [])),
    )
    if "max_positions" in budget:
        state.max_positions = budget["max_positions"]
    if "max_exact_bits" in budget:
        state.max_exact_bits = budget["max_exact_bits"]
    return state


def dumps_state(state: ConstructionState) -> str:
    return json.dumps(state_to_json(state), sort_keys=True, indent=1) + "\n"


def save_state(state: ConstructionState, path: str | Path) -> None:
    Path(path).write_text(dumps_state(state))


def load_state(path: str | Path, verify: bool = False) -> ConstructionState:
    """Read a state file; with ``verify`` every stage is re-certified."""
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read state file {path}: {exc}") from None
    try:
        state = state_from_json(d)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed state file {path}: {exc}") from None
    if verify:
        from .certificates import verify_state
        from .errors import CertificateFailure

        result = verify_state(state, state.digests)
        if not result.passed:
            raise CertificateFailure(f"{path}: certificates fail on load: {result.failures()}", result.failures())
    return state
