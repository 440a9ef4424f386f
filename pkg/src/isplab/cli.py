"""Command-line front door.

    isplab classify CONFIG
    isplab build CONFIG --stages N --out STATE
    isplab verify STATE
    isplab cyclic STATE --vector "e(1,0)+1/2*e(2,3)" --norm 1 --eps 0.25
    isplab report STATE [--witness W] [--format text|json]

CONFIG is a JSON file such as ``{"space": "l2_power"}`` or one of the built-in
names.  Exit codes: 2 config, 3 horizon, 4 certificate, 5 witness.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import random
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .analysis import cyclic_approx, witness_error
from .certificates import verify_state
from .construction import advance_stage, init_construction
from .errors import ConfigError, HorizonError, IsplabError
from .operator import Polynomial
from .persist import dumps_state, load_state
from .spaces import _DEFAULT_MODE, classify_isp, load_space_config, make_space
from .state import DEFAULT_MAX_EXACT_BITS, DEFAULT_MAX_POSITIONS
from .suites import continuity_suite, kn_d_suite, tail_suite
from .vectors import E_FRAME, FinVector

_TERM = re.compile(r"\s*([+-])?\s*(?:([0-9]+(?:\.[0-9]*)?(?:/[0-9]+)?)\s*\*?\s*)?e\(\s*([0-9,\s]+)\)\s*")


@dataclass
class RunConfig:
    command: str
    target: str
    stages: int = 1
    vector: str | None = None
    norm: int = 1
    eps: Fraction | None = None
    seed: int = 0
    out: str | None = None
    scalar_mode: str | None = None
    fmt: str = "text"
    samples: int = 20
    witness: str | None = None
    max_positions: int = DEFAULT_MAX_POSITIONS
    max_exact_bits: int = DEFAULT_MAX_EXACT_BITS
    keep_partial: bool = False

    def validate(self):
        if self.stages < 1:
            raise ConfigError("--stages must be >= 1")
        if self.norm < 1:
            raise ConfigError("--norm must be >= 1")
        if self.eps is not None and self.eps <= 0:
            raise ConfigError("--eps must be > 0")
        if self.command == "cyclic" and (self.vector is None or self.eps is None):
            raise ConfigError("cyclic needs --vector and --eps")


def parse_vector(text: str, space) -> FinVector:
    """Parse ``c*e(n,k) + ...`` (or ``e(n)`` on ω) into an e-frame vector."""
    F = space.field
    pos, coords = 0, {}
    text = text.strip()
    if not text:
        raise ConfigError("empty vector literal")
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ConfigError(f"cannot parse vector literal at {text[pos:]!r}")
        if pos > 0 and m.group(1) is None:
            raise ConfigError(f"missing '+' or '-' before {text[pos:]!r}")
        sign, coef, label = m.groups()
        c = Fraction(coef) if coef else Fraction(1)
        if sign == "-":
            c = -c
        try:
            lab = tuple(int(x) for x in label.split(","))
        except ValueError:
            raise ConfigError(f"bad label e({label})") from None
        e = space.enum(lab)
        coords[e] = coords.get(e, F.zero()) + F.coerce(c)
        pos = m.end()
    v = FinVector(coords, E_FRAME)
    if not v:
        raise ConfigError(f"vector literal {text!r} is zero")
    return v


def _load_space(target: str, scalar_mode):
    if target in _DEFAULT_MODE and not Path(target).exists():
        return make_space(target, scalar_mode)
    return load_space_config(target, scalar_mode)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_classify(cfg: RunConfig, out) -> int:
    space = _load_space(cfg.target, cfg.scalar_mode)
    print(classify_isp(space).describe(), file=out)
    return 0


def cmd_build(cfg: RunConfig, out) -> int:
    space = _load_space(cfg.target, cfg.scalar_mode)
    dest = Path(cfg.out or "state.json")
    state = None
    try:
        state = init_construction(space, cfg.max_positions, cfg.max_exact_bits)
        print(f"stage 1: Delta_2={state.Delta[2]} a_1={state.a_(1)}", file=out)
        while state.stages_done < cfg.stages:
            state = advance_stage(state)
            n = state.stages_done
            print(f"stage {n}: Delta_{n + 1}={state.Delta[n + 1]} a_{n}={state.a_(n)}", file=out)
    except HorizonError:
        if state is not None and cfg.keep_partial:
            dest.write_text(dumps_state(state))
            print(f"kept {state.stages_done} committed stages in {dest}", file=out)
        raise
    dest.write_text(dumps_state(state))
    print(f"wrote {dest} ({state.stages_done} stages)", file=out)
    return 0


def cmd_verify(cfg: RunConfig, out) -> int:
    state = load_state(cfg.target)
    result = verify_state(state, state.digests)
    for rep in result.reports:
        for c in rep.checks:
            flag = "ok" if c.passed else "FAIL"
            print(f"stage {rep.stage} {c.condition:<14} {flag:<4} margin={c.margin:.3f} count={c.count}", file=out)
            if not c.passed and c.note:
                print(f"    {c.note}", file=out)
    for n in result.digest_mismatch:
        print(f"stage {n} digest         FAIL", file=out)
    ok = result.passed
    rng = random.Random(cfg.seed)
    suites = []
    for N in range(1, min(3, state.stages_done) + 1):
        suites.append(continuity_suite(state, N, cfg.samples, rng))
    for n in range(1, state.stages_done + 1):
        suites.append(kn_d_suite(state, n, cfg.samples, rng))
    for n in range(1, state.stages_done):
        suites.append(tail_suite(state, n, cfg.samples, rng))
    for s in suites:
        flag = "ok" if s.passed else "FAIL"
        print(f"suite {s.name:<18} {flag:<4} cases={s.cases} skipped={s.skipped}", file=out)
        ok = ok and s.passed
    print("verify: PASS" if ok else "verify: FAIL", file=out)
    return 0 if ok else 4


def cmd_cyclic(cfg: RunConfig, out) -> int:
    state = load_state(cfg.target)
    F = state.field
    x = parse_vector(cfg.vector, state.space)
    w = cyclic_approx(state, x, cfg.norm, F.coerce(cfg.eps))
    doc = w.to_json(F)
    doc["state"] = str(cfg.target)
    text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
        print(f"achieved_error={float(w.achieved_error):.6g} < eps={float(w.eps):g}; wrote {cfg.out}", file=out)
    else:
        out.write(text)
    return 0


def _log2(F, x):
    return "-inf" if x == 0 else f"{F.log2(x):.2f}"


def _report_doc(state, witness):
    F = state.field
    stages = []
    for n in range(1, state.stages_done + 1):
        rep = state.certificates[n - 1] if n - 1 < len(state.certificates) else None
        margins = [c.margin for c in rep.checks] if rep else []
        finite = [m for m in margins if not math.isinf(m)]
        stages.append(
            {
                "n": n,
                "Delta": state.Delta[n],
                "a": state.a_(n),
                "s_next": state.s_(n + 1),
                "N": state.N_(n),
                "log2_D": _log2(F, state.D_(n)),
                "log2_L": _log2(F, state.L_(n)),
                "passed": bool(rep and rep.passed),
                "min_margin": min(finite) if finite else None,
            }
        )
    doc = {
        "space": state.space.config(),
        "stages_done": state.stages_done,
        "horizon": state.horizon,
        "stages": stages,
    }
    if witness is not None:
        Q = Polynomial(tuple(F.parse(c) for c in witness["Q"]))
        x = FinVector({k: F.parse(v) for k, v in witness["x"]}, E_FRAME)
        replay = witness_error(state, x, Q, witness["N"])
        doc["witness"] = {
            "n_k": witness["n_k"],
            "N": witness["N"],
            "eps": witness["eps"],
            "achieved_error": witness["achieved_error"],
            "replayed_error": F.to_str(replay),
            "replay_matches": F.close(replay, F.parse(witness["achieved_error"])),
            "deg_Q": Q.deg,
            "budget_flag": witness["budget_flag"],
        }
    return doc


def cmd_report(cfg: RunConfig, out) -> int:
    state = load_state(cfg.target)
    witness = None
    if cfg.witness:
        try:
            witness = json.loads(Path(cfg.witness).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read witness {cfg.witness}: {exc}") from None
    doc = _report_doc(state, witness)
    if cfg.fmt == "json":
        out.write(json.dumps(doc, sort_keys=True, indent=1) + "\n")
        return 0
    print(f"space {doc['space']['space']} [{doc['space']['scalar_mode']}], "
          f"{doc['stages_done']} stages, horizon {doc['horizon']}", file=out)
    print(f"{'n':>3} {'Delta_n':>9} {'a_n':>9} {'s_n+1':>9} {'N_n':>4} {'log2 D':>9} {'log2 L':>9}  certs", file=out)
    for s in doc["stages"]:
        mm = "-" if s["min_margin"] is None else f"{s['min_margin']:.2f}"
        status = "pass" if s["passed"] else "FAIL"
        print(
            f"{s['n']:>3} {s['Delta']:>9} {s['a']:>9} {s['s_next']:>9} {s['N']:>4} "
            f"{s['log2_D']:>9} {s['log2_L']:>9}  {status} (min margin {mm} bits)",
            file=out,
        )
    if witness is not None:
        w = doc["witness"]
        print(
            f"witness: n_k={w['n_k']} N={w['N']} eps={w['eps']} achieved={w['achieved_error']} "
            f"replay {'matches' if w['replay_matches'] else 'DIFFERS'}, deg Q={w['deg_Q']}",
            file=out,
        )
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "build": cmd_build,
    "verify": cmd_verify,
    "cyclic": cmd_cyclic,
    "report": cmd_report,
}


def run_command(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg, out)
    except IsplabError as exc:
        print(f"isplab {cfg.command}: {exc}", file=sys.stderr)
        return exc.exit_code


def _eps(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isplab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="decide the ISP criterion for a space")
    c.add_argument("target", metavar="CONFIG")
    c.add_argument("--scalar-mode", choices=["rational", "binary64"])

    b = sub.add_parser("build", help="build and certify stages")
    b.add_argument("target", metavar="CONFIG")
    b.add_argument("--stages", type=int, default=1)
    b.add_argument("--out", default="state.json")
    b.add_argument("--scalar-mode", choices=["rational", "binary64"])
    b.add_argument("--seed", type=int, default=0, help="recorded for symmetry; the construction is deterministic")
    b.add_argument("--max-positions", type=int, default=DEFAULT_MAX_POSITIONS)
    b.add_argument("--max-exact-bits", type=int, default=DEFAULT_MAX_EXACT_BITS)
    b.add_argument("--keep-partial", action="store_true", help="save the committed stages if the budget runs out")

    v = sub.add_parser("verify", help="re-verify certificates and run the randomised bound suites")
    v.add_argument("target", metavar="STATE")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=20)

    y = sub.add_parser("cyclic", help="approximate u_0 by Q(T)x")
    y.add_argument("target", metavar="STATE")
    y.add_argument("--vector", required=True)
    y.add_argument("--norm", type=int, default=1)
    y.add_argument("--eps", type=_eps, required=True)
    y.add_argument("--out")

    r = sub.add_parser("report", help="summarise a state file")
    r.add_argument("target", metavar="STATE")
    r.add_argument("--witness")
    r.add_argument("--format", dest="fmt", choices=["text", "json"], default="text")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    return run_command(RunConfig(**fields))


if __name__ == "__main__":
    sys.exit(main())
