"""Command line entry point: construct | check | diagnose | reproduce.

Exit codes: 0 pass, 1 expectation or embedded assertion failed, 2 configuration
error, 3 inconclusive verdict under --strict.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .diagnostics import decay_sup, gagliardo_trend
from .exceptions import ConfigError, ShiftInvError
from .fiber import DEFAULT_TAU, domain_points, frame_report, gram_fibers
from .genlib import PRESETS, GeneratorSet
from .grid import GridSpec
from .invariance import BREAKPOINT_RADIUS, check_gamma_invariance
from .lattice import FullSpace, format_group, parse_group
from .scenarios import SCENARIOS

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_INCONCLUSIVE = 0, 1, 2, 3


def _parse_value(text: str):
    if "," in text:
        return tuple(_parse_value(t) for t in text.split(",") if t)
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError("params", f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def load_generators(args) -> tuple[GeneratorSet, dict]:
    """Resolve --gens / --preset into a generator set and its config echo."""
    if args.gens and args.preset:
        raise ConfigError("gens", "give either --gens or --preset, not both")
    if args.gens:
        path = Path(args.gens)
        if not path.exists():
            raise ConfigError("gens", f"no such file: {path}")
        try:
            phi = GeneratorSet.from_json(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("gens", f"invalid JSON: {exc}") from None
        source = {"file": str(path)}
    elif args.preset:
        if args.preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}")
        params = parse_params(args.params)
        try:
            phi = PRESETS[args.preset](**params)
        except TypeError as exc:
            raise ConfigError("params", str(exc)) from None
        except ValueError as exc:
            raise ConfigError("params", str(exc)) from None
        source = {"preset": args.preset, "params": {k: list(v) if isinstance(v, tuple) else v
                                                    for k, v in sorted(params.items())}}
    else:
        raise ConfigError("gens", "a generator source is required (--gens PATH or --preset NAME)")
    if getattr(args, "lattice", None):
        lat = parse_group(args.lattice, phi.dim)
        try:
            phi = GeneratorSet(phi.gens, lat)
        except (ValueError, ShiftInvError) as exc:
            raise ConfigError("lattice", str(exc)) from None
    return phi, source


def _grid(args) -> GridSpec:
    n = getattr(args, "grid", None)
    if n is not None and n < 2:
        raise ConfigError("grid", "need at least 2 samples per axis")
    return GridSpec(n, bool(getattr(args, "jitter", False)), int(getattr(args, "seed", 0)))


def _tau(args) -> float:
    tau = getattr(args, "tau", DEFAULT_TAU)
    if not 0 < tau < 1:
        raise ConfigError("tau", "must lie in (0, 1)")
    return tau


def _resolved_config(args, source, phi=None, **extra) -> dict:
    cfg = {"command": args.command, "source": source, "seed": getattr(args, "seed", 0)}
    if phi is not None:
        cfg["lattice"] = format_group(phi.lattice)
        cfg["grid"] = _grid(args).describe(phi.dim)
    for key in ("tau", "radius", "gamma", "expect", "strict", "format"):
        if hasattr(args, key):
            cfg[key] = getattr(args, key)
    cfg.update(extra)
    return cfg


def _dump(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None, suffix: str = "") -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if suffix:
        path = path.with_name(path.stem + suffix)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _csv_with_echo(csv_text: str, config: dict) -> str:
    head = "# " + json.dumps({"config": config, "version": __version__}, sort_keys=True) + "\n"
    return head + csv_text


# --- subcommands --------------------------------------------------------------------

def cmd_construct(args) -> int:
    phi, source = load_generators(args)
    payload = phi.to_dict()
    payload["config"] = _resolved_config(args, source)
    payload["version"] = __version__
    _emit(_dump(payload), args.out)
    return EXIT_OK


def _expectation(expect: str | None, frame_verdict: str, inv_verdict: str, strict: bool) -> int:
    if expect is None:
        return EXIT_INCONCLUSIVE if strict and inv_verdict == "Inconclusive" else EXIT_OK
    if expect in ("invariant", "not-invariant"):
        if inv_verdict == "Inconclusive":
            return EXIT_INCONCLUSIVE if strict else EXIT_MISMATCH
        want = "Invariant" if expect == "invariant" else "NotInvariant"
        return EXIT_OK if inv_verdict == want else EXIT_MISMATCH
    if expect == "riesz":
        return EXIT_OK if frame_verdict == "Riesz" else EXIT_MISMATCH
    return EXIT_OK if frame_verdict in ("Riesz", "FrameNotRiesz") else EXIT_MISMATCH


def cmd_check(args) -> int:
    phi, source = load_generators(args)
    grid, tau = _grid(args), _tau(args)
    gamma = parse_group(args.gamma, phi.dim, "gamma") if args.gamma else FullSpace(phi.dim)
    try:
        inv = check_gamma_invariance(phi, gamma, grid, tau, args.radius)
    except ShiftInvError as exc:
        raise ConfigError("gamma", str(exc)) from None
    fr = frame_report(phi, grid, tau)
    config = _resolved_config(args, source, phi, gamma=format_group(gamma))
    payload = {"config": config, "version": __version__, "frame": fr.to_dict(), "invariance": inv.to_dict()}
    if args.format == "csv":
        _emit(_csv_with_echo(inv.to_csv(), config), args.out)
        if args.out:
            _emit(_dump(payload), args.out, ".json")
    else:
        _emit(_dump(payload), args.out)
    if args.dump_fibers:
        batch = gram_fibers(phi, domain_points(phi, grid))
        _emit(_csv_with_echo(batch.to_csv(tau), config), args.dump_fibers)
    code = _expectation(args.expect, fr.verdict, inv.verdict, args.strict)
    print(f"frame: {fr.verdict}  invariance({format_group(gamma)}): {inv.verdict}", file=sys.stderr)
    return code


def cmd_diagnose(args) -> int:
    phi, source = load_generators(args)
    if phi.dim != 1:
        raise ConfigError("gens", "diagnostics run on 1-D generator sets")
    exps = args.s or [0.5]
    for s in exps:
        if s < 0:
            raise ConfigError("s", "exponents must be nonnegative")
    config = _resolved_config(args, source, phi, exponents=list(exps))
    results, rows = [], []
    code = EXIT_OK
    for gen in phi.gens:
        entry = {"label": gen.label, "decay": [], "sobolev": []}
        for s in exps:
            dec = decay_sup(gen, s, _grid(args), radius=args.radius_decay)
            entry["decay"].append(dec.to_dict())
            rows += [(gen.label, "decay", s, j, v, dec.trend) for j, v in zip(dec.levels, dec.block_sups)]
            if args.expect_decay and dec.trend != args.expect_decay:
                code = EXIT_MISMATCH
            if 0 < s < 1:
                sob = gagliardo_trend(gen, s)
                entry["sobolev"].append(sob.to_dict())
                rows += [(gen.label, "sobolev", s, h, v, sob.trend) for (_, h), v in zip(sob.schedule, sob.values)]
                if args.expect_sobolev and sob.trend != args.expect_sobolev:
                    code = EXIT_MISMATCH
        results.append(entry)
    payload = {"config": config, "version": __version__, "generators": results}
    if args.format == "csv":
        lines = ["label,table,s,key,value,trend"]
        lines += [",".join([str(r[0]), r[1], repr(float(r[2])), repr(r[3]), repr(float(r[4])), r[5]]) for r in rows]
        _emit(_csv_with_echo("\n".join(lines) + "\n", config), args.out)
    else:
        _emit(_dump(payload), args.out)
    return code


def cmd_reproduce(args) -> int:
    checks, files = SCENARIOS[args.name]()
    out = Path(args.out or f"reproduce-{args.name}")
    out.mkdir(parents=True, exist_ok=True)
    config = {"command": "reproduce", "name": args.name}
    for fname, text in sorted(files.items()):
        (out / fname).write_text(_csv_with_echo(text, config) if fname.endswith(".csv") else text)
    report = {"config": config, "version": __version__, "checks": [c.to_dict() for c in checks],
              "passed": all(c.passed for c in checks), "files": sorted(files)}
    (out / "report.json").write_text(_dump(report))
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value} (threshold {c.threshold})")
    return EXIT_OK if report["passed"] else EXIT_MISMATCH


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shiftinv", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    src = argparse.ArgumentParser(add_help=False)
    src.add_argument("--gens", help="generator JSON file")
    src.add_argument("--preset", help=f"preset name: {', '.join(sorted(PRESETS))}")
    src.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE",
                     help="preset parameters, e.g. k=1 d=2 or n=2,3")
    src.add_argument("--lattice", help="override the base lattice, e.g. Z or '[[1,0],[0,2]]'")
    src.add_argument("--out", help="output path (default: stdout)")

    scan = argparse.ArgumentParser(add_help=False)
    scan.add_argument("--grid", type=int, help="samples per axis (default 4096 in 1-D, 256 in 2-D)")
    scan.add_argument("--tau", type=float, default=DEFAULT_TAU, help="relative rank tolerance")
    scan.add_argument("--radius", type=float, default=BREAKPOINT_RADIUS, help="breakpoint exclusion radius")
    scan.add_argument("--seed", type=int, default=0, help="seed for grid jitter")
    scan.add_argument("--jitter", action="store_true", help="stratified jitter of grid samples")
    scan.add_argument("--format", choices=["json", "csv"], default="json")

    c = sub.add_parser("construct", parents=[src], help="write a generator set as JSON")
    c.set_defaults(func=cmd_construct)

    k = sub.add_parser("check", parents=[src, scan], help="frame bounds and invariance verdicts")
    k.add_argument("--gamma", help="supergroup to test, e.g. R, '1/2 Z' (default R^d)")
    k.add_argument("--expect", choices=["invariant", "not-invariant", "riesz", "frame"])
    k.add_argument("--strict", action="store_true", help="exit 3 on an inconclusive verdict")
    k.add_argument("--dump-fibers", metavar="PATH", help="also write the Gramian spectra per fiber as CSV")
    k.set_defaults(func=cmd_check)

    d = sub.add_parser("diagnose", parents=[src, scan], help="decay and Sobolev trend tables")
    d.add_argument("--s", type=float, nargs="*", help="exponents (default 0.5)")
    d.add_argument("--radius-decay", type=float, default=None, help="scan radius for unbounded supports")
    d.add_argument("--expect-decay", choices=["bounded", "diverging", "inconclusive"])
    d.add_argument("--expect-sobolev", choices=["converging", "diverging", "inconclusive"])
    d.set_defaults(func=cmd_diagnose)

    r = sub.add_parser("reproduce", help="run a bundled scenario and write its outputs")
    r.add_argument("name", choices=sorted(SCENARIOS))
    r.add_argument("--out", help="output directory (default reproduce-NAME)")
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
