"""Command line front end: ``cliffordtm <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import clifford as cl
from .clifford import Multivector
from .config import RunConfig
from .exceptions import CliffordError, ConfigError

log = logging.getLogger("cliffordtm")

FLOAT_FMT = "{:.15g}"


def _f(x) -> str:
    return FLOAT_FMT.format(float(x))


def _write_json(obj, path):
    text = json.dumps(obj, indent=2)
    if path is None or str(path) == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliffordError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliffordError(f"{path}: line {exc.lineno}: {exc.msg}") from None


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    return cfg.replace(m=args.m, domain=args.domain, quad_degree=args.quad_degree, seed=args.seed, out=args.out)


# ---------------------------------------------------------------------------


def cmd_verify(cfg: RunConfig, args) -> int:
    from .verify import run_verify

    report = run_verify(cfg, only=args.only, progress=lambda r: print(r.line(), flush=True))
    _write_json(report, cfg.out or "verify_report.json")
    print(f"{'PASS' if report['passed'] else 'FAIL'}: {len(report['checks'])} checks in {report['seconds']:.1f} s")
    return 0 if report["passed"] else 1


def cmd_algebra(cfg: RunConfig, args) -> int:
    if args.a is None:
        from .verify import run_verify

        report = run_verify(cfg, only="algebra", progress=lambda r: print(r.line(), flush=True))
        return 0 if report["passed"] else 1
    a = Multivector.from_json(_read_json(args.a))
    b = Multivector.from_json(_read_json(args.b)) if args.b else None
    if args.op == "mul":
        if b is None:
            raise CliffordError("mul needs --b")
        out = a * b
    elif args.op == "inverse":
        out = cl.try_inverse(a)
    elif args.op == "conj":
        out = a.conj()
    else:
        raise CliffordError(f"unknown op {args.op}")
    _write_json(out.to_json(), cfg.out)
    return 0


def cmd_monobasis(cfg: RunConfig, args) -> int:
    from .monogenics import orthobasis_Mk

    basis = orthobasis_Mk(cfg.m, args.k)
    _write_json(basis.to_json(), cfg.out or "basis.json")
    return 0


def _load_poles(path) -> tuple:
    obj = _read_json(path)
    if isinstance(obj, dict):
        poles, dirs = obj.get("poles"), obj.get("directions")
    else:
        poles, dirs = obj, None
    if not isinstance(poles, list) or not poles:
        raise CliffordError(f"{path}: expected a nonempty list of poles")
    return [np.asarray(p, dtype=float) for p in poles], dirs


def cmd_tm(cfg: RunConfig, args) -> int:
    from .tm import TMSystem

    poles, dirs = _load_poles(args.poles)
    if any(p.shape != (cfg.m + 1,) for p in poles):
        raise CliffordError(f"{args.poles}: poles must have m+1 = {cfg.m + 1} coordinates")
    tm = TMSystem.from_poles(cfg.domain, poles, dirs)
    _write_json(tm.to_json(), cfg.out or "tm.json")
    return 0


def afd_rows(state) -> tuple:
    m = state.m
    names = [cl.blade_name(k) for k in range(1, 1 << m)]
    header = (
        ["step"]
        + [f"pole_{i}" for i in range(m + 1)]
        + [f"dir_{i}" for i in range(m + 1)]
        + ["coeff_sc"]
        + [f"coeff_{n}" for n in names]
        + ["term_energy", "residual_energy"]
    )
    rows = []
    for r in state.to_rows():
        d = r["direction"] or [""] * (m + 1)
        rows.append(
            [str(r["step"])]
            + [_f(v) for v in r["pole"]]
            + [v if v == "" else _f(v) for v in d]
            + [_f(r["coeff_sc"])]
            + [_f(v) for v in r["coeff_nsc"]]
            + [_f(r["term_energy"]), _f(r["residual_energy"])]
        )
    return header, rows


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def cmd_afd(cfg: RunConfig, args) -> int:
    from .afd import afd_run, grid_from_json
    from .hardy import hardy_from_json

    f = hardy_from_json(_read_json(args.input))
    if f.m != cfg.m:
        raise ConfigError("m", f"input function lives over A_{f.m} but --m is {cfg.m}")
    if f.domain.value != cfg.domain:
        raise ConfigError("domain", f"input function is on the {f.domain.value} domain")
    grid = grid_from_json({"m": cfg.m, **_read_json(args.grid)}) if args.grid else cfg.search_grid()
    n_max = args.n_max if args.n_max is not None else cfg.n_max
    state = afd_run(f, n_max, cfg.stop_tol, grid, direction_degree=cfg.direction_degree)
    out = cfg.out or "run.csv"
    header, rows = afd_rows(state)
    _write_csv(out, header, rows)
    if args.emit_plot_data:
        res = state.residual_energies
        plot = Path(out).with_name(Path(out).stem + "_residual.csv")
        _write_csv(plot, ["n", "residual_energy", "relative"], [[str(i), _f(v), _f(v / state.norm_sq if state.norm_sq else 0.0)] for i, v in enumerate(res)])
    log.info("afd: %d steps, residual %.3e", state.n_steps, state.residual_energy)
    return 0


def read_signal(path):
    """Signal CSV: ``index,value`` rows; grid header as a leading ``# {json}`` line or ``<path>.json``."""
    path = Path(path)
    header = None
    values = {}
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise CliffordError(f"{path}: {exc.strerror}") from None
    body = []
    for ln in lines:
        s = ln.strip()
        if not s:
            continue
        if s.startswith("#"):
            try:
                header = json.loads(s[1:])
            except json.JSONDecodeError as exc:
                raise CliffordError(f"{path}: bad JSON header: {exc.msg}") from None
            continue
        body.append(s)
    if header is None:
        side = path.with_suffix(".json")
        if not side.exists():
            raise CliffordError(f"{path}: no grid header line and no {side.name}")
        header = _read_json(side)
    for lineno, row in enumerate(csv.reader(body), 1):
        if row and row[0].strip().lower() in ("index", "node"):
            continue
        try:
            values[int(row[0])] = float(row[1])
        except (ValueError, IndexError):
            raise CliffordError(f"{path}: malformed row {lineno}: {row}") from None
    return header, values


def cmd_embed(cfg: RunConfig, args) -> int:
    header, values = read_signal(args.signal)
    n = max(values) + 1 if values else 0
    samples = np.zeros(n)
    for k, v in values.items():
        samples[k] = v
    if cfg.domain == "ball":
        from .embed import BoundarySignal, schwarz_lift
        from .sphere import build_grid

        grid = build_grid(int(header.get("m", cfg.m)), int(header.get("degree", cfg.quad_degree)))
        lift = schwarz_lift(BoundarySignal(grid, samples))
    else:
        from .embed import FlatGrid, cauchy_lift_halfspace

        grid = FlatGrid(int(header.get("m", cfg.m)), float(header["half_width"]), int(header["n_panels"]), int(header.get("order", 8)))
        lift = cauchy_lift_halfspace(grid, samples)
    _write_json(lift.to_json(), cfg.out or "hardy.json")
    return 0


COMMANDS = {
    "verify": cmd_verify,
    "algebra": cmd_algebra,
    "monobasis": cmd_monobasis,
    "tm": cmd_tm,
    "afd": cmd_afd,
    "embed": cmd_embed,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, help="algebra dimension (A_m, R^{m+1})")
    common.add_argument("--domain", choices=["ball", "halfspace"])
    common.add_argument("--quad-degree", type=int, dest="quad_degree")
    common.add_argument("--seed", type=int)
    common.add_argument("--config", help="JSON file mirroring RunConfig")
    common.add_argument("--out", help="output path")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cliffordtm", description="Clifford TM systems and adaptive decomposition.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", parents=[common], help="run the self-verification suite")
    s.add_argument("--only", choices=["algebra", "monogenics", "kernels", "tm", "afd", "embed"])

    s = sub.add_parser("algebra", parents=[common], help="algebra checks or a single operation")
    s.add_argument("--a", help="multivector JSON")
    s.add_argument("--b", help="second multivector JSON (mul)")
    s.add_argument("--op", choices=["mul", "inverse", "conj"], default="mul")

    s = sub.add_parser("monobasis", parents=[common], help="orthogonal basis of degree-k spherical monogenics")
    s.add_argument("--k", type=int, required=True)

    s = sub.add_parser("tm", parents=[common], help="build a TM system from poles")
    s.add_argument("--poles", required=True)

    s = sub.add_parser("afd", parents=[common], help="adaptive decomposition of a Hardy function")
    s.add_argument("--input", required=True)
    s.add_argument("--n-max", type=int, dest="n_max")
    s.add_argument("--grid", help="search grid JSON")
    s.add_argument("--emit-plot-data", action="store_true", dest="emit_plot_data")

    s = sub.add_parser("embed", parents=[common], help="lift real boundary samples into the Hardy space")
    s.add_argument("--signal", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](cfg, args)
    except (CliffordError, ValueError) as exc:
        print(f"cliffordtm {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
