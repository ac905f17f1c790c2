"""Command-line front end: reduce, verify, melnikov, zeros, simulate, sweep."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .assembler import MelnikovForm, assemble_M, eval_M, melnikov_poly_text
from .geometry import H_MAX, H_MIN
from .perturbation import InvalidSpec, PerturbationSpec, random_spec
from .reduction import reduce
from .simulator import FlowConfig, displacement_csv, displacement_sweep, find_limit_cycles
from .verify import SUITES, run_suite
from .zeros import DegenerateForm, bound_check, count_zeros, one_zero_spec


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "grid": 256,
    "tol": 1e-12,
    "window": [-0.95, -0.05],
    "epsilon": 1e-3,
    "section_grid": 24,
    "specs_per_n": 200,
    "n_values": [2, 3, 4, 5, 6, 7, 8, 9],
    "workers": 1,
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def __getitem__(self, key):
        return self.values.get(key, DEFAULTS.get(key))

    def canonical(self) -> dict:
        merged = dict(DEFAULTS)
        merged.update(self.values)
        return merged

    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def validate(self) -> "RunConfig":
        seed = self["seed"]
        if not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError(f"seed must be an integer in [0, 2^64), got {seed!r}")
        lo, hi = self["window"]
        if not (H_MIN < lo < hi < H_MAX):
            raise ConfigError(f"window {self['window']} must lie inside ({H_MIN}, {H_MAX})")
        spec = self.values.get("spec")
        if isinstance(spec, dict) and "file" in spec:
            path = self.base_dir / spec["file"]
            if not path.exists():
                raise ConfigError(f"spec file {path} not found")
        return self


def load_config(path: str | None, overrides: dict) -> RunConfig:
    values: dict = {}
    base = Path(".")
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file {p} not found")
        try:
            values = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {p}: {exc}") from exc
        base = p.parent
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(values, base).validate()


def spec_from_config(cfg: RunConfig) -> PerturbationSpec:
    """Spec block forms: {"file": path}, {"random": {"n", "symmetric"}}, {"one_zero": {"h_star"}}, or inline."""
    block = cfg.values.get("spec")
    if block is None:
        raise ConfigError("config has no 'spec' block")
    if "file" in block:
        return PerturbationSpec.load(cfg.base_dir / block["file"])
    if "random" in block:
        r = block["random"]
        rng = np.random.default_rng(cfg["seed"])
        return random_spec(int(r["n"]), rng, symmetric=bool(r.get("symmetric", False)))
    if "one_zero" in block:
        return one_zero_spec(float(block["one_zero"].get("h_star", -0.5)))
    return PerturbationSpec.from_document(block)


def _header(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "version": __version__, "config_hash": cfg.digest()}


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(out: Path | None, name: str, text: str) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_reduce(args) -> int:
    combo, trace = reduce((args.i, args.j))
    if args.format == "json":
        doc = {"index": [args.i, args.j], "combo": combo.to_text(), "trace": [[r, list(k)] for r, k in trace]}
        print(_dump(doc), end="")
        return 0
    print(combo.pretty())
    for rule, (i, j) in trace:
        print(f"  {rule:<10} I({i},{j})")
    return 0


def cmd_verify(args) -> int:
    cfg = load_config(args.config, {"seed": args.seed})
    report = run_suite(args.suite, seed=cfg["seed"])
    doc = {**_header(cfg, "verify"), **report.to_document()}
    text = _dump(doc)
    _write(args.out, f"verify-{args.suite}.json", text)
    print(text, end="")
    return 0 if report.passed else 1


def _zero_document(form: MelnikovForm, spec: PerturbationSpec | None, cfg: RunConfig):
    try:
        rep = count_zeros(form, grid=cfg["grid"], tol=cfg["tol"])
    except DegenerateForm as exc:
        return {"degenerate": True, "message": str(exc)}, None
    doc = {"degenerate": False, **rep.to_document()}
    if spec is not None:
        doc["bound_check"] = bound_check(spec, rep).to_document()
    return doc, rep


def cmd_melnikov(args) -> int:
    cfg = load_config(args.config, {"seed": args.seed, "grid": args.grid, "tol": args.tol})
    spec = spec_from_config(cfg)
    form = assemble_M(spec)
    zdoc, rep = _zero_document(form, spec, cfg)
    doc = {
        **_header(cfg, "melnikov"),
        "spec": spec.to_document(),
        "form": form.to_document(),
        "form_text": melnikov_poly_text(form),
        "zeros": zdoc,
    }
    text = _dump(doc)
    _write(args.out, "melnikov.json", text)
    _write(args.out, "form.json", _dump(form.to_document()))
    if rep is not None:
        _write(args.out, "samples.csv", rep.samples_csv())
    print(text, end="")
    return 0


def cmd_zeros(args) -> int:
    cfg = load_config(args.config, {"seed": args.seed, "grid": args.grid, "tol": args.tol})
    spec = None
    if args.form:
        form = MelnikovForm.from_document(json.loads(Path(args.form).read_text()))
    else:
        spec = spec_from_config(cfg)
        form = assemble_M(spec)
    zdoc, rep = _zero_document(form, spec, cfg)
    text = _dump({**_header(cfg, "zeros"), **zdoc})
    _write(args.out, "zeros.json", text)
    if rep is not None:
        _write(args.out, "samples.csv", rep.samples_csv())
    print(text, end="")
    return 0


def _displacement_ratio(spec: PerturbationSpec, flow: FlowConfig, samples) -> dict | None:
    """Observed d / (eps M(h0)) over the sweep; reported, never asserted."""
    if flow.epsilon == 0.0 or spec.is_zero():
        return None
    form = assemble_M(spec)
    ms = [flow.epsilon * eval_M(form, s.h0) for s in samples]
    floor = 1e-3 * max(abs(m) for m in ms)
    ratios = [s.d / m for s, m in zip(samples, ms) if floor > 0 and abs(m) > floor]
    if not ratios:
        return None
    return {"min": min(ratios), "max": max(ratios), "median": float(np.median(ratios)), "samples": len(ratios)}


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, {"seed": args.seed, "epsilon": args.epsilon})
    spec = spec_from_config(cfg)
    flow = FlowConfig(epsilon=float(cfg["epsilon"]))
    lo, hi = cfg["window"]
    hs = np.linspace(lo, hi, int(cfg["section_grid"]))
    samples = displacement_sweep(spec, flow, hs)
    cycles = find_limit_cycles(spec, flow, int(cfg["section_grid"]), (lo, hi))
    doc = {
        **_header(cfg, "simulate"),
        "epsilon": flow.epsilon,
        "cycles": [c.to_document() for c in cycles],
        "max_abs_displacement": max(abs(s.d) for s in samples),
        "displacement_ratio": _displacement_ratio(spec, flow, samples),
    }
    text = _dump(doc)
    _write(args.out, "cycles.json", text)
    _write(args.out, "displacement.csv", displacement_csv(samples))
    print(text, end="")
    return 0


def _sweep_one(task) -> dict:
    seed, n, k, grid, tol = task
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, k]))
    spec = random_spec(n, rng, symmetric=bool(k % 2))
    form = assemble_M(spec)
    try:
        rep = count_zeros(form, grid=grid, tol=tol)
    except DegenerateForm:
        return {"n": n, "k": k, "degenerate": True, "passed": True}
    bc = bound_check(spec, rep)
    return {"n": n, "k": k, "symmetric": bc.symmetric, "observed": bc.observed, "bound": bc.bound, "passed": bc.passed}


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, {"seed": args.seed, "grid": args.grid, "tol": args.tol, "workers": args.workers})
    tasks = [
        (cfg["seed"], int(n), k, int(cfg["grid"]), float(cfg["tol"]))
        for n in cfg["n_values"]
        for k in range(int(cfg["specs_per_n"]))
    ]
    if int(cfg["workers"]) > 1:
        with ProcessPoolExecutor(int(cfg["workers"])) as pool:
            rows = list(pool.map(_sweep_one, tasks, chunksize=8))
    else:
        rows = [_sweep_one(t) for t in tasks]
    summary = {}
    for n in cfg["n_values"]:
        mine = [r for r in rows if r["n"] == n and not r.get("degenerate")]
        summary[str(n)] = {
            "specs": len(mine),
            "max_observed_symmetric": max((r["observed"] for r in mine if r["symmetric"]), default=0),
            "max_observed_discontinuous": max((r["observed"] for r in mine if not r["symmetric"]), default=0),
            "violations": sum(not r["passed"] for r in mine),
        }
    passed = all(r["passed"] for r in rows)
    text = _dump({**_header(cfg, "sweep"), "passed": passed, "summary": summary})
    _write(args.out, "sweep.json", text)
    print(text, end="")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="melnikov", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=False):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", type=Path, help="directory for report files")
        if grid:
            sp.add_argument("--grid", type=int)
            sp.add_argument("--tol", type=float)

    r = sub.add_parser("reduce", help="reduce I(i,j) to the generator basis")
    r.add_argument("--i", type=int, required=True)
    r.add_argument("--j", type=int, required=True)
    r.add_argument("--format", choices=("text", "json"), default="text")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=SUITES, required=True)
    common(v)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("melnikov", help="assemble M(h) for a spec and count its zeros")
    common(m, grid=True)
    m.set_defaults(func=cmd_melnikov)

    z = sub.add_parser("zeros", help="count zeros of a stored form or a configured spec")
    common(z, grid=True)
    z.add_argument("--form", help="MelnikovForm JSON file")
    z.set_defaults(func=cmd_zeros)

    s = sub.add_parser("simulate", help="integrate the perturbed flow and detect limit cycles")
    common(s)
    s.add_argument("--epsilon", type=float)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="zero counts of random specs against the theorem bounds")
    common(w, grid=True)
    w.add_argument("--workers", type=int)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "i", None) is not None and (args.i < -1 or args.j < 0):
        parser.error("reduce needs i >= -1 and j >= 0")
    try:
        return args.func(args)
    except (ConfigError, InvalidSpec, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
