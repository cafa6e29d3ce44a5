"""Command-line batch front end.

Usage::

    casimir-gain <task> --scenario file.json [--rel-tol R] [--abs-tol A]
                        [--max-subdiv N] [--out manifest.json]
    casimir-gain cp --atom atom.json --stack stack.json --z-min A --z-max B --points N [--temp T]
    casimir-gain force plates --mat-a a.json --mat-b b.json --gap-min A --gap-max B --points N
    casimir-gain force slab --atom atom.json --stack stack.json --eta ETA --thickness D
                            --z-min A --z-max B --points N

Tasks are ``material``, ``green``, ``cp``, ``force-slab``, ``force-plates``
and ``check``.  The CSV goes to standard output only after every row has
been computed, so a failed run never leaves a partial table.  Exit status
is 0 on success, 1 for an invalid scenario and 2 when a numerical
evaluation diverges.  ``CASIMIR_GAIN_THREADS`` caps the number of worker
threads; rows always come out in sweep order.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import __version__
from .forces import DiluteSlab, additivity_check, force_total_dilute, lifshitz_pressure
from .greens import GainStackError, Layer, LayerStack, green_trace
from .materials import (PERFECT_MIRROR, VACUUM, AtomModel, DiluteWarning, atom_from_dict,
                        kk_check, material_from_dict, parse_frequency)
from .numerics import QuadratureError, QuadratureSpec
from .potentials import cp_total

TASKS = ("material", "green", "cp", "force-slab", "force-plates", "check")
BUILTIN_MATERIALS = {"vacuum": VACUUM, "perfect_mirror": PERFECT_MIRROR}


class SchemaError(ValueError):
    """Invalid scenario; ``path`` locates the offending entry."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class RunError(RuntimeError):
    """A numerical evaluation failed; the message names the operation."""


# --------------------------------------------------------------------------
# scenario parsing


def _get(doc, key, path, kind=None, default=...):
    if not isinstance(doc, dict):
        raise SchemaError(path, "expected an object")
    if key not in doc:
        if default is ...:
            raise SchemaError(f"{path}.{key}" if path else key, "missing")
        return default
    val = doc[key]
    where = f"{path}.{key}" if path else key
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            raise SchemaError(where, "expected a finite number")
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise SchemaError(where, "expected an integer")
        return val
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(where, f"expected {getattr(kind, '__name__', kind)}")
    return val


@dataclass(frozen=True)
class Sweep:
    variable: str
    values: np.ndarray


@dataclass
class Scenario:
    """Resolved scenario: models, the task and its sweep."""

    task: str
    doc: dict
    materials: dict
    atoms: dict
    stacks: dict
    sweep: Sweep | None
    quad: QuadratureSpec
    temperature: float


def _parse_sweep(doc, path="sweep") -> Sweep:
    var = _get(doc, "variable", path, str)
    lo = _get(doc, "min", path, float)
    hi = _get(doc, "max", path, float)
    n = _get(doc, "points", path, int)
    spacing = _get(doc, "spacing", path, str, "log")
    if var not in ("z", "gap", "omega", "xi"):
        raise SchemaError(f"{path}.variable", f"unknown sweep variable {var!r}")
    if n < 1:
        raise SchemaError(f"{path}.points", "must be >= 1")
    if not 0 < lo <= hi:
        raise SchemaError(path, "need 0 < min <= max")
    if lo == hi and n > 1:
        raise SchemaError(path, "min == max needs points == 1")
    unit = _get(doc, "unit", path, str, "rad_s")
    if var in ("omega", "xi"):
        try:
            lo, hi = parse_frequency(lo, unit), parse_frequency(hi, unit)
        except ValueError as exc:
            raise SchemaError(f"{path}.unit", str(exc)) from None
    if spacing == "log":
        vals = np.geomspace(lo, hi, n)
    elif spacing == "linear":
        vals = np.linspace(lo, hi, n)
    else:
        raise SchemaError(f"{path}.spacing", "expected 'log' or 'linear'")
    return Sweep(var, vals)


def _parse_tolerances(doc) -> QuadratureSpec:
    if doc is None:
        return QuadratureSpec()
    base = QuadratureSpec()
    try:
        return QuadratureSpec(
            rel_tol=_get(doc, "rel_tol", "tolerances", float, base.rel_tol),
            abs_tol=_get(doc, "abs_tol", "tolerances", float, base.abs_tol),
            max_subdivisions=_get(doc, "max_subdivisions", "tolerances", int,
                                  base.max_subdivisions),
            tail_mapping=_get(doc, "tail_mapping", "tolerances", str, base.tail_mapping))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError("tolerances", str(exc)) from None


def _material(materials, ref, path):
    if not isinstance(ref, str):
        raise SchemaError(path, "expected a material id")
    if ref in materials:
        return materials[ref]
    if ref in BUILTIN_MATERIALS:
        return BUILTIN_MATERIALS[ref]
    raise SchemaError(path, f"unknown material {ref!r}")


def _parse_stack(doc, materials, path, allow_gain) -> LayerStack:
    below = _material(materials, _get(doc, "below", path), f"{path}.below")
    above = _material(materials, _get(doc, "above", path, default="vacuum"), f"{path}.above")
    layers = []
    for i, l in enumerate(_get(doc, "layers", path, list, [])):
        p = f"{path}.layers[{i}]"
        mat = _material(materials, _get(l, "material", p), f"{p}.material")
        t = _get(l, "thickness", p, float)
        try:
            layers.append(Layer(mat, t))
        except ValueError as exc:
            raise SchemaError(f"{p}.thickness", str(exc)) from None
    try:
        return LayerStack(below, tuple(layers), above, allow_gain=allow_gain)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def _parse_models(doc, section, builder):
    out = {}
    for key, sub in _get(doc, section, "", dict, {}).items():
        if not isinstance(sub, dict):
            raise SchemaError(f"{section}.{key}", "expected an object")
        try:
            out[key] = builder(sub)
        except KeyError as exc:
            raise SchemaError(f"{section}.{key}.{exc.args[0]}", "missing") from None
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{section}.{key}", str(exc)) from None
    return out


def parse_scenario(doc, *, allow_gain=False) -> Scenario:
    """Validate a scenario document and build the models it refers to."""
    if not isinstance(doc, dict):
        raise SchemaError("$", "scenario must be a JSON object")
    task = _get(doc, "task", "", str)
    if task not in TASKS:
        raise SchemaError("task", f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    materials = _parse_models(doc, "materials", material_from_dict)
    atoms = _parse_models(doc, "atoms", atom_from_dict)
    stacks = {k: _parse_stack(v, materials, f"stacks.{k}", allow_gain)
              for k, v in _get(doc, "stacks", "", dict, {}).items()}
    sweep = _parse_sweep(doc["sweep"]) if "sweep" in doc else None
    temp = _get(doc, "temperature", "", float, 0.0)
    if temp < 0:
        raise SchemaError("temperature", "must be >= 0")
    return Scenario(task, doc, materials, atoms, stacks, sweep,
                    _parse_tolerances(doc.get("tolerances")), temp)


def _ref(sc: Scenario, table: str, key: str):
    ref = _get(sc.doc, key, "", str)
    pool = getattr(sc, table)
    if table == "materials":
        return _material(pool, ref, key)
    if ref not in pool:
        raise SchemaError(key, f"unknown {table[:-1]} {ref!r}")
    return pool[ref]


def _need_sweep(sc: Scenario, *allowed) -> Sweep:
    if sc.sweep is None:
        raise SchemaError("sweep", "missing")
    if sc.sweep.variable not in allowed:
        raise SchemaError("sweep.variable", f"task {sc.task!r} sweeps {' or '.join(allowed)}")
    return sc.sweep


# --------------------------------------------------------------------------
# tasks.  Each returns (header, row function, sweep values); a row function
# maps one sweep value to (row values, error estimate).


def _task_material(sc: Scenario):
    mat = _ref(sc, "materials", "material")
    sw = _need_sweep(sc, "omega", "xi")
    if sw.variable == "omega":
        header = ["omega [rad/s]", "re_eps [1]", "im_eps [1]"]

        def row(w):
            e = complex(mat.epsilon(complex(w)))
            return [w, e.real, e.imag], 0.0
    else:
        header = ["xi [rad/s]", "eps_imag_axis [1]", "kk_deviation [1]"]

        def row(x):
            e = float(np.real(mat.epsilon(1j * x)))
            if not hasattr(mat, "oscillators"):
                return [x, e, 0.0], 0.0
            kk = kk_check(mat, x, sc.quad)
            return [x, e, kk.deviation], kk.err

    return header, row, sw.values


def _task_green(sc: Scenario):
    stack = _ref(sc, "stacks", "stack")
    sw = _need_sweep(sc, "z", "omega", "xi")
    if sw.variable == "z":
        if ("omega" in sc.doc) == ("xi" in sc.doc):
            raise SchemaError("omega", "a z sweep needs exactly one of 'omega' or 'xi'")
        axis = "omega" if "omega" in sc.doc else "xi"
        freq = parse_frequency(_get(sc.doc, axis, "", float), sc.doc.get("unit", "rad_s"))
        pairs = [(freq, z) for z in sw.values]
    else:
        axis = sw.variable
        z = _get(sc.doc, "z", "", float)
        if not z > 0:
            raise SchemaError("z", "must be > 0")
        pairs = [(w, z) for w in sw.values]
    header = [f"{axis} [rad/s]", "z [m]", "re_trG [1/m]", "im_trG [1/m]",
              "re_dtrG_dz [1/m^2]", "im_dtrG_dz [1/m^2]", "err [1/m]"]

    def row(pair):
        w, z = pair
        g = green_trace(stack, z, w if axis == "omega" else 1j * w, sc.quad)
        v, dv = complex(g.value), complex(g.dvalue_dz)
        return [w, z, v.real, v.imag, dv.real, dv.imag, float(g.err)], float(g.err)

    return header, row, pairs


def _task_cp(sc: Scenario):
    atom = _ref(sc, "atoms", "atom")
    stack = _ref(sc, "stacks", "stack")
    sw = _need_sweep(sc, "z")
    header = ["z [m]", "u_nr [J]", "u_r [J]", "u_total [J]", "f_z [N]",
              "err_nr [J]", "err_r [J]"]

    def row(z):
        r = cp_total(atom, stack, z, sc.quad, T=sc.temperature)
        return [z, r.u_nr, r.u_r, r.u_total, r.f_z, r.err_nr, r.err_r], r.err_nr + r.err_r

    return header, row, sw.values


def _slab_params(sc: Scenario):
    slab = _get(sc.doc, "slab", "", dict)
    eta = _get(slab, "eta", "slab", float)
    d = _get(slab, "thickness", "slab", float)
    n = _get(slab, "n_layers", "slab", int, 8)
    if eta < 0:
        raise SchemaError("slab.eta", "must be >= 0")
    if not d > 0:
        raise SchemaError("slab.thickness", "must be > 0")
    return eta, d, n


def _task_force_slab(sc: Scenario):
    atom = _ref(sc, "atoms", "atom")
    stack = _ref(sc, "stacks", "stack")
    eta, d, n = _slab_params(sc)
    sw = _need_sweep(sc, "z")
    header = ["z [m]", "f_nr [N/m^2]", "f_r [N/m^2]", "f_total [N/m^2]", "err [N/m^2]"]

    def row(z):
        r = force_total_dilute(DiluteSlab(atom, eta, z, z + d, n), stack, sc.quad)
        err = r.err_nr + r.err_r
        return [z, r.f_nr, r.f_r, r.f_total, err], err

    return header, row, sw.values


def _task_force_plates(sc: Scenario):
    if "stack_a" in sc.doc:
        a, b = _ref(sc, "stacks", "stack_a"), _ref(sc, "stacks", "stack_b")
    else:
        a = LayerStack(_ref(sc, "materials", "material_a"))
        b = LayerStack(_ref(sc, "materials", "material_b"))
    sw = _need_sweep(sc, "gap")
    # Only the imaginary-frequency (Lifshitz) part exists for two half spaces;
    # a resonant part between amplifying plates is not modelled.
    f_r = math.nan if (a.has_gain or b.has_gain) else 0.0
    header = ["gap [m]", "f_nr [N/m^2]", "f_r [N/m^2]", "f_total [N/m^2]", "err [N/m^2]"]

    def row(gap):
        p, err = lifshitz_pressure(a, b, gap, sc.temperature, sc.quad)
        return [gap, p, f_r, p + f_r, err], err

    return header, row, sw.values


def _task_check(sc: Scenario):
    kind = _get(sc.doc, "check", "", str, "additivity")
    if kind != "additivity":
        raise SchemaError("check", f"unknown check {kind!r}")
    atom = _ref(sc, "atoms", "atom")
    stack = _ref(sc, "stacks", "stack")
    eta, d, n = _slab_params(sc)
    z_lo = _get(_get(sc.doc, "slab", "", dict), "z_lo", "slab", float)
    if not z_lo > 0:
        raise SchemaError("slab.z_lo", "must be > 0")
    header = ["z_lo [m]", "z_hi [m]", "chi_max [1]", "macro_nr [N/m^2]", "micro_nr [N/m^2]",
              "macro_r [N/m^2]", "micro_r [N/m^2]", "dev_nr [1]", "dev_r [1]",
              "deviation [1]"]

    def row(z):
        r = additivity_check(DiluteSlab(atom, eta, z, z + d, n), stack, sc.quad)
        return [z, z + d, r.chi_max, r.macro_nr, r.micro_nr, r.macro_r, r.micro_r,
                r.dev_nr, r.dev_r, r.deviation], r.deviation

    return header, row, [z_lo]


_TASKS: dict[str, Callable] = {
    "material": _task_material, "green": _task_green, "cp": _task_cp,
    "force-slab": _task_force_slab, "force-plates": _task_force_plates, "check": _task_check,
}


# --------------------------------------------------------------------------
# execution


def _threads() -> int:
    env = os.environ.get("CASIMIR_GAIN_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise SchemaError("CASIMIR_GAIN_THREADS", "expected a positive integer") from None
        if n < 1:
            raise SchemaError("CASIMIR_GAIN_THREADS", "expected a positive integer")
        return n
    return min(8, os.cpu_count() or 1)


def run(sc: Scenario):
    """Evaluate every sweep point; returns ``(header, rows, errors)``."""
    header, row, values = _TASKS[sc.task](sc)

    def safe(v):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DiluteWarning)
                return row(v)
        except GainStackError as exc:
            raise SchemaError("stack", str(exc)) from None
        except QuadratureError as exc:
            raise RunError(f"{sc.task} at {sc.sweep.variable if sc.sweep else 'point'}"
                           f"={v!r} (rel_tol={sc.quad.rel_tol:g}): {exc}") from None
        except ValueError as exc:
            # precondition violated by the scenario (e.g. gain where it is refused)
            raise SchemaError(sc.task, str(exc)) from None

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(safe, list(values)))
    return header, [r[0] for r in results], [r[1] for r in results]


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    return buf.getvalue()


def _canonical(doc) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def manifest(sc: Scenario, header, rows, errors) -> dict:
    q = sc.quad
    return {
        "tool": "casimir-gain",
        "version": __version__,
        "task": sc.task,
        "input_sha256": hashlib.sha256(_canonical(sc.doc)).hexdigest(),
        "tolerances": {"rel_tol": q.rel_tol, "abs_tol": q.abs_tol,
                       "max_subdivisions": q.max_subdivisions, "tail_mapping": q.tail_mapping},
        "temperature_K": sc.temperature,
        "columns": header,
        "rows": len(rows),
        "row_errors": [float(e) for e in errors],
    }


# --------------------------------------------------------------------------
# argument handling


def _load_json(path: str, label: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(label, f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(label, f"malformed JSON in {path}: {exc}") from None


def _direct_sweep(args, var):
    lo, hi = getattr(args, f"{var}_min"), getattr(args, f"{var}_max")
    if lo is None or hi is None or args.points is None:
        raise SchemaError(f"--{var}-min/--{var}-max/--points", "required without --scenario")
    return {"variable": var, "min": lo, "max": hi, "points": args.points,
            "spacing": args.spacing}


def _stack_doc(path):
    """Stack file: the stack fields plus an optional ``materials`` section."""
    doc = _load_json(path, "--stack")
    if not isinstance(doc, dict):
        raise SchemaError("--stack", "expected a JSON object")
    mats = doc.get("materials", {})
    stack = {k: v for k, v in doc.items() if k != "materials"}
    return mats, stack


def _scenario_from_flags(args) -> dict:
    task = args.task
    doc = {"task": task}
    if args.temp is not None:
        doc["temperature"] = args.temp
    if task in ("cp", "force-slab"):
        if not args.atom or not args.stack:
            raise SchemaError("--atom/--stack", "required without --scenario")
        mats, stack = _stack_doc(args.stack)
        doc.update(materials=mats, atoms={"atom": _load_json(args.atom, "--atom")},
                   stacks={"stack": stack}, atom="atom", stack="stack",
                   sweep=_direct_sweep(args, "z"))
        if task == "force-slab":
            if args.eta is None or args.thickness is None:
                raise SchemaError("--eta/--thickness", "required for force slab")
            doc["slab"] = {"eta": args.eta, "thickness": args.thickness}
    elif task == "force-plates":
        if not args.mat_a or not args.mat_b:
            raise SchemaError("--mat-a/--mat-b", "required without --scenario")
        doc.update(materials={"a": _load_json(args.mat_a, "--mat-a"),
                              "b": _load_json(args.mat_b, "--mat-b")},
                   material_a="a", material_b="b", sweep=_direct_sweep(args, "gap"))
    else:
        raise SchemaError("--scenario", f"task {task!r} needs a scenario file")
    return doc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="casimir-gain",
        description="Casimir and Casimir-Polder forces with amplifying media (CSV output).")
    p.add_argument("task", help="material | green | cp | force-slab | force-plates | check "
                                "(also 'force slab' and 'force plates')")
    p.add_argument("kind", nargs="?", help=argparse.SUPPRESS)
    p.add_argument("--scenario", help="scenario JSON file")
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--max-subdiv", type=int)
    p.add_argument("--out", help="write the run manifest here")
    p.add_argument("--allow-gain-stack", action="store_true",
                   help="evaluate Green traces of stacks containing gain at real frequencies")
    g = p.add_argument_group("direct mode (no scenario file)")
    g.add_argument("--atom")
    g.add_argument("--stack")
    g.add_argument("--mat-a")
    g.add_argument("--mat-b")
    g.add_argument("--z-min", type=float)
    g.add_argument("--z-max", type=float)
    g.add_argument("--gap-min", type=float)
    g.add_argument("--gap-max", type=float)
    g.add_argument("--points", type=int)
    g.add_argument("--spacing", choices=("log", "linear"), default="log")
    g.add_argument("--temp", type=float, help="temperature in K")
    g.add_argument("--eta", type=float, help="slab number density (1/m^3)")
    g.add_argument("--thickness", type=float, help="slab thickness (m)")
    return p


def _resolve_task(args):
    if args.task == "force":
        if args.kind not in ("slab", "plates"):
            raise SchemaError("task", "use 'force slab' or 'force plates'")
        return f"force-{args.kind}"
    if args.kind is not None:
        raise SchemaError("task", f"unexpected argument {args.kind!r}")
    return args.task


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.task = _resolve_task(args)
        if args.task not in TASKS:
            raise SchemaError("task", f"unknown task {args.task!r}")
        if args.scenario:
            doc = _load_json(args.scenario, "--scenario")
            if isinstance(doc, dict) and doc.get("task", args.task) != args.task:
                raise SchemaError("task", f"scenario task {doc.get('task')!r} does not "
                                          f"match command {args.task!r}")
            if isinstance(doc, dict):
                doc = {**doc, "task": args.task}
                if args.temp is not None:
                    doc["temperature"] = args.temp
        else:
            doc = _scenario_from_flags(args)
        over = {k: v for k, v in (("rel_tol", args.rel_tol), ("abs_tol", args.abs_tol),
                                  ("max_subdivisions", args.max_subdiv)) if v is not None}
        if over and isinstance(doc, dict):
            doc = {**doc, "tolerances": {**(doc.get("tolerances") or {}), **over}}
        sc = parse_scenario(doc, allow_gain=args.allow_gain_stack)
        header, rows, errors = run(sc)
    except SchemaError as exc:
        print(f"casimir-gain: schema error: {exc}", file=sys.stderr)
        return 1
    except RunError as exc:
        print(f"casimir-gain: numerical divergence: {exc}", file=sys.stderr)
        return 2
    text = format_csv(header, rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(manifest(sc, header, rows, errors), fh, indent=2)
            fh.write("\n")
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
