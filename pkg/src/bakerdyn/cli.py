"""Command line entry point: ``bakerdyn <experiment> [--key value ...]`` or ``bakerdyn run CONFIG``.

Exit codes: 0 success (including empty results), 2 configuration
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from ._parallel import default_threads
from .boundary import PeriodicBudgets, classify_boundary_orbit, periodic_census, sample_boundary_points
from .branches import Disk, chain_contraction, singular_data
from .catalog import GOLDEN_ALPHA, get_inner, get_map, inner_ids, map_ids
from .circle import dw_convergence_fraction, invariant_halves_measure, recurrence_fraction
from .config import EXPERIMENTS, SCHEMA, COMMON, ConfigError, canonical, config_hash, load, validate
from .cowen import classify_baker_type
from .dimension import chain_map, ifs_lower_bound, moran_exponent
from .dynamics import CLASS_NAMES, Budgets, Window, render_plane
from .errors import BakerDynError, CatalogMissError, PreconditionError
from .julia_probe import julia_on_circle, singularity_preimage_probe

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"{cfg['experiment']} needs {', '.join(missing)}")


def _map(cfg):
    _require(cfg, "map")
    alpha = cfg.get("alpha")
    return get_map(cfg["map"], alpha=GOLDEN_ALPHA if alpha is None else alpha)


def _inner(cfg):
    _require(cfg, "inner")
    return get_inner(cfg["inner"], lam=cfg["lam"], sign=cfg["sign"])


# --------------------------------------------------------------------------
# experiments; each returns (output paths, summary dict)


def run_catalog(cfg, out, threads):
    rows = []
    for mid in map_ids():
        m = get_map(mid)
        meta = m.baker_meta
        rows.append(("entire", mid, m.formula, m.derivative, meta.known_type, meta.univalent,
                     meta.absorbing_hint.describe(), meta.access_predicate_id))
    for iid in inner_ids():
        g = get_inner(iid)
        rows.append(("inner", iid, g.formula, "", g.cowen_type, "", g.domain_model, repr(g.dw_point)))
    path = out / f"{cfg['name']}.csv"
    _write_csv(path, ("kind", "id", "formula", "derivative", "cowen_type", "univalent",
                      "region_or_model", "access_or_dw"), rows)
    print(f"{'id':<20}{'formula':<30}{'type':<18}univalent")
    for r in rows:
        print(f"{r[1]:<20}{r[2]:<30}{r[4]:<18}{r[5]}")
    return [path], {"entries": len(rows)}


def run_render(cfg, out, threads):
    spec = _map(cfg)
    budgets = Budgets(n_max=cfg["n_max"], escape_radius=cfg["escape_radius"],
                      bounded_radius=cfg["bounded_radius"], persistence=cfg["persistence"],
                      use_absorbing=cfg["use_absorbing"])
    grid = render_plane(spec, Window.from_bounds(*cfg["window"]), tuple(cfg["resolution"]),
                        budgets, threads)
    ppm = out / f"{cfg['name']}.ppm"
    grid.write_ppm(ppm)
    counts = {CLASS_NAMES[c]: int((grid.classes == c).sum()) for c in sorted(CLASS_NAMES)}
    path = out / f"{cfg['name']}.csv"
    _write_csv(path, ("class", "pixels"), sorted(counts.items()))
    return [ppm, path], counts


def run_classify(cfg, out, threads):
    spec = _map(cfg)
    dec = classify_baker_type(spec, cfg["starts"], cfg["depth"], cfg["probe_budget"], threads)
    rows = []
    for s in dec.series:
        for k, (z, d, g) in enumerate(zip(s.points[:-1], s.increments, s.boundary_gaps)):
            rows.append((s.start.real, s.start.imag, k, z.real, z.imag, float(d), float(g)))
    path = out / f"{cfg['name']}.csv"
    _write_csv(path, ("start_re", "start_im", "k", "z_re", "z_im", "increment", "gap"), rows)
    print(f"{spec.id}: {dec.decision} ({dec.reason})")
    for s, L in zip(dec.starts, dec.L):
        print(f"  start {s}: L = {L!r}")
    return [path], {"decision": dec.decision, "L": dec.L}


def run_circle_stats(cfg, out, threads):
    inner = _inner(cfg)
    seed, samples = cfg["seed"], cfg["samples"]
    stats = [("dw_convergence_fraction",
              dw_convergence_fraction(inner, samples, cfg["n"], cfg["arc_eps"], seed, threads))]
    if cfg["arc"] is not None:
        n_rec = cfg["recurrence_n"] or cfg["n"]
        stats.append(("recurrence_fraction",
                      recurrence_fraction(inner, cfg["arc"], samples, n_rec, seed, threads)))
    if inner.formula_kind == "moebius_hyperbolic":
        pos, neg = invariant_halves_measure(inner, samples, seed, threads)
        stats += [("invariant_half_positive", pos), ("invariant_half_negative", neg)]
    rows = [(inner.id, name, e.value, e.stderr, e.samples, e.iterations, seed, e.pole_hits)
            for name, e in stats]
    path = out / f"{cfg['name']}.csv"
    _write_csv(path, ("inner_id", "statistic", "value", "stderr", "samples", "iterations", "seed",
                      "pole_hits"), rows)
    return [path], {name: e.value for name, e in stats}


def run_periodic(cfg, out, threads):
    spec = _map(cfg)
    _require(cfg, "region")
    census = periodic_census(spec, cfg["region"], cfg["count"], cfg["max_period"],
                             PeriodicBudgets(grid=cfg["budget"]), tuple(cfg["grid"]), threads)
    rows = [(p.point.real, p.point.imag, p.period, p.multiplier.real, p.multiplier.imag,
             p.residual, p.boundary_witness) for p in census.points]
    path = out / f"{cfg['name']}.csv"
    _write_csv(path, ("re", "im", "period", "mult_re", "mult_im", "residual", "witness"), rows)
    return [path], {"points": len(rows), "coverage": census.coverage}


def run_boundary_class(cfg, out, threads):
    spec = _map(cfg)
    _require(cfg, "window")
    pts = sample_boundary_points(spec, cfg["window"], cfg["count"], cfg["seed"])
    rows = []
    for x in pts:
        c = classify_boundary_orbit(spec, x, cfg["horizon"], cfg["radius"])
        rows.append((x.real, x.imag, c.dw_set_member, c.caratheodory_member, c.evidence["steps"],
                     c.evidence["overflow"], c.evidence["max_modulus"]))
    path = out / f"{cfg['name']}.csv"
    _write_csv(path, ("start_re", "start_im", "dw_set_member", "caratheodory_member", "steps",
                      "overflow", "max_modulus"), rows)
    return [path], {"samples": len(rows)}


def run_dimension(cfg, out, threads):
    path = out / f"{cfg['name']}.csv"
    if cfg["b1"] is not None or cfg["b2"] is not None:
        _require(cfg, "b1", "b2")
        s = moran_exponent(cfg["b1"], cfg["b2"])
        _write_csv(path, ("s", "b1", "b2"), [(s, cfg["b1"], cfg["b2"])])
        return [path], {"s": s}
    spec = _map(cfg)
    _require(cfg, "base", "base_radius", "chains")
    if len(cfg["chains"]) != 2:
        raise ConfigError("chains needs exactly two seeds")
    disk = Disk(cfg["base"], cfg["base_radius"])
    sing = singular_data(spec)
    n = cfg["chain_length"]
    maps = [chain_map(spec, chain_contraction(spec, disk, n, [seed] * n, sing=sing))
            for seed in cfg["chains"]]
    b = ifs_lower_bound(disk, *maps)
    _write_csv(path, ("s", "b1", "b2", "s_unshrunk", "disjointness_margin", "containment_1",
                      "containment_2", "chain_1", "chain_2", "label"),
               [(b.s, b.b1, b.b2, b.s_unshrunk, b.disjointness_margin, *b.containment_margins,
                 *b.chain_ids, b.label)])
    return [path], {"s": b.s}


def run_probe(cfg, out, threads):
    inner = _inner(cfg)
    sample = julia_on_circle(inner, cfg["depth"], cfg["budget"], cfg["eps"])
    rows = [("julia_point", "", "", "", float(v), float(t), "")
            for v, t in zip(sample.native, sample.turns)]
    rows.append(("max_gap_turns", "", "", "", sample.max_gap, "", ""))
    rows.append(("budget_exhausted", "", "", "", int(sample.exhausted), "", ""))
    summary = {"points": len(sample.turns), "max_gap": sample.max_gap,
               "exhausted": sample.exhausted}
    if inner.formula_kind == "fatou_inner":
        hits, fails = singularity_preimage_probe(inner, cfg["target"], cfg["windows"], cfg["count"])
        rows += [("preimage", h.window, h.k, h.delta, h.eta, "", h.residual) for h in hits]
        rows += [("bracket_failure", R, k, d, k * math.pi + d, "", r) for R, k, d, r in fails]
        summary["preimages"] = len(hits)
    path = out / f"{cfg['name']}.csv"
    _write_csv(path, ("kind", "window", "k", "delta", "value", "turns", "residual"), rows)
    return [path], summary


RUNNERS = {"catalog": run_catalog, "render": run_render, "classify": run_classify,
           "circle-stats": run_circle_stats, "periodic": run_periodic,
           "boundary-class": run_boundary_class, "dimension": run_dimension, "probe": run_probe}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def execute(cfg: dict, threads: int | None = None) -> dict:
    """Run a validated config, write outputs and the manifest; returns the manifest."""
    threads = threads or cfg["threads"] or default_threads()
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    paths, summary = RUNNERS[cfg["experiment"]](cfg, out, threads)
    wall = time.perf_counter() - t0
    manifest = {
        "experiment": cfg["experiment"],
        "config": canonical(cfg),
        "config_hash": config_hash(cfg),
        "seed": cfg["seed"],
        "threads": threads,
        "versions": {"bakerdyn": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "wall_time_s": wall,
        "outputs": [{"path": p.name, "sha256": _sha256(p)} for p in paths],
        "result": summary,
    }
    with open(out / f"{cfg['name']}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=repr)
        fh.write("\n")
    return manifest


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bakerdyn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config file (key=value or JSON)")
    run.add_argument("config")
    run.add_argument("--threads", type=int, default=None)
    run.add_argument("--out-dir", default=None)
    for exp in EXPERIMENTS:
        sp = sub.add_parser(exp, help=f"{exp} experiment")
        for key in {**COMMON, **SCHEMA[exp]}:
            if key == "experiment":
                continue
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load(args.config)
            if args.out_dir is not None:
                cfg["out_dir"] = args.out_dir
            threads = args.threads
        else:
            raw = {k: v for k, v in vars(args).items() if k != "command" and v is not None}
            cfg = validate(raw, args.command)
            threads = None
        manifest = execute(cfg, threads)
    except (ConfigError, CatalogMissError, PreconditionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BakerDynError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for o in manifest["outputs"]:
        print(Path(cfg["out_dir"]) / o["path"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
