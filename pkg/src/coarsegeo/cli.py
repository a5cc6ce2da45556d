"""Command line entry point.

Subcommands map one-to-one onto module operations; every report embeds the
config hash and version, all randomness is seeded, and reruns with the same
config and seed are byte-identical.  Exit codes: 0 success, 1 config or
validation error, 2 precondition rejection, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from .boxes import build_box, folner_stats, good_box_experiment, monte_carlo_volume, \
    sample_geodesic_family, standard_map_fit, tile_box
from .combinatorics import (
    IncidenceStructure,
    mediant_dominance,
    pingpong_bound_check,
    spread_points,
    thin_triangle_check,
)
from .errors import CoarseGeoError, ValidationError
from .fileio import emit_report, read_path_jsonl, write_csv
from .groups import load_root_system, root_system_diagnostics
from .monotone import find_monotone_scale, uniform_points
from .paths import find_efficiency_scale, subdivide
from .embed import embedded_distance, project_to_base, project_to_weight
from .quadrilaterals import (
    build_commutator_quadrilateral,
    check_quadrilateral,
    orientation_pattern,
    structure_report,
)
from .synthetic import PhiSpec, substream


def ordered_map(fn, items, jobs=1):
    """Map preserving item order; worker count never changes results."""
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _add_common(sp, group=True, path=False):
    if group:
        sp.add_argument("--group", required=True, help="group spec JSON file")
    if path:
        sp.add_argument("--path", required=True, help="path JSONL file")
        sp.add_argument("--kappa", type=float, default=1.0)
        sp.add_argument("--c-add", type=float, default=0.0)
    sp.add_argument("--out", default=None, help="write the JSON report here")
    sp.add_argument("--csv", default=None, help="optional CSV table output")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)


def build_parser():
    ap = argparse.ArgumentParser(prog="coarsegeo", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="validate a group spec file")
    _add_common(sp)

    sp = sub.add_parser("dist", help="endpoint and chain distances of a path")
    _add_common(sp, path=True)

    sp = sub.add_parser("project", help="weight-space projection of a path")
    _add_common(sp, path=True)
    sp.add_argument("--root", type=int, required=True)

    sp = sub.add_parser("subdivide", help="first-crossing subdivision")
    _add_common(sp, path=True)
    sp.add_argument("--r", type=float, required=True)

    sp = sub.add_parser("eff-scale", help="efficiency-scale finder")
    _add_common(sp, path=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--N", type=float, required=True)
    sp.add_argument("--Lstop", type=float, required=True)
    sp.add_argument("--hbar", type=float, default=None)

    sp = sub.add_parser("mono-scale", help="monotone-scale finder")
    _add_common(sp, path=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--N", type=float, required=True)
    sp.add_argument("--La", type=float, required=True)
    sp.add_argument("--hbar", type=float, default=None)

    sp = sub.add_parser("uniform", help="uniform-point extraction")
    _add_common(sp, path=True)
    sp.add_argument("--Ls", type=float, required=True)
    sp.add_argument("--M", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)

    sp = sub.add_parser("folner", help="box volume and boundary statistics")
    _add_common(sp)
    sp.add_argument("--omega", required=True, help="JSON [[lo,hi],...]")
    sp.add_argument("--r", type=float, nargs="+", default=[1.0])
    sp.add_argument("--eps-shell", type=float, default=0.5)
    sp.add_argument("--mc-samples", type=int, default=0)

    sp = sub.add_parser("tile", help="tile a box at scale rho")
    _add_common(sp)
    sp.add_argument("--omega", required=True)
    sp.add_argument("--rho", type=float, required=True)

    sp = sub.add_parser("geodesics", help="sample a geodesic family of a box")
    _add_common(sp)
    sp.add_argument("--omega", required=True)
    sp.add_argument("--m", type=float, default=4)
    sp.add_argument("--density", type=int, default=2)

    sp = sub.add_parser("quad", help="commutator quadrilateral checks")
    _add_common(sp)
    sp.add_argument("--x", type=float, default=1.0)
    sp.add_argument("--y", type=float, default=1.0)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--eta", type=float, default=0.0)

    sp = sub.add_parser("lemmas", help="randomized combinatorial lemma suites")
    _add_common(sp, group=False)
    sp.add_argument("--suite", required=True,
                    choices=["mixing", "triangle", "pingpong", "spread"])
    sp.add_argument("--trials", type=int, default=100000)

    sp = sub.add_parser("goodbox", help="good-box experiment from a config file")
    _add_common(sp, group=False)
    sp.add_argument("--config", required=True, help="experiment config JSON")

    sp = sub.add_parser("fitmap", help="standard-map fit from a config file")
    _add_common(sp, group=False)
    sp.add_argument("--config", required=True)
    return ap


def _load_omega(text):
    om = json.loads(text)
    return om


def _config_of(args, skip=("out", "csv", "command", "jobs")):
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def _finish(report, args):
    text = emit_report(report, _config_of(args), args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0


def cmd_validate(args):
    try:
        with open(args.group) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read group spec: {exc}")
    if not isinstance(spec, dict) or "dim_a" not in spec or "roots" not in spec:
        raise ValidationError("group spec must be an object with 'dim_a' and 'roots'")
    violations = root_system_diagnostics(spec["dim_a"], spec["roots"])
    report = {"valid": not violations, "violations": violations}
    rc = _finish(report, args)
    return rc if not violations else 1


def cmd_dist(args):
    rs = load_root_system(args.group)
    path = read_path_jsonl(rs, args.path, kappa=args.kappa, c_add=args.c_add)
    report = {
        "endpoint_distance": path.endpoint_gap(),
        "chain_length": path.chain_length(),
        "n_samples": path.n_samples,
        "first_to_origin": embedded_distance(
            rs, path.point(0), path.point(0)
        ),
    }
    return _finish(report, args)


def cmd_project(args):
    rs = load_root_system(args.group)
    path = read_path_jsonl(rs, args.path, kappa=args.kappa, c_add=args.c_add)
    pts = [project_to_weight(rs, path.point(k), args.root) for k in range(path.n_samples)]
    report = {
        "root": args.root,
        "heights": [p.t for p in pts],
        "fibers": [list(map(float, p.x)) for p in pts],
        "base": [list(map(float, project_to_base(path.point(k)))) for k in range(path.n_samples)],
    }
    if args.csv:
        write_csv(
            [[p.t] + list(map(float, p.x)) for p in pts],
            ["height"] + [f"x{i}" for i in range(len(pts[0].x))],
            args.csv,
        )
    return _finish(report, args)


def cmd_subdivide(args):
    rs = load_root_system(args.group)
    path = read_path_jsonl(rs, args.path, kappa=args.kappa, c_add=args.c_add)
    sub = subdivide(path, args.r)
    report = {
        "indices": list(map(int, sub.indices)),
        "gaps": list(map(float, sub.gaps)),
        "mesh": sub.mesh,
        "r": sub.r,
    }
    return _finish(report, args)


def cmd_eff_scale(args):
    rs = load_root_system(args.group)
    path = read_path_jsonl(rs, args.path, kappa=args.kappa, c_add=args.c_add)
    rep = find_efficiency_scale(path, args.eps, args.N, args.Lstop, hbar=args.hbar)
    if args.csv:
        write_csv(
            list(zip(map(float, rep.r_values), map(float, rep.deltas))),
            ["scale_r", "delta_b"],
            args.csv,
        )
    return _finish(rep.to_json(), args)


def cmd_mono_scale(args):
    rs = load_root_system(args.group)
    path = read_path_jsonl(rs, args.path, kappa=args.kappa, c_add=args.c_add)
    rep = find_monotone_scale(path, args.delta, args.eps, args.N, args.La, hbar=args.hbar)
    if args.csv:
        write_csv(
            list(zip(map(float, rep.l_values), map(float, rep.flats), map(float, rep.naturals))),
            ["scale_L", "flat", "natural"],
            args.csv,
        )
    return _finish(rep.to_json(), args)


def cmd_uniform(args):
    rs = load_root_system(args.group)
    path = read_path_jsonl(rs, args.path, kappa=args.kappa, c_add=args.c_add)
    rep = uniform_points(path, args.Ls, args.M, delta=args.delta)
    report = {
        "uniform_indices": list(map(int, rep.uniform_indices)),
        "non_uniform_fraction": rep.non_uniform_fraction,
        "bad_fraction": rep.bad_fraction,
        "max_ratio": list(map(float, rep.max_ratio)),
    }
    return _finish(report, args)


def cmd_folner(args):
    rs = load_root_system(args.group)
    omega = _load_omega(args.omega)
    rows = []
    out = {"r": {}, "omega": omega}
    for r in args.r:
        st = folner_stats(rs, omega, r, args.eps_shell)
        entry = {
            "volume": st.volume,
            "log_volume": st.log_volume,
            "boundary_area": st.boundary_area,
            "shell_fraction": st.shell_fraction,
        }
        if args.mc_samples > 0:
            mc = monte_carlo_volume(rs, omega, r, args.mc_samples, args.seed)
            entry["mc_volume"] = mc
            entry["mc_rel_err"] = abs(mc - st.volume) / st.volume
        out["r"][str(r)] = entry
        rows.append([r, st.volume, st.shell_fraction])
    if args.csv:
        write_csv(rows, ["r", "volume", "shell_fraction"], args.csv)
    return _finish(out, args)


def cmd_tile(args):
    rs = load_root_system(args.group)
    box = build_box(rs, _load_omega(args.omega))
    til = tile_box(box, args.rho)
    report = {
        "rho": til.rho,
        "a_counts": list(map(int, til.a_counts)),
        "fiber_counts": list(map(int, til.fiber_counts)),
        "tile_count": til.tile_count,
        "leftover_fraction": til.leftover_fraction,
        "tile_volume_fraction": til.tile_volume_fraction,
    }
    return _finish(report, args)


def cmd_geodesics(args):
    rs = load_root_system(args.group)
    box = build_box(rs, _load_omega(args.omega))
    fam = sample_geodesic_family(box, args.m, args.density, args.seed)
    diam = box.a_diameter()
    report = {
        "count": len(fam),
        "ratios": [float(np.linalg.norm(g.b - g.a) / diam) for g in fam[:64]],
        "m": args.m,
        "density": args.density,
    }
    return _finish(report, args)


def cmd_quad(args):
    rs = load_root_system(args.group)
    quad = build_commutator_quadrilateral(rs, args.x, args.y, args.t)
    verdict = check_quadrilateral(quad, args.eta)
    signs, conformant = orientation_pattern(quad)
    sr = structure_report(quad, args.eta)
    report = {
        "quadrilateral": quad.to_json(),
        "passed": verdict.passed,
        "edge_lengths": list(map(float, verdict.edge_lengths)),
        "joint_gaps": list(map(float, verdict.joint_gaps)),
        "divergences": list(map(float, verdict.divergences)),
        "orientation": list(signs),
        "orientation_conformant": conformant,
        "structure": {
            "length_spread": sr.length_spread,
            "coset_classes": list(sr.coset_classes),
            "coset_ok": sr.coset_ok,
            "alternating": sr.alternating,
        },
    }
    return _finish(report, args)


def _lemma_trial_mixing(rng):
    a, b = rng.uniform(0, 10, 2)
    A, B = rng.uniform(0.1, 10, 2)
    res = mediant_dominance(a, b, A, B)
    return res.determined and res.implies_dominance and not res.dominance_holds


def _lemma_trial_triangle(rng):
    c = rng.uniform(0.5, 10)
    eps = rng.uniform(0, 0.5)
    a = rng.uniform(0.25, 0.75) * (1 + eps) * c
    b = (1 + eps) * c - a
    if a + b < c or a + c < b or b + c < a or min(a, b) <= 0:
        return False
    return not thin_triangle_check(a, b, c).holds


def _lemma_trial_pingpong(rng):
    na, nb = rng.integers(2, 7), rng.integers(2, 7)
    rel = rng.random((na, nb)) < 0.7
    rel[np.arange(na) % na, np.arange(na) % nb] = True  # avoid empty rows
    for j in range(nb):
        if not rel[:, j].any():
            rel[rng.integers(0, na), j] = True
    for i in range(na):
        if not rel[i].any():
            rel[i, rng.integers(0, nb)] = True
    wa = rng.integers(1, 6, na).astype(float)
    wb = rng.integers(1, 6, nb).astype(float)
    inc = IncidenceStructure(wa, wb, rel)
    m_a, m_b = inc.side_ratios()
    s = min(1.0 / (m_a * m_b), 0.9)
    k = max(1, int(0.2 * na))
    order = np.argsort(wa)
    sub = []
    total = 0.0
    for i in order:
        if (total + wa[i]) <= s * wa.sum():
            sub.append(int(i))
            total += wa[i]
        if len(sub) >= k:
            break
    if not sub:
        return False
    t = float(rng.uniform(0.3, 1.0))
    return not pingpong_bound_check(inc, sub, s, t).holds


def cmd_lemmas(args):
    rng_master = substream(args.seed, 0)
    trial = {
        "mixing": _lemma_trial_mixing,
        "triangle": _lemma_trial_triangle,
        "pingpong": _lemma_trial_pingpong,
    }
    if args.suite == "spread":
        counterexamples = 0
        rows = []
        for k, ups in enumerate(np.linspace(0.0, 0.2, 9)):
            rng = substream(args.seed, k + 1)
            dirs = rng.normal(size=(max(args.trials // 100, 64), 3))
            keep = dirs[: int(len(dirs) * (1 - ups))] if ups > 0 else dirs
            res = spread_points(keep)
            rows.append([float(ups), res.min_distance, res.shortfall])
        report = {"suite": "spread", "curve": rows, "counterexamples": counterexamples}
        if args.csv:
            write_csv(rows, ["upsilon", "min_distance", "shortfall"], args.csv)
        return _finish(report, args)
    fn = trial[args.suite]

    def run_chunk(chunk_index):
        rng = substream(args.seed, chunk_index + 1)
        bad = 0
        for _ in range(chunk):
            if fn(rng):
                bad += 1
        return bad

    chunk = 2000
    n_chunks = (args.trials + chunk - 1) // chunk
    bads = ordered_map(run_chunk, range(n_chunks), args.jobs)
    report = {
        "suite": args.suite,
        "trials": n_chunks * chunk,
        "counterexamples": int(sum(bads)),
    }
    return _finish(report, args)


def cmd_goodbox(args):
    with open(args.config) as fh:
        cfg = json.load(fh)
    rs = load_root_system(cfg["group"]) if isinstance(cfg["group"], str) else \
        _inline_group(cfg["group"])
    phi_cfg = cfg["phi"]
    phi = PhiSpec(kind=phi_cfg["kind"], params=phi_cfg.get("params", {}),
                  seed=phi_cfg.get("seed", args.seed))
    rep = good_box_experiment(rs, phi, cfg["omega"], params=cfg.get("params"),
                              seed=cfg.get("seed", args.seed))
    if args.csv:
        rows = [
            [str(idx), st["count"], st["good_fraction"], st["fit_error"]]
            for idx, st in sorted(rep.tile_stats.items())
        ]
        write_csv(rows, ["tile_id", "count", "good_fraction", "fit_error"], args.csv)
    return _finish(rep.to_json(), args)


def _inline_group(spec):
    from .groups import validate_root_system

    return validate_root_system(spec["dim_a"], spec["roots"])


def cmd_fitmap(args):
    with open(args.config) as fh:
        cfg = json.load(fh)
    rs = load_root_system(cfg["group"]) if isinstance(cfg["group"], str) else \
        _inline_group(cfg["group"])
    phi_cfg = cfg["phi"]
    phi = PhiSpec(kind=phi_cfg["kind"], params=phi_cfg.get("params", {}),
                  seed=phi_cfg.get("seed", args.seed))
    box = build_box(rs, cfg["omega"])
    rng = substream(cfg.get("seed", args.seed), 7)
    n = int(cfg.get("n_points", 256))
    base = np.column_stack(
        [rng.uniform(lo, hi, n) for lo, hi in box.omega]
    )
    fibers = [
        rng.uniform(0.0, box.fiber_lengths[i], size=(n, rs.roots[i].dim_v))
        for i in range(rs.n_roots)
    ]
    fit = standard_map_fit(rs, phi, base, fibers)
    report = {
        "a_matrix": fit.a_matrix.tolist(),
        "a_offset": fit.a_offset.tolist(),
        "fiber_scales": [list(s) for s, _ in fit.fiber_scales],
        "fiber_offsets": [list(o) for _, o in fit.fiber_scales],
        "sup_error": fit.sup_error,
        "sup_error_fraction": fit.sup_error_fraction,
        "rank_ok": fit.rank_ok,
    }
    return _finish(report, args)


COMMANDS = {
    "validate": cmd_validate,
    "dist": cmd_dist,
    "project": cmd_project,
    "subdivide": cmd_subdivide,
    "eff-scale": cmd_eff_scale,
    "mono-scale": cmd_mono_scale,
    "uniform": cmd_uniform,
    "folner": cmd_folner,
    "tile": cmd_tile,
    "geodesics": cmd_geodesics,
    "quad": cmd_quad,
    "lemmas": cmd_lemmas,
    "goodbox": cmd_goodbox,
    "fitmap": cmd_fitmap,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CoarseGeoError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
