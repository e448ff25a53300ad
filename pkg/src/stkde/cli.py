"""Command-line driver.

Exit status: 0 on success, 1 on usage errors, 2 on data or validation errors.
"""
from __future__ import annotations

import argparse
import datetime as dt
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import io
from .bandwidth import BandwidthSearchConfig, optimize_bandwidths
from .domain import Bandwidths, DensitySurface, GridSpec3D, StkdeError, TimeWindow, as_points
from .estimators import PromapParams, stkde_volume
from .evaluation import MEAN_MONTH_DAYS, build_prediction_groups, select_hotspots
from .pipeline import METHODS, EvaluationSettings, run_evaluation
from .significance import build_null_ensemble, classify_significance, marginalize_time
from .synth import drifting_cluster_scenario, uniform_scenario

log = logging.getLogger("stkde")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str, count: int, name: str) -> List[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name} must be {count} comma-separated numbers") from None
    if len(vals) != count:
        raise argparse.ArgumentTypeError(f"{name} must be {count} comma-separated numbers")
    return vals


def _bandwidths(text: str) -> Bandwidths:
    try:
        return Bandwidths(*_floats(text, 3, "--bandwidths"))
    except StkdeError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _bounds(text: str):
    return _floats(text, 6, "--search-bounds")


def _methods(text: str):
    methods = tuple(m.strip().lower() for m in text.split(",") if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if not methods or bad:
        raise argparse.ArgumentTypeError(f"--methods takes a subset of {','.join(METHODS)}")
    return methods


def _add_common(p, *, seed=False, workers=False, significance=False):
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master random seed")
    if workers:
        p.add_argument("--workers", type=int, default=1, help="worker processes for Monte-Carlo replicates")
    if significance:
        p.add_argument("--replicates", type=int, default=1000, help="null replicates R")
        p.add_argument("--alpha", type=float, default=0.05, help="significance level")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stkde", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic land use raster and incident file")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--preset", choices=("drifting", "uniform"), default="drifting")
    p.add_argument("--cols", type=int, default=60)
    p.add_argument("--rows", type=int, default=60)
    p.add_argument("--grid-cell", type=float, default=100.0)
    p.add_argument("--epoch", default="2011-01-01",
                   help="calendar date of day 0, or 'none' to write plain day numbers")
    _add_common(p, seed=True)

    p = sub.add_parser("optimize", help="likelihood cross-validation bandwidth search")
    p.add_argument("--incidents", required=True, type=Path)
    p.add_argument("--grid-cell", type=float, default=100.0)
    p.add_argument("--t-bin", type=float, default=1.0)
    p.add_argument("--before", help="only use incidents before this date/day")
    p.add_argument("--search-bounds", type=_bounds, help="hx_lo,hx_hi,hy_lo,hy_hi,ht_lo,ht_hi")
    p.add_argument("--lattice", type=int, default=12, help="lattice points per axis")

    p = sub.add_parser("estimate", help="STKDE volume written as one grid per time bin")
    p.add_argument("--incidents", required=True, type=Path)
    p.add_argument("--landuse", required=True, type=Path)
    p.add_argument("--bandwidths", required=True, type=_bandwidths)
    p.add_argument("--t-start", required=True)
    p.add_argument("--t-bin", type=float, default=1.0)
    p.add_argument("--n-bins", type=int, default=7)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("significance", help="Monte-Carlo significance of the STKDE surface or volume")
    p.add_argument("--incidents", required=True, type=Path)
    p.add_argument("--landuse", required=True, type=Path)
    p.add_argument("--bandwidths", required=True, type=_bandwidths)
    p.add_argument("--train-start", required=True)
    p.add_argument("--train-end", required=True)
    p.add_argument("--t-bin", type=float, default=1.0)
    p.add_argument("--n-bins", type=int, default=7)
    p.add_argument("--level", choices=("surface", "volume"), default="surface")
    p.add_argument("--out", required=True, type=Path)
    _add_common(p, seed=True, workers=True, significance=True)

    p = sub.add_parser("hotspots", help="top significant cells at an area percentage")
    p.add_argument("--surface", required=True, type=Path)
    p.add_argument("--mask", required=True, type=Path)
    p.add_argument("--landuse", required=True, type=Path)
    p.add_argument("--area-pct", required=True, type=float)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("evaluate", help="rolling evaluation with PAI curves for selected methods")
    p.add_argument("--incidents", required=True, type=Path)
    p.add_argument("--landuse", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--methods", type=_methods, default=METHODS)
    p.add_argument("--first-forecast", default="2011-11-01")
    p.add_argument("--horizon", type=float, default=7.0)
    p.add_argument("--groups", type=int, default=8)
    p.add_argument("--training-months", type=int, default=1)
    p.add_argument("--training-days", type=float, help="fixed training length; overrides --training-months")
    p.add_argument("--bandwidths", type=_bandwidths, help="skip the bandwidth search")
    p.add_argument("--search-bounds", type=_bounds)
    p.add_argument("--lattice", type=int, default=12)
    p.add_argument("--t-bin", type=float, default=1.0)
    p.add_argument("--level", choices=("surface", "volume"), default="surface")
    p.add_argument("--sweep", type=lambda s: _floats(s, 3, "--sweep"), default=[0.0, 25.0, 0.1],
                   help="min,max,step area percentages")
    p.add_argument("--promap", type=lambda s: _floats(s, 2, "--promap"), default=None,
                   help="ProMap h_s,h_t (metres, days)")
    p.add_argument("--figures", action="store_true", help="also render PAI / hit-rate curves to PNG")
    _add_common(p, seed=True, workers=True, significance=True)

    p = sub.add_parser("compare", help="ANOVA / Welch t report from a PAI CSV")
    p.add_argument("--pai", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    return parser


def _search_config(args, history, cell, t_bin) -> BandwidthSearchConfig:
    lattice = (args.lattice,) * 3
    if args.search_bounds:
        b = args.search_bounds
        return BandwidthSearchConfig((b[0], b[2], b[4]), (b[1], b[3], b[5]), lattice)
    return BandwidthSearchConfig.default_for(history, cell, t_bin, lattice=lattice)


def cmd_synth(args) -> int:
    make = drifting_cluster_scenario if args.preset == "drifting" else uniform_scenario
    sc = make(args.seed, n_cols=args.cols, n_rows=args.rows, cell_size=args.grid_cell)
    epoch = None if args.epoch.lower() == "none" else dt.date.fromisoformat(args.epoch)
    io.write_landuse(args.out / "landuse.asc", sc.land_use)
    io.write_incidents_csv(sc.incidents, args.out / "incidents.csv", epoch)
    print(f"wrote {len(sc.incidents)} incidents and a {args.cols}x{args.rows} land-use grid to {args.out}")
    return 0


def cmd_optimize(args) -> int:
    incidents, epoch = io.read_incidents_csv(args.incidents)
    pts = as_points(incidents)
    if args.before:
        pts = pts[pts[:, 2] < io.to_day(args.before, epoch)]
    cfg = _search_config(args, pts, args.grid_cell, args.t_bin)
    res = optimize_bandwidths(pts, cfg)
    print(f"h_x={io.fmt_float(res.bw.h_x)} h_y={io.fmt_float(res.bw.h_y)} h_t={io.fmt_float(res.bw.h_t)} "
          f"lnL={io.fmt_float(res.log_likelihood)} evaluations={res.evaluations}")
    return 0


def cmd_estimate(args) -> int:
    incidents, epoch = io.read_incidents_csv(args.incidents)
    land_use = io.read_landuse(args.landuse)
    spec = GridSpec3D.from_spatial(land_use.spec, io.to_day(args.t_start, epoch), args.t_bin, args.n_bins)
    volume = stkde_volume(incidents, spec, args.bandwidths)
    paths = io.write_volume_slices(args.out, volume)
    print(f"wrote {len(paths)} slices to {args.out}")
    return 0


def cmd_significance(args) -> int:
    incidents, epoch = io.read_incidents_csv(args.incidents)
    land_use = io.read_landuse(args.landuse)
    window = TimeWindow(io.to_day(args.train_start, epoch), io.to_day(args.train_end, epoch))
    pts = as_points(incidents)
    train = pts[window.contains(pts[:, 2])]
    spec = GridSpec3D.from_spatial(land_use.spec, window.end, args.t_bin, args.n_bins)
    volume = stkde_volume(train, spec, args.bandwidths)
    observed = volume if args.level == "volume" else marginalize_time(volume)
    ensemble = build_null_ensemble(len(train), land_use, window, spec, args.bandwidths,
                                   replicates=args.replicates, master_seed=args.seed,
                                   level=args.level, workers=args.workers)
    sig = classify_significance(observed, ensemble, args.alpha)
    if args.level == "surface":
        io.write_ascii_grid(args.out / "density.asc", land_use.spec, observed.values)
        io.write_ascii_grid(args.out / "pvalues.asc", land_use.spec, sig.p_values)
        io.write_mask(args.out / "significant.asc", land_use.spec, sig.significant_mask)
    else:
        for k in range(spec.n_bins):
            io.write_ascii_grid(args.out / f"density_t{k}.asc", land_use.spec, volume.values[:, :, k])
            io.write_ascii_grid(args.out / f"pvalues_t{k}.asc", land_use.spec, sig.p_values[:, :, k])
            io.write_mask(args.out / f"significant_t{k}.asc", land_use.spec, sig.significant_mask[:, :, k])
    print(f"{int(sig.significant_mask.sum())} significant cells of {sig.significant_mask.size}")
    return 0


def cmd_hotspots(args) -> int:
    land_use = io.read_landuse(args.landuse)
    s_spec, s_vals, _ = io.read_ascii_grid(args.surface)
    m_spec, m_vals, _ = io.read_ascii_grid(args.mask)
    if s_spec != land_use.spec or m_spec != land_use.spec:
        raise io.DataFormatError("surface, mask and land use grids are not aligned")
    surface = DensitySurface(s_spec, np.nan_to_num(s_vals, nan=0.0))
    sel = select_hotspots(surface, np.nan_to_num(m_vals, nan=0.0) > 0, land_use, args.area_pct)
    io.write_mask(args.out, land_use.spec, sel.mask(land_use.spec), land_use)
    state = "feasible" if sel.feasible else "infeasible: fewer significant cells than requested"
    print(f"{len(sel.cells)} of {sel.target} hotspot cells ({state})")
    return 0


def cmd_evaluate(args) -> int:
    incidents, epoch = io.read_incidents_csv(args.incidents)
    land_use = io.read_landuse(args.landuse)
    pts = as_points(incidents)
    first = io.to_day(args.first_forecast, epoch)
    starts = [first + g * args.horizon for g in range(args.groups)]
    if args.training_days:
        lengths = args.training_days
    elif epoch is not None:
        lengths = io.calendar_training_lengths(epoch, starts, args.training_months)
    else:
        lengths = args.training_months * MEAN_MONTH_DAYS
    data_window = TimeWindow(float(pts[:, 2].min()), float(np.nextafter(pts[:, 2].max(), np.inf)))
    groups = build_prediction_groups(data_window, first, args.horizon, lengths, args.groups)
    promap = PromapParams() if args.promap is None else PromapParams(h_s=args.promap[0], h_t=args.promap[1])
    settings = EvaluationSettings(methods=args.methods, t_bin=args.t_bin, replicates=args.replicates,
                                  alpha=args.alpha, seed=args.seed, workers=args.workers, level=args.level,
                                  promap=promap, scale_min=args.sweep[0], scale_max=args.sweep[1],
                                  scale_step=args.sweep[2])
    search = None
    if args.bandwidths is None:
        history = pts[pts[:, 2] < first]
        search = _search_config(args, history, land_use.spec.cell_size, args.t_bin)
    result = run_evaluation(pts, land_use, groups, settings, bandwidths=args.bandwidths, search=search)

    out = args.out
    bw = result.bandwidths
    lnl = "" if result.search is None else io.fmt_float(result.search.log_likelihood)
    io.atomic_write_text(out / "bandwidths.csv", "h_x,h_y,h_t,log_likelihood\n"
                         f"{io.fmt_float(bw.h_x)},{io.fmt_float(bw.h_y)},{io.fmt_float(bw.h_t)},{lnl}\n")
    io.atomic_write_text(out / "groups.csv", "group,train_start,train_end,forecast_start,forecast_end\n" + "".join(
        f"{g.index},{io.fmt_float(g.training.start)},{io.fmt_float(g.training.end)},"
        f"{io.fmt_float(g.forecast.start)},{io.fmt_float(g.forecast.end)}\n" for g in groups))
    io.write_pai_csv({m: result.curves(m) for m in settings.methods}, out / "pai.csv")
    io.write_comparison_csv(result.comparison.rows, out / "comparison.csv")
    for method, outcomes in result.outcomes.items():
        for o in outcomes:
            io.write_ascii_grid(out / "surfaces" / f"{method}_g{o.group.index}.asc", land_use.spec, o.surface.values)
            io.write_mask(out / "significant" / f"{method}_g{o.group.index}.asc", land_use.spec, o.significant,
                          land_use)
    if args.figures:
        from .plotting import plot_pai_curves

        plot_pai_curves(result.comparison.consolidated, out / "pai_curves.png")
    for m in settings.methods:
        c = result.comparison.consolidated[m]
        print(f"{m}: {c.feasible_count()} of {len(c.points)} scales feasible, "
              f"mean PAI {result.comparison.mean_pai(m):.4f}")
    return 0


def cmd_compare(args) -> int:
    from .evaluation import compare_methods

    curves = io.read_pai_csv(args.pai)
    if not curves:
        raise io.DataFormatError(f"{args.pai}: no per-group rows")
    comparison = compare_methods(curves)
    io.write_comparison_csv(comparison.rows, args.out)
    print(f"wrote {len(comparison.rows)} comparison rows to {args.out}")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "optimize": cmd_optimize,
    "estimate": cmd_estimate,
    "significance": cmd_significance,
    "hotspots": cmd_hotspots,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (StkdeError, ValueError, OSError) as exc:
        print(f"stkde {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
