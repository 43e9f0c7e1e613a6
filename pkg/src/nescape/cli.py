"""Command-line front end.

Subcommands::

    nescape simulate    run the launch campaign, write ensemble stats and
                        the simulated-vs-asymptotic comparison table
    nescape asymptotic  evaluate the MFPT field on the manifest's grid
    nescape boundary    boundary-shell occupancy tables for one diffusion mode
    nescape compare     run isotropic and anisotropic campaigns with the same
                        seeds and write the paired escape-time / tau tables

All outputs are CSV with a comment header embedding the package version,
kernel backend, manifest hash and base seed; reruns of the same manifest
are byte-identical.  Exit codes: 0 success, 1 validation error, 2
runtime/simulation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .asymptotics import AsymptoticModel, mfpt_grid
from .engine import CampaignEntry, WalkConfig, run_campaign
from .errors import NescapeError, ValidationError
from .kernels import get_kernel
from .manifest import RunManifest, parse_manifest_data
from .stats import (
    average_tau,
    build_comparison,
    layer_volume_fraction,
    relative_boundary_time,
    relative_error,
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.9g" % value
    return str(value)


def _write_csv(path: Path, meta_lines: Sequence[str], columns: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in meta_lines:
            fh.write("# %s\n" % line)
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _meta(manifest: RunManifest) -> List[str]:
    _, backend = get_kernel("auto")
    return [
        "nescape %s kernel=%s" % (__version__, backend),
        "manifest_sha256=%s base_seed=%d" % (manifest.sha256(), manifest.base_seed),
    ]


def _walk_configs(manifest: RunManifest) -> List[WalkConfig]:
    return [
        WalkConfig(
            start=launch,
            traps=manifest.traps,
            diffusion=manifest.diffusion,
            deltas=manifest.deltas,
            max_steps=manifest.max_steps,
            integrator=manifest.integrator,
            tau_relax=manifest.tau_relax,
            reflection=manifest.reflection,
        )
        for launch in manifest.launches
    ]


def _run_campaign(manifest: RunManifest) -> List[CampaignEntry]:
    entries = run_campaign(
        _walk_configs(manifest),
        manifest.n_walks,
        manifest.base_seed,
        manifest.workers,
    )
    failed = [e for e in entries if e.error is not None]
    if failed:
        first = failed[0]
        raise NescapeError(
            "%d launch(es) failed, first at %s: %s"
            % (len(failed), first.config.start, first.error)
        )
    return entries


def _model(manifest: RunManifest) -> AsymptoticModel:
    return AsymptoticModel.from_traps(
        manifest.traps, manifest.epsilon, manifest.diffusion.diffusivity
    )


def _delta_label(delta: float) -> str:
    return ("%g" % delta).replace("-", "m")


def cmd_simulate(manifest: RunManifest, out_dir: Path) -> int:
    entries = _run_campaign(manifest)
    stats = [e.stats for e in entries]
    meta = _meta(manifest)

    columns = ["launch_x", "launch_y", "launch_z", "mean", "stderr", "n", "escaped", "excluded", "tau_excluded"]
    for d in manifest.deltas:
        columns += ["tau_%s" % _delta_label(d), "tau_stderr_%s" % _delta_label(d)]
    for j in range(len(manifest.traps)):
        columns.append("trap%d_count" % j)
    rows = []
    for s in stats:
        row = [s.start[0], s.start[1], s.start[2], s.mean_escape_time,
               s.stderr_escape_time, s.n_walks, s.n_escaped, s.n_excluded, s.tau_excluded]
        for m in range(len(manifest.deltas)):
            row += [s.tau[m], s.tau_stderr[m]]
        row += list(s.per_trap_counts)
        rows.append(row)
    _write_csv(out_dir / "ensembles.csv", meta, columns, rows)

    comparison = build_comparison(stats, _model(manifest))
    _write_csv(
        out_dir / "comparison.csv",
        meta,
        ["launch_x", "launch_y", "launch_z", "mean", "stderr", "asymptotic",
         "delta_v_pct", "n", "excluded"],
        [
            [r.launch[0], r.launch[1], r.launch[2], r.simulated, r.stderr,
             r.asymptotic, r.delta_v_pct, r.n_walks, r.n_excluded]
            for r in comparison
        ],
    )
    print("wrote %s and %s" % (out_dir / "ensembles.csv", out_dir / "comparison.csv"))
    return 0


def cmd_asymptotic(manifest: RunManifest, out_dir: Path) -> int:
    model = _model(manifest)
    grid = mfpt_grid(model, manifest.field_grid_r, manifest.field_grid_phi)
    meta = _meta(manifest)
    meta.append(
        "axes r=[%s] phi=[%s] plane=%s"
        % (
            " ".join(_fmt(r) for r in grid.r_values),
            " ".join(_fmt(p) for p in grid.phi_values),
            grid.plane,
        )
    )
    meta.append(
        "eps=%s preset=%s avg_mfpt=%s"
        % (_fmt(manifest.epsilon), manifest.preset or manifest.traps.label, _fmt(model.avg_mfpt()))
    )
    rows = []
    for i, r in enumerate(grid.r_values):
        for j, phi in enumerate(grid.phi_values):
            rows.append([r, phi, grid.values[i, j], int(grid.near_trap[i, j])])
    _write_csv(out_dir / "field.csv", meta, ["r", "phi", "v", "near_trap"], rows)
    print("wrote %s" % (out_dir / "field.csv"))
    return 0


def cmd_boundary(manifest: RunManifest, out_dir: Path) -> int:
    entries = _run_campaign(manifest)
    stats = [e.stats for e in entries]
    meta = _meta(manifest)
    mode = manifest.diffusion.mode

    columns = ["launch_x", "launch_y", "launch_z", "n", "mode"]
    for d in manifest.deltas:
        columns += ["tau_%s" % _delta_label(d), "tau_stderr_%s" % _delta_label(d)]
    rows = []
    for s in stats:
        row = [s.start[0], s.start[1], s.start[2], s.n_walks, mode]
        for m in range(len(manifest.deltas)):
            row += [s.tau[m], s.tau_stderr[m]]
        rows.append(row)
    _write_csv(out_dir / "boundary.csv", meta, columns, rows)

    summary_rows = [
        [d, layer_volume_fraction(d), average_tau(stats, d), mode]
        for d in manifest.deltas
    ]
    _write_csv(
        out_dir / "boundary_summary.csv",
        meta,
        ["delta", "volume_fraction", "tau_mean", "mode"],
        summary_rows,
    )
    print("wrote %s and %s" % (out_dir / "boundary.csv", out_dir / "boundary_summary.csv"))
    return 0


def cmd_compare(manifest: RunManifest, out_dir: Path) -> int:
    iso = replace(manifest, diffusion=replace(manifest.diffusion, mode="isotropic"))
    aniso = replace(manifest, diffusion=replace(manifest.diffusion, mode="anisotropic"))
    iso_stats = [e.stats for e in _run_campaign(iso)]
    aniso_stats = [e.stats for e in _run_campaign(aniso)]
    model = _model(manifest)
    meta = _meta(manifest)

    rows = []
    for si, sa in zip(iso_stats, aniso_stats):
        v = model.field(si.start)
        rows.append(
            [si.start[0], si.start[1], si.start[2], v,
             si.mean_escape_time, si.stderr_escape_time,
             sa.mean_escape_time, sa.stderr_escape_time,
             relative_error(v, si.mean_escape_time),
             relative_error(v, sa.mean_escape_time),
             si.n_walks]
        )
    _write_csv(
        out_dir / "compare_mfpt.csv",
        meta,
        ["launch_x", "launch_y", "launch_z", "asymptotic",
         "mean_iso", "stderr_iso", "mean_aniso", "stderr_aniso",
         "delta_v_iso_pct", "delta_v_aniso_pct", "n"],
        rows,
    )

    summary = []
    for d in manifest.deltas:
        t_iso = average_tau(iso_stats, d)
        t_aniso = average_tau(aniso_stats, d)
        summary.append(
            [d, layer_volume_fraction(d), t_iso, t_aniso,
             relative_boundary_time(t_iso, t_aniso)]
        )
    _write_csv(
        out_dir / "compare_boundary.csv",
        meta,
        ["delta", "volume_fraction", "tau_iso", "tau_aniso", "delta_tau_pct"],
        summary,
    )
    print("wrote %s and %s" % (out_dir / "compare_mfpt.csv", out_dir / "compare_boundary.csv"))
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "asymptotic": cmd_asymptotic,
    "boundary": cmd_boundary,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nescape",
        description="First-passage Monte Carlo and asymptotic escape times "
        "for Brownian particles in the unit sphere with absorbing surface traps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--manifest", help="JSON manifest path (defaults apply if omitted)")
        p.add_argument("--out", help="output directory (overrides manifest out_dir)")
        p.add_argument("--workers", type=int, help="worker threads")
        p.add_argument("--seed", type=int, help="base seed override")
        p.add_argument("--walks", type=int, help="walks per launch override")
        p.add_argument("--preset", choices=["one-trap", "two-trap"], help="trap preset override")
        p.add_argument("--anisotropic", action="store_true", help="anisotropic near-wall diffusion")
        p.add_argument("--scaling", choices=["sqrt", "linear"], help="anisotropic scaling law")
        p.add_argument("--variance", choices=["standard", "paper"], help="step-variance convention")
    return parser


def _load(args) -> RunManifest:
    data = {}
    if args.manifest:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            text = fh.read()
        if text.strip():
            try:
                data = json.loads(text)
            except json.JSONDecodeError as err:
                raise ValidationError(
                    "manifest %s is not valid JSON: %s" % (args.manifest, err)
                )
            if not isinstance(data, dict):
                raise ValidationError("manifest root must be a JSON object")
    if args.preset:
        data["preset"] = args.preset
        data.pop("traps", None)
    if args.walks is not None:
        data["n_walks"] = args.walks
    if args.seed is not None:
        data["base_seed"] = args.seed
    if args.workers is not None:
        data["workers"] = args.workers
    diffusion = dict(data.get("diffusion") or {})
    if args.anisotropic:
        diffusion["mode"] = "anisotropic"
    if args.scaling:
        diffusion["scaling"] = args.scaling
    if args.variance:
        diffusion["variance"] = args.variance
    if diffusion:
        data["diffusion"] = diffusion
    if args.out:
        data["out_dir"] = args.out
    return parse_manifest_data(data)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = _load(args)
        out_dir = Path(manifest.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](manifest, out_dir)
    except ValidationError as err:
        print("validation error: %s" % err, file=sys.stderr)
        return 1
    except NescapeError as err:
        print("error: %s" % err, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
