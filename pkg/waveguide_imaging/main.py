"""Command-line entry point.

    waveguide-imaging scenario validate <file>
    waveguide-imaging scenario preset <point|shell|anisotropic> --out <file>
    waveguide-imaging modes <scenario> [--limit N] [--verify] [--out <csv>]
    waveguide-imaging field <scenario> --plane x1=C|x2=C|x3=C --out <csv>
    waveguide-imaging field <scenario> --point X1 X2 X3 [...] [--out <csv>]
    waveguide-imaging greens-check <scenario> [--pairs N] [--evanescent]
    waveguide-imaging synthesize <scenario> --out <file> [--snr DB --seed S] [--born M]
    waveguide-imaging rtm <scenario> --data <file> --out <dir> [--normalize]
    waveguide-imaging l1 <scenario> --data <file> --matrix <cache> --epsilon <v> --out <dir>
    waveguide-imaging run <scenario> [--stages ...] --out <dir> [--normalize]
    waveguide-imaging export <volume> --scenario <file> --out <dir>

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

import argparse
import json
import os
import pathlib
import sys
from typing import Callable, Dict, List, Optional

import numpy as np

from .controllers import (
    PRESET_FILES, STAGES, PipelineOptions, export_figures, load_data, load_matrix, load_scenario,
    load_volume, preset, run_pipeline, save_data, save_matrix, save_volume, scenario_hash,
    write_scenario,
)
from .controllers.scenario_manager import APERTURES
from .imaging import L1Params, l1_reconstruct, rtm_image
from .models import PARAMETERIZATIONS, NoiseRecord, Scenario, VoxelGrid
from .physics import (
    add_noise, assemble_sensing_matrix, born_series_field, enumerate_propagating,
    eval_reference_field, run_greens_checks, run_mode_checks, scenario_amplitudes,
    scenario_modes, synthesize_data,
)
from .utils import (
    get_logger, log_error, app_logger, get_version, get_full_version_string, StaleCacheError,
    NumericValidator, ValidationError, WaveguideImagingError, validate_file_path, validate_output_dir,
)
from .utils.file_formats import data_csv_table, modes_csv_table, write_bytes_atomic, write_csv
from .views import checks_table, format_table, modes_table, report_table, violations_text

logger = get_logger("main")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2

POSITIVE_OPTIONS = ("threads", "pairs", "max_iter", "tol", "epsilon")
NONNEGATIVE_OPTIONS = ("limit", "born", "lam")


def check_numeric_options(args: argparse.Namespace) -> None:
    """Reject nonpositive counts, tolerances and pitches before any work starts."""
    for name in POSITIVE_OPTIONS:
        value = getattr(args, name, None)
        if value is not None:
            NumericValidator.require_positive(value, f"--{name.replace('_', '-')}")
    for name in NONNEGATIVE_OPTIONS:
        value = getattr(args, name, None)
        if value is not None:
            NumericValidator.require_nonnegative(value, f"--{name}")
    for value in getattr(args, "born_pitch", None) or ():
        NumericValidator.require_positive(value, "--born-pitch")
    if getattr(args, "snr", None) is not None:
        NumericValidator.require_finite(args.snr, "--snr")


def _parameterization(args: argparse.Namespace, scenario) -> str:
    if args.parameterization:
        return args.parameterization
    if scenario.reflector is not None:
        return scenario.reflector.parameterization
    return "isotropic"


def cmd_scenario_validate(args: argparse.Namespace) -> int:
    scenario = load_scenario(validate_file_path(args.file))
    print(f"{args.file}: valid (hash {scenario_hash(scenario)[:12]})")
    return EXIT_OK


def cmd_scenario_preset(args: argparse.Namespace) -> int:
    scenario, _ = preset(args.name, args.aperture)
    write_scenario(scenario, args.out)
    print(f"Wrote {args.name} preset ({args.aperture} aperture) to {args.out}")
    return EXIT_OK


def cmd_modes(args: argparse.Namespace) -> int:
    scenario = load_scenario(validate_file_path(args.scenario))
    mode_set = enumerate_propagating(scenario)
    print(modes_table(mode_set.entries, mode_set.lattice_count, args.limit))
    print(f"retained budget M = {scenario.mode_budget}")
    if args.out:
        write_csv(args.out, *modes_csv_table(scenario_modes(scenario)))
        print(f"Wrote {scenario.mode_budget} retained modes to {args.out}")
    if args.verify:
        results = run_mode_checks(scenario)
        print(checks_table(results))
        if not all(r.passed for r in results):
            return EXIT_NUMERICAL
    return EXIT_OK


def plane_points(scenario: Scenario, plane: str) -> np.ndarray:
    """Window-grid points on the plane ``x1=C``, ``x2=C`` or ``x3=C``."""
    axis_name, sep, value = plane.partition("=")
    axes = {"x1": 0, "x2": 1, "x3": 2}
    if not sep or axis_name.strip() not in axes:
        raise ValidationError(f"Plane must read x1=C, x2=C or x3=C: {plane}", {"plane": plane})
    try:
        level = float(value)
    except ValueError:
        raise ValidationError(f"Plane level is not a number: {plane}", {"plane": plane}) from None
    fixed = axes[axis_name.strip()]
    NumericValidator.require_finite(level, "plane level")
    grid = VoxelGrid.from_spec(scenario.imaging.window_grid())
    free = [a for a in range(3) if a != fixed]
    mesh = np.meshgrid(grid.axis(free[0]), grid.axis(free[1]), indexing="ij")
    points = np.empty((mesh[0].size, 3))
    points[:, free[0]] = mesh[0].ravel()
    points[:, free[1]] = mesh[1].ravel()
    points[:, fixed] = level
    return points


def cmd_field(args: argparse.Namespace) -> int:
    scenario = load_scenario(validate_file_path(args.scenario))
    if args.plane:
        if not args.out:
            raise ValidationError("field --plane needs --out")
        points = plane_points(scenario, args.plane)
        values = eval_reference_field(points, scenario_amplitudes(scenario))
        write_csv(args.out, np.concatenate([points, np.abs(values)], axis=1),
                  ("x1", "x2", "x3", "abs_1", "abs_2", "abs_3"))
        print(f"Wrote {points.shape[0]} samples of |E| on {args.plane} to {args.out}")
        return EXIT_OK
    if not args.point:
        raise ValidationError("field needs --plane or at least one --point")
    points = np.asarray(args.point, dtype=float)
    values = eval_reference_field(points, scenario_amplitudes(scenario))
    rows = [(*p, *v) for p, v in zip(points.tolist(), values.tolist())]
    print(format_table(("x1", "x2", "x3", "E1", "E2", "E3"), rows))
    if args.out:
        table = np.concatenate([points, values.real, values.imag], axis=1)
        write_csv(args.out, table, ("x1", "x2", "x3", "re_1", "re_2", "re_3",
                                    "im_1", "im_2", "im_3"))
    return EXIT_OK


def cmd_greens_check(args: argparse.Namespace) -> int:
    scenario = load_scenario(validate_file_path(args.scenario))
    results = run_greens_checks(scenario, args.pairs, args.seed, args.evanescent)
    print(checks_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def cmd_synthesize(args: argparse.Namespace) -> int:
    scenario = load_scenario(validate_file_path(args.scenario))
    noise = None if args.snr is None else NoiseRecord(args.snr, args.seed)
    if args.born:
        pitch = tuple(args.born_pitch) if args.born_pitch else None
        result = born_series_field(scenario, iterations=args.born, pitch=pitch)
        data = result.data
        if noise is not None:
            data.values = add_noise(data.values, noise.snr_db, noise.seed)
            data.noise = noise
        if result.update_norms:
            print("Born update norms: " + ", ".join(f"{n:.3e}" for n in result.update_norms))
    else:
        data = synthesize_data(scenario, noise=noise)
    save_data(args.out, data)
    if args.csv:
        table, columns = data_csv_table(data.values, data.receivers, data.components)
        write_csv(pathlib.Path(args.out).with_suffix(".csv"), table, columns)
    print(f"Wrote {data.values.shape[0]} receivers x {len(data.components)} components to {args.out}")
    return EXIT_OK


def cmd_rtm(args: argparse.Namespace) -> int:
    scenario = load_scenario(validate_file_path(args.scenario))
    data = load_data(validate_file_path(args.data))
    grid = VoxelGrid.from_spec(scenario.imaging.window_grid())
    digest = scenario_hash(scenario)
    image = rtm_image(data, scenario, grid, _parameterization(args, scenario), digest,
                      args.normalize)
    out_dir = pathlib.Path(validate_output_dir(args.out))
    save_volume(out_dir / "rtm.wgiv", image)
    print(f"Wrote RTM volume {grid.shape} x {len(image.channels)} channel(s) to {out_dir / 'rtm.wgiv'}")
    if args.export:
        files = export_figures(image, scenario, out_dir / "figures", "rtm", args.full_channels)
        print(f"Exported {len(files)} slice files")
    return EXIT_OK


def cmd_l1(args: argparse.Namespace) -> int:
    scenario = load_scenario(validate_file_path(args.scenario))
    data = load_data(validate_file_path(args.data))
    grid = VoxelGrid.from_spec(scenario.imaging.l1_grid())
    digest = scenario_hash(scenario)
    parameterization = _parameterization(args, scenario)
    sensing = None
    if args.matrix and pathlib.Path(args.matrix).exists() and not args.refresh:
        sensing = load_matrix(args.matrix, scenario, grid, digest)
        if sensing.parameterization != parameterization:
            raise StaleCacheError(f"Matrix cache holds {sensing.parameterization} columns, "
                                  f"{parameterization} requested: {args.matrix}",
                                  {"file": args.matrix})
    if sensing is None:
        sensing = assemble_sensing_matrix(scenario, grid, parameterization, scenario_digest=digest)
        if args.matrix:
            save_matrix(args.matrix, sensing)
    relative = PipelineOptions(epsilon=args.epsilon).relative_epsilon(data.noise)
    epsilon = relative * float(np.linalg.norm(data.values))
    params = L1Params(epsilon=epsilon, lam=args.lam, max_iter=args.max_iter, tol=args.tol,
                      nonneg=args.nonneg, strict=args.strict)
    image, report = l1_reconstruct(data, sensing, params)
    out_dir = pathlib.Path(validate_output_dir(args.out))
    save_volume(out_dir / "l1.wgiv", image)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    write_bytes_atomic(out_dir / "l1_report.json", text.encode("utf-8"))
    print(report_table(report.to_dict()))
    if report.warning:
        print(f"warning: {report.warning}")
    if args.export:
        files = export_figures(image, scenario, out_dir / "figures", "l1")
        print(f"Exported {len(files)} slice files")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    options = PipelineOptions(
        snr_db=args.snr, seed=args.seed, epsilon=args.epsilon,
        parameterization=args.parameterization, max_iter=args.max_iter, tol=args.tol,
        nonneg=args.nonneg, full_channels=args.full_channels, normalize_rtm=args.normalize,
        refresh=args.refresh,
    )
    out = validate_output_dir(args.out) if args.out else None
    manifest = run_pipeline(validate_file_path(args.scenario), args.stages, out, options)
    rows = [(stage, f"{manifest.timings.get(stage, 0.0):.2f}",
             len(manifest.stage_outputs.get(stage, []))) for stage in manifest.stages]
    print(format_table(("stage", "seconds", "files"), rows))
    print(f"scenario hash {manifest.scenario_hash[:12]}, {len(manifest.outputs)} outputs")
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    scenario = load_scenario(validate_file_path(args.scenario))
    image = load_volume(validate_file_path(args.volume))
    planes: Optional[Dict[str, float]] = None
    if args.y1 is not None or args.y3 is not None:
        y1, y3 = scenario.display_planes()
        planes = {"axial": args.y1 if args.y1 is not None else y1,
                  "cross-range": args.y3 if args.y3 is not None else y3}
    stem = pathlib.Path(args.volume).stem
    files = export_figures(image, scenario, validate_output_dir(args.out), stem,
                           args.full_channels, planes)
    for path in files:
        print(path)
    return EXIT_OK


def _add_l1_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", type=float, default=None,
                        help="residual bound relative to ||d|| (default: noise level or 1e-8)")
    parser.add_argument("--max-iter", type=int, default=5000)
    parser.add_argument("--tol", type=float, default=1e-6)
    parser.add_argument("--nonneg", action="store_true", help="restrict the potential to v >= 0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waveguide-imaging",
        description="Modal forward modeling and array imaging in electromagnetic waveguides",
    )
    parser.add_argument("--version", action="version", version=get_full_version_string())
    parser.add_argument("--threads", type=int, default=None, help="worker cap (overrides WGI_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    scenario = sub.add_parser("scenario", help="validate or generate scenario files")
    scenario_sub = scenario.add_subparsers(dest="action", required=True)
    validate = scenario_sub.add_parser("validate", help="check every scenario invariant")
    validate.add_argument("file")
    validate.set_defaults(func=cmd_scenario_validate)
    make = scenario_sub.add_parser("preset", help="write a reference scenario")
    make.add_argument("name", choices=sorted(PRESET_FILES))
    make.add_argument("--aperture", choices=APERTURES, default="partial")
    make.add_argument("--out", required=True)
    make.set_defaults(func=cmd_scenario_preset)

    modes = sub.add_parser("modes", help="list propagating modes")
    modes.add_argument("scenario")
    modes.add_argument("--limit", type=int, default=20, help="rows to print (0 = all)")
    modes.add_argument("--verify", action="store_true", help="run the mode/basis checks")
    modes.add_argument("--out", help="optional CSV table of the retained modes")
    modes.set_defaults(func=cmd_modes)

    field = sub.add_parser("field", help="evaluate the reference field")
    field.add_argument("scenario")
    field.add_argument("--point", nargs=3, type=float, action="append", metavar=("X1", "X2", "X3"))
    field.add_argument("--plane", help="window slice x1=C, x2=C or x3=C of |E| (needs --out)")
    field.add_argument("--out", help="CSV output")
    field.set_defaults(func=cmd_field)

    greens = sub.add_parser("greens-check", help="run the Green's tensor property suite")
    greens.add_argument("scenario")
    greens.add_argument("--pairs", type=int, default=100)
    greens.add_argument("--seed", type=int, default=0)
    greens.add_argument("--evanescent", action="store_true", help="include the decay check")
    greens.set_defaults(func=cmd_greens_check)

    synth = sub.add_parser("synthesize", help="generate array data for the scenario reflector")
    synth.add_argument("scenario")
    synth.add_argument("--out", required=True)
    synth.add_argument("--snr", type=float, default=None, help="signal-to-noise ratio in dB")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--born", type=int, default=0, help="Born-series terms (0 = Born data)")
    synth.add_argument("--born-pitch", type=float, nargs=2, metavar=("CROSS", "RANGE"))
    synth.add_argument("--csv", action="store_true", help="also write a CSV mirror")
    synth.set_defaults(func=cmd_synthesize)

    rtm = sub.add_parser("rtm", help="reverse time migration image")
    rtm.add_argument("scenario")
    rtm.add_argument("--data", required=True)
    rtm.add_argument("--out", required=True)
    rtm.add_argument("--parameterization", choices=sorted(PARAMETERIZATIONS))
    rtm.add_argument("--export", action="store_true")
    rtm.add_argument("--full-channels", action="store_true")
    rtm.add_argument("--normalize", action="store_true",
                     help="divide every voxel by the norm of its sensing column")
    rtm.set_defaults(func=cmd_rtm)

    l1 = sub.add_parser("l1", help="sparse l1 reconstruction")
    l1.add_argument("scenario")
    l1.add_argument("--data", required=True)
    l1.add_argument("--matrix", help="sensing-matrix cache file")
    l1.add_argument("--out", required=True)
    l1.add_argument("--lam", type=float, default=None, help="penalized form with this lambda")
    l1.add_argument("--strict", action="store_true", help="fail when the solver does not converge")
    l1.add_argument("--refresh", action="store_true", help="rebuild the matrix cache")
    l1.add_argument("--parameterization", choices=("isotropic", "diagonal"))
    l1.add_argument("--export", action="store_true")
    _add_l1_options(l1)
    l1.set_defaults(func=cmd_l1)

    run = sub.add_parser("run", help="run pipeline stages and write a manifest")
    run.add_argument("scenario")
    run.add_argument("--stages", nargs="+", choices=STAGES + ("all",), default=None)
    run.add_argument("--out", default=None)
    run.add_argument("--snr", type=float, default=None)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--parameterization", choices=("isotropic", "diagonal"))
    run.add_argument("--full-channels", action="store_true")
    run.add_argument("--normalize", action="store_true", help="column-normalized RTM image")
    run.add_argument("--refresh", action="store_true", help="ignore fresh caches")
    _add_l1_options(run)
    run.set_defaults(func=cmd_run)

    export = sub.add_parser("export", help="export slices of an image volume")
    export.add_argument("volume")
    export.add_argument("--scenario", required=True)
    export.add_argument("--out", required=True)
    export.add_argument("--y1", type=float, default=None)
    export.add_argument("--y3", type=float, default=None)
    export.add_argument("--full-channels", action="store_true")
    export.set_defaults(func=cmd_export)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the waveguide imaging command line."""
    parser = build_parser()
    args = parser.parse_args(argv)
    app_logger.log_startup(get_version())
    handler: Callable[[argparse.Namespace], int] = args.func
    try:
        check_numeric_options(args)
        if args.threads is not None:
            os.environ["WGI_THREADS"] = str(args.threads)
        return handler(args)
    except WaveguideImagingError as e:
        log_error("main", e, args.command)
        print(f"error: {e.message}", file=sys.stderr)
        violations = e.details.get("violations") if isinstance(e.details, dict) else None
        if violations:
            print(violations_text(violations), file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
