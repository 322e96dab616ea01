"""Command-line front end.

    casimir-nems equilibria --config configs/si-au.yaml --out results
    casimir-nems sweep --config configs/si-au-rough-1-10.yaml --set roughness.plate="5 nm"
    casimir-nems collapse --config configs/si-si.yaml
    casimir-nems calibrate-voltage --config configs/electrostatic.yaml

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .config import RunConfig, load_config
from .errors import ConfigurationError, ConvergenceError, DomainError, SearchError
from .lifshitz import HalfSpacePair
from .sensor import (
    BalanceTable,
    EquilibriumReport,
    calibrate_voltage,
    find_collapse_pressure,
    find_equilibria,
    sweep_balance_curves,
)

__all__ = ["main", "run", "emit_curve_csv", "metadata_header", "resolve_voltage", "EXIT_OK",
           "EXIT_VALIDATION", "EXIT_NUMERICAL", "EXIT_IO"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

CURVE_COLUMNS = ("z_nm", "f_Pa", "p_tot_rough_Pa", "p_tot_smooth_Pa")
Z_FORMAT = "{:.4f}"
P_FORMAT = "{:.9e}"
NM = 1e-9


def resolve_voltage(config: RunConfig, pair: HalfSpacePair) -> float:
    """The configured voltage, or the one pinned by ``electrostatics.calibrate``."""
    if config.calibration is None:
        return config.voltage
    scenario = config.scenario(pair=pair)
    if config.calibration.reference is not None:
        scenario = scenario.evolve(roughness=config.calibration.reference)
    return calibrate_voltage(scenario, config.calibration.stable_root, config.search)


def metadata_header(config: RunConfig, pair: HalfSpacePair, mode: str, voltage: float,
                    extra: Iterable[str] = ()) -> list[str]:
    lc = config.lifshitz
    lines = [
        f"casimir-nems {__version__}",
        f"mode: {mode}",
        f"scenario: {config.name}",
        f"config_hash: {config.config_hash}",
        f"membrane: {json.dumps(pair.body1.metadata(), sort_keys=True)}",
        f"plate: {json.dumps(pair.body2.metadata(), sort_keys=True)}",
        "extrapolation: membrane={} plate={}".format(
            pair.body1.zero_frequency_extrapolation.value, pair.body2.zero_frequency_extrapolation.value
        ),
        f"temperature_K: {lc.temperature!r}",
        f"roughness_m: membrane={config.roughness.delta1!r} plate={config.roughness.delta2!r}",
        f"measured_pressure_Pa: {config.measured_pressure!r}",
        f"voltage_V: {voltage!r}",
        f"include_casimir: {str(config.include_casimir).lower()}",
        "tolerances: matsubara_rel={!r} matsubara_max_terms={} quadrature_rel={!r} scheme={} "
        "root_xtol_m={!r} collapse_tol_Pa={!r}".format(
            lc.matsubara_rel_tolerance, lc.matsubara_max_terms, lc.quadrature_rel_tolerance,
            lc.quadrature_scheme.value, config.search.root_xtol, config.search.collapse_tolerance,
        ),
    ]
    lines.extend(extra)
    return lines


def _write(path: Path, header: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def emit_curve_csv(table: BalanceTable, path: str | Path, header: Sequence[str] = ()) -> Path:
    """Write a balance-curve table as CSV with a ``#`` metadata header."""
    if len(table) == 0:
        raise ConfigurationError("balance-curve table is empty", field="sweep")
    header = list(header) + [
        f"format: z_nm {Z_FORMAT}; pressures in Pa {P_FORMAT}",
        "columns: z_nm = separation; f_Pa = k(h-z)/(LD) - P; "
        "p_tot_rough_Pa = attraction with roughness; p_tot_smooth_Pa = attraction for smooth surfaces",
    ]
    rows = (
        (Z_FORMAT.format(z / NM), P_FORMAT.format(f), P_FORMAT.format(pr), P_FORMAT.format(ps))
        for z, f, pr, ps in table.rows()
    )
    path = Path(path)
    _write(path, header, CURVE_COLUMNS, rows)
    return path


def _report_rows(label: str, report: EquilibriumReport):
    for root in report.roots:
        yield (label, Z_FORMAT.format(root.z / NM), root.stability.value,
               P_FORMAT.format(root.slope_margin), P_FORMAT.format(root.residual))


def _equilibria(config: RunConfig, pair: HalfSpacePair, voltage: float, out: Path) -> list[str]:
    scenario = config.scenario(voltage, pair)
    rough = find_equilibria(scenario, config.search)
    smooth = find_equilibria(scenario.smooth(), config.search) if not scenario.roughness.is_smooth else rough
    lines = [f"{config.name}: {rough.root_count} equilibrium position(s)" + (" (collapse)" if rough.collapse else "")]
    for label, report in (("rough", rough), ("smooth", smooth)):
        for root in report.roots:
            lines.append(f"  {label:6s} {root.stability.value:8s} z = {root.z / NM:9.3f} nm")
    for kind in ("unstable", "stable"):
        a, b = getattr(rough, kind), getattr(smooth, kind)
        if a is not None and b is not None:
            lines.append(f"  {kind} shift from roughness: {(a.z - b.z) / NM:+.3f} nm")
    header = metadata_header(config, pair, "equilibria", voltage)
    header.append(f"format: z_nm {Z_FORMAT}; slope_margin_Pa_per_m = -dg/dz {P_FORMAT}; residual_Pa {P_FORMAT}")
    _write(out / f"{config.name}_equilibria.csv", header,
           ("surface", "z_nm", "stability", "slope_margin_Pa_per_m", "residual_Pa"),
           list(_report_rows("rough", rough)) + list(_report_rows("smooth", smooth)))
    return lines


def _collapse(config: RunConfig, pair: HalfSpacePair, voltage: float, out: Path) -> list[str]:
    scenario = config.scenario(voltage, pair)
    p_crit = find_collapse_pressure(scenario, config.search)
    header = metadata_header(config, pair, "collapse", voltage)
    header.append(f"format: p_crit_Pa {P_FORMAT}")
    _write(out / f"{config.name}_collapse.csv", header, ("p_crit_Pa",), [(P_FORMAT.format(p_crit),)])
    return [f"{config.name}: collapse pressure P_crit = {p_crit:.3f} Pa"]


def _sweep(config: RunConfig, pair: HalfSpacePair, voltage: float, out: Path) -> list[str]:
    if config.sweep is None:
        raise ConfigurationError("sweep mode needs a 'sweep' section", field="sweep")
    table = sweep_balance_curves(config.scenario(voltage, pair), config.sweep.z)
    path = emit_curve_csv(table, out / f"{config.name}_curve.csv", metadata_header(config, pair, "sweep", voltage))
    return [f"{config.name}: wrote {len(table)} rows to {path}"]


def _calibrate(config: RunConfig, pair: HalfSpacePair, voltage: float, out: Path) -> list[str]:
    if config.calibration is None:
        raise ConfigurationError("calibrate-voltage needs electrostatics.calibrate.stable_root",
                                 field="electrostatics.calibrate")
    header = metadata_header(config, pair, "calibrate-voltage", voltage)
    header.append(f"format: stable_root_nm {Z_FORMAT}; voltage_V {P_FORMAT}")
    target = config.calibration.stable_root
    _write(out / f"{config.name}_voltage.csv", header, ("stable_root_nm", "voltage_V"),
           [(Z_FORMAT.format(target / NM), P_FORMAT.format(voltage))])
    return [f"{config.name}: U0 = {voltage:.6f} V places the stable root at {target / NM:.3f} nm"]


_MODES = {
    "equilibria": _equilibria,
    "collapse": _collapse,
    "sweep": _sweep,
    "calibrate-voltage": _calibrate,
}


def run(mode: str, config: RunConfig, out: str | Path) -> list[str]:
    """Execute one output mode; returns the human-readable summary lines."""
    pair = config.pair()
    voltage = resolve_voltage(config, pair)
    return _MODES[mode](config, pair, voltage, Path(out))


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="casimir-nems", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in _MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="scenario YAML file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field, e.g. roughness.plate='10 nm' (repeatable)")
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--format", choices=("csv",), default="csv")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = load_config(args.config, args.overrides)
        lines = run(args.mode, config, args.out)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, SearchError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print("\n".join(lines))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
