"""Command-line front end: ``raman-comb <command> [options]``.

Commands: spectrum, rabi, sweep, optimize, simulate, fit. Every command
accepts --output, --format (csv|json), --precision and --config. A config
file is a JSON object whose keys are option names (``phi``, ``omega-hz``,
...), optionally grouped under a section named after the command; flags on
the command line win over the file.

Angles may be written in units of π: ``pi``, ``0.5pi``, ``-2pi``, ``pi/4``.

Exit status: 0 success, 2 usage or input error, 3 numerical failure.
"""
import argparse
import csv
import io
import json
import math
import re
import sys

from . import comb as combmod
from .comb import MzGeometry, PhysicalContext, fmt
from .ionsim import FlopConfig, simulate_curve
from .optimize import (
    MODELS,
    DataFormatError,
    SweepSpec,
    fit_model,
    maximize,
    read_fit_data,
    sweep,
    sweep_to_csv,
    sweep_to_dicts,
)
from .schemes import SCHEMES, MzShifted, MzStatic, rabi

EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_ANGLE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")

# CLI variable names -> scheme field names
VARIABLES = {
    "phi": "phi",
    "delta": "delta",
    "dkdx": "slow_phase",
    "fast": "fast_phase",
    "carrier": "carrier_phase",
    "position": "position_phase",
}


class UsageError(Exception):
    pass


def parse_angle(text):
    """Float, or a multiple of π written as ``pi``, ``0.5pi``, ``pi/2``."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _ANGLE.match(str(text))
    if m:
        coef = m.group(1)
        value = math.pi * (float(coef) if coef not in ("", "+", "-") else (-1.0 if coef == "-" else 1.0))
        if m.group(2):
            value /= float(m.group(2))
        return value
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def _common():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("output")
    g.add_argument("-o", "--output", help="write to this file instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), help="output encoding")
    g.add_argument("--precision", type=int, help="significant digits, 6-17 (default 12)")
    g.add_argument("--config", help="JSON file of option defaults")
    return common


def _scheme_flags(p):
    p.add_argument("--scheme", choices=sorted(SCHEMES))
    p.add_argument("--phi", type=float, help="EOM modulation index")
    p.add_argument("--delta", type=float, help="cavity detuning in linewidths")
    p.add_argument("--dkdx", type=parse_angle, help="slow MZ phase δk·Δx")
    p.add_argument("--fast", type=parse_angle, help="fast MZ phase 2k·Δx (mod 2π)")
    p.add_argument("--carrier", type=parse_angle, help="shifted-MZ carrier phase k·Δx")
    p.add_argument("--position", type=parse_angle, help="beam-position phase δk·x")
    p.add_argument("--dx-cm", type=float, help="MZ path difference in cm (sets dkdx/fast/carrier)")
    p.add_argument("--hf-ghz", type=float, help="hyperfine splitting in GHz (default 14.53)")
    p.add_argument("--wavelength-nm", type=float, help="pre-doubling wavelength in nm (default 458)")


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="raman-comb", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="list comb lines")
    p.add_argument("--phi", type=float)
    p.add_argument("--delta", type=float, help="apply the cavity filter with this detuning")
    p.add_argument("--select", choices=("even", "odd"), help="keep only one sideband parity")
    p.add_argument("--double", action="store_true", default=None, help="show the frequency-doubled comb")
    p.add_argument("--tolerance", type=float, help="discarded-power tolerance (default 1e-14)")

    p = sub.add_parser("rabi", parents=[common], help="evaluate Ω/Ω₀ for one scheme")
    _scheme_flags(p)

    p = sub.add_parser("sweep", parents=[common], help="tabulate Ω/Ω₀ along one parameter")
    _scheme_flags(p)
    p.add_argument("--var", choices=sorted(VARIABLES))
    p.add_argument("--from", dest="start", type=parse_angle)
    p.add_argument("--to", dest="stop", type=parse_angle)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("optimize", parents=[common], help="maximize |Ω/Ω₀|")
    _scheme_flags(p)
    p.add_argument("--var", choices=sorted(VARIABLES))
    p.add_argument("--from", dest="start", type=parse_angle)
    p.add_argument("--to", dest="stop", type=parse_angle)
    p.add_argument("--var2", choices=sorted(VARIABLES), help="optional second free parameter")
    p.add_argument("--from2", dest="start2", type=parse_angle)
    p.add_argument("--to2", dest="stop2", type=parse_angle)
    p.add_argument("--grid", type=int, help="coarse grid points per axis (default 201)")
    p.add_argument("--tol", type=float, help="refinement bracket (default 1e-6)")

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo Rabi flopping curve")
    p.add_argument("--omega-hz", type=float, help="Rabi frequency Ω/2π in Hz")
    p.add_argument("--tmax", type=float, help="longest pulse in s")
    p.add_argument("--points", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise", type=float, help="fractional RMS Rabi-frequency jitter")
    p.add_argument("--leakage", type=float, help="pumping rate toward bright, 1/s")
    p.add_argument("--bright", type=float, help="mean photons, bright state")
    p.add_argument("--dark", type=float, help="mean photons, dark state")

    p = sub.add_parser("fit", parents=[common], help="least-squares fit of Rabi-frequency data")
    p.add_argument("--model", choices=sorted(MODELS))
    p.add_argument("--data", help="CSV file with header x,omega,sigma")
    p.add_argument("--scale0", type=float, help="initial y-axis scale")
    p.add_argument("--phi0", type=float, help="initial φ (mz-shifted)")
    p.add_argument("--delta0", type=float, help="initial δ (cavity)")
    p.add_argument("--hf-ghz", type=float)
    return parser


class Options:
    """Attribute lookup: command-line value, else config file, else default."""

    def __init__(self, args, config):
        self._args = args
        self._config = config

    def get(self, name, default=None):
        value = getattr(self._args, name, None)
        if value is not None:
            return value
        for key in (name, name.replace("_", "-")):
            if key in self._config:
                return self._config[key]
        return default

    def require(self, name):
        value = self.get(name)
        if value is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")
        return value


def _load_config(path, command):
    if not path:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a JSON object")
    merged = {k: v for k, v in doc.items() if not isinstance(v, dict)}
    section = doc.get(command)
    if isinstance(section, dict):
        merged.update(section)
    return merged


def _context(opts):
    ghz = opts.get("hf_ghz")
    if ghz is None:
        return PhysicalContext()
    return PhysicalContext(hyperfine_splitting=2 * math.pi * float(ghz) * 1e9)


def _angle_opt(opts, name, default):
    value = opts.get(name, default)
    return parse_angle(value) if value is not None else None


def scheme_from_options(opts, require_phi=True):
    scheme = opts.require("scheme")
    cls = SCHEMES[scheme]
    ctx = _context(opts)
    phi = opts.get("phi")
    if phi is None:
        if require_phi:
            raise UsageError("--phi is required")
        phi = 0.0
    phi = float(phi)
    if cls in (MzStatic, MzShifted):
        dx_cm = opts.get("dx_cm")
        if dx_cm is not None:
            wl = float(opts.get("wavelength_nm", 458.0)) * 1e-9
            geom = MzGeometry(float(dx_cm) / 100.0, k=2 * math.pi / wl)
            base = cls.from_geometry(phi, geom, ctx)
        else:
            base = cls(phi, 0.0)
        values = {"slow_phase": _angle_opt(opts, "dkdx", base.slow_phase)}
        if cls is MzStatic:
            values["fast_phase"] = _angle_opt(opts, "fast", base.fast_phase)
            values["position_phase"] = _angle_opt(opts, "position", base.position_phase)
        else:
            values["carrier_phase"] = _angle_opt(opts, "carrier", base.carrier_phase)
        return cls(phi, **values)
    if cls.__name__ == "CavityDetuned":
        delta = opts.get("delta")
        return cls(phi, float(delta) if delta is not None else 0.0)
    return cls(phi)


def _field(params, var):
    name = VARIABLES[var]
    if not hasattr(params, name):
        raise UsageError(f"scheme {params.scheme} has no parameter {var!r}")
    return name


def _table(header, rows, precision):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v, precision) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _dump(doc):
    return json.dumps(doc, indent=2) + "\n"


def cmd_spectrum(opts, fmt_, precision):
    phi = float(opts.require("phi"))
    comb = combmod.phase_modulated_comb(phi, float(opts.get("tolerance", combmod.DEFAULT_TOLERANCE)))
    delta = opts.get("delta")
    if delta is not None:
        comb = combmod.apply_cavity_filter(comb, float(delta))
    parity = opts.get("select")
    if parity:
        comb = combmod.select_sidebands(comb, parity)
    if opts.get("double"):
        comb = combmod.self_convolve(comb)
    if fmt_ == "json":
        return _dump(comb.to_dict(precision))
    return comb.to_csv(precision)


def cmd_rabi(opts, fmt_, precision):
    result = rabi(scheme_from_options(opts))
    doc = result.to_dict(precision)
    if fmt_ == "csv":
        return _table(
            ["scheme", "re", "im", "abs", "truncation_order"],
            [[doc["scheme"], result.omega_over_omega0.real, result.omega_over_omega0.imag,
              result.abs, result.truncation_order]],
            precision,
        )
    return _dump(doc)


def cmd_sweep(opts, fmt_, precision):
    params = scheme_from_options(opts, require_phi=opts.get("var") != "phi")
    name = _field(params, opts.require("var"))
    spec = SweepSpec(params, name, parse_angle(opts.require("start")), parse_angle(opts.require("stop")),
                     int(opts.get("steps", 200)))
    rows = sweep(spec)
    if fmt_ == "json":
        return _dump(sweep_to_dicts(rows, precision))
    return sweep_to_csv(rows, precision)


def cmd_optimize(opts, fmt_, precision):
    var = opts.require("var")
    params = scheme_from_options(opts, require_phi=False)
    if var != "phi" and opts.get("phi") is None:
        raise UsageError("--phi is required unless it is the free parameter")
    bounds = {_field(params, var): (parse_angle(opts.require("start")), parse_angle(opts.require("stop")))}
    var2 = opts.get("var2")
    if var2:
        bounds[_field(params, var2)] = (parse_angle(opts.require("start2")), parse_angle(opts.require("stop2")))
    elif isinstance(params, MzStatic) and opts.get("fast") is None and var != "fast":
        # the fast phase is not a usable knob; treat it as free
        bounds["fast_phase"] = (0.0, 2 * math.pi)
    result = maximize(params, bounds, grid=int(opts.get("grid", 201)), tol=float(opts.get("tol", 1e-6)))
    doc = {"scheme": params.scheme, **result.to_dict(precision)}
    if fmt_ == "csv":
        rows = [[k, v] for k, v in result.argmax.items()]
        rows += [["max_abs", result.value], ["degenerate", str(result.degenerate).lower()]]
        return _table(["name", "value"], rows, precision)
    return _dump(doc)


FLOP_FLAGS = {
    "omega_hz": ("rabi_frequency", lambda v: 2 * math.pi * float(v)),
    "tmax": ("max_pulse_time", float),
    "points": ("points", int),
    "shots": ("shots_per_point", int),
    "seed": ("rng_seed", int),
    "noise": ("amplitude_noise_frac", float),
    "leakage": ("leakage_rate", float),
    "bright": ("bright_mean", float),
    "dark": ("dark_mean", float),
}


def flop_config(opts):
    values = {}
    for key in FlopConfig.__dataclass_fields__:
        if key in opts._config:
            values[key] = opts._config[key]
    for flag, (key, conv) in FLOP_FLAGS.items():
        value = opts.get(flag)
        if value is not None:
            values[key] = conv(value)
    return FlopConfig(**values)


def cmd_simulate(opts, fmt_, precision):
    curve = simulate_curve(flop_config(opts))
    if fmt_ == "json":
        return _dump(curve.to_dicts(precision))
    return curve.to_csv(precision)


def cmd_fit(opts, fmt_, precision):
    model = opts.require("model")
    path = opts.require("data")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        data = read_fit_data(text)
    except DataFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None
    name = MODELS[model][0]
    initial = None
    shape0 = opts.get(f"{name}0")
    if shape0 is not None or opts.get("scale0") is not None:
        initial = {"scale": float(opts.get("scale0", 1.0)),
                   name: float(shape0 if shape0 is not None else (0.764 if name == "phi" else 0.1))}
    report = fit_model(data, model, initial=initial, ctx=_context(opts))
    if fmt_ == "csv":
        rows = [[k, v] for k, v in report.fitted.items()]
        rows += [["residual_rms", report.residual_rms], ["iterations", report.iterations],
                 ["converged", str(report.converged).lower()]]
        rows += [[f"covariance_diag_{k}", v] for k, v in zip(report.fitted, report.covariance_diag)]
        out = _table(["name", "value"], rows, precision)
    else:
        out = _dump(report.to_dict(precision))
    return out, (0 if report.converged else EXIT_NUMERICAL)


COMMANDS = {
    "spectrum": (cmd_spectrum, "csv"),
    "rabi": (cmd_rabi, "json"),
    "sweep": (cmd_sweep, "csv"),
    "optimize": (cmd_optimize, "json"),
    "simulate": (cmd_simulate, "csv"),
    "fit": (cmd_fit, "json"),
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    func, default_format = COMMANDS[args.command]
    try:
        config = _load_config(args.config, args.command)
        opts = Options(args, config)
        precision = int(opts.get("precision", 12))
        if not 6 <= precision <= 17:
            raise UsageError("--precision must lie in 6..17")
        fmt_ = opts.get("format", default_format)
        if fmt_ not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        out = func(opts, fmt_, precision)
        status = 0
        if isinstance(out, tuple):
            out, status = out
    except UsageError as exc:
        parser.error(str(exc))
    except ValueError as exc:
        print(f"raman-comb {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
