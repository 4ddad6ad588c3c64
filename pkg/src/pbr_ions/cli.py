"""Command-line entry point: ``pbr-ions <command> [flags]``.

Commands
--------
verify-protocol  probability matrix, forbidden-outcome assignment, circuit equivalence
threshold        eps threshold under the equal-trace-distance hypothesis
simulate         finite-shot run -> eps estimates -> bound verdict (JSON + CSV)
analyze          analyse externally supplied eps values and errors
ksmodel          Kochen-Specker trace distances against the quantum ones

Every command prints one JSON document (``schema: 1``) that echoes the
configuration, the seed and the package version.  Exit codes: 0 success,
2 protocol-structure failure, 3 configuration error.

A ``--config FILE`` of ``key = value`` lines (``#`` comments allowed) sets
defaults for the flags of the same name, e.g. ``kappa = 0.01``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import subprocess
import sys
from dataclasses import asdict, dataclass
from importlib import metadata
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bounds, experiment, ontic, protocol
from .quantum import OUTCOMES_2Q, quantum_trace_distance, state_from_bloch

SCHEMA = 1
EXIT_OK, EXIT_PROTOCOL, EXIT_CONFIG = 0, 2, 3
TARGET_EPS = 0.011


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    kappa: float = 0.01
    noise_p: float = 0.0
    shots: int = 10_000
    seed: int = 0
    grid_resolution: int = ontic.DEFAULT_GRID
    circuit: str = "hcz"

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 0.5:
            raise ConfigError(f"kappa must lie in [0, 0.5], got {self.kappa}")
        if not 0.0 <= self.noise_p <= 1.0:
            raise ConfigError(f"noise-p must lie in [0, 1], got {self.noise_p}")
        if self.shots < 1:
            raise ConfigError(f"shots must be positive, got {self.shots}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.grid_resolution < 1:
            raise ConfigError(f"grid must be positive, got {self.grid_resolution}")
        if self.circuit not in ("hcz", "ms"):
            raise ConfigError(f"circuit must be 'hcz' or 'ms', got {self.circuit!r}")


def version_string() -> str:
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = "0+unknown"
    try:
        described = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if described.returncode == 0 and described.stdout.strip():
            return f"{version}+g{described.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return version


# -- parsing helpers ----------------------------------------------------------

_PI_TERM = re.compile(r"^\s*(?P<num>[-+]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$")


def parse_angle(text: str) -> float:
    """Float radians, or multiples of pi such as ``pi/2`` or ``3pi/4``."""
    m = _PI_TERM.match(text)
    if m:
        num = m.group("num")
        factor = float(num) if num not in ("", "+", "-") else (-1.0 if num == "-" else 1.0)
        return factor * math.pi / float(m.group("den") or 1)
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def angle_list(text: str) -> list[float]:
    return [parse_angle(part) for part in text.split(",") if part.strip()]


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value.strip("\"'")
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file providing flag defaults")
    common.add_argument("--kappa", type=float, default=0.01, help="crosstalk fraction of an addressed pi pulse")
    common.add_argument("--noise-p", default=None, help="depolarizing strength, or 'auto' to calibrate")
    common.add_argument("--shots", type=int, default=10_000, help="shots per input")
    common.add_argument("--seed", type=lambda v: int(v, 0), default=0, help="master seed")
    common.add_argument("--grid", type=int, default=ontic.DEFAULT_GRID, help="Fibonacci sphere nodes")
    common.add_argument("--circuit", choices=("hcz", "ms"), default="hcz")
    common.add_argument("--out", help="write the output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = _Parser(prog="pbr-ions", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("verify-protocol", parents=[common], help="zero pattern and circuit equivalence")
    sub.add_parser("threshold", parents=[common], help="eps threshold at the given kappa")

    sim = sub.add_parser("simulate", parents=[common], help="finite-shot exclusion run")
    sim.add_argument("--target-eps", type=float, default=TARGET_EPS, help="mean eps used by --noise-p auto")

    an = sub.add_parser("analyze", parents=[common], help="analyse supplied eps values")
    an.add_argument("--eps", type=float_list, required=True, help="four forbidden probabilities")
    an.add_argument("--err", type=float_list, required=True, help="four standard errors")
    an.add_argument("--mean-err-override", type=float, default=None, help="use this error on the mean")

    ks = sub.add_parser("ksmodel", parents=[common], help="Kochen-Specker trace distances")
    ks.add_argument(
        "--angles",
        type=angle_list,
        default=angle_list("0,pi/6,pi/4,pi/2,3pi/4,pi"),
        help="Bloch angles, e.g. 'pi/6,pi/2,1.0'",
    )
    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            file_values = read_config_file(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        # re-parse so explicit flags beat file values
        defaults = {("grid" if k == "grid_resolution" else k): v for k, v in file_values.items()}
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        unknown = set(defaults) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        converted = {}
        for key, value in defaults.items():
            action = known[key]
            try:
                converted[key] = action.type(value) if action.type else value
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
        sub.set_defaults(**converted)
        args = parser.parse_args(argv)
    return args


def _noise(args, kappa: float) -> float:
    value = args.noise_p
    if value is None:
        value = "auto" if args.command == "simulate" else "0"
    if value == "auto":
        target = getattr(args, "target_eps", TARGET_EPS)
        try:
            return protocol.calibrate_noise(target, kappa, args.circuit)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"noise-p must be a number or 'auto', got {value!r}") from None


def run_config(args) -> RunConfig:
    return RunConfig(
        kappa=args.kappa,
        noise_p=_noise(args, args.kappa),
        shots=args.shots,
        seed=args.seed,
        grid_resolution=args.grid,
        circuit=args.circuit,
    )


# -- commands -----------------------------------------------------------------


def _matrix_dict(m: protocol.ProbabilityMatrix) -> dict:
    return {
        "rows": [lab.value for lab in protocol.LABELS],
        "columns": list(OUTCOMES_2Q),
        "entries": m.entries.tolist(),
        "outcome_assignment": {
            lab.value: OUTCOMES_2Q[j] for lab, j in zip(protocol.LABELS, m.outcome_assignment)
        },
    }


def cmd_verify_protocol(config: RunConfig) -> tuple[int, dict]:
    try:
        ideal = protocol.probability_matrix(protocol.CrosstalkConfig(0.0), 0.0, config.circuit)
        actual = protocol.probability_matrix(protocol.CrosstalkConfig(config.kappa), config.noise_p, config.circuit)
        hcz = protocol.probability_matrix(protocol.CrosstalkConfig(config.kappa), config.noise_p, "hcz")
        ms = protocol.probability_matrix(protocol.CrosstalkConfig(config.kappa), config.noise_p, "ms")
    except protocol.ProtocolStructureError as exc:
        return EXIT_PROTOCOL, {"zero_pattern_bijection": False, "error": str(exc)}
    tvd = max(protocol.total_variation(p, q) for p, q in zip(hcz.entries, ms.entries))
    return EXIT_OK, {
        "zero_pattern_bijection": True,
        "ideal_max_forbidden_probability": float(protocol.forbidden_probabilities(ideal).max()),
        "probability_matrix": _matrix_dict(actual),
        "forbidden_probabilities": protocol.forbidden_probabilities(actual).tolist(),
        "circuit_equivalence_tvd": tvd,
    }


def cmd_threshold(config: RunConfig) -> tuple[int, dict]:
    distances = bounds.quantum_distances(config.kappa)
    s = sum(distances.values())
    return EXIT_OK, {
        "quantum_distances": distances,
        "distance_sum": s,
        "epsilon_threshold": bounds.epsilon_threshold(config.kappa),
        "clamped": s >= 1.0,
    }


def cmd_simulate(config: RunConfig) -> tuple[int, dict]:
    matrix = protocol.probability_matrix(protocol.CrosstalkConfig(config.kappa), config.noise_p, config.circuit)
    records = experiment.simulate_run(matrix, config.shots, config.seed)
    eps_report, bound = experiment.analyze_records(records, matrix.outcome_assignment, config.kappa)
    return EXIT_OK, {
        "probability_matrix": _matrix_dict(matrix),
        "records": [
            {"input": r.label.value, "shots": r.shots, "counts": list(r.counts), "seed": r.seed} for r in records
        ],
        "epsilon_report": eps_report.to_dict(),
        "bound_report": bound.to_dict(),
    }


def simulate_csv(result: dict) -> str:
    """Per-input, per-outcome frequencies next to the quantum predictions."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["input", "outcome", "quantum_probability", "frequency", "error", "forbidden"])
    matrix = result["probability_matrix"]
    for row, rec in zip(matrix["entries"], result["records"]):
        forbidden = matrix["outcome_assignment"][rec["input"]]
        for outcome, p, count in zip(matrix["columns"], row, rec["counts"]):
            n = rec["shots"]
            writer.writerow(
                [rec["input"], outcome, repr(p), repr(count / n), repr(experiment.binomial_error(count, n)),
                 int(outcome == forbidden)]
            )
    return buf.getvalue()


def cmd_analyze(config: RunConfig, eps, err, mean_err_override=None) -> tuple[int, dict]:
    if len(eps) != 4 or len(err) != 4:
        raise ConfigError(f"--eps and --err need four values each, got {len(eps)} and {len(err)}")
    try:
        report, bound = experiment.analyze(
            eps, err, config.kappa, mean_err_override=mean_err_override, shots=[config.shots] * 4
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return EXIT_OK, {"epsilon_report": report.to_dict(), "bound_report": bound.to_dict()}


def cmd_ksmodel(config: RunConfig, angles) -> tuple[int, dict]:
    grid = ontic.fibonacci_grid(config.grid_resolution)
    north = np.array([0.0, 0.0, 1.0])
    mu0 = ontic.ks_density(state_from_bloch(north))
    rows = []
    for theta in angles:
        psi1 = state_from_bloch([np.sin(theta), 0.0, np.cos(theta)])
        d_ks = ontic.classical_trace_distance(mu0, ontic.ks_density(psi1), grid)
        d_q = quantum_trace_distance(state_from_bloch(north), psi1)
        rows.append({"theta": theta, "D_KS": d_ks, "D_Q": d_q, "abs_gap": abs(d_ks - d_q)})
    return EXIT_OK, {"grid_resolution": grid.size, "angles": rows}


# -- output -------------------------------------------------------------------


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _finite(obj.item())
    return obj


def render(command: str, config: RunConfig, result: dict) -> str:
    doc = {
        "schema": SCHEMA,
        "command": command,
        "version": version_string(),
        "seed": config.seed,
        "config": asdict(config),
        "result": result,
    }
    return json.dumps(_finite(doc), indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        config = run_config(args)
        if args.command == "verify-protocol":
            code, result = cmd_verify_protocol(config)
        elif args.command == "threshold":
            code, result = cmd_threshold(config)
        elif args.command == "simulate":
            code, result = cmd_simulate(config)
        elif args.command == "analyze":
            code, result = cmd_analyze(config, args.eps, args.err, args.mean_err_override)
        else:
            code, result = cmd_ksmodel(config, args.angles)
    except ConfigError as exc:
        print(f"pbr-ions: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.format == "csv":
        if args.command != "simulate":
            print("pbr-ions: config error: --format csv is only available for simulate", file=sys.stderr)
            return EXIT_CONFIG
        _emit(simulate_csv(result), args.out)
        return code

    text = render(args.command, config, result)
    _emit(text, args.out)
    if args.out and args.command == "simulate":
        Path(args.out).with_suffix(".csv").write_text(simulate_csv(result))
    return code


if __name__ == "__main__":
    sys.exit(main())
