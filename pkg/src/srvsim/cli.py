"""Command line runner: ``srvsim {correlate,chsh,svozil-curve,attack}``.

Every artifact starts with the resolved configuration, so a file alone is
enough to rerun it.  Output is byte-identical for identical options; the
worker count and the output path are execution details and are left out of
the embedded configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import attack as atk
from .estimators import chsh_at, scan_curve
from .geometry import PlaneAngle, angular_distance, circular_distance, sample_unit_sphere
from .streams import RandomStream, check_seed, fresh_seed

PROTOCOLS = ("tb", "svozil", "ntb", "ns")
NEEDS_OMEGA = {"svozil", "ns"}
DEFAULT_SETTINGS = (0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    subcommand: str
    protocol: str
    omega: Optional[float] = None
    n_samples: int = 100_000
    n_sweep: int = 360
    seed: int = 0
    output_format: str = "csv"
    output_path: Optional[str] = None
    grid_points: int = 17
    settings: tuple = DEFAULT_SETTINGS
    workers: int = 1
    extra: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.protocol in NEEDS_OMEGA and self.omega is None:
            raise ConfigError(f"--omega is required for protocol {self.protocol}")
        if self.protocol not in NEEDS_OMEGA and self.omega is not None:
            raise ConfigError(f"--omega only applies to svozil and ns, not {self.protocol}")
        if self.omega is not None and not 0.0 <= self.omega <= math.pi / 2 + 1e-7:
            raise ConfigError("--omega must lie in [0, pi/2]")
        if self.omega is not None:
            # a typed 1.5707963 means pi/2; snapping keeps branch boundaries exact
            for exact in (0.0, math.pi / 2):
                if abs(self.omega - exact) < 1e-6:
                    self.omega = exact
            self.omega = min(self.omega, math.pi / 2)
        for name in ("n_samples", "n_sweep", "grid_points", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"--{name.replace('_', '-')} must be at least 1")
        if self.subcommand == "attack" and self.n_sweep < 8:
            raise ConfigError("--n-sweep must be at least 8")
        if self.subcommand == "svozil-curve" and self.protocol not in NEEDS_OMEGA:
            raise ConfigError("svozil-curve needs protocol svozil or ns")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")
        check_seed(self.seed)
        return self

    def provenance(self) -> dict:
        d = asdict(self)
        for key in ("workers", "output_path", "extra"):
            d.pop(key)
        d["settings"] = list(self.settings)
        if self.subcommand != "chsh":
            d.pop("settings")
        if self.subcommand == "attack":
            d.pop("n_samples")
            d.pop("grid_points")
        else:
            d.pop("n_sweep")
        d["delta"] = math.pi / self.n_sweep if self.subcommand == "attack" else None
        d.update(self.extra)
        return d


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(format(float(x), ".9g"))
    return x


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    return str(x)


def render(config: ExperimentConfig, fields: list[str], rows: list[list]) -> str:
    prov = {k: _num(v) if not isinstance(v, list) else [_num(i) for i in v]
            for k, v in config.provenance().items()}
    if config.output_format == "json":
        doc = {"config": prov, "rows": [{f: _num(v) for f, v in zip(fields, r)} for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(prov, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _emit(config: ExperimentConfig, text: str) -> None:
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_correlate(config: ExperimentConfig) -> int:
    grid = np.linspace(0.0, math.pi, config.grid_points) if config.grid_points > 1 else np.array([0.0])
    rows = scan_curve(config.protocol, grid, config.n_samples, config.seed, omega=config.omega,
                      workers=config.workers)
    fields = ["theta", "empirical", "analytic", "stderr", "n", "seed"]
    _emit(config, render(config, fields, [list(r) for r in rows]))
    return 0


def cmd_svozil_curve(config: ExperimentConfig) -> int:
    grid = np.linspace(0.0, math.pi, config.grid_points)
    rows = scan_curve(config.protocol, grid, config.n_samples, config.seed, omega=config.omega,
                      workers=config.workers)
    fields = ["theta", "empirical", "analytic", "quantum", "stderr", "n", "seed"]
    out = [[r.theta, r.empirical, r.analytic, -math.cos(r.theta), r.stderr, r.n, r.seed]
           for r in rows]
    _emit(config, render(config, fields, out))
    return 0


def cmd_chsh(config: ExperimentConfig) -> int:
    fields = ["source", "a", "a_prime", "b", "b_prime", "E_ab", "E_ab_prime", "E_a_prime_b",
              "E_a_prime_b_prime", "S1", "S2", "S3", "S4", "S_max", "two_term"]
    rows = []
    for source, n in (("analytic", None), ("empirical", config.n_samples)):
        rep = chsh_at(config.protocol, config.settings, omega=config.omega, n=n,
                      seed=config.seed, workers=config.workers)
        rows.append([source, *rep.settings, *rep.E, *rep.S_values, rep.S_max, rep.two_term])
    _emit(config, render(config, fields, rows))
    return 0


def _alice_setting(config: ExperimentConfig):
    stream = RandomStream(config.seed, 0)
    if config.protocol in NEEDS_OMEGA:
        return PlaneAngle(float(stream.uniform(0.0, 2.0 * math.pi)))
    return sample_unit_sphere(stream)


def cmd_attack(config: ExperimentConfig) -> int:
    a = _alice_setting(config)
    kwargs = {"omega": config.omega} if config.omega is not None else {}
    try:
        est = atk.attack_pipeline(config.protocol, a, config.n_sweep, **kwargs)
    except atk.Unlocatable as exc:
        print(f"error: attack could not locate Alice's axis: {exc}", file=sys.stderr)
        return 1
    if isinstance(a, PlaneAngle):
        error = circular_distance(a, est.signed_direction)
        true_axis = [a.radians]
        signed = [est.signed_direction.radians]
    else:
        error = angular_distance(a, est.signed_direction)
        true_axis = list(a)
        signed = list(est.signed_direction)
    transcript_files = []
    if config.output_path:
        base = Path(config.output_path)
        for t in est.transcripts:
            path = base.with_name(f"{base.stem}.{t.schedule.geometry.value}.transcript.csv")
            path.write_text(atk.dump_transcript(t))
            transcript_files.append(path.name)
    fields = ["protocol", "true_axis", "estimate", "angular_error", "uncertainty",
              "within_uncertainty", "sign_resolved", "method", "sweeps", "rounds",
              "cbits_per_round", "cbit_count", "transcripts"]
    rounds = sum(t.schedule.count for t in est.transcripts)
    row = [config.protocol, " ".join(_cell(x) for x in true_axis),
           " ".join(_cell(x) for x in signed), error, est.uncertainty,
           error <= est.uncertainty, est.sign_resolved, est.method, " ".join(est.sweeps), rounds,
           est.cbits_per_round, est.cbit_count, " ".join(transcript_files)]
    _emit(config, render(config, fields, [row]))
    return 0


COMMANDS = {
    "correlate": cmd_correlate,
    "chsh": cmd_chsh,
    "svozil-curve": cmd_svozil_curve,
    "attack": cmd_attack,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"error: {message}\n")


def _seed(text: str) -> int:
    if text == "random":
        return fresh_seed()
    return check_seed(int(text))


def _settings(text: str) -> tuple:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("--settings takes four comma-separated angles")
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srvsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    defaults = {"correlate": 17, "svozil-curve": 33, "chsh": 17, "attack": 17}
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--protocol", choices=PROTOCOLS,
                       default="svozil" if name == "svozil-curve" else "tb")
        p.add_argument("--omega", type=float, default=None)
        p.add_argument("--n-samples", type=int, default=100_000)
        p.add_argument("--n-sweep", type=int, default=360)
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--settings", type=_settings, default=DEFAULT_SETTINGS)
        p.add_argument("--grid-points", type=int, default=defaults[name])
        p.add_argument("--format", dest="output_format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", dest="output_path", default=None)
        p.add_argument("--workers", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = ExperimentConfig(**vars(args))
    try:
        config.validate()
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return COMMANDS[config.subcommand](config)


if __name__ == "__main__":
    sys.exit(main())
