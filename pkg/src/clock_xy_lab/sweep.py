"""
Recovery-sequence sweeps over (eps, theta_eps) and their CSV / JSON records
"""

import csv
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any

from structlog import get_logger

from clock_xy_lab.circle_geometry import DiscreteCircle
from clock_xy_lab.constructions import DEFAULT_C0, recovery_flat
from clock_xy_lab.dyadic import VORTEX_C0, recovery_with_vortices
from clock_xy_lab.energy import classify_regime, excess_energy, log_eps, rescaled_energy
from clock_xy_lab.field_io import save_field
from clock_xy_lab.lattice_field import (
    CellField,
    Rectangle,
    build_domain,
    l1_distance,
    shape_from_dict,
)
from clock_xy_lab.maps import HalfPlaneJumpMap, ProductMap, SpinMap, vortex_product
from clock_xy_lab.utils import (
    ConfigError,
    ConstructionError,
    RaisingThread,
    load_yaml,
    merge_config,
    replace_with_env_variables,
    split_batches,
)
from clock_xy_lab.vorticity import VorticityMeasure, flat_distance, vorticity_measure

LOGGER = get_logger(__name__)

CSV_COLUMNS = [
    "epsilon",
    "theta",
    "regime_tag",
    "rescaled_energy",
    "excess_energy",
    "M",
    "total_vorticity",
    "flat_distance",
    "seconds",
    "error",
]

DEFAULT_SWEEP: dict[str, Any] = {
    "name": "sweep",
    "theta_rule": {"type": "loglaw", "p": 0.5},
    "scenario": {"type": "vortex", "signs": [1], "positions": [[0.0, 0.0]]},
    "domain": {"type": "square", "origin": [-0.5, -0.5], "side": 1.0},
    "lambda": 0.25,
    "eta": 4.0,
    "c0": None,
    "regime_tag": None,
    "output": None,
    "save_fields": False,
    "timing": True,
}


@dataclass(frozen=True)
class ThetaRule:
    kind: str
    value: float

    def theta(self, epsilon: float) -> float:
        match self.kind:
            case "proportional":
                return self.value * epsilon
            case "loglaw":
                return epsilon * log_eps(epsilon) ** self.value
            case "fixed":
                return self.value
        raise ConfigError(f"Unknown theta rule {self.kind}")

    def circle(self, epsilon: float) -> DiscreteCircle:
        theta = self.theta(epsilon)
        if not 0 < theta < math.pi:
            raise ConfigError(f"theta={theta} at eps={epsilon} is outside (0, pi)")
        circle = DiscreteCircle.from_theta(theta)
        if circle.n_states < 3:
            raise ConfigError(f"theta={theta} leaves fewer than 3 states")
        return circle


@dataclass(frozen=True)
class Scenario:
    kind: str
    signs: list[int] = field(default_factory=list)
    positions: list[tuple[float, float]] = field(default_factory=list)
    jump: float = 0.0
    length: float = 1.0
    jump_x: float = 0.0

    @property
    def vortices(self) -> int:
        return len(self.signs)

    def spin_map(self) -> SpinMap:
        match self.kind:
            case "vortex":
                return vortex_product(self.positions, self.signs)
            case "interface":
                return HalfPlaneJumpMap(self.jump_x, self.jump)
            case _:
                return ProductMap(
                    [
                        vortex_product(self.positions, self.signs),
                        HalfPlaneJumpMap(self.jump_x, self.jump),
                    ]
                )

    def measure(self, domain=None) -> VorticityMeasure:
        return VorticityMeasure(list(zip(self.positions, self.signs, strict=True)), domain)


@dataclass(frozen=True)
class SweepConfig:
    name: str
    epsilons: list[float]
    theta_rule: ThetaRule
    scenario: Scenario
    domain: dict
    lam: float
    eta: float
    c0: float | None
    regime_tag: str | None
    output: str
    save_fields: bool
    timing: bool


@dataclass
class SweepRecord:
    epsilon: float
    theta: float
    regime_tag: str
    M: int
    n_states: int
    rescaled_energy: float | None = None
    excess_energy: float | None = None
    total_vorticity: int | None = None
    flat_distance: float | None = None
    l1_distance: float | None = None
    seconds: float = 0.0
    error: str = ""

    def to_row(self) -> list:
        values = asdict(self)
        return ["" if values[c] is None else values[c] for c in CSV_COLUMNS]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _parse_theta_rule(rule: dict) -> ThetaRule:
    match rule.get("type"):
        case "proportional":
            return ThetaRule("proportional", float(rule.get("c", 1.0)))
        case "loglaw":
            return ThetaRule("loglaw", float(rule.get("p", 0.5)))
        case "fixed":
            return ThetaRule("fixed", float(rule["value"]))
        case other:
            raise ConfigError(f"Unknown theta rule {other}")


def _parse_scenario(scenario: dict) -> Scenario:
    kind = scenario.get("type")
    if kind not in ("vortex", "interface", "combined"):
        raise ConfigError(f"Unknown scenario {kind}")
    signs = [int(s) for s in scenario.get("signs", [1] if kind != "interface" else [])]
    default_positions = [[0.0, 0.0]] if len(signs) == 1 else []
    positions = [
        (float(p[0]), float(p[1])) for p in scenario.get("positions", default_positions)
    ]
    if kind != "interface":
        if not signs or len(signs) != len(positions):
            raise ConfigError("Vortex scenarios need one position per sign")
        if any(s not in (1, -1) for s in signs):
            raise ConfigError(f"Vortex signs must be +1 or -1, got {signs}")
    if kind != "vortex" and "jump" not in scenario:
        raise ConfigError(f"Scenario {kind} needs a jump")
    return Scenario(
        kind=kind,
        signs=signs if kind != "interface" else [],
        positions=positions if kind != "interface" else [],
        jump=float(scenario.get("jump", 0.0)),
        length=float(scenario.get("length", 1.0)),
        jump_x=float(scenario.get("jump_x", 0.0)),
    )


def sweep_config_from_dict(config: dict[str, Any]) -> SweepConfig:
    config = merge_config(DEFAULT_SWEEP, config)
    if "epsilons" in config:
        epsilons = [float(e) for e in config["epsilons"]]
    elif "epsilon_exponents" in config:
        epsilons = [2.0 ** -int(e) for e in config["epsilon_exponents"]]
    else:
        raise ConfigError("Sweep needs epsilons or epsilon_exponents")
    if not epsilons:
        raise ConfigError("Sweep has an empty epsilon list")
    if any(e <= 0 or e >= 1 for e in epsilons):
        raise ConfigError(f"Every epsilon must lie in (0, 1), got {epsilons}")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:], strict=False)):
        raise ConfigError(f"Epsilons must be strictly decreasing, got {epsilons}")
    theta_rule = _parse_theta_rule(config["theta_rule"] or {})
    for epsilon in epsilons:
        theta_rule.circle(epsilon)
    try:
        shape_from_dict(config["domain"])
    except (KeyError, ValueError) as e:
        raise ConfigError(f"Invalid domain {config['domain']}: {e}") from e
    return SweepConfig(
        name=str(config["name"]),
        epsilons=epsilons,
        theta_rule=theta_rule,
        scenario=_parse_scenario(config["scenario"] or {}),
        domain=config["domain"],
        lam=float(config["lambda"]),
        eta=float(config["eta"]),
        c0=None if config["c0"] is None else float(config["c0"]),
        regime_tag=config["regime_tag"],
        output=(
            replace_with_env_variables(str(config["output"]))
            if config["output"]
            else os.getenv("CLOCK_XY_OUTPUT", "build")
        ),
        save_fields=bool(config["save_fields"]),
        timing=bool(config["timing"]),
    )


def load_sweep_config(file_path: str, overrides: dict[str, Any] | None = None) -> SweepConfig:
    LOGGER.info(f"Processing sweep: {file_path}")
    try:
        config = load_yaml(file_path)
    except OSError as e:
        raise ConfigError(f"Cannot read sweep configuration {file_path}") from e
    return sweep_config_from_dict(merge_config(config, overrides or {}))


def interface_lambda(length: float, epsilon: float, theta: float, c0: float) -> float:
    """Smallest power of two with lam >= 4 length and lam >= 8 c0 eps / theta."""
    need = max(4 * length, 8 * c0 * epsilon / theta)
    return 2.0 ** math.ceil(math.log2(need))


def build_scenario(config: SweepConfig, epsilon: float, circle: DiscreteCircle):
    """(field, spin_map, target measure) of the scenario at one eps."""
    scenario = config.scenario
    spin_map = scenario.spin_map()
    if scenario.kind == "interface":
        c0 = DEFAULT_C0 if config.c0 is None else config.c0
        lam = interface_lambda(scenario.length, epsilon, circle.theta, c0)
        y0 = 0.5 * (lam - scenario.length)
        half = 0.5 * scenario.length
        shape = Rectangle(
            (scenario.jump_x - half, y0), (scenario.jump_x + half, y0 + scenario.length)
        )
        domain = build_domain(shape, epsilon)
        pc = CellField.from_map(spin_map, lam, shape.bounds())
        spin_field = recovery_flat(pc, domain, circle, c0)
        return spin_field, spin_map, VorticityMeasure([], shape)
    domain = build_domain(shape_from_dict(config.domain), epsilon)
    c0 = VORTEX_C0 if config.c0 is None else config.c0
    mu = scenario.measure(domain.shape)
    spin_field = recovery_with_vortices(
        spin_map, mu, config.lam, config.eta, domain, circle, c0
    )
    return spin_field, spin_map, mu


def _measure_row(config: SweepConfig, index: int, epsilon: float, outputpath: str):
    circle = config.theta_rule.circle(epsilon)
    theta = circle.theta
    record = SweepRecord(
        epsilon=epsilon,
        theta=theta,
        regime_tag=config.regime_tag or classify_regime(epsilon, theta),
        M=config.scenario.vortices,
        n_states=circle.n_states,
    )
    start = time.perf_counter()
    try:
        spin_field, spin_map, target = build_scenario(config, epsilon, circle)
    except ConstructionError as e:
        LOGGER.warn(f"Row eps={epsilon} of sweep {config.name} failed: {e}")
        record.error = str(e)
        return record, None
    record.rescaled_energy = rescaled_energy(spin_field, theta)
    record.excess_energy = excess_energy(spin_field, theta, record.M)
    measure = vorticity_measure(spin_field)
    record.total_vorticity = measure.total_charge
    record.flat_distance = flat_distance(measure, target, spin_field.domain.shape)
    record.l1_distance = l1_distance(spin_field, spin_map)
    if config.timing:
        record.seconds = time.perf_counter() - start
    if config.save_fields:
        field_path = os.path.join(outputpath, "fields", f"{config.name}_{index:02d}.clkf")
        save_field(spin_field, field_path)
    return record, spin_field


def run_sweep(
    config: SweepConfig, threads: int = 1, outputpath: str | None = None
) -> list[SweepRecord]:
    """One record per eps in input order; rows run in `threads` batches."""
    outputpath = outputpath or config.output
    rows = list(enumerate(config.epsilons))
    records: list[SweepRecord | None] = [None] * len(rows)

    def run_batch(batch):
        for index, epsilon in batch:
            records[index], _ = _measure_row(config, index, epsilon, outputpath)

    tasks = []
    for batch in split_batches(rows, threads):
        tasks.append(RaisingThread(target=run_batch, args=(batch,)))
        tasks[-1].start()
    for task in tasks:
        task.join()
    return [r for r in records if r is not None]


def write_csv(records: list[SweepRecord], path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(record.to_row())


def write_json(records: list[SweepRecord], path: str) -> None:
    with open(path, "w") as f:
        json.dump([r.to_dict() for r in records], f, indent=2)


def write_records(config: SweepConfig, records: list[SweepRecord], outputpath: str) -> str:
    os.makedirs(outputpath, exist_ok=True)
    csv_path = os.path.join(outputpath, f"{config.name}.csv")
    write_csv(records, csv_path)
    write_json(records, os.path.join(outputpath, f"{config.name}.json"))
    LOGGER.info(f"Wrote {len(records)} records to {csv_path}")
    return csv_path

