#!/usr/bin/python
"""
Command line harness: field generation, energy and vorticity reports, recoveries, sweeps
over (eps, theta_eps) and continuum limit functionals

"""

import json
import os
import sys

import click
import numpy as np
from dotenv import load_dotenv
from structlog import get_logger

from clock_xy_lab.circle_geometry import DiscreteCircle
from clock_xy_lab.constructions import DEFAULT_C0, recovery_flat, vortex_field
from clock_xy_lab.energy import (
    bv_lower_bound,
    classify_regime,
    excess_energy,
    geodesic_bond_sum,
    log_rescaled_energy,
    rescaled_energy,
    xy_energy,
)
from clock_xy_lab.field_io import FieldFormatError, load_field, save_field
from clock_xy_lab.lattice_field import (
    Ball,
    CellField,
    SpinField,
    Square,
    build_domain,
    field_from_states,
    sample_map,
)
from clock_xy_lab.limit_functionals import (
    QuadratureSpec,
    anisotropic_dirichlet,
    cantor_part,
    jump_functional,
    limit_energy,
)
from clock_xy_lab.maps import HalfPlaneJumpMap, VortexMap, split_all, vortex_product
from clock_xy_lab.sweep import build_scenario, load_sweep_config, run_sweep, write_records
from clock_xy_lab.utils import ConfigError, ConstructionError, Options, RaisingThread
from clock_xy_lab.vorticity import (
    VorticityMeasure,
    flat_distance,
    flat_distance_lp,
    vorticity_measure,
)

# make sure we are loading the env local definition
load_dotenv()
LOGGER = get_logger(__name__)

EXIT_CONFIG_ERROR = 1
EXIT_ROW_ERRORS = 2


def _echo_json(payload: dict):
    click.echo(json.dumps(payload, indent=2))


def _circle(n_states: int | None, theta: float | None) -> DiscreteCircle:
    if n_states is not None:
        return DiscreteCircle(n_states)
    if theta is not None:
        return DiscreteCircle.from_theta(theta)
    raise click.UsageError("Either --n-states or --theta is required")


def _parse_atom(text: str) -> tuple[tuple[float, float], int]:
    try:
        x, y, charge = text.split(",")
        return (float(x), float(y)), int(charge)
    except ValueError as e:
        raise click.BadParameter(f"Atoms are given as x,y,charge, got {text}") from e


@click.group()
@click.option("--seed", default=0, help="seed for randomly generated fields")
@click.option("--threads", "-t", default=1, help="concurrent sweep rows per configuration")
@click.option(
    "--out",
    "-o",
    help="path where generated files are saved (defaults to $CLOCK_XY_OUTPUT or build)",
    default=None,
)
@click.option("--no-timing", is_flag=True, help="write 0.0 seconds so reruns are identical")
@click.option("-sf", "--save-fields", is_flag=True, help="save every field built in a sweep")
@click.pass_context
def cli(ctx, seed, threads, out, no_timing, save_fields):
    """N-clock and XY lattice laboratory:
    builds recovery-sequence spin fields, evaluates discrete energies and vorticity, and
    sweeps the rescaled energies over (eps, theta_eps). |log eps| is always -ln(eps)."""
    ctx.obj = Options(
        outputpath=out or os.getenv("CLOCK_XY_OUTPUT", "build"),
        threads=max(1, threads),
        seed=seed,
        timing=not no_timing,
        save_fields=save_fields,
    )


def _generate(kind, seed, epsilon, circle, radius, side, sign, jump, lam) -> SpinField:
    shape = Ball((0.0, 0.0), radius) if radius else Square((-side / 2, -side / 2), side)
    domain = build_domain(shape, epsilon)
    match kind:
        case "vortex":
            field = vortex_field((0.0, 0.0), sign, domain, circle)
        case "sampled":
            # centred on a plaquette so no site sits on the singularity
            center = (epsilon / 2, epsilon / 2)
            field = sample_map(VortexMap(center, sign), domain, circle, "at_site")
        case "interface":
            cell = lam or 2.0 ** np.ceil(np.log2(8 * DEFAULT_C0 * epsilon / circle.theta))
            pc = CellField.from_map(HalfPlaneJumpMap(0.0, jump), cell, shape.bounds())
            field = recovery_flat(pc, domain, circle)
        case "constant":
            field = field_from_states(domain, circle, np.zeros(domain.n_sites))
        case _:
            rng = np.random.default_rng(seed)
            field = field_from_states(
                domain, circle, rng.integers(0, circle.n_states, domain.n_sites)
            )
    return field


@cli.command()
@click.option(
    "--kind",
    "-k",
    type=click.Choice(["vortex", "sampled", "interface", "constant", "random"]),
    default="vortex",
)
@click.option("--epsilon", "-e", type=float, required=True, help="lattice spacing")
@click.option("--n-states", "-n", type=int, default=None, help="number of clock states N")
@click.option("--theta", type=float, default=None, help="target angle, snapped to 2 pi / N")
@click.option("--radius", type=float, default=None, help="use the ball of this radius")
@click.option("--side", type=float, default=1.0, help="side of the square centred at 0")
@click.option("--sign", type=click.Choice(["1", "-1"]), default="1", help="vortex sign")
@click.option("--jump", type=float, default=np.pi / 2, help="interface jump angle")
@click.option("--lam", type=float, default=None, help="cell side of the interface")
@click.argument("path")
@click.pass_obj
def gen(options: Options, kind, epsilon, n_states, theta, radius, side, sign, jump, lam, path):
    """Generate a spin field and save it (suffix .json for the JSON variant)."""
    try:
        circle = _circle(n_states, theta)
        field = _generate(kind, options.seed, epsilon, circle, radius, side, int(sign), jump, lam)
    except (ValueError, ConstructionError) as e:
        LOGGER.warn(f"Cannot generate a {kind} field at eps={epsilon}: {e}")
        sys.exit(EXIT_CONFIG_ERROR)
    save_field(field, path)
    click.echo(path)


@cli.command()
@click.option("--theta", type=float, default=None, help="theta for the rescaling")
@click.option("-M", "vortices", type=int, default=0, help="number of vortices M")
@click.argument("path")
def energy(theta, vortices, path):
    """Energy report of a saved field."""
    field = load_field(path)
    theta = theta or field.circle.theta
    breakdown = xy_energy(field)
    _echo_json(
        {
            "epsilon": field.epsilon,
            "theta": theta,
            "regime_tag": classify_regime(field.epsilon, theta),
            "xy_energy": breakdown.xy_total,
            "bond_count": breakdown.bond_count,
            "per_bond_max": breakdown.per_bond_max,
            "rescaled_energy": rescaled_energy(field, theta),
            "log_rescaled_energy": log_rescaled_energy(field),
            "excess_energy": excess_energy(field, theta, vortices),
            "geodesic_bond_sum": geodesic_bond_sum(field),
            "bv_lower_bound": bv_lower_bound(field),
        }
    )


@cli.command()
@click.argument("path")
def vorticity(path):
    """Atoms of the discrete vorticity measure of a saved field."""
    measure = vorticity_measure(load_field(path))
    _echo_json(
        {
            "atoms": [[p[0], p[1], q] for p, q in measure.atoms],
            "total_charge": measure.total_charge,
            "total_variation": measure.total_variation,
        }
    )


@cli.command()
@click.option("--target", "-a", multiple=True, help="target atom x,y,charge (repeatable)")
@click.option("--lp", is_flag=True, help="also solve the dual linear program")
@click.argument("path")
def flatnorm(target, lp, path):
    """Flat distance between the vorticity of a saved field and target atoms."""
    field = load_field(path)
    shape = field.domain.shape
    measure = vorticity_measure(field)
    goal = VorticityMeasure([_parse_atom(t) for t in target], shape)
    result = {"flat_distance": flat_distance(measure, goal, shape)}
    if lp:
        result["flat_distance_lp"] = flat_distance_lp(measure, goal, shape)
    _echo_json(result)


@cli.command()
@click.option("--epsilon", "-e", type=float, required=True, help="lattice spacing")
@click.argument("config")
@click.argument("path")
def recover(epsilon, config, path):
    """Build the recovery field of a sweep configuration at one eps and save it."""
    try:
        sweep_config = load_sweep_config(config)
        circle = sweep_config.theta_rule.circle(epsilon)
        field, _, _ = build_scenario(sweep_config, epsilon, circle)
    except ConfigError as e:
        LOGGER.warn(f"Invalid configuration {config}: {e}")
        sys.exit(EXIT_CONFIG_ERROR)
    except ConstructionError as e:
        LOGGER.warn(f"Recovery at eps={epsilon} failed: {e}")
        sys.exit(EXIT_ROW_ERRORS)
    save_field(field, path)
    click.echo(path)


def process_sweep_file(file_path: str, options: Options, failures: list):
    overrides: dict = {}
    if options.save_fields:
        overrides["save_fields"] = True
    if not options.timing:
        overrides["timing"] = False
    config = load_sweep_config(file_path, overrides)
    records = run_sweep(config, options.threads, options.outputpath)
    write_records(config, records, options.outputpath)
    failures.extend(r for r in records if r.error)


@cli.command()
@click.argument("configs", nargs=-1, required=True)
@click.pass_obj
def sweep(options: Options, configs):
    """Run sweep configurations, one CSV and one JSON file each."""
    failures: list = []
    tasks = []
    for file_path in configs:
        tasks.append(
            RaisingThread(target=process_sweep_file, args=(file_path, options, failures))
        )
        tasks[-1].start()
    config_error = False
    for task in tasks:
        try:
            task.join()
        except (ConfigError, FieldFormatError) as e:
            LOGGER.warn(f"Sweep configuration error: {e}")
            config_error = True
    if config_error:
        sys.exit(EXIT_CONFIG_ERROR)
    if failures:
        sys.exit(EXIT_ROW_ERRORS)


@cli.command()
@click.option(
    "--map",
    "map_kind",
    type=click.Choice(["vortex", "degree2", "interface"]),
    default="vortex",
)
@click.option("--radius", type=float, default=0.5, help="radius of the ball region")
@click.option(
    "--delta", type=float, default=None, help="exclusion radius, 1/16 or tau/4 for degree2"
)
@click.option("--refinement", type=int, default=512, help="quadrature cells per unit length")
@click.option("--tau", type=float, default=1e-2, help="splitting distance for degree2")
@click.option("--lam", type=float, default=0.25, help="cell side for the jump part")
def limits(map_kind, radius, delta, refinement, tau, lam):
    """Evaluate the continuum limit functionals of a model map."""
    if delta is None:
        delta = tau / 4 if map_kind == "degree2" else 1 / 16
    pc = None
    try:
        region = Ball((0.0, 0.0), radius)
        match map_kind:
            case "vortex":
                spin_map = VortexMap((0.0, 0.0), 1)
            case "degree2":
                spin_map = split_all(vortex_product([(0.0, 0.0), (0.0, 0.0)], [1, 1]), tau)
            case _:
                spin_map = HalfPlaneJumpMap(0.0, np.pi / 2)
                pc = CellField.from_map(spin_map, lam, region.bounds())
        quad = QuadratureSpec.around(spin_map, refinement, delta)
        dirichlet = anisotropic_dirichlet(spin_map, region, quad)
    except ValueError as e:
        LOGGER.warn(f"Cannot evaluate the {map_kind} limit: {e}")
        sys.exit(EXIT_CONFIG_ERROR)
    jump = jump_functional(pc, region) if pc is not None else 0.0
    _echo_json(
        {
            "anisotropic_dirichlet": dirichlet,
            "jump": jump,
            "cantor": cantor_part(spin_map, region),
            "total": limit_energy(spin_map, pc, region, quad),
        }
    )
