"""Configuration-driven scenario runner.

Subcommands build states, kernels, and grids from a TOML scenario file and
execute the requested pipelines, writing a JSON report with a hashed results
section, CSV tables, and rendered figures into the output directory.  The
exit status is nonzero when a hard invariant fails (kernel certification,
normalization, route agreement).
"""
from __future__ import annotations

import logging
import os
import sys
from importlib import resources
from pathlib import Path

import click
import jsonschema
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import __version__
from .definiteness import definiteness_probe
from .density import conjugate_grid, density
from .irreps import IrrepLabel, build_generators
from .kernels import (
    certify_kernel,
    make_poincare_kernel,
    make_translation_kernel,
    poincare_catalog,
    translation_catalog,
)
from .minkowski import lorentz_of_sl2c, wigner_boost
from .observables import (
    classify_kernel,
    mean_coordinates_abc,
    mean_coordinates_moment,
    mean_coordinates_operator,
)
from .reporting import (
    render_definiteness_figure,
    render_density_figure,
    write_csv,
    write_report,
)
from .states import (
    Channel,
    bump_family,
    gaussian_packet,
    momentum_grid,
    norm_squared,
    spacetime_grid,
    uniform_axis,
    gauss_axis,
)

log = logging.getLogger("eventloc")

_AXIS_SCHEMA = {
    "type": "object",
    "required": ["kind", "lo", "hi", "n"],
    "properties": {
        "kind": {"enum": ["uniform", "gauss"]},
        "lo": {"type": "number"},
        "hi": {"type": "number"},
        "n": {"type": "integer", "minimum": 1},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["scenario", "momentum_grid", "kernel", "state"],
    "properties": {
        "scenario": {
            "type": "object",
            "required": ["name", "dimension"],
            "properties": {
                "name": {"type": "string"},
                "dimension": {"enum": [1, 2, 4]},
            },
        },
        "momentum_grid": {
            "type": "object",
            "required": ["axes"],
            "properties": {"axes": {"type": "array", "items": _AXIS_SCHEMA, "minItems": 1}},
        },
        "event_grid": {
            "type": "object",
            "properties": {
                "type": {"enum": ["conjugate", "axes"]},
                "center": {"type": "array", "items": {"type": "number"}},
                "axes": {"type": "array", "items": _AXIS_SCHEMA},
            },
        },
        "kernel": {
            "type": "object",
            "required": ["family", "name"],
            "properties": {
                "family": {"enum": ["translation", "poincare"]},
                "name": {"type": "string"},
                "params": {"type": "object"},
            },
        },
        "state": {
            "type": "object",
            "required": ["type"],
            "properties": {
                "type": {"enum": ["gaussian"]},
                "center": {"type": "array", "items": {"type": "number"}},
                "width": {"type": "array", "items": {"type": "number"}},
                "shift": {"type": "array", "items": {"type": "number"}},
                "spin": {"type": "integer", "minimum": 0},
            },
        },
        "pipeline": {
            "type": "object",
            "properties": {"steps": {"type": "array", "items": {"type": "string"}}},
        },
        "coords": {
            "type": "object",
            "properties": {
                "routes": {"type": "array", "items": {"enum": ["moment", "abc", "operator"]}},
                "tolerance": {"type": "number"},
            },
        },
        "definiteness": {
            "type": "object",
            "properties": {
                "lambdas": {"type": "array", "items": {"type": "number"}},
                "n_per_axis": {"type": "integer"},
                "region_scale": {"type": "number"},
                "family_center": {"type": "array", "items": {"type": "number"}},
                "family_halfwidth": {"type": "array", "items": {"type": "number"}},
            },
        },
        "tolerances": {
            "type": "object",
            "properties": {
                "normalization": {"type": "number"},
                "boundedness": {"type": "number"},
                "capture": {"type": "number"},
            },
        },
    },
}

_DEFAULT_TOLERANCES = {"normalization": 1e-4, "boundedness": 1e-6, "capture": 0.999}


class HardFailure(Exception):
    """An invariant the run must not violate; maps to a nonzero exit status."""


def _setup_logging() -> None:
    level = os.environ.get("EVENTLOC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(name)s %(levelname)s %(message)s")


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        cfg = tomllib.load(fh)
    jsonschema.validate(cfg, CONFIG_SCHEMA)
    name = cfg["kernel"]["name"]
    family = cfg["kernel"]["family"]
    catalog = translation_catalog() if family == "translation" else poincare_catalog()
    if name not in catalog:
        raise jsonschema.ValidationError(f"unknown {family} kernel {name!r}; catalog: {catalog}")
    return cfg


def _build_axis(spec: dict):
    maker = uniform_axis if spec["kind"] == "uniform" else gauss_axis
    return maker(spec["lo"], spec["hi"], spec["n"])


def build_scenario(cfg: dict) -> dict:
    d = cfg["scenario"]["dimension"]
    kg = momentum_grid([_build_axis(s) for s in cfg["momentum_grid"]["axes"]])
    if kg.dimension != d:
        raise ValueError("momentum grid dimension does not match the scenario")

    kspec = cfg["kernel"]
    params = dict(kspec.get("params", {}))
    if kspec["family"] == "translation":
        kernel = make_translation_kernel(kspec["name"], dimension=d, **params)
    else:
        kernel = make_poincare_kernel(kspec["name"], **params)

    sspec = cfg["state"]
    spin = int(sspec.get("spin", 0))
    if d == 4:
        channels = tuple(Channel(0, spin, m) for m in range(-spin, spin + 1))
    else:
        channels = tuple(Channel(s) for s in range(getattr(kernel, "n_sigma", 1)))
    shift = sspec.get("shift")
    psi = gaussian_packet(
        kg,
        center=np.asarray(sspec.get("center", [1.0] * d), float),
        width=np.asarray(sspec.get("width", [0.3] * d), float),
        x_shift=np.asarray(shift, float) if shift is not None else None,
        channels=channels,
    )

    espec = cfg.get("event_grid", {"type": "conjugate"})
    if espec.get("type", "conjugate") == "conjugate":
        center = espec.get("center", shift)
        xg = conjugate_grid(kg, center=np.asarray(center, float) if center is not None else None)
    else:
        xg = spacetime_grid([_build_axis(s) for s in espec["axes"]])

    tol = dict(_DEFAULT_TOLERANCES)
    tol.update(cfg.get("tolerances", {}))
    return {"grid": kg, "kernel": kernel, "state": psi, "xgrid": xg, "tolerances": tol, "config": cfg}


# ---------------------------------------------------------------------------
# pipeline steps
# ---------------------------------------------------------------------------

def step_certify(scn: dict) -> dict:
    kernel = scn["kernel"]
    psi = scn["state"]
    cert = certify_kernel(kernel, grid=psi.grid, spins=psi.spins() or None)
    result = {
        "kernel": cert.kernel,
        "max_operator_norm": cert.max_operator_norm,
        "contraction_ok": cert.contraction_ok,
        "isometry_residual": cert.isometry_residual,
        "isometric": cert.isometric,
    }
    if not cert.contraction_ok:
        raise HardFailure(
            f"kernel {kernel.name!r} violates the contraction bound "
            f"(max operator norm {cert.max_operator_norm:.6g})"
        )
    if getattr(kernel, "normalized", False) and not cert.isometric:
        raise HardFailure(
            f"kernel {kernel.name!r} claims normalization but fails the isometry "
            f"check (residual {cert.isometry_residual:.3g})"
        )
    return result


def step_classify(scn: dict) -> dict:
    kernel = scn["kernel"]
    if not hasattr(kernel, "sectors"):
        return {"kernel": kernel.name, "classification": "not_applicable"}
    return classify_kernel(kernel)


def step_density(scn: dict, outdir: Path) -> dict:
    psi = scn["state"]
    kernel = scn["kernel"]
    tol = scn["tolerances"]
    fld = density(psi, kernel, scn["xgrid"])
    total = fld.total()
    nrm = fld.state_norm_squared
    if total > nrm + tol["boundedness"]:
        raise HardFailure(f"density integral {total} exceeds the state norm {nrm}")
    normalized = bool(getattr(kernel, "normalized", False))
    norm_err = abs(total - nrm)
    if normalized and fld.capture_fraction() >= tol["capture"] and norm_err >= tol["normalization"]:
        raise HardFailure(f"normalization violated: |integral - norm| = {norm_err:.3g}")
    header = [f"x{i}" for i in range(fld.xgrid.dimension)] + ["rho"]
    rows = [list(map(float, x)) + [float(r)] for x, r in zip(fld.xgrid.nodes, fld.rho)]
    write_csv(outdir / "density.csv", header, rows)
    render_density_figure(outdir / "density.png", fld)
    scn["_density"] = fld
    return {
        "total": total,
        "state_norm_squared": nrm,
        "capture_fraction": fld.capture_fraction(),
        "normalization_error": norm_err,
        "grid_points": int(fld.xgrid.size),
    }


def step_coords(scn: dict, outdir: Path) -> dict:
    cfg = scn["config"].get("coords", {})
    routes = cfg.get("routes", ["moment"])
    tolerance = float(cfg.get("tolerance", 1e-3))
    psi = scn["state"]
    kernel = scn["kernel"]
    estimates = {}
    for route in routes:
        if route == "moment":
            fld = scn.get("_density") or density(psi, kernel, scn["xgrid"])
            estimates[route] = mean_coordinates_moment(fld)
        elif route == "abc":
            estimates[route] = mean_coordinates_abc(psi, kernel)
        elif route == "operator":
            estimates[route] = mean_coordinates_operator(psi, kernel)
    worst = 0.0
    names = sorted(estimates)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            worst = max(worst, float(np.max(np.abs(estimates[a].real - estimates[b].real))))
    if len(names) > 1 and worst >= tolerance:
        raise HardFailure(f"coordinate routes disagree: max pairwise difference {worst:.3g}")
    rows = []
    for name in names:
        est = estimates[name]
        for alpha, v in enumerate(est.values):
            rows.append([name, alpha, float(v.real), float(v.imag)])
    write_csv(outdir / "coords.csv", ["route", "alpha", "re", "im"], rows)
    return {
        "routes": {
            name: {
                "values_re": estimates[name].real.tolist(),
                "values_im": estimates[name].values.imag.tolist(),
                "max_imag": estimates[name].max_imag,
            }
            for name in names
        },
        "max_pairwise_difference": worst,
        "tolerance": tolerance,
    }


def step_definiteness(scn: dict, outdir: Path, threads: int) -> dict:
    cfg = scn["config"].get("definiteness", {})
    d = scn["grid"].dimension
    center = np.asarray(cfg.get("family_center", [4.0] * d), float)
    halfwidth = np.asarray(cfg.get("family_halfwidth", [2.0] * d), float)
    fam = bump_family(d, center, halfwidth)
    lambdas = tuple(cfg.get("lambdas", [1.0, 2.0, 4.0, 8.0, 16.0]))
    n_per_axis = int(cfg.get("n_per_axis", 96))
    scale = float(cfg.get("region_scale", 1.0))
    # region: one base-width wide, measured at lambda = 1
    base = definiteness_probe(
        scn["kernel"], fam, region=np.ones(d), lambdas=lambdas[:3], n_per_axis=n_per_axis
    )
    region = scale * base.widths[0]
    rep = definiteness_probe(
        scn["kernel"], fam, region=region, lambdas=lambdas, n_per_axis=n_per_axis, threads=threads
    )
    rows = [
        [float(lam), float(p)] + [float(w) for w in ws]
        for lam, p, ws in zip(rep.lambdas, rep.probabilities, rep.widths)
    ]
    write_csv(
        outdir / "definiteness.csv",
        ["lambda", "probability"] + [f"width{i}" for i in range(d)],
        rows,
    )
    render_definiteness_figure(outdir / "definiteness.png", rep)
    return {
        "lambdas": rep.lambdas.tolist(),
        "probabilities": rep.probabilities.tolist(),
        "widths": rep.widths.tolist(),
        "region": rep.region.tolist(),
        "width_exponent": rep.width_exponent,
        "width_exponent_residual": rep.width_exponent_residual,
        "limit_estimate": rep.limit_estimate,
        "monotone": rep.monotone,
        "r_samples": rep.r_samples,
    }


_STEPS = ("certify", "classify", "density", "coords", "definiteness")


def execute(cfg: dict, outdir: Path, steps, threads: int) -> dict:
    scn = build_scenario(cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    results = {"scenario": cfg["scenario"]["name"], "steps": {}}
    for step in steps:
        log.info("running step %s", step)
        if step == "certify":
            results["steps"][step] = step_certify(scn)
        elif step == "classify":
            results["steps"][step] = step_classify(scn)
        elif step == "density":
            results["steps"][step] = step_density(scn, outdir)
        elif step == "coords":
            results["steps"][step] = step_coords(scn, outdir)
        elif step == "definiteness":
            results["steps"][step] = step_definiteness(scn, outdir, threads)
        else:
            raise click.UsageError(f"unknown pipeline step {step!r}")
    return results


def _finish(results: dict, outdir: Path, seed: int) -> None:
    meta = {"version": __version__, "seed": seed}
    report = write_report(outdir / "report.json", results, meta)
    click.echo(f"report written to {outdir / 'report.json'} (hash {report['hash'][:16]})")


def _run_steps(config, out, threads, seed, steps) -> None:
    _setup_logging()
    np.random.seed(seed)
    outdir = Path(out)
    try:
        cfg = load_config(config)
        results = execute(cfg, outdir, steps, threads)
    except HardFailure as exc:
        click.echo(f"FAILED: {exc}", err=True)
        sys.exit(2)
    except (jsonschema.ValidationError, ValueError) as exc:
        click.echo(f"invalid scenario: {exc}", err=True)
        sys.exit(3)
    _finish(results, outdir, seed)


def _common(fn):
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--threads", type=int, default=1, show_default=True)(fn)
    fn = click.option("--out", type=click.Path(), default="eventloc_out", show_default=True)(fn)
    fn = click.option("--config", type=click.Path(exists=True), required=True)(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Numerical engine for covariant event-localization measures."""


for _step in _STEPS:

    def _make(step):
        @_common
        def cmd(config, out, threads, seed):
            _run_steps(config, out, threads, seed, [step])

        cmd.__doc__ = f"Run only the {step} pipeline step."
        return cmd

    main.command(name=_step)(_make(_step))


@main.command()
@_common
def run(config, out, threads, seed):
    """Run the full pipeline requested by the scenario config."""
    _setup_logging()
    np.random.seed(seed)
    outdir = Path(out)
    try:
        cfg = load_config(config)
        steps = cfg.get("pipeline", {}).get("steps", list(_STEPS))
        results = execute(cfg, outdir, steps, threads)
    except HardFailure as exc:
        click.echo(f"FAILED: {exc}", err=True)
        sys.exit(2)
    except (jsonschema.ValidationError, ValueError) as exc:
        click.echo(f"invalid scenario: {exc}", err=True)
        sys.exit(3)
    _finish(results, outdir, seed)


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
def selftest(seed):
    """Run a quick invariant suite: kinematics, representations, Fourier."""
    _setup_logging()
    rng = np.random.default_rng(seed)
    failures = []

    worst = 0.0
    for _ in range(100):
        kv = rng.uniform(-2, 2, size=3)
        k0 = np.linalg.norm(kv) + rng.uniform(0.5, 3.0)
        k = np.array([k0, *kv])
        mu = np.sqrt(k[0] ** 2 - kv @ kv)
        lam = lorentz_of_sl2c(wigner_boost(k))
        worst = max(worst, float(np.max(np.abs(lam @ np.array([mu, 0, 0, 0]) - k))))
    click.echo(f"boost kinematics residual: {worst:.3e}")
    if worst > 1e-12:
        failures.append("kinematics")

    for label in (IrrepLabel(0, 1j), IrrepLabel(1, 0.0), IrrepLabel(0, 2j)):
        rep = build_generators(label, 6)
        res = max(rep.certify().values())
        click.echo(f"irrep (M={label.M}, c={label.c}) certification residual: {res:.3e}")
        if res > 1e-10:
            failures.append(f"irrep {label}")

    kg = momentum_grid([uniform_axis(2.0, 10.0, 64)])
    psi = gaussian_packet(kg, center=[6.0], width=[0.6])
    fld = density(psi, make_translation_kernel("flat"), conjugate_grid(kg))
    err = abs(fld.total() - norm_squared(psi))
    click.echo(f"Fourier unitarity residual: {err:.3e}")
    if err > 1e-10:
        failures.append("fourier")

    if failures:
        click.echo(f"SELFTEST FAILED: {failures}", err=True)
        sys.exit(2)
    click.echo("selftest passed")


def bundled_scenario(name: str) -> Path:
    """Path of a scenario config shipped with the package."""
    ref = resources.files("eventloc").joinpath("scenarios").joinpath(f"{name}.toml")
    with resources.as_file(ref) as path:
        return Path(path)


if __name__ == "__main__":
    main()
