"""Command-line driver for the inequality experiments.

Subcommands mirror the library surface: ``constants`` (ledger dump),
``verify`` (randomized 1-D nonnegativity suites), ``sharpness``
(boundary-constant eps-sweeps), ``minimize`` (quotient minimization over an
(alpha, p) grid), ``critical-demo`` (degeneration tables) and ``nd-verify``
(distance-weight suites on planar domains).

Reproducibility contract: outputs are deterministic functions of the
resolved configuration — floats print with 17 significant digits, suite
rows are ordered by (id, case) whatever the worker pool does, and per-case
seeds derive from the master seed via the documented counter scheme
``SeedSequence((seed, id_index, case))``.  Every artifact embeds the
resolved configuration: JSON under a ``config`` key, CSV as a leading
``# config: {...}`` comment line.  A config file (``key = value`` lines)
supplies defaults; flags given explicitly on the command line win.

Exit status: nonzero iff a suite reports violations or a deficit column
goes negative beyond its tolerance; plumbing errors raise the usual click
errors (exit code 2).
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import asdict

import click

from .core import Params, build_ledger, parse_scale
from .geomnd import (
    ND_IDS,
    Annulus,
    Disk,
    Ellipse,
    build_nd_ledger,
    load_domain_config,
    nd_critical_demo,
    nd_nonnegativity_suite,
)
from .ineq1d import (
    INEQUALITY_IDS,
    _PROBE_FAMILY,
    InequalitySpec,
    critical_infimum_demo,
    nonnegativity_suite,
    sharpness_probe,
)
from .varmin import MinimizeConfig, sweep_best_constant

__all__ = ["main"]


def _read_kv(path):
    """``key = value`` lines; '#' comments and blank lines ignored."""
    data = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise click.ClickException(
                    f"{path}:{lineno}: expected 'key = value', got {raw!r}"
                )
            key, _, value = line.partition("=")
            data[key.strip().lower().replace("-", "_")] = value.strip()
    return data


class _Resolver:
    """Flag-over-file-over-default resolution with type casting."""

    def __init__(self, config_path):
        self.file = _read_kv(config_path) if config_path else {}
        self.resolved = {}

    def get(self, name, flag_value, cast, default):
        if flag_value is not None:
            value = flag_value if cast is None else cast(flag_value)
        elif name in self.file:
            value = cast(self.file[name]) if cast else self.file[name]
        else:
            value = default
        self.resolved[name] = value
        return value


def _csv_bool(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def _parse_domain(text):
    """Domain from ``kind:args`` shorthand or a declarative config file."""
    if isinstance(text, (Disk, Annulus, Ellipse)):
        return text
    text = str(text).strip()
    if os.path.exists(text) or "=" in text:
        cfg = load_domain_config(text)
        if "domain" not in cfg:
            raise click.ClickException(f"{text!r} does not define a domain")
        return cfg["domain"]
    kind, _, args = text.partition(":")
    vals = [float(v) for v in args.split(",")] if args else []
    builders = {"disk": (Disk, 1), "annulus": (Annulus, 2), "ellipse": (Ellipse, 2)}
    entry = builders.get(kind.strip().lower())
    if entry is None or len(vals) != entry[1]:
        raise click.ClickException(
            f"cannot parse domain {text!r}; use disk:RHO, annulus:RIN,ROUT, "
            "ellipse:A,B or a config file"
        )
    return entry[0](*vals)


def _parse_eps(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _parse_ids(text, universe):
    if text is None or str(text).lower() in ("", "all"):
        return None
    ids = [s.strip() for s in str(text).split(",") if s.strip()]
    unknown = [s for s in ids if s not in universe]
    if unknown:
        raise click.ClickException(
            f"unknown spec id(s) {unknown}; choose from {list(universe)}"
        )
    return tuple(ids)


def _config_line(resolver, command):
    doc = {"command": command}
    doc.update(resolver.resolved)
    doc = {
        k: (repr(v) if isinstance(v, (Disk, Annulus, Ellipse)) else v)
        for k, v in doc.items()
    }
    return json.dumps(doc, sort_keys=True)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _emit_json(payload, resolver, command, out):
    doc = {"config": json.loads(_config_line(resolver, command)), "report": payload}
    _emit(json.dumps(doc, indent=2) + "\n", out)


def _common(f):
    f = click.option("--config", "config_path", type=click.Path(exists=True),
                     default=None, help="key = value defaults; flags win")(f)
    f = click.option("--out", type=click.Path(), default=None,
                     help="write the artifact here instead of stdout")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                     default=None, help="artifact format")(f)
    return f


@click.group()
def main():
    """Sharp weighted Hardy inequalities: experiments and verification."""


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


@main.command()
@click.option("--alpha", type=float, default=None)
@click.option("--p", type=float, default=None)
@click.option("--r", "--R", "r_scale", default=None,
              help="scale R; accepts e, ee, e^k spellings")
@click.option("--domain", default=None,
              help="planar domain (disk:RHO, annulus:RIN,ROUT, ellipse:A,B); "
                   "adds the band/whole-domain constants")
@click.option("--eta", type=float, default=None, help="band width")
@_common
def constants(alpha, p, r_scale, domain, eta, fmt, out, config_path):
    """Dump the constants ledger for one parameter triple."""
    res = _Resolver(config_path)
    alpha = res.get("alpha", alpha, float, 0.0)
    p = res.get("p", p, float, 2.0)
    r_value = parse_scale(res.get("r", r_scale, None, "e2"))
    res.resolved["r"] = r_value
    domain = res.get("domain", domain, _parse_domain, None)
    eta = res.get("eta", eta, float, None)
    fmt = res.get("format", fmt, str, "json")

    params = Params(alpha, p, r_value)
    ledger = (build_nd_ledger(domain, params, eta) if domain is not None
              else build_ledger(params))
    if fmt == "json":
        _emit_json(json.loads(ledger.to_json()), res, "constants", out)
    else:
        lines = ["# config: " + _config_line(res, "constants"),
                 "name,value,formula"]
        for e in ledger.entries.values():
            lines.append(f"{e.name},{format(e.value, '.17g')},\"{e.formula}\"")
        _emit("\n".join(lines) + "\n", out)


# ---------------------------------------------------------------------------
# verify (1-D suites)
# ---------------------------------------------------------------------------


@main.command()
@click.option("--spec", default=None,
              help="comma-separated inequality ids (default: all)")
@click.option("--cases", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--n", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--tmin", type=float, default=None)
@click.option("--workers", type=int, default=None)
@_common
def verify(spec, cases, seed, n, gamma, tmin, workers, fmt, out, config_path):
    """Randomized nonnegativity suites for the interval inequalities."""
    res = _Resolver(config_path)
    ids = res.get("spec", spec, lambda s: _parse_ids(s, INEQUALITY_IDS), None)
    cases = res.get("cases", cases, int, 1000)
    seed = res.get("seed", seed, int, 0)
    n = res.get("n", n, int, 1024)
    gamma = res.get("gamma", gamma, float, 2.0)
    tmin = res.get("tmin", tmin, float, 1e-4)
    workers = res.get("workers", workers, int, None)
    fmt = res.get("format", fmt, str, "csv")

    suite = nonnegativity_suite(ids=ids, cases=cases, n=n, t_min=tmin,
                                gamma=gamma, seed=seed, workers=workers)
    if fmt == "json":
        _emit_json(json.loads(suite.to_json()), res, "verify", out)
    else:
        _emit("# config: " + _config_line(res, "verify") + "\n"
              + suite.to_csv(), out)
    if suite.violations:
        click.echo(f"{suite.violations} violation(s)", err=True)
        sys.exit(1)


# ---------------------------------------------------------------------------
# sharpness
# ---------------------------------------------------------------------------


@main.command()
@click.option("--spec", default=None, help="CorB, CorD or CorE")
@click.option("--alpha", type=float, default=None)
@click.option("--p", type=float, default=None)
@click.option("--r", "--R", "r_scale", default=None)
@click.option("--eps", default=None, help="comma-separated eps sweep")
@click.option("--n", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--tmin", type=float, default=None)
@_common
def sharpness(spec, alpha, p, r_scale, eps, n, gamma, tmin, fmt, out,
              config_path):
    """Drive a boundary-constant deficit to zero along its probe family."""
    res = _Resolver(config_path)
    spec_id = res.get("spec", spec, str, "CorB")
    if spec_id not in _PROBE_FAMILY:
        raise click.ClickException(
            f"--spec must be one of {sorted(_PROBE_FAMILY)}, got {spec_id!r}"
        )
    alpha = res.get("alpha", alpha, float, 0.0)
    p = res.get("p", p, float, 2.0)
    r_value = parse_scale(res.get("r", r_scale, None, "e2"))
    res.resolved["r"] = r_value
    eps_list = res.get("eps", eps, _parse_eps, [0.4, 0.2, 0.1])
    n = res.get("n", n, int, 2048)
    gamma = res.get("gamma", gamma, float, 3.0)
    tmin = res.get("tmin", tmin, float, 1e-6)
    fmt = res.get("format", fmt, str, "csv")

    ineq = InequalitySpec(spec_id, Params(alpha, p, r_value))
    report = sharpness_probe(ineq, _PROBE_FAMILY[spec_id], eps_list,
                             t_min=tmin, n=n, gamma=gamma)
    if fmt == "json":
        payload = {
            "id": report.ineq_id, "family": report.family,
            "rate": report.rate,
            "rows": [asdict(r) for r in report.rows],
        }
        _emit_json(payload, res, "sharpness", out)
    else:
        _emit("# config: " + _config_line(res, "sharpness") + "\n"
              + report.to_csv(), out)
    bad = [r for r in report.rows if r.deficit < -(r.truncation_bound + 1e-15)]
    if bad:
        click.echo(f"{len(bad)} negative deficit(s)", err=True)
        sys.exit(1)


# ---------------------------------------------------------------------------
# minimize
# ---------------------------------------------------------------------------


@main.command()
@click.option("--alpha", default=None, help="comma-separated alpha grid")
@click.option("--p", default=None, help="comma-separated p grid")
@click.option("--r", "--R", "r_scale", default=None)
@click.option("--n", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--tmin", type=float, default=None)
@_common
def minimize(alpha, p, r_scale, n, gamma, tmin, fmt, out, config_path):
    """Quotient minimization (best-constant sweep) over an (alpha, p) grid.

    Critical-regime grid points have no positive constant and are omitted
    from the table (the library returns their degeneration schedule
    instead; see critical-demo).
    """
    res = _Resolver(config_path)
    alphas = res.get("alpha", alpha, _parse_eps, [0.0])
    ps = res.get("p", p, _parse_eps, [2.0])
    r_value = parse_scale(res.get("r", r_scale, None, "e2"))
    res.resolved["r"] = r_value
    n = res.get("n", n, int, 4096)
    gamma = res.get("gamma", gamma, float, 3.0)
    tmin = res.get("tmin", tmin, float, 1e-6)
    fmt = res.get("format", fmt, str, "csv")

    config = MinimizeConfig(n=n, gamma=gamma, t_min=tmin)
    sweep = sweep_best_constant(alphas, ps, r_value, config=config)
    if fmt == "json":
        _emit_json({"rows": sweep.rows}, res, "minimize", out)
    else:
        _emit("# config: " + _config_line(res, "minimize") + "\n"
              + sweep.to_csv(), out)


# ---------------------------------------------------------------------------
# critical-demo
# ---------------------------------------------------------------------------


@main.command("critical-demo")
@click.option("--alpha", type=float, default=None)
@click.option("--p", type=float, default=None)
@click.option("--r", "--R", "r_scale", default=None)
@click.option("--eps", default=None, help="comma-separated eps schedule")
@click.option("--domain", default=None,
              help="run the planar-domain demo instead of the interval one")
@click.option("--eta", type=float, default=None)
@click.option("--n", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--tmin", type=float, default=None)
@_common
def critical_demo(alpha, p, r_scale, eps, domain, eta, n, gamma, tmin, fmt,
                  out, config_path):
    """Degeneration tables for the critical-regime minimizing families."""
    res = _Resolver(config_path)
    alpha = res.get("alpha", alpha, float, 1.0)
    p = res.get("p", p, float, 2.0)
    r_value = parse_scale(res.get("r", r_scale, None, "e2"))
    res.resolved["r"] = r_value
    eps_list = res.get("eps", eps, _parse_eps, None)
    domain = res.get("domain", domain, _parse_domain, None)
    eta = res.get("eta", eta, float, None)
    n = res.get("n", n, int, 2048)
    gamma = res.get("gamma", gamma, float, 3.0)
    tmin = res.get("tmin", tmin, float, 1e-8)
    fmt = res.get("format", fmt, str, "csv")

    params = Params(alpha, p, r_value)
    if domain is not None:
        table = nd_critical_demo(domain, params, eps_list, eta, n=max(n, 64))
    else:
        table = critical_infimum_demo(params, eps_list, t_min=tmin, n=n,
                                      gamma=gamma)
    if fmt == "json":
        payload = {
            "kind": table.kind, "note": table.note,
            "rows": [asdict(r) for r in table.rows],
        }
        _emit_json(payload, res, "critical-demo", out)
    else:
        _emit("# config: " + _config_line(res, "critical-demo") + "\n"
              + table.to_csv(), out)


# ---------------------------------------------------------------------------
# nd-verify
# ---------------------------------------------------------------------------


@main.command("nd-verify")
@click.option("--spec", default=None,
              help="comma-separated display ids (default: all the domain "
                   "supports)")
@click.option("--domain", default=None)
@click.option("--cases", type=int, default=None,
              help="radial cases per id; angular cases are min(50, "
                   "max(1, cases // 4))")
@click.option("--seed", type=int, default=None)
@click.option("--n", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--tmin", type=float, default=None)
@click.option("--workers", type=int, default=None)
@_common
def nd_verify(spec, domain, cases, seed, n, gamma, tmin, workers, fmt, out,
              config_path):
    """Randomized nonnegativity suites for the distance-weight displays."""
    res = _Resolver(config_path)
    ids = res.get("spec", spec, lambda s: _parse_ids(s, ND_IDS), None)
    domain = res.get("domain", domain, _parse_domain, Disk(1.0))
    cases = res.get("cases", cases, int, 200)
    seed = res.get("seed", seed, int, 0)
    n = res.get("n", n, int, 256)
    gamma = res.get("gamma", gamma, float, 2.0)
    tmin = res.get("tmin", tmin, float, 1e-6)
    workers = res.get("workers", workers, int, None)
    fmt = res.get("format", fmt, str, "csv")

    angular = min(50, max(1, cases // 4))
    suite = nd_nonnegativity_suite(
        ids=ids, domain=domain, cases=cases, angular_cases=angular, n=n,
        t_min=tmin, gamma=gamma, seed=seed, workers=workers,
    )
    if fmt == "json":
        _emit_json(json.loads(suite.to_json()), res, "nd-verify", out)
    else:
        _emit("# config: " + _config_line(res, "nd-verify") + "\n"
              + suite.to_csv(), out)
    if suite.violations:
        click.echo(f"{suite.violations} violation(s)", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
