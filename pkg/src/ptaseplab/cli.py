"""Command-line front end.

Subcommands expose each engine with machine-readable output: `bethe` (root
sets as CSV), `prob` (joint probabilities as JSON, any engine or a
cross-engine comparison), `limit` (limit-law tables as CSV), and `identity`
(determinant identity fuzzing as JSON lines).

Exit codes: 0 ok, 2 domain/regime error, 3 resource limit, 4 accuracy
failure.
"""

from __future__ import annotations

import csv
import functools
import json
import sys

import click
import numpy as np

from . import bethe, finite_dist, limits, simulator, toeplitz_oracle
from .core import (
    InitialCondition,
    ModelParams,
    Observation,
    make_explicit_ic,
    make_flat_ic,
    make_step_ic,
    make_stepflat_ic,
)
from .errors import NumericalError, ParameterError, RegimeError, ResourceError


def _fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    return f"{x:.17g}"


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ParameterError, RegimeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except ResourceError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except NumericalError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(4)

    return wrapper


def _load_config(ctx, param, value):
    """--config file.json overrides the flags of the invoked subcommand."""
    if value is None:
        return None
    with open(value, encoding="utf-8") as f:
        data = json.load(f)
    ctx.default_map = data
    return value


@click.group()
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker cap for engines that parallelize.")
@click.pass_context
def main(ctx, threads):
    """Exact and asymptotic distributions of TASEP on a ring."""
    ctx.ensure_object(dict)
    ctx.obj["threads"] = threads


def _parse_complex(s: str) -> complex:
    return complex(s.replace(" ", "").replace("i", "j"))


@main.command("bethe")
@click.option("--config", callback=_load_config, is_eager=True, expose_value=False,
              type=click.Path(exists=True), help="JSON file overriding flags.")
@click.option("--L", "L", type=int, required=True)
@click.option("--N", "N", type=int, required=True)
@click.option("--z", "z_norm", type=str, required=True,
              help="Normalized z, |z| < 1 (complex accepted, e.g. 0.2+0.1j).")
@click.option("--output", type=click.Path(), default="-", show_default=True)
@handle_errors
def cmd_bethe(L, N, z_norm, output):
    """Solve the root sets for one z and emit them as CSV."""
    params = ModelParams(L, N)
    zn = _parse_complex(z_norm)
    if abs(zn) >= 1:
        raise RegimeError("regime |z|>=1")
    z = bethe.rescale_z(zn, params).z_phys
    rs = bethe.solve_bethe_roots(params, z)
    out = sys.stdout if output == "-" else open(output, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(out)
        w.writerow(["side", "re", "im", "residual"])
        for side, roots in (("left", rs.left), ("right", rs.right)):
            for r in roots:
                w.writerow([side, _fmt(r.real), _fmt(r.imag), _fmt(rs.max_residual)])
    finally:
        if out is not sys.stdout:
            out.close()


def _build_ic(ic_kind, L, N, y, d, Ls) -> InitialCondition:
    if ic_kind == "step":
        return make_step_ic(L, N)
    if ic_kind == "flat":
        if d is None:
            raise ParameterError("flat initial condition needs --d")
        return make_flat_ic(N, d)
    if ic_kind == "stepflat":
        if d is None or Ls is None:
            raise ParameterError("step-flat initial condition needs --d and --Ls")
        return make_stepflat_ic(N, d, Ls)
    if ic_kind == "explicit":
        if y is None:
            raise ParameterError("explicit initial condition needs --y")
        return make_explicit_ic(L, [int(v) for v in y.split(",")])
    raise ParameterError(f"unknown initial condition kind {ic_kind!r}")


def _parse_obs(obs_strs) -> tuple[Observation, ...]:
    out = []
    for s in obs_strs:
        parts = s.split(",")
        if len(parts) != 3:
            raise ParameterError(f"observation must be 'k,t,a', got {s!r}")
        out.append(Observation(int(parts[0]), float(parts[1]), int(parts[2])))
    return tuple(out)


@main.command("prob")
@click.option("--config", callback=_load_config, is_eager=True, expose_value=False,
              type=click.Path(exists=True), help="JSON file overriding flags.")
@click.option("--L", "L", type=int, required=True)
@click.option("--N", "N", type=int, required=True)
@click.option("--ic", "ic_kind", default="step", show_default=True,
              type=click.Choice(["step", "flat", "stepflat", "explicit", "uniform"]))
@click.option("--y", type=str, default=None, help="Comma-separated positions.")
@click.option("--d", type=int, default=None)
@click.option("--Ls", "Ls", type=int, default=None)
@click.option("--obs", "obs_strs", multiple=True, required=True,
              help="One 'k,t,a' triple per observation.")
@click.option("--engine", default="fredholm", show_default=True,
              type=click.Choice(["fredholm", "toeplitz", "mc", "ctmc"]))
@click.option("--compare", is_flag=True, help="Run all feasible engines.")
@click.option("--n-nodes", type=int, default=16, show_default=True)
@click.option("--max-nodes", type=int, default=256, show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--radii", type=str, default=None,
              help="Comma-separated normalized contour radii.")
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", type=click.Path(), default="-", show_default=True)
@handle_errors
def cmd_prob(L, N, ic_kind, y, d, Ls, obs_strs, engine, compare,
             n_nodes, max_nodes, tol, radii, samples, seed, output):
    """Joint probability P(x_k(t) >= a for all observations)."""
    obs = _parse_obs(obs_strs)
    radii_t = tuple(float(r) for r in radii.split(",")) if radii else None
    config = finite_dist.QuadConfig(
        radii=radii_t, n_nodes=n_nodes, max_nodes=max_nodes, tol=tol
    )
    params = ModelParams(L, N)
    uniform = ic_kind == "uniform"
    ic = None if uniform else _build_ic(ic_kind, L, N, y, d, Ls)

    def run(eng: str):
        report: dict = {}
        if eng == "fredholm":
            if uniform:
                p = finite_dist.multipoint_prob_uniform(params, obs, config, report)
            else:
                p = finite_dist.multipoint_prob(ic, obs, config, report=report)
        elif eng == "toeplitz":
            if uniform:
                raise ParameterError("toeplitz engine needs a deterministic start")
            p = toeplitz_oracle.multipoint_prob_oracle(ic, obs, config)
        elif eng == "mc":
            if uniform:
                raise ParameterError("mc engine needs a deterministic start")
            p, se = simulator.estimate_joint_prob(ic, obs, samples, seed)
            report["stderr"] = se
            report["samples"] = samples
        else:
            if uniform:
                raise ParameterError("ctmc engine needs a deterministic start")
            p = simulator.ctmc_exact_prob(ic, obs)
        return p, report

    result = {
        "L": L,
        "N": N,
        "ic": ic.to_json_dict() if ic else {"kind": "uniform", "L": L, "N": N},
        "observations": [{"k": o.k, "t": o.t, "a": o.a} for o in obs],
        "provenance": {
            "seed": seed,
            "n_nodes": n_nodes,
            "radii": list(radii_t) if radii_t else list(finite_dist.default_radii(len(obs))),
        },
    }
    if compare:
        engines = ["fredholm", "toeplitz", "mc", "ctmc"]
        values = {}
        for eng in engines:
            try:
                p, rep = run(eng)
            except (ParameterError, ResourceError):
                continue
            values[eng] = p
            result.setdefault("reports", {})[eng] = {
                k: (_fmt(v) if isinstance(v, float) else v) for k, v in rep.items()
            }
        result["probability"] = {k: _fmt(v) for k, v in values.items()}
        names = list(values)
        result["pairwise_deviation"] = {
            f"{a}-{b}": _fmt(abs(values[a] - values[b]))
            for i, a in enumerate(names)
            for b in names[i + 1:]
        }
    else:
        p, rep = run(engine)
        result["engine"] = engine
        result["probability"] = _fmt(p)
        for key in ("imag_residual", "M_final", "retries", "stderr", "samples"):
            if key in rep:
                val = rep[key]
                result["provenance"][key] = _fmt(val) if isinstance(val, float) else val
        if "radii" in rep:
            result["provenance"]["radii"] = [float(_fmt(r)) for r in rep["radii"]]

    text = _json_dump(result)
    if output == "-":
        click.echo(text)
    else:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text + "\n")


@main.command("limit")
@click.option("--config", callback=_load_config, is_eager=True, expose_value=False,
              type=click.Path(exists=True), help="JSON file overriding flags.")
@click.option("--kind", required=True,
              type=click.Choice(["step", "flat", "stepflat", "uniformstep", "uniform"]))
@click.option("--x", "x_grid", type=str, required=True,
              help="Comma-separated fluctuation values.")
@click.option("--tau", type=float, default=1.0, show_default=True)
@click.option("--gamma", type=float, default=0.0, show_default=True)
@click.option("--mu", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--tol", type=float, default=1e-7, show_default=True)
@click.option("--diff-step", type=float, default=1e-4, show_default=True,
              help="Finite-difference step for the uniform kind.")
@click.option("--output", type=click.Path(), default="-", show_default=True)
@handle_errors
def cmd_limit(kind, x_grid, tau, gamma, mu, alpha, tol, diff_step, output):
    """Tabulate a one-point limit law F(x) on a grid as CSV."""
    xs = [float(v) for v in x_grid.split(",")]
    config = limits.LimitConfig(tol=tol, diff_step=diff_step)
    ic_kw = {}
    if kind == "stepflat":
        if mu is None:
            raise ParameterError("stepflat kind needs --mu > 0")
        ic_kw["mu"] = mu
    if kind == "uniformstep":
        if alpha is None:
            raise ParameterError("uniformstep kind needs --alpha > 0")
        ic_kw["alpha"] = alpha

    out = sys.stdout if output == "-" else open(output, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(out)
        header = ["x", "F"]
        if kind == "uniform":
            header.append("diff_step")
        w.writerow(header)
        for x in xs:
            if kind == "uniform":
                F = limits.F_uniform([x], [tau], [gamma], config)
                w.writerow([_fmt(x), _fmt(F), _fmt(diff_step)])
            else:
                F = limits.F_ic(kind, [x], [tau], [gamma], config, **ic_kw)
                w.writerow([_fmt(x), _fmt(F)])
    finally:
        if out is not sys.stdout:
            out.close()


@main.command("identity")
@click.option("--config", callback=_load_config, is_eager=True, expose_value=False,
              type=click.Path(exists=True), help="JSON file overriding flags.")
@click.option("--count", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--m-max", type=int, default=3, show_default=True)
@click.option("--n-max", type=int, default=4, show_default=True)
@click.option("--size-max", type=int, default=7, show_default=True)
@click.option("--threshold", type=float, default=1e-7, show_default=True)
@click.option("--output", type=click.Path(), default="-", show_default=True)
@handle_errors
def cmd_identity(count, seed, m_max, n_max, size_max, threshold, output):
    """Fuzz the determinant identity; emit one JSON line per instance."""
    rng = np.random.default_rng(seed)
    lines = []
    max_rel = 0.0
    for i in range(count):
        m = int(rng.integers(1, m_max + 1))
        N = int(rng.integers(1, n_max + 1))
        sizes = [int(rng.integers(N, size_max + 1)) for _ in range(m)]
        inst = toeplitz_oracle.random_instance(rng, m, N, sizes)
        lhs, rhs, rel = toeplitz_oracle.generic_identity_check(inst)
        max_rel = max(max_rel, rel)
        lines.append(json.dumps({
            "index": i, "m": m, "N": N, "sizes": sizes,
            "lhs_re": _fmt(lhs.real), "lhs_im": _fmt(lhs.imag),
            "rel_err": _fmt(rel),
        }))
    lines.append(json.dumps({"summary": True, "count": count,
                             "max_rel_err": _fmt(max_rel)}))
    text = "\n".join(lines)
    if output == "-":
        click.echo(text)
    else:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    if max_rel > threshold:
        sys.exit(4)


if __name__ == "__main__":
    main()
