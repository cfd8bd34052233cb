"""Command-line interface: every operation with JSON in, JSON out.

Inputs come from a file path argument or standard input ("-"); binary
operations read one object {"lhs": ..., "rhs": ...}.  Outputs are
deterministic: identical inputs give byte-identical output, with or without
the cache and for any --jobs value.  Domain errors print
{"error": {"kind", "detail"}} and exit 1; usage errors exit 2.
"""

from __future__ import annotations

import functools
import json
import os
import sys

import click

from .algebra import (
    GENUS_FREE,
    LABELED,
    element_from_json,
    element_to_json,
    expand_element,
    expand_genus_free,
    make_class,
    mul,
    mul_genus_free,
    pullback_forget,
    pushforward_psi_forget,
)
from .cache import ResultCache, cache_key
from .dr import (
    DRInput,
    dr_constant_term,
    dr_cycle,
    dr_eval,
    dr_relation,
    dr_sample_moduli,
    twisted_dr_eval,
)
from .graphs import (
    StrataError,
    canonical_form,
    contract_edges,
    enumerate_graphs,
    graph_from_json,
    graph_to_json,
    validate,
)
from .taut import convert, convert_element, expr_to_json, gp_mul_strata, stratum_from_json


def _emit(ctx, payload):
    pretty = ctx.obj["pretty"]
    if pretty:
        text = json.dumps(payload, indent=2, sort_keys=True)
    else:
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    click.echo(text)


def _read_json(source):
    if source == "-":
        return json.loads(sys.stdin.read())
    with open(source, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _element_arg(data, g=None):
    """Accept an element object or a bare graph (wrapped as its class)."""
    if "terms" in data:
        return element_from_json(data)
    return make_class(validate(graph_from_json(data)), g=g)


def _pair(data):
    try:
        return data["lhs"], data["rhs"]
    except (TypeError, KeyError):
        raise click.UsageError('expected a JSON object {"lhs": ..., "rhs": ...}')


def run_cached(ctx, name, payload, compute):
    """Return the JSON-able result, via the cache when one is configured."""
    cache_dir = ctx.obj["cache_dir"]
    if cache_dir is None:
        return compute()
    key = cache_key(name, {"input": payload, "pretty": ctx.obj["pretty"]})
    cache = ResultCache(cache_dir)
    hit = cache.get(key)
    if hit is not None:
        return json.loads(hit)
    result = compute()
    cache.put(
        key, json.dumps(result, sort_keys=True, separators=(",", ":")).encode()
    )
    return result


def domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StrataError as exc:
            click.echo(
                json.dumps(
                    {"error": {"kind": type(exc).__name__, "detail": str(exc)}},
                    sort_keys=True,
                    separators=(",", ":"),
                )
            )
            sys.exit(1)

    return wrapper


def _parse_weights(text):
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise click.UsageError(f"cannot parse weight vector {text!r}")


@click.group()
@click.option("--cache-dir", envvar="STRATA_CACHE_DIR", default=None, type=click.Path())
@click.option("--jobs", default=1, show_default=True, help="Worker budget.")
@click.option("--pretty", is_flag=True, help="Indent the JSON output.")
@click.pass_context
def main(ctx, cache_dir, jobs, pretty):
    """Boundary strata classes, their graph algebra, and DR cycles."""
    ctx.ensure_object(dict)
    ctx.obj.update(cache_dir=cache_dir, jobs=jobs, pretty=pretty)


# -- graphs ------------------------------------------------------------------


@main.group()
def graphs():
    """Multigraph enumeration and invariants."""


@graphs.command("enumerate")
@click.option("--n", required=True, type=int)
@click.option("--d", required=True, type=int)
@click.option("--g", default=None, type=int, help="Total genus; omit for genus-free.")
@click.option("--h1-max", default=None, type=int)
@click.pass_context
@domain_errors
def graphs_enumerate(ctx, n, d, g, h1_max):
    payload = {"n": n, "d": d, "g": g, "h1_max": h1_max}

    def compute():
        mode = LABELED if g is not None else GENUS_FREE
        classes = enumerate_graphs(n, d, genus=g, mode=mode, h1_max=h1_max)
        return {
            "count": len(classes),
            "classes": [
                {"graph": graph_to_json(cf.graph), "aut_order": cf.aut_order}
                for cf in classes
            ],
        }

    _emit(ctx, run_cached(ctx, "graphs.enumerate", payload, compute))


@graphs.command("aut")
@click.argument("source", default="-")
@click.pass_context
@domain_errors
def graphs_aut(ctx, source):
    data = _read_json(source)

    def compute():
        cf = canonical_form(validate(graph_from_json(data)))
        return {
            "aut_order": cf.aut_order,
            "encoding": cf.encoding.hex(),
            "canonical_graph": graph_to_json(cf.graph),
        }

    _emit(ctx, run_cached(ctx, "graphs.aut", data, compute))


@graphs.command("contract")
@click.argument("source", default="-")
@click.option("--edges", "edge_list", required=True, help="Comma-separated edge indices.")
@click.pass_context
@domain_errors
def graphs_contract(ctx, source, edge_list):
    data = _read_json(source)
    idxs = [int(t) for t in edge_list.split(",")] if edge_list else []

    def compute():
        out = contract_edges(validate(graph_from_json(data)), idxs)
        return graph_to_json(out)

    _emit(ctx, run_cached(ctx, "graphs.contract", {"graph": data, "edges": idxs}, compute))


# -- algebra -----------------------------------------------------------------


@main.group()
def algebra():
    """Formal graph algebra operations."""


def _binary_command(name, op, mode):
    @click.argument("source", default="-")
    @click.option("--g", default=None, type=int, help="Genus context for bare genus-free graphs.")
    @click.pass_context
    @domain_errors
    def cmd(ctx, source, g):
        data = _read_json(source)
        lhs, rhs = _pair(data)

        def compute():
            return element_to_json(op(_element_arg(lhs, g=g), _element_arg(rhs, g=g)))

        _emit(ctx, run_cached(ctx, name, {"input": data, "g": g}, compute))

    return cmd


algebra.command("mul")(_binary_command("algebra.mul", mul, LABELED))
algebra.command("mul-gf")(_binary_command("algebra.mul_gf", mul_genus_free, GENUS_FREE))


@algebra.command("expand")
@click.argument("source", default="-")
@click.option("--g", default=None, type=int, help="Target genus (required for a bare graph).")
@click.pass_context
@domain_errors
def algebra_expand(ctx, source, g):
    data = _read_json(source)

    def compute():
        if "terms" in data:
            return element_to_json(expand_element(element_from_json(data)))
        if g is None:
            raise click.UsageError("--g is required when expanding a bare graph")
        return element_to_json(expand_genus_free(graph_from_json(data), g))

    _emit(ctx, run_cached(ctx, "algebra.expand", {"input": data, "g": g}, compute))


@algebra.command("pullback")
@click.argument("source", default="-")
@click.pass_context
@domain_errors
def algebra_pullback(ctx, source):
    data = _read_json(source)

    def compute():
        return element_to_json(pullback_forget(_element_arg(data)))

    _emit(ctx, run_cached(ctx, "algebra.pullback", data, compute))


@algebra.command("pushforward-psi")
@click.argument("source", default="-")
@click.pass_context
@domain_errors
def algebra_pushforward(ctx, source):
    data = _read_json(source)

    def compute():
        return element_to_json(pushforward_psi_forget(_element_arg(data)))

    _emit(ctx, run_cached(ctx, "algebra.pushforward_psi", data, compute))


# -- taut --------------------------------------------------------------------


@main.group()
def taut():
    """Decorated stable-graph expressions."""


@taut.command("convert")
@click.argument("source", default="-")
@click.pass_context
@domain_errors
def taut_convert(ctx, source):
    data = _read_json(source)

    def compute():
        if "terms" in data:
            return expr_to_json(convert_element(element_from_json(data)))
        return expr_to_json(convert(validate(graph_from_json(data))))

    _emit(ctx, run_cached(ctx, "taut.convert", data, compute))


@taut.command("gp-mul")
@click.argument("source", default="-")
@click.pass_context
@domain_errors
def taut_gp_mul(ctx, source):
    data = _read_json(source)
    lhs, rhs = _pair(data)

    def compute():
        from .taut import DecoratedInputUnsupported

        for side in (lhs, rhs):
            if side.get("psi") or any(side.get("kappa") or []):
                raise DecoratedInputUnsupported(
                    "gp-mul takes undecorated stable graphs"
                )
        a = validate(graph_from_json(lhs.get("graph", lhs)))
        b = validate(graph_from_json(rhs.get("graph", rhs)))
        return expr_to_json(gp_mul_strata(a, b))

    _emit(ctx, run_cached(ctx, "taut.gp_mul", data, compute))


# -- dr ----------------------------------------------------------------------


@main.group()
def dr():
    """Double ramification cycle graph sums."""


def _dr_meta(inp, include_samples=True):
    meta = {"g": inp.g, "n": inp.n, "a": list(inp.a), "d": inp.d, "k": inp.k}
    if include_samples:
        nodes, checks = dr_sample_moduli(inp)
        meta["r_samples"] = nodes + checks
    return meta


@dr.command("eval")
@click.option("--g", required=True, type=int)
@click.option("--a", "weights", required=True)
@click.option("--d", required=True, type=int)
@click.option("--r", required=True, type=int)
@click.pass_context
@domain_errors
def dr_eval_cmd(ctx, g, weights, d, r):
    a = _parse_weights(weights)
    payload = {"g": g, "a": list(a), "d": d, "r": r}

    def compute():
        inp = DRInput(g, len(a), a, d)
        return {
            "meta": {**_dr_meta(inp, include_samples=False), "r": r},
            "element": element_to_json(dr_eval(inp, r)),
        }

    _emit(ctx, run_cached(ctx, "dr.eval", payload, compute))


@dr.command("cycle")
@click.option("--g", required=True, type=int)
@click.option("--a", "weights", required=True)
@click.pass_context
@domain_errors
def dr_cycle_cmd(ctx, g, weights):
    a = _parse_weights(weights)
    payload = {"g": g, "a": list(a)}

    def compute():
        inp = DRInput(g, len(a), a, g)
        return {
            "meta": _dr_meta(inp),
            "element": element_to_json(dr_cycle(g, a, jobs=ctx.obj["jobs"])),
        }

    _emit(ctx, run_cached(ctx, "dr.cycle", payload, compute))


@dr.command("relation")
@click.option("--g", required=True, type=int)
@click.option("--a", "weights", required=True)
@click.option("--d", required=True, type=int)
@click.pass_context
@domain_errors
def dr_relation_cmd(ctx, g, weights, d):
    a = _parse_weights(weights)
    payload = {"g": g, "a": list(a), "d": d}

    def compute():
        inp = DRInput(g, len(a), a, d)
        return {
            "meta": _dr_meta(inp),
            "element": element_to_json(dr_relation(g, a, d, jobs=ctx.obj["jobs"])),
        }

    _emit(ctx, run_cached(ctx, "dr.relation", payload, compute))


@dr.command("twisted")
@click.option("--g", required=True, type=int)
@click.option("--a", "weights", required=True)
@click.option("--d", required=True, type=int)
@click.option("--r", required=True, type=int)
@click.option("--k", required=True, type=int)
@click.pass_context
@domain_errors
def dr_twisted_cmd(ctx, g, weights, d, r, k):
    a = _parse_weights(weights)
    payload = {"g": g, "a": list(a), "d": d, "r": r, "k": k}

    def compute():
        inp = DRInput(g, len(a), a, d, k=k)
        return {
            "meta": {**_dr_meta(inp, include_samples=False), "r": r},
            "element": element_to_json(twisted_dr_eval(inp, r)),
        }

    _emit(ctx, run_cached(ctx, "dr.twisted", payload, compute))


if __name__ == "__main__":
    main()
