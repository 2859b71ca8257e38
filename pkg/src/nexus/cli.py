"""Command-line interface.

Every command reads a base from plain-text files, runs one library
operation, and prints a canonical rendering, so repeated runs over the
same inputs are byte-identical.  Exit codes follow the error taxonomy:
0 success, 2 unreadable input (parse errors, missing files), 3 invalid
request (semantic errors), 4 resource caps.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import __version__
from .charact import build_can, build_core
from .errors import CapacityError, NexusError, ParseError, SemanticError
from .expansion import (
    build_expansion_graph,
    compare,
    ess,
    export_dot,
    graph_to_json,
    in_ess,
    write_report,
)
from .formula import render_formula
from .fixtures import FIXTURES, make_prime_cycles, make_random, make_themepark
from .kb import (
    SelectiveKB,
    make_selector,
    parse_kb,
    parse_summaries,
    parse_unit,
    tuple_sort_key,
)
from .service import DEFAULT_PORT


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ParseError as err:
            _fail(str(err), 2)
        except FileNotFoundError as err:
            _fail(f"cannot read {err.filename}", 2)
        except CapacityError as err:
            _fail(str(err), 4)
        except SemanticError as err:
            _fail(str(err), 3)
        except NexusError as err:  # invariant breakage and anything else
            _fail(str(err), 1)

    return wrapper


def _load_skb(facts: str, rules: str | None, selector: str) -> SelectiveKB:
    text = Path(facts).read_text()
    if rules is not None:
        text = f"{text}\n{Path(rules).read_text()}"
    kb = parse_kb(text)
    if selector.startswith("table:"):
        table = parse_summaries(Path(selector[len("table:"):]).read_text())
        chosen = make_selector("table", table=table)
    else:
        chosen = make_selector(selector)
    return SelectiveKB(kb, chosen)


def _base_options(fn):
    fn = click.option(
        "--facts",
        required=True,
        type=click.Path(exists=True, dir_okay=False),
        help="File of ground facts, one per line.",
    )(fn)
    fn = click.option(
        "--rules",
        default=None,
        type=click.Path(exists=True, dir_okay=False),
        help="Optional file of rules.",
    )(fn)
    fn = click.option(
        "--selector",
        default="neighborhood",
        show_default=True,
        help="neighborhood, full, or table:FILE.",
    )(fn)
    return fn


def _unit_option(fn):
    return click.option(
        "--unit",
        required=True,
        help="Tuples as comma-joined constants, ';'-separated: 'a,b;c,d'.",
    )(fn)


@click.group()
@click.version_option(__version__, prog_name="nexus")
def main():
    """Characterize and expand entity tuples over a relational base."""


@main.command()
@_base_options
@_unit_option
@_guarded
def can(facts, rules, selector, unit):
    """Print the canonical characterization of a unit."""
    skb = _load_skb(facts, rules, selector)
    click.echo(render_formula(build_can(parse_unit(unit), skb)))


@main.command()
@_base_options
@_unit_option
@_guarded
def core(facts, rules, selector, unit):
    """Print the minimized characterization of a unit."""
    skb = _load_skb(facts, rules, selector)
    click.echo(render_formula(build_core(parse_unit(unit), skb)))


@main.command(name="ess")
@_base_options
@_unit_option
@click.option("--tuple", "tuple_text", default=None,
              help="Check membership of one tuple instead of listing all.")
@_guarded
def ess_cmd(facts, rules, selector, unit, tuple_text):
    """List the essential expansion, or test one tuple's membership."""
    skb = _load_skb(facts, rules, selector)
    parsed_unit = parse_unit(unit)
    if tuple_text is not None:
        candidate = parse_unit(tuple_text)
        if len(candidate) != 1:
            raise SemanticError("--tuple expects exactly one tuple")
        (tup,) = candidate.sorted_tuples
        click.echo("true" if in_ess(tup, parsed_unit, skb) else "false")
        return
    for tup in sorted(ess(parsed_unit, skb), key=tuple_sort_key):
        click.echo(",".join(t.name for t in tup))


@main.command(name="compare")
@_base_options
@_unit_option
@click.option("--tau", required=True, help="First tuple (comma-joined).")
@click.option("--tau-prime", required=True, help="Second tuple (comma-joined).")
@_guarded
def compare_cmd(facts, rules, selector, unit, tau, tau_prime):
    """Order two candidate tuples relative to the unit."""
    skb = _load_skb(facts, rules, selector)
    parsed_unit = parse_unit(unit)

    def one(text):
        u = parse_unit(text)
        if len(u) != 1:
            raise SemanticError("expected exactly one tuple")
        return u.sorted_tuples[0]

    result = compare(one(tau), one(tau_prime), parsed_unit, skb)
    click.echo(result.relation.value)


@main.command(name="graph")
@_base_options
@_unit_option
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="Write the JSON document here instead of stdout.")
@click.option("--dot", "dot_path", default=None, type=click.Path(dir_okay=False),
              help="Also write a Graphviz rendering.")
@click.option("--tuple-cap", default=None, type=int,
              help="Candidate-tuple budget for the build.")
@click.option("--partial", is_flag=True,
              help="Truncate instead of failing when over the cap.")
@_guarded
def graph_cmd(facts, rules, selector, unit, out, dot_path, tuple_cap, partial):
    """Build the expansion graph of a unit."""
    skb = _load_skb(facts, rules, selector)
    graph = build_expansion_graph(
        parse_unit(unit), skb, tuple_cap=tuple_cap, partial=partial
    )
    text = graph_to_json(graph)
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)
    if dot_path is not None:
        Path(dot_path).write_text(export_dot(graph))


@main.command(name="report")
@_base_options
@_unit_option
@click.option("--out-dir", required=True, type=click.Path(file_okay=False),
              help="Directory for the report files.")
@click.option("--tuple-cap", default=None, type=int)
@click.option("--partial", is_flag=True)
@_guarded
def report_cmd(facts, rules, selector, unit, out_dir, tuple_cap, partial):
    """Write the graph as TSV tables, JSON, DOT and a PNG figure."""
    skb = _load_skb(facts, rules, selector)
    graph = build_expansion_graph(
        parse_unit(unit), skb, tuple_cap=tuple_cap, partial=partial
    )
    paths = write_report(graph, out_dir)
    for key in ("nodes", "arcs", "json", "dot", "figure"):
        click.echo(str(paths[key]))


@main.command(name="fixture")
@click.argument("name", type=click.Choice(sorted(FIXTURES)))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("-m", "factors", default=2, show_default=True,
              help="Cycle count for prime-cycles.")
@click.option("--seed", default=0, show_default=True,
              help="Seed for the random family.")
@click.option("--selector", default="neighborhood", show_default=True,
              help="Selector for families that allow a choice.")
@_guarded
def fixture_cmd(name, out_dir, factors, seed, selector):
    """Write a bundled example base to files."""
    if name == "themepark":
        fixture = make_themepark(selector=selector)
    elif name == "prime-cycles":
        fixture = make_prime_cycles(factors)
    else:
        fixture = make_random(seed, selector=selector)
    paths = fixture.write_files(out_dir)
    for key in sorted(paths):
        click.echo(str(paths[key]))


@main.command(name="serve")
@click.option("--port", default=None, type=int,
              help=f"Port to bind on 127.0.0.1 (default {DEFAULT_PORT}).")
@_guarded
def serve_cmd(port):
    """Run the HTTP service on the loopback interface."""
    from .service import serve

    serve(port=port)
