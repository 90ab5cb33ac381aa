"""The ``wquiv`` command line.

Every subcommand is a thin wrapper over one library call sequence; results
are canonical quiver JSON or a machine-readable report with a
``schema_version`` field.  Logs go to stderr so stdout stays parseable.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import analysis, io, kernel, tame
from .equivalence import are_equivalent
from .groups import GroupError, format_element, kind_from_json, parse_element
from .mutation import MutationError, mutate_sequence
from .quiver import QuiverError


def _echo_json(data) -> None:
    click.echo(json.dumps(data, indent=2))


def _fail(message: str) -> None:
    raise click.ClickException(message)


def _load(path):
    try:
        return io.load_quiver(path)
    except (io.FormatError, OSError) as err:
        _fail(f"{path}: {err}")


def _walk_cycle_json(cycle):
    return {"base": cycle.base, "steps": [[aid, fwd] for aid, fwd in cycle.steps]}


@click.group()
def main():
    """Mutation of quivers weighted in a group."""


@main.command()
@click.argument("file", type=click.Path(exists=True))
@click.option("--at", required=True, help="comma-separated vertex ids, applied left to right")
@click.option("--lenient", is_flag=True, help="allow mutation when only other vertices sit on 2-cycles")
def mutate(file, at, lenient):
    """Apply a mutation sequence; prints the resulting quiver (canonical JSON)."""
    q = _load(file)
    try:
        ks = [int(x) for x in at.split(",") if x.strip()]
    except ValueError:
        _fail(f"bad vertex list {at!r}")
    try:
        records = mutate_sequence(q, ks, lenient=lenient)
    except MutationError as err:
        _fail(str(err))
    for record in records:
        log = {"vertex": record.vertex, "cancelled": [list(p) for p in record.cancelled]}
        if lenient:
            log["lenient"] = True
        click.echo(json.dumps(log), err=True)
    final = records[-1].result if records else q
    click.echo(io.canonical_text(final), nl=False)


@main.command("check-nondeg")
@click.argument("file", type=click.Path(exists=True))
@click.option("--depth", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="recorded in the report")
def check_nondeg(file, depth, seed):
    """Search for a mutation sequence producing a nontrivial-weight 2-cycle."""
    q = _load(file)
    try:
        verdict = analysis.check_nondegenerate(q, depth)
    except QuiverError as err:
        _fail(str(err))
    _echo_json(
        {
            "schema_version": 1,
            "depth": verdict.depth,
            "seed": seed,
            "kernel": kernel.BACKEND,
            "outcome": "clean-to-depth" if verdict.clean else "counterexample",
            "states": verdict.states,
            "sequence": list(verdict.sequence) if verdict.sequence else None,
            "witness": list(verdict.witness) if verdict.witness else None,
        }
    )
    if not verdict.clean:
        sys.exit(1)


@main.command()
@click.argument("file", type=click.Path(exists=True))
@click.option("--weight", default=None, help="frame arrow weight (default: identity)")
def frame(file, weight):
    """Attach one frozen source per vertex."""
    q = _load(file)
    frame_weight = None
    if weight is not None:
        try:
            frame_weight = parse_element(q.group, weight)
        except GroupError as err:
            _fail(str(err))
    try:
        framed = analysis.frame(q, frame_weight)
    except QuiverError as err:
        _fail(str(err))
    click.echo(io.canonical_text(framed), nl=False)


@main.command("c-vectors")
@click.argument("file", type=click.Path(exists=True))
def c_vectors_cmd(file):
    """The c-vector matrix of a framed quiver."""
    q = _load(file)
    try:
        matrix = analysis.c_vectors(q)
    except QuiverError as err:
        _fail(str(err))
    coherent, offending = analysis.is_sign_coherent(matrix)
    _echo_json(
        {
            "schema_version": 1,
            "row_ids": list(matrix.row_ids),
            "col_ids": list(matrix.col_ids),
            "rows": matrix.matrix.tolist(),
            "sign_coherent": coherent,
            "offending_row": offending,
        }
    )


@main.command("sign-coherence-experiment")
@click.option("--catalog", required=True,
              help="directory of quiver files, or 'builtin' for the bundled catalog")
@click.option("--max-len", type=int, default=8, show_default=True)
@click.option("--max-vertices", type=int, default=4, show_default=True,
              help="builtin catalog size")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--failures-only", is_flag=True, help="trim passing cases from the report")
def sign_coherence_experiment_cmd(catalog, max_len, max_vertices, jobs, failures_only):
    """Frame every catalog quiver and verify Cor 1.2 / sign coherence along
    all mutation sequences up to the given length."""
    if catalog == "builtin":
        quivers = list(analysis.exhaustive_catalog(max_vertices=max_vertices))
    else:
        directory = Path(catalog)
        if not directory.is_dir():
            _fail(f"{catalog}: not a directory")
        quivers = [_load(p) for p in sorted(directory.glob("*.json"))]
    report = analysis.sign_coherence_experiment(quivers, max_len, jobs=jobs)
    if failures_only:
        report["cases"] = [c for c in report["cases"] if not c["ok"]]
    _echo_json(report)
    if not report["passed"]:
        sys.exit(1)


@main.command()
@click.argument("file_a", type=click.Path(exists=True))
@click.argument("file_b", type=click.Path(exists=True))
@click.option("--bound", type=int, default=64, show_default=True,
              help="free-group conjugacy exponent bound")
def equiv(file_a, file_b, bound):
    """Decide vertex equivalence of two weight systems on the same shape."""
    qa = _load(file_a)
    qb = _load(file_b)
    try:
        result = are_equivalent(qa, qb, conjugacy_bound=bound)
    except QuiverError as err:
        _fail(str(err))
    out = {"schema_version": 1, "status": result.status}
    if result.gauge is not None:
        out["gauge"] = {str(v): format_element(g) for v, g in sorted(result.gauge.items())}
    if result.detail is not None:
        detail = dict(result.detail)
        if "cycle" in detail:
            detail["cycle"] = _walk_cycle_json(detail["cycle"])
        for key in ("weight_a", "weight_b"):
            if key in detail:
                detail[key] = format_element(detail[key])
        out["detail"] = detail
    _echo_json(out)
    if result.status == "not-equivalent":
        sys.exit(1)


@main.command("classify-tame")
@click.argument("file", type=click.Path(exists=True))
def classify_tame_cmd(file):
    """Gauge-trivial, C_n(t) member, or unknown."""
    q = _load(file)
    try:
        verdict = tame.classify_tame(q)
    except QuiverError as err:
        _fail(str(err))
    out = {"schema_version": 1, "kind": verdict.kind}
    if verdict.gauge is not None:
        out["gauge"] = {str(v): format_element(g) for v, g in sorted(verdict.gauge.items())}
    if verdict.membership is not None:
        out["t"] = format_element(verdict.membership.t)
        out["cycle"] = _walk_cycle_json(verdict.membership.cycle)
    _echo_json(out)


@main.command()
@click.argument("file", type=click.Path(exists=True))
def canonicalize(file):
    """Mutate a C_n(t) member to the unoriented n-cycle."""
    q = _load(file)
    try:
        sequence, final = tame.canonicalize_to_cycle(q)
    except QuiverError as err:
        _fail(str(err))
    _echo_json(
        {
            "schema_version": 1,
            "sequence": sequence,
            "quiver": io.quiver_to_json(final),
        }
    )


def _series_json(series):
    return [
        {"cycle": list(word), "coeff": str(coeff)}
        for word, coeff in sorted(series.terms.items())
    ]


@main.command("qp-split")
@click.argument("file", type=click.Path(exists=True))
@click.option("--degree", type=int, default=None, help="truncation degree bound")
def qp_split(file, degree):
    """Split a weighted quiver with potential into trivial and reduced parts."""
    from .potential import PotentialError, split

    try:
        series = io.load_wqp(file, bound=degree)
        result = split(series, bound=degree)
    except (io.FormatError, PotentialError, QuiverError) as err:
        _fail(str(err))
    _echo_json(
        {
            "schema_version": 1,
            "trivial_pairs": [list(p) for p in result.trivial_arrows],
            "reduced_arrows": list(result.reduced_arrows),
            "s_trivial": _series_json(result.s_trivial),
            "s_reduced": _series_json(result.s_reduced),
            "quiver": io.quiver_to_json(result.quiver, include_ids=True),
        }
    )


@main.command("qp-mutate")
@click.argument("file", type=click.Path(exists=True))
@click.option("--at", "vertex", type=int, required=True)
@click.option("--degree", type=int, default=None, help="truncation degree bound")
def qp_mutate_cmd(file, vertex, degree):
    """Mutate a weighted quiver with potential."""
    from .potential import PotentialError, qp_mutate

    try:
        series = io.load_wqp(file, bound=degree)
        result = qp_mutate(series, vertex, bound=degree)
    except (io.FormatError, PotentialError, QuiverError, MutationError) as err:
        _fail(str(err))
    _echo_json(
        {
            "schema_version": 1,
            "quiver": io.quiver_to_json(result.quiver, include_ids=True),
            "potential": _series_json(result.potential),
            "matches_weight_reduction": result.matches_weight_reduction,
        }
    )


@main.command("gen-corpus")
@click.option("--count", type=int, required=True)
@click.option("--n", "size", type=int, default=4, show_default=True)
@click.option("--group", "group_text", default='{"kind": "trivial"}',
              show_default=True, help="group kind as JSON")
@click.option("--policy", type=click.Choice(io.POLICIES), required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def gen_corpus(count, size, group_text, policy, seed, out_dir):
    """Write a deterministic corpus of quiver files."""
    try:
        kind = kind_from_json(json.loads(group_text))
    except (json.JSONDecodeError, GroupError) as err:
        _fail(f"bad --group: {err}")
    try:
        quivers = io.generate_corpus(count, size, kind, policy, seed, out_dir=out_dir)
    except (io.FormatError, QuiverError) as err:
        _fail(str(err))
    _echo_json(
        {
            "schema_version": 1,
            "policy": policy,
            "seed": seed,
            "count": len(quivers),
            "out": str(out_dir),
        }
    )


@main.command()
@click.argument("file", type=click.Path(exists=True))
@click.option("--port", type=int, default=8764, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--lenient", is_flag=True)
@click.option("--ui-dir", type=click.Path(), default=None,
              help="serve a built explorer UI from this directory")
def serve(file, port, host, lenient, ui_dir):
    """Run the interactive session service."""
    from .server import run_server

    q = _load(file)
    run_server(q, host=host, port=port, lenient=lenient, ui_dir=ui_dir)


if __name__ == "__main__":
    main()
