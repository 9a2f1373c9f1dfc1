"""Command-line interface.

Three subcommands operate on a network file (or a named builtin):

* ``rank`` computes a centrality measure and emits scores and ranking;
* ``convergence`` tabulates the Krylov approximation error against the
  exact values as the subspace dimension grows (plot-ready CSV);
* ``info`` summarizes a network.

Reports are written as CSV or JSON with a documented schema.  Failures map
to stable exit codes: 2 parse errors, 3 domain/parameter errors, 4
convergence failures, 5 dense-size-cap refusals.  The environment variable
``MULTICENT_THREADS`` caps the numeric thread pools for reproducible
parallel behavior.
"""

from __future__ import annotations

import contextlib
import json
import os
import sys

import click

from . import __version__
from .centrality import (
    MeasureKind,
    convergence_curve,
    katz_centrality,
    pair_communicability,
    stabilized_steps,
    subgraph_centralities,
    total_communicability_per_node,
    total_network_communicability,
)
from .errors import (
    ConditioningError,
    ConvergenceError,
    DomainError,
    MulticentError,
    NumericError,
    ParseError,
    SizeCapError,
)
from .ingest import get_builtin, parse_edge_list
from .matfun import FunctionSpec, estimate_lambda_max
from .tensor import TensorIndex

EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_CONVERGENCE = 4
EXIT_SIZE_CAP = 5

_EXIT_CODES = (
    (ParseError, EXIT_PARSE),
    (SizeCapError, EXIT_SIZE_CAP),
    (ConvergenceError, EXIT_CONVERGENCE),
    (DomainError, EXIT_DOMAIN),
    (ConditioningError, EXIT_DOMAIN),
    (NumericError, EXIT_DOMAIN),
)


def _exit_code(error: MulticentError) -> int:
    for klass, code in _EXIT_CODES:
        if isinstance(error, klass):
            return code
    return EXIT_DOMAIN


@contextlib.contextmanager
def _thread_limit():
    """Apply MULTICENT_THREADS to the BLAS/OpenMP pools when set."""
    raw = os.environ.get("MULTICENT_THREADS")
    if not raw:
        yield
        return
    try:
        limit = int(raw)
        if limit < 1:
            raise ValueError
    except ValueError:
        raise DomainError(f"MULTICENT_THREADS must be a positive integer, got {raw!r}") from None
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # best effort: sequential kernels are unaffected
        yield
        return
    with threadpool_limits(limits=limit):
        yield


def _guarded(func):
    """Run a command body, mapping library errors to exit codes."""
    try:
        with _thread_limit():
            return func()
    except MulticentError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(_exit_code(exc))


def _load_network(input_path, builtin, strict):
    if (input_path is None) == (builtin is None):
        raise DomainError("provide exactly one input source: --input or --builtin")
    if builtin is not None:
        return get_builtin(builtin), f"builtin:{builtin}"
    return parse_edge_list(input_path, strict=strict), str(input_path)


def _parse_alpha(text):
    """Parse '--alpha' values: a float, or '<c>rel' meaning c / |lambda_max|."""
    if text is None:
        return None, True  # default: 0.5 relative
    text = text.strip()
    relative = text.endswith("rel")
    if relative:
        text = text[:-3]
    try:
        value = float(text)
    except ValueError:
        raise DomainError(
            f"cannot parse alpha {text!r}; use a number or '<c>rel'"
        ) from None
    if value <= 0:
        raise DomainError("alpha must be positive")
    return value, relative


def _parse_pair(text, what):
    try:
        node_str, layer_str = text.split(":")
        return TensorIndex(int(node_str), int(layer_str))
    except (ValueError, AttributeError):
        raise DomainError(
            f"cannot parse {what} {text!r}; expected '<node>:<layer>'"
        ) from None


def _parse_nodes(text):
    if text is None:
        return None
    return [_parse_pair(part, "node") for part in text.split(",") if part]


def _write_output(text, out):
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)


def _format_float(value, precision):
    return f"{value:.{precision}f}"


def _report_csv(report, precision, top, krylov_report=None):
    lines = []
    if krylov_report is None:
        lines.append("rank,node,layer,score")
        for pos, idx in enumerate(report.ranking[:top], start=1):
            lines.append(
                f"{pos},{idx.node},{idx.layer},"
                f"{_format_float(report.scores[idx], precision)}"
            )
    else:
        lines.append("rank,node,layer,score_exact,score_krylov,abs_diff")
        for pos, idx in enumerate(report.ranking[:top], start=1):
            exact = report.scores[idx]
            approx = krylov_report.scores[idx]
            lines.append(
                f"{pos},{idx.node},{idx.layer},"
                f"{_format_float(exact, precision)},"
                f"{_format_float(approx, precision)},"
                f"{_format_float(abs(exact - approx), precision)}"
            )
    return "\n".join(lines) + "\n"


def _report_json(report, config, precision, krylov_report=None):
    payload = {"config": config}
    payload.update(report.to_dict(precision))
    if krylov_report is not None:
        approx_scores = {idx: krylov_report.scores[idx] for idx in report.scores}
        for entry in payload["scores"]:
            idx = TensorIndex(entry["node"], entry["layer"])
            entry["score_krylov"] = round(approx_scores[idx], precision)
        discrepancy = max(
            abs(report.scores[idx] - approx_scores[idx]) for idx in report.scores
        )
        payload.setdefault("diagnostics", {})["discrepancy_inf"] = discrepancy
        krylov_info = krylov_report.to_dict(precision)
        payload["diagnostics"]["krylov"] = {
            **krylov_info["parameters"],
            **krylov_info.get("diagnostics", {}),
        }
    return json.dumps(payload, indent=2) + "\n"


def _scalar_output(kind, values, config, fmt, precision):
    if fmt == "json":
        rounded = {
            k: round(v, precision) if isinstance(v, float) else v
            for k, v in values.items()
        }
        payload = {"config": config, "kind": kind, **rounded}
        return json.dumps(payload, indent=2) + "\n"
    header = ",".join(values)
    row = ",".join(
        _format_float(v, precision) if isinstance(v, float) else str(v)
        for v in values.values()
    )
    return f"{header}\n{row}\n"


@click.group()
@click.version_option(version=__version__, prog_name="multicent")
def main():
    """Multilayer-network centrality: exact tensor functions and Krylov approximations."""


_input_options = [
    click.option("--input", "input_path", type=click.Path(), default=None,
                 help="Edge-list network file."),
    click.option("--builtin", type=str, default=None,
                 help="Name of a builtin network (e.g. example1)."),
    click.option("--strict", is_flag=True, default=False,
                 help="Strict parsing: reject duplicate edges and stray weight columns."),
]


def _add_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func
    return wrap


@main.command()
@_add_options(_input_options)
@click.option("--measure", type=click.Choice([k.value for k in MeasureKind]),
              default="mtc", show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True,
              help="Exponential scaling.")
@click.option("--alpha", type=str, default=None,
              help="Resolvent damping: a number, or '<c>rel' for c/|lambda_max| "
                   "[default: 0.5rel].")
@click.option("-m", "--steps", "m", type=int, default=10, show_default=True,
              help="Krylov subspace dimension.")
@click.option("-R", "--block-size", type=int, default=10, show_default=True,
              help="Block width for batched subgraph centralities.")
@click.option("--mode", type=click.Choice(["exact", "krylov", "both"]),
              default="exact", show_default=True)
@click.option("--augment/--no-augment", default=True, show_default=True,
              help="Append a dense slice to block starts to avoid breakdown.")
@click.option("--shift", type=click.Choice(["plain", "modified"]), default="plain",
              show_default=True, help="Identity-shift convention of the matrix function.")
@click.option("--nodes", type=str, default=None,
              help="Pairs for subgraph measures, e.g. '2:2,4:1' (default: all).")
@click.option("--source", type=str, default=None, help="Pair '<node>:<layer>' (pair measure).")
@click.option("--target", type=str, default=None, help="Pair '<node>:<layer>' (pair measure).")
@click.option("--top", type=int, default=10, show_default=True,
              help="Rows emitted in CSV output.")
@click.option("--stabilize", is_flag=True, default=False,
              help="Pick the Krylov dimension by top-k ranking stabilization "
                   "(heuristic; mtc/mkc only).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--precision", type=int, default=4, show_default=True)
@click.option("--size-cap", type=int, default=5000, show_default=True,
              help="Largest flattened dimension for exact evaluation.")
@click.option("--out", type=click.Path(), default=None, help="Output file (default stdout).")
def rank(input_path, builtin, strict, measure, beta, alpha, m, block_size, mode,
         augment, shift, nodes, source, target, top, stabilize, fmt, precision,
         size_cap, out):
    """Compute a centrality measure and emit scores and ranking."""

    def body():
        tensor, source_name = _load_network(input_path, builtin, strict)
        if tensor.nnz == 0:
            raise DomainError("zero tensor")
        kind = MeasureKind(measure)
        alpha_value, alpha_relative = _parse_alpha(alpha)
        lambda_max = None
        alpha_abs = None
        if kind in (MeasureKind.KATZ, MeasureKind.SUBGRAPH_RESOLVENT):
            if alpha_value is None:
                alpha_value = 0.5
            if alpha_relative:
                lambda_max = estimate_lambda_max(tensor).lambda_max
                alpha_abs = alpha_value / abs(lambda_max)
            else:
                alpha_abs = alpha_value

        config = {
            "input": source_name,
            "measure": kind.value,
            "mode": mode,
            "shift": shift,
            "precision": precision,
            "top": top,
        }
        if kind in (MeasureKind.TOTAL_COMMUNICABILITY, MeasureKind.NETWORK_COMMUNICABILITY,
                    MeasureKind.SUBGRAPH_EXP, MeasureKind.PAIR):
            config["beta"] = beta
        if alpha_abs is not None:
            config["alpha"] = alpha_abs
            if alpha_relative:
                config["alpha_spec"] = f"{alpha_value}rel"
        if mode in ("krylov", "both"):
            config["m"] = m

        m_used = m
        stabilized_note = None
        if stabilize:
            if kind not in (MeasureKind.TOTAL_COMMUNICABILITY, MeasureKind.KATZ):
                raise DomainError("--stabilize supports the mtc and mkc measures")
            if mode == "exact":
                raise DomainError("--stabilize requires a Krylov mode")
            m_used, _ = stabilized_steps(
                tensor, measure=kind.value, beta=beta, alpha=alpha_abs,
                top_k=top, m_max=max(m, top + 2), shift=shift,
            )
            config["m"] = m_used
            stabilized_note = (
                "m chosen by top-k ranking stabilization (heuristic convenience)"
            )

        def compute(run_mode):
            if kind is MeasureKind.TOTAL_COMMUNICABILITY:
                return total_communicability_per_node(
                    tensor, beta=beta, mode=run_mode, m=m_used, shift=shift,
                    size_cap=size_cap,
                )
            if kind is MeasureKind.KATZ:
                return katz_centrality(
                    tensor, alpha=alpha_abs, mode=run_mode, m=m_used, shift=shift,
                    lambda_max=lambda_max, size_cap=size_cap,
                )
            if kind in (MeasureKind.SUBGRAPH_EXP, MeasureKind.SUBGRAPH_RESOLVENT):
                if kind is MeasureKind.SUBGRAPH_EXP:
                    spec = FunctionSpec.exp(beta) if shift == "plain" else FunctionSpec.exp0(beta)
                else:
                    spec = (FunctionSpec.resolvent(alpha_abs) if shift == "plain"
                            else FunctionSpec.resolvent0(alpha_abs))
                return subgraph_centralities(
                    tensor, nodes=_parse_nodes(nodes), spec=spec, mode=run_mode,
                    block_size=block_size, m=m_used, augment=augment,
                    size_cap=size_cap,
                )
            raise DomainError(f"measure {kind.value} is not a ranking measure here")

        # scalar measures first
        if kind is MeasureKind.NETWORK_COMMUNICABILITY:
            values = {}
            if mode in ("exact", "both"):
                values["value_exact"] = total_network_communicability(
                    tensor, beta=beta, mode="exact", shift=shift, size_cap=size_cap)
            if mode in ("krylov", "both"):
                values["value_krylov"] = total_network_communicability(
                    tensor, beta=beta, mode="krylov", m=m_used, shift=shift)
            if mode == "exact":
                values = {"value": values["value_exact"]}
            elif mode == "krylov":
                values = {"value": values["value_krylov"]}
            _write_output(_scalar_output(kind.value, values, config, fmt, precision), out)
            return
        if kind is MeasureKind.PAIR:
            if source is None or target is None:
                raise DomainError("pair measure requires --source and --target")
            src = _parse_pair(source, "source")
            dst = _parse_pair(target, "target")
            config["source"] = f"{src.node}:{src.layer}"
            config["target"] = f"{dst.node}:{dst.layer}"
            spec = FunctionSpec.exp(beta) if shift == "plain" else FunctionSpec.exp0(beta)
            values = {}
            if mode in ("exact", "both"):
                values["value_exact"] = pair_communicability(
                    tensor, src, dst, spec=spec, mode="exact", size_cap=size_cap)
            if mode in ("krylov", "both"):
                values["value_krylov"] = pair_communicability(
                    tensor, src, dst, spec=spec, mode="krylov", m=m_used)
            if mode in ("exact", "krylov"):
                values = {"value": values.popitem()[1]}
            _write_output(_scalar_output(kind.value, values, config, fmt, precision), out)
            return

        if mode == "both":
            exact_report = compute("exact")
            krylov_report = compute("krylov")
            if stabilized_note:
                exact_report.diagnostics["stabilization"] = stabilized_note
            discrepancy = max(
                abs(exact_report.scores[idx] - krylov_report.scores[idx])
                for idx in exact_report.scores
            )
            click.echo(f"infinity-norm discrepancy: {discrepancy:.3e}", err=True)
            if fmt == "csv":
                text = _report_csv(exact_report, precision, top, krylov_report)
            else:
                text = _report_json(exact_report, config, precision, krylov_report)
        else:
            report = compute(mode)
            if stabilized_note:
                report.diagnostics["stabilization"] = stabilized_note
            if fmt == "csv":
                text = _report_csv(report, precision, top)
            else:
                text = _report_json(report, config, precision)
        _write_output(text, out)

    _guarded(body)


@main.command()
@_add_options(_input_options)
@click.option("--measure", type=click.Choice(["mtc", "mkc"]), default="mtc",
              show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--alpha", type=str, default=None,
              help="Resolvent damping: number or '<c>rel' [default: 0.5rel].")
@click.option("--m-max", type=int, default=10, show_default=True)
@click.option("--shift", type=click.Choice(["plain", "modified"]), default="plain",
              show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--size-cap", type=int, default=5000, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def convergence(input_path, builtin, strict, measure, beta, alpha, m_max, shift,
                fmt, size_cap, out):
    """Tabulate the Krylov error against exact values for m = 1..m_max.

    Requires the exact evaluation to be feasible (within the size cap); for
    larger networks use `rank --stabilize` instead.
    """

    def body():
        tensor, source_name = _load_network(input_path, builtin, strict)
        if tensor.nnz == 0:
            raise DomainError("zero tensor")
        alpha_value, alpha_relative = _parse_alpha(alpha)
        alpha_abs = None
        if measure == "mkc":
            if alpha_value is None:
                alpha_value = 0.5
            if alpha_relative:
                alpha_abs = alpha_value / abs(estimate_lambda_max(tensor).lambda_max)
            else:
                alpha_abs = alpha_value
        try:
            rows = convergence_curve(
                tensor, measure=measure, beta=beta, alpha=alpha_abs,
                m_max=m_max, shift=shift, size_cap=size_cap,
            )
        except SizeCapError as exc:
            raise SizeCapError(
                f"{exc} (for large networks, consider `rank --mode krylov --stabilize`)"
            ) from None
        config = {
            "input": source_name, "measure": measure, "shift": shift, "m_max": m_max,
        }
        config["beta" if measure == "mtc" else "alpha"] = (
            beta if measure == "mtc" else alpha_abs
        )
        if fmt == "json":
            payload = {
                "config": config,
                "errors": [{"m": m, "error": err} for m, err in rows],
            }
            text = json.dumps(payload, indent=2) + "\n"
        else:
            lines = ["m,error"] + [f"{m},{err:.12e}" for m, err in rows]
            text = "\n".join(lines) + "\n"
        _write_output(text, out)

    _guarded(body)


@main.command()
@_add_options(_input_options)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text",
              show_default=True)
def info(input_path, builtin, strict, fmt):
    """Summarize a network: dimensions, edges, symmetry, dominant eigenvalue."""

    def body():
        tensor, source_name = _load_network(input_path, builtin, strict)
        entries = tensor.nnz
        summary = {
            "input": source_name,
            "n_nodes": tensor.n_nodes,
            "n_layers": tensor.n_layers,
            "entries": entries,
            "symmetric": tensor.is_symmetric,
            "density": entries / tensor.dim**2,
        }
        if tensor.is_symmetric:
            diagonal = int((tensor.mat.diagonal() != 0).sum())
            summary["undirected_edges"] = (entries - diagonal) // 2 + diagonal
        try:
            estimate = estimate_lambda_max(tensor)
            summary["lambda_max"] = estimate.lambda_max
            summary["lambda_max_residual"] = estimate.residual
        except MulticentError as exc:
            summary["lambda_max"] = None
            summary["lambda_max_note"] = str(exc)
        if fmt == "json":
            _write_output(json.dumps(summary, indent=2) + "\n", None)
        else:
            for key, value in summary.items():
                if isinstance(value, float):
                    value = f"{value:.6g}"
                click.echo(f"{key}: {value}")

    _guarded(body)


if __name__ == "__main__":
    main()
