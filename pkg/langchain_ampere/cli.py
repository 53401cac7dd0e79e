"""``ampere`` command line: run one experiment and write its tables, artifacts and figures.

Exit codes: 0 when every check passes, 1 when a check fails or a solver gives
up, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import time
from pathlib import Path
from typing import Any, Optional, Sequence, get_args, get_origin

from pydantic import BaseModel

from langchain_ampere.config import SEED_ENV_VAR, Tolerances, configure_logging
from langchain_ampere.errors import SolverError
from langchain_ampere.numerics.io import write_csv, write_json
from langchain_ampere.numerics.render import render_svg
from langchain_ampere.toolkits.ampere_toolkit import SUBCOMMANDS
from langchain_ampere.tools.base import CheckResult, ExperimentResult, RunReport

logger = logging.getLogger(__name__)

_SKIPPED_FIELDS = {"output_format"}


def _is_list(annotation: Any) -> bool:
    if get_origin(annotation) is list:
        return True
    return any(get_origin(a) is list for a in get_args(annotation))


def _is_dict(annotation: Any) -> bool:
    if get_origin(annotation) is dict:
        return True
    return any(get_origin(a) is dict for a in get_args(annotation))


def _add_schema_flags(parser: argparse.ArgumentParser, schema: type[BaseModel]) -> None:
    """One ``--flag`` per input field; lists are comma separated, dicts are JSON files."""
    for name, info in schema.model_fields.items():
        if name in _SKIPPED_FIELDS:
            continue
        flag = "--" + name.replace("_", "-")
        helptext = info.description or ""
        if _is_dict(info.annotation):
            parser.add_argument(flag, dest=name, type=Path, help=f"JSON file. {helptext}")
        else:
            parser.add_argument(flag, dest=name, help=helptext)


def _parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="ampere",
        description="Run a Monge-Ampère experiment and write CSV, JSON and SVG artifacts.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with input fields, seed, tol.")
    common.add_argument("--out", type=Path, default=Path("ampere-out"), help="Output directory.")
    common.add_argument("--seed", type=int, help=f"Seed; falls back to {SEED_ENV_VAR}.")
    common.add_argument(
        "--tol", action="append", default=[], metavar="NAME=VALUE",
        help="Tolerance override, repeatable.",
    )
    common.add_argument("--svg", action="store_true", help="Also render figures as SVG.")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    for subcommand, tool_cls in SUBCOMMANDS.items():
        schema = tool_cls.model_fields["args_schema"].default
        description = tool_cls.model_fields["description"].default
        child = sub.add_parser(subcommand, parents=[common], help=description)
        _add_schema_flags(child, schema)
    return parser.parse_args(argv)


def _read_config(path: Optional[Path]) -> dict[str, Any]:
    if path is None:
        return {}
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must hold a JSON object.")
    return data


def _collect_params(
    args: argparse.Namespace, schema: type[BaseModel], config: dict[str, Any]
) -> dict[str, Any]:
    """Config values overlaid by command-line flags, validated by the input schema."""
    params = {k: v for k, v in config.items() if k in schema.model_fields}
    for name, info in schema.model_fields.items():
        raw = getattr(args, name, None)
        if name in _SKIPPED_FIELDS or raw is None:
            continue
        if _is_dict(info.annotation):
            params[name] = json.loads(Path(raw).read_text(encoding="utf-8"))
        elif _is_list(info.annotation):
            params[name] = [item.strip() for item in str(raw).split(",") if item.strip()]
        else:
            params[name] = raw
    validated = schema.model_validate(params)
    return validated.model_dump(exclude=_SKIPPED_FIELDS)


def _resolve_seed(args: argparse.Namespace, config: dict[str, Any]) -> int:
    if args.seed is not None:
        seed = int(args.seed)
    elif "seed" in config:
        seed = int(config["seed"])
    else:
        seed = int(os.environ.get(SEED_ENV_VAR, "0"))
    if seed < 0:
        raise ValueError("Seed must be nonnegative.")
    return seed


def _resolve_tolerances(args: argparse.Namespace, config: dict[str, Any]) -> Tolerances:
    tol = Tolerances.from_env()
    from_config = config.get("tolerances", config.get("tol", {}))
    if isinstance(from_config, dict):
        tol = tol.with_overrides(f"{k}={v}" for k, v in from_config.items())
    return tol.with_overrides(args.tol)


def _write_outputs(result: ExperimentResult, out: Path, svg: bool) -> list[str]:
    files: list[Path] = []
    for table in result.tables:
        files.append(write_csv(table, out / f"{table.name}.csv"))
    scalars: dict[str, Any] = {}
    for key, value in sorted(result.artifacts.items()):
        if isinstance(value, (dict, list)):
            files.append(write_json(value, out / f"{key}.json"))
        else:
            scalars[key] = value
    if scalars:
        files.append(write_json(scalars, out / "scalars.json"))
    if svg:
        for key, figure in sorted(result.figures.items()):
            files.append(render_svg(figure, out / f"{key}.svg"))
    return sorted(str(p) for p in files)


def run(
    subcommand: str,
    params: dict[str, Any],
    *,
    out: Path,
    seed: int,
    tolerances: Tolerances,
    svg: bool = False,
) -> RunReport:
    """Run one subcommand and write its outputs and ``report.json`` under ``out``.

    Raises:
        ValueError: On an unknown subcommand or invalid input.
    """
    if subcommand not in SUBCOMMANDS:
        raise ValueError(f"Unknown subcommand '{subcommand}'.")
    tool = SUBCOMMANDS[subcommand](tolerances=tolerances, seed=seed)
    timings: dict[str, float] = {}
    started = time.perf_counter()
    try:
        result = tool.run_experiment(**params)
    except SolverError as exc:
        logger.error("%s: %s", subcommand, exc)
        result = ExperimentResult(
            experiment=subcommand,
            checks=[
                CheckResult(
                    name="solver",
                    status="fail",
                    value=exc.residual,
                    detail=f"{type(exc).__name__}: {exc}",
                )
            ],
        )
    timings["run"] = time.perf_counter() - started
    started = time.perf_counter()
    files = _write_outputs(result, out, svg)
    timings["write"] = time.perf_counter() - started
    report = RunReport(
        subcommand=subcommand,
        seed=seed,
        passed=result.passed,
        checks=result.checks,
        timings=timings,
        files=files + [str(out / "report.json")],
    )
    write_json(report, out / "report.json")
    logger.info("%s: %d checks, passed=%s", subcommand, len(result.checks), result.passed)
    return report


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parse_args(argv)
    try:
        configure_logging()
        config = _read_config(args.config)
        schema = SUBCOMMANDS[args.subcommand].model_fields["args_schema"].default
        params = _collect_params(args, schema, config)
        seed = _resolve_seed(args, config)
        tolerances = _resolve_tolerances(args, config)
        report = run(
            args.subcommand, params, out=args.out, seed=seed, tolerances=tolerances,
            svg=args.svg,
        )
    except (ValueError, OSError) as exc:
        logger.error("%s", exc)
        print(f"ampere {args.subcommand}: error: {exc}")
        return 2
    for check in report.checks:
        value = "" if check.value is None else f" value={check.value:.6g}"
        print(f"{check.status:4} {check.name}{value}")
    print(f"{'PASS' if report.passed else 'FAIL'} {args.subcommand} -> {args.out}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
