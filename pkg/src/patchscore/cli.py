"""Command-line front door.

Commands:
  score       per-signal controllability report for each option in a file
  compare     options side by side with aggregates and CWE verdicts
  cwe         CWE patchability verdicts per option
  suggest     propose patch configs within a bit budget
  dump-graph  emit the elaborated dataflow model as JSON

Exit status: 0 success, 1 usage error, 2 parse/elaboration error,
3 configuration error. Diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .elaborate import DataflowModel, elaborate, model_to_json
from .errors import (ConfigError, ElabError, LexError, LimitError, ParseError,
                     PatchScoreError)
from .evaluate import (CweRequirement, align_table, compare_options,
                       evaluate_option, exact_decimal, load_cwe_requirements,
                       load_patch_configs, option_report_csv, option_report_json,
                       option_report_text, rational_json, round_display,
                       suggest_options)
from .parser import parse_source
from .scoring import PatchConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FRONTEND = 2
EXIT_CONFIG = 3


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="patchscore",
                             description="Theoretical patchability scoring for RTL")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, options_required=True):
        p.add_argument("--design", required=True, help="RTL source file (.v/.sv)")
        p.add_argument("--top", help="module name (defaults to the file's module)")
        if options_required is not None:
            p.add_argument("--options", required=options_required,
                           help="JSON file with patch options")
            p.add_argument("--cwe", help="JSON file with CWE requirements")
        p.add_argument("--format", choices=("text", "csv", "json"), default="text")
        p.add_argument("--out", help="write the report to this file")

    p_score = sub.add_parser("score", help="score each option in the options file")
    add_common(p_score)
    p_score.add_argument("--figures", help="directory for rendered figures")

    p_compare = sub.add_parser("compare", help="compare options side by side")
    add_common(p_compare)
    p_compare.add_argument("--figures", help="directory for rendered figures")

    p_cwe = sub.add_parser("cwe", help="CWE patchability verdicts per option")
    add_common(p_cwe)

    p_suggest = sub.add_parser("suggest", help="suggest options within a budget")
    add_common(p_suggest, options_required=None)
    p_suggest.add_argument("--cwe", help="JSON file with CWE requirements")
    p_suggest.add_argument("--budget", type=int, required=True,
                           help="investment budget in bits")
    p_suggest.add_argument("--strategy", choices=("greedy", "exhaustive"),
                           default="greedy")
    p_suggest.add_argument("--candidates",
                           help="comma-separated candidate signals "
                                "(default: every scored signal)")

    p_dump = sub.add_parser("dump-graph", help="emit the dataflow model as JSON")
    add_common(p_dump, options_required=None)

    return parser


def _load_design(args) -> DataflowModel:
    path = Path(args.design)
    if not path.exists():
        raise _UsageError(f"design file not found: {path}")
    if path.suffix not in (".v", ".sv"):
        print(f"warning: {path} does not have a .v/.sv extension", file=sys.stderr)
    module = parse_source(path.read_text(encoding="utf-8"))
    if args.top is not None and module.name != args.top:
        raise ElabError(f"top module {args.top!r} not found "
                        f"(file declares {module.name!r})")
    model = elaborate(module)
    for note in model.diagnostics:
        print(note, file=sys.stderr)
    return model


def _load_options(args) -> tuple[PatchConfig, ...]:
    if not Path(args.options).exists():
        raise _UsageError(f"options file not found: {args.options}")
    return load_patch_configs(args.options)


def _load_cwes(args) -> tuple[CweRequirement, ...]:
    if getattr(args, "cwe", None) is None:
        return ()
    if not Path(args.cwe).exists():
        raise _UsageError(f"CWE file not found: {args.cwe}")
    return load_cwe_requirements(args.cwe)


def _emit(text: str, args) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _cmd_score(args) -> int:
    model = _load_design(args)
    configs = _load_options(args)
    cwes = _load_cwes(args)
    reports = [evaluate_option(model, c, cwes) for c in configs]
    if args.format == "json":
        text = _json_dumps({"options": [
            _report_json_with_config(rep, cfg) for rep, cfg in zip(reports, configs)
        ]})
    elif args.format == "csv":
        text = "".join(option_report_csv(rep) for rep in reports)
    else:
        text = "\n".join(option_report_text(rep) for rep in reports)
    _emit(text, args)
    if getattr(args, "figures", None):
        from . import plots
        for rep in reports:
            plots.save_option_figure(rep, args.figures)
    return EXIT_OK


def _report_json_with_config(rep, config) -> dict:
    data = option_report_json(rep)
    data["patched"] = list(config.patched)
    data["observed"] = list(config.observed)
    return data


def _cmd_compare(args) -> int:
    model = _load_design(args)
    configs = _load_options(args)
    cwes = _load_cwes(args)
    table = compare_options(model, configs, cwes)
    if args.format == "json":
        text = _json_dumps(table.to_json_dict())
    elif args.format == "csv":
        text = table.to_csv()
    else:
        text = table.to_text() + "\n"
    _emit(text, args)
    if getattr(args, "figures", None):
        from . import plots
        plots.save_comparison_figures(table, args.figures)
    return EXIT_OK


def _cmd_cwe(args) -> int:
    if getattr(args, "cwe", None) is None:
        raise _UsageError("the cwe command requires --cwe")
    model = _load_design(args)
    configs = _load_options(args)
    cwes = _load_cwes(args)
    reports = [evaluate_option(model, c, cwes) for c in configs]
    if args.format == "json":
        text = _json_dumps({"options": [
            {"name": rep.option, "patchable_cwes": list(rep.patchable_cwes)}
            for rep in reports
        ]})
    elif args.format == "csv":
        lines = ["option," + ",".join(c.id for c in cwes)]
        for rep in reports:
            cells = [rep.option]
            cells.extend("yes" if c.id in rep.patchable_cwes else "no"
                         for c in cwes)
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    else:
        table = [["option"] + [c.id for c in cwes]]
        for rep in reports:
            table.append([rep.option]
                         + ["yes" if c.id in rep.patchable_cwes else "no"
                            for c in cwes])
        text = align_table(table) + "\n"
    _emit(text, args)
    return EXIT_OK


def _cmd_suggest(args) -> int:
    model = _load_design(args)
    cwes = _load_cwes(args)
    if args.candidates:
        candidates = [name.strip() for name in args.candidates.split(",")
                      if name.strip()]
    else:
        candidates = [s.name for s in model.scored()]
    suggestions = suggest_options(model, candidates, args.budget,
                                  args.strategy, cwes)
    shown = suggestions if args.strategy == "greedy" else suggestions[:10]
    reports = [evaluate_option(model, c, cwes) for c in shown]
    if args.format == "json":
        text = _json_dumps({"suggestions": [
            {"name": cfg.name,
             "patched": list(cfg.patched),
             "investment": rational_json(rep.investment),
             "normalized": rational_json(rep.normalized),
             "patchable_cwes": list(rep.patchable_cwes)}
            for cfg, rep in zip(shown, reports)
        ]})
    elif args.format == "csv":
        lines = ["name,investment,normalized,patched"]
        for cfg, rep in zip(shown, reports):
            lines.append(",".join([cfg.name, exact_decimal(rep.investment),
                                   exact_decimal(rep.normalized),
                                   ";".join(cfg.patched)]))
        text = "\n".join(lines) + "\n"
    else:
        table = [["name", "investment", "normalized", "patched"]]
        for cfg, rep in zip(shown, reports):
            table.append([cfg.name, round_display(rep.investment),
                          round_display(rep.normalized), ", ".join(cfg.patched)])
        text = align_table(table) + "\n"
    _emit(text, args)
    return EXIT_OK


def _cmd_dump_graph(args) -> int:
    model = _load_design(args)
    _emit(_json_dumps(model_to_json(model)), args)
    return EXIT_OK


_COMMANDS = {
    "score": _cmd_score,
    "compare": _cmd_compare,
    "cwe": _cmd_cwe,
    "suggest": _cmd_suggest,
    "dump-graph": _cmd_dump_graph,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LexError, ParseError, ElabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FRONTEND
    except (ConfigError, LimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PatchScoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
