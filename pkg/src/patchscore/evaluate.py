"""Decision artifacts on top of the score engine.

Turns score maps into per-option reports: per-signal in/out bits, the
investment (bits directly patched), the output score (sum of resulting
controllability), the normalized score (mean per-signal per-bit
controllability), and CWE patchability verdicts. Reports serialize to
aligned text (one-decimal rounding), CSV, and JSON (exact rationals as
numerator/denominator plus a decimal rendering).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .elaborate import DataflowModel
from .errors import ConfigError, LimitError
from .scoring import PatchConfig, compute_pc, compute_po

EXHAUSTIVE_CANDIDATE_LIMIT = 20


# ---- rational formatting ----

def round_display(value: Fraction, places: int = 1) -> str:
    """Round half-up to ``places`` decimals; integral results drop the point."""
    scale = 10 ** places
    scaled = (value * scale + Fraction(1, 2)).__floor__()
    whole, frac = divmod(scaled, scale)
    if frac == 0:
        return str(whole)
    digits = str(frac).rjust(places, "0").rstrip("0")
    return f"{whole}.{digits}"


def exact_decimal(value: Fraction) -> str:
    """Exact decimal expansion when it terminates, else ``num/den``."""
    den = value.denominator
    while den % 2 == 0:
        den //= 2
    while den % 5 == 0:
        den //= 5
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    return round_display(value, places=_decimal_places(value.denominator))


def _decimal_places(denominator: int) -> int:
    places = 0
    while denominator % 2 == 0:
        denominator //= 2
        places += 1
    fives = 0
    while denominator % 5 == 0:
        denominator //= 5
        fives += 1
    return max(places, fives, 1)


def rational_json(value: Fraction) -> dict:
    return {"num": value.numerator, "den": value.denominator,
            "decimal": round_display(value, 6)}


# ---- CWE requirements ----

@dataclass(frozen=True)
class CweRequirement:
    """A weakness is patchable when every signal of at least one alternative
    set is fully controllable."""

    id: str
    alternatives: tuple[tuple[str, ...], ...]

    def resolve(self, model: DataflowModel) -> "CweRequirement":
        if not self.alternatives:
            raise ConfigError(f"{self.id}: no alternative signal sets")
        resolved = tuple(
            tuple(element for name in alt for element in model.expand_signal(name))
            for alt in self.alternatives
        )
        return CweRequirement(self.id, resolved)

    def is_patchable(self, scores: Mapping[str, Fraction],
                     model: DataflowModel) -> bool:
        return any(
            all(scores[name] == model.width(name) for name in alt)
            for alt in self.alternatives
        )


def load_cwe_requirements(path: str) -> tuple[CweRequirement, ...]:
    """Load CWE requirements from a JSON file:
    [{"id": "CWE-1262", "alternatives": [["en"], ["we"], ["reglk_mem"]]}]."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, list):
        raise ConfigError(f"{path}: expected a list of CWE requirements")
    out = []
    for entry in data:
        if not isinstance(entry, dict) or "id" not in entry \
                or "alternatives" not in entry:
            raise ConfigError(f"{path}: each entry needs 'id' and 'alternatives'")
        alternatives = tuple(tuple(alt) for alt in entry["alternatives"])
        out.append(CweRequirement(str(entry["id"]), alternatives))
    return tuple(out)


def load_patch_configs(path: str) -> tuple[PatchConfig, ...]:
    """Load patch options from a JSON file:
    {"options": [{"name": "V3", "patched": [...], "observed": [...]}]}."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict) or not isinstance(data.get("options"), list):
        raise ConfigError(f"{path}: expected an object with an 'options' list")
    configs = []
    for entry in data["options"]:
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"{path}: each option needs a 'name'")
        configs.append(PatchConfig(str(entry["name"]),
                                   tuple(entry.get("patched", ())),
                                   tuple(entry.get("observed", ()))))
    return tuple(configs)


# ---- option reports ----

@dataclass(frozen=True)
class SignalRow:
    name: str
    width: int
    in_bits: Fraction
    out_bits: Fraction


@dataclass(frozen=True)
class OptionReport:
    option: str
    rows: tuple[SignalRow, ...]
    investment: Fraction
    output_score: Fraction
    normalized: Fraction
    patchable_cwes: tuple[str, ...]
    observability: tuple[tuple[str, Fraction], ...] = ()

    def row(self, name: str) -> SignalRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def evaluate_option(model: DataflowModel, config: PatchConfig,
                    cwes: Sequence[CweRequirement] = ()) -> OptionReport:
    """Score one patching option and derive its aggregates and CWE verdicts."""
    resolved = config.resolve(model)
    scores = compute_pc(model, resolved)
    patched = set(resolved.patched)

    rows = []
    for info in model.scored():
        in_bits = Fraction(info.width) if info.name in patched else Fraction(0)
        rows.append(SignalRow(info.name, info.width, in_bits, scores[info.name]))

    investment = sum((r.in_bits for r in rows), Fraction(0))
    output_score = sum((r.out_bits for r in rows), Fraction(0))
    normalized = sum((r.out_bits / r.width for r in rows), Fraction(0)) / len(rows)

    resolved_cwes = [c.resolve(model) for c in cwes]
    patchable = tuple(c.id for c in resolved_cwes if c.is_patchable(scores, model))

    observability: tuple[tuple[str, Fraction], ...] = ()
    if resolved.observed:
        po = compute_po(model, resolved)
        observability = tuple((info.name, po[info.name]) for info in model.scored())

    return OptionReport(config.name, tuple(rows), investment, output_score,
                        normalized, patchable, observability)


@dataclass(frozen=True)
class ComparisonTable:
    """Option reports aligned on the signal axis, in option order."""

    reports: tuple[OptionReport, ...]

    def signal_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.reports[0].rows)

    def to_text(self) -> str:
        names = self.signal_names()
        widths = {r.name: r.width for r in self.reports[0].rows}
        header = ["signal", "width"]
        for rep in self.reports:
            header.extend([f"{rep.option} in", f"{rep.option} out"])
        table = [header]
        for name in names:
            line = [name, str(widths[name])]
            for rep in self.reports:
                row = rep.row(name)
                line.extend([round_display(row.in_bits), round_display(row.out_bits)])
            table.append(line)
        aggregates = [
            ("investment (bits)", lambda r: round_display(r.investment)),
            ("output score (bits)", lambda r: round_display(r.output_score)),
            ("normalized score", lambda r: round_display(r.normalized)),
        ]
        for label, fmt in aggregates:
            line = [label, ""]
            for rep in self.reports:
                line.extend([fmt(rep), ""])
            table.append(line)
        if any(rep.patchable_cwes for rep in self.reports):
            line = ["patchable CWEs", ""]
            for rep in self.reports:
                ids = ",".join(c.removeprefix("CWE-") for c in rep.patchable_cwes)
                line.extend([ids or "-", ""])
            table.append(line)
        return align_table(table)

    def to_csv(self) -> str:
        names = self.signal_names()
        widths = {r.name: r.width for r in self.reports[0].rows}
        lines = []
        header = ["signal", "width"]
        for rep in self.reports:
            header.extend([f"{rep.option} in", f"{rep.option} out"])
        lines.append(",".join(header))
        for name in names:
            cells = [name, str(widths[name])]
            for rep in self.reports:
                row = rep.row(name)
                cells.extend([exact_decimal(row.in_bits),
                              exact_decimal(row.out_bits)])
            lines.append(",".join(cells))
        for label, value in (("investment (bits)", lambda r: r.investment),
                             ("output score (bits)", lambda r: r.output_score),
                             ("normalized score", lambda r: r.normalized)):
            cells = [label, ""]
            for rep in self.reports:
                cells.extend([exact_decimal(value(rep)), ""])
            lines.append(",".join(cells))
        cells = ["patchable CWEs", ""]
        for rep in self.reports:
            cells.extend([";".join(rep.patchable_cwes), ""])
        lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "signals": [{"name": r.name, "width": r.width}
                        for r in self.reports[0].rows],
            "options": [option_report_json(rep) for rep in self.reports],
        }


def option_report_json(rep: OptionReport) -> dict:
    data = {
        "name": rep.option,
        "cells": {row.name: {"in": rational_json(row.in_bits),
                             "out": rational_json(row.out_bits)}
                  for row in rep.rows},
        "investment": rational_json(rep.investment),
        "output_score": rational_json(rep.output_score),
        "normalized": rational_json(rep.normalized),
        "patchable_cwes": list(rep.patchable_cwes),
    }
    if rep.observability:
        data["observability"] = {name: rational_json(score)
                                 for name, score in rep.observability}
    return data


def option_report_text(rep: OptionReport) -> str:
    table = [["signal", "width", "in", "out"]]
    for row in rep.rows:
        table.append([row.name, str(row.width), round_display(row.in_bits),
                      round_display(row.out_bits)])
    lines = [f"option {rep.option}", align_table(table), ""]
    lines.append(f"investment (bits):   {round_display(rep.investment)}")
    lines.append(f"output score (bits): {round_display(rep.output_score)}")
    lines.append(f"normalized score:    {round_display(rep.normalized)}")
    if rep.patchable_cwes:
        lines.append(f"patchable CWEs:      {', '.join(rep.patchable_cwes)}")
    if rep.observability:
        lines.append("")
        po_table = [["signal", "observability"]]
        for name, score in rep.observability:
            po_table.append([name, round_display(score)])
        lines.append(align_table(po_table))
    return "\n".join(lines) + "\n"


def option_report_csv(rep: OptionReport) -> str:
    po = dict(rep.observability)
    header = ["signal", "width", "in", "out"]
    if po:
        header.append("po")
    lines = [",".join(header)]
    for row in rep.rows:
        cells = [row.name, str(row.width), exact_decimal(row.in_bits),
                 exact_decimal(row.out_bits)]
        if po:
            cells.append(exact_decimal(po[row.name]))
        lines.append(",".join(cells))
    pad = "," * (len(header) - 3)
    lines.append(f"investment (bits),,{exact_decimal(rep.investment)}{pad}")
    lines.append(f"output score (bits),,{exact_decimal(rep.output_score)}{pad}")
    lines.append(f"normalized score,,{exact_decimal(rep.normalized)}{pad}")
    lines.append(f"patchable CWEs,,{';'.join(rep.patchable_cwes)}{pad}")
    return "\n".join(lines) + "\n"


def align_table(table: list[list[str]]) -> str:
    cols = max(len(row) for row in table)
    col_width = [max(len(row[i]) if i < len(row) else 0 for row in table)
                 for i in range(cols)]
    lines = []
    for row in table:
        cells = []
        for i, cell in enumerate(row):
            if i == 0:
                cells.append(cell.ljust(col_width[i]))
            else:
                cells.append(cell.rjust(col_width[i]))
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def compare_options(model: DataflowModel, configs: Sequence[PatchConfig],
                    cwes: Sequence[CweRequirement] = ()) -> ComparisonTable:
    """One report per config, aligned on the signal axis, in config order."""
    if not configs:
        raise ConfigError("no options to compare")
    names = [c.name for c in configs]
    duplicates = {n for n in names if names.count(n) > 1}
    if duplicates:
        raise ConfigError(f"duplicate option names: {', '.join(sorted(duplicates))}")
    return ComparisonTable(tuple(evaluate_option(model, c, cwes) for c in configs))


# ---- option suggestion ----

def suggest_options(model: DataflowModel, candidates: Sequence[str], budget: int,
                    strategy: str = "greedy",
                    cwes: Sequence[CweRequirement] = ()) -> tuple[PatchConfig, ...]:
    """Suggest patch configs over the candidate signals within a bit budget.

    greedy: grows one config by repeatedly adding the candidate with the
    best normalized-score gain per invested bit (ties broken by name), and
    returns the cumulative configs of each step, ending at the terminal one.

    exhaustive: enumerates every candidate subset within budget and returns
    them ranked by normalized score, then lower investment, then name list.
    """
    if budget < 0:
        raise ConfigError("budget must be non-negative")
    for c in cwes:
        c.resolve(model)    # fail early on a bad requirement file
    expanded: list[str] = []
    for name in candidates:
        for element in model.expand_signal(name):
            if element not in expanded:
                expanded.append(element)

    if strategy == "greedy":
        return _suggest_greedy(model, expanded, budget)
    if strategy == "exhaustive":
        if len(expanded) > EXHAUSTIVE_CANDIDATE_LIMIT:
            raise LimitError(
                f"exhaustive search is limited to {EXHAUSTIVE_CANDIDATE_LIMIT} "
                f"candidates (got {len(expanded)})")
        return _suggest_exhaustive(model, expanded, budget)
    raise ConfigError(f"unknown strategy {strategy!r}")


def _normalized(model: DataflowModel, patched: Sequence[str]) -> Fraction:
    scores = compute_pc(model, PatchConfig("candidate", tuple(patched)))
    rows = model.scored()
    return sum((scores[s.name] / s.width for s in rows), Fraction(0)) / len(rows)


def _suggest_greedy(model: DataflowModel, candidates: list[str],
                    budget: int) -> tuple[PatchConfig, ...]:
    chosen: list[str] = []
    spent = 0
    current = _normalized(model, chosen)
    steps: list[PatchConfig] = []
    remaining = sorted(candidates)
    while True:
        best = None
        for name in remaining:
            cost = model.width(name)
            if spent + cost > budget:
                continue
            gain = (_normalized(model, chosen + [name]) - current) / cost
            if best is None or gain > best[0]:
                best = (gain, name)
        if best is None:
            break
        _, name = best
        chosen.append(name)
        remaining.remove(name)
        spent += model.width(name)
        current = _normalized(model, chosen)
        steps.append(PatchConfig(f"greedy-step-{len(chosen)}", tuple(chosen)))
    return tuple(steps)


def _suggest_exhaustive(model: DataflowModel, candidates: list[str],
                        budget: int) -> tuple[PatchConfig, ...]:
    names = sorted(candidates)
    ranked: list[tuple[Fraction, int, tuple[str, ...]]] = []
    for k in range(len(names) + 1):
        for subset in itertools.combinations(names, k):
            cost = sum(model.width(n) for n in subset)
            if cost > budget:
                continue
            ranked.append((_normalized(model, subset), cost, subset))
    ranked.sort(key=lambda item: (-item[0], item[1], item[2]))
    return tuple(
        PatchConfig(f"option-{i + 1}", subset)
        for i, (_, _, subset) in enumerate(ranked)
    )
