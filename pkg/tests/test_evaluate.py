import itertools
import json
from fractions import Fraction

import pytest

from patchscore.errors import ConfigError, LimitError
from patchscore.evaluate import (CweRequirement, compare_options,
                                 evaluate_option, exact_decimal, round_display,
                                 suggest_options)
from patchscore.scoring import PatchConfig, compute_pc

F = Fraction

INVESTMENTS = {"Greedy": 319, "V1": 3, "V2": 45, "V3": 110, "V4": 192, "V5": 254}
OUTPUTS = {"Greedy": F(463), "V1": F(7, 2), "V2": F(4061, 16), "V3": F(393),
           "V4": F(312), "V5": F(407)}
NORMALIZED_DISPLAY = {"Greedy": "1", "V1": "0.2", "V2": "0.6", "V3": "0.9",
                      "V4": "0.4", "V5": "0.9"}
CWE_ROW = {
    "Greedy": ("CWE-1262", "CWE-1231", "CWE-1272", "CWE-276"),
    "V1": ("CWE-1272",),
    "V2": ("CWE-1262", "CWE-1231", "CWE-1272"),
    "V3": ("CWE-1262", "CWE-1231", "CWE-1272"),
    "V4": ("CWE-1262", "CWE-1272", "CWE-276"),
    "V5": ("CWE-1262", "CWE-1231", "CWE-1272"),
}


# ---- display rounding ----

@pytest.mark.parametrize("value,text", [
    (F(63, 4), "15.8"),         # 15.75
    (F(189, 16), "11.8"),       # 11.8125
    (F(189, 2), "94.5"),
    (F(4061, 16), "253.8"),
    (F(24), "24"),
    (F(265, 304), "0.9"),
    (F(7, 38), "0.2"),
    (F(1), "1"),
])
def test_round_display(value, text):
    assert round_display(value) == text


@pytest.mark.parametrize("value,text", [
    (F(63, 4), "15.75"),
    (F(189, 16), "11.8125"),
    (F(24), "24"),
    (F(265, 304), "265/304"),   # non-terminating decimals stay exact
])
def test_exact_decimal(value, text):
    assert exact_decimal(value) == text


# ---- option evaluation ----

def test_v2_report(model, options_by_name, cwes):
    rep = evaluate_option(model, options_by_name["V2"], cwes)
    assert rep.investment == 45
    assert rep.output_score == F(4061, 16)
    assert round_display(rep.normalized) == "0.6"
    assert rep.patchable_cwes == CWE_ROW["V2"]


def test_v1_report(model, options_by_name, cwes):
    rep = evaluate_option(model, options_by_name["V1"], cwes)
    assert rep.investment == 3
    assert rep.output_score == F(7, 2)
    assert round_display(rep.normalized) == "0.2"
    assert rep.patchable_cwes == CWE_ROW["V1"]


def test_all_signals_patched_normalizes_to_one(model, cwes):
    config = PatchConfig("all", patched=tuple(s.name for s in model.scored()))
    rep = evaluate_option(model, config, cwes)
    assert rep.normalized == 1
    assert rep.investment == rep.output_score == 463


def test_empty_config_normalized_below_one_percent(model):
    rep = evaluate_option(model, PatchConfig("none"))
    assert rep.normalized < F(1, 100)


def test_aggregates_consistent(model, options, cwes):
    for config in options:
        rep = evaluate_option(model, config, cwes)
        assert rep.output_score == sum((r.out_bits for r in rep.rows), F(0))
        assert rep.investment == sum((r.in_bits for r in rep.rows), F(0))
        assert rep.investment <= rep.output_score
        assert 0 <= rep.normalized <= 1


def test_comparison_table(model, options, cwes):
    table = compare_options(model, options, cwes)
    assert [rep.option for rep in table.reports] == list(INVESTMENTS)
    for rep in table.reports:
        assert rep.investment == INVESTMENTS[rep.option]
        assert rep.output_score == OUTPUTS[rep.option]
        assert round_display(rep.normalized) == NORMALIZED_DISPLAY[rep.option]
        assert rep.patchable_cwes == CWE_ROW[rep.option]


def test_single_option_table(model, options_by_name):
    table = compare_options(model, [options_by_name["V3"]])
    assert len(table.reports) == 1


def test_duplicate_option_names_rejected(model, options_by_name):
    with pytest.raises(ConfigError):
        compare_options(model, [options_by_name["V1"], options_by_name["V1"]])


def test_no_options_rejected(model):
    with pytest.raises(ConfigError):
        compare_options(model, [])


def test_cwe_monotone_under_growth(model, cwes, options_by_name):
    base = options_by_name["V1"]
    grown = PatchConfig("V1+", base.patched + ("we", "wdata", "reglk_ctrl_i"))
    before = set(evaluate_option(model, base, cwes).patchable_cwes)
    after = set(evaluate_option(model, grown, cwes).patchable_cwes)
    assert before <= after


def test_cwe_requires_all_signals_of_a_set(model):
    # a joint requirement over all array elements fails if one is missing
    joint = CweRequirement("CWE-X", (("reglk_mem",),))
    partial = PatchConfig("partial", patched=tuple(
        f"reglk_mem[{j}]" for j in range(5)))
    rep = evaluate_option(model, partial, [joint])
    assert rep.patchable_cwes == ()
    full = PatchConfig("full", patched=("reglk_mem",))
    rep = evaluate_option(model, full, [joint])
    assert rep.patchable_cwes == ("CWE-X",)


def test_table_text_matches_golden_aggregates(model, options, cwes):
    text = compare_options(model, options, cwes).to_text()
    assert "319" in text and "253.8" in text and "15.8" in text
    assert "1262,1231,1272,276" in text


def test_table_csv_exact_cells(model, options, cwes):
    csv = compare_options(model, options, cwes).to_csv()
    lines = csv.splitlines()
    header = lines[0].split(",")
    v2_out = header.index("V2 out")
    mem_row = next(l for l in lines if l.startswith("reglk_mem[0],")).split(",")
    assert mem_row[v2_out] == "15.75"
    inv_row = next(l for l in lines if l.startswith("investment")).split(",")
    assert inv_row[header.index("Greedy in")] == "319"


def test_table_json_rationals(model, options, cwes):
    data = compare_options(model, options, cwes).to_json_dict()
    text = json.dumps(data, indent=2, sort_keys=True)
    again = json.dumps(json.loads(text), indent=2, sort_keys=True)
    assert text == again
    v2 = next(o for o in data["options"] if o["name"] == "V2")
    assert v2["output_score"] == {"num": 4061, "den": 16, "decimal": "253.8125"}
    cell = v2["cells"]["reglk_mem[0]"]["out"]
    assert F(cell["num"], cell["den"]) == F(63, 4)


# ---- suggestion ----

def test_suggest_zero_budget(model):
    assert suggest_options(model, [s.name for s in model.scored()], 0) == ()


def test_suggest_negative_budget(model):
    with pytest.raises(ConfigError):
        suggest_options(model, ["en"], -1)


def test_suggest_greedy_full_budget_reaches_one(model):
    candidates = [s.name for s in model.scored()]
    steps = suggest_options(model, candidates, 463, "greedy")
    rep = evaluate_option(model, steps[-1])
    assert rep.normalized == 1
    assert rep.investment == 463


def test_suggest_greedy_deterministic(model):
    candidates = [s.name for s in model.scored()]
    a = suggest_options(model, candidates, 64, "greedy")
    b = suggest_options(model, candidates, 64, "greedy")
    assert a == b
    for step in a:
        assert sum(model.width(n) for n in step.patched) <= 64


def test_suggest_exhaustive_limit():
    from patchscore.elaborate import DataflowModel, SignalInfo, evaluation_order
    signals = tuple(SignalInfo(f"in{i}", 1, "input") for i in range(21))
    wide = DataflowModel(signals, {}, evaluation_order(signals, {}))
    with pytest.raises(LimitError):
        suggest_options(wide, [s.name for s in signals], 10, "exhaustive")


def test_suggest_unknown_strategy(model):
    with pytest.raises(ConfigError):
        suggest_options(model, ["en"], 10, "simulated-annealing")


def brute_force_best(model, candidates, budget):
    """Independent oracle: enumerate every subset within budget."""
    rows = model.scored()
    best = None
    for k in range(len(candidates) + 1):
        for subset in itertools.combinations(sorted(candidates), k):
            cost = sum(model.width(n) for n in subset)
            if cost > budget:
                continue
            scores = compute_pc(model, PatchConfig("x", subset))
            norm = sum((scores[s.name] / s.width for s in rows), F(0)) / len(rows)
            key = (-norm, cost, subset)
            if best is None or key < best:
                best = key
    return -best[0], best[1], best[2]


def test_suggest_exhaustive_matches_bruteforce_oracle(model):
    inputs = [s.name for s in model.scored() if s.kind == "input"]
    assert len(inputs) == 9
    budget = 110
    ranked = suggest_options(model, inputs, budget, "exhaustive")
    assert ranked, "budget admits at least the empty set"
    best_norm, best_cost, best_subset = brute_force_best(model, inputs, budget)
    top = ranked[0]
    top_scores = compute_pc(model, top)
    rows = model.scored()
    top_norm = sum((top_scores[s.name] / s.width for s in rows), F(0)) / len(rows)
    assert top_norm == best_norm
    assert sum(model.width(n) for n in top.patched) == best_cost
    assert tuple(sorted(top.patched)) == best_subset
    # the full 9-input set (investment 110) is itself the optimum here
    assert set(top.patched) == set(inputs)


def test_suggest_exhaustive_ranking_is_monotone(model):
    inputs = [s.name for s in model.scored() if s.kind == "input"]
    ranked = suggest_options(model, inputs, 3, "exhaustive")
    rows = model.scored()

    def norm(config):
        scores = compute_pc(model, config)
        return sum((scores[s.name] / s.width for s in rows), F(0)) / len(rows)

    values = [norm(c) for c in ranked]
    assert values == sorted(values, reverse=True)
