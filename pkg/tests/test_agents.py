"""Role agents: reply parsing, prompt templates, and consistency voting."""

from __future__ import annotations

import pytest

from conftest import LOOKUP_TOOL, api
from toolforge.core.dialog import DialogTurn
from toolforge.gateway import RecordingBackend, ScriptedBackend, chat_fingerprint
from toolforge.sdg import (
    AgentScript,
    ConsistencyFailure,
    assistant_step,
    format_history,
    load_scripts,
    parse_assistant_reply,
    tools_block,
)


def test_parse_call_action():
    action = parse_assistant_reply(
        "THOUGHT: need the data\nACTION: call\nCALLS: [lookup_city(name=\"Oslo\")]"
    )
    assert action.kind == "call"
    assert action.thought == "need the data"
    assert action.calls[0].api_name == "lookup_city"


def test_parse_answer_action():
    action = parse_assistant_reply("ACTION: answer\nTEXT: All done.")
    assert action.kind == "answer"
    assert action.text == "All done."
    assert action.thought is None


def test_parse_tolerates_indentation_and_noise():
    action = parse_assistant_reply(
        "Sure, let me think.\n  ACTION: ask_info\n  TEXT: Which city do you mean?"
    )
    assert action.kind == "ask_info"


def test_parse_rejects_missing_action():
    with pytest.raises(ValueError):
        parse_assistant_reply("I would love to help but cannot structure a reply.")


def test_parse_rejects_call_without_calls_line():
    with pytest.raises(ValueError):
        parse_assistant_reply("ACTION: call\nTEXT: nope")


def test_parse_rejects_answer_without_text():
    with pytest.raises(ValueError):
        parse_assistant_reply("ACTION: answer")


def test_agent_script_slots_are_checked():
    with pytest.raises(ValueError):
        AgentScript(role="assistant", prompt_template="$tools $weather")
    script = AgentScript(role="assistant", prompt_template="T=$tools G=$guidance")
    rendered = script.render(tools="[]", history="", guidance="hi")
    assert rendered == "T=[] G=hi"


def test_load_scripts_provides_all_three_roles():
    scripts = load_scripts()
    assert set(scripts) == {"user", "assistant", "tool"}
    for script in scripts.values():
        assert script.prompt_template


def test_format_history_lines():
    from conftest import call

    turns = [
        DialogTurn.system("sys"),
        DialogTurn.user("hello"),
        DialogTurn.assistant_calls([call("f", x=1)]),
        DialogTurn.tool([{"api_name": "f", "content": 2}]),
        DialogTurn.assistant_text("done"),
    ]
    text = format_history(turns)
    assert text.splitlines() == [
        "system: sys",
        "user: hello",
        "assistant: [f(x=1)]",
        'tool: [{"api_name": "f", "content": 2}]',
        "assistant: done",
    ]


def test_tools_block_is_json():
    import json

    block = tools_block([api(LOOKUP_TOOL)])
    assert json.loads(block)[0]["name"] == "lookup_city"


# ---------------------------------------------------------------------------
# voting


def _history():
    return [DialogTurn.system("sys"), DialogTurn.user("look up Oslo for me")]


def _prompt(tools, history, guidance=""):
    scripts = load_scripts()
    return scripts["assistant"].render(
        tools=tools_block(tools), history=format_history(history), guidance=guidance
    )


def _vote_table(prompt, replies_by_seed):
    return {
        chat_fingerprint([("user", prompt)], seed): reply
        for seed, reply in replies_by_seed.items()
    }


CALL_A1 = 'THOUGHT: a\nACTION: call\nCALLS: [lookup_city(name="Oslo")]'
CALL_A2 = 'THOUGHT: b\nACTION: call\nCALLS: [lookup_city(name="Bergen")]'
ASK = "ACTION: ask_info\nTEXT: Which Oslo, Norway or Minnesota?"
ANSWER = "ACTION: answer\nTEXT: Oslo is in Norway."


def test_majority_vote_adopts_winning_class():
    tools = [api(LOOKUP_TOOL)]
    history = _history()
    prompt = _prompt(tools, history)
    backend = ScriptedBackend(
        chat_table=_vote_table(prompt, {0: CALL_A1, 1: CALL_A2, 2: ASK}), chat_mode="strict"
    )
    action = assistant_step(history, tools, backend, votes=3)
    assert action.kind == "call"
    # the first reply of the winning class is adopted verbatim
    assert action.calls[0].arguments == {"name": "Oslo"}


def test_single_vote_skips_deliberation():
    tools = [api(LOOKUP_TOOL)]
    history = _history()
    prompt = _prompt(tools, history)
    backend = RecordingBackend(
        ScriptedBackend(chat_table=_vote_table(prompt, {0: ANSWER}), chat_mode="strict")
    )
    action = assistant_step(history, tools, backend, votes=1)
    assert action.kind == "answer"
    assert len(backend.chat_calls) == 1
    assert backend.chat_calls[0].sampling.temperature == 0.0


def test_votes_use_temperature_and_distinct_seeds():
    tools = [api(LOOKUP_TOOL)]
    history = _history()
    prompt = _prompt(tools, history)
    backend = RecordingBackend(
        ScriptedBackend(
            chat_table=_vote_table(prompt, {0: CALL_A1, 1: CALL_A1, 2: CALL_A1}),
            chat_mode="strict",
        )
    )
    assistant_step(history, tools, backend, votes=3)
    seeds = [req.sampling.seed for req in backend.chat_calls]
    assert seeds == [0, 1, 2]
    assert all(req.sampling.temperature == 0.7 for req in backend.chat_calls)


def test_split_vote_retries_once_then_fails():
    tools = [api(LOOKUP_TOOL)]
    history = _history()
    prompt = _prompt(tools, history)
    # both rounds split three ways: no majority anywhere
    table = _vote_table(
        prompt, {0: CALL_A1, 1: ASK, 2: ANSWER, 3: CALL_A1, 4: ASK, 5: ANSWER}
    )
    backend = RecordingBackend(ScriptedBackend(chat_table=table, chat_mode="strict"))
    with pytest.raises(ConsistencyFailure):
        assistant_step(history, tools, backend, votes=3)
    assert len(backend.chat_calls) == 6
    assert [req.sampling.seed for req in backend.chat_calls] == [0, 1, 2, 3, 4, 5]


def test_second_round_can_rescue_a_split():
    tools = [api(LOOKUP_TOOL)]
    history = _history()
    prompt = _prompt(tools, history)
    table = _vote_table(
        prompt, {0: CALL_A1, 1: ASK, 2: ANSWER, 3: ANSWER, 4: ANSWER, 5: ASK}
    )
    backend = ScriptedBackend(chat_table=table, chat_mode="strict")
    action = assistant_step(history, tools, backend, votes=3)
    assert action.kind == "answer"


def test_invalid_replies_never_win():
    tools = [api(LOOKUP_TOOL)]
    history = _history()
    prompt = _prompt(tools, history)
    # two invalid replies outnumber one valid one; invalid must not be adopted
    table = _vote_table(
        prompt,
        {0: "gibberish", 1: "more gibberish", 2: ANSWER, 3: "zz", 4: "yy", 5: "xx"},
    )
    backend = ScriptedBackend(chat_table=table, chat_mode="strict")
    with pytest.raises(ConsistencyFailure):
        assistant_step(history, tools, backend, votes=3)


def test_even_votes_rejected():
    with pytest.raises(ValueError):
        assistant_step(_history(), [], ScriptedBackend(), votes=2)
