"""Shared fixtures: tool definitions, dialog builders, and the fault corpus.

Everything here is deterministic. The fault corpus pairs each verification
rule with one sample that violates exactly that rule and nothing else, so
rule tests can assert single-fault specificity.
"""

from __future__ import annotations

import pytest

from toolforge.core.calls import FunctionCall
from toolforge.core.dialog import DataSample, DialogTurn
from toolforge.core.schema import ApiDefinition, ParamSchema, validate_api_json

# Two call strings that must parse and re-render byte-identically.
WEATHER_BINOMIAL_CALL = (
    "[get_weather_data(coordinates=[45.4215, -75.6972]), "
    'calc_binomial_probability(n=10, k=5.0, p=0.5)]'
)
INTEGRAL_CALL = (
    '[calculus.integralSolver(function="lambda x: 3*x**2", '
    'limits={"lower": "0", "upper": "4"})]'
)

TOKEN_VALUE = "z9x8c7v6b5n4m3q2w1"

SYSTEM_PROMPT = "You are a helpful assistant with access to the listed tools."

# A system prompt that mandates the bracket call format; used by the
# format-conflict fixture.
MANDATE_PROMPT = (
    "You are a helpful assistant. When you call tools, reply only with a "
    "call string like [name(arg=value, ...)]."
)


def tool_record(name, description, properties, required, returns=None):
    record = {
        "name": name,
        "description": description,
        "parameters": {"type": "dict", "properties": properties, "required": required},
    }
    if returns is not None:
        record["returns"] = returns
    return record


_STR = lambda desc, **extra: {"type": "string", "description": desc, **extra}
_INT = lambda desc, **extra: {"type": "integer", "description": desc, **extra}
_FLT = lambda desc, **extra: {"type": "float", "description": desc, **extra}


WEATHER_TOOL = tool_record(
    "get_weather_data",
    "Fetch current weather readings for a coordinate pair.",
    {
        "coordinates": {
            "type": "array",
            "description": "Latitude and longitude, in that order.",
            "items": _FLT("One coordinate component."),
        }
    },
    ["coordinates"],
)

BINOMIAL_TOOL = tool_record(
    "calc_binomial_probability",
    "Probability of seeing exactly k successes in n trials.",
    {
        "n": _INT("Number of trials."),
        "k": _FLT("Number of successes."),
        "p": _FLT("Per-trial success probability."),
    },
    ["n", "k", "p"],
)

PRESSURE_TOOL = tool_record(
    "calc_absolute_pressure",
    "Compute absolute pressure from gauge and atmospheric readings.",
    {
        "atm_pressure": _INT("Atmospheric pressure in atm.", default=1),
        "gauge_pressure": _INT("Gauge pressure in atm."),
    },
    ["gauge_pressure"],
)

_NUMERIC_STRING = r"^-?\d+(\.\d+)?$"

INTEGRAL_TOOL = tool_record(
    "calculus.integralSolver",
    "Evaluate the definite integral of a one-variable function.",
    {
        "function": _STR("The integrand, written as a python lambda."),
        "limits": {
            "type": "dict",
            "description": "Integration bounds.",
            "properties": {
                "lower": _STR("Lower bound.", pattern=_NUMERIC_STRING),
                "upper": _STR("Upper bound.", pattern=_NUMERIC_STRING),
            },
            "required": ["lower", "upper"],
        },
    },
    ["function", "limits"],
)

# The parameter really is spelled "passward" in the transcript this mirrors.
TOKEN_TOOL = tool_record(
    "GetUserToken",
    "Exchange account credentials for a session token.",
    {
        "username": _STR("The name of the user."),
        "passward": _STR("The password of the user."),
    },
    ["username", "passward"],
    returns={
        "type": "dict",
        "description": "Session grant.",
        "properties": {"token": _STR("Opaque session token.")},
        "required": ["token"],
    },
)

ALARM_TOOL = tool_record(
    "AddAlarm",
    "Schedule an alarm for an authenticated user.",
    {
        "token": _STR("Session token from GetUserToken."),
        "time": _STR("Alarm time, formatted %Y-%m-%d %H:%M:%S."),
    },
    ["token", "time"],
    returns={
        "type": "dict",
        "description": "Operation outcome.",
        "properties": {"status": _STR("Whether the alarm was stored.")},
        "required": ["status"],
    },
)

LOOKUP_TOOL = tool_record(
    "lookup_city",
    "Resolve a city name to its population record.",
    {"name": _STR("City name to resolve.")},
    ["name"],
    returns={
        "type": "dict",
        "description": "Population record.",
        "properties": {"population": _INT("Resident head count.")},
        "required": ["population"],
    },
)

CODE_TOOL = tool_record(
    "city_by_code",
    "Resolve an IATA-style city code.",
    {"code": _STR("Three uppercase letters.", pattern="^[A-Z]{3}$")},
    ["code"],
)

SEARCH_TOOL = tool_record(
    "catalog_search",
    "Search the product catalog.",
    {
        "query": _STR("Free-text query."),
        "sort": _STR("Result ordering.", enum=["relevance", "newest"]),
        "limit": _INT("Maximum results."),
    },
    ["query"],
)


def api(record) -> ApiDefinition:
    return validate_api_json(record)


@pytest.fixture
def lookup_api():
    return api(LOOKUP_TOOL)


def call(__api_name, **arguments) -> FunctionCall:
    return FunctionCall(api_name=__api_name, arguments=arguments)


# ---------------------------------------------------------------------------
# clean samples, one builder per dialog type


def clean_single(i: int = 0) -> DataSample:
    city = f"City{i}"
    return DataSample(
        sample_id=f"clean-single-{i}",
        system_prompt=SYSTEM_PROMPT,
        tool_list=[api(LOOKUP_TOOL)],
        turns=[
            DialogTurn.system(SYSTEM_PROMPT),
            DialogTurn.user(f"Please look up the population of {city}."),
            DialogTurn.assistant_calls([call("lookup_city", name=city)]),
            DialogTurn.tool([{"api_name": "lookup_city", "content": {"population": 500000 + i}}]),
            DialogTurn.assistant_text(f"{city} has {500000 + i} residents."),
        ],
        dialog_type="single",
    )


def clean_parallel(i: int = 0) -> DataSample:
    return DataSample(
        sample_id=f"clean-parallel-{i}",
        system_prompt=SYSTEM_PROMPT,
        tool_list=[api(LOOKUP_TOOL)],
        turns=[
            DialogTurn.system(SYSTEM_PROMPT),
            DialogTurn.user(f"Compare the populations of Lisbon and Porto, round {i}."),
            DialogTurn.assistant_calls(
                [call("lookup_city", name="Lisbon"), call("lookup_city", name="Porto")]
            ),
            DialogTurn.tool(
                [
                    {"api_name": "lookup_city", "content": {"population": 504718}},
                    {"api_name": "lookup_city", "content": {"population": 231962}},
                ]
            ),
            DialogTurn.assistant_text("Lisbon has 504718 residents and Porto has 231962."),
        ],
        dialog_type="parallel",
    )


def clean_dependent(i: int = 0) -> DataSample:
    return DataSample(
        sample_id=f"clean-dependent-{i}",
        system_prompt=SYSTEM_PROMPT,
        tool_list=[api(TOKEN_TOOL), api(ALARM_TOOL)],
        turns=[
            DialogTurn.system(SYSTEM_PROMPT),
            DialogTurn.user(f"Log me in as foo{i} and set my morning alarm."),
            DialogTurn.assistant_calls(
                [call("GetUserToken", username=f"foo{i}", passward="bar")]
            ),
            DialogTurn.tool([{"api_name": "GetUserToken", "content": {"token": TOKEN_VALUE}}]),
            DialogTurn.assistant_calls(
                [call("AddAlarm", token=TOKEN_VALUE, time="2021-10-14 08:00:00")]
            ),
            DialogTurn.tool([{"api_name": "AddAlarm", "content": {"status": "success"}}]),
            DialogTurn.assistant_text("You are logged in and the alarm is set for 8 AM."),
        ],
        dialog_type="dependent",
    )


def clean_non_tool(i: int = 0) -> DataSample:
    return DataSample(
        sample_id=f"clean-non-tool-{i}",
        system_prompt=SYSTEM_PROMPT,
        tool_list=[],
        turns=[
            DialogTurn.system(SYSTEM_PROMPT),
            DialogTurn.user(f"Quick question number {i}: what goes well with rice?"),
            DialogTurn.assistant_text(
                "Plenty of things; stir-fried vegetables and a fried egg are a reliable pairing."
            ),
        ],
        dialog_type="non_tool_use",
    )


def clean_corpus(per_type: int = 5) -> list[DataSample]:
    corpus = []
    for i in range(per_type):
        corpus.extend([clean_single(i), clean_parallel(i), clean_dependent(i), clean_non_tool(i)])
    return corpus


# ---------------------------------------------------------------------------
# fault corpus: one sample per rule, violating exactly that rule


def _with_extra_tool(extra: ApiDefinition) -> DataSample:
    sample = clean_single(0)
    sample.tool_list = [api(LOOKUP_TOOL), extra]
    return sample


def _with_call(calls, payload) -> DataSample:
    sample = clean_single(0)
    sample.turns[2] = DialogTurn.assistant_calls(calls)
    sample.turns[3] = DialogTurn.tool(payload)
    return sample


def fault_fixtures() -> list[tuple[str, DataSample]]:
    fixtures: list[tuple[str, DataSample]] = []

    # api_clarity ----------------------------------------------------------
    fixtures.append(
        (
            "missing_name",
            _with_extra_tool(
                ApiDefinition(
                    name="",
                    description="A tool that forgot its own name.",
                    parameters=ParamSchema(kind="dict", properties={}, required=[]),
                )
            ),
        )
    )
    fixtures.append(
        (
            "missing_description",
            _with_extra_tool(
                ApiDefinition(
                    name="undocumented_tool",
                    description="",
                    parameters=ParamSchema(kind="dict", properties={}, required=[]),
                )
            ),
        )
    )
    fixtures.append(
        (
            "invalid_schema",
            _with_extra_tool(
                ApiDefinition(
                    name="untyped_array_tool",
                    description="Carries an array parameter without an item type.",
                    parameters=ParamSchema(
                        kind="dict",
                        properties={
                            "tags": ParamSchema(kind="array", description="Tag list.", items=None)
                        },
                        required=[],
                    ),
                )
            ),
        )
    )
    fixtures.append(
        (
            "dangling_required",
            _with_extra_tool(
                ApiDefinition(
                    name="ghost_required_tool",
                    description="Requires a parameter it never declares.",
                    parameters=ParamSchema(kind="dict", properties={}, required=["ghost"]),
                )
            ),
        )
    )

    # executability --------------------------------------------------------
    fixtures.append(
        (
            "unknown_api",
            _with_call(
                [call("mystery_api", question="anything")],
                [{"api_name": "mystery_api", "content": {"result": "nothing"}}],
            ),
        )
    )
    fixtures.append(
        (
            "missing_required",
            _with_call(
                [call("lookup_city")],
                [{"api_name": "lookup_city", "content": {"population": 1}}],
            ),
        )
    )
    fixtures.append(
        (
            "unknown_param",
            _with_call(
                [call("lookup_city", name="Lisbon", verbose=True)],
                [{"api_name": "lookup_city", "content": {"population": 504718}}],
            ),
        )
    )
    fixtures.append(
        (
            "type_mismatch",
            _with_call(
                [call("lookup_city", name=7)],
                [{"api_name": "lookup_city", "content": {"population": 504718}}],
            ),
        )
    )

    pattern_sample = _with_call(
        [call("city_by_code", code="abc")],
        [{"api_name": "city_by_code", "content": {"result": "none"}}],
    )
    pattern_sample.tool_list = [api(CODE_TOOL)]
    fixtures.append(("pattern_mismatch", pattern_sample))

    enum_sample = _with_call(
        [call("catalog_search", query="desk lamps", sort="upside_down")],
        [{"api_name": "catalog_search", "content": {"result": "none"}}],
    )
    enum_sample.tool_list = [api(SEARCH_TOOL)]
    fixtures.append(("enum_violation", enum_sample))

    # dialog_correctness ---------------------------------------------------
    blank_id = clean_single(0)
    blank_id.sample_id = ""
    fixtures.append(("missing_dialog_field", blank_id))

    too_long = clean_single(0)
    too_long.turns[-1] = DialogTurn.assistant_text("x" * 2000 + ".")
    fixtures.append(("response_too_long", too_long))

    control_char = clean_single(0)
    control_char.turns[-1] = DialogTurn.assistant_text("All done\x07 here.")
    fixtures.append(("invalid_characters", control_char))

    mixed = clean_single(0)
    mixed.turns[-1] = DialogTurn.assistant_text("Hello 你好吗 weather 天气 today 今天.")
    fixtures.append(("mixed_language", mixed))

    trailing_off = clean_single(0)
    trailing_off.turns[-1] = DialogTurn.assistant_text("The results are")
    fixtures.append(("incomplete_response", trailing_off))

    # consistency ----------------------------------------------------------
    mismatch = clean_single(0)
    mismatch.turns[3] = DialogTurn.tool(
        [{"api_name": "other_api", "content": {"population": 504718}}]
    )
    fixtures.append(("call_response_name_mismatch", mismatch))

    conflict = clean_single(0)
    conflict.system_prompt = MANDATE_PROMPT
    conflict.turns[0] = DialogTurn.system(MANDATE_PROMPT)
    conflict.turns[-1] = DialogTurn.assistant_text("[lookup_city(name=]")
    fixtures.append(("format_conflict", conflict))

    eager = DataSample(
        sample_id="fault-role-order",
        system_prompt=SYSTEM_PROMPT,
        tool_list=[],
        turns=[
            DialogTurn.system(SYSTEM_PROMPT),
            DialogTurn.assistant_text("Hello, how can I help you today?"),
        ],
        dialog_type="non_tool_use",
    )
    fixtures.append(("role_order_violation", eager))

    orphan = DataSample(
        sample_id="fault-orphan-tool",
        system_prompt=SYSTEM_PROMPT,
        tool_list=[],
        turns=[
            DialogTurn.system(SYSTEM_PROMPT),
            DialogTurn.user("Did anything come back from the batch job?"),
            DialogTurn.tool([{"api_name": "batch_status", "content": {"done": "yes it is"}}]),
            DialogTurn.assistant_text("No results arrived today."),
        ],
        dialog_type="non_tool_use",
    )
    fixtures.append(("orphan_tool_response", orphan))

    mislabeled = clean_single(0)
    mislabeled.sample_id = "fault-type-mismatch"
    mislabeled.dialog_type = "parallel"
    fixtures.append(("dialog_type_mismatch", mislabeled))

    return fixtures
