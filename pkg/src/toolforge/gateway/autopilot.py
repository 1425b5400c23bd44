"""Offline backend that improvises structurally valid agent replies.

The scripted mock replays exact fingerprint-keyed replies, which is perfect
for unit tests but cannot drive an open-ended pipeline run. This backend
fills that gap: it recognizes the task marker each prompt template embeds
(a ``### task: <name>`` line plus named ``<block>...</block>`` sections),
and synthesizes a deterministic, schema-valid reply from a hash of the
request text. No network, no randomness beyond the hash, so identical runs
produce identical corpora.

It is a simulation of a cooperative model, not a language model: replies are
formulaic, but they honor the call grammar, the parameter schemas, and the
dialog-type playbooks, which is exactly what end-to-end determinism tests
need.
"""

from __future__ import annotations

import hashlib
import json
import re
from random import Random

from ..core.calls import FunctionCall, parse_call_string, render_call_string
from ..core.dialog import significant_leaves
from ..core.schema import ParamSchema, _schema_from_json, example_value
from .base import ChatRequest, LlmBackend, RefusalError, ScoreRequest, ScoreResponse, simple_tokenize

_TASK_RE = re.compile(r"^### task: ([a-z_]+)\s*$", re.M)
_PLAN_RE = re.compile(r"PLAN (\{.*\})\s*$", re.M)
_PLAN_TAG_RE = re.compile(r"<plan type=(\w+) level=(\d+) attempt=(\d+)/>")
_ASSISTANT_CALL_LINE_RE = re.compile(r"^assistant: (\[.*\])\s*$", re.M)
_TOOL_LINE_RE = re.compile(r"^tool: (\[.*\])\s*$", re.M)


def _block(text: str, name: str) -> str:
    match = re.search(rf"<{name}>\n?(.*?)\n?</{name}>", text, re.S)
    return match.group(1) if match else ""


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _rng_for(text: str) -> Random:
    return Random(int(_digest(text)[:12], 16))


def _schema_of(doc) -> ParamSchema | None:
    if not isinstance(doc, dict):
        return None
    defects: list = []
    node = _schema_from_json(doc, "$", defects)
    return None if defects else node


def _fenced_json(payload) -> str:
    return "```json\n" + json.dumps(payload, ensure_ascii=False) + "\n```"


class AutopilotBackend(LlmBackend):
    name = "autopilot"
    supports_scoring = True

    def __init__(self, seed: int = 0):
        self.seed = seed

    # ------------------------------------------------------------------
    def chat(self, req: ChatRequest) -> str:
        text = "\n".join(part for _, part in req.messages)
        match = _TASK_RE.search(text)
        if not match:
            raise RefusalError("autopilot cannot infer a task from this prompt")
        task = match.group(1)
        handler = getattr(self, f"_task_{task}", None)
        if handler is None:
            raise RefusalError(f"autopilot has no handler for task {task!r}")
        return handler(text)

    def score(self, req: ScoreRequest) -> ScoreResponse:
        tokens = simple_tokenize(req.target)
        key = _digest(f"{req.prompt}\x1f{req.target}\x1f{self.seed}")
        logprobs = []
        for i in range(len(tokens)):
            digest = hashlib.sha256(f"{key}:{i}".encode("utf-8")).hexdigest()
            frac = int(digest[:8], 16) / 0xFFFFFFFF
            logprobs.append(-0.05 - 2.95 * frac)
        return ScoreResponse(token_logprobs=logprobs, token_texts=tokens)

    # ------------------------------------------------------------------
    # synthesis tasks
    def _task_speciate(self, text: str) -> str:
        doc = _block(text, "document")
        lines = [line.strip() for line in doc.splitlines() if line.strip()]
        if not lines:
            raise RefusalError("speciation document was empty")
        head = lines[0]
        for prefix in ("Topic:", "Domain:", "Service:"):
            if head.startswith(prefix):
                head = head[len(prefix) :].strip()
                break
        bullets = [line.lstrip("-* ").strip() for line in lines[1:] if line.startswith(("-", "*"))]
        functionalities = bullets or [line for line in lines[1:]][:8]
        if not functionalities:
            functionalities = [f"general {head.lower()} lookup"]
        return "Extracted what the document describes.\n" + _fenced_json(
            {"domain": head, "functionalities": functionalities[:8]}
        )

    def _task_evolve_api(self, text: str) -> str:
        try:
            example = json.loads(_block(text, "example"))
        except json.JSONDecodeError:
            raise RefusalError("evolution prompt carried no parseable example")
        labels = [line.strip() for line in _block(text, "subtree").splitlines() if line.strip()]
        indicators = [line.strip() for line in _block(text, "indicators").splitlines() if line.strip()]
        h = _digest(text)[:6]
        base_label = labels[0] if labels else "utility"
        slug = re.sub(r"[^A-Za-z0-9]+", "_", base_label).strip("_").lower() or "api"

        params = example.get("parameters") or {"type": "dict", "properties": {}, "required": []}
        props = {name: dict(schema) for name, schema in (params.get("properties") or {}).items()}
        required = list(params.get("required") or [])
        returns = example.get("returns")

        description = f"Handles {base_label}."
        if len(labels) > 1:
            description += f" Covers: {'; '.join(labels)}."
        description += f" Variant {h}."

        for indicator in indicators:
            if indicator == "add_parameter":
                props[f"extra_{h[:4]}"] = {
                    "type": "string",
                    "description": "optional free-form filter",
                }
            elif indicator == "add_constraint":
                props[f"mode_{h[:4]}"] = {
                    "type": "string",
                    "description": "processing mode",
                    "enum": ["fast", "full"],
                }
            elif indicator == "mutate_parameter_type":
                self._mutate_first_type(props)
            elif indicator == "update_returns":
                returns = self._updated_returns(returns, h)
            elif indicator == "add_functionality":
                extra = labels[-1] if labels else "adjacent lookups"
                description += f" Also supports {extra}."

        record = {
            "name": f"{slug}_{h}",
            "description": description,
            "parameters": {"type": "dict", "properties": props, "required": required},
        }
        if returns is not None:
            record["returns"] = returns
        return "Proposed a new definition.\n" + _fenced_json(record)

    @staticmethod
    def _mutate_first_type(props: dict) -> None:
        for flip_from, flip_to in (("integer", "float"), ("boolean", "string"), ("float", "integer")):
            for schema in props.values():
                if schema.get("type") == flip_from:
                    schema["type"] = flip_to
                    return
        for schema in props.values():
            if schema.get("type") == "string" and "enum" not in schema and "pattern" not in schema:
                schema["type"] = "integer"
                schema.pop("default", None)
                return

    @staticmethod
    def _updated_returns(returns, h: str) -> dict:
        if not isinstance(returns, dict) or returns.get("type") != "dict":
            returns = {"type": "dict", "description": "result payload", "properties": {}, "required": []}
        props = {name: dict(schema) for name, schema in (returns.get("properties") or {}).items()}
        props[f"note_{h[:4]}"] = {"type": "string", "description": "status note"}
        if not any(schema.get("type") == "string" for schema in props.values()):
            props["result_id"] = {"type": "string", "description": "opaque result handle"}
        return {
            "type": "dict",
            "description": returns.get("description", "result payload"),
            "properties": props,
            "required": [],
        }

    # ------------------------------------------------------------------
    # dialog tasks
    def _task_user_turn(self, text: str) -> str:
        tools = self._tools(text)
        guidance = _block(text, "guidance")
        tag = _PLAN_TAG_RE.search(guidance)
        h = _digest(text)[:8]
        if tag is None or tag.group(1) == "followup":
            return f"One more thing ({h}): could you give me a short recap of where we stand? PLAN " + json.dumps(
                {"type": "followup"}
            )
        dialog_type = tag.group(1)
        level = int(tag.group(2))
        names = sorted(record["name"] for record in tools)

        if dialog_type == "non_tool_use" or not names:
            prose = (
                f"Quick unrelated question ({h}): what is a sensible default dress code "
                f"for an office visit on Fridays?"
            )
            return f"{prose} PLAN " + json.dumps({"type": "none", "apis": []})

        if dialog_type == "single":
            count = max(1, min(len(names), 1 + level))
            apis = names[:count]
            prose = f"Task {h}: please run {self._join(apis)} for me, one at a time, and report back."
            return f"{prose} PLAN " + json.dumps({"type": "single", "apis": apis})

        if dialog_type == "parallel":
            api = names[0]
            record = next(r for r in tools if r["name"] == api)
            vary = self._vary_spec(record, h)
            extras = names[1 : 1 + level]
            plan = {"type": "parallel", "apis": [api], "vary": vary, "extra_apis": extras}
            if vary:
                prose = (
                    f"Task {h}: please check {api} once for each {vary['param']} of "
                    f"{self._join(vary['values'])}, in one go."
                )
            else:
                prose = f"Task {h}: please query {api} three times in one go so I can compare."
            return f"{prose} PLAN " + json.dumps(plan)

        # dependent
        count = max(2, min(len(names), 2 + level))
        apis = names[:count]
        prose = (
            f"Task {h}: start with {apis[0]}, then feed what it returns into "
            f"{self._join(apis[1:])} before you summarize."
        )
        return f"{prose} PLAN " + json.dumps({"type": "dependent", "apis": apis})

    @staticmethod
    def _join(items) -> str:
        items = list(items)
        if len(items) <= 1:
            return items[0] if items else "nothing"
        return ", ".join(items[:-1]) + " and " + items[-1]

    @staticmethod
    def _vary_spec(record: dict, h: str) -> dict | None:
        props = (record.get("parameters") or {}).get("properties") or {}
        for name, schema in props.items():
            if schema.get("type") == "string" and schema.get("enum"):
                values = list(schema["enum"])[:3]
                if len(values) == 1:
                    values = values * 2
                return {"param": name, "values": values}
        for name, schema in props.items():
            if schema.get("type") == "string" and "pattern" not in schema:
                return {"param": name, "values": [f"alpha_{h[:4]}", f"bravo_{h[:4]}", f"citra_{h[:4]}"]}
        return None

    def _task_assistant_turn(self, text: str) -> str:
        tools = {record["name"]: record for record in self._tools(text)}
        history = _block(text, "history")
        plans = _PLAN_RE.findall(history)
        plan = None
        if plans:
            try:
                plan = json.loads(plans[-1])
            except json.JSONDecodeError:
                plan = None
        calls_done = len(_ASSISTANT_CALL_LINE_RE.findall(history))
        h = _digest(text)[:8]

        if plan is None or plan.get("type") in ("none", "followup") or not plan.get("apis"):
            if plan is not None and plan.get("type") == "none":
                reply_text = (
                    "None of the tools I can call covers that question, so I have to answer directly: "
                    "business casual is the usual safe default."
                )
            else:
                reply_text = f"Recap {h}: everything requested so far has been handled; nothing is pending."
            return f"THOUGHT: no tool call fits here\nACTION: answer\nTEXT: {reply_text}"

        kind = plan["type"]
        apis = [name for name in plan.get("apis", []) if name in tools]
        if not apis:
            return f"THOUGHT: planned tools are unavailable\nACTION: answer\nTEXT: The requested tools are not available, so I cannot proceed; sorry ({h})."

        if kind == "parallel":
            if calls_done == 0:
                calls = self._parallel_calls(plan, tools, history)
                return self._call_reply(calls, "fan out over the variants")
            return self._answer_reply(f"Compared all variants for task {h}; details are in the tool results above.")

        # single and dependent share sequencing: one planned call per turn.
        if calls_done < len(apis):
            api = apis[calls_done]
            overrides = {}
            if kind == "dependent" and calls_done >= 1:
                overrides = self._dependency_override(tools[api], history)
            call = self._build_call(tools[api], history, calls_done, overrides)
            return self._call_reply([call], f"step {calls_done + 1} of {len(apis)}")
        return self._answer_reply(
            f"Finished task {h}: ran {self._join(apis)} and collected every result above."
        )

    def _parallel_calls(self, plan: dict, tools: dict, history: str) -> list[FunctionCall]:
        api = plan["apis"][0]
        record = tools[api]
        vary = plan.get("vary")
        calls = []
        if vary:
            for value in vary["values"]:
                calls.append(self._build_call(record, history, 0, {vary["param"]: value}))
        else:
            for i in range(3):
                calls.append(self._build_call(record, history, i, {}))
        for extra in plan.get("extra_apis", []):
            if extra in tools:
                calls.append(self._build_call(tools[extra], history, 0, {}))
        return calls

    def _dependency_override(self, record: dict, history: str) -> dict:
        payload_lines = _TOOL_LINE_RE.findall(history)
        if not payload_lines:
            return {}
        try:
            payload = json.loads(payload_lines[-1])
        except json.JSONDecodeError:
            return {}
        leaves = sorted(significant_leaves(payload), key=repr)
        if not leaves:
            return {}
        leaf = leaves[0]
        props = (record.get("parameters") or {}).get("properties") or {}
        for name, schema in props.items():
            if schema.get("type") == "string" and "pattern" not in schema and "enum" not in schema:
                return {name: leaf if isinstance(leaf, str) else json.dumps(leaf)}
        return {}

    def _build_call(self, record: dict, history: str, salt: int, overrides: dict) -> FunctionCall:
        rng = _rng_for(f"{record['name']}|{salt}|{history}")
        schema = _schema_of(record.get("parameters")) or ParamSchema(kind="dict", properties={}, required=[])
        props = schema.properties or {}
        required = schema.required or []
        arguments: dict = {}
        for name, child in props.items():
            if name in overrides:
                arguments[name] = overrides[name]
            elif name in required:
                arguments[name] = example_value(child, rng)
            elif rng.random() < 0.35:
                arguments[name] = example_value(child, rng)
        for name, value in overrides.items():
            if name not in arguments:
                arguments[name] = value
        return FunctionCall(api_name=record["name"], arguments=arguments)

    @staticmethod
    def _call_reply(calls: list[FunctionCall], note: str) -> str:
        return f"THOUGHT: {note}\nACTION: call\nCALLS: {render_call_string(calls)}"

    @staticmethod
    def _answer_reply(text: str) -> str:
        return f"THOUGHT: wrap up\nACTION: answer\nTEXT: {text}"

    def _task_tool_result(self, text: str) -> str:
        tools = {record["name"]: record for record in self._tools(text)}
        history = _block(text, "history")
        call_lines = _ASSISTANT_CALL_LINE_RE.findall(history)
        if not call_lines:
            raise RefusalError("tool prompt carried no pending calls")
        calls = parse_call_string(call_lines[-1])
        payload = []
        for call in calls:
            record = tools.get(call.api_name)
            rng = _rng_for(f"result|{call.api_name}|{render_call_string([call])}|{history[-200:]}")
            returns = _schema_of(record.get("returns")) if record else None
            if record is not None and record.get("returns") is not None and returns is not None:
                content = example_value(returns, rng)
            else:
                content = {"result": f"ok_{rng.randrange(10_000, 99_999)}"}
            payload.append({"api_name": call.api_name, "content": content})
        return "Executed the pending calls.\n" + _fenced_json(payload)

    # ------------------------------------------------------------------
    # verification tasks: the autopilot plays a lenient judge
    def _judge(self, text: str) -> str:
        return "Reviewed.\n" + _fenced_json({"passed": True, "rationale": ""})

    _task_judge_hallucination = _judge
    _task_judge_consistency = _judge
    _task_judge_tool_response = _judge

    def _tools(self, text: str) -> list[dict]:
        block = _block(text, "tools")
        if not block.strip():
            return []
        try:
            parsed = json.loads(block)
        except json.JSONDecodeError:
            return []
        return parsed if isinstance(parsed, list) else []
