"""JSONL persistence with a fixed, deterministic record layout.

samples.jsonl record shape (one object per line)::

    {
      "sample_id": "s-0001",
      "system_prompt": "...",
      "tools": [<api record>, ...],
      "turns": [
        {"role": "system", "content": "..."},
        {"role": "user", "content": "..."},
        {"role": "assistant",
         "calls": [{"api_name": "f", "arguments": {"x": 1}}],
         "call_string": "[f(x=1)]"},
        {"role": "tool", "tool_payload": [{"api_name": "f", "content": {...}}]},
        {"role": "assistant", "content": "..."}
      ],
      "dialog_type": "single",
      "complexity": 0.41,
      "provenance": {"dialog_type": "single", "rounds_used": 0, "votes": 3, "seed": 7}
    }

Assistant call turns are stored twice on purpose: structured under ``calls``
and rendered under ``call_string`` so the file stays greppable by hand. The
structured form is authoritative; ``call_string`` is regenerated on write.
Serializing the same sample twice yields identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .calls import FunctionCall, render_call_string
from .dialog import DataSample, DialogTurn
from .schema import ApiDefinition, api_from_record, api_to_record


def dump_record(record: Mapping) -> str:
    return json.dumps(record, ensure_ascii=False)


def write_jsonl(path: str | Path, records: Iterable[Mapping]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(dump_record(record))
            handle.write("\n")
            count += 1
    return count


def append_jsonl(path: str | Path, record: Mapping) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as handle:
        handle.write(dump_record(record))
        handle.write("\n")


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                yield json.loads(line)


def turn_to_record(turn: DialogTurn) -> dict:
    record: dict = {"role": turn.role}
    if turn.role == "assistant" and turn.calls:
        record["calls"] = [
            {"api_name": call.api_name, "arguments": dict(call.arguments)} for call in turn.calls
        ]
        record["call_string"] = render_call_string(turn.calls)
    elif turn.role == "tool":
        record["tool_payload"] = turn.tool_payload
    else:
        record["content"] = turn.content
    return record


def turn_from_record(record: Mapping) -> DialogTurn:
    role = record.get("role", "")
    if "calls" in record:
        calls = [
            FunctionCall(api_name=c.get("api_name", ""), arguments=dict(c.get("arguments", {})))
            for c in record["calls"]
        ]
        return DialogTurn(role=role, calls=calls)
    if "tool_payload" in record:
        return DialogTurn(role=role, tool_payload=record["tool_payload"])
    return DialogTurn(role=role, content=record.get("content"))


def sample_to_record(sample: DataSample) -> dict:
    return {
        "sample_id": sample.sample_id,
        "system_prompt": sample.system_prompt,
        "tools": [api_to_record(api) for api in sample.tool_list],
        "turns": [turn_to_record(turn) for turn in sample.turns],
        "dialog_type": sample.dialog_type,
        "complexity": sample.complexity,
        "provenance": sample.provenance,
    }


def sample_from_record(record: Mapping) -> DataSample:
    return DataSample(
        sample_id=record.get("sample_id", ""),
        system_prompt=record.get("system_prompt", ""),
        tool_list=[api_from_record(r) for r in record.get("tools", [])],
        turns=[turn_from_record(r) for r in record.get("turns", [])],
        dialog_type=record.get("dialog_type", ""),
        complexity=record.get("complexity"),
        provenance=dict(record.get("provenance", {})),
    )


def write_apis(path: str | Path, apis: Iterable[ApiDefinition]) -> int:
    return write_jsonl(path, (api_to_record(api) for api in apis))


def read_apis(path: str | Path) -> list[ApiDefinition]:
    return [api_from_record(record) for record in read_jsonl(path)]


def write_samples(path: str | Path, samples: Iterable[DataSample]) -> int:
    return write_jsonl(path, (sample_to_record(sample) for sample in samples))


def read_samples(path: str | Path) -> list[DataSample]:
    return [sample_from_record(record) for record in read_jsonl(path)]
