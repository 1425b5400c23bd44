"""toolforge: synthesize, verify, and sample function-calling training corpora.

The package is organized around three pipeline stages plus shared plumbing:

- ``toolforge.core``: data model (API schemas, dialogs, call strings, JSONL).
- ``toolforge.gateway``: LLM backend abstraction (scripted mock, offline
  autopilot, OpenAI-compatible HTTP client).
- ``toolforge.tss``: tool synthesis (context tree, example buffer, evolution).
- ``toolforge.sdg``: self-guided dialog generation and complexity scoring.
- ``toolforge.dlv``: dual-layer verification (rule catalog plus model judges).
- ``toolforge.pipeline`` and ``toolforge.cli``: orchestration, samplers, stats.
"""

__version__ = "0.1.0"
