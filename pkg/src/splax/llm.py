"""Chat-model prompting baselines: direct prompting and a two-step chain.

Direct mode sends one extraction prompt per question. Chain mode first runs
the same extraction prompt, then feeds its post-processed output into a
second prompt that compresses the answer down to the key information. The
endpoint speaks the de-facto chat-completions JSON protocol; temperature is
pinned to 0 for determinism.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import requests

from .data import QaExample
from .errors import SplaxError, TemplateError

DIRECT_PROMPT_BODY = """\
Given the following passage, extract the answer to the following question from the passage.
You should only respond with the EXACT SAME text from part of the passage (no slice within a single word). Make sure your answer directly addresses the question.
NO EXPLANATION NEEDED. DO NOT REPEAT the question or include unnecessary information.
Passage: {passage}
Question: {question}"""

CHAIN2_PROMPT_BODY = """\
Given the question and answer below, extract and compress the answer to include only the key information needed to directly answer the question.
DO NOT modify the text or add details; only select the most relevant portions of the text.

First, ensure the response is MEANINGFUL and directly addresses the question (avoid trivial statements like 'AAA is AAA' or 'AAA is short for AAA').

Second, ensure the response is as concise as possible, following these guidelines:
- Keep it to only a few words, if possible.
- Directly answer the question without repeating the question statement or completing a sentence unnecessarily.
- Avoid slicing within a single word; keep words whole.
- Only include conjunctions, prepositions, and linking words if specifically asked (e.g., respond with '2016' instead of 'since 2016' if not specifically required).
- Retain articles only if they appear in the original text; do not add them yourself.
- For questions asking for specific information (e.g., number, date, name, or location), respond with only that detail, omitting extra context (e.g., '2' instead of '2 apples').
- If asked for a team name, brand name, or other proper names, ensure the full name is intact without slicing.

Respond with ONLY the compressed answer in the EXACT SAME text, without modifications, extra words, or explanations.

Question: {question}
Answer: {pred}"""

_REQUIRED_PLACEHOLDERS = {
    "direct": ("{passage}", "{question}"),
    "chain1": ("{passage}", "{question}"),
    "chain2": ("{question}", "{pred}"),
}


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str

    def __post_init__(self):
        if self.name not in _REQUIRED_PLACEHOLDERS:
            raise TemplateError(f"unknown template name {self.name!r}")
        for ph in _REQUIRED_PLACEHOLDERS[self.name]:
            if ph not in self.body:
                raise TemplateError(f"template {self.name!r} is missing placeholder {ph}")


DIRECT_TEMPLATE = PromptTemplate("direct", DIRECT_PROMPT_BODY)
CHAIN1_TEMPLATE = PromptTemplate("chain1", DIRECT_PROMPT_BODY)  # chain step 1 reuses the direct prompt
CHAIN2_TEMPLATE = PromptTemplate("chain2", CHAIN2_PROMPT_BODY)


def render_prompt(
    template: PromptTemplate,
    passage: str | None = None,
    question: str | None = None,
    pred: str | None = None,
) -> str:
    """Substitute placeholders verbatim; no other mutation of the template."""
    values = {"{passage}": passage, "{question}": question, "{pred}": pred}
    rendered = template.body
    for ph in _REQUIRED_PLACEHOLDERS[template.name]:
        if values[ph] is None:
            raise TemplateError(f"template {template.name!r} requires a value for {ph}")
        # plain replace: substituted text may itself contain braces
        rendered = rendered.replace(ph, values[ph])
    return rendered


def postprocess_response(raw: str, context: str) -> tuple[str, bool]:
    """Clean a model response and flag format violations.

    Trims whitespace, drops a leading "Answer:" label, strips symmetric
    surrounding quotes. The violation flag is set iff the cleaned answer is
    not an exact substring of the context.
    """
    answer = raw.strip()
    if answer.lower().startswith("answer:"):
        answer = answer[len("answer:") :].strip()
    quote_pairs = (('"', '"'), ("'", "'"), ("“", "”"), ("‘", "’"))
    stripped = True
    while stripped and len(answer) >= 2:
        stripped = False
        for open_q, close_q in quote_pairs:
            if answer.startswith(open_q) and answer.endswith(close_q):
                answer = answer[1:-1].strip()
                stripped = True
                break
    return answer, answer not in context


@dataclass
class LlmRunRecord:
    """Everything observed for one question: raw responses, per-call latency,
    the final cleaned answer, and whether it violated the extractive format."""

    qid: str
    mode: str
    raw_responses: list[str]
    final_answer: str
    latency_seconds: list[float]
    format_violation: bool
    error: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "qid": self.qid,
            "mode": self.mode,
            "raw_responses": self.raw_responses,
            "final_answer": self.final_answer,
            "latency_seconds": self.latency_seconds,
            "format_violation": self.format_violation,
            "error": self.error,
        }


def load_few_shot_messages(path: str | Path) -> list[dict]:
    """Load exemplar chat messages to prepend to every conversation.

    The file is a JSON array of ``{"role": ..., "content": ...}`` objects;
    an extension point, since no exemplar texts ship with the package.
    """
    messages = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(messages, list) or not all(
        isinstance(m, dict) and {"role", "content"} <= set(m) for m in messages
    ):
        raise SplaxError(f"{path}: expected a JSON array of role/content messages")
    return messages


class ChatCompletionClient:
    """Minimal chat-completions client: one user message in, text out."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        api_key: str | None = None,
        timeout: float = 60.0,
        session: requests.Session | None = None,
        few_shot_messages: list[dict] | None = None,
    ):
        base = endpoint.rstrip("/")
        self.url = base if base.endswith("/chat/completions") else f"{base}/v1/chat/completions"
        self.model = model
        self.timeout = timeout
        self.session = session or requests.Session()
        self.headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self.few_shot_messages = list(few_shot_messages or [])

    def complete(self, prompt: str) -> tuple[str, float]:
        """Returns (response text, latency in seconds); one retry on transport failure."""
        payload = {
            "model": self.model,
            "messages": self.few_shot_messages + [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        last: Exception | None = None
        for _ in range(2):
            started = time.perf_counter()
            try:
                resp = self.session.post(
                    self.url, json=payload, headers=self.headers, timeout=self.timeout
                )
                resp.raise_for_status()
                text = resp.json()["choices"][0]["message"]["content"]
                return text, time.perf_counter() - started
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last = exc
        raise SplaxError(f"chat completion failed: {last}")


def api_key_from_env(env=os.environ) -> str | None:
    return env.get("SPLAX_API_KEY") or env.get("OPENAI_API_KEY")


def run_llm_eval(
    examples: list[QaExample],
    client: ChatCompletionClient,
    mode: str,
    *,
    max_in_flight: int = 4,
) -> tuple[dict[str, str], list[LlmRunRecord]]:
    """Run the baseline over a dataset.

    Direct mode issues exactly one call per question, chain mode exactly two
    (the steps for a single question are strictly sequential). Transport
    failures produce a per-question failure record and the run continues; if
    every question fails, the run itself fails.
    """
    if mode not in ("direct", "chain"):
        raise SplaxError(f"mode must be 'direct' or 'chain', got {mode!r}")

    def run_one(ex: QaExample) -> LlmRunRecord:
        raws: list[str] = []
        latencies: list[float] = []
        try:
            prompt = render_prompt(DIRECT_TEMPLATE, passage=ex.context, question=ex.question)
            text, latency = client.complete(prompt)
            raws.append(text)
            latencies.append(latency)
            answer, violation = postprocess_response(text, ex.context)
            if mode == "chain":
                prompt2 = render_prompt(CHAIN2_TEMPLATE, question=ex.question, pred=answer)
                text2, latency2 = client.complete(prompt2)
                raws.append(text2)
                latencies.append(latency2)
                answer, violation = postprocess_response(text2, ex.context)
            return LlmRunRecord(ex.qid, mode, raws, answer, latencies, violation)
        except SplaxError as exc:
            return LlmRunRecord(ex.qid, mode, raws, "", latencies, True, error=str(exc))

    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        records = list(pool.map(run_one, examples))

    preds = {r.qid: r.final_answer for r in records if r.error is None}
    if examples and not preds:
        raise SplaxError(f"all {len(examples)} questions failed against the endpoint")
    return preds, records


def write_records(records: list[LlmRunRecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), ensure_ascii=False) + "\n")
