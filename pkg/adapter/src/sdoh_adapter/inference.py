"""Run a fine-tuned sequence-to-sequence checkpoint over section texts.

The adapter is deliberately thin: it never post-processes generated text
(alignment and normalization live in the decoding toolkit) and it defaults to
greedy decoding so batch runs are reproducible. Output records follow the
predictions schema consumed downstream: {"doc_id": ..., "generated": ...},
with an additional "error" field on records whose generation failed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


class AdapterError(Exception):
    pass


class ModelLoadError(AdapterError):
    pass


class GenerationError(AdapterError):
    pass


@dataclass(frozen=True)
class InferenceRequest:
    doc_id: str
    text: str
    max_new_tokens: int | None = None


@dataclass(frozen=True)
class InferenceResponse:
    doc_id: str
    generated: str
    error: str | None = None

    def to_json(self) -> str:
        record: dict = {"doc_id": self.doc_id, "generated": self.generated}
        if self.error is not None:
            record["error"] = self.error
        return json.dumps(record, ensure_ascii=False)


class Seq2SeqGenerator:
    """A loaded checkpoint plus tokenizer, generating one text at a time."""

    def __init__(
        self,
        model_path: str | Path,
        max_new_tokens: int = 256,
        do_sample: bool = False,
        seed: int = 0,
    ):
        try:
            import torch
            from transformers import AutoModelForSeq2SeqLM, AutoTokenizer, logging as hf_logging
            from transformers.utils import logging as hf_utils_logging

            hf_logging.set_verbosity_error()
            hf_utils_logging.disable_progress_bar()
            self._torch = torch
            self.tokenizer = AutoTokenizer.from_pretrained(str(model_path))
            self.model = AutoModelForSeq2SeqLM.from_pretrained(str(model_path))
            self.model.eval()
        except Exception as exc:
            raise ModelLoadError(f"cannot load checkpoint at {model_path}: {exc}") from exc
        self.max_new_tokens = max_new_tokens
        self.do_sample = do_sample
        self.seed = seed

    def generate(self, text: str, max_new_tokens: int | None = None) -> str:
        torch = self._torch
        try:
            encoded = self.tokenizer(text, return_tensors="pt", truncation=True)
            if self.do_sample:
                torch.manual_seed(self.seed)
            with torch.no_grad():
                output = self.model.generate(
                    **encoded,
                    max_new_tokens=max_new_tokens or self.max_new_tokens,
                    do_sample=self.do_sample,
                    num_beams=1,
                )
            return self.tokenizer.decode(output[0], skip_special_tokens=True)
        except Exception as exc:
            raise GenerationError(str(exc)) from exc


def read_requests(path: str | Path) -> list[InferenceRequest]:
    """Parse an input JSONL of {"doc_id", "text", optional "max_new_tokens"}.

    A malformed JSON line is a hard error (the file is a precondition);
    semantic problems such as empty text are reported per record downstream.
    """
    requests = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AdapterError(f"{path}:{line_no}: bad JSON: {exc}") from exc
        requests.append(
            InferenceRequest(
                doc_id=str(record.get("doc_id", "")),
                text=record.get("text", "") or "",
                max_new_tokens=record.get("max_new_tokens"),
            )
        )
    return requests


def generate_records(
    requests: Iterable[InferenceRequest], generator
) -> list[InferenceResponse]:
    """One response per request, order preserved; failures become error records."""
    responses = []
    for request in requests:
        if not request.text.strip():
            responses.append(InferenceResponse(request.doc_id, "", error="empty input text"))
            continue
        try:
            generated = generator.generate(request.text, request.max_new_tokens)
        except GenerationError as exc:
            responses.append(InferenceResponse(request.doc_id, "", error=str(exc)))
        else:
            responses.append(InferenceResponse(request.doc_id, generated))
    return responses


def generate_batch(
    in_path: str | Path,
    out_path: str | Path,
    model_path: str | Path,
    max_new_tokens: int = 256,
    do_sample: bool = False,
    seed: int = 0,
) -> list[InferenceResponse]:
    """Run the checkpoint over an input JSONL and write the predictions JSONL."""
    generator = Seq2SeqGenerator(
        model_path, max_new_tokens=max_new_tokens, do_sample=do_sample, seed=seed
    )
    responses = generate_records(read_requests(in_path), generator)
    payload = "\n".join(response.to_json() for response in responses)
    Path(out_path).write_text(payload + ("\n" if payload else ""), encoding="utf-8")
    return responses
