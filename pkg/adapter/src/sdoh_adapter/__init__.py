"""Thin inference adapter around a seq2seq checkpoint."""

__version__ = "0.1.0"

from .inference import (
    AdapterError,
    GenerationError,
    InferenceRequest,
    InferenceResponse,
    ModelLoadError,
    Seq2SeqGenerator,
    generate_batch,
    generate_records,
    read_requests,
)
from .server import InferenceServer, serve
