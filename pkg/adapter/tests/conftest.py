import pytest


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """A smoke checkpoint: randomly initialized tiny T5 with a byte tokenizer.

    The byte-level tokenizer needs no vocabulary files, so the checkpoint is
    fully self-contained and CPU-friendly; its generations are noise, which is
    exactly what the downstream contract has to survive.
    """
    import torch
    from transformers import ByT5Tokenizer, T5Config, T5ForConditionalGeneration

    directory = tmp_path_factory.mktemp("tiny-checkpoint")
    tokenizer = ByT5Tokenizer()
    config = T5Config(
        vocab_size=len(tokenizer),
        d_model=32,
        d_kv=8,
        d_ff=64,
        num_layers=2,
        num_heads=2,
        decoder_start_token_id=0,
    )
    torch.manual_seed(0)
    model = T5ForConditionalGeneration(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return directory


class FakeGenerator:
    """Stand-in for a loaded checkpoint in unit tests."""

    def __init__(self, reply="[NONE]", fail_on=frozenset()):
        self.reply = reply
        self.fail_on = fail_on
        self.calls = []

    def generate(self, text, max_new_tokens=None):
        from sdoh_adapter.inference import GenerationError

        self.calls.append((text, max_new_tokens))
        if text in self.fail_on:
            raise GenerationError(f"forced failure for {text!r}")
        return self.reply


@pytest.fixture()
def fake_generator():
    return FakeGenerator()
