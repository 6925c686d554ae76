"""Word-level top-k over a local transformers causal language model."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import torch
from transformers import AutoModelForCausalLM, AutoTokenizer

from .wordize import PieceLm, WordCandidate, wordize


class BackendError(ValueError):
    """A request the model cannot serve (not a transport failure)."""


class WordBackend:
    def __init__(
        self,
        model_dir: str | Path,
        max_pieces: int = 6,
        branch_factor: int | None = None,
    ):
        self.tokenizer = AutoTokenizer.from_pretrained(str(model_dir))
        self.model = AutoModelForCausalLM.from_pretrained(str(model_dir))
        self.model.eval()
        if self.tokenizer.eos_token is None:
            raise BackendError("model tokenizer defines no EOS token")
        vocab = len(self.tokenizer)
        pieces = tuple(self.tokenizer.convert_ids_to_tokens(list(range(vocab))))
        self._lm = PieceLm(
            step=self._step,
            pieces=pieces,
            special_ids=frozenset(self.tokenizer.all_special_ids),
            eos_id=int(self.tokenizer.eos_token_id),
            text=self._text,
        )
        self.max_pieces = max_pieces
        self.branch_factor = branch_factor

    @property
    def eos_token(self) -> str:
        return self.tokenizer.eos_token

    def top_k(self, context: Sequence[str], k: int) -> list[WordCandidate]:
        if k < 1:
            raise BackendError("k must be at least 1")
        text = " ".join(context).strip()
        if not text:
            raise BackendError("context is empty")
        ids = tuple(self.tokenizer.encode(text, add_special_tokens=False))
        if not ids:
            raise BackendError("context produced no model tokens")
        return wordize(
            self._lm,
            ids,
            k,
            branch_factor=self.branch_factor,
            max_pieces=self.max_pieces,
        )

    def _step(self, prefix: tuple[int, ...]) -> list[float]:
        input_ids = torch.tensor([list(prefix)], dtype=torch.long)
        with torch.no_grad():
            logits = self.model(input_ids=input_ids).logits[0, -1, :]
        return torch.log_softmax(logits.double(), dim=-1).tolist()

    def _text(self, ids: Sequence[int]) -> str:
        return self.tokenizer.decode(list(ids), skip_special_tokens=False)
