"""MNLI model wrapper: loading, label-order pinning, batched inference.

MNLI checkpoints disagree on label index order, so we never assume one: the
checkpoint's id2label map is resolved by NAME at load time and the three
expected labels must all be present, otherwise the service refuses to serve.
A silently swapped label map would invert every contradiction decision
downstream.
"""
import logging
from dataclasses import dataclass

logger = logging.getLogger(__name__)

EXPECTED_LABELS = ("contradiction", "neutral", "entailment")


class LabelMapError(RuntimeError):
    """The checkpoint's labels are not the three MNLI classes."""


@dataclass
class PairVerdict:
    contradiction: float
    neutral: float
    entailment: float
    truncated: bool

    def as_json(self) -> dict:
        return {
            "contradiction": self.contradiction,
            "neutral": self.neutral,
            "entailment": self.entailment,
            "truncated": self.truncated,
        }


def resolve_label_indices(id2label: dict) -> dict:
    """Map each expected label name to its logit index, case-insensitively."""
    by_name = {}
    for idx, raw in id2label.items():
        name = str(raw).strip().lower()
        by_name[name] = int(idx)
    missing = [label for label in EXPECTED_LABELS if label not in by_name]
    if missing:
        raise LabelMapError(
            f"checkpoint labels {sorted(by_name)} are missing {missing}; "
            "refusing to serve a model whose label order cannot be pinned"
        )
    return {label: by_name[label] for label in EXPECTED_LABELS}


class MnliModel:
    """Loaded classifier plus tokenizer, inference in eval mode on CPU/GPU."""

    def __init__(self, model_id: str, max_seq_len: int, device: str = "cpu"):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self.model_id = model_id
        self.max_seq_len = max_seq_len
        self.device = device
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForSequenceClassification.from_pretrained(model_id)
        self.model.to(device)
        self.model.eval()
        self.label_index = resolve_label_indices(self.model.config.id2label)
        self._torch = torch
        logger.info("loaded %s with label map %s", model_id, self.label_index)

    def classify_pairs(self, pairs) -> list:
        """Softmaxed three-way probabilities for each (premise, hypothesis)."""
        torch = self._torch
        premises = [p for p, _ in pairs]
        hypotheses = [h for _, h in pairs]
        # flag truncation before re-encoding with the cap applied
        untruncated = self.tokenizer(premises, hypotheses, truncation=False)
        flags = [len(ids) > self.max_seq_len for ids in untruncated["input_ids"]]
        enc = self.tokenizer(
            premises, hypotheses, truncation=True, max_length=self.max_seq_len,
            padding=True, return_tensors="pt",
        ).to(self.device)
        with torch.no_grad():
            logits = self.model(**enc).logits
        probs = torch.softmax(logits, dim=-1).cpu().numpy()
        out = []
        for row, truncated in zip(probs, flags):
            out.append(PairVerdict(
                contradiction=float(row[self.label_index["contradiction"]]),
                neutral=float(row[self.label_index["neutral"]]),
                entailment=float(row[self.label_index["entailment"]]),
                truncated=bool(truncated),
            ))
        return out
