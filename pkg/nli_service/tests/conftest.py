import os

import pytest

VOCAB = """[PAD]
[UNK]
[CLS]
[SEP]
[MASK]
a
man
is
sleeping
awake
the
sky
blue
not
rain
falls
dog
runs
fast
slow
water
cold
warm
light
dark
""".strip().splitlines()


def build_tiny_mnli(dirpath, id2label=None):
    """Construct a small randomly initialized MNLI-labeled classifier plus a
    word-level tokenizer, saved as a loadable checkpoint directory. No
    network involved; weights are seeded for determinism."""
    import torch
    from transformers import BertConfig, BertForSequenceClassification, BertTokenizer

    os.makedirs(dirpath, exist_ok=True)
    vocab_file = os.path.join(dirpath, "vocab.txt")
    with open(vocab_file, "w") as fh:
        fh.write("\n".join(VOCAB) + "\n")
    if id2label is None:
        id2label = {0: "CONTRADICTION", 1: "NEUTRAL", 2: "ENTAILMENT"}
    torch.manual_seed(0)
    cfg = BertConfig(
        vocab_size=len(VOCAB), hidden_size=32, num_hidden_layers=1,
        num_attention_heads=2, intermediate_size=64, max_position_embeddings=128,
        num_labels=3, id2label=id2label,
        label2id={v: k for k, v in id2label.items()},
    )
    model = BertForSequenceClassification(cfg)
    model.save_pretrained(dirpath)
    BertTokenizer(vocab_file).save_pretrained(dirpath)
    return dirpath


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    return build_tiny_mnli(str(tmp_path_factory.mktemp("tiny_mnli")))


@pytest.fixture(scope="session")
def mismatched_model_dir(tmp_path_factory):
    return build_tiny_mnli(
        str(tmp_path_factory.mktemp("bad_mnli")),
        id2label={0: "LABEL_0", 1: "LABEL_1", 2: "LABEL_2"},
    )
