"""Service configuration from environment variables and an optional flags
file (argparse @file syntax: one flag per line)."""
import argparse
import os
from dataclasses import dataclass

DEFAULT_MODEL = "roberta-large-mnli"


@dataclass
class ServiceConfig:
    model: str = DEFAULT_MODEL
    host: str = "127.0.0.1"
    port: int = 8731
    max_batch: int = 32
    max_seq_len: int = 512  # token budget per pair; longer pairs are truncated
    max_input_chars: int = 20_000  # hard cap per text field, 413 beyond
    device: str = "cpu"

    def __post_init__(self):
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        if self.max_seq_len < 8:
            raise ValueError("max_seq_len must be >= 8")


def from_env() -> ServiceConfig:
    env = os.environ
    return ServiceConfig(
        model=env.get("NLI_MODEL", DEFAULT_MODEL),
        host=env.get("NLI_HOST", "127.0.0.1"),
        port=int(env.get("NLI_PORT", "8731")),
        max_batch=int(env.get("NLI_MAX_BATCH", "32")),
        max_seq_len=int(env.get("NLI_MAX_SEQ_LEN", "512")),
        max_input_chars=int(env.get("NLI_MAX_INPUT_CHARS", "20000")),
        device=env.get("NLI_DEVICE", "cpu"),
    )


def parse_args(argv=None) -> ServiceConfig:
    """CLI flags override env; @flags-file expands to one flag per line."""
    base = from_env()
    parser = argparse.ArgumentParser(
        prog="nli-service",
        description="Serve an MNLI classifier over the contradiction-check wire protocol",
        fromfile_prefix_chars="@",
    )
    parser.add_argument("--model", default=base.model)
    parser.add_argument("--host", default=base.host)
    parser.add_argument("--port", type=int, default=base.port)
    parser.add_argument("--max-batch", type=int, default=base.max_batch)
    parser.add_argument("--max-seq-len", type=int, default=base.max_seq_len)
    parser.add_argument("--max-input-chars", type=int, default=base.max_input_chars)
    parser.add_argument("--device", default=base.device)
    args = parser.parse_args(argv)
    return ServiceConfig(
        model=args.model, host=args.host, port=args.port, max_batch=args.max_batch,
        max_seq_len=args.max_seq_len, max_input_chars=args.max_input_chars,
        device=args.device,
    )
