"""Command-line surface: train, generate, filter, eval, compare.

Every run is reproducible from a JSON config file plus flag overrides; each
command writes a manifest recording config, input hashes, seed and outputs.
Exit codes: 0 ok, 1 config error, 2 data error, 3 numeric divergence,
4 provider failure; one machine-parseable line on stderr either way.
"""
import functools
import json
import logging
import os
import sys
import time
from dataclasses import replace

import click

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .config import TrainConfig, load_run_config
from .corpus import chunk_id, load_word_list, normalize_text, split_chunks
from .errors import (
    ConfigError,
    DataError,
    NumericError,
    ProviderError,
    StyloError,
)
from .evaluate import (
    ExperimentReport,
    ReportRow,
    author_comparison,
    carve_chunks,
    checkpoint_perplexity,
    compare_architectures,
    non_dictionary_rate,
)
from .filtering import ChunkBin, FilterConfig, filter_corpus, make_provider
from .generate import SamplingConfig, generate
from .nn.backend import active_backend
from .nn.params import zero_params
from .train import train_full_pipeline

_EXIT_CODES = (
    (ConfigError, 1, "config"),
    (NumericError, 3, "numeric"),
    (ProviderError, 4, "provider"),
    (DataError, 2, "data"),
)


def _fail(kind: str, code: int, message: str):
    click.echo(f"stylo: error: [{kind}] {message}", err=True)
    sys.exit(code)


def cli_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StyloError as exc:
            for klass, code, kind in _EXIT_CODES:
                if isinstance(exc, klass):
                    _fail(kind, code, str(exc))
            _fail("data", 2, str(exc))

    return wrapper


def _read_text(path, what: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {what} file {path}: {exc}") from exc


def _provider_from(spec: str):
    endpoint = os.environ.get("STYLO_NLI_ENDPOINT")
    if endpoint:
        spec = f"remote:{endpoint}"
    return make_provider(spec)


class BinLock:
    """One process per bin file: refuse to start when a lock exists."""

    def __init__(self, bin_path):
        self.path = str(bin_path) + ".lock" if bin_path else None
        self.fd = None

    def __enter__(self):
        if self.path is None:
            return self
        try:
            self.fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            os.write(self.fd, str(os.getpid()).encode())
        except FileExistsError:
            raise ConfigError(
                f"bin file is locked by another run ({self.path}); "
                "remove the lock if that run is dead"
            ) from None
        return self

    def __exit__(self, *exc):
        if self.fd is not None:
            os.close(self.fd)
            os.remove(self.path)
        return False


def _write_manifest(out_dir, config_snapshot: dict, inputs: dict, seed, outputs: dict):
    manifest = {
        "tool_version": __version__,
        "kernel_backend": active_backend(),
        "created_unix": time.time(),
        "config": config_snapshot,
        "input_hashes": {name: chunk_id(text) for name, text in inputs.items()},
        "seed": seed,
        "outputs": outputs,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_bin(path) -> ChunkBin:
    if path and os.path.exists(path):
        return ChunkBin.load(path)
    return ChunkBin()


@click.group()
@click.version_option(version=__version__, prog_name="stylo")
def main():
    """Character-level author-style language modeling toolkit."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        # the model's matvecs are too small for BLAS thread fan-out
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=1, user_api="blas")
    except Exception:
        pass


@main.command("train")
@click.option("--config", "-c", "config_path", required=True, type=click.Path(), help="JSON run config")
@click.option("--output-dir", default=None, help="Override the config's output_dir")
@click.option("--seed", type=int, default=None, help="Override the config's seed")
@click.option("--dump-losses", is_flag=True, help="Also write raw per-step losses (losses.csv)")
@cli_errors
def cmd_train(config_path, output_dir, seed, dump_losses):
    """Run the full A/B/C pipeline and write checkpoint, log and manifest."""
    run = load_run_config(config_path)
    if output_dir:
        run.output_dir = output_dir
    if seed is not None:
        run.train = replace(run.train, seed=seed)
    os.makedirs(run.output_dir, exist_ok=True)

    author = _read_text(run.author_corpus, "author corpus")
    ground = _read_text(run.ground_corpus, "ground corpus") if run.ground_corpus else None
    neutral = _read_text(run.neutral_corpus, "neutral corpus") if run.neutral_corpus else None
    dictionary = load_word_list(run.dictionary, "dictionary") if run.dictionary else None
    stopwords = load_word_list(run.stopwords, "stopwords") if run.stopwords else None

    provider = _provider_from(run.provider) if ground else None
    fcfg = FilterConfig(
        threshold=run.threshold, bin_path=run.bin_path, max_author_chunks=run.max_author_chunks
    )
    losses = [] if dump_losses else None
    with BinLock(run.bin_path):
        bin = _load_bin(run.bin_path)
        result = train_full_pipeline(
            author, ground, neutral, dictionary, stopwords,
            provider=provider, cfg=run.train, fcfg=fcfg, bin=bin, loss_dump=losses,
            abort_path=os.path.join(run.output_dir, "checkpoint-abort.stylo"),
        )
        if run.bin_path:
            bin.save(run.bin_path)

    ckpt_path = os.path.join(run.output_dir, "checkpoint.stylo")
    save_checkpoint(result.checkpoint, ckpt_path)
    log_path = os.path.join(run.output_dir, "training_log.csv")
    result.log.write_csv(log_path)
    outputs = {"checkpoint": ckpt_path, "training_log": log_path}
    if losses is not None:
        loss_path = os.path.join(run.output_dir, "losses.csv")
        with open(loss_path, "w", encoding="utf-8") as fh:
            fh.write("step,window,loss\n")
            for i, (window, loss) in enumerate(losses):
                fh.write(f"{i},{window},{loss!r}\n")
        outputs["losses"] = loss_path
    if result.filter_result is not None:
        report_path = os.path.join(run.output_dir, "filter_report.json")
        _write_filter_report(result.filter_result, fcfg, report_path)
        outputs["filter_report"] = report_path
    inputs = {"author_corpus": author}
    if ground:
        inputs["ground_corpus"] = ground
    if neutral:
        inputs["neutral_corpus"] = neutral
    _write_manifest(run.output_dir, {"run": os.path.abspath(config_path),
                                     "train": run.train.to_dict()}, inputs,
                    run.train.seed, outputs)
    click.echo(f"checkpoint written to {ckpt_path} "
               f"(steps: {result.steps_taken}, backend: {active_backend()})")


def _write_filter_report(fr, fcfg, path):
    payload = {
        "threshold": fcfg.threshold,
        "premise_role": "author",
        "provider_calls": fr.provider_calls,
        "counts": {
            "accepted": len(fr.accepted),
            "rejected": len(fr.rejected),
            "undecided": len(fr.undecided),
        },
        "decisions": [
            {
                "chunk_id": d.chunk_id,
                "verdict": d.verdict,
                "provider_calls": d.provider_calls,
                "from_bin": d.from_bin,
                "matched_author_index": d.matched_author_index,
                "contradiction_score": d.contradiction_score,
                "error": d.error,
            }
            for d in fr.decisions
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


@main.command("generate")
@click.argument("checkpoint_path", type=click.Path())
@click.option("--prompt", required=True, help="Seed text (must be in vocabulary)")
@click.option("--length", type=int, default=400, show_default=True, help="Characters to generate")
@click.option("--mode", type=click.Choice(["greedy", "temperature", "top_k"]),
              default="temperature", show_default=True)
@click.option("--temperature", type=float, default=0.8, show_default=True)
@click.option("--top-k", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@cli_errors
def cmd_generate(checkpoint_path, prompt, length, mode, temperature, top_k, seed):
    """Generate a continuation of PROMPT from a trained checkpoint."""
    if length < 0:
        raise ConfigError("--length must be >= 0")
    ckpt = load_checkpoint(checkpoint_path)
    cfg = SamplingConfig(mode=mode, temperature=temperature, top_k=top_k, seed=seed)
    if ckpt.config.normalize:
        prompt = normalize_text(prompt)
        if not prompt:
            raise DataError("prompt is empty after normalization")
    click.echo(generate(ckpt, prompt, length, cfg))


@main.command("filter")
@click.option("--ground", required=True, type=click.Path(), help="Ground-truth corpus file")
@click.option("--author", required=True, type=click.Path(), help="Author corpus file")
@click.option("--provider", default="heuristic", show_default=True,
              help="heuristic or remote:<url>")
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--bin", "bin_path", default=None, type=click.Path(), help="Persistent bin file")
@click.option("--output-dir", default="runs/filter", show_default=True)
@click.option("--ground-chunk-len", type=int, default=1000, show_default=True)
@click.option("--author-chunk-len", type=int, default=500, show_default=True)
@click.option("--max-author-chunks", type=int, default=None)
@click.option("--normalize/--no-normalize", default=True, show_default=True)
@cli_errors
def cmd_filter(ground, author, provider, threshold, bin_path, output_dir,
               ground_chunk_len, author_chunk_len, max_author_chunks, normalize):
    """Partition ground-truth chunks by contradiction against the author."""
    os.makedirs(output_dir, exist_ok=True)
    ground_text = _read_text(ground, "ground corpus")
    author_text = _read_text(author, "author corpus")
    if normalize:
        ground_text = normalize_text(ground_text)
        author_text = normalize_text(author_text)
    ground_chunks = split_chunks(ground_text, ground_chunk_len, "ground_truth")
    author_chunks = split_chunks(author_text, author_chunk_len, "author")
    fcfg = FilterConfig(threshold=threshold, bin_path=bin_path,
                        max_author_chunks=max_author_chunks)
    prov = _provider_from(provider)
    with BinLock(bin_path):
        bin = _load_bin(bin_path)
        result = filter_corpus(ground_chunks, author_chunks, prov, fcfg, bin)
        if bin_path:
            bin.save(bin_path)

    outputs = {}
    for name, chunks in (("accepted", result.accepted), ("rejected", result.rejected),
                         ("undecided", result.undecided)):
        path = os.path.join(output_dir, f"{name}.txt")
        with open(path, "w", encoding="utf-8") as fh:
            for c in chunks:
                fh.write(c.id + "\n")
        outputs[name] = path
    report_path = os.path.join(output_dir, "filter_report.json")
    _write_filter_report(result, fcfg, report_path)
    outputs["report"] = report_path
    _write_manifest(output_dir, {"threshold": threshold, "provider": provider},
                    {"ground": ground_text, "author": author_text}, None, outputs)
    click.echo(
        f"accepted {len(result.accepted)}, rejected {len(result.rejected)}, "
        f"undecided {len(result.undecided)} ({result.provider_calls} provider calls)"
    )


@main.command("eval")
@click.argument("checkpoint_path", type=click.Path())
@click.option("--test", "test_path", required=True, type=click.Path(), help="Same-author test text")
@click.option("--other-author", "other_path", default=None, type=click.Path())
@click.option("--dictionary", "dictionary_path", default=None, type=click.Path())
@click.option("--experiments", type=int, default=5, show_default=True)
@click.option("--chunk-size", type=int, default=1000, show_default=True)
@click.option("--output-dir", default="runs/eval", show_default=True)
@click.option("--dump-probs", is_flag=True, help="Write per-position probabilities (probs.csv)")
@click.option("--zero-init", is_flag=True,
              help="Debug: replace weights with zeros (uniform model)")
@cli_errors
def cmd_eval(checkpoint_path, test_path, other_path, dictionary_path, experiments,
             chunk_size, output_dir, dump_probs, zero_init):
    """Perplexity, author comparison and non-dictionary rate reports."""
    os.makedirs(output_dir, exist_ok=True)
    ckpt = load_checkpoint(checkpoint_path)
    if zero_init:
        ckpt.params = zero_params(ckpt.params.arch, ckpt.params.hidden, ckpt.params.vocab_size)
    test_text = _read_text(test_path, "test corpus")
    if ckpt.config.normalize:
        test_text = normalize_text(test_text)

    dump = [] if dump_probs else None
    loss, pp = checkpoint_perplexity(ckpt, test_text, prob_dump=dump)
    rows = [ReportRow(0, "test", loss, pp)]
    metadata = {
        "checkpoint": os.path.abspath(checkpoint_path),
        "checkpoint_step": ckpt.step,
        "seq_len": ckpt.config.seq_len,
        "zero_init": zero_init,
        "pad_char": ckpt.pad_char,
    }
    outputs = {}

    if dictionary_path:
        dictionary = load_word_list(dictionary_path, "dictionary")
        rows[0].non_dictionary_rate = non_dictionary_rate(test_text, dictionary)

    if other_path:
        other_text = _read_text(other_path, "other-author corpus")
        if ckpt.config.normalize:
            other_text = normalize_text(other_text)
        same_chunks = carve_chunks(test_text, experiments, chunk_size)
        other_chunks = carve_chunks(other_text, experiments, chunk_size)
        comparison = author_comparison(
            ckpt.params, ckpt.vocab, ckpt.config.seq_len, same_chunks, other_chunks, experiments
        )
        rows.extend(comparison.rows)
        metadata.update(comparison.metadata)

    report = ExperimentReport(rows, metadata)
    csv_path = os.path.join(output_dir, "eval_report.csv")
    json_path = os.path.join(output_dir, "eval_report.json")
    report.write_csv(csv_path)
    report.write_json(json_path)
    outputs.update({"csv": csv_path, "json": json_path})
    if dump is not None:
        probs_path = os.path.join(output_dir, "probs.csv")
        with open(probs_path, "w", encoding="utf-8") as fh:
            fh.write("position,char,prob\n")
            for pos, ch, p in dump:
                fh.write(f"{pos},{json.dumps(ch, ensure_ascii=False)},{p!r}\n")
        outputs["probs"] = probs_path
    _write_manifest(output_dir, {"experiments": experiments, "chunk_size": chunk_size},
                    {"test": test_text}, None, outputs)
    click.echo(f"loss {loss:.6f}, perplexity {pp:.6f} -> {json_path}")


@main.command("compare")
@click.option("--config", "-c", "config_path", required=True, type=click.Path())
@click.option("--test", "test_path", required=True, type=click.Path(), help="Held-out text")
@click.option("--architectures", default="bilstm,lstm_uni,rnn", show_default=True)
@click.option("--seeds", default="0,1,2", show_default=True)
@click.option("--output-dir", default=None)
@cli_errors
def cmd_compare(config_path, test_path, architectures, seeds, output_dir):
    """Train each architecture under one budget and rank test perplexity."""
    run = load_run_config(config_path)
    out_dir = output_dir or run.output_dir
    os.makedirs(out_dir, exist_ok=True)
    author = _read_text(run.author_corpus, "author corpus")
    test_text = _read_text(test_path, "test corpus")
    archs = tuple(a.strip() for a in architectures.split(",") if a.strip())
    seed_list = tuple(int(s) for s in seeds.split(",") if s.strip())
    report = compare_architectures(author, test_text, run.train, seeds=seed_list,
                                   architectures=archs)
    csv_path = os.path.join(out_dir, "comparison.csv")
    json_path = os.path.join(out_dir, "comparison.json")
    report.write_csv(csv_path)
    report.write_json(json_path)
    _write_manifest(out_dir, {"architectures": list(archs), "seeds": list(seed_list),
                              "train": run.train.to_dict()},
                    {"author": author, "test": test_text}, run.train.seed,
                    {"csv": csv_path, "json": json_path})
    ranking = " <= ".join(report.metadata["ranking"])
    click.echo(f"perplexity ranking: {ranking} -> {json_path}")


if __name__ == "__main__":
    main()
