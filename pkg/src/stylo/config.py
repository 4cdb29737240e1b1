"""Run configuration: the training hyperparameters and the JSON run file the
CLI consumes. A run file pins everything needed to reproduce a run; CLI
flags override individual fields."""
import json
from dataclasses import asdict, dataclass, field

from .errors import ConfigError
from .nn.params import ARCHITECTURES
from .optim import OptimConfig


@dataclass
class TrainConfig:
    seq_len: int = 100
    hidden: int = 100
    architecture: str = "bilstm"
    steps_author: int = 5000
    steps_ground: int = 1000
    steps_neutral: int = 500
    log_window: int = 100  # steps averaged per training-log row
    optim: OptimConfig = field(default_factory=OptimConfig)
    seed: int = 0
    stride: int = 1
    normalize: bool = True
    author_chunk_len: int = 500  # premise size for the contradiction scan
    ground_chunk_len: int = 1000
    neutral_chunk_len: int = 300
    max_per_word: int = 2
    lr_ground: float = None  # None: same learning rate as the author phase
    lr_neutral: float = None

    def __post_init__(self):
        if isinstance(self.optim, dict):
            self.optim = OptimConfig(**self.optim)
        if self.seq_len < 1 or self.hidden < 1:
            raise ConfigError("seq_len and hidden must be positive")
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(
                f"unknown architecture {self.architecture!r}; expected one of {ARCHITECTURES}"
            )
        if min(self.steps_author, self.steps_ground, self.steps_neutral) < 0:
            raise ConfigError("phase step counts must be >= 0")
        if self.log_window < 1:
            raise ConfigError("log_window must be >= 1")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.neutral_chunk_len < self.seq_len + 1:
            raise ConfigError(
                f"neutral_chunk_len must be >= seq_len + 1 = {self.seq_len + 1}, "
                f"got {self.neutral_chunk_len}"
            )
        for name in ("lr_ground", "lr_neutral"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ConfigError(f"{name} must be positive when set")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"bad train config: {exc}") from exc


@dataclass
class RunConfig:
    """Parsed run file: corpora paths, word lists, provider and output."""

    author_corpus: str
    ground_corpus: str = None
    neutral_corpus: str = None
    dictionary: str = None
    stopwords: str = None
    provider: str = "heuristic"  # heuristic | remote:<url>
    threshold: float = 0.5
    bin_path: str = None
    max_author_chunks: int = None
    output_dir: str = "runs/out"
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if isinstance(self.train, dict):
            self.train = TrainConfig.from_dict(self.train)


def load_run_config(path) -> RunConfig:
    """Read and validate a JSON run file (see docs/config.schema.json)."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    _validate_schema(raw, path)
    try:
        return RunConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad config file {path}: {exc}") from exc


def _validate_schema(raw: dict, path):
    import jsonschema

    try:
        jsonschema.validate(raw, _SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config file {path} invalid at {where}: {exc.message}") from exc


# Kept in sync with docs/config.schema.json (the committed copy of this).
_SCHEMA = {
    "type": "object",
    "required": ["author_corpus"],
    "additionalProperties": False,
    "properties": {
        "author_corpus": {"type": "string"},
        "ground_corpus": {"type": ["string", "null"]},
        "neutral_corpus": {"type": ["string", "null"]},
        "dictionary": {"type": ["string", "null"]},
        "stopwords": {"type": ["string", "null"]},
        "provider": {"type": "string", "pattern": "^(heuristic|remote:.+)$"},
        "threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "bin_path": {"type": ["string", "null"]},
        "max_author_chunks": {"type": ["integer", "null"], "minimum": 1},
        "output_dir": {"type": "string"},
        "train": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seq_len": {"type": "integer", "minimum": 1},
                "hidden": {"type": "integer", "minimum": 1},
                "architecture": {"enum": list(ARCHITECTURES)},
                "steps_author": {"type": "integer", "minimum": 0},
                "steps_ground": {"type": "integer", "minimum": 0},
                "steps_neutral": {"type": "integer", "minimum": 0},
                "log_window": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "stride": {"type": "integer", "minimum": 1},
                "normalize": {"type": "boolean"},
                "author_chunk_len": {"type": "integer", "minimum": 1},
                "ground_chunk_len": {"type": "integer", "minimum": 1},
                "neutral_chunk_len": {"type": "integer", "minimum": 2},
                "max_per_word": {"type": "integer", "minimum": 1},
                "lr_ground": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "lr_neutral": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "optim": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "algorithm": {"enum": ["adam", "sgd"]},
                        "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                        "beta1": {"type": "number"},
                        "beta2": {"type": "number"},
                        "eps": {"type": "number"},
                        "clip_norm": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
            },
        },
    },
}
