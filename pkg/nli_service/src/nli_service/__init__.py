"""HTTP microservice wrapping a pretrained MNLI classifier.

Speaks the wire protocol the training toolkit's remote provider expects;
see app.create_app for the endpoints.
"""
from .app import create_app
from .config import ServiceConfig, from_env, parse_args
from .model import EXPECTED_LABELS, LabelMapError, MnliModel, resolve_label_indices

__version__ = "0.1.0"
