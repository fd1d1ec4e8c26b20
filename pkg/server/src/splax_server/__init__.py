"""Fine-tune and serve span-scoring QA models behind the splax scoring protocol."""

from .features import FeatureFileError, load_features
from .model import (
    HighwayLayer,
    SpanScoringModel,
    build_model,
    load_checkpoint,
    save_checkpoint,
)
from .serve import create_app, serve
from .train import TrainConfig, TrainResult, train

__version__ = "0.1.0"
