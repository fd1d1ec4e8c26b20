"""Layered run configuration: defaults <- config file <- environment <- flags.

The config file is flat INI with sections named after the modules they
configure ([chunker], [extraction], [backend], [llm]). Validation happens
when the merged view is turned into typed config objects, before any work
starts.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .backend import BackendDescriptor
from .chunker import ChunkConfig
from .errors import ConfigError
from .spans import ExtractionConfig

ENV_BACKEND_URL = "SPLAX_BACKEND_URL"

_SCHEMA = {
    "chunker": {
        "length": int,
        "overlap": int,
        "model_max_len": int,
        "max_question_tokens": int,
    },
    "extraction": {
        "max_answer_tokens": int,
        "n_best": int,
        "score_mode": str,
    },
    "backend": {
        "kind": str,
        "endpoint": str,
        "batch_size": int,
        "max_in_flight": int,
        "timeout": float,
        "retries": int,
    },
    "llm": {
        "endpoint": str,
        "model": str,
        "mode": str,
        "max_in_flight": int,
        "timeout": float,
        "few_shot_file": str,
    },
}


@dataclass
class RunConfig:
    """The merged, still-untyped view; see :meth:`chunk_config` and friends
    for the validated objects."""

    length: int = 256
    overlap: int = 64
    model_max_len: int = 384
    max_question_tokens: int = 64
    max_answer_tokens: int = 30
    n_best: int = 20
    score_mode: str = "raw"
    backend_kind: str = "lexical"
    backend_endpoint: str | None = None
    backend_batch_size: int = 32
    backend_max_in_flight: int = 4
    backend_timeout: float = 30.0
    backend_retries: int = 3
    llm_endpoint: str | None = None
    llm_model: str = "llama3-8b"
    llm_mode: str = "direct"
    llm_max_in_flight: int = 4
    llm_timeout: float = 60.0
    llm_few_shot_file: str | None = None
    jobs: int = os.cpu_count() or 1

    _FLAT_KEYS = {
        ("chunker", "length"): "length",
        ("chunker", "overlap"): "overlap",
        ("chunker", "model_max_len"): "model_max_len",
        ("chunker", "max_question_tokens"): "max_question_tokens",
        ("extraction", "max_answer_tokens"): "max_answer_tokens",
        ("extraction", "n_best"): "n_best",
        ("extraction", "score_mode"): "score_mode",
        ("backend", "kind"): "backend_kind",
        ("backend", "endpoint"): "backend_endpoint",
        ("backend", "batch_size"): "backend_batch_size",
        ("backend", "max_in_flight"): "backend_max_in_flight",
        ("backend", "timeout"): "backend_timeout",
        ("backend", "retries"): "backend_retries",
        ("llm", "endpoint"): "llm_endpoint",
        ("llm", "model"): "llm_model",
        ("llm", "mode"): "llm_mode",
        ("llm", "max_in_flight"): "llm_max_in_flight",
        ("llm", "timeout"): "llm_timeout",
        ("llm", "few_shot_file"): "llm_few_shot_file",
    }

    @classmethod
    def load(
        cls,
        config_file: str | Path | None = None,
        env=None,
        overrides: dict | None = None,
    ) -> "RunConfig":
        """Merge defaults, file, environment, and flag overrides, in that order.

        ``overrides`` maps RunConfig field names to values; None values are
        treated as "not given" so argparse defaults can stay None.
        """
        cfg = cls()
        if config_file is not None:
            cfg._apply_file(Path(config_file))
        env = os.environ if env is None else env
        if env.get(ENV_BACKEND_URL):
            cfg.backend_endpoint = env[ENV_BACKEND_URL]
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if not hasattr(cfg, key) or key.startswith("_"):
                raise ConfigError(f"unknown config override {key!r}")
            setattr(cfg, key, value)
        return cfg

    def _apply_file(self, path: Path) -> None:
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigError(f"{path}: unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"{path}: unknown key {key!r} in section [{section}]")
                try:
                    value = _SCHEMA[section][key](raw)
                except ValueError as exc:
                    raise ConfigError(f"{path}: bad value for [{section}] {key}: {raw!r}") from exc
                setattr(self, self._FLAT_KEYS[(section, key)], value)

    def chunk_config(self) -> ChunkConfig:
        return ChunkConfig(
            segment_length=self.length,
            overlap=self.overlap,
            model_max_len=self.model_max_len,
            max_question_tokens=self.max_question_tokens,
        )

    def extraction_config(self) -> ExtractionConfig:
        return ExtractionConfig(
            max_answer_tokens=self.max_answer_tokens,
            n_best=self.n_best,
            score_mode=self.score_mode,
        )

    def backend_descriptor(self) -> BackendDescriptor:
        return BackendDescriptor(
            kind=self.backend_kind,
            endpoint=self.backend_endpoint,
            batch_size=self.backend_batch_size,
            max_in_flight=min(self.backend_max_in_flight, self.jobs),
            timeout=self.backend_timeout,
            retries=self.backend_retries,
        )

    def snapshot(self) -> dict:
        """Every effective value, for run manifests."""
        return {f.name: getattr(self, f.name) for f in fields(self) if not f.name.startswith("_")}
