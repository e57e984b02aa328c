"""Layered CLI configuration: defaults, then a TOML file, then command-line flags.

Config file lookup order: ``--config PATH``, then ``$LEGALSUM_CONFIG``, then
``./legalsum.toml`` when present. Sections mirror the modules::

    [extraction]  threshold, scorer, alpha
    [training]    learning_rate, batch_size, max_epochs, patience,
                  validation_fraction, seed, l2
    [summary]     k, max_tokens, prefilter
    [features]    lexicon, cues
    [llm]         endpoint_url, model_name, temperature, max_output_tokens,
                  timeout_s, api_key_env_var, concurrency
    [output]      format, jobs
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .baseline import LlmConfig
from .errors import ConfigError
from .features import Lexicon, default_cues, default_lexicon, load_lexicon
from .scoring import ExtractionConfig
from .summarizer import SummaryBudget
from .training import TrainConfig

CONFIG_ENV = "LEGALSUM_CONFIG"
DEFAULT_CONFIG_NAME = "legalsum.toml"
OUTPUT_FORMATS = ("json", "text", "table", "csv")

DEFAULTS: dict[str, dict[str, Any]] = {
    "extraction": {"threshold": 0.5, "scorer": "rule", "alpha": 0.6},
    "training": {
        "learning_rate": 0.1,
        "batch_size": 16,
        "max_epochs": 10,
        "patience": 3,
        "validation_fraction": 0.2,
        "seed": 0,
        "l2": 1e-4,
    },
    "summary": {"k": 3, "max_tokens": None, "prefilter": False},
    "features": {"lexicon": None, "cues": None},
    "llm": {
        "endpoint_url": None,
        "model_name": None,
        "temperature": 0.4,
        "max_output_tokens": 512,
        "timeout_s": 60.0,
        "api_key_env_var": "LEGALSUM_API_KEY",
        "concurrency": 2,
    },
    "output": {"format": "json", "jobs": None},
}


def find_config(explicit: str | None) -> Path | None:
    if explicit:
        return Path(explicit)
    env = os.environ.get(CONFIG_ENV)
    if env:
        return Path(env)
    local = Path(DEFAULT_CONFIG_NAME)
    return local if local.is_file() else None


def read_config_file(path: Path) -> dict[str, dict[str, Any]]:
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from None
    for section, values in data.items():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        unknown = set(values) - set(DEFAULTS[section])
        if unknown:
            raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    return data


def merge(*layers: Mapping[str, Mapping[str, Any]]) -> dict[str, dict[str, Any]]:
    """Later layers win; ``None`` values in a layer leave the earlier value alone."""
    out = {section: dict(values) for section, values in DEFAULTS.items()}
    for layer in layers:
        for section, values in layer.items():
            for key, value in values.items():
                if value is not None:
                    out.setdefault(section, {})[key] = value
    return out


@dataclass(frozen=True)
class CliConfig:
    extraction: ExtractionConfig
    training: TrainConfig
    budget: SummaryBudget
    prefilter: bool
    lexicon: Lexicon
    cues: Lexicon
    llm: LlmConfig | None
    output_format: str
    jobs: int

    @classmethod
    def from_layers(cls, merged: Mapping[str, Mapping[str, Any]]) -> "CliConfig":
        ex, tr, su, fe, llm, out = (merged[s] for s in ("extraction", "training", "summary", "features", "llm", "output"))
        try:
            extraction = ExtractionConfig(float(ex["threshold"]), str(ex["scorer"]), float(ex["alpha"]))
            training = TrainConfig(
                learning_rate=float(tr["learning_rate"]),
                batch_size=int(tr["batch_size"]),
                max_epochs=int(tr["max_epochs"]),
                patience=int(tr["patience"]),
                validation_fraction=float(tr["validation_fraction"]),
                seed=int(tr["seed"]),
                l2=float(tr["l2"]),
            )
            if su.get("max_tokens") is not None:
                budget = SummaryBudget.tokens(int(su["max_tokens"]))
            else:
                budget = SummaryBudget.top_k(int(su["k"]))
            llm_cfg = None
            if llm.get("endpoint_url") and llm.get("model_name"):
                llm_cfg = LlmConfig(
                    endpoint_url=str(llm["endpoint_url"]),
                    model_name=str(llm["model_name"]),
                    temperature=float(llm["temperature"]),
                    max_output_tokens=int(llm["max_output_tokens"]),
                    timeout_s=float(llm["timeout_s"]),
                    api_key_env_var=str(llm["api_key_env_var"]),
                    concurrency=int(llm["concurrency"]),
                )
            lexicon = load_lexicon(fe["lexicon"]) if fe.get("lexicon") else default_lexicon()
            cues = load_lexicon(fe["cues"]) if fe.get("cues") else default_cues()
        except ConfigError:
            raise
        except OSError as exc:
            raise ConfigError(f"cannot read word list: {exc.strerror or exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        fmt = str(out["format"])
        if fmt not in OUTPUT_FORMATS:
            raise ConfigError(f"output format must be one of {OUTPUT_FORMATS}, got {fmt!r}")
        jobs = int(out["jobs"]) if out.get("jobs") is not None else (os.cpu_count() or 1)
        if jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return cls(extraction, training, budget, bool(su["prefilter"]), lexicon, cues, llm_cfg, fmt, jobs)
