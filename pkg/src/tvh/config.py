"""Pipeline configuration, its fingerprint, and the key=value config file."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .flow_hash import FlowHashConfig
from .video_io import IngestConfig

SEED_ENV = "TVH_SEED"


@dataclass(frozen=True)
class PipelineConfig:
    ingest: IngestConfig = field(default_factory=IngestConfig)
    flow: FlowHashConfig = field(default_factory=FlowHashConfig)
    model_path: str | None = None
    seed: int = 0
    dtw_band: int | None = None

    def fingerprint(self) -> str:
        return config_fingerprint(self.ingest, self.flow)


def config_fingerprint(ingest: IngestConfig, flow: FlowHashConfig) -> str:
    """SHA-256 over every setting that changes hash values."""
    doc = {
        "ingest": {
            "target_height": ingest.target_height,
            "target_width": ingest.target_width,
            "target_fps": str(Fraction(ingest.target_fps)),
            "luma_only": ingest.luma_only,
        },
        "flow": flow.to_dict(),
        "format": 1,
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


# config-file key -> (section, field, parser)
_KEYS = {
    "height": ("ingest", "target_height", int),
    "width": ("ingest", "target_width", int),
    "fps": ("ingest", "target_fps", Fraction),
    "bins": ("flow", "bins", int),
    "segments": ("flow", "segments", int),
    "hs_lambda": ("flow", "hs_lambda", float),
    "hs_iters": ("flow", "hs_iters", int),
    "model": (None, "model_path", str),
    "seed": (None, "seed", int),
    "dtw_band": (None, "dtw_band", int),
}


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        out[key] = _KEYS[key][2](val)
    return out


def build_config(overrides: dict | None = None, config_file=None) -> PipelineConfig:
    """Merge defaults, an optional config file, then explicit overrides.

    The seed falls back to $TVH_SEED when neither source sets it.
    """
    values = {}
    if config_file is not None:
        values.update(parse_config_text(Path(config_file).read_text()))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "seed" not in values and os.environ.get(SEED_ENV):
        values["seed"] = int(os.environ[SEED_ENV])
    sections = {"ingest": {}, "flow": {}, None: {}}
    for key, val in values.items():
        section, name, _ = _KEYS[key]
        sections[section][name] = val
    cfg = PipelineConfig()
    return replace(
        cfg,
        ingest=replace(cfg.ingest, **sections["ingest"]),
        flow=replace(cfg.flow, **sections["flow"]),
        **sections[None],
    )


def config_keys():
    return sorted(_KEYS)

