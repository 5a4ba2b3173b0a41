"""Service configuration from a JSON file plus environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

ENV_PREFIX = "PROTOQUERY_"


@dataclass
class ServiceConfig:
    data_dir: str = "data"
    sparql_endpoint: str = ""
    local_data: str = ""
    lm_url: str = ""
    lm_model: str = ""
    embed_url: str = ""
    embed_model: str = ""
    embed_dimension: int = 256
    use_mock_providers: bool = True
    retrieval_k: int = 16
    row_limit: int = 1000
    distribution_limit: int = 100000
    expand_subclasses: bool = False
    debounce_ms: int = 300
    request_timeout_s: float = 30.0
    cors_origins: list[str] = field(default_factory=list)

    def data_path(self) -> Path:
        return Path(self.data_dir)


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """File values first, then PROTOQUERY_* environment variables override."""
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None and Path(path).exists():
        values.update(json.loads(Path(path).read_text(encoding="utf-8")))
    config = ServiceConfig()
    for f in fields(ServiceConfig):
        if f.name in values:
            setattr(config, f.name, values[f.name])
        env_key = ENV_PREFIX + f.name.upper()
        if env_key in env:
            raw = env[env_key]
            if f.type in ("int", int):
                setattr(config, f.name, int(raw))
            elif f.type in ("float", float):
                setattr(config, f.name, float(raw))
            elif f.type in ("bool", bool):
                setattr(config, f.name, raw.strip().lower() in ("1", "true", "yes", "on"))
            elif f.name == "cors_origins":
                setattr(config, f.name, [o for o in raw.split(",") if o])
            else:
                setattr(config, f.name, raw)
    return config
