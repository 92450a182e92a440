"""Runtime configuration for the service and CLI."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path


@dataclass
class ServiceConfig:
    data_dir: Path | None = None
    backend: str = "template"  # template | http
    llm_url: str | None = None
    llm_api_key_env: str = "LLM_API_KEY"
    seed: int = 0
    port: int = 8400
    blend_alpha: float = 0.5
    k: int = 10
    levenshtein_threshold: float = 0.5
    coverage_threshold: int = 250
    min_words: int = 20
    max_words: int = 25
    strict_validation: bool = False
    fallback_order: tuple[str, ...] = ("similar_pt", "description", "llm")

    def __post_init__(self) -> None:
        if self.backend not in ("template", "http"):
            raise ValueError(f"unknown backend kind: {self.backend!r}")
        if not 1 <= self.port <= 65535:
            raise ValueError(f"invalid port: {self.port}")
        if self.backend == "http" and not self.llm_url:
            raise ValueError("http backend requires LLM_URL")

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "ServiceConfig":
        env = dict(os.environ) if env is None else env
        data_dir = env.get("DATA_DIR")
        return cls(
            data_dir=Path(data_dir) if data_dir else None,
            backend=env.get("BACKEND", "template"),
            llm_url=env.get("LLM_URL"),
            seed=int(env.get("SEED", "0")),
            port=int(env.get("PORT", "8400")),
            blend_alpha=float(env.get("BLEND_ALPHA", "0.5")),
        )

    def api_key(self, env: dict[str, str] | None = None) -> str | None:
        env = dict(os.environ) if env is None else env
        return env.get(self.llm_api_key_env)
