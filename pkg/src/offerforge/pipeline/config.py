"""Run configuration (JSON) and atomic output helpers."""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from ..cart import CartConfig
from ..counting_bloom import CbfConfig
from ..customer_model import to_day
from ..errors import ConfigError, PhiTooSmall
from ..ga_segmentation import GaConfig
from ..ltv_model import CampaignStrategy, LtvParams
from ..rng import derive_seed
from ..rule_engine import CandidateConfig

CONFIG_ENV = "OFFERFORGE_CONFIG"
PATH_KEYS = ("customers", "offer_events", "statements", "dictionary", "rules", "catalog", "output")


@dataclass(frozen=True)
class StreamConfig:
    epsilon: float = 0.001
    phi: float = 0.01
    refresh_cadence: int | None = None
    sample_size: int = 10_000

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("stream.epsilon must lie in (0, 1)")
        if not self.epsilon < self.phi:
            raise PhiTooSmall(f"PhiTooSmall: phi={self.phi} must exceed epsilon={self.epsilon}")
        if not self.phi < 1:
            raise ValueError("stream.phi must be below 1")


@dataclass
class RunConfig:
    seed: int = 0
    paths: dict[str, Path | None] = field(default_factory=dict)
    ga: GaConfig = field(default_factory=GaConfig)
    ltv: LtvParams = field(default_factory=LtvParams)
    cart: CartConfig = field(default_factory=CartConfig)
    stream: StreamConfig = field(default_factory=StreamConfig)
    cbf: CbfConfig = field(default_factory=CbfConfig)
    campaign: CampaignStrategy = field(default_factory=lambda: CampaignStrategy("default", "retention"))
    candidates: CandidateConfig = field(default_factory=CandidateConfig)
    as_of: int | None = None
    offer_window_months: int = 6

    def path(self, key: str) -> Path | None:
        return self.paths.get(key)

    @property
    def output_dir(self) -> Path:
        return self.paths.get("output") or Path("out")


def _pick(cls, data: Mapping[str, Any], **overrides):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    merged = {**data, **{k: v for k, v in overrides.items() if k not in data}}
    return cls(**merged)


def config_from_dict(data: Mapping[str, Any], base_dir: Path | None = None, **cli) -> RunConfig:
    """Build a RunConfig; ``cli`` holds flag overrides (seed, epsilon, phi, input, output)."""
    base_dir = base_dir or Path.cwd()
    try:
        seed = int(cli["seed"] if cli.get("seed") is not None else data.get("seed", 0))
        paths = {}
        for key in PATH_KEYS:
            raw = data.get("paths", {}).get(key)
            paths[key] = (base_dir / raw).resolve() if raw else None
        if cli.get("output"):
            paths["output"] = Path(cli["output"]).resolve()
        ga_data = dict(data.get("ga", {}))
        if cli.get("seed") is not None:
            ga_data.pop("rng_seed", None)
        ga = _pick(GaConfig, ga_data, rng_seed=derive_seed(seed, "ga_segmentation"))
        stream_data = dict(data.get("stream", {}))
        for key in ("epsilon", "phi"):
            if cli.get(key) is not None:
                stream_data[key] = cli[key]
        cbf_data = dict(data.get("cbf", {}))
        cand = dict(data.get("candidates", {}))
        if "attributes" in cand and cand["attributes"] is not None:
            cand["attributes"] = tuple(cand["attributes"])
        return RunConfig(
            seed=seed,
            paths=paths,
            ga=ga,
            ltv=LtvParams.from_dict(data.get("ltv", {})),
            cart=_pick(CartConfig, data.get("cart", {})),
            stream=_pick(StreamConfig, stream_data),
            cbf=_pick(CbfConfig, cbf_data, seed=derive_seed(seed, "counting_bloom")),
            campaign=CampaignStrategy.from_dict(data.get("campaign", {"id": "default", "objective": "retention"})),
            candidates=_pick(CandidateConfig, cand),
            as_of=to_day(data["as_of"]) if data.get("as_of") is not None else None,
            offer_window_months=int(data.get("offer_window_months", 6)),
        )
    except (ConfigError, PhiTooSmall):
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None


def load_config(path=None, **cli) -> RunConfig:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return config_from_dict({}, **cli)
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from None
    return config_from_dict(data, path.parent, **cli)


def write_atomic(path: Path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
