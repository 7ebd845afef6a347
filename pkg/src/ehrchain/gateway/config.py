"""Gateway configuration file handling."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from ..clocks import SteppingClock, system_clock
from ..edge.vault import DEFAULT_TTL_MS
from .service import Gateway


@dataclass
class GatewayConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    edge_root: str = "./edge-store"
    ledger_path: str | None = None
    token_ttl_ms: int | None = DEFAULT_TTL_MS
    clock_mode: str = "system"  # "system" | "fixed" (deterministic, for demos)
    seed: int | None = None
    admin_key: str = "admin"
    node_id: str = "edge-1"
    console_dir: str | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "GatewayConfig":
        data = json.loads(Path(path).read_text())
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def build_gateway(self) -> Gateway:
        clock = SteppingClock() if self.clock_mode == "fixed" else system_clock
        rng = random.Random(self.seed) if self.seed is not None else None
        return Gateway.create(
            edge_root=self.edge_root,
            ledger_path=self.ledger_path,
            clock=clock,
            rng=rng,
            token_ttl_ms=self.token_ttl_ms,
            node_id=self.node_id,
            admin_key=self.admin_key,
        )
