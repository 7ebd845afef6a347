"""``ehr-gateway`` entry point: serve the HTTP API (and console, if built)."""

from __future__ import annotations

import argparse

import uvicorn

from .config import GatewayConfig
from .http import create_app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="ehr-gateway",
                                     description="EHR access-control gateway")
    parser.add_argument("--config", help="JSON config file", default=None)
    parser.add_argument("--host", default=None)
    parser.add_argument("--port", type=int, default=None)
    args = parser.parse_args(argv)

    config = GatewayConfig.from_file(args.config) if args.config else GatewayConfig()
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port

    gateway = config.build_gateway()
    app = create_app(gateway, console_dir=config.console_dir)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
