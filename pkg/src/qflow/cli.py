"""qflow command line: a thin client of the HTTP service.

By default each subcommand sends its request through the in-process ASGI
app (no socket involved); --server points it at a remote instance
instead. The client writes returned files under --out and maps the
service payload to exit codes: 0 success, 1 verification failure,
2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .runner import SUBCOMMANDS

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qflow",
        description="Quantum momentum-flow simulator: evolve states, extract "
        "flow fields, and verify that all momentum routes coincide.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", help="scenario config file (dotted-key format)")
        p.add_argument("--scenario", help="catalog scenario name instead of --config")
        p.add_argument("--out", required=True, help="output directory for produced files")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        p.add_argument(
            "--tolerance-scale",
            type=float,
            default=None,
            help="multiply verification tolerances by this factor",
        )
        p.add_argument("--server", default=None, help="base URL of a running qflow service")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    p = sub.add_parser("catalog", help="list catalog scenarios or print one")
    p.add_argument("name", nargs="?", help="scenario name to print")
    return parser


def _post_run(args) -> dict:
    body: dict = {}
    if args.config:
        try:
            body["config_text"] = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"qflow: cannot read config {args.config}: {exc}", file=sys.stderr)
            raise SystemExit(EXIT_CONFIG) from exc
    if args.scenario:
        body["scenario"] = args.scenario
    if args.seed is not None:
        body["seed"] = args.seed
    if args.tolerance_scale is not None:
        body["tolerance_scale"] = args.tolerance_scale

    import httpx

    url = f"/run/{args.subcommand}"
    if args.server:
        response = httpx.post(args.server.rstrip("/") + url, json=body, timeout=600.0)
    else:
        import asyncio

        from .service import app

        async def _call():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://qflow.internal", timeout=600.0
            ) as client:
                return await client.post(url, json=body)

        response = asyncio.run(_call())
    if response.status_code != 200:
        print(f"qflow: service error {response.status_code}: {response.text}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    return response.json()


def _write_files(out_dir: str, files: list[dict]) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    try:
        for item in files:
            path = out / item["name"]
            path.write_text(item["content"], encoding="utf-8")
            written.append(str(path))
    except OSError:
        for path in written:
            Path(path).unlink(missing_ok=True)
        raise
    return written


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.subcommand == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    if args.subcommand == "catalog":
        from .config import CATALOG_NAMES, catalog_config_text
        from .errors import ConfigError

        if args.name:
            try:
                print(catalog_config_text(args.name), end="")
            except ConfigError as exc:
                print(f"qflow: {exc}", file=sys.stderr)
                return EXIT_CONFIG
        else:
            for name in CATALOG_NAMES:
                print(name)
        return EXIT_OK

    try:
        payload = _post_run(args)
    except SystemExit as exc:
        return int(exc.code)
    exit_code = int(payload.get("exit_code", EXIT_NUMERICAL))
    if payload.get("error"):
        err = payload["error"]
        print(f"qflow {args.subcommand}: {err['kind']}: {err['message']}", file=sys.stderr)
    if exit_code in (EXIT_OK, EXIT_VERIFICATION):
        written = _write_files(args.out, payload.get("files", []))
        summary = payload.get("summary", {})
        print(json.dumps({"status": payload["status"], "summary": summary}, indent=2, sort_keys=True))
        for path in written:
            print(f"wrote {path}", file=sys.stderr)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
