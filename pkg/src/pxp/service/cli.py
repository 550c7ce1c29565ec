"""Command-line entry point for the warning service daemon.

Runs a uvicorn server bound to loopback by default.  The LLM backend is
either a live HTTP runtime (Ollama-compatible) or a directory of recorded
fixtures (``--mock-runtime``) for offline and deterministic operation.

The bearer token, when required, is read from the ``PXP_TOKEN`` environment
variable rather than a flag so it never appears in process listings.
"""

from __future__ import annotations

import logging
import os
import re
from pathlib import Path

import click

from pxp.catalog import default_catalog, load_catalog
from pxp.pipeline.runtime import (
    DEFAULT_MODEL,
    DEFAULT_RUNTIME_URL,
    HttpRuntime,
    MockRuntime,
)
from pxp.rendering.highlight import PALETTE
from pxp.rendering.screenshot import BlockLayoutRenderer, ChromiumRenderer
from pxp.service.app import DEFAULT_BUDGET_MS, DEFAULT_MAX_QUEUE, ServiceConfig, create_app

log = logging.getLogger(__name__)

_COLOR_RE = re.compile(r"^#[0-9a-fA-F]{6}$")


def parse_palette(spec: str) -> tuple[str, ...]:
    """Parse a comma-separated list of exactly four ``#rrggbb`` colors."""
    colors = tuple(part.strip() for part in spec.split(","))
    if len(colors) != 4:
        raise click.BadParameter(f"palette needs exactly 4 colors, got {len(colors)}")
    for color in colors:
        if not _COLOR_RE.match(color):
            raise click.BadParameter(f"invalid color {color!r}, expected #rrggbb")
    if len(set(c.lower() for c in colors)) != 4:
        raise click.BadParameter("palette colors must be distinct")
    return colors


def pick_renderer(choice: str, mock: bool):
    """Resolve the ``--renderer`` flag to a renderer instance.

    ``auto`` prefers the deterministic block-layout renderer whenever a mock
    runtime is in play (so replayed runs are bit-stable), and otherwise uses
    Chromium when a binary is installed, falling back to block layout.
    """
    if choice == "block":
        return BlockLayoutRenderer()
    if choice == "chromium":
        renderer = ChromiumRenderer()
        if not renderer.health():
            raise click.ClickException("no chromium binary found on PATH")
        return renderer
    if mock:
        return BlockLayoutRenderer()
    chromium = ChromiumRenderer()
    if chromium.health():
        return chromium
    log.info("no chromium binary found, using block-layout renderer")
    return BlockLayoutRenderer()


@click.command()
@click.option("--host", default="127.0.0.1", show_default=True, help="Bind address.")
@click.option("--port", default=8377, show_default=True, type=int, help="Bind port.")
@click.option("--model", default=DEFAULT_MODEL, show_default=True, help="LLM model tag.")
@click.option(
    "--runtime-url",
    default=DEFAULT_RUNTIME_URL,
    show_default=True,
    help="Base URL of the local LLM runtime.",
)
@click.option(
    "--mock-runtime",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=None,
    help="Serve recorded responses from this fixture directory instead of a live runtime.",
)
@click.option(
    "--catalog",
    "catalog_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Feature catalog YAML (defaults to the packaged catalog).",
)
@click.option(
    "--palette",
    default=",".join(PALETTE),
    show_default=True,
    help="Four comma-separated #rrggbb highlight colors.",
)
@click.option(
    "--budget-ms",
    default=DEFAULT_BUDGET_MS,
    show_default=True,
    type=int,
    help="End-to-end time budget per request in milliseconds.",
)
@click.option(
    "--max-queue",
    default=DEFAULT_MAX_QUEUE,
    show_default=True,
    type=int,
    help="Maximum requests waiting for the LLM stage before rejecting with 429.",
)
@click.option(
    "--renderer",
    type=click.Choice(["auto", "chromium", "block"]),
    default="auto",
    show_default=True,
    help="Screenshot backend.",
)
@click.option("--log-level", default="info", show_default=True, help="Uvicorn log level.")
def main(
    host: str,
    port: int,
    model: str,
    runtime_url: str,
    mock_runtime: Path | None,
    catalog_path: Path | None,
    palette: str,
    budget_ms: int,
    max_queue: int,
    renderer: str,
    log_level: str,
) -> None:
    """Run the explainable phishing-warning service."""
    import uvicorn

    logging.basicConfig(level=logging.INFO)
    catalog = load_catalog(catalog_path) if catalog_path else default_catalog()
    colors = parse_palette(palette)
    if mock_runtime is not None:
        runtime = MockRuntime(mock_runtime)
    else:
        runtime = HttpRuntime(runtime_url)
    config = ServiceConfig(
        catalog=catalog,
        runtime=runtime,
        renderer=pick_renderer(renderer, mock=mock_runtime is not None),
        palette=colors,
        model=model,
        budget_ms=budget_ms,
        max_queue=max_queue,
        token=os.environ.get("PXP_TOKEN"),
    )
    app = create_app(config)
    click.echo(f"serving on http://{host}:{port} (model={model}, mock={mock_runtime is not None})")
    uvicorn.run(app, host=host, port=port, log_level=log_level)


if __name__ == "__main__":
    main()
