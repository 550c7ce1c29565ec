"""Headless screenshot backends.

Two pluggable renderers share one contract (annotated markup + viewport in,
RGB image out):

- `BlockLayoutRenderer`: a deterministic layout stub. It does not run a
  browser; it paints a schematic page — grey content bars on white — and
  draws the palette outline box for every ``pxp-hl-<k>`` class found in the
  markup. Deterministic output makes it the backend for tests, goldens and
  latency measurement.
- `ChromiumRenderer`: drives a system Chromium/Chrome in headless mode over
  the captured source only (file URL, scripts disabled), for faithful
  renders in real deployments.

Re-fetching the live page would be unsafe and nondeterministic, so both
backends render from the captured markup alone. `render_screenshot` wraps
any backend with a hard timeout so a stuck render can never block the
service indefinitely.
"""

from __future__ import annotations

import concurrent.futures
import io
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, ImageDraw

from pxp.rendering.highlight import PALETTE, STYLE_MARKER

DEFAULT_RENDER_TIMEOUT_S = 10.0
URL_BANNER_HEIGHT = 56


class RendererUnavailable(Exception):
    """No usable rendering backend."""


class RenderTimeout(Exception):
    """The render exceeded its hard time budget."""


@dataclass(frozen=True)
class Viewport:
    width: int = 1280
    height: int = 1024
    max_height: int = 4096


_STYLE_RULE_RE = re.compile(r"\.pxp-hl-(\d+)\{outline:3px solid (#[0-9A-Fa-f]{6})")
_CLASS_TOKEN_RE = re.compile(r"class\s*=\s*[\"']([^\"']*)")
_HL_TOKEN_RE = re.compile(r"\bpxp-hl-(\d+)\b")
_TEXTISH_RE = re.compile(r">([^<>]{8,})<")


class BlockLayoutRenderer:
    """Deterministic schematic renderer (no browser involved)."""

    name = "block-layout"

    def render(self, html: str, viewport: Viewport) -> Image.Image:
        colors = {int(i): color for i, color in _STYLE_RULE_RE.findall(html)}
        boxes: list[str] = []  # outline colors in document order
        for class_value in _CLASS_TOKEN_RE.findall(html):
            for token in _HL_TOKEN_RE.findall(class_value):
                color = colors.get(int(token))
                if color:
                    boxes.append(color)
        text_blocks = min(len(_TEXTISH_RE.findall(html)), 24)

        height = min(
            max(viewport.height, 140 + 110 * len(boxes) + 28 * text_blocks),
            viewport.max_height,
        )
        image = Image.new("RGB", (viewport.width, height), "#FFFFFF")
        draw = ImageDraw.Draw(image)

        # schematic chrome: a headline bar and grey content bars
        draw.rectangle([40, 32, viewport.width - 40, 56], fill="#DDDDDD")
        y = 80
        for _ in range(text_blocks):
            draw.rectangle([40, y, viewport.width - 120, y + 14], fill="#EEEEEE")
            y += 28

        for color in boxes:
            box = [60, y, viewport.width - 60, y + 72]
            draw.rectangle(box, outline=color, width=3)
            draw.rectangle([76, y + 16, viewport.width - 200, y + 30], fill="#E4E4E4")
            draw.rectangle([76, y + 42, viewport.width - 420, y + 56], fill="#E4E4E4")
            y += 110
        return image

    def health(self) -> bool:
        return True


_CHROMIUM_CANDIDATES = (
    "chromium",
    "chromium-browser",
    "google-chrome",
    "google-chrome-stable",
    "chrome",
)


class ChromiumRenderer:
    """Headless Chromium screenshot of the captured source (scripts off)."""

    name = "chromium"

    def __init__(self, binary: str | None = None, timeout_s: float = DEFAULT_RENDER_TIMEOUT_S):
        self.binary = binary or next(
            (path for candidate in _CHROMIUM_CANDIDATES if (path := shutil.which(candidate))),
            None,
        )
        self.timeout_s = timeout_s

    def render(self, html: str, viewport: Viewport) -> Image.Image:
        if not self.binary:
            raise RendererUnavailable("no chromium/chrome binary on PATH")
        with tempfile.TemporaryDirectory(prefix="pxp-render-") as tmp:
            page = Path(tmp) / "page.html"
            shot = Path(tmp) / "shot.png"
            page.write_text(html, encoding="utf-8")
            command = [
                self.binary,
                "--headless=new",
                "--disable-gpu",
                "--no-first-run",
                "--disable-background-networking",
                "--blink-settings=scriptEnabled=false",
                f"--window-size={viewport.width},{viewport.height}",
                f"--screenshot={shot}",
                page.as_uri(),
            ]
            try:
                completed = subprocess.run(
                    command,
                    capture_output=True,
                    timeout=self.timeout_s,
                )
            except subprocess.TimeoutExpired as exc:
                raise RenderTimeout(f"render exceeded {self.timeout_s}s") from exc
            except OSError as exc:
                raise RendererUnavailable(f"failed to launch {self.binary}: {exc}") from exc
            if completed.returncode != 0 or not shot.exists():
                raise RendererUnavailable(
                    f"renderer exited {completed.returncode}: "
                    f"{completed.stderr.decode(errors='replace')[:200]}"
                )
            with Image.open(shot) as img:
                image = img.convert("RGB")
        if image.height > viewport.max_height:
            image = image.crop((0, 0, image.width, viewport.max_height))
        return image

    def health(self) -> bool:
        return self.binary is not None


def render_screenshot(
    html: str,
    viewport: Viewport,
    renderer,
    timeout_s: float = DEFAULT_RENDER_TIMEOUT_S,
) -> Image.Image:
    """Render with a hard timeout regardless of backend behavior."""
    if STYLE_MARKER not in html:
        raise ValueError("markup was not annotated (missing highlight style block)")
    pool = concurrent.futures.ThreadPoolExecutor(max_workers=1)
    try:
        future = pool.submit(renderer.render, html, viewport)
        return future.result(timeout=timeout_s)
    except concurrent.futures.TimeoutError as exc:
        raise RenderTimeout(f"render exceeded {timeout_s}s") from exc
    finally:
        # don't wait for a stuck backend; the thread is abandoned and the
        # subprocess backends enforce their own kill timeout
        pool.shutdown(wait=False, cancel_futures=True)


def compose_url_banner(image: Image.Image, url: str, colors: list[str]) -> Image.Image:
    """Prepend a URL bar strip outlined in the URL features' colors.

    Several URL-level features draw nested rectangles. Lettering uses a
    neutral dark grey so palette-color histograms (the golden comparison)
    depend only on the drawn outlines.
    """
    banner = Image.new("RGB", (image.width, URL_BANNER_HEIGHT), "#F6F6F6")
    draw = ImageDraw.Draw(banner)
    for inset_step, color in enumerate(colors):
        inset = 4 + 5 * inset_step
        draw.rectangle(
            [inset, inset, image.width - inset, URL_BANNER_HEIGHT - inset],
            outline=color,
            width=3,
        )
    draw.text((28, 22), url[:160], fill="#333333")
    combined = Image.new("RGB", (image.width, image.height + URL_BANNER_HEIGHT), "#FFFFFF")
    combined.paste(banner, (0, 0))
    combined.paste(image, (0, URL_BANNER_HEIGHT))
    return combined


def color_histogram(image: Image.Image, colors: tuple[str, ...] = PALETTE) -> dict[str, int]:
    """Pixel counts for the given colors only — the stable, font-independent
    signature used to compare screenshots."""
    wanted = {
        (int(c[1:3], 16), int(c[3:5], 16), int(c[5:7], 16)): c for c in colors
    }
    counts = {c: 0 for c in colors}
    for count, pixel in image.getcolors(maxcolors=1_000_000) or []:
        hit = wanted.get(pixel)
        if hit:
            counts[hit] = count
    return counts


def png_bytes(image: Image.Image) -> bytes:
    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()
