"""Lipreading training platform: landmark gating, audio alignment,
viseme-aware lexicon tools, synthetic-clip orchestration, quiz sessions,
score statistics, and an HTTP service tying them together."""

from __future__ import annotations

__version__ = "0.1.0"
