"""Contextual sarcasm detection: corpus handling, user embeddings, models."""

__version__ = "0.1.0"
