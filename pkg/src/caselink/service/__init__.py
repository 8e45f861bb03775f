"""Zoned case-management service: sqlite persistence plus HTTP API."""
