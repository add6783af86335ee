"""Pytest rootdir anchor; shared helpers live in oracles.py."""
