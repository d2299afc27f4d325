"""Desk-scale two-stage SFT trainer consuming exported corpora + manifests."""

__version__ = "0.1.0"
