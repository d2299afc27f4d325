"""Corpus construction and benchmark evaluation for sentiment distillation.

Pipeline stages: ingest (normalize/fingerprint/dedup/decontaminate raw user
text), prompt construction (knowledge and alignment stages), teacher
collection over a chat-completions endpoint, corpus export with trainer
manifests, and the 12-task benchmark harness with its three metric families.
"""

__version__ = "0.1.0"
