"""Adapter that runs MMS-LID checkpoints over manifest audio and writes
per-language EMB1 embedding files."""

__version__ = "0.1.0"
