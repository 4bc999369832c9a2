"""Desk-scale promptable segmentation with prompt-in-the-loop distillation."""

__version__ = "0.1.0"
