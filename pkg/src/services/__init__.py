"""Experiment runner, report rendering and dataset downloads."""
