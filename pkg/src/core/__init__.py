"""Metrics, committee combiner and committee persistence."""
