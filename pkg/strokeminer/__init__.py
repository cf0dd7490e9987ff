"""Skill analysis of table-tennis forehand strokes from digitized marker trajectories."""
__version__ = "0.1.0"
