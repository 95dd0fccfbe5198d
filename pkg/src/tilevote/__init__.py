"""Voting-based 8-puzzle group play: rules engine, server, simulator, analytics."""

__version__ = "0.1.0"
