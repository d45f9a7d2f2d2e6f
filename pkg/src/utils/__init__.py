"""Errors, logging, atomic file writes, stage state and the response cache."""
