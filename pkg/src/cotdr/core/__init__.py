"""Simulation, detection and evaluation core."""
