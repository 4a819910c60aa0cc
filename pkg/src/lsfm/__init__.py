"""Simulation and reconstruction for 2D light-sheet fluorescence microscopy."""
