"""Quickest change detection for spike trains and other scalar streams."""
