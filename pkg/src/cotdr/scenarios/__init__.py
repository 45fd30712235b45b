"""Scenarios shipped with cotdr."""
