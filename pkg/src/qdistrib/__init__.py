"""Distribute quantum circuits over quantum networks using teleportations."""
