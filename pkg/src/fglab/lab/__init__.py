"""Batch experiments and the command-line front end."""
