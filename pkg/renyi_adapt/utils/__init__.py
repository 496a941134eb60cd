"""Utility modules for the renyi-adapt CLI."""
