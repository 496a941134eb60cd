"""Command modules for the renyi-adapt CLI."""
