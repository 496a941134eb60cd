"""Unit tests for renyi-adapt."""
