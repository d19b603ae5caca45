"""Sphinx documentation package for jumpentropy."""
