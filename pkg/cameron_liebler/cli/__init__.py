"""Command-line surface and JSON documents."""
