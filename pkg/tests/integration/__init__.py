"""End-to-end tests driving the phi-orbits command line."""
