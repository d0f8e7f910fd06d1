"""phi-orbits test suite."""
