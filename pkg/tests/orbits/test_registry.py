"""Tests for the function-kind registry."""

import pytest

from exceptions import InputError
from orbits.base import OrbitFunction
from orbits.functions import DigitSquareSum, PhiSum
from orbits.registry import OrbitFunctionRegistry, registry


class TestOrbitFunctionRegistry:
    """Test the OrbitFunctionRegistry class."""

    def test_global_registry_kinds(self):
        """The three built-in kinds are registered."""
        assert registry.names() == ["digit-square-sum", "max-plus-c", "phi-sum"]

    def test_register_and_get(self):
        """A fresh registry returns what was registered."""
        local = OrbitFunctionRegistry()
        local.register("dss", DigitSquareSum)
        assert local.get("dss") is DigitSquareSum
        assert local.get("missing") is None

    def test_build_wires_totient(self, small_table):
        """phi-sum instances receive the totient provider."""
        function = registry.build("phi-sum", small_table)
        assert isinstance(function, PhiSum)
        assert function.evaluate((65536,), 0) == 32768

    def test_build_unknown_kind(self):
        """Unknown kinds raise InputError listing the known ones."""
        with pytest.raises(InputError, match="phi-sum"):
            registry.build("collatz")

    def test_list_available(self):
        """Every kind reports its properties."""
        available = registry.list_available()
        assert [entry["name"] for entry in available] == registry.names()
        assert all("bounded_for" in entry["properties"] for entry in available)

    def test_custom_kind(self):
        """Any OrbitFunction subclass can be registered."""

        class Identity(OrbitFunction):
            def evaluate(self, window, k):
                return window[-1]

            @property
            def name(self):
                return "identity"

            @property
            def properties(self):
                return {"bounded_for": "all d and k"}

        local = OrbitFunctionRegistry()
        local.register("identity", Identity)
        assert local.build("identity").evaluate((4, 9), 0) == 9
