# test/cli/test_runner.py

# ruff: noqa: S101
"""Tests for command dispatch.

Every command is run through `run`, which must turn engine failures into
reports with the right status instead of raising.
"""

from typing import Any

import pytest

from jetspencer.cli.dsl import SystemSource, parse_system, render_system
from jetspencer.cli.report import Report, digest
from jetspencer.cli.runner import COMMANDS, RunFlags, resolve_source, run
from jetspencer.core.paths import SYSTEM_SUFFIX, SYSTEMS_DIR


def _sample(name: str) -> SystemSource:
    source = resolve_source(SYSTEMS_DIR / f"{name}{SYSTEM_SUFFIX}")
    assert source is not None
    return source


def _catalog(name: str, n: int | None = None) -> SystemSource:
    source = resolve_source(catalog_name=name, n=n)
    assert source is not None
    return source


class TestResolveSource:
    """Tests for turning command-line arguments into a source."""

    def test_sample_file(self) -> None:
        """Verify a bundled .pde file is parsed."""
        source = _sample("curl")
        assert source.name == "curl"
        assert source.unknowns == ("u1", "u2", "u3")

    def test_catalog(self) -> None:
        """Verify a catalog name gives default variable names."""
        source = _catalog("killing", 3)
        assert source.variables == ("x1", "x2", "x3")
        assert len(source.equations) == 6

    def test_nothing(self) -> None:
        """Verify no path and no catalog name give no source."""
        assert resolve_source() is None


class TestDispatch:
    """Tests for the report envelope."""

    def test_commands(self) -> None:
        """Verify the twelve commands are registered."""
        assert len(COMMANDS) == 12

    def test_unknown_command(self) -> None:
        """Verify an unknown command becomes an error report."""
        report = run("transmogrify")
        assert report.status == "error"
        assert report.exit_code == 1
        assert "Unknown command" in report.message

    def test_invalid_flags(self) -> None:
        """Verify flags failing validation become an error report."""
        report = run("catalog-list", flags={"r_max": -1})
        assert report.status == "error"
        assert report.message.startswith("Invalid flags")

    def test_missing_source(self) -> None:
        """Verify system commands refuse to run without a source."""
        report = run("analyze")
        assert report.status == "error"
        assert "needs a .pde source" in report.message

    def test_input_digest(self) -> None:
        """Verify the report identifies the input by the digest of its rendering."""
        source = _sample("gradient")
        report = run("adjoint", source)
        assert report.input is not None
        assert report.input.name == "gradient"
        assert report.input.sha256 == digest(render_system(source))

    def test_structured_round_trip(self) -> None:
        """Verify a real report survives the structured form."""
        report = run("cc", _catalog("killing", 2))
        assert Report.from_structured(report.to_structured()) == report

    def test_flags_instance(self) -> None:
        """Verify a RunFlags instance is accepted as is."""
        report = run("cosserat", flags=RunFlags(n=2))
        assert report.status == "ok"


class TestSystemCommands:
    """Tests for the commands that analyse a system."""

    def test_analyze_killing(self) -> None:
        """Verify the analysis of the plane Killing system."""
        report = run("analyze", _catalog("killing", 2))
        assert report.exit_code == 0
        assert report.result["formally_integrable"]
        assert report.result["completion_trace"] == []
        assert report.result["dims"] == [3, 3, 3]
        assert report.result["characters"]["verdict"] == "not_involutive"
        assert report.result["hilbert"] is None
        assert "not involutive" in report.certificates["note"]
        assert report.bounds["order_max"] == 3

    def test_analyze_empty_system(self) -> None:
        """Verify a system without equations is analysed at order one."""
        source = parse_system("system empty; vars x y; unknowns u;")
        report = run("analyze", source)
        assert report.result["order"] == 1
        assert report.result["dims"] == [3, 6, 10]

    def test_characters_screw(self) -> None:
        """Verify the characters of the screw system."""
        report = run("characters", _catalog("screw"))
        assert report.result["alphas"] == [2, 0]
        assert report.result["verdict"] == "involutive"
        assert report.result["cartan_sum"] == 2
        assert len(report.result["symbol_dims"]) == 3

    def test_characters_after_prolongation(self) -> None:
        """Verify the prolonged Killing system has a zero, involutive symbol."""
        report = run("characters", _catalog("killing", 2), {"prolong": 1})
        assert report.result["order"] == 2
        assert report.result["symbol_dim"] == 0
        assert report.result["verdict"] == "involutive"

    def test_cc_killing(self) -> None:
        """Verify the single second-order CC of the plane Killing system."""
        report = run("cc", _catalog("killing", 2))
        assert report.result["count"] == 1
        assert report.result["orders"] == [2]
        assert report.result["complete"]
        assert report.certificates["excluded_locus"] == []

    def test_cc_inconclusive(self) -> None:
        """Verify a low order bound gives an inconclusive report with its payload."""
        report = run("cc", _catalog("killing", 2), {"order_max": 2})
        assert report.status == "inconclusive"
        assert report.exit_code == 2
        assert report.result["complete"] is False
        assert report.certificates["orders"]

    def test_adjoint(self) -> None:
        """Verify the adjoint of the gradient is one equation in three multipliers."""
        report = run("adjoint", _sample("gradient"))
        (equation,) = report.result["operator"]
        assert all(f"lam{k}" in equation for k in (1, 2, 3))

    def test_parametrize_curl(self) -> None:
        """Verify the curl is parametrized by one potential."""
        report = run("parametrize", _sample("curl"))
        assert report.result["verdict"] == "parametrizable"
        assert report.result["potentials"] == 1
        assert report.result["residual_zero"]

    def test_parametrize_gradient(self) -> None:
        """Verify the gradient admits no parametrization."""
        report = run("parametrize", _sample("gradient"))
        assert report.exit_code == 0
        assert report.result["verdict"] == "not_parametrizable"

    def test_spencer_dims(self) -> None:
        """Verify the bundle dimensions of the screw system."""
        report = run("spencer-dims", _catalog("screw"))
        assert report.result["janet"] == [2, 0, 0]
        assert report.result["spencer"] == [4, 6, 2]
        assert report.certificates["exact_columns"]

    def test_spencer_dims_not_involutive(self) -> None:
        """Verify a non-involutive system gives an error report."""
        report = run("spencer-dims", _catalog("killing", 2))
        assert report.exit_code == 1
        assert "not involutive" in report.message

    def test_spencer_ops_screw(self) -> None:
        """Verify D2 is skipped outside finite type."""
        report = run("spencer-ops", _catalog("screw"))
        assert not report.result["finite_type"]
        assert report.result["d1_count"] == 6
        assert "d2_skipped" in report.certificates
        assert "d2" not in report.result

    def test_spencer_ops_affine_line(self) -> None:
        """Verify D2∘D1 = 0 is certified in finite type."""
        report = run("spencer-ops", _catalog("affine_line"))
        assert report.result["coordinates"] == ["xi", "xi_1"]
        assert report.result["finite_type"]
        assert report.certificates["d2_after_d1_zero"]

    def test_macaulay_cubic(self) -> None:
        """Verify the solution basis of y''' = y'."""
        report = run("macaulay", _sample("cubic_ode"))
        assert report.result["basis"] == [["e^(-x)"], ["1"], ["e^(x)"]]
        assert report.result["generators"] == [["ch(x) - 1"]]
        assert report.result["min_generators"] == 1
        assert report.certificates["verified"]

    @pytest.mark.parametrize(("name", "expected"), [("decoupled_pair", 2), ("coupled_pair", 1)])
    def test_macaulay_generators(self, name: str, expected: int) -> None:
        """Verify the generator counts of the paired samples."""
        report = run("macaulay", _sample(name))
        assert report.result["min_generators"] == expected
        assert len(report.result["generators"]) == expected
        assert report.certificates["verified"]

    def test_macaulay_coupled_generator(self) -> None:
        """Verify the coupled pair is generated by (ch(x), 1)."""
        report = run("macaulay", _sample("coupled_pair"))
        assert report.result["generators"] == [["ch(x)", "1"]]

    def test_macaulay_free_part(self) -> None:
        """Verify a module with a free part reports no basis."""
        source = parse_system("system s; vars x; unknowns y z; eq d(y; 1) - z = 0;")
        report = run("macaulay", source)
        assert report.status == "ok"
        assert report.result["free_rank"] == 1
        assert "basis" not in report.result

    def test_macaulay_needs_one_variable(self) -> None:
        """Verify a PDE system is refused by macaulay."""
        assert run("macaulay", _catalog("killing", 2)).status == "error"

    def test_purity(self) -> None:
        """Verify y2 of y22 = y12 = 0 lies in t1 but not in t2."""
        report = run("purity", _sample("mixed_second_order"), {"element": "d(y; 2)"})
        assert report.result["r"] == 1
        assert report.certificates["membership"] == {"t0": True, "t1": True, "t2": False}

    def test_purity_needs_element(self) -> None:
        """Verify purity refuses to run without an element."""
        report = run("purity", _sample("mixed_second_order"))
        assert "--element" in report.message


class TestStandaloneCommands:
    """Tests for the commands that do not read a system."""

    def test_cosserat(self) -> None:
        """Verify the plane Cosserat check."""
        report = run("cosserat", flags={"n": 2})
        assert report.result["verified"]
        assert len(report.result["equations"]) == 3

    def test_cosserat_dimension(self) -> None:
        """Verify unsupported dimensions give an error report."""
        assert run("cosserat", flags={"n": 4}).status == "error"

    def test_split(self) -> None:
        """Verify the split of ρ = 2ω in dimension three."""
        report = run("split", flags={"ricci": "2 0 0; 0 2 0; 0 0 2"})
        assert report.result["scalar"] == "6"
        assert report.result["components"]["1 2 1 2"] == "1"
        assert report.result["trace_ok"]
        assert report.certificates["trace"][0] == ["2", "0", "0"]

    def test_split_minkowski(self) -> None:
        """Verify fractions are accepted and the metric is reported."""
        ricci = "1/2 0 0 0; 0 1 0 0; 0 0 1 0; 0 0 0 -3"
        report = run("split", flags={"ricci": ricci, "metric": "minkowski", "n": 4})
        assert report.result["metric"] == "minkowski"
        assert report.result["trace_ok"]

    @pytest.mark.parametrize(
        ("flags", "fragment"),
        [
            ({}, "--ricci"),
            ({"ricci": "1 0; 0"}, "square"),
            ({"ricci": "1 a; 0 1 0"}, "integers or fractions"),
            ({"ricci": "1 0 0; 0 1 0; 0 0 1", "n": 4}, "does not match"),
            ({"ricci": "1 2 0; 0 1 0; 0 0 1"}, "symmetric"),
        ],
    )
    def test_split_errors(self, flags: dict[str, Any], fragment: str) -> None:
        """Verify malformed Ricci input gives error reports."""
        report = run("split", flags=flags)
        assert report.status == "error"
        assert fragment in report.message

    def test_catalog_list(self) -> None:
        """Verify every catalog entry is listed with its dimensions."""
        report = run("catalog-list")
        names = [entry["name"] for entry in report.result["systems"]]
        assert "killing" in names
        assert report.result["systems"][0]["dimensions"] == [1, 2, 3, 4]
