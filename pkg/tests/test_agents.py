import runpy

import pytest


class TestStandaloneChecks:
    def test_matrix_agent(self, capsys):
        runpy.run_module("agents.matrix_agent", run_name="__main__")
        assert "interaction matrix: 100 x 100" in capsys.readouterr().out

    def test_report_agent(self, capsys):
        runpy.run_module("agents.report_agent", run_name="__main__")
        out = capsys.readouterr().out
        assert "turbines: 10" in out
        # ten turbines side by side across a northerly wind
        assert "expected power: 5184.0 kW" in out

    @pytest.mark.slow
    def test_solver_agent(self, capsys):
        runpy.run_module("agents.solver_agent", run_name="__main__")
        assert "surrogate energy:" in capsys.readouterr().out
