# automated pipeline: matrixagent + solveragent + reportagent for the wind-farm layout optimizer

import argparse
import logging
import sys
import time
from typing import Any, Dict, Optional, TypedDict

import numpy as np
from langgraph.graph import END, StateGraph

from agents.matrix_agent import MatrixAgent
from agents.report_agent import ReportAgent
from agents.solver_agent import SolverAgent
from config.settings import RunConfig, load_config, setup_logging
from inference.qip_mrf import surrogate_energy

logger = logging.getLogger("pipeline")

RECURSION_LIMIT = 100


class PipelineState(TypedDict, total=False):
    cfg: RunConfig
    write_outputs: bool
    rose: Any
    grid: Any
    spec: Any
    params: Any
    exclusions: Any
    matrix: Any
    matrix_seconds: float
    qip: Any
    beta: float
    escalations_left: int
    mrf: Any
    solver: Any
    deadline: float
    solve_report: Any
    tightened: Any
    rounded: Any
    layout: Any
    solve_started: float
    solve_seconds: float
    evaluation: Any
    report: Dict[str, Any]
    outputs: Dict[str, str]


# each step receives the state dict and returns the keys it sets

def matrix_step(state):
    # build the farm instance and its wake interaction matrix
    return MatrixAgent().build(state["cfg"])


def model_step(state):
    # penalized mrf; a second visit means the budget was missed and beta doubles
    agent = SolverAgent(state["cfg"])
    qip = state.get("qip") or agent.qip(state["matrix"], state["exclusions"])
    if "beta" in state:
        beta = 2.0 * state["beta"]
        left = state["escalations_left"] - 1
        logger.info("budget missed, escalating beta to %.6g (%d escalations left)", beta, left)
    else:
        beta = None
        left = state["cfg"].penalty.escalations
    mrf, beta = agent.model(qip, beta)
    return {"qip": qip, "mrf": mrf, "beta": beta, "escalations_left": left, "solve_started": state.get("solve_started", time.time())}


def solve_step(state):
    # trws on the penalized model; after an escalation the first deadline still holds
    solver, report, deadline = SolverAgent(state["cfg"]).solve(state["mrf"], state.get("deadline"))
    return {"solver": solver, "solve_report": report, "deadline": deadline}


def tighten_step(state):
    # add triplet clusters and re-solve from the current messages
    tightened, report = SolverAgent(state["cfg"]).tighten(state["solver"], state["solve_report"], state["deadline"])
    return {"tightened": tightened, "solve_report": report}


def decode_step(state):
    # round min-marginals to exactly k feasible turbines
    rounded = SolverAgent(state["cfg"]).decode(state["solve_report"], state["qip"])
    return {"rounded": rounded}


def repair_step(state):
    layout = SolverAgent(state["cfg"]).repair(state["rounded"], state["qip"])
    return {"layout": layout, "solve_seconds": time.time() - state["solve_started"]}


def baseline_step(state):
    # greedy, local search or brute force instead of message passing
    start = time.time()
    agent = SolverAgent(state["cfg"])
    qip = agent.qip(state["matrix"], state["exclusions"])
    layout = agent.baseline(qip, progress=True)
    return {"qip": qip, "layout": layout, "solve_seconds": time.time() - start}


def evaluate_step(state):
    # true power with the full wake model, then the report files
    cfg = state["cfg"]
    agent = ReportAgent()
    evaluation = agent.evaluate(state["layout"], state["grid"], state["rose"], state["spec"], state["params"])
    solve_report = state.get("solve_report")
    extra = {
        "solver": cfg.solver.name,
        "surrogate_energy": surrogate_energy(state["matrix"], np.flatnonzero(state["layout"])),
        "matrix_seconds": state["matrix_seconds"],
        "solve_seconds": state["solve_seconds"],
        "beta": state.get("beta"),
        "clusters": len(state["tightened"].clusters) if state.get("tightened") else 0,
        "rounded_cells": [int(c) for c in np.flatnonzero(state["rounded"])] if state.get("rounded") is not None else None,
    }
    report = agent.build_report(cfg, evaluation, solve_report, extra)
    outputs = {}
    if state.get("write_outputs", True):
        outputs = agent.write(cfg.output_dir, state["layout"], state["grid"], report, state["rose"].dominant_direction())
    return {"evaluation": evaluation, "report": report, "outputs": outputs}


def route_solver(state):
    return "model" if state["cfg"].solver.name == "mp" else "baseline"


def route_budget(state):
    agent = SolverAgent(state["cfg"])
    if state["escalations_left"] > 0 and agent.needs_escalation(state["solve_report"], state["qip"].k):
        return "model"
    return "decode"


def build_workflow():
    workflow = StateGraph(PipelineState)
    workflow.add_node("matrix", matrix_step)
    workflow.add_node("model", model_step)
    workflow.add_node("solve", solve_step)
    workflow.add_node("tighten", tighten_step)
    workflow.add_node("decode", decode_step)
    workflow.add_node("repair", repair_step)
    workflow.add_node("baseline", baseline_step)
    workflow.add_node("evaluate", evaluate_step)
    workflow.set_entry_point("matrix")
    workflow.add_conditional_edges("matrix", route_solver, {"model": "model", "baseline": "baseline"})
    workflow.add_edge("model", "solve")
    workflow.add_edge("solve", "tighten")
    workflow.add_conditional_edges("tighten", route_budget, {"model": "model", "decode": "decode"})
    workflow.add_edge("decode", "repair")
    workflow.add_edge("repair", "evaluate")
    workflow.add_edge("baseline", "evaluate")
    workflow.add_edge("evaluate", END)
    return workflow.compile()


def run_solve(cfg: RunConfig, write_outputs: bool = True) -> Dict[str, Any]:
    graph = build_workflow()
    return graph.invoke({"cfg": cfg, "write_outputs": write_outputs}, config={"recursion_limit": RECURSION_LIMIT})


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(description="run the end-to-end layout pipeline on one config")
    parser.add_argument("config", help="run config (yaml)")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    print("\n=== wflo: automated layout pipeline (langgraph) ===\n")
    try:
        result = run_solve(load_config(args.config))
    except (ValueError, OSError) as e:
        logger.error("%s", e)
        return 1
    evaluation = result["evaluation"]
    print(f"  turbines placed: {len(evaluation.cells)}")
    print(f"  expected power: {evaluation.expected_power_kw:.1f} kW")
    print(f"  aep: {evaluation.aep_kwh:.6g} kWh")
    for kind, path in result.get("outputs", {}).items():
        print(f"  {kind}: {path}")
    print("\n=== end ===\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
