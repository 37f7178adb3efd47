"""Workflow orchestration, checkpoints, output files and the CLI."""

from .pipeline import (
    Evaluation,
    Pipeline,
    adjoint_spec
)

from .checkpoint import (
    Checkpoint,
    iteration_dir,
    latest_checkpoint,
    load_checkpoint,
    save_checkpoint
)

from .gradcheck import (
    GradCheckResult,
    compare,
    fd_gradient,
    run_gradcheck
)

from .commands import (
    OptimizeOutcome,
    cmd_adjoint,
    cmd_deform,
    cmd_grad_check,
    cmd_optimize,
    cmd_solve,
    cmd_validate
)

__all__ = [
    # Pipeline
    "Evaluation",
    "Pipeline",
    "adjoint_spec",

    # Checkpoints
    "Checkpoint",
    "iteration_dir",
    "latest_checkpoint",
    "load_checkpoint",
    "save_checkpoint",

    # Gradient check
    "GradCheckResult",
    "compare",
    "fd_gradient",
    "run_gradcheck",

    # Commands
    "OptimizeOutcome",
    "cmd_adjoint",
    "cmd_deform",
    "cmd_grad_check",
    "cmd_optimize",
    "cmd_solve",
    "cmd_validate",
]
