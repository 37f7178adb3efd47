"""Run configuration and process settings."""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ConfigError


class Scheme(str, Enum):
    """Spatial discretizations."""
    FV1 = "FV1"
    FV2 = "FV2"
    DGP1 = "DGp1"
    DGP2 = "DGp2"

    @property
    def order(self) -> int:
        """Polynomial degree of the element-local representation."""
        return {"FV1": 0, "FV2": 0, "DGp1": 1, "DGp2": 2}[self.value]

    @property
    def is_dg(self) -> bool:
        return self in (Scheme.DGP1, Scheme.DGP2)

    @property
    def n_basis(self) -> int:
        return {0: 1, 1: 3, 2: 6}[self.order]


class RiemannSolver(str, Enum):
    LLF = "llf"
    HLLC = "hllc"


class AvVariant(str, Enum):
    """Which strong-residual estimate feeds the AV coefficient."""
    VOLUME = "volume"
    FACE = "face"


class AvIndicator(str, Enum):
    ALWAYS = "always"
    MODAL_DECAY = "modal_decay"
    NONE = "none"


class SlopeLimiter(str, Enum):
    BARTH_JESPERSEN = "barth_jespersen"
    NONE = "none"


class Preconditioner(str, Enum):
    ILU = "ilu"
    BLOCK_JACOBI = "block_jacobi"
    NONE = "none"


class ParameterizationKind(str, Enum):
    FFD = "ffd"
    HICKS_HENNE = "hicks_henne"


class StepMode(str, Enum):
    DETERMINISTIC = "deterministic"
    RANDOM = "random"


class AppSettings(BaseSettings):
    """Process-level settings read from the environment."""

    model_config = SettingsConfigDict(env_prefix="AERODG_", env_file=".env", env_file_encoding="utf-8", extra="ignore")

    LOG_LEVEL: str = Field(default="INFO")
    LOG_FORMAT: str = Field(default="console")
    WORKERS: int = Field(default=1, ge=1)
    DEBUG: bool = Field(default=False)

    @field_validator("LOG_FORMAT")
    @classmethod
    def check_format(cls, v: str) -> str:
        if v not in ("console", "json"):
            raise ValueError("LOG_FORMAT must be 'console' or 'json'")
        return v


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FreestreamConfig(_Section):
    mach: float = Field(default=0.8, gt=0.0)
    aoa: float = Field(default=1.25, description="angle of attack in degrees")
    gamma: float = Field(default=1.4, gt=1.0)


class ArtificialViscosityConfig(_Section):
    variant: AvVariant = AvVariant.VOLUME
    indicator: AvIndicator = AvIndicator.ALWAYS
    c_eps: float = 0.01
    beta: float = Field(default=0.1, ge=0.0, le=1.0)

    @field_validator("c_eps")
    @classmethod
    def check_c_eps(cls, v: float) -> float:
        # 0 switches AV off
        if v != 0.0 and not 0.0005 <= v <= 0.5:
            raise ValueError("c_eps must be 0 or lie in [0.0005, 0.5]")
        return v

    @property
    def active(self) -> bool:
        return self.c_eps > 0.0 and self.indicator is not AvIndicator.NONE


class CflConfig(_Section):
    initial: float = Field(default=10.0, gt=0.0)
    theta_min: float = Field(default=0.8, gt=0.0)
    theta_max: float = Field(default=2.0, gt=0.0)
    maximum: float = Field(default=1.0e6, gt=0.0)

    @model_validator(mode="after")
    def check_growth_limits(self) -> "CflConfig":
        if not self.theta_min <= 1.0 <= self.theta_max:
            raise ValueError("CFL growth limits must satisfy theta_min <= 1 <= theta_max")
        return self


class LinearSolverConfig(_Section):
    preconditioner: Preconditioner = Preconditioner.ILU
    restart: int = Field(default=50, ge=1)
    maxiter: int = Field(default=40, ge=1)
    inner_tol: float = Field(default=1e-4, gt=0.0)
    adjoint_tol: float = Field(default=1e-10, gt=0.0, description="bound on the final relative adjoint residual")
    ilu_drop_tol: float = Field(default=1e-5, ge=0.0)
    ilu_fill_factor: float = Field(default=10.0, ge=1.0)


class QuadratureConfig(_Section):
    volume_degree: Optional[int] = Field(default=None, ge=1, le=5)
    face_points: Optional[int] = Field(default=None, ge=1, le=6)


class SolverConfig(_Section):
    scheme: Scheme = Scheme.DGP1
    riemann: RiemannSolver = RiemannSolver.LLF
    av: ArtificialViscosityConfig = ArtificialViscosityConfig()
    cfl: CflConfig = CflConfig()
    limiter: SlopeLimiter = SlopeLimiter.BARTH_JESPERSEN
    linear: LinearSolverConfig = LinearSolverConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    tolerance: float = Field(default=1e-8, gt=0.0)
    abs_tolerance: float = Field(default=1e-12, ge=0.0)
    max_steps: int = Field(default=200, ge=0)
    divergence_factor: float = Field(default=1e6, gt=1.0)
    positivity_eps: float = Field(default=1e-10, gt=0.0)
    jacobian_step: float = Field(default=1e-7, gt=0.0)
    jacobian_update_interval: int = Field(default=1, ge=1)


class FfdConfig(_Section):
    box: Tuple[float, float, float, float] = (-0.05, -0.1, 1.05, 0.1)
    lattice: Tuple[int, int] = (4, 2)
    active_x: bool = False
    bound_fraction: float = Field(default=0.25, gt=0.0)

    @model_validator(mode="after")
    def check_box(self) -> "FfdConfig":
        xmin, ymin, xmax, ymax = self.box
        if xmin >= xmax or ymin >= ymax:
            raise ValueError("FFD box must be given as xmin ymin xmax ymax with positive extents")
        if min(self.lattice) < 2:
            raise ValueError("FFD lattice needs at least 2 control points per direction")
        return self


class HicksHenneConfig(_Section):
    n_bumps: int = Field(default=16, ge=1)
    exponent: float = Field(default=3.0, gt=0.0)
    bound: float = Field(default=0.005, gt=0.0)


class ParameterizationConfig(_Section):
    kind: ParameterizationKind = ParameterizationKind.FFD
    ffd: FfdConfig = FfdConfig()
    hicks_henne: HicksHenneConfig = HicksHenneConfig()


class RbfConfig(_Section):
    radius: float = Field(default=10.0, gt=0.0)
    regularization: float = Field(default=1e-12, ge=0.0)


class AdjointConfig(_Section):
    sigma_rel: float = Field(default=1e-6, gt=0.0)
    step_mode: StepMode = StepMode.DETERMINISTIC
    seed: int = 0
    max_halvings: int = Field(default=8, ge=0)


class OptimizerConfig(_Section):
    max_iter: int = Field(default=30, ge=0)
    kkt_tol: float = Field(default=1e-6, gt=0.0)
    merit_rho_margin: float = Field(default=1.1, ge=1.0)
    noise_floor_ratio: float = Field(default=1e-5, ge=0.0)
    feasibility_tol: float = Field(default=1e-6, gt=0.0)
    armijo: float = Field(default=1e-4, gt=0.0, lt=1.0)
    max_backtracks: int = Field(default=10, ge=0)
    qp_max_iter: int = Field(default=500, ge=1)


class ObjectiveConfig(_Section):
    lift_constraint: bool = True
    area_constraint: bool = True
    chord: float = Field(default=1.0, gt=0.0)


class GradCheckConfig(_Section):
    tolerance: float = Field(default=1e-3, ge=0.0)
    noise_ratio: float = Field(default=1e-3, ge=0.0)
    fd_step: float = Field(default=1e-4, gt=0.0)
    solve_tolerance: float = Field(default=1e-12, gt=0.0)
    schemes: List[Scheme] = Field(default_factory=list)

    @field_validator("schemes", mode="before")
    @classmethod
    def wrap_single_scheme(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [v]
        return v


class RunConfig(_Section):
    """Complete description of one run."""

    mesh: Path
    output_dir: Path = Path("runs/default")
    freestream: FreestreamConfig = FreestreamConfig()
    solver: SolverConfig = SolverConfig()
    parameterization: ParameterizationConfig = ParameterizationConfig()
    rbf: RbfConfig = RbfConfig()
    adjoint: AdjointConfig = AdjointConfig()
    opt: OptimizerConfig = OptimizerConfig()
    objective: ObjectiveConfig = ObjectiveConfig()
    gradcheck: GradCheckConfig = GradCheckConfig()
    warm_start: bool = True

    @model_validator(mode="before")
    @classmethod
    def lift_top_level_scheme(cls, data: Any) -> Any:
        if isinstance(data, dict) and "scheme" in data:
            data = dict(data)
            solver = dict(data.get("solver") or {})
            solver.setdefault("scheme", data.pop("scheme"))
            data["solver"] = solver
        return data

    @field_validator("mesh")
    @classmethod
    def mesh_exists(cls, v: Path) -> Path:
        if not v.is_file():
            raise ValueError(f"mesh file not found: {v}")
        return v

    @property
    def scheme(self) -> Scheme:
        return self.solver.scheme


def _parse_value(raw: str) -> Any:
    tokens = raw.split()
    if len(tokens) > 1:
        return [_parse_scalar(t) for t in tokens]
    return _parse_scalar(raw)


def _parse_scalar(token: str) -> Any:
    lowered = token.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(token)
        except ValueError:
            pass
    return token


def parse_config_text(text: str) -> Dict[str, Any]:
    """Parse the flat dotted key-value format into a nested mapping."""
    tree: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'", details={"line": lineno})
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if not key or not raw:
            raise ConfigError(f"line {lineno}: empty key or value", key=key or None, details={"line": lineno})
        node = tree
        *parents, leaf = key.split(".")
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"line {lineno}: '{part}' is both a value and a section", key=key)
            node = child
        if leaf in node:
            raise ConfigError(f"line {lineno}: duplicate key", key=key)
        node[leaf] = _parse_value(raw)
    return tree


def load_run_config(path: Path, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Read and validate a run-config file; relative mesh paths resolve against the file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}", details={"path": str(path)}) from exc

    tree = parse_config_text(text)
    if overrides:
        tree.update(overrides)
    mesh = tree.get("mesh")
    if isinstance(mesh, str) and not Path(mesh).is_absolute():
        tree["mesh"] = str(Path(path).parent / mesh)
    return validate_run_config(tree)


def validate_run_config(tree: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(tree)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = ".".join(str(p) for p in first["loc"])
        raise ConfigError(
            f"invalid configuration at '{key}': {first['msg']}",
            key=key,
            details={"errors": len(exc.errors())},
        ) from exc


def get_settings() -> AppSettings:
    return AppSettings()
