"""End-to-end experiments: synthetic data, noise, estimation, sweeps.

Every wave experiment is driven by a manufactured exact solution: the
forward solver takes its boundary and initial data from it, and the source
is derived from it so the PDE holds exactly. The estimators never see
anything except noisy slices of the solver output.
"""

from __future__ import annotations

import configparser
import json
import math
import os
import tempfile
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import j1

from .basis import make_basis
from .errors import ConfigInvalid, RankDeficient, UnderdeterminedShape
from .estimators import (
    EstimateResult,
    assemble_ip1,
    assemble_ip2,
    assemble_ip3,
    assemble_kawahara,
    constant_c_moments,
    error_bound,
    estimate_constant_c,
    expand_block,
    literal_row_weights,
    noise_error_vector,
    reconstruct_spacetime,
    solve_least_squares,
)
from .forward import (
    WaveProblem,
    WaveSolution,
    kawahara_time_derivative,
    kawahara_values,
    solve_wave,
)
from .grid import (
    Field1D,
    Field2D,
    Grid1D,
    NoiseSpec,
    add_noise,
    interpolate_spatial,
    relative_error,
)
from .modulating import make_family, sup_norms

KAWAHARA_ALPHAS = (1.0, 1.0, 1.0)
PROBLEMS = ("ip1", "ip2", "ip2-const", "ip3", "kawahara")
DEFAULT_M = {"ip1": 27, "ip2": 11, "ip2-const": 11, "ip3": 17, "kawahara": 9}
# unknowns of degree <= 2 need few terms; larger I only amplifies noise in u
DEFAULT_I = {"ip1": 6, "ip2": 3, "ip2-const": 1, "ip3": 2, "kawahara": 3}
DEFAULT_J = 2


# --- manufactured scenarios ---------------------------------------------------

Fn = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class Scenario:
    """Exact solution ``u`` of ``u_tt - c u_xx = f`` together with ``c`` and ``f``."""

    name: str
    u: Fn
    u_t: Fn
    c: Fn
    f: Fn


_W = math.sqrt(0.5)
_JOINT_A, _JOINT_W = 2.0, 2.5


def _bessel_mode(x: np.ndarray) -> np.ndarray:
    """``sqrt(x) J1(2 w sqrt(x))`` solves ``x X'' + w^2 X = 0``."""
    r = np.sqrt(np.asarray(x, dtype=float))
    return r * j1(2.0 * _JOINT_W * r)


SCENARIOS: dict[str, Scenario] = {
    # zero initial data; u_tt stays close to f
    "source": Scenario(
        "source",
        u=lambda x, t: np.sin(x) * (2 * t * t - 8 + 8 * np.cos(_W * t)),
        u_t=lambda x, t: np.sin(x) * (4 * t - 8 * _W * np.sin(_W * t)),
        c=lambda x, t: 0.5 + 0 * x,
        f=lambda x, t: np.sin(x) * t * t,
    ),
    # sin(2x) gives the data enough curvature to pin down c
    "velocity-const": Scenario(
        "velocity-const",
        u=lambda x, t: np.sin(2 * x) * (2 * t * t - 8),
        u_t=lambda x, t: np.sin(2 * x) * 4 * t,
        c=lambda x, t: 0.5 + 0 * x,
        f=lambda x, t: np.sin(2 * x) * (4 * t * t - 12),
    ),
    "velocity-x2": Scenario(
        "velocity-x2",
        u=lambda x, t: np.sin(2 * x) * (2 * t * t - 8),
        u_t=lambda x, t: np.sin(2 * x) * 4 * t,
        c=lambda x, t: x * x + 0 * t,
        f=lambda x, t: 4 * np.sin(2 * x) * (1 + x * x * (2 * t * t - 8)),
    ),
    "velocity-xt2": Scenario(
        "velocity-xt2",
        u=lambda x, t: np.sin(2 * x) * (2 * t * t - 8),
        u_t=lambda x, t: np.sin(2 * x) * 4 * t,
        c=lambda x, t: (x * t) ** 2,
        f=lambda x, t: 4 * np.sin(2 * x) * (1 + (x * t) ** 2 * (2 * t * t - 8)),
    ),
    # f = c = x: forced part x t^2/2 plus a separated solution of w_tt = x w_xx.
    # A polynomial u would leave (f, c) unidentifiable from one slice.
    "joint": Scenario(
        "joint",
        u=lambda x, t: x * t * t / 2 + _JOINT_A * np.cos(_JOINT_W * t) * _bessel_mode(x),
        u_t=lambda x, t: x * t - _JOINT_A * _JOINT_W * np.sin(_JOINT_W * t) * _bessel_mode(x),
        c=lambda x, t: x + 0 * t,
        f=lambda x, t: x + 0 * t,
    ),
}


def wave_problem(s: Scenario, grid_x: Grid1D, grid_t: Grid1D) -> WaveProblem:
    L = grid_x.L
    return WaveProblem(
        grid_x,
        grid_t,
        c=s.c,
        f=s.f,
        g1=lambda t: float(s.u(np.array(0.0), t)),
        g2=lambda t: float(s.u(np.array(L), t)),
        r1=lambda x: s.u(x, 0.0),
        r2=lambda x: s.u_t(x, 0.0),
    )


@lru_cache(maxsize=4)
def _solve_cached(name: str, L: float, Nx: int, T: float, Nt: int) -> WaveSolution:
    return solve_wave(wave_problem(SCENARIOS[name], Grid1D(L, Nx), Grid1D(T, Nt)))


# --- configuration --------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of one experiment.

    ``t_star`` is ``"middle"``, ``"final"``, ``"three"`` (three-slice
    space-time reconstruction) or an integer time index. ``subsample`` keeps
    that many evenly spaced spatial measurements and spline-interpolates
    them back onto the grid.
    """

    problem: str = "ip1"
    velocity: str = "x2"
    L: float | None = None
    T: float | None = None
    Nx: int | None = None
    Nt: int | None = None
    lstar: float | None = None
    family: str = "polynomial"
    M: int | None = None
    q: float | None = None
    n: int = 6
    basis: str = "monomial"
    I: int | None = None
    J: int | None = None
    noise_levels: tuple[float, ...] = (0.0,)
    seeds: tuple[int, ...] = tuple(range(1, 21))
    t_star: str | int = "middle"
    subsample: int | None = None
    row_weighting: str = "unit"
    out: str | None = None
    allow_rank_deficient: bool = False

    def resolved(self) -> ExperimentConfig:
        """Fill problem-dependent defaults and validate."""
        if self.problem not in PROBLEMS:
            raise ConfigInvalid(f"unknown problem {self.problem!r}; expected one of {PROBLEMS}")
        kaw = self.problem == "kawahara"
        cfg = replace(
            self,
            L=self.L if self.L is not None else (60.0 if kaw else 3.0),
            T=self.T if self.T is not None else (50.0 if kaw else 1.0),
            Nx=self.Nx if self.Nx is not None else (601 if kaw else 3001),
            Nt=self.Nt if self.Nt is not None else (601 if kaw else 3001),
            M=self.M if self.M is not None else DEFAULT_M[self.problem],
            q=self.q if self.q is not None else (8.0 if kaw else 3.0),
            I=self.I if self.I is not None else DEFAULT_I[self.problem],
            J=self.J if self.J is not None else DEFAULT_J,
            noise_levels=tuple(float(v) for v in self.noise_levels),
            seeds=tuple(int(s) for s in self.seeds),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.problem == "ip2" and self.velocity not in ("x2", "xt2"):
            raise ConfigInvalid(f"ip2 velocity must be 'x2' or 'xt2', got {self.velocity!r}")
        for name in ("L", "T"):
            if not getattr(self, name) > 0:
                raise ConfigInvalid(f"{name} must be positive")
        for name in ("Nx", "Nt", "M", "I", "J"):
            if int(getattr(self, name)) < 1:
                raise ConfigInvalid(f"{name} must be a positive count")
        if self.Nx < 3 or self.Nt < 3:
            raise ConfigInvalid("grids need at least 3 nodes")
        if any(v < 0 for v in self.noise_levels):
            raise ConfigInvalid("noise levels must be >= 0")
        if not self.seeds:
            raise ConfigInvalid("at least one seed is required")
        if self.lstar is not None and not 0 < self.lstar <= self.L:
            raise ConfigInvalid(f"L* must lie in (0, L], got {self.lstar}")
        if self.family not in ("polynomial", "sinusoidal"):
            raise ConfigInvalid(f"unknown family {self.family!r}")
        if self.row_weighting not in ("unit", "raw"):
            raise ConfigInvalid(
                f"row_weighting must be 'unit' or 'raw', got {self.row_weighting!r}"
            )
        if self.row_weighting == "raw" and (
            self.problem == "ip2-const" or self.family != "polynomial"
        ):
            raise ConfigInvalid("raw row weighting applies to polynomial least-squares runs only")
        if self.basis not in ("monomial", "hermite"):
            raise ConfigInvalid(f"unknown basis {self.basis!r}")
        if self.subsample is not None and self.subsample < 4:
            raise ConfigInvalid("subsample needs at least 4 points")
        if isinstance(self.t_star, str) and self.t_star not in ("middle", "final", "three"):
            raise ConfigInvalid(f"unknown t_star policy {self.t_star!r}")
        if self.t_star == "three" and self.problem in ("ip3", "kawahara", "ip2-const"):
            raise ConfigInvalid(f"three-slice reconstruction is not defined for {self.problem}")
        if self.M < self.unknown_count():
            raise UnderdeterminedShape(
                f"{self.problem}: M={self.M} modulating functions for "
                f"{self.unknown_count()} unknowns (I={self.I}, J={self.J})"
            )

    def unknown_count(self) -> int:
        return {
            "ip1": self.I,
            "ip2": self.I,
            "ip2-const": 1,
            "ip3": self.I + self.J,
            "kawahara": 3,
        }[self.problem]

    def time_indices(self) -> list[int]:
        nt = self.Nt
        if self.t_star == "middle":
            return [nt // 2]
        if self.t_star == "final":
            return [nt - 1]
        if self.t_star == "three":
            return [math.ceil(nt / 4), math.ceil(nt / 2), nt - 1]
        idx = int(self.t_star)
        if not 0 <= idx < nt:
            raise ConfigInvalid(f"time index {idx} outside 0..{nt - 1}")
        return [idx]


_INT_KEYS = {"Nx", "Nt", "M", "n", "I", "J", "subsample"}
_FLOAT_KEYS = {"L", "T", "lstar", "q"}
_LIST_KEYS = {"noise_levels": float, "seeds": int}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if key in _LIST_KEYS:
        conv = _LIST_KEYS[key]
        if key == "seeds" and ".." in raw:
            lo, hi = raw.split("..")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(conv(v) for v in raw.replace(",", " ").split())
    if raw.lower() in ("", "none"):
        return None
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key == "allow_rank_deficient":
        return raw.lower() in ("1", "true", "yes", "on")
    if key == "t_star":
        return int(raw) if raw.lstrip("-").isdigit() else raw
    return raw


_FIELDS = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
# INI keys arrive lower-cased; names are unique ignoring case
_BY_LOWER = {name.lower(): name for name in _FIELDS}


def load_config(path: str | Path | None = None, **overrides) -> ExperimentConfig:
    """Read an INI file (any section layout; keys are global) plus overrides."""
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise ConfigInvalid(f"cannot read config file {path}")
        for section in parser.sections():
            for lower, raw in parser.items(section):
                key = _BY_LOWER.get(lower)
                if key is None:
                    raise ConfigInvalid(f"unknown config key {lower!r} in [{section}]")
                values[key] = _coerce(key, raw)
    for key, val in overrides.items():
        if val is None:
            continue
        if key not in _FIELDS:
            raise ConfigInvalid(f"unknown config key {key!r}")
        values[key] = _coerce(key, val) if isinstance(val, str) else val
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from exc


# --- running --------------------------------------------------------------------


def child_seed(seed: int, *path: int) -> int:
    """Independent stream derived from ``seed`` and a position path."""
    return int(np.random.SeedSequence([seed, *path]).generate_state(1)[0])


def _scenario_name(cfg: ExperimentConfig) -> str:
    return {
        "ip1": "source",
        "ip2-const": "velocity-const",
        "ip2": f"velocity-{cfg.velocity}",
        "ip3": "joint",
    }[cfg.problem]


def _stable_nt(cfg: ExperimentConfig, scenario: Scenario) -> int:
    """Smallest ``Nt >= cfg.Nt`` satisfying CFL <= 1."""
    nt = cfg.Nt
    probe = wave_problem(scenario, Grid1D(cfg.L, cfg.Nx), Grid1D(cfg.T, nt))
    courant = probe.cfl()
    if courant <= 1.0:
        return nt
    return math.ceil((nt - 1) * courant * 1.001) + 1


@dataclass
class Measurement:
    t_index: int
    t: float
    u: Field1D
    second: Field1D  # u_tt for wave problems, u_t for Kawahara
    exact: dict[str, Field1D] = field(default_factory=dict)


def _subsample(field_: Field1D, count: int) -> Field1D:
    idx = np.unique(np.round(np.linspace(0, field_.grid.N - 1, count)).astype(int))
    x = field_.grid.nodes
    return interpolate_spatial(list(zip(x[idx], field_.values[idx])), field_.grid)


def measurements(cfg: ExperimentConfig) -> tuple[list[Measurement], Field2D | None, dict]:
    """Noise-free slices for ``cfg``, the wave solution (``None`` for Kawahara) and run info."""
    gx = Grid1D(cfg.L, cfg.Nx)
    if cfg.problem == "kawahara":
        gt = Grid1D(cfg.T, cfg.Nt)
        out = []
        for n in cfg.time_indices():
            t = float(gt.nodes[n])
            out.append(
                Measurement(
                    n,
                    t,
                    Field1D(gx, kawahara_values(gx.nodes, t)),
                    Field1D(gx, kawahara_time_derivative(gx.nodes, t)),
                )
            )
        return out, None, {"Nt": cfg.Nt}
    scenario = SCENARIOS[_scenario_name(cfg)]
    nt = _stable_nt(cfg, scenario)
    gt = Grid1D(cfg.T, nt)
    sol = _solve_cached(scenario.name, cfg.L, cfg.Nx, cfg.T, nt)
    run_cfg = replace(cfg, Nt=nt)
    x = gx.nodes
    out = []
    for n in run_cfg.time_indices():
        t = float(gt.nodes[n])
        out.append(
            Measurement(
                n,
                t,
                sol.u.slice(n),
                sol.u_tt.slice(n),
                exact={"f": Field1D(gx, scenario.f(x, t)), "c": Field1D(gx, scenario.c(x, t))},
            )
        )
    return out, sol, {"Nt": nt}


def _noisy(m: Measurement, level: float, seed: int, slot: int) -> tuple[Field1D, Field1D]:
    u = add_noise(m.u, NoiseSpec(level, child_seed(seed, slot, 0)))
    second = add_noise(m.second, NoiseSpec(level, child_seed(seed, slot, 1)))
    return u, second


def estimate_slice(
    cfg: ExperimentConfig, u: Field1D, second: Field1D, t: float, exact: dict[str, Field1D]
) -> EstimateResult:
    """Run the configured estimator on one (possibly noisy) slice."""
    grid = u.grid
    if cfg.lstar is not None and cfg.lstar < cfg.L:
        n = math.floor(cfg.lstar / grid.dx + 1e-9) + 1
        u, second = u.head(n), second.head(n)
        exact = {k: v.head(n) for k, v in exact.items()}
        grid = u.grid
    fam = make_family(cfg.family, cfg.M, grid.L, q=cfg.q, n=cfg.n)

    def solve(system):
        weights = literal_row_weights(system) if cfg.row_weighting == "raw" else None
        return solve_least_squares(system, weights)

    if cfg.problem == "kawahara":
        res = solve(assemble_kawahara(u, second, fam))
        errs = {
            f"alpha{i + 1}": 100.0 * abs(a - truth) / abs(truth)
            for i, (a, truth) in enumerate(zip(res.coeffs, KAWAHARA_ALPHAS))
        }
        return replace(res, relative_errors=errs)
    if cfg.problem == "ip2-const":
        c_hat = estimate_constant_c(u, second, exact["f"], fam)
        a, k = constant_c_moments(u, second, exact["f"], fam)
        c_true = float(exact["c"].values[0])
        return EstimateResult(
            coeffs=np.array([c_hat]),
            column_labels=("c",),
            residual_norm=float(np.linalg.norm(a * c_hat - k)),
            condition_estimate=1.0,
            rank_deficient=False,
            relative_errors={"c": 100.0 * abs(c_hat - c_true) / abs(c_true)},
            metadata={"problem": "ip2-const"},
        )
    basis = make_basis(cfg.basis, cfg.I, grid.L)
    if cfg.problem == "ip1":
        sys = assemble_ip1(u, second, float(exact["c"].values[0]), fam, basis)
        unknowns = {"f": basis}
    elif cfg.problem == "ip2":
        sys = assemble_ip2(u, second, exact["f"], fam, basis)
        unknowns = {"c": basis}
    else:
        basis_c = make_basis(cfg.basis, cfg.J, grid.L)
        sys = assemble_ip3(u, second, fam, basis, basis_c)
        unknowns = {"f": basis, "c": basis_c}
    res = solve(sys)
    recon = {k: expand_block(res, k, b, grid) for k, b in unknowns.items()}
    errs = {k: relative_error(recon[k], exact[k]) for k in unknowns}
    return replace(res, reconstructed=recon, relative_errors=errs)


@dataclass
class RunRecord:
    """One (noise level, seed) outcome, ready for JSON."""

    problem: str
    noise_level: float
    seed: int
    t_star: list[float]
    relative_error_percent: dict[str, float]
    coeffs: list[list[float]]
    residual_norm: float
    condition_estimate: float
    rank_deficient: bool
    M: int
    q: float | None
    I: int | None
    J: int | None
    extra: dict = field(default_factory=dict)
    fields: dict[str, Field1D | Field2D] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("fields")
        return d


def run_single(cfg: ExperimentConfig, level: float, seed: int, data=None) -> RunRecord:
    """Estimate once for one noise level and seed."""
    cfg = cfg.resolved()
    meas, _, info = data if data is not None else measurements(cfg)
    results = []
    for slot, m in enumerate(meas):
        u, second = _noisy(m, level, seed, slot)
        if cfg.subsample is not None:
            u, second = _subsample(u, cfg.subsample), _subsample(second, cfg.subsample)
        res = estimate_slice(cfg, u, second, m.t, m.exact)
        if res.rank_deficient and not cfg.allow_rank_deficient:
            raise RankDeficient(
                f"{cfg.problem} at t={m.t:.6g}: condition estimate {res.condition_estimate:.3g} "
                "exceeds 1e12 (set allow_rank_deficient to keep the minimum-norm solution)"
            )
        results.append(res)
    errors = dict(results[0].relative_errors) if len(results) == 1 else {}
    fields: dict = {}
    if len(results) == 1:
        fields.update(results[0].reconstructed)
    else:
        key = "f" if cfg.problem == "ip1" else "c"
        gt = Grid1D(cfg.T, info["Nt"])
        surface = reconstruct_spacetime(
            [(m.t, r.reconstructed[key]) for m, r in zip(meas, results)], gt
        )
        exact = _exact_surface(cfg, key, surface.grid_x, gt)
        errors = {key: relative_error(surface, exact)}
        errors.update({f"{key}@t={m.t:.6g}": r.relative_errors[key] for m, r in zip(meas, results)})
        fields[key] = surface
    cfg_q = cfg.q if cfg.family == "polynomial" else None
    return RunRecord(
        problem=cfg.problem if cfg.problem != "ip2" else f"ip2-{cfg.velocity}",
        noise_level=level,
        seed=seed,
        t_star=[m.t for m in meas],
        relative_error_percent=errors,
        coeffs=[r.coeffs.tolist() for r in results],
        residual_norm=max(r.residual_norm for r in results),
        condition_estimate=max(r.condition_estimate for r in results),
        rank_deficient=any(r.rank_deficient for r in results),
        M=cfg.M,
        q=cfg_q,
        I=cfg.I if cfg.problem in ("ip1", "ip2", "ip3") else None,
        J=cfg.J if cfg.problem == "ip3" else None,
        extra={"Nt_used": info["Nt"], "lstar": cfg.lstar if cfg.lstar is not None else cfg.L},
        fields=fields,
    )


def _exact_surface(cfg: ExperimentConfig, key: str, gx: Grid1D, gt: Grid1D) -> Field2D:
    s = SCENARIOS[_scenario_name(cfg)]
    fn = s.f if key == "f" else s.c
    X, Tm = np.meshgrid(gx.nodes, gt.nodes)
    return Field2D(gx, gt, np.broadcast_to(fn(X, Tm), X.shape))


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """Every (noise level, seed) pair of ``cfg``; zero-noise levels run once."""
    cfg = cfg.resolved()
    data = measurements(cfg)
    records = []
    for level in cfg.noise_levels:
        seeds = cfg.seeds[:1] if level == 0 else cfg.seeds
        for seed in seeds:
            records.append(run_single(cfg, level, seed, data))
    if cfg.out:
        write_summary(cfg, records)
    return records


# --- sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: tuple[float, ...]
    errors: dict[str, tuple[float, ...]]

    def argmin(self, unknown: str | None = None) -> float:
        key = unknown or next(iter(self.errors))
        return self.values[int(np.argmin(self.errors[key]))]

    def to_csv(self) -> str:
        keys = list(self.errors)
        lines = [",".join(["axis"] + [f"median_rel_err_{k}" for k in keys])]
        for i, v in enumerate(self.values):
            lines.append(",".join([repr(v)] + [repr(self.errors[k][i]) for k in keys]))
        return "\n".join(lines) + "\n"


def _aggregate(axis: str, values: Sequence, per_value: list[list[RunRecord]]) -> SweepResult:
    keys = list(per_value[0][0].relative_error_percent)
    keys = [k for k in keys if "@" not in k]
    errors = {
        k: tuple(
            float(np.median([r.relative_error_percent[k] for r in recs])) for recs in per_value
        )
        for k in keys
    }
    return SweepResult(axis, tuple(values), errors)


def _sweep(cfg: ExperimentConfig, axis: str, values: Sequence, make) -> SweepResult:
    cfg = cfg.resolved()
    if len(cfg.noise_levels) != 1:
        raise ConfigInvalid("a sweep needs exactly one noise level")
    level = cfg.noise_levels[0]
    seeds = cfg.seeds[:1] if level == 0 else cfg.seeds
    data = None
    per_value = []
    for v in values:
        point = make(cfg, v).resolved()
        if data is None:
            data = measurements(point)
        per_value.append([run_single(point, level, s, data) for s in seeds])
    return _aggregate(axis, values, per_value)


def sweep_m(cfg: ExperimentConfig, m_values: Sequence[int]) -> SweepResult:
    """Median relative error over seeds for each number of modulating functions."""
    if not m_values:
        raise ConfigInvalid("empty M sweep")
    need = cfg.resolved().unknown_count()
    if min(m_values) < need:
        raise ConfigInvalid(f"every M must be >= {need} for {cfg.problem}, got {min(m_values)}")
    return _sweep(cfg, "M", [int(m) for m in m_values], lambda c, m: replace(c, M=m))


def sweep_domain(cfg: ExperimentConfig, lstar_values: Sequence[float]) -> SweepResult:
    """Median relative error when only ``[0, L*]`` is observed."""
    if not lstar_values:
        raise ConfigInvalid("empty L* sweep")
    L = cfg.resolved().L
    bad = [v for v in lstar_values if not 0 < v <= L]
    if bad:
        raise ConfigInvalid(f"L* values must lie in (0, {L}], got {bad}")
    return _sweep(cfg, "Lstar", [float(v) for v in lstar_values], lambda c, v: replace(c, lstar=v))


# --- output ---------------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def summary_json(records: Sequence[RunRecord]) -> str:
    return json.dumps([r.to_json() for r in records], indent=2, sort_keys=True) + "\n"


def write_summary(cfg: ExperimentConfig, records: Sequence[RunRecord]) -> None:
    from .grid import write_field2d_csv, write_field_csv

    out = Path(cfg.out)
    _atomic_write(out / "summary.json", summary_json(records))
    for r in records:
        for name, fld in r.fields.items():
            path = out / f"{r.problem}_{name}_noise{r.noise_level:g}_seed{r.seed}.csv"
            tmp = path.with_name(f".{path.name}.tmp")
            (write_field_csv if isinstance(fld, Field1D) else write_field2d_csv)(tmp, fld)
            os.replace(tmp, path)


# --- noise error bound ------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    level: float
    draw: int
    error_norm: float
    bound: float

    @property
    def violated(self) -> bool:
        return self.error_norm > self.bound


def error_bound_study(
    cfg: ExperimentConfig, levels: Sequence[float] = (1, 3, 5, 10), draws: int = 100
) -> list[BoundCheck]:
    """Compare ``||e||_1`` with ``M nu delta (1 + c) L`` on the source problem.

    ``h1``/``h2`` are calibrated noise draws on the measured ``u``/``u_tt``
    slice; ``nu`` and ``delta`` are taken from the realised functions.
    """
    cfg = replace(cfg, problem="ip1").resolved()
    if draws < 1:
        raise ConfigInvalid("need at least one draw")
    m = measurements(cfg)[0][0]
    grid = m.u.grid
    c = float(m.exact["c"].values[0])
    fam = make_family(cfg.family, cfg.M, grid.L, q=cfg.q, n=cfg.n)
    nu = max(sup_norms(fam, grid.nodes))
    out = []
    for level in levels:
        for d in range(draws):
            seed = child_seed(cfg.seeds[0], round(level * 1000), d)
            h1 = add_noise(m.u, NoiseSpec(level, seed)).values - m.u.values
            h2 = add_noise(m.second, NoiseSpec(level, seed + 1)).values - m.second.values
            e = noise_error_vector(Field1D(grid, h1), Field1D(grid, h2), c, fam)
            delta = max(np.max(np.abs(h1)), np.max(np.abs(h2)))
            out.append(
                BoundCheck(
                    level, d, float(np.sum(np.abs(e))), error_bound(cfg.M, nu, delta, c, grid.L)
                )
            )
    return out
