"""Direct integration of the radial mass equation (classical diffusion).

The cumulative mass M(r, t) of a radial solution closes into the 1-D equation

    M_t = M_rr - (d-1)/r M_r + sigma_d^{-1} r^{1-d} M M_r,
    M(0, t) = 0,

whose linear part is discretized in divergence form
r^{d-1} d/dr (r^{1-d} dM/dr) (an M-matrix on any grid, so the scheme is
monotone wherever advection is resolved) and whose nonlinear term uses a
second-order centered gradient.  Time stepping is an explicit embedded
Bogacki-Shampine 3(2) pair under a parabolic stability cap; steps that break
nonnegativity or radial monotonicity of M are rejected and retried at dt/2.
Blowup is witnessed discretely: either the origin density M(r_1) d/(sigma_d
r_1^d) crosses a cap, or dt collapses to the floor under exploding local
error.  Both thresholds are configurable and the detected time must be
insensitive to them (that insensitivity is part of the test suite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericsError, ResolutionError, ValidationError
from .radial import MassProfile, RadialProfile, TruncatedChandrasekhar, check_dimension, mass_profile, sphere_area

__all__ = [
    "SolverGrid",
    "build_grid",
    "SolverControls",
    "BlowupEvent",
    "SimResult",
    "run",
    "gaussian_moment",
    "comparison_check",
    "ComparisonReport",
    "truncation_scaling",
    "TruncationScalingResult",
]

_STAB_SAFETY = 0.9
_RK_STABLE_REAL = 2.5  # real-axis stability reach of the BS 3(2) pair
_GROWTH_MAX = 5.0
_SHRINK_MIN = 0.2
_DEFAULT_PROBE_FACTORS = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)


@dataclass(frozen=True, eq=False)
class SolverGrid:
    """Strictly increasing nodes r_1 < ... < r_n with r_1 > 0.

    Default construction is a uniform inner patch continued geometrically,
    with spacing continuous at the switch radius; ``inner_fraction = 0``
    falls back to a pure geometric grid starting at r_max * 1e-4.
    """

    r: np.ndarray
    r_switch: float

    @property
    def n(self) -> int:
        return self.r.size


def build_grid(
    r_max: float,
    n: int,
    inner_fraction: float = 0.5,
    breakpoints: tuple[float, ...] = (),
) -> SolverGrid:
    if r_max <= 0 or n < 16:
        raise ValidationError("need r_max > 0 and n >= 16")
    if not 0.0 <= inner_fraction <= 1.0:
        raise ValidationError("inner_fraction must be in [0, 1]")
    n_in = int(round(n * inner_fraction))
    if n_in >= n:
        r = np.linspace(r_max / n, r_max, n)
        r_switch = r_max
    elif n_in < 2:
        r = np.geomspace(r_max * 1e-4, r_max, n)
        r_switch = r[0]
    else:
        n_out = n - n_in
        # spacing-continuous switch: h = r_sw/n_in and ratio q = 1 + 1/n_in
        r_switch = r_max * (1.0 + 1.0 / n_in) ** (-n_out)
        inner = r_switch * np.arange(1, n_in + 1) / n_in
        outer = r_switch * (1.0 + 1.0 / n_in) ** np.arange(1, n_out + 1)
        r = np.concatenate([inner, outer])
        r[-1] = r_max
    for b in breakpoints:
        if 0.0 < b < r_max:
            k = int(np.argmin(np.abs(r - b)))
            r[k] = b
    r = np.unique(r)
    if np.any(np.diff(r) <= 0) or r[0] <= 0:
        raise ValidationError("grid construction produced non-increasing nodes")
    return SolverGrid(r=r, r_switch=float(r_switch))


@dataclass(frozen=True)
class SolverControls:
    t_end: float = 1.0
    #: origin-density blowup cap; None = 1e8 x initial origin density
    #: (1e8 absolute when the datum has zero density at the origin)
    density_cap: float | None = None
    #: None = 1e-12 * t_end
    dt_floor: float | None = None
    rtol: float = 1e-6
    atol_factor: float = 1e-9
    stride: int = 20
    #: target horizon for moment tracking (enables the W column)
    moment_target: float | None = None
    probe_radii: tuple[float, ...] | None = None
    advection: str = "centered"  # or "upwind"
    outer_bc: str = "auto"  # "auto" | "noflux" | "pin"
    snapshot_times: tuple[float, ...] = ()
    max_steps: int = 50_000_000

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValidationError("t_end must be positive")
        if self.advection not in ("centered", "upwind"):
            raise ValidationError("advection must be 'centered' or 'upwind'")
        if self.outer_bc not in ("auto", "noflux", "pin"):
            raise ValidationError("outer_bc must be 'auto', 'noflux' or 'pin'")


@dataclass(frozen=True)
class BlowupEvent:
    detected_time: float
    trigger: str  # "origin_density_cap" | "step_floor"
    origin_density: float


@dataclass(frozen=True, eq=False)
class SimResult:
    grid: SolverGrid
    t: np.ndarray
    dt: np.ndarray
    origin_density: np.ndarray
    W: np.ndarray
    probes: np.ndarray
    probe_radii: tuple[float, ...]
    M_final: np.ndarray
    t_final: float
    event: BlowupEvent | None
    snapshots: dict
    n_steps: int
    n_rejected: int
    warnings: tuple[str, ...]

    @property
    def blew_up(self) -> bool:
        return self.event is not None


class _Discretization:
    """Precomputed spatial operator on a fixed grid.

    The linear part r^(d-1) d/dr(r^(1-d) dM/dr) is a finite volume scheme in
    the measure r^(1-d) dr: interface coefficients d/(r_i^d - r_{i-1}^d) make
    the flux exact on the operator kernel A + B r^d (so smooth data, whose
    mass grows like r^d at the axis, see no spurious near-axis source), and
    cell volumes are the exact integrals of r^(1-d).  The advection
    coefficient is then calibrated per node so that the singular steady state
    M = 2 sigma_d r^(d-2) is an exact discrete fixed point (well-balanced at
    the global/blowup threshold); the calibration is a 1 + O(h^2/r^2)
    correction of sigma_d^(-1) r^(1-d).
    """

    def __init__(self, grid: SolverGrid, d: int, advection: str, pinned: bool):
        self.d = check_dimension(d)
        self.sigma = sphere_area(d)
        self.pinned = pinned
        self.advection = advection
        r = grid.r
        if d * math.log(max(float(r[-1]), 1.0)) > 600.0 or d * math.log(float(r[0])) < -600.0:
            raise ValidationError("r^d overflows in this (grid, dimension) combination")
        self.r = r
        r_prev = np.concatenate([[0.0], r[:-1]])
        h = r - r_prev  # gap widths, h[0] = r[0]
        self.c_flux = d / (r**d - r_prev**d)
        edge = np.concatenate([[0.5 * r[0]], 0.5 * (r[1:] + r[:-1]), [r[-1]]])
        if d == 2:
            vol = np.log(edge[1:] / edge[:-1])
        else:
            vol = (edge[:-1] ** (2 - d) - edge[1:] ** (2 - d)) / (d - 2)
        self.inv_vol = 1.0 / vol
        self.rpow = r ** (d - 1)
        self.hp = np.concatenate([r[1:] - r[:-1], [r[-1] - r[-2]]])
        self.h = h
        self.adv_coef = self._calibrated_advection()
        diag = (self.c_flux + np.concatenate([self.c_flux[1:], [0.0]])) * self.inv_vol
        self.dt_parabolic = _STAB_SAFETY * _RK_STABLE_REAL / float(np.max(diag))

    def _fluxes(self, M: np.ndarray) -> np.ndarray:
        # interface values of r^(1-d) M_r, index i between nodes i-1 and i
        return self.c_flux * np.diff(M, prepend=0.0)

    def _gradient(self, M: np.ndarray, flux: np.ndarray) -> np.ndarray:
        flux_out = np.concatenate([flux[1:], [0.0]])
        if self.advection == "centered":
            # interface-flux average: exact on A + B r^d, the leading behavior
            # of any smooth mass profile at the axis
            grad = 0.5 * self.rpow * (flux + flux_out)
        else:
            # inflow from larger r (the advective speed of M is negative)
            grad = np.concatenate([(M[1:] - M[:-1]) / self.hp[:-1], [0.0]])
        grad[-1] = (M[-1] - M[-2]) / self.h[-1]
        return grad

    def _calibrated_advection(self) -> np.ndarray:
        base = self.r ** (1 - self.d) / self.sigma
        if self.d < 3:
            return base
        m_c = 2.0 * self.sigma * self.r ** (self.d - 2)
        flux = self._fluxes(m_c)
        lin = (np.concatenate([flux[1:], [0.0]]) - flux) * self.inv_vol
        prod = m_c * self._gradient(m_c, flux)
        with np.errstate(divide="ignore", invalid="ignore"):
            kappa = np.where(prod > 0.0, -lin / np.maximum(prod, 1e-300), base)
        bad = ~np.isfinite(kappa) | (kappa <= 0.0)
        return np.where(bad, base, kappa)

    def rhs(self, M: np.ndarray) -> np.ndarray:
        flux = self._fluxes(M)
        div = (np.concatenate([flux[1:], [0.0]]) - flux) * self.inv_vol
        out = div + self.adv_coef * M * self._gradient(M, flux)
        if self.pinned:
            out[-1] = 0.0
        return out

    def dt_advective(self, M: np.ndarray) -> float:
        speed = self.adv_coef * M
        m = float(np.max(speed / np.minimum(self.h, self.hp)))
        return 0.8 / m if m > 0 else math.inf

    def origin_density(self, M: np.ndarray) -> float:
        return float(M[0]) * self.d / (self.sigma * self.r[0] ** self.d)


def gaussian_moment(r: np.ndarray, M: np.ndarray, d: int, t: float, target: float) -> float:
    """Moment W(t) = int M(r) r/(2(T-t)) G(r, T-t) dr against the backward heat weight."""
    if t >= target:
        raise ValidationError("moment weight needs t < target time")
    tau = target - t
    g = (4.0 * math.pi * tau) ** (-0.5 * d) * np.exp(-(r**2) / (4.0 * tau))
    return float(np.trapezoid(M * r / (2.0 * tau) * g, r))


def _resolve_controls(mass: MassProfile, disc: _Discretization, controls: SolverControls):
    m0 = np.asarray(mass.fn(disc.r), dtype=float)
    rho0 = disc.origin_density(m0)
    cap = controls.density_cap
    if cap is None:
        cap = 1e8 * rho0 if rho0 > 0 else 1e8
    floor = controls.dt_floor if controls.dt_floor is not None else 1e-12 * controls.t_end
    return m0, cap, floor


def run(
    datum: RadialProfile | MassProfile,
    grid: SolverGrid,
    controls: SolverControls,
    d: int | None = None,
) -> SimResult:
    """Integrate the mass equation from the datum until t_end or blowup."""
    mass = datum if isinstance(datum, MassProfile) else mass_profile(datum)
    if d is not None and d != mass.d:
        raise ValidationError(f"datum dimension {mass.d} != requested {d}")
    d = mass.d

    warnings_list: list[str] = []
    pinned = controls.outer_bc == "pin" or (
        controls.outer_bc == "auto" and not math.isfinite(mass.total_mass)
    )
    if pinned:
        warnings_list.append(
            "outer boundary pins M(r_max) at its initial value: finite-domain "
            "approximation of the whole-space problem for unbounded-mass data"
        )
    disc = _Discretization(grid, d, controls.advection, pinned)
    M, cap, floor = _resolve_controls(mass, disc, controls)
    if np.any(np.diff(M) < 0) or np.any(M < 0):
        raise ValidationError("initial mass profile is not nondecreasing and nonnegative")

    probe_radii = controls.probe_radii
    if probe_radii is None:
        probe_radii = tuple(f * mass.r_char for f in _DEFAULT_PROBE_FACTORS)
    snapshots_due = sorted(set(controls.snapshot_times))
    snapshots: dict[float, np.ndarray] = {}

    mono_tol = 1e-11 * max(float(np.max(M)), 1.0)
    # largest initial cell-average density; collapse is declared at the dt
    # floor only when the origin density has grown far beyond it
    cell_density0 = (
        d * np.diff(M, prepend=0.0) / (disc.sigma * np.diff(disc.r**d, prepend=0.0))
    )
    density_scale0 = max(float(np.max(cell_density0)), 1e-300)
    rec: dict[str, list] = {k: [] for k in ("t", "dt", "rho", "W", "probes")}

    def record(t: float, dt: float) -> None:
        if rec["t"] and rec["t"][-1] == t:
            return
        rec["t"].append(t)
        rec["dt"].append(dt)
        rec["rho"].append(disc.origin_density(M))
        if controls.moment_target is not None and t < controls.moment_target:
            rec["W"].append(gaussian_moment(disc.r, M, d, t, controls.moment_target))
        else:
            rec["W"].append(math.nan)
        rec["probes"].append(np.interp(probe_radii, disc.r, M))

    t = 0.0
    dt = disc.dt_parabolic
    event: BlowupEvent | None = None
    k1 = disc.rhs(M)
    n_steps = n_rejected = 0
    last_reason = ""
    record(0.0, dt)

    while t < controls.t_end and event is None:
        if n_steps >= controls.max_steps:
            raise NumericsError(f"exceeded max_steps={controls.max_steps}")
        dt = min(dt, disc.dt_parabolic, disc.dt_advective(M), controls.t_end - t)
        while snapshots_due and snapshots_due[0] <= t:
            snapshots[snapshots_due.pop(0)] = M.copy()
        if snapshots_due:
            dt = min(dt, snapshots_due[0] - t)

        k2 = disc.rhs(M + dt * 0.5 * k1)
        k3 = disc.rhs(M + dt * 0.75 * k2)
        y_new = M + dt * ((2.0 / 9.0) * k1 + (1.0 / 3.0) * k2 + (4.0 / 9.0) * k3)
        k4 = disc.rhs(y_new)
        err = dt * (
            (5.0 / 72.0) * k1 - (1.0 / 12.0) * k2 - (1.0 / 9.0) * k3 + (1.0 / 8.0) * k4
        )
        scale = controls.atol_factor * max(float(np.max(M)), 1e-14) + controls.rtol * np.maximum(
            np.abs(M), np.abs(y_new)
        )
        finite = bool(np.all(np.isfinite(y_new)))
        err_norm = float(np.max(np.abs(err) / scale)) if finite else math.inf
        monotone = finite and not (
            np.any(np.diff(y_new) < -mono_tol) or np.any(y_new < -mono_tol)
        )

        if finite and err_norm <= 1.0 and monotone:
            t += dt
            M = np.maximum(y_new, 0.0)
            k1 = k4  # FSAL
            n_steps += 1
            if n_steps % controls.stride == 0:
                record(t, dt)
            rho = disc.origin_density(M)
            if rho > cap:
                event = BlowupEvent(t, "origin_density_cap", rho)
                break
            growth = _GROWTH_MAX if err_norm == 0.0 else 0.9 * err_norm ** (-1.0 / 3.0)
            dt = dt * min(_GROWTH_MAX, max(_SHRINK_MIN, growth))
        else:
            n_rejected += 1
            if not finite or err_norm > 1.0:
                last_reason = "error"
                shrink = 0.5 if not finite else max(_SHRINK_MIN, 0.9 * err_norm ** (-1.0 / 3.0))
                dt = dt * min(shrink, 0.5)
            else:
                last_reason = "monotonicity"
                dt = 0.5 * dt
            if dt < floor:
                rho_now = disc.origin_density(M)
                collapsing = rho_now > 100.0 * density_scale0
                if last_reason == "error" or collapsing:
                    event = BlowupEvent(t, "step_floor", rho_now)
                else:
                    raise ResolutionError(
                        f"monotonicity failures persist at dt={dt:.3e} (t={t:.6g}) "
                        "without density growth; the grid is too coarse for this datum"
                    )

    while snapshots_due and snapshots_due[0] <= t:
        snapshots[snapshots_due.pop(0)] = M.copy()
    record(t, dt)

    return SimResult(
        grid=grid,
        t=np.array(rec["t"]),
        dt=np.array(rec["dt"]),
        origin_density=np.array(rec["rho"]),
        W=np.array(rec["W"]),
        probes=np.array(rec["probes"]),
        probe_radii=tuple(probe_radii),
        M_final=M,
        t_final=t,
        event=event,
        snapshots=snapshots,
        n_steps=n_steps,
        n_rejected=n_rejected,
        warnings=tuple(warnings_list),
    )


@dataclass(frozen=True)
class ComparisonReport:
    ordered: bool
    max_violation: float
    tolerance: float
    first_violation: tuple[float, float] | None  # (time, radius)
    times_checked: tuple[float, ...]


def comparison_check(
    datum_low: RadialProfile | MassProfile,
    datum_high: RadialProfile | MassProfile,
    grid: SolverGrid,
    controls: SolverControls,
    n_checkpoints: int = 20,
) -> ComparisonReport:
    """Co-integrate an ordered pair and verify M_low <= M_high stays true.

    Orderedness is checked at shared checkpoint times on the shared grid with
    tolerance 1e-6 * max M; if either run blows up, only checkpoints before
    the first blowup are compared.
    """
    mass_low = datum_low if isinstance(datum_low, MassProfile) else mass_profile(datum_low)
    mass_high = datum_high if isinstance(datum_high, MassProfile) else mass_profile(datum_high)
    m0_low = np.asarray(mass_low.fn(grid.r))
    m0_high = np.asarray(mass_high.fn(grid.r))
    if np.any(m0_low > m0_high + 1e-12 * max(float(np.max(m0_high)), 1.0)):
        raise ValidationError("data are not ordered at t = 0")

    times = tuple(np.linspace(0.0, controls.t_end, n_checkpoints + 1)[1:])
    ctl = replace(controls, snapshot_times=times)
    res_low = run(mass_low, grid, ctl)
    res_high = run(mass_high, grid, ctl)
    t_cut = min(
        res_low.event.detected_time if res_low.event else math.inf,
        res_high.event.detected_time if res_high.event else math.inf,
    )
    shared = [s for s in times if s in res_low.snapshots and s in res_high.snapshots and s < t_cut]
    scale = max(float(np.max(m0_high)), 1.0)
    tol = 1e-6 * scale
    worst = -math.inf
    first: tuple[float, float] | None = None
    for s in shared:
        diff = res_low.snapshots[s] - res_high.snapshots[s]
        v = float(np.max(diff))
        worst = max(worst, v)
        if v > tol and first is None:
            first = (s, float(grid.r[int(np.argmax(diff))]))
    return ComparisonReport(
        ordered=first is None,
        max_violation=worst,
        tolerance=tol,
        first_violation=first,
        times_checked=tuple(shared),
    )


@dataclass(frozen=True)
class TruncationScalingResult:
    radii: tuple[float, ...]
    blowup_times: tuple[float, ...]
    exponent: float
    prefactor: float


def truncation_scaling(
    eta: float,
    radii: tuple[float, ...],
    d: int = 3,
    grid: SolverGrid | None = None,
    controls: SolverControls | None = None,
) -> TruncationScalingResult:
    """Blowup time versus inner truncation radius for eta*u_C restricted to r > R.

    Runs each truncation, requires every run to blow up, and least-squares
    fits log T_blowup against log R; the scale invariance of the system makes
    the exact exponent 2.
    """
    radii = tuple(sorted(float(x) for x in radii))
    if len(radii) < 3:
        raise ValidationError("truncation scaling needs at least 3 radii")
    if grid is None:
        grid = build_grid(r_max=40.0 * max(radii), n=1600, inner_fraction=0.5)
    times = []
    for r_in in radii:
        datum = TruncatedChandrasekhar(d, eta, r_in=r_in)
        ctl = controls or SolverControls(t_end=50.0 * r_in**2)
        g = build_grid(
            r_max=float(grid.r[-1]), n=grid.n, inner_fraction=0.5, breakpoints=(r_in,)
        )
        res = run(datum, g, ctl)
        if res.event is None:
            raise NumericsError(
                f"truncation run R={r_in} did not blow up by t={ctl.t_end}; "
                "experiment inconclusive"
            )
        times.append(res.event.detected_time)
    slope, intercept = np.polyfit(np.log(radii), np.log(times), 1)
    return TruncationScalingResult(
        radii=radii,
        blowup_times=tuple(times),
        exponent=float(slope),
        prefactor=float(math.exp(intercept)),
    )
