"""Quasiparticle densities, poisoning rates, and gap-profile geometry.

The spatial gap profile along the qubit electrodes is a piecewise-constant
sequence of superconducting segments with the Josephson junction sitting
on one segment boundary.  Gap steps between segments act as barriers (high
gap next to the junction) or traps (low gap next to the junction), and the
adequacy rules here size them against the quasiparticle relaxation and
diffusion scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GeometryError
from .numerics import adaptive_integral, root_find
from .thermal import delta_from_tc, thermal_qp_term
from .units import CONSTANTS

DEFAULT_BASE_RATE = 1.0e3
# Thermal-activation prefactor calibrated so the engineered-gap device's
# parity lifetime crosses one 0.2 s measurement pixel near 150 mK.
DEFAULT_THERMAL_PREFACTOR = 3.4e7
# Effective quasiparticle temperature near the gap edge; calibration
# constant chosen so the default barrier suppresses the unprotected rate
# by six orders of magnitude.
DEFAULT_T_QP = 0.040

_CROSSOVER_T_MIN = 0.010


@dataclass(frozen=True)
class ThicknessTcTable:
    """Clamped piecewise-linear map from film thickness to Tc.

    Anchors are (thickness_nm, tc_kelvin) pairs, strictly increasing in
    thickness and non-increasing in Tc (thinner aluminum has the higher
    critical temperature).  Thicknesses outside the anchor range clamp to
    the nearest anchor.
    """

    anchors: tuple[tuple[float, float], ...] = ((25.0, 1.6), (40.0, 1.3))

    def __post_init__(self):
        if len(self.anchors) < 2:
            raise DomainError("thickness table needs at least two anchors")
        thicknesses = [t for t, _ in self.anchors]
        tcs = [tc for _, tc in self.anchors]
        if any(t <= 0 for t in thicknesses) or any(tc <= 0 for tc in tcs):
            raise DomainError("table anchors must be positive")
        if any(b <= a for a, b in zip(thicknesses, thicknesses[1:])):
            raise DomainError("anchor thicknesses must strictly increase")
        if any(b > a for a, b in zip(tcs, tcs[1:])):
            raise DomainError("Tc must be non-increasing with thickness")

    def tc(self, thickness_nm: float) -> float:
        """Critical temperature (kelvin) for a film of given thickness."""
        if thickness_nm <= 0:
            raise DomainError(f"thickness must be positive, got {thickness_nm}")
        thicknesses = [t for t, _ in self.anchors]
        tcs = [tc for _, tc in self.anchors]
        return float(np.interp(thickness_nm, thicknesses, tcs))


DEFAULT_THICKNESS_TABLE = ThicknessTcTable()


def tc_from_thickness(
    thickness_nm: float, table: ThicknessTcTable | None = None
) -> float:
    """Critical temperature (kelvin) from film thickness via the table."""
    return (table or DEFAULT_THICKNESS_TABLE).tc(thickness_nm)


@dataclass(frozen=True)
class GapSegment:
    """One homogeneous superconducting segment: length (um) and gap (kelvin)."""

    length_um: float
    delta_k: float

    def __post_init__(self):
        if self.length_um <= 0:
            raise GeometryError(
                f"segment length must be positive, got {self.length_um}"
            )
        if self.delta_k <= 0:
            raise GeometryError(f"segment gap must be positive, got {self.delta_k}")


@dataclass(frozen=True)
class GapProfile:
    """Piecewise-constant gap along the electrodes with one junction.

    ``junction_um`` must coincide with an interior segment boundary, so at
    least one segment lies on each side of the junction.
    """

    segments: tuple[GapSegment, ...]
    junction_um: float

    def __post_init__(self):
        if len(self.segments) < 2:
            raise GeometryError("profile needs at least two segments")
        if self._junction_index() is None:
            boundaries = ", ".join(f"{b:g}" for b in self.boundaries_um()[1:-1])
            raise GeometryError(
                f"junction at {self.junction_um:g} um is not an interior "
                f"segment boundary (boundaries: {boundaries})"
            )

    def boundaries_um(self) -> list[float]:
        """Cumulative segment boundaries, starting at 0."""
        edges = [0.0]
        for seg in self.segments:
            edges.append(edges[-1] + seg.length_um)
        return edges

    @property
    def total_length_um(self) -> float:
        return self.boundaries_um()[-1]

    def _junction_index(self) -> int | None:
        edges = self.boundaries_um()
        tol = 1e-9 * max(1.0, edges[-1])
        for i in range(1, len(edges) - 1):
            if abs(edges[i] - self.junction_um) <= tol:
                return i
        return None

    @property
    def junction_index(self) -> int:
        """Number of segments to the left of the junction."""
        index = self._junction_index()
        assert index is not None
        return index

    def side_segments(self, side: str) -> tuple[GapSegment, ...]:
        """Segments on one side of the junction, junction-adjacent first."""
        index = self.junction_index
        if side == "left":
            return tuple(reversed(self.segments[:index]))
        if side == "right":
            return self.segments[index:]
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")

    def adjacent_deltas(self) -> tuple[float, float]:
        """(left, right) gaps of the two segments meeting at the junction."""
        index = self.junction_index
        return self.segments[index - 1].delta_k, self.segments[index].delta_k

    @property
    def junction_delta_k(self) -> float:
        """Junction gap, taken as the smaller adjacent electrode gap."""
        return min(self.adjacent_deltas())

    def to_document(self) -> dict:
        """JSON-ready description with explicit gaps."""
        return {
            "segments": [
                {"length_um": seg.length_um, "delta_K": seg.delta_k}
                for seg in self.segments
            ],
            "junction_um": self.junction_um,
        }


@dataclass(frozen=True)
class StackSegment:
    """Fabrication-stack segment: length plus thickness or an explicit gap."""

    length_um: float
    thickness_nm: float | None = None
    delta_k: float | None = None

    def __post_init__(self):
        if (self.thickness_nm is None) == (self.delta_k is None):
            raise GeometryError(
                "specify exactly one of thickness_nm or delta_K per segment"
            )


def profile_from_stack(
    segments: list[StackSegment] | tuple[StackSegment, ...],
    junction_index: int,
    table: ThicknessTcTable | None = None,
) -> GapProfile:
    """Build a :class:`GapProfile` from a fabrication stack.

    ``junction_index`` counts segments to the left of the junction, so it
    must satisfy 1 <= junction_index <= len(segments) - 1.
    """
    if not 1 <= junction_index <= len(segments) - 1:
        raise GeometryError(
            f"junction index {junction_index} leaves no segment on one side"
        )
    resolved = []
    for seg in segments:
        if seg.delta_k is not None:
            delta = seg.delta_k
        else:
            delta = delta_from_tc(tc_from_thickness(seg.thickness_nm, table))
        resolved.append(GapSegment(seg.length_um, delta))
    junction_um = sum(seg.length_um for seg in resolved[:junction_index])
    return GapProfile(tuple(resolved), junction_um)


def profile_from_document(
    document: dict, table: ThicknessTcTable | None = None
) -> GapProfile:
    """Parse the JSON gap-profile document.

    Each segment carries ``length_um`` plus either ``thickness_nm`` or
    ``delta_K``; ``junction_um`` names an interior boundary.
    """
    try:
        raw_segments = document["segments"]
        junction_um = float(document["junction_um"])
    except (KeyError, TypeError) as exc:
        raise GeometryError(f"gap profile document missing field: {exc}") from exc
    if not raw_segments or len(raw_segments) < 2:
        raise GeometryError("gap profile needs at least two segments")
    segments = []
    for i, raw in enumerate(raw_segments):
        unknown = set(raw) - {"length_um", "thickness_nm", "delta_K"}
        if unknown:
            raise GeometryError(
                f"segment {i}: unknown fields {sorted(unknown)}"
            )
        if "length_um" not in raw:
            raise GeometryError(f"segment {i}: missing length_um")
        has_thickness = "thickness_nm" in raw
        has_delta = "delta_K" in raw
        if has_thickness == has_delta:
            raise GeometryError(
                f"segment {i}: specify exactly one of thickness_nm or delta_K"
            )
        if has_delta:
            delta = float(raw["delta_K"])
        else:
            delta = delta_from_tc(
                tc_from_thickness(float(raw["thickness_nm"]), table)
            )
        segments.append(GapSegment(float(raw["length_um"]), delta))
    return GapProfile(tuple(segments), junction_um)


@dataclass(frozen=True)
class QPEnvironment:
    """Quasiparticle environment: density, transport, and thermal scales.

    Attributes
    ----------
    x_nqp:
        Non-equilibrium quasiparticle fraction (dimensionless), >= 0.
    diffusion_m2_per_s:
        Quasiparticle diffusion constant.
    tau_anchors:
        (energy_kelvin, tau_seconds) anchors of the energy-relaxation
        time, at least two, with tau strictly decreasing in energy.
        Interpolation is a power law through adjacent anchors.
    xi_um:
        Coherence length, the thickness scale of a gap step.
    nu0_per_ev_um3:
        Single-spin density of states at the Fermi level.
    t_qp_kelvin:
        Effective quasiparticle temperature near the gap edge.
    """

    x_nqp: float = 8.0e-7
    diffusion_m2_per_s: float = 0.01
    tau_anchors: tuple[tuple[float, float], ...] = (
        (0.5, 1.0e-5),
        (14.0, 1.0e-11),
    )
    xi_um: float = 0.1
    nu0_per_ev_um3: float = 1.6e10
    t_qp_kelvin: float = DEFAULT_T_QP

    def __post_init__(self):
        if self.x_nqp < 0:
            raise DomainError(f"x_nqp must be non-negative, got {self.x_nqp}")
        if self.diffusion_m2_per_s <= 0:
            raise DomainError("diffusion constant must be positive")
        if self.xi_um <= 0:
            raise DomainError("coherence length must be positive")
        if self.nu0_per_ev_um3 <= 0:
            raise DomainError("density of states must be positive")
        if self.t_qp_kelvin <= 0:
            raise DomainError("quasiparticle temperature must be positive")
        if len(self.tau_anchors) < 2:
            raise DomainError("tau_anchors needs at least two points")
        energies = [e for e, _ in self.tau_anchors]
        taus = [tau for _, tau in self.tau_anchors]
        if any(e <= 0 for e in energies) or any(t <= 0 for t in taus):
            raise DomainError("tau anchors must be positive")
        if any(b <= a for a, b in zip(energies, energies[1:])):
            raise DomainError("anchor energies must strictly increase")
        if any(b >= a for a, b in zip(taus, taus[1:])):
            raise DomainError("tau must strictly decrease with energy")


DEFAULT_ENVIRONMENT = QPEnvironment()


def tau_eps(energy_kelvin: float, env: QPEnvironment | None = None) -> float:
    """Quasiparticle energy-relaxation time (seconds) at an excess energy.

    Power-law interpolation between the anchors in log-log space; outside
    the anchor range the nearest segment's power law extrapolates.
    """
    env = env or DEFAULT_ENVIRONMENT
    if energy_kelvin <= 0:
        raise DomainError(f"energy must be positive, got {energy_kelvin}")
    log_e = np.log([e for e, _ in env.tau_anchors])
    log_tau = np.log([tau for _, tau in env.tau_anchors])
    x = math.log(energy_kelvin)
    if x <= log_e[0]:
        slope = (log_tau[1] - log_tau[0]) / (log_e[1] - log_e[0])
        return math.exp(log_tau[0] + slope * (x - log_e[0]))
    if x >= log_e[-1]:
        slope = (log_tau[-1] - log_tau[-2]) / (log_e[-1] - log_e[-2])
        return math.exp(log_tau[-1] + slope * (x - log_e[-1]))
    return math.exp(float(np.interp(x, log_e, log_tau)))


def diffusion_length(
    energy_kelvin: float, env: QPEnvironment | None = None
) -> float:
    """Diffusion length L = sqrt(D tau(E)) in micrometers."""
    env = env or DEFAULT_ENVIRONMENT
    tau = tau_eps(energy_kelvin, env)
    return math.sqrt(env.diffusion_m2_per_s * tau) * 1e6


def thermal_qp_fraction(
    t_kelvin: float, delta_kelvin: float, x_nqp: float = 0.0
) -> float:
    """Total quasiparticle fraction: non-equilibrium floor plus thermal term."""
    if x_nqp < 0:
        raise DomainError(f"x_nqp must be non-negative, got {x_nqp}")
    return x_nqp + thermal_qp_term(t_kelvin, delta_kelvin)


def crossover_temperature(x_nqp: float, delta_kelvin: float) -> float:
    """Temperature (kelvin) where the thermal fraction equals ``x_nqp``.

    Searches [10 mK, Delta/2]; raises a bracket error when the thermal
    curve does not cross ``x_nqp`` inside that window.
    """
    if x_nqp <= 0:
        raise DomainError(f"x_nqp must be positive, got {x_nqp}")
    if delta_kelvin <= 0:
        raise DomainError(f"delta must be positive, got {delta_kelvin}")
    return root_find(
        lambda t: thermal_qp_term(t, delta_kelvin) - x_nqp,
        _CROSSOVER_T_MIN,
        delta_kelvin / 2.0,
        abs_tol=1e-10,
    )


def nqp_decay_rate(
    ej_ghz: float,
    ec_ghz: float,
    f_ge_ghz: float,
    delta_ghz: float,
    x_qp: float,
) -> float:
    """Qubit energy relaxation rate (1/s) from a quasiparticle fraction.

    Gamma = 32 EJ sqrt(Delta / 2 f_ge) sqrt(EC / 8 EJ) x_qp with all
    energies converted to Hz.
    """
    for name, value in (
        ("EJ", ej_ghz),
        ("EC", ec_ghz),
        ("f_ge", f_ge_ghz),
        ("delta", delta_ghz),
    ):
        if value <= 0:
            raise DomainError(f"{name} must be positive, got {value}")
    if x_qp < 0:
        raise DomainError(f"x_qp must be non-negative, got {x_qp}")
    ej_hz = ej_ghz * 1e9
    return (
        32.0
        * ej_hz
        * math.sqrt(delta_ghz / (2.0 * f_ge_ghz))
        * math.sqrt(ec_ghz / (8.0 * ej_ghz))
        * x_qp
    )


def x_qp_from_rate(
    rate_per_s: float,
    ej_ghz: float,
    ec_ghz: float,
    f_ge_ghz: float,
    delta_ghz: float,
) -> float:
    """Quasiparticle fraction that produces a given relaxation rate."""
    if rate_per_s < 0:
        raise DomainError(f"rate must be non-negative, got {rate_per_s}")
    unit = nqp_decay_rate(ej_ghz, ec_ghz, f_ge_ghz, delta_ghz, 1.0)
    return rate_per_s / unit


def volume_density(
    x_qp: float, nu0_per_ev_um3: float, delta_ev: float
) -> float:
    """Quasiparticle volume density n = x 2 nu0 Delta, per cubic micrometer."""
    if x_qp < 0:
        raise DomainError(f"x_qp must be non-negative, got {x_qp}")
    if nu0_per_ev_um3 <= 0 or delta_ev <= 0:
        raise DomainError("nu0 and delta must be positive")
    return x_qp * 2.0 * nu0_per_ev_um3 * delta_ev


def x_qp_from_density(
    n_per_um3: float, nu0_per_ev_um3: float, delta_ev: float
) -> float:
    """Quasiparticle fraction from a volume density (inverse of volume_density)."""
    if n_per_um3 < 0:
        raise DomainError(f"density must be non-negative, got {n_per_um3}")
    if nu0_per_ev_um3 <= 0 or delta_ev <= 0:
        raise DomainError("nu0 and delta must be positive")
    return n_per_um3 / (2.0 * nu0_per_ev_um3 * delta_ev)


def _edge_integral(delta_k: float, t_k: float, threshold_k: float) -> float:
    """Integral of the BCS density of states times a Boltzmann factor.

    Computes exp(Delta/T) * integral_threshold^inf rho(E) exp(-E/T) dE via
    the substitution E = Delta cosh(u), which removes the inverse
    square-root singularity at the gap edge and keeps the integrand free
    of underflow for any Delta/T.
    """
    if threshold_k < delta_k:
        raise DomainError("threshold must lie at or above the gap edge")
    u_low = math.acosh(threshold_k / delta_k) if threshold_k > delta_k else 0.0
    scale = delta_k / t_k

    def integrand(u: float) -> float:
        c = math.cosh(u)
        return c * math.exp(-scale * (c - 1.0))

    return delta_k * adaptive_integral(integrand, u_low, math.inf)


def above_barrier_fraction(
    delta_delta_k: float, t_qp_kelvin: float, delta_kelvin: float
) -> float:
    """Fraction of thermalized quasiparticles with energy above a gap step.

    Quasiparticles occupy the BCS density of states above ``delta_kelvin``
    with a Boltzmann factor at ``t_qp_kelvin``; the fraction above
    Delta + delta_delta is the part that can cross a barrier of height
    ``delta_delta_k``.  A zero step returns exactly 1.
    """
    if delta_delta_k < 0:
        raise DomainError(f"gap step must be non-negative, got {delta_delta_k}")
    if t_qp_kelvin <= 0:
        raise DomainError(f"T_qp must be positive, got {t_qp_kelvin}")
    if delta_kelvin <= 0:
        raise DomainError(f"delta must be positive, got {delta_kelvin}")
    if delta_delta_k == 0.0:
        return 1.0
    total = _edge_integral(delta_kelvin, t_qp_kelvin, delta_kelvin)
    above = _edge_integral(
        delta_kelvin, t_qp_kelvin, delta_kelvin + delta_delta_k
    )
    return above / total


@dataclass(frozen=True)
class SideVerdict:
    """Geometry verdict for one side of the junction."""

    side: str
    adjacent_delta_k: float
    delta_delta_k: float
    length_um: float
    required_um: float
    adequate: bool

    @property
    def margin(self) -> float:
        """Available length over required length (0 when nothing is required)."""
        if self.required_um == 0.0:
            return math.inf if self.adequate else 0.0
        return self.length_um / self.required_um


@dataclass(frozen=True)
class GeometryVerdict:
    """Both per-side verdicts plus the combined adequacy rule."""

    left: SideVerdict
    right: SideVerdict
    adequate: bool


def barrier_adequate(
    profile: GapProfile,
    env: QPEnvironment | None = None,
    safety_factor: float = 5.0,
) -> GeometryVerdict:
    """Check whether the junction is protected by a gap barrier.

    A side protects the junction when its junction-adjacent segment has
    the higher of the two adjacent gaps, rises by a positive step over
    that side's minimum gap, and is at least ``safety_factor`` coherence
    lengths long.  One protected side suffices: the raised gap blocks
    low-energy tunneling in both directions.
    """
    env = env or DEFAULT_ENVIRONMENT
    if safety_factor <= 0:
        raise DomainError(f"safety factor must be positive, got {safety_factor}")
    required = safety_factor * env.xi_um
    adjacent_max = max(profile.adjacent_deltas())
    verdicts = {}
    for side in ("left", "right"):
        segments = profile.side_segments(side)
        adjacent = segments[0]
        side_min = min(seg.delta_k for seg in segments)
        step = adjacent.delta_k - side_min
        adequate = (
            adjacent.delta_k >= adjacent_max
            and step > 0.0
            and adjacent.length_um >= required
        )
        verdicts[side] = SideVerdict(
            side=side,
            adjacent_delta_k=adjacent.delta_k,
            delta_delta_k=step,
            length_um=adjacent.length_um,
            required_um=required,
            adequate=adequate,
        )
    return GeometryVerdict(
        left=verdicts["left"],
        right=verdicts["right"],
        adequate=verdicts["left"].adequate or verdicts["right"].adequate,
    )


def trap_adequate(
    profile: GapProfile, env: QPEnvironment | None = None
) -> GeometryVerdict:
    """Check whether the junction is protected by quasiparticle traps.

    Traps require a lowered-gap segment adjoining the junction on BOTH
    sides, each at least one diffusion length (at the local gap step) long
    so that an entering quasiparticle relaxes before reaching the junction.
    """
    env = env or DEFAULT_ENVIRONMENT
    verdicts = {}
    for side in ("left", "right"):
        segments = profile.side_segments(side)
        adjacent = segments[0]
        side_max = max(seg.delta_k for seg in segments)
        step = side_max - adjacent.delta_k
        if step > 0.0:
            required = diffusion_length(step, env)
            adequate = adjacent.length_um >= required
        else:
            required = math.inf
            adequate = False
        verdicts[side] = SideVerdict(
            side=side,
            adjacent_delta_k=adjacent.delta_k,
            delta_delta_k=step,
            length_um=adjacent.length_um,
            required_um=required,
            adequate=adequate,
        )
    return GeometryVerdict(
        left=verdicts["left"],
        right=verdicts["right"],
        adequate=verdicts["left"].adequate and verdicts["right"].adequate,
    )


def parity_rate_model(
    profile: GapProfile,
    env: QPEnvironment | None = None,
    t_kelvin: float = 0.025,
    base_rate_per_s: float = DEFAULT_BASE_RATE,
    thermal_prefactor_per_s: float = DEFAULT_THERMAL_PREFACTOR,
) -> float:
    """Charge-parity switching rate (1/s) for a gap profile.

    The unprotected base rate is suppressed by the fraction of
    quasiparticles energetic enough to cross the weakest protecting gap
    step, and a thermally activated term (prefactor calibrated, not
    predicted) takes over as the bath temperature rises.  Without a
    protecting barrier the full base rate applies.
    """
    env = env or DEFAULT_ENVIRONMENT
    if base_rate_per_s < 0:
        raise DomainError("base rate must be non-negative")
    if thermal_prefactor_per_s < 0:
        raise DomainError("thermal prefactor must be non-negative")
    verdict = barrier_adequate(profile, env)
    steps = [
        side.delta_delta_k
        for side in (verdict.left, verdict.right)
        if side.adequate
    ]
    weakest_step = min(steps) if steps else 0.0
    junction_delta = profile.junction_delta_k
    barrier_term = base_rate_per_s * above_barrier_fraction(
        weakest_step, env.t_qp_kelvin, junction_delta
    )
    thermal_term = thermal_prefactor_per_s * thermal_qp_term(
        t_kelvin, junction_delta
    )
    return barrier_term + thermal_term


def delta_ev_from_tc(tc_kelvin: float) -> float:
    """Gap in eV from Tc, composing the BCS relation with unit conversion."""
    return delta_from_tc(tc_kelvin) * CONSTANTS.kB_in_eV
