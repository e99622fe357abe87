"""Virtual test rig: seeded specimen generation, static ramps, cycling.

The modeled rig drives the sensor die with a positioning stage against a
fixed reference force sensor (5 mN resolution) for destructive ramps, and
cycles the load with a nanopositioner for long-term tests.  All
randomness flows through a caller-supplied numpy generator, so every run
is a pure function of its inputs and seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import CycleLog, LoadCurve
from .errors import OverloadError, ProtocolLimitError
from .sensor import (
    ALL_HINGES,
    ARMS,
    SensorSpec,
    SensorState,
    bridge_offsets_at_load,
    check_hinge_failures,
    degradation_factor,
    _check_side,
)


@dataclass(frozen=True)
class RigConfig:
    """Instrument characteristics and hard limits of the test rig.

    Gaussian measurement noise uses sigma = resolution/2 (force) and
    accuracy/2 (positioning).  The coarse stage enters as one contact
    offset per ramp, the nanopositioner as per-sample jitter.  Hold-point
    readings of the reference force sensor carry a small calibration bias
    (``force_read_bias``) and the back-solved hold noise levels.
    """

    force_resolution_n: float = 0.005
    stage_accuracy_um: float = 2.0
    nano_accuracy_um: float = 0.02
    max_force_n: float = 3.6
    max_frequency_hz: float = 20.0
    dz_max_um: float = 200.0
    force_read_bias: float = 1.00704
    hold_force_noise_n: float = 0.00037
    hold_offset_noise_mv: float = 0.28

    def __post_init__(self) -> None:
        if min(self.max_force_n, self.max_frequency_hz, self.dz_max_um) <= 0:
            raise ValueError("rig limits must be positive")
        if min(
            self.force_resolution_n,
            self.stage_accuracy_um,
            self.nano_accuracy_um,
            self.hold_force_noise_n,
            self.hold_offset_noise_mv,
        ) < 0:
            raise ValueError("noise and accuracy figures must be nonnegative")
        if self.force_read_bias <= 0:
            raise ValueError("force read bias must be positive")


@dataclass(frozen=True)
class StaticProtocol:
    """Destructive ramp: step the displacement from 0 to ``dz_max_um``."""

    side: str = "front"
    dz_max_um: float = 200.0
    step_um: float = 0.5
    v_ges: float = 1.0

    def __post_init__(self) -> None:
        _check_side(self.side)
        if self.step_um <= 0 or self.dz_max_um <= 0:
            raise ValueError("step and maximum displacement must be positive")
        if self.v_ges <= 0:
            raise ValueError("supply voltage must be positive")


@dataclass(frozen=True)
class DynamicProtocol:
    """Cyclic load between ``f_min_n`` and ``f_max_n``, logged at the hold point."""

    side: str = "front"
    f_min_n: float = 0.01
    f_max_n: float = 0.5
    frequency_hz: float = 2.0
    n_cycles: int = 50_000
    record_interval: int = 500
    v_ges: float = 1.0
    drift_mv: float = 0.0

    def __post_init__(self) -> None:
        _check_side(self.side)
        if not 0 < self.f_min_n < self.f_max_n:
            raise ValueError("need 0 < f_min < f_max")
        if self.frequency_hz <= 0:
            raise ValueError("frequency must be positive")
        if self.n_cycles < 1 or self.record_interval < 1:
            raise ValueError("cycle counts must be positive")
        if self.n_cycles % self.record_interval != 0:
            raise ValueError("n_cycles must be a multiple of record_interval")
        if self.v_ges <= 0:
            raise ValueError("supply voltage must be positive")


@dataclass(frozen=True)
class FleetParams:
    """Per-side first-fracture Weibull parameters and the fleet size."""

    f0_front_n: float = 1.22
    beta_front: float = 10.69
    f0_back_n: float = 0.77
    beta_back: float = 7.21
    count: int = 20
    master_seed: int = 0

    def __post_init__(self) -> None:
        if min(self.f0_front_n, self.beta_front, self.f0_back_n, self.beta_back) <= 0:
            raise ValueError("Weibull parameters must be positive")
        if self.count < 1:
            raise ValueError("fleet needs at least one specimen")

    def side_params(self, side: str) -> tuple[float, float]:
        _check_side(side)
        if side == "front":
            return self.f0_front_n, self.beta_front
        return self.f0_back_n, self.beta_back


def sample_specimen(
    params: FleetParams, side: str, rng: np.random.Generator
) -> SensorState:
    """Draw one specimen's eight hinge strengths [MPa].

    Every hinge gets an independent Weibull strength with the side's shape
    beta and scale gain * f0 * 4^(1/beta).  The minimum of the four
    tensile-ring strengths then makes the first-fracture force exactly
    Weibull(f0, beta) distributed (weakest link).
    """
    f0, beta = params.side_params(side)
    spec = SensorSpec()
    scale_mpa = spec.tensile_gain(side) * f0 * 4.0 ** (1.0 / beta)
    draws = rng.weibull(beta, size=len(ALL_HINGES))
    strengths = {h: scale_mpa * float(w) for h, w in zip(ALL_HINGES, draws)}
    return SensorState.intact_with_strengths(strengths)


def _intact_cubic(spec: SensorSpec, side: str, dz: np.ndarray) -> np.ndarray:
    return spec.k1(side) * dz + spec.k3(side) * dz**3


def _failure_threshold_force(
    spec: SensorSpec, state: SensorState, side: str
) -> float:
    """Smallest true force that breaks some intact hinge in this state."""
    tensile = spec.tensile_position(side)
    threshold = np.inf
    for hinge in ALL_HINGES:
        if not state.is_intact(hinge):
            continue
        gain = abs(
            spec.stress_gain_inner if hinge.position == "inner" else spec.stress_gain_outer
        )
        is_tensile = hinge.position == tensile
        if not is_tensile and state.intact_in_ring(tensile) > 0:
            continue  # compressed while the tensile ring still carries load
        redistribution = 4.0 / state.intact_in_ring(hinge.position)
        threshold = min(
            threshold, state.hinge_strength[hinge] / (gain * redistribution)
        )
    return float(threshold)


def _bridge_rows(
    spec: SensorSpec,
    state: SensorState,
    side: str,
    forces: np.ndarray,
    v_ges: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized bridge offsets for a curve segment with a frozen state."""
    n = forces.size
    if state.failed_in_arm("C") > 0:
        return np.full((n, 4), np.nan), np.zeros(n, dtype=bool)
    sign = 1.0 if side == "front" else -1.0
    gains = np.array(
        [
            sign * spec.offset_gain_mv[arm] * 0.5 ** state.failed_in_arm(arm)
            for arm in ARMS
        ]
    )
    return forces[:, None] * gains[None, :] * v_ges, np.ones(n, dtype=bool)


def run_static(
    state: SensorState,
    spec: SensorSpec,
    protocol: StaticProtocol,
    rig: RigConfig,
    rng: np.random.Generator,
) -> LoadCurve:
    """Run one destructive ramp and return the recorded curve.

    Per step: the commanded displacement plus positioning errors sets the
    true force (with the current hinge damage), the force channel adds
    Gaussian readout noise, the bridges are sampled, and only then is the
    fracture criterion evaluated, so a failure shows up as a force drop at
    the following sample.
    """
    if protocol.dz_max_um > rig.dz_max_um:
        raise ProtocolLimitError(
            f"protocol ramps to {protocol.dz_max_um} um, rig allows {rig.dz_max_um} um"
        )
    n_steps = int(np.floor(protocol.dz_max_um / protocol.step_um + 1e-9)) + 1
    dz_cmd = np.arange(n_steps) * protocol.step_um

    contact_offset = rng.normal(0.0, rig.stage_accuracy_um / 2.0)
    jitter = rng.normal(0.0, rig.nano_accuracy_um / 2.0, size=n_steps)
    force_noise = rng.normal(0.0, rig.force_resolution_n / 2.0, size=n_steps)

    dz_true = np.clip(dz_cmd + contact_offset + jitter, 0.0, None)
    base_force = _intact_cubic(spec, protocol.side, dz_true)

    force_rows = np.empty(n_steps)
    voff_rows = np.empty((n_steps, 4))
    valid_rows = np.empty(n_steps, dtype=bool)

    start = 0
    while start < n_steps:
        factor = degradation_factor(state)
        seg_true = factor * base_force[start:]
        threshold = _failure_threshold_force(spec, state, protocol.side)
        crossing = np.nonzero(seg_true >= threshold)[0]
        end = start + (int(crossing[0]) if crossing.size else seg_true.size - 1)
        seg = slice(start, end + 1)
        force_rows[seg] = factor * base_force[seg] + force_noise[seg]
        voff_rows[seg], valid_rows[seg] = _bridge_rows(
            spec, state, protocol.side, factor * base_force[seg], protocol.v_ges
        )
        if crossing.size:
            check_hinge_failures(
                spec, state, float(factor * base_force[end]), protocol.side
            )
        start = end + 1

    return LoadCurve(
        side=protocol.side,
        dz_um=dz_cmd,
        force_n=force_rows,
        voff_mv=voff_rows,
        valid=valid_rows,
    )


def run_dynamic(
    state: SensorState,
    spec: SensorSpec,
    protocol: DynamicProtocol,
    rig: RigConfig,
    rng: np.random.Generator,
) -> CycleLog:
    """Run a long-term cycling test and return the hold-point log.

    One entry per ``record_interval`` cycles, taken at the upper hold
    force: the logged force is the (slightly biased, noisy) reference
    sensor reading, the offsets are the bridge response to the true hold
    force plus noise and an optional linear drift ramp.
    """
    if protocol.f_max_n > rig.max_force_n:
        raise ProtocolLimitError(
            f"hold force {protocol.f_max_n} N exceeds rig limit {rig.max_force_n} N"
        )
    if protocol.frequency_hz > rig.max_frequency_hz:
        raise ProtocolLimitError(
            f"frequency {protocol.frequency_hz} Hz exceeds rig limit {rig.max_frequency_hz} Hz"
        )
    fracture_force = state.first_fracture_force(spec, protocol.side)
    if protocol.f_max_n >= fracture_force:
        raise OverloadError(
            f"hold force {protocol.f_max_n} N would fracture the specimen "
            f"(first fracture at {fracture_force:.3f} N)"
        )

    n_records = protocol.n_cycles // protocol.record_interval
    cycles = (np.arange(n_records) + 1) * protocol.record_interval
    signal = bridge_offsets_at_load(
        spec, protocol.f_max_n, protocol.side, protocol.v_ges, state
    )
    base_offsets = np.array([signal.v_off_mv[arm] for arm in ARMS])

    force = (
        protocol.f_max_n * rig.force_read_bias
        + rng.normal(0.0, rig.hold_force_noise_n, size=n_records)
    )
    voff = (
        base_offsets[None, :]
        + rng.normal(0.0, rig.hold_offset_noise_mv, size=(n_records, 4))
        + protocol.drift_mv * (cycles / protocol.n_cycles)[:, None]
    )
    return CycleLog(
        cycles=cycles,
        force_n=force,
        voff_mv=voff,
        v_ges=protocol.v_ges,
        record_interval=protocol.record_interval,
    )


def specimen_rngs(master_seed: int, count: int) -> list[np.random.Generator]:
    """Independent per-specimen generators derived from one master seed."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def run_fleet(
    params: FleetParams,
    spec: SensorSpec,
    protocol: StaticProtocol,
    rig: RigConfig,
) -> list[LoadCurve]:
    """Destructively test a whole fleet; one curve per specimen.

    Specimen seeds are spawned deterministically from the master seed, so
    repeated runs are bit-identical and specimens are independent.
    """
    curves = []
    for rng in specimen_rngs(params.master_seed, params.count):
        state = sample_specimen(params, protocol.side, rng)
        curves.append(run_static(state, spec, protocol, rig, rng))
    return curves
