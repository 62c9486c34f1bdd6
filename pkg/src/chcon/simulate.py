"""Density-matrix simulation of noisy circuits with free classical memory.

The model: alternating layers of arbitrary channels on the quantum
registers (optionally controlled by, measuring into, or rewriting the
classical registers) interlaced with i.i.d. single-qubit noise on every
qubit.  Classical registers are never noisy and never sampled; stochastic
updates split the state into exactly tracked (label, probability, density
matrix) blocks.

The doubled-memory experiment runs two parallel copies (sides A and B) with
separable per-step gates and tracks the chi-square distance to the
separable set across the copy bipartition, together with the per-step
contraction factor 1 - p^(2n) predicted by the channel constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .channels import ChannelError, KrausChannel
from .config import CHISEP_THRESHOLD, DEFAULT_QUBIT_CAP, MAX_BLOCKS, DEFAULT_TOL, Tolerances
from .separability import (
    BipartiteState,
    CcQqState,
    CcQqBlock,
    SepConfig,
    SeparableChannel,
    chisep,
    dsep,
    is_ppt,
    local_product_channel,
)

RATIO_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# Layout and layers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QubitReg:
    label: str
    side: str = "A"


@dataclass(frozen=True)
class ClassicalReg:
    label: str
    size: int
    side: str = "A"


@dataclass(frozen=True)
class RegisterLayout:
    qubits: tuple[QubitReg, ...]
    classical: tuple[ClassicalReg, ...] = ()
    qubit_cap: int = DEFAULT_QUBIT_CAP

    def __post_init__(self):
        labels = [q.label for q in self.qubits] + [c.label for c in self.classical]
        if len(set(labels)) != len(labels):
            raise ChannelError("register labels must be unique")
        for reg in list(self.qubits) + list(self.classical):
            if reg.side not in ("A", "B"):
                raise ChannelError("register side must be 'A' or 'B'")
        if len(self.qubits) > self.qubit_cap:
            raise ChannelError(
                f"{len(self.qubits)} qubits exceed the desk-scale cap of {self.qubit_cap}"
            )
        sides = [q.side for q in self.qubits]
        if "B" in sides and "A" in sides[sides.index("B"):]:
            raise ChannelError("A-side qubits must precede B-side qubits in the layout")

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def dim_a(self) -> int:
        return 2 ** sum(1 for q in self.qubits if q.side == "A")

    @property
    def dim_b(self) -> int:
        return 2 ** sum(1 for q in self.qubits if q.side == "B")

    def classical_indices(self, side: str) -> list[int]:
        return [i for i, c in enumerate(self.classical) if c.side == side]

    def blank_labels(self) -> tuple[tuple, tuple]:
        x = tuple(0 for c in self.classical if c.side == "A")
        y = tuple(0 for c in self.classical if c.side == "B")
        return x, y


@dataclass(frozen=True)
class GateLayer:
    """A channel on the quantum registers, optionally selected per classical
    label; ``channel`` may be a KrausChannel or a SeparableChannel."""

    channel: object
    controls: dict | None = None
    tag: str = "gate"


@dataclass(frozen=True)
class InstrumentLayer:
    """A quantum instrument whose outcome is written to a classical register.

    ``outcomes`` maps outcome values to Kraus-operator lists on the full
    quantum dimension; the completeness sum over all outcomes must be the
    identity.  ``store`` is the label of the classical register receiving
    the outcome.
    """

    outcomes: tuple[tuple[int, tuple[np.ndarray, ...]], ...]
    store: str
    tag: str = "instrument"


@dataclass(frozen=True)
class ClassicalLayer:
    """Stochastic or deterministic rewrite of the classical labels.

    ``update`` maps (x, y) to a list of (probability, (x, y)) successors;
    labels not listed are left unchanged.  No quantum action; does not
    count toward circuit length.
    """

    update: dict
    tag: str = "classical"


@dataclass(frozen=True)
class NoisyCircuit:
    layout: RegisterLayout
    layers: tuple
    noise: KrausChannel
    noise_order: str = "noise-first"
    trailing_noise: bool = False

    def __post_init__(self):
        if not self.noise.is_qubit():
            raise ChannelError("the i.i.d. noise model uses a single-qubit channel")
        if self.noise_order not in ("noise-first", "layer-first"):
            raise ChannelError("noise_order must be 'noise-first' or 'layer-first'")


def circuit_metrics(c: NoisyCircuit) -> tuple[int, int]:
    """(width, length): qubit count and number of quantum layers; classical
    registers and classical layers are not counted."""
    width = c.layout.n_qubits
    length = sum(1 for layer in c.layers if not isinstance(layer, ClassicalLayer))
    return width, length


# ---------------------------------------------------------------------------
# State plumbing
# ---------------------------------------------------------------------------


def _apply_to_qubit(rho: np.ndarray, ops, q: int, n: int) -> np.ndarray:
    """Apply a single-qubit Kraus channel to qubit ``q`` of an n-qubit state."""
    d = 2**n
    t = rho.reshape([2] * (2 * n))
    out = np.zeros_like(t)
    for k in ops:
        tmp = np.tensordot(k, t, axes=([1], [q]))
        tmp = np.moveaxis(tmp, 0, q)
        tmp = np.tensordot(k.conj(), tmp, axes=([1], [n + q]))
        tmp = np.moveaxis(tmp, 0, n + q)
        out = out + tmp
    return out.reshape(d, d)


def apply_iid_noise(state: CcQqState, noise: KrausChannel, layout: RegisterLayout) -> CcQqState:
    """One round of the i.i.d. noise: the single-qubit channel acts on every
    qubit in every block; classical labels and probabilities are untouched."""
    if not noise.is_qubit():
        raise ChannelError("noise must be a qubit channel")
    n = layout.n_qubits
    if state.dim_a * state.dim_b != 2**n:
        raise ChannelError("state dimension does not match the layout")
    blocks = []
    for blk in state.blocks:
        rho = blk.rho
        for q in range(n):
            rho = _apply_to_qubit(rho, noise.kraus, q, n)
        blocks.append((blk.x, blk.y, blk.prob, rho))
    return CcQqState.from_blocks(state.dim_a, state.dim_b, blocks)


def _merge_blocks(state: CcQqState) -> CcQqState:
    merged: dict = {}
    for blk in state.blocks:
        if blk.prob < 1e-15:
            continue
        key = (blk.x, blk.y)
        if key in merged:
            p0, r0 = merged[key]
            merged[key] = (p0 + blk.prob, r0 + blk.prob * blk.rho)
        else:
            merged[key] = (blk.prob, blk.prob * blk.rho)
    if len(merged) > MAX_BLOCKS:
        raise ChannelError(f"block count {len(merged)} exceeds the cap of {MAX_BLOCKS}")
    blocks = [(x, y, p, r / p) for (x, y), (p, r) in merged.items()]
    return CcQqState.from_blocks(state.dim_a, state.dim_b, blocks)


def _apply_gate_layer(state: CcQqState, layer: GateLayer) -> CcQqState:
    blocks = []
    for blk in state.blocks:
        channel = layer.channel
        if layer.controls is not None:
            channel = layer.controls.get((blk.x, blk.y), layer.channel)
        if channel is None:
            blocks.append((blk.x, blk.y, blk.prob, blk.rho))
            continue
        rho = channel.apply(blk.rho)
        blocks.append((blk.x, blk.y, blk.prob, rho))
    out_a, out_b = state.dim_a, state.dim_b
    first = layer.channel
    if isinstance(first, SeparableChannel):
        out_a, out_b = first.a_out, first.b_out
    return _merge_blocks(CcQqState.from_blocks(out_a, out_b, blocks))


def _store_outcome(layout: RegisterLayout, x: tuple, y: tuple, store: str, value: int):
    for side, labels in (("A", x), ("B", y)):
        regs = [c for c in layout.classical if c.side == side]
        for i, reg in enumerate(regs):
            if reg.label == store:
                if not 0 <= value < reg.size:
                    raise ChannelError(
                        f"outcome {value} outside register {store} alphabet of size {reg.size}"
                    )
                new = list(labels)
                new[i] = value
                if side == "A":
                    return tuple(new), y
                return x, tuple(new)
    raise ChannelError(f"no classical register labeled {store!r}")


def _apply_instrument_layer(
    state: CcQqState, layer: InstrumentLayer, layout: RegisterLayout, tol: Tolerances
) -> CcQqState:
    total = sum(la.dag(k) @ k for _, ops in layer.outcomes for k in ops)
    d = state.dim_a * state.dim_b
    if np.linalg.norm(total - np.eye(d), 2) > tol.tp:
        raise ChannelError("instrument outcomes do not sum to a trace-preserving map")
    blocks = []
    for blk in state.blocks:
        for value, ops in layer.outcomes:
            rho = sum(k @ blk.rho @ la.dag(k) for k in ops)
            p_out = float(np.real(np.trace(rho)))
            if p_out <= 1e-15:
                continue
            x, y = _store_outcome(layout, blk.x, blk.y, layer.store, value)
            blocks.append((x, y, blk.prob * p_out, rho / p_out))
    return _merge_blocks(CcQqState.from_blocks(state.dim_a, state.dim_b, blocks))


def _apply_classical_layer(state: CcQqState, layer: ClassicalLayer) -> CcQqState:
    blocks = []
    for blk in state.blocks:
        key = (blk.x, blk.y)
        successors = layer.update.get(key, [(1.0, key)])
        mass = sum(p for p, _ in successors)
        if abs(mass - 1.0) > 1e-12:
            raise ChannelError(f"classical update for {key} has total probability {mass}")
        for p, (x, y) in successors:
            if p <= 0:
                continue
            blocks.append((tuple(x), tuple(y), blk.prob * p, blk.rho))
    return _merge_blocks(CcQqState.from_blocks(state.dim_a, state.dim_b, blocks))


def apply_layer(
    state: CcQqState, layer, layout: RegisterLayout, tol: Tolerances = DEFAULT_TOL
) -> CcQqState:
    if isinstance(layer, GateLayer):
        return _apply_gate_layer(state, layer)
    if isinstance(layer, InstrumentLayer):
        return _apply_instrument_layer(state, layer, layout, tol)
    if isinstance(layer, ClassicalLayer):
        return _apply_classical_layer(state, layer)
    raise ChannelError(f"unknown layer type {type(layer).__name__}")


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryStep:
    index: int
    total_prob: float
    block_count: int
    chisep_value: float | None = None
    ratio: float | None = None
    factor_bound: float | None = None
    precondition: bool | None = None
    factor_ok: bool | None = None


@dataclass(frozen=True)
class TrajectoryReport:
    steps: tuple[TrajectoryStep, ...]
    seed: int
    width: int
    length: int
    endgame_step: int | None = None
    endgame_dsep: float | None = None
    final_state: CcQqState | None = None
    extras: dict = field(default_factory=dict)

    @property
    def chisep_series(self) -> list:
        return [s.chisep_value for s in self.steps]


def total_probability(state: CcQqState) -> float:
    return float(sum(b.prob for b in state.blocks))


def run_noisy_circuit(
    circuit: NoisyCircuit,
    input_state: CcQqState,
    seed: int = 0,
    record_chisep: bool = False,
    sep_cfg: SepConfig | None = None,
    keep_final_state: bool = True,
) -> TrajectoryReport:
    """Run the noisy implementation of the circuit on a cc-qq input.

    Per time step the i.i.d. noise and the layer are applied in the order
    set by ``circuit.noise_order`` (noise before the layer by default);
    classical layers execute between time steps without noise.  The
    trajectory records probability mass, block counts, and optionally the
    chi-square distance to the separable set after every step.
    """
    layout = circuit.layout
    cfg = sep_cfg or SepConfig()
    state = input_state
    steps = []

    def measure(idx, st):
        chi = None
        if record_chisep:
            chi = _chisep_of_state(st, cfg)
        prev = steps[-1].chisep_value if steps else None
        ratio = None
        if chi is not None and prev is not None and prev > RATIO_FLOOR:
            ratio = chi / prev
        steps.append(
            TrajectoryStep(
                index=idx,
                total_prob=total_probability(st),
                block_count=len(st.blocks),
                chisep_value=chi,
                ratio=ratio,
            )
        )

    measure(0, state)
    for layer in circuit.layers:
        if isinstance(layer, ClassicalLayer):
            state = apply_layer(state, layer, layout)
            continue
        if circuit.noise_order == "noise-first":
            state = apply_iid_noise(state, circuit.noise, layout)
            state = apply_layer(state, layer, layout)
        else:
            state = apply_layer(state, layer, layout)
            state = apply_iid_noise(state, circuit.noise, layout)
        measure(len(steps), state)
    if circuit.trailing_noise:
        state = apply_iid_noise(state, circuit.noise, layout)
        measure(len(steps), state)
    width, length = circuit_metrics(circuit)
    return TrajectoryReport(
        steps=tuple(steps),
        seed=seed,
        width=width,
        length=length,
        final_state=state if keep_final_state else None,
    )


def _chisep_of_state(state: CcQqState, cfg: SepConfig) -> float:
    from .separability import chisep_ccqq

    return chisep_ccqq(state, cfg).value


# ---------------------------------------------------------------------------
# The doubled-memory experiment
# ---------------------------------------------------------------------------


def doubled_layout(n: int, cap: int = DEFAULT_QUBIT_CAP) -> RegisterLayout:
    if 2 * n > cap:
        raise ChannelError(f"two copies of {n} qubits exceed the cap of {cap}")
    qubits = tuple(QubitReg(label=f"A{i}", side="A") for i in range(n)) + tuple(
        QubitReg(label=f"B{i}", side="B") for i in range(n)
    )
    return RegisterLayout(qubits=qubits)


def doubled_memory_experiment(
    n: int,
    noise: KrausChannel,
    steps: int,
    input_state: BipartiteState,
    gate: KrausChannel | None = None,
    p_value: float | None = None,
    unital_noise: bool | None = None,
    sep_cfg: SepConfig | None = None,
    seed: int = 0,
    factor_tol: float = 1e-3,
) -> TrajectoryReport:
    """Two parallel copies of an n-qubit memory circuit under i.i.d. noise.

    Side A carries the first copy and side B the second; the per-step gate
    acts as the same local channel on each copy, hence every layer is
    separable across A:B.  The chi-square distance to the separable set is
    recorded after every step and compared against the contraction factor
    1 - p^(2n), where p is the channel constant of the noise (computed on
    demand when ``p_value`` is not given).  For unital noise the factor is
    checked at every step; otherwise only while the distance stays at or
    above the 1/16 threshold.  Once the distance falls below the threshold,
    the 1-norm distance to the separable set of that state is recorded as
    the endgame check.
    """
    layout = doubled_layout(n)
    cfg = sep_cfg or SepConfig()
    if input_state.dim_a != 2**n or input_state.dim_b != 2**n:
        raise ChannelError("input state must hold n qubits per side")
    if gate is None:
        gate = KrausChannel.from_kraus([np.eye(2**n)])
    if unital_noise is None:
        unital_noise = noise.is_unital()
    if p_value is None:
        from .decompose import p_constant

        p_value = p_constant(noise, seed=seed).p
    factor = 1.0 - p_value ** (2 * n)

    sep_gate = local_product_channel(gate, gate)
    layer = GateLayer(channel=sep_gate)
    state = CcQqState.single(input_state)
    chi = _chisep_of_state(state, cfg)
    out_steps = [
        TrajectoryStep(index=0, total_prob=total_probability(state), block_count=1, chisep_value=chi)
    ]
    endgame_step = None
    endgame_dsep = None
    for i in range(1, steps + 1):
        prev_chi = chi
        state = apply_iid_noise(state, noise, layout)
        state = apply_layer(state, layer, layout)
        chi = _chisep_of_state(state, cfg)
        precondition = prev_chi >= CHISEP_THRESHOLD
        ok = None
        if unital_noise or precondition:
            ok = bool(chi <= factor * prev_chi + factor_tol)
        ratio = chi / prev_chi if prev_chi > RATIO_FLOOR else None
        out_steps.append(
            TrajectoryStep(
                index=i,
                total_prob=total_probability(state),
                block_count=len(state.blocks),
                chisep_value=chi,
                ratio=ratio,
                factor_bound=factor,
                precondition=precondition,
                factor_ok=ok,
            )
        )
        if endgame_step is None and chi < CHISEP_THRESHOLD:
            endgame_step = i
            blk = max(state.blocks, key=lambda b: b.prob)
            endgame_dsep = dsep(
                BipartiteState.from_matrix(blk.rho, state.dim_a, state.dim_b), cfg
            ).value
    return TrajectoryReport(
        steps=tuple(out_steps),
        seed=seed,
        width=2 * n,
        length=steps,
        endgame_step=endgame_step,
        endgame_dsep=endgame_dsep,
        final_state=state,
        extras={
            "p_value": p_value,
            "factor": factor,
            "unital_noise": unital_noise,
        },
    )
