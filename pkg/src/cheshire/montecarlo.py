"""Shot-by-shot simulation of the CCD readout experiment.

Each shot sends one photon, prepared in the experiment's pre-state and
coupled to the configured pointers, through the detection chain.  The
detector click is drawn from the exact entangled-state probabilities; shots
that reach D1 (the post-selecting detector) additionally record the pointer
readout, drawn from the post-selected mixture density by rejection sampling.

Randomness is counter-based for reproducibility: shot ``i`` of a run with
seed ``seed`` uses its own Philox4x64-10 stream keyed by
``[seed mod 2**64, i mod 2**64]`` (numpy's ``Philox`` bit generator).  The
per-shot draw order is fixed:

    1. one uniform for the detector choice (D1 / D2 / D3 bands);
    2. for D1 shots, rejection-sampling attempts, each drawing one uniform
       (branch choice), ``n_axes`` standard normals (proposal point, axes in
       pointer order), and one uniform (accept test), until acceptance.

Records therefore depend only on ``(experiment, seed, shot_id)``: any
sharding of a shot range reproduces the same records bit for bit.  Byte
identity across machines additionally requires a fixed numpy version (the
Philox bit stream is versioned; numpy documents Generator stream changes).

The rejection envelope is the Cauchy-Schwarz bound

    |sum_i w_i A_i(x)|^2  <=  N * sum_i |w_i|^2 A_i(x)^2,

i.e. N times the mixture of the branch Gaussians with weights |w_i|^2,
sampled by choosing a branch and displacing its Gaussian.  Envelope
domination is asserted at every sampled point in debug mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .optics import Circuit, Detector, detector_projectors, postselected_state, standard_circuit
from .pointer import (
    Axis,
    CoupledState,
    GaussianPointer,
    NullPostSelection,
    PointerMixture,
    branch_overlaps,
    couple,
    postselect_pointer,
)
from .qstate import Ket, SpectralObservable

_MASK64 = (1 << 64) - 1


class InsufficientData(ValueError):
    """Too few post-selected shots to form an estimate."""


@dataclass(frozen=True)
class Experiment:
    """Pre-state, pointer couplings (applied in order), and detection chain."""

    pre: Ket
    couplings: tuple[tuple[SpectralObservable, GaussianPointer], ...]
    circuit: Circuit = field(default_factory=standard_circuit)

    def pointers(self) -> tuple[GaussianPointer, ...]:
        return tuple(pointer for _, pointer in self.couplings)

    def axes(self) -> tuple[Axis, ...]:
        return tuple(pointer.axis for pointer in self.pointers())


@dataclass(frozen=True)
class ShotRecord:
    """One photon: which detector clicked, and the CCD readout for D1 shots.

    ``readout`` has one value per pointer axis (experiment order) and is
    present exactly when the detector is D1.
    """

    shot_id: int
    detector: Detector
    readout: tuple[float, ...] | None

    def __post_init__(self) -> None:
        if (self.readout is not None) != (self.detector is Detector.D1):
            raise ValueError("readout must be present exactly for D1 shots")


@dataclass(frozen=True)
class ExperimentAnalysis:
    """Analytic quantities a run is sampled from (and later checked against)."""

    coupled: CoupledState
    detector_probabilities: dict[Detector, float]
    mixture: PointerMixture | None
    success_probability: float


def analyze(experiment: Experiment) -> ExperimentAnalysis:
    """Exact detector distribution and post-selected pointer mixture.

    Detector probabilities come from the full entangled state: P(detector) =
    sum_ij <b_i| M |b_j> O_ij with M the detector's traced-back projector
    and O the pointer overlap Gram matrix, so measurement disturbance is
    included.  A post-selection that can never succeed yields mixture None
    and success probability 0 rather than an exception.
    """
    coupled: Ket | CoupledState = experiment.pre
    for obs, pointer in experiment.couplings:
        coupled = couple(coupled, obs, pointer)
    if isinstance(coupled, Ket):
        coupled = CoupledState(branches=((coupled, ()),), pointers=())
    try:
        mixture, success = postselect_pointer(coupled, postselected_state(experiment.circuit))
    except NullPostSelection:
        mixture, success = None, 0.0
    systems = np.array([system.amps for system, _ in coupled.branches])
    gram = branch_overlaps(coupled)
    probabilities: dict[Detector, float] = {}
    for detector, projector in detector_projectors(experiment.circuit).items():
        cross = systems.conj() @ projector @ systems.T
        probabilities[detector] = min(1.0, max(0.0, float(np.sum(cross * gram).real)))
    probabilities[Detector.D1] = success
    return ExperimentAnalysis(
        coupled=coupled,
        detector_probabilities=probabilities,
        mixture=mixture,
        success_probability=success,
    )


def shot_generator(seed: int, shot_id: int) -> np.random.Generator:
    """The dedicated random stream of one shot (see module docstring)."""
    key = np.array([seed & _MASK64, shot_id & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class _ShotStream:
    """Reuses one Philox generator, rekeying it per shot.

    Equivalent to calling :func:`shot_generator` for every shot, without the
    per-shot allocation cost (the equivalence is under test).
    """

    def __init__(self, seed: int) -> None:
        self._seed = seed & _MASK64
        self._bit_generator = np.random.Philox(key=np.array([self._seed, 0], dtype=np.uint64))
        self.generator = np.random.Generator(self._bit_generator)

    def rekey(self, shot_id: int) -> np.random.Generator:
        state = self._bit_generator.state
        state["state"]["key"][0] = self._seed
        state["state"]["key"][1] = shot_id & _MASK64
        state["state"]["counter"][:] = 0
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        state["uinteger"] = 0
        self._bit_generator.state = state
        return self.generator


class _ReadoutSampler:
    """Rejection sampler for the post-selected pointer density."""

    def __init__(self, mixture: PointerMixture) -> None:
        self.weights = np.asarray(mixture.weights, dtype=np.complex128)
        self.displacements = np.asarray(mixture.displacements, dtype=float).reshape(
            len(mixture.weights), len(mixture.axes)
        )
        self.widths = np.asarray(mixture.widths, dtype=float)
        self.n_branches = len(mixture.weights)
        self.n_axes = len(mixture.axes)
        abs2 = np.abs(self.weights) ** 2
        self.abs2 = abs2
        self.branch_cdf = np.cumsum(abs2 / abs2.sum())

    def sample(self, rng: np.random.Generator) -> tuple[float, ...]:
        while True:
            branch = int(np.searchsorted(self.branch_cdf, rng.random(), side="right"))
            branch = min(branch, self.n_branches - 1)
            point = self.displacements[branch] + self.widths * rng.standard_normal(self.n_axes)
            # Branch amplitudes up to a common constant, which cancels below.
            delta = point - self.displacements
            amps = np.exp(-np.sum(delta**2 / (4.0 * self.widths**2), axis=-1))
            target = abs(np.dot(self.weights, amps)) ** 2
            envelope = self.n_branches * float(np.dot(self.abs2, amps**2))
            assert target <= envelope * (1.0 + 1e-9), "rejection envelope violated"
            if rng.random() * envelope <= target:
                return tuple(float(x) for x in point)


def sample_shots(
    experiment: Experiment, n: int, seed: int, first_shot: int = 0
) -> list[ShotRecord]:
    """Simulate shots ``first_shot .. first_shot + n - 1``.

    Identical (experiment, seed, shot id) always reproduces a record
    bit-identically, so ``sample_shots(e, n, s)`` equals the concatenation
    of any sharding of the same range (pass ``first_shot`` per shard).  A
    post-selection that can never succeed is not an error here: every shot
    is simply rejected to D2/D3.
    """
    if n < 1:
        raise ValueError("need at least one shot")
    analysis = analyze(experiment)
    p_d1 = analysis.detector_probabilities[Detector.D1]
    p_d2 = analysis.detector_probabilities[Detector.D2]
    sampler = _ReadoutSampler(analysis.mixture) if analysis.mixture is not None else None
    stream = _ShotStream(seed)
    records: list[ShotRecord] = []
    for shot_id in range(first_shot, first_shot + n):
        rng = stream.rekey(shot_id)
        u = rng.random()
        if u < p_d1 and sampler is not None:
            records.append(ShotRecord(shot_id, Detector.D1, sampler.sample(rng)))
        elif u < p_d1 + p_d2:
            records.append(ShotRecord(shot_id, Detector.D2, None))
        else:
            records.append(ShotRecord(shot_id, Detector.D3, None))
    return records


@dataclass(frozen=True)
class AxisEstimate:
    """Sample statistics of the D1 readouts along one pointer axis."""

    mean: float
    stderr: float
    mean_over_coupling: float | None  # None when the coupling is zero


@dataclass(frozen=True)
class SummaryStats:
    n_shots: int
    d1_count: int
    post_rate: float
    axes: dict[Axis, AxisEstimate]
    config: dict


def estimate(records: list[ShotRecord], experiment: Experiment) -> SummaryStats:
    """Aggregate shot records into post-selection rate and per-axis estimates.

    Raises InsufficientData when fewer than two D1 readouts exist: a
    standard error needs at least two samples.
    """
    if not records:
        raise ValueError("records must be non-empty")
    n = len(records)
    readouts = np.array([r.readout for r in records if r.detector is Detector.D1], dtype=float)
    d1_count = readouts.shape[0]
    post_rate = d1_count / n
    if d1_count < 2:
        raise InsufficientData(f"only {d1_count} post-selected shots; need at least 2")
    axes: dict[Axis, AxisEstimate] = {}
    for k, pointer in enumerate(experiment.pointers()):
        values = readouts[:, k]
        mean = float(values.mean())
        stderr = float(values.std(ddof=1) / np.sqrt(d1_count))
        ratio = mean / pointer.coupling if pointer.coupling > 0 else None
        axes[pointer.axis] = AxisEstimate(mean=mean, stderr=stderr, mean_over_coupling=ratio)
    config = {
        "n_shots": n,
        "pointers": {
            pointer.axis.value: {"coupling": pointer.coupling, "width": pointer.width}
            for pointer in experiment.pointers()
        },
    }
    return SummaryStats(
        n_shots=n, d1_count=d1_count, post_rate=post_rate, axes=axes, config=config
    )
