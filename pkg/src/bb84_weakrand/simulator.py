"""Pulse-level Monte-Carlo BB84 with hidden-variable biased choices.

Per pulse: hidden variables pick Alice's bit and basis biases, a Pauli
operator is drawn for the channel, Bob measures in an independently
drawn basis, and pulses with mismatched bases are sifted away.  Matched
bases reduce exactly to per-basis flip probabilities (bit flips from X
in the rectilinear basis, from Z in the diagonal one), so measurement
is sampled from those flips rather than by collapsing a state vector;
the equivalence with the density-matrix route is covered by tests.

The optional eavesdropper measures each pulse in the basis its
basis-side hidden variable makes more likely and resends what it saw.
The channel here is one fixed Pauli map, independent of the hidden
variables; attacks that correlate the channel with the hidden variables
are outside this model and belong to the worst-case optimizer instead.
No detector loss or dark counts are modelled: imperfections on the
detection side are handled by the discounted-rate calculator, not the
simulator.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ValidationError
from .keyrate import HiddenVariableModel, one_step_rate
from .quantum_core import PauliChannel

MAX_SEED = 2**64 - 1

# Uniform variates consumed per pulse, in fixed column order, so a run
# is reproducible across batch splits of the same seed.
_DRAWS_PER_PULSE = 8
(_COL_L0, _COL_L1, _COL_X0, _COL_X1, _COL_CHAN, _COL_Y, _COL_EVE, _COL_MISMATCH) = range(
    _DRAWS_PER_PULSE
)


class Attacker(str, enum.Enum):
    NONE = "none"
    INTERCEPT_RESEND_WITH_HINTS = "intercept-resend-with-hints"


@dataclass(frozen=True)
class SimConfig:
    """Inputs of one simulation run; ``seed`` makes the run reproducible."""

    n_pulses: int
    hv: HiddenVariableModel
    channel: PauliChannel
    bob_basis_prob: float = 0.5
    attacker: Attacker = Attacker.NONE
    seed: int = 0

    def __post_init__(self):
        if self.n_pulses < 1:
            raise ValidationError(f"n_pulses={self.n_pulses!r} must be at least 1")
        if not 0.0 <= self.bob_basis_prob <= 1.0:
            raise ValidationError(
                f"bob_basis_prob={self.bob_basis_prob!r} outside [0, 1]"
            )
        if not 0 <= self.seed <= MAX_SEED:
            raise ValidationError(f"seed={self.seed!r} outside [0, 2^64)")
        object.__setattr__(self, "attacker", Attacker(self.attacker))


@dataclass(frozen=True)
class PulseRecord:
    """One pulse of the protocol transcript."""

    lambda0: int
    lambda1: int
    x0: int
    x1: int
    y: int
    bob_bit: int
    sifted: bool
    eve_guess: int | None = None


@dataclass(frozen=True)
class SimReport:
    """Aggregated outcome of a run, plus rates derived from the QBER."""

    n_pulses: int
    seed: int
    sifted_count: int
    qber_estimate: float
    qber_std_error: float
    basis_counts: tuple[int, int]
    qber_rec: float | None
    qber_dia: float | None
    p_x0_zero_observed: float
    p_x1_zero_observed: float
    eve_agreement: float | None
    derived_rates: dict | None

    def to_dict(self) -> dict:
        return {
            "n_pulses": self.n_pulses,
            "seed": self.seed,
            "sifted_count": self.sifted_count,
            "qber_estimate": self.qber_estimate,
            "qber_std_error": self.qber_std_error,
            "basis_counts": {"rec": self.basis_counts[0], "dia": self.basis_counts[1]},
            "qber_rec": self.qber_rec,
            "qber_dia": self.qber_dia,
            "p_x0_zero_observed": self.p_x0_zero_observed,
            "p_x1_zero_observed": self.p_x1_zero_observed,
            "eve_agreement": self.eve_agreement,
            "derived_rates": self.derived_rates,
        }


def basis_flip_probabilities(channel: PauliChannel) -> tuple[float, float]:
    """Bit-flip probability in the rectilinear and diagonal bases.

    X and XZ flip rectilinear encodings; Z and XZ flip diagonal ones.
    """
    return (channel.q10 + channel.q11, channel.q01 + channel.q11)


def predicted_basis(hv: HiddenVariableModel, lambda1: int) -> int:
    """Eve's basis guess given the hidden variable: the likelier one, ties rectilinear."""
    return 0 if hv.p_x1_given_l1[lambda1] >= 0.5 else 1


def _qber_with_error(n_errors: int, n_sifted: int) -> tuple[float, float]:
    p_hat = n_errors / n_sifted
    return p_hat, float(np.sqrt(p_hat * (1.0 - p_hat) / n_sifted))


def estimate_qber(records) -> tuple[float, float]:
    """QBER over the sifted records, with its binomial standard error."""
    sifted = [r for r in records if r.sifted]
    if not sifted:
        raise InsufficientDataError("no sifted records to estimate a QBER from")
    errors = sum(1 for r in sifted if r.bob_bit != r.x0)
    return _qber_with_error(errors, len(sifted))


@dataclass
class _RawRun:
    """Vectorized per-pulse arrays of one run."""

    lambda0: np.ndarray
    lambda1: np.ndarray
    x0: np.ndarray
    x1: np.ndarray
    y: np.ndarray
    bob_bit: np.ndarray
    sifted: np.ndarray
    eve_guess: np.ndarray | None


def _run_pulses(cfg: SimConfig) -> _RawRun:
    rng = np.random.default_rng(cfg.seed)
    u = rng.random((cfg.n_pulses, _DRAWS_PER_PULSE))
    hv = cfg.hv

    lambda0 = (u[:, _COL_L0] >= hv.p_lambda0).astype(np.int8)
    lambda1 = (u[:, _COL_L1] >= hv.p_lambda1).astype(np.int8)
    p_bit0 = np.where(lambda0 == 0, hv.p_x0_given_l0[0], hv.p_x0_given_l0[1])
    p_basis0 = np.where(lambda1 == 0, hv.p_x1_given_l1[0], hv.p_x1_given_l1[1])
    x0 = (u[:, _COL_X0] >= p_bit0).astype(np.int8)
    x1 = (u[:, _COL_X1] >= p_basis0).astype(np.int8)
    y = (u[:, _COL_Y] >= cfg.bob_basis_prob).astype(np.int8)

    # Channel operator per pulse: 0=I, 1=Z, 2=X, 3=XZ.
    thresholds = np.cumsum(cfg.channel.probabilities())
    op = np.searchsorted(thresholds, u[:, _COL_CHAN], side="right").astype(np.int8)
    op = np.minimum(op, 3)
    flip_rec = (op >= 2).astype(np.int8)
    flip_dia = (op % 2).astype(np.int8)
    flip = np.where(x1 == 0, flip_rec, flip_dia)
    travelling_bit = x0 ^ flip

    mismatch_bit = (u[:, _COL_MISMATCH] < 0.5).astype(np.int8)

    if cfg.attacker is Attacker.NONE:
        bob_bit = np.where(y == x1, travelling_bit, mismatch_bit).astype(np.int8)
        eve_guess = None
    else:
        eve_basis = np.where(
            lambda1 == 0,
            predicted_basis(hv, 0),
            predicted_basis(hv, 1),
        ).astype(np.int8)
        eve_random = (u[:, _COL_EVE] < 0.5).astype(np.int8)
        eve_guess = np.where(eve_basis == x1, travelling_bit, eve_random).astype(np.int8)
        # Eve resends her outcome in her own basis; Bob reads it exactly
        # when his basis matches hers and uniformly otherwise.
        bob_bit = np.where(y == eve_basis, eve_guess, mismatch_bit).astype(np.int8)

    sifted = x1 == y
    return _RawRun(lambda0, lambda1, x0, x1, y, bob_bit, sifted, eve_guess)


def _derive_rates(qber: float, hv: HiddenVariableModel, seed: int) -> dict | None:
    if qber > 0.5:
        return None
    from .optimizer import SolverOptions, TwoStepProblem, solve_two_step

    dev = hv.deviation()
    one_step = one_step_rate(qber, dev)
    two_step = solve_two_step(
        TwoStepProblem(q_target=qber, dev=dev), SolverOptions(seed=seed)
    )
    return {
        "deviation": {"eps0": dev.eps0, "eps1": dev.eps1},
        "one_step": one_step.to_dict(),
        "two_step": two_step.min_rate.to_dict(),
    }


def simulate(cfg: SimConfig, collect_records: bool = False):
    """Run the protocol and aggregate a report; deterministic given the seed.

    Returns the report, or ``(report, records)`` when ``collect_records``
    is set.
    """
    run = _run_pulses(cfg)
    sifted = run.sifted
    n_sifted = int(np.count_nonzero(sifted))
    if n_sifted == 0:
        raise InsufficientDataError(
            f"no pulses survived sifting out of {cfg.n_pulses}"
        )
    errors = (run.bob_bit != run.x0) & sifted
    qber, std_error = _qber_with_error(int(np.count_nonzero(errors)), n_sifted)

    rec_mask = sifted & (run.x1 == 0)
    dia_mask = sifted & (run.x1 == 1)
    n_rec = int(np.count_nonzero(rec_mask))
    n_dia = int(np.count_nonzero(dia_mask))
    qber_rec = (
        float(np.count_nonzero(errors & rec_mask)) / n_rec if n_rec else None
    )
    qber_dia = (
        float(np.count_nonzero(errors & dia_mask)) / n_dia if n_dia else None
    )

    if run.eve_guess is not None:
        eve_agreement = float(np.count_nonzero((run.eve_guess == run.x0) & sifted)) / n_sifted
    else:
        eve_agreement = None

    report = SimReport(
        n_pulses=cfg.n_pulses,
        seed=cfg.seed,
        sifted_count=n_sifted,
        qber_estimate=qber,
        qber_std_error=std_error,
        basis_counts=(n_rec, n_dia),
        qber_rec=qber_rec,
        qber_dia=qber_dia,
        p_x0_zero_observed=float(np.count_nonzero(run.x0 == 0)) / cfg.n_pulses,
        p_x1_zero_observed=float(np.count_nonzero(run.x1 == 0)) / cfg.n_pulses,
        eve_agreement=eve_agreement,
        derived_rates=_derive_rates(qber, cfg.hv, cfg.seed),
    )
    if not collect_records:
        return report

    guesses = run.eve_guess
    records = [
        PulseRecord(
            lambda0=int(run.lambda0[i]),
            lambda1=int(run.lambda1[i]),
            x0=int(run.x0[i]),
            x1=int(run.x1[i]),
            y=int(run.y[i]),
            bob_bit=int(run.bob_bit[i]),
            sifted=bool(sifted[i]),
            eve_guess=None if guesses is None else int(guesses[i]),
        )
        for i in range(cfg.n_pulses)
    ]
    return report, records
