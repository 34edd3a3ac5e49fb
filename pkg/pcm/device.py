"""
Passive-Choice Measurement (PCM) device.

A PCM is a CPBS followed by four threshold detectors (left/right port,
H/V polarization). Its reading is decided by the click pattern alone:

    one click in each port      -> Bell result (phi_plus on equal letters,
                                   psi_plus on opposite letters)
    exactly one click overall   -> X-basis projection of the lone photon
    anything else               -> no_decision

For a lone photon the port reveals its D/A value, which depends on the
input it came through (see optics.elements for the port rule). An |A>
result leaves the rest of a GHZ register in GHZ-minus, so the outcome
carries a Z correction; a psi_plus Bell result carries an X correction on
the partner of the Bell-measured EPR photon.

With several photons present, each takes either port with probability 1/2.
Two interfering photons from different inputs that share a port carry
orthogonal D/A values and so fire one detector of that port; this is why a
"single" reading can come from more than one photon.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import binom

from core import ops
from core.states import KETS, PAULIS, PHI_PLUS, PSI_PLUS, PureState, ALGEBRA_TOL
from sources.spdc import ClickPattern


logger = logging.getLogger(__name__)


class PcmTag(Enum):
    """Outcome tags; the values are the serialized form."""
    PHI_PLUS = "phi_plus"
    PSI_PLUS = "psi_plus"
    SINGLE_LEFT = "single_left"
    SINGLE_RIGHT = "single_right"
    NO_DECISION = "no_decision"

    @property
    def is_bell(self) -> bool:
        return self in (PcmTag.PHI_PLUS, PcmTag.PSI_PLUS)

    @property
    def is_single(self) -> bool:
        return self in (PcmTag.SINGLE_LEFT, PcmTag.SINGLE_RIGHT)


BELL_TAGS = (PcmTag.PHI_PLUS, PcmTag.PSI_PLUS)
SINGLE_TAGS = (PcmTag.SINGLE_LEFT, PcmTag.SINGLE_RIGHT)


class Detector(Enum):
    LH = "LH"
    LV = "LV"
    RH = "RH"
    RV = "RV"


class Side(Enum):
    """Which CPBS input a lone photon entered through."""
    A = "a"
    B = "b"


@dataclass(frozen=True)
class PcmOutcome:
    tag: PcmTag
    correction: str = "I"  # Pauli letter applied downstream


def single_basis(tag: PcmTag, side: Side = Side.B) -> str:
    """D or A value of a lone photon given the port that fired."""
    if not tag.is_single:
        raise ValueError(f"{tag.value} is not a single-click outcome")
    left = tag is PcmTag.SINGLE_LEFT
    if side is Side.B:
        return "D" if left else "A"
    return "A" if left else "D"


def outcome_for(tag: PcmTag, side: Side = Side.B) -> PcmOutcome:
    if tag is PcmTag.PSI_PLUS:
        return PcmOutcome(tag, "X")
    if tag.is_single:
        return PcmOutcome(tag, "Z" if single_basis(tag, side) == "A" else "I")
    return PcmOutcome(tag, "I")


def _detector_ids(clicks: Union[ClickPattern, Iterable[str]]) -> set:
    raw = clicks.clicked if isinstance(clicks, ClickPattern) else clicks
    # identifiers may be namespaced as "<station>:LH"
    return {str(c).rsplit(":", 1)[-1].upper() for c in raw}


def classify(clicks: Union[ClickPattern, Iterable[str]], side: Side = Side.B) -> PcmOutcome:
    """Total map from one PCM's click set to its outcome."""
    ids = _detector_ids(clicks) & {d.value for d in Detector}
    left = sorted(d for d in ids if d.startswith("L"))
    right = sorted(d for d in ids if d.startswith("R"))
    if len(left) == 1 and len(right) == 1:
        same = left[0][1] == right[0][1]
        return outcome_for(PcmTag.PHI_PLUS if same else PcmTag.PSI_PLUS, side)
    if len(ids) == 1:
        return outcome_for(PcmTag.SINGLE_LEFT if left else PcmTag.SINGLE_RIGHT, side)
    return PcmOutcome(PcmTag.NO_DECISION)


# click masks: bit 0 LH, bit 1 LV, bit 2 RH, bit 3 RV
MASK_DETECTORS = (Detector.LH, Detector.LV, Detector.RH, Detector.RV)


def mask_tag_table(side: Side = Side.B) -> np.ndarray:
    """Tag index (position in PcmTag) for each of the 16 click masks."""
    tags = list(PcmTag)
    table = np.empty(16, dtype=np.int8)
    for mask in range(16):
        clicked = [d.value for i, d in enumerate(MASK_DETECTORS) if mask >> i & 1]
        table[mask] = tags.index(classify(clicked, side).tag)
    return table


class Port(Enum):
    LEFT = "left"
    RIGHT = "right"


def port_for(value: str, side: Side) -> Port:
    """CPBS output port taken by a photon of X value ``value`` entering on ``side``."""
    return Port.LEFT if value == single_basis(PcmTag.SINGLE_LEFT, side) else Port.RIGHT


def bunched_single_click(v: float) -> float:
    """
    Chance that one photon from each input, leaving through the same port,
    fires a single detector. The pair carries orthogonal D/A values, so
    interfering photons share a detector; distinguishable ones split half
    the time.
    """
    return (1.0 + v) / 2.0


def single_detector_probability(x, y, v: float = 1.0):
    """
    Chance that a port holding x photons from input a and y from input b
    fires exactly one of its two detectors. Works on arrays.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    k = x + y
    crowd = np.power(2.0, 1.0 - np.maximum(k, 1).astype(float))
    pair = (x == 1) & (y == 1)
    return np.where(k <= 1, 1.0, np.where(pair, bunched_single_click(v), crowd))


def _left_pmf(n: np.ndarray, kmax: int, pinned) -> list:
    """P(k photons of one input leave left), k = 0..kmax."""
    ks = range(kmax + 1)
    if pinned is None:
        return [binom.pmf(k, n, 0.5) for k in ks]
    free = np.maximum(n - 1, 0)
    shift = 1 if pinned is Port.LEFT else 0
    return [binom.pmf(k - shift, free, 0.5) if k >= shift else np.zeros(n.shape) for k in ks]


def click_probabilities(
    n_a: Union[int, np.ndarray],
    n_b: Union[int, np.ndarray],
    v: float = 1.0,
    pinned: Optional[Tuple[Side, Port]] = None,
) -> dict:
    """
    Tag distribution of a PCM that receives n_a photons on input a and n_b
    on input b, each photon taking either CPBS port with probability 1/2.

    Args:
        n_a, n_b: photon numbers per input; arrays broadcast elementwise.
        v: visibility of the PCM overlap point.
        pinned: optional (side, port) fixing the port of one photon of that
            input, used for a tracked photon sharing the PCM with untracked ones.

    Returns:
        Mapping PcmTag -> probability, shaped like the broadcast inputs.
        A Bell reading needs a single detector in each port; the two letters
        are independent, so phi_plus and psi_plus split it evenly.
    """
    n_a, n_b = np.broadcast_arrays(np.asarray(n_a), np.asarray(n_b))
    pin_a = pinned[1] if pinned is not None and pinned[0] is Side.A else None
    pin_b = pinned[1] if pinned is not None and pinned[0] is Side.B else None
    top_a = int(n_a.max()) if n_a.size else 0
    top_b = int(n_b.max()) if n_b.size else 0
    pa = _left_pmf(n_a, top_a, pin_a)
    pb = _left_pmf(n_b, top_b, pin_b)

    bell = np.zeros(n_a.shape)
    left_only = np.zeros(n_a.shape)
    right_only = np.zeros(n_a.shape)
    for xl in range(top_a + 1):
        for yl in range(top_b + 1):
            w = pa[xl] * pb[yl]
            xr, yr = n_a - xl, n_b - yl
            k_left, k_right = xl + yl, xr + yr
            s_left = single_detector_probability(xl, yl, v)
            s_right = single_detector_probability(xr, yr, v)
            bell = bell + w * ((k_left >= 1) & (k_right >= 1)) * s_left * s_right
            left_only = left_only + w * ((k_left >= 1) & (k_right == 0)) * s_left
            right_only = right_only + w * ((k_right >= 1) & (k_left == 0)) * s_right
    nd = 1.0 - bell - left_only - right_only
    return {
        PcmTag.PHI_PLUS: bell / 2.0,
        PcmTag.PSI_PLUS: bell / 2.0,
        PcmTag.SINGLE_LEFT: left_only,
        PcmTag.SINGLE_RIGHT: right_only,
        PcmTag.NO_DECISION: np.clip(nd, 0.0, 1.0),
    }


def sample_clicks(n_a, n_b, v: float, rng: np.random.Generator) -> np.ndarray:
    """Draw click masks under the same model as ``click_probabilities``."""
    n_a = np.asarray(n_a)
    n_b = np.asarray(n_b)
    xl = rng.binomial(n_a, 0.5)
    yl = rng.binomial(n_b, 0.5)
    mask = np.zeros(n_a.shape, dtype=np.int64)
    for x, y, shift in ((xl, yl, 0), (n_a - xl, n_b - yl, 2)):
        occupied = (x + y) >= 1
        one = rng.random(n_a.shape) < single_detector_probability(x, y, v)
        letter = rng.integers(0, 2, size=n_a.shape)
        port = np.where(one, 1 << letter, 3)
        mask |= np.where(occupied, port << shift, 0)
    return mask


def bell_vector(tag: PcmTag) -> np.ndarray:
    if tag is PcmTag.PHI_PLUS:
        return PHI_PLUS.amplitudes
    if tag is PcmTag.PSI_PLUS:
        return PSI_PLUS.amplitudes
    raise ValueError(f"{tag.value} is not a Bell outcome")


def _shifted(q: int, removed: Sequence[int]) -> int:
    return q - sum(1 for r in removed if r < q)


def apply_outcome(
    state: PureState,
    qubits: Sequence[int],
    outcome: PcmOutcome,
    side: Side = Side.B,
    correction_qubits: Sequence[int] = (),
) -> tuple:
    """
    State update for one PCM reading; the detected photons leave the
    register. ``correction_qubits`` are indices in the input register: a
    psi_plus result flips every one of them (X), a GHZ-minus single result
    applies Z to the first. Returns (state, probability); an impossible
    branch gives ``PureState.empty``.
    """
    tag = outcome.tag
    if tag is PcmTag.NO_DECISION:
        raise ValueError("no_decision carries no state update")
    n = state.num_qubits
    if tag.is_bell:
        if len(qubits) != 2:
            raise ValueError("Bell outcomes need both PCM qubits")
        measured = list(qubits)
        rest = ops.contract_bra(state.amplitudes, n, bell_vector(tag), measured)
    else:
        measured = [qubits[0] if (len(qubits) == 1 or side is Side.A) else qubits[1]]
        basis = KETS[single_basis(tag, side)].amplitudes
        rest = ops.contract_bra(state.amplitudes, n, basis, measured)

    remaining = n - len(measured)
    prob = float(np.vdot(rest, rest).real)
    if prob <= ALGEBRA_TOL ** 2:
        return PureState.empty(remaining), 0.0
    rest = rest / np.sqrt(prob)

    targets = [_shifted(q, measured) for q in correction_qubits if q not in measured]
    if outcome.correction == "X":
        for q in targets:
            rest = ops.apply_vec(rest, remaining, PAULIS["X"], [q])
    elif outcome.correction == "Z" and targets:
        rest = ops.apply_vec(rest, remaining, PAULIS["Z"], [targets[0]])
    return PureState(remaining, rest), min(prob, 1.0)
