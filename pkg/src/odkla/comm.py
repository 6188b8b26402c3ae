"""
Message passing between agents, with optional censoring and quantization.

Agents broadcast the difference between their fresh primal iterate and the
state they last broadcast.  A difference is sent only when its norm clears a
geometrically decaying threshold, and when a quantizer is configured only the
integer interval index of each element goes on the wire.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import CodeOutOfRange

FLOAT_BITS = 32


@dataclass(frozen=True)
class QuantizerSpec:
    """
    Midpoint rounding quantizer over ``[lo, hi)`` with ``2**bits`` intervals.

    Elements outside the range are clipped before coding.
    """

    bits: int = 3
    lo: float = -4.0
    hi: float = 4.0

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be at least 1")
        if not self.hi > self.lo:
            raise ValueError("hi must exceed lo")

    @classmethod
    def symmetric(cls, bits, radius):
        return cls(bits, -float(radius), float(radius))

    @property
    def levels(self):
        return 2 ** self.bits

    @property
    def delta(self):
        return (self.hi - self.lo) / self.levels


@dataclass(frozen=True)
class CensorSpec:
    alpha: float = 4.0
    beta: float = 0.99
    enabled: bool = True

    def __post_init__(self):
        if self.enabled and not (self.alpha > 0 and 0 < self.beta < 1):
            raise ValueError("censoring needs alpha > 0 and 0 < beta < 1")

    def threshold(self, t):
        return self.alpha * self.beta ** t if self.enabled else 0.0


@dataclass(frozen=True, eq=False)
class Message:
    """
    One broadcast.

    ``codes`` holds the quantizer interval indices when quantization is on;
    otherwise ``state`` carries the sender's new primal iterate verbatim,
    which is what adding the exact difference to the shared copy amounts to.
    """

    sender: int
    round: int
    bits: int
    codes: np.ndarray = None
    state: np.ndarray = None
    clipped: int = 0


@dataclass
class CommCounters:
    triggers: int = 0
    bits: int = 0
    clip_events: int = 0
    clipped_elements: int = 0

    def record(self, msg):
        self.triggers += 1
        self.bits += msg.bits
        if msg.clipped:
            self.clip_events += 1
            self.clipped_elements += msg.clipped


def censor_decision(h, spec, t):
    """True when the difference ``h`` should be transmitted at round ``t``."""
    if t < 1:
        raise ValueError("rounds are numbered from 1")
    if not spec.enabled:
        return True
    return math.sqrt(float(h @ h)) - spec.alpha * spec.beta ** t >= 0.0


def quantize(spec, h, return_clipped=False):
    """
    Integer interval index ``floor((h - lo) / delta)`` of every element.

    Elements are first clipped into ``[lo, hi - delta/2]``.  With
    ``return_clipped`` the number of elements that needed clipping is also
    returned.
    """
    h = np.asarray(h, dtype=float)
    top = spec.hi - spec.delta / 2
    out_of_range = (h < spec.lo) | (h >= spec.hi)
    hc = np.clip(h, spec.lo, top)
    codes = np.floor((hc - spec.lo) / spec.delta).astype(np.int64)
    np.clip(codes, 0, spec.levels - 1, out=codes)
    if return_clipped:
        return codes, int(np.count_nonzero(out_of_range))
    return codes


def dequantize(spec, codes):
    codes = np.asarray(codes)
    if codes.size and (codes.min() < 0 or codes.max() >= spec.levels):
        raise CodeOutOfRange(f"codes must lie in [0, {spec.levels - 1}]")
    return spec.lo + (codes + 0.5) * spec.delta


def message_bits(n_elements, quantizer):
    return n_elements * (quantizer.bits if quantizer is not None else FLOAT_BITS)


def encode(sender, t, theta_new, theta_hat, censor, quantizer):
    """
    Build agent ``sender``'s broadcast for round ``t``, or None when censored.
    """
    h = theta_new - theta_hat
    if censor is not None and not censor_decision(h, censor, t):
        return None
    bits = message_bits(h.size, quantizer)
    if quantizer is None:
        return Message(sender, t, bits, state=theta_new.copy())
    codes, clipped = quantize(quantizer, h, return_clipped=True)
    return Message(sender, t, bits, codes=codes, clipped=clipped)


def decode(msg, theta_hat, quantizer):
    """Apply ``msg`` to a stored copy of the sender's broadcast state."""
    if msg.codes is None:
        return msg.state.copy()
    return theta_hat + dequantize(quantizer, msg.codes)


@dataclass
class TraceLog:
    """Per-transmission CSV trace: ``t,sender,bits,clipped_count``."""

    rows: list = field(default_factory=list)

    def add(self, msg):
        self.rows.append((msg.round, msg.sender, msg.bits, msg.clipped))

    def to_csv(self):
        lines = ["t,sender,bits,clipped_count"]
        lines += [f"{t},{s},{b},{c}" for t, s, b, c in self.rows]
        return "\n".join(lines) + "\n"


def round_exchange(agents, proposals, topology, t, censor=None, quantizer=None,
                   counters=None, trace=None):
    """
    Run one synchronous broadcast round.

    Parameters
    ----------
    agents : list of AgentState
        Current states; their ``theta_hat_self`` and ``theta_hat_neighbors``
        tables are updated in place.
    proposals : list of ndarray
        Each agent's freshly computed primal iterate.
    topology : Topology
    t : int
        Round index, starting at 1.
    censor : CensorSpec, optional
        ``None`` transmits every round.
    quantizer : QuantizerSpec, optional
        ``None`` broadcasts exact states.
    counters : CommCounters, optional
        Incremented for every transmission.
    trace : TraceLog, optional

    Returns
    -------
    list
        The delivered messages (censored agents send nothing).
    """
    # all messages come from round-t state before any table is touched
    outbox = [encode(a.index, t, theta, a.theta_hat_self, censor, quantizer)
              for a, theta in zip(agents, proposals)]
    delivered = []
    for msg in outbox:
        if msg is None:
            continue
        sender = agents[msg.sender]
        new_hat = decode(msg, sender.theta_hat_self, quantizer)
        sender.theta_hat_self = new_hat
        for j in topology.neighbors(msg.sender):
            # one shared read-only array per broadcast keeps every copy identical
            agents[j].theta_hat_neighbors[msg.sender] = new_hat
        if counters is not None:
            counters.record(msg)
        if trace is not None:
            trace.add(msg)
        delivered.append(msg)
    return delivered
