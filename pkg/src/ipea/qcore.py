"""Dense two-qubit state-vector kernel and reproducible random streams.

Conventions, fixed here once and relied on by every other module:

* Basis ordering is ``|ancilla, target>`` with index ``2*a + t``, so a
  four-component state vector holds the amplitudes
  ``[<00|psi>, <01|psi>, <10|psi>, <11|psi>]``.
* ``make_rx(theta)``    returns exp(-i*theta*X/2).
* ``make_rz(lam)``      returns exp(-i*lam*Z/2) = diag(e^{-i lam/2}, e^{+i lam/2}).
* ``make_zz(alpha)``    returns exp(-i*alpha*Z(x)Z)
                        = diag(e^{-ia}, e^{+ia}, e^{+ia}, e^{-ia}).
* ``make_hadamard()``   returns [[1, 1], [1, -1]] / sqrt(2).

Gates and states are plain complex128 ndarrays; there are no wrapper
classes.  Factory functions validate unitarity at construction time, and
``prob_zero`` guards against de-normalised states so that a broken gate
cannot silently corrupt a run.
"""

from __future__ import annotations

import cmath
import hashlib
import math

import numpy as np

# Type aliases used in signatures throughout the package.  They carry no
# runtime behaviour; the shape checks live in the functions below.
Unitary2 = np.ndarray
Unitary4 = np.ndarray
QubitState = np.ndarray

ANCILLA = "ancilla"
TARGET = "target"

_UNITARY_TOL = 1e-12
_NORM_TOL = 1e-9
_PROB_TOL = 1e-10


def assert_unitary(gate: np.ndarray, tol: float = _UNITARY_TOL) -> np.ndarray:
    """Validate that ``gate`` is square, finite and satisfies U^dag U = I."""
    g = np.asarray(gate, dtype=np.complex128)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"gate must be square, got shape {g.shape}")
    if not np.all(np.isfinite(g.view(np.float64))):
        raise ValueError("gate has non-finite entries")
    dev = np.max(np.abs(g.conj().T @ g - np.eye(g.shape[0])))
    if dev > tol:
        raise ValueError(f"gate is not unitary: max |U^dag U - I| = {dev:.3e}")
    return g


def make_single_gate(kind: str, angle: float = 0.0) -> Unitary2:
    """Single-qubit gate constructor for kind in {"H", "RX", "RZ"}.

    The angle is ignored for H.  Dispatches to the dedicated factories
    below, which are what the circuit code calls directly.
    """
    if kind == "H":
        return make_hadamard()
    if kind == "RX":
        return make_rx(angle)
    if kind == "RZ":
        return make_rz(angle)
    raise ValueError(f"kind must be one of H, RX, RZ, got {kind!r}")


def make_rx(theta: float) -> Unitary2:
    """X rotation exp(-i*theta*X/2)."""
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return assert_unitary(np.array([[c, -1j * s], [-1j * s, c]]))


def make_rz(lam: float) -> Unitary2:
    """Z rotation exp(-i*lam*Z/2) = diag(e^{-i lam/2}, e^{+i lam/2})."""
    if not math.isfinite(lam):
        raise ValueError(f"angle must be finite, got {lam!r}")
    return assert_unitary(np.diag([cmath.exp(-0.5j * lam), cmath.exp(0.5j * lam)]))


def make_hadamard() -> Unitary2:
    return assert_unitary(np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0))


def make_zz(alpha: float) -> Unitary4:
    """Two-qubit interaction exp(-i*alpha*Z(x)Z).

    Diagonal diag(e^{-ia}, e^{+ia}, e^{+ia}, e^{-ia}): the even-parity
    states |00> and |11> acquire e^{-i alpha}, the odd-parity states
    e^{+i alpha}.
    """
    if not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha!r}")
    lo = cmath.exp(-1j * alpha)
    hi = cmath.exp(1j * alpha)
    return assert_unitary(np.diag([lo, hi, hi, lo]))


def make_controlled_phase(alpha: float, k: int) -> Unitary4:
    """Controlled phase diag(1, 1, e^{-i*alpha*2^(k-1)}, e^{+i*alpha*2^(k-1)}).

    Ancilla (the high bit) controls; the target picks up e^{-+i*alpha*2^(k-1)}
    on |0>/|1>.  Equal to make_zz(-alpha*2^(k-1)/2) followed by an rz on the
    target alone, so it shares all ancilla statistics with the zz realisation.
    """
    if not isinstance(k, int) or k < 1 or k > 62:
        raise ValueError(f"iteration index k must be an int in [1, 62], got {k!r}")
    beta = alpha * float(2 ** (k - 1))
    return assert_unitary(
        np.diag([1.0, 1.0, cmath.exp(-1j * beta), cmath.exp(1j * beta)])
    )


def zero_state(n_qubits: int) -> QubitState:
    """|0> for one qubit, |00> for two."""
    if n_qubits not in (1, 2):
        raise ValueError(f"n_qubits must be 1 or 2, got {n_qubits}")
    psi = np.zeros(2**n_qubits, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def apply(gate: np.ndarray, qubit: str | None, state: QubitState) -> QubitState:
    """Apply ``gate`` to ``state`` and return the new state vector.

    ``qubit`` selects where a 2x2 gate acts on a two-qubit state
    ("ancilla" or "target"); it must be None for a 4x4 gate, and is
    ignored for a single-qubit state.  The input state is not modified.
    """
    g = np.asarray(gate, dtype=np.complex128)
    psi = np.asarray(state, dtype=np.complex128)
    if psi.shape == (2,):
        if g.shape != (2, 2):
            raise ValueError(f"need a 2x2 gate for a 1-qubit state, got {g.shape}")
        return g @ psi
    if psi.shape != (4,):
        raise ValueError(f"state must have 2 or 4 amplitudes, got shape {psi.shape}")
    if g.shape == (4, 4):
        if qubit is not None:
            raise ValueError("qubit selector must be None for a 4x4 gate")
        return g @ psi
    if g.shape != (2, 2):
        raise ValueError(f"gate shape {g.shape} not supported")
    m = psi.reshape(2, 2)
    if qubit == ANCILLA:
        return (g @ m).reshape(4)
    if qubit == TARGET:
        return (m @ g.T).reshape(4)
    raise ValueError(f"qubit must be {ANCILLA!r} or {TARGET!r}, got {qubit!r}")


def prob_zero(state: QubitState, qubit: str = ANCILLA) -> float:
    """Probability of reading 0 on ``qubit`` in the computational basis."""
    psi = np.asarray(state, dtype=np.complex128)
    norms = np.abs(psi) ** 2
    total = float(norms.sum())
    if abs(total - 1.0) > _NORM_TOL:
        raise ValueError(f"state is not normalised: |psi|^2 = {total!r}")
    if psi.shape == (2,):
        return float(norms[0])
    if psi.shape != (4,):
        raise ValueError(f"state must have 2 or 4 amplitudes, got shape {psi.shape}")
    if qubit == ANCILLA:
        return float(norms[0] + norms[1])
    if qubit == TARGET:
        return float(norms[0] + norms[2])
    raise ValueError(f"qubit must be {ANCILLA!r} or {TARGET!r}, got {qubit!r}")


def sample_bit(p0: float, rng: "RngStream") -> int:
    """Draw one measurement outcome: 0 with probability p0, else 1."""
    if not (-_PROB_TOL <= p0 <= 1.0 + _PROB_TOL):
        raise ValueError(f"p0 = {p0!r} outside [0, 1]")
    p0 = min(1.0, max(0.0, p0))
    return 0 if rng.uniform() < p0 else 1


def _derive_key(master_seed: int, experiment: str, trial: int) -> int:
    """Stable 128-bit stream key from (master_seed, experiment, trial)."""
    h = hashlib.blake2b(digest_size=16)
    h.update(f"{master_seed}|{experiment}|{trial}".encode())
    return int.from_bytes(h.digest(), "little")


class RngStream:
    """Counter-based random stream addressed by (master_seed, experiment, trial).

    Streams with identical keys reproduce identical draw sequences no matter
    how many other streams were consumed in between, which is what makes
    trial-level parallelism deterministic: every trial owns its stream, and
    the aggregate cannot depend on the execution schedule.  The draw counter
    advances with each call on this stream only.
    """

    def __init__(self, master_seed: int, experiment: str = "", trial: int = 0):
        if not isinstance(master_seed, int) or master_seed < 0:
            raise ValueError(f"master_seed must be a non-negative int, got {master_seed!r}")
        if not isinstance(trial, int) or trial < 0:
            raise ValueError(f"trial must be a non-negative int, got {trial!r}")
        self.master_seed = master_seed
        self.experiment = experiment
        self.trial = trial
        key = _derive_key(master_seed, experiment, trial)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self) -> float:
        """One float64 uniform on [0, 1)."""
        return float(self._gen.random())

    def uniforms(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    def normal(self, scale: float) -> float:
        """One draw from N(0, scale^2)."""
        return float(self._gen.normal(0.0, scale))

    def normals(self, n: int, scale: float) -> np.ndarray:
        return self._gen.normal(0.0, scale, size=n)

    def binomial(self, n: int, p: float) -> int:
        """Number of successes in n Bernoulli(p) draws."""
        return int(self._gen.binomial(n, p))

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"RngStream(master_seed={self.master_seed}, "
            f"experiment={self.experiment!r}, trial={self.trial})"
        )
