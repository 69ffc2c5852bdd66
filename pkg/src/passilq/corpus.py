"""Built-in models and seeded random system generators for tests and CLI.

The continuous specs cover the passivity classes reachable by the
discretization scheme: a boundary-controlled wave system (impedance energy
preserving, in constant and space-varying-coefficient variants), the same
wave with a collocated feedthrough output (strictly impedance passive),
and a one-way transport equation with no ports (passive in both flavors).
A delay line (scattering energy preserving) is included for certification
and frequency-domain work; the trace-elimination scheme cannot restore its
class, which discretize_phs reports honestly, so scattering-preserving
discrete instances are instead built directly by allpass_cascade.
"""

import numpy as np

from .discretize import DiscreteSystem
from .passivity_cert import classify_discrete
from .phs_model import HField, PhsSpec

__all__ = [
    "wave_spec",
    "wave_varh_spec",
    "wave_feedthrough_spec",
    "transport_spec",
    "delay_line_spec",
    "corpus_specs",
    "builtin_specs",
    "random_impedance_passive",
    "allpass_cascade",
    "unobservable_skew_system",
    "scalar_passive_system",
]


def wave_spec():
    """Wave system: force input at the right end, collocated velocity output.

    State x = (strain, momentum); the second trace component at the right
    end is the input, the first trace component at the left end is clamped,
    and the output is the first trace component at the right end.  This is
    impedance energy preserving: supplied power 2 Re<u, y> equals the
    energy rate exactly.
    """
    return PhsSpec(
        n=2, p=1, k=1, interval=(0.0, 1.0),
        P1=[[0.0, 1.0], [1.0, 0.0]],
        P0=np.zeros((2, 2)),
        H=HField.constant(np.eye(2)),
        Wb1=[[0.0, 1.0, 0.0, 0.0]],
        Wb2=[[0.0, 0.0, 1.0, 0.0]],
        Wc=[[1.0, 0.0, 0.0, 0.0]],
    )


def wave_varh_spec():
    """Wave system with a linearly varying coefficient field.

    The passivity class is decided by the boundary matrices alone, so the
    flags match wave_spec; the varying H exercises the weighted inner
    product and the piecewise-linear field plumbing.
    """
    mesh = [0.0, 0.5, 1.0]
    values = [np.diag([1.0 + 0.5 * z, 1.0]) for z in mesh]
    base = wave_spec()
    return PhsSpec(
        n=2, p=1, k=1, interval=(0.0, 1.0),
        P1=base.P1, P0=base.P0,
        H=HField(mesh, values),
        Wb1=base.Wb1, Wb2=base.Wb2, Wc=base.Wc,
    )


def wave_feedthrough_spec(beta=1.5):
    """Wave system with output y = y0 + beta * u: strictly impedance passive.

    The impedance witness becomes 2*beta*|u|^2 >= 0 (passive, not
    preserving for beta > 0).  beta > 1 also pushes the feedthrough past
    the scattering short-circuit bound, so neither scattering flag holds at
    any grid size.
    """
    base = wave_spec()
    return PhsSpec(
        n=2, p=1, k=1, interval=(0.0, 1.0),
        P1=base.P1, P0=base.P0, H=base.H,
        Wb1=base.Wb1, Wb2=base.Wb2,
        Wc=[[1.0, float(beta), 0.0, 0.0]],
    )


def transport_spec():
    """One-way transport with homogeneous inflow and no ports (p = k = 0).

    Both passive flavors hold (the energy can only decrease through the
    outflow) and neither preserving flag does.
    """
    return PhsSpec(
        n=1, p=0, k=0, interval=(0.0, 1.0),
        P1=[[1.0]], P0=[[0.0]],
        H=HField.constant([[1.0]]),
        Wb1=np.zeros((0, 2)),
        Wb2=[[1.0, 0.0]],
        Wc=np.zeros((0, 2)),
    )


def delay_line_spec():
    """Transport with inflow input and outflow output: scattering preserving.

    ||u||^2 - ||y||^2 equals the energy rate exactly (completing the square
    in the boundary form); the impedance flags fail.
    """
    return PhsSpec(
        n=1, p=1, k=1, interval=(0.0, 1.0),
        P1=[[1.0]], P0=[[0.0]],
        H=HField.constant([[1.0]]),
        Wb1=[[1.0, 0.0]],
        Wb2=np.zeros((0, 2)),
        Wc=[[0.0, 1.0]],
    )


def corpus_specs():
    """Specs under the structure-preservation contract of discretize_phs."""
    return {
        "wave": wave_spec(),
        "wave_varh": wave_varh_spec(),
        "wave_feedthrough": wave_feedthrough_spec(),
        "transport": transport_spec(),
    }


def builtin_specs():
    """All named specs available to the CLI/service."""
    out = corpus_specs()
    out["delay_line"] = delay_line_spec()
    return out


def _complex_randn(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_impedance_passive(rng, m_max=6):
    """Seeded random impedance-passive system of dimension <= m_max.

    Construction guarantees the KYP class at the matrix level: M = GG* + I/2,
    A = M^-1 (skew + S/2) with S = A*M + MA strictly negative definite, and
    either MB = C* with D = 0 or MB = C* + R with D = delta*I and
    S + R (2 delta)^-1 R* < 0.  A is then Hurwitz by the Lyapunov argument,
    so the finite cost condition holds.
    """
    m = int(rng.integers(2, m_max + 1))
    p = int(rng.integers(1, min(m, 3) + 1))
    G = _complex_randn(rng, m, m)
    M = G @ G.conj().T + 0.5 * np.eye(m)
    C = _complex_randn(rng, p, m)
    J = _complex_randn(rng, m, m)
    skew = 0.5 * (J - J.conj().T)
    F = _complex_randn(rng, m, m)
    damp = F @ F.conj().T + 0.2 * np.eye(m)
    if rng.random() < 0.5:
        delta = 0.0
        S = -damp
        B = np.linalg.solve(M, C.conj().T)
        D = np.zeros((p, p), dtype=complex)
    else:
        delta = 0.3 + rng.random()
        R = _complex_randn(rng, m, p)
        S = -damp - R @ R.conj().T / (2.0 * delta)
        B = np.linalg.solve(M, C.conj().T + R)
        D = delta * np.eye(p, dtype=complex)
    A = np.linalg.solve(M, skew + 0.5 * S)
    sys = DiscreteSystem(A=A, B=B, C=C, D=D, M=M,
                         meta={"scheme": "random-impedance-passive", "delta": delta})
    sys.certificate = classify_discrete(sys)
    return sys


def allpass_cascade(N, total_length=1.0):
    """Series cascade of N first-order all-pass sections.

    Each cell (a, b, c, d, M) = (-2/h, 2/h, 2, -1, h) with h = length/N is
    scattering energy preserving exactly (2 a h + c^2 = 0, h b + c d = 0,
    d^2 = 1), and the class is closed under series composition, giving a
    stable scattering-preserving discrete system with transfer function
    ((1 - s h/2)/(1 + s h/2))^N.
    """
    N = int(N)
    if N < 1:
        raise ValueError("allpass_cascade needs N >= 1")
    h = float(total_length) / N
    a, b, c, d = -2.0 / h, 2.0 / h, 2.0, -1.0
    A = np.zeros((N, N), dtype=complex)
    B = np.zeros((N, 1), dtype=complex)
    C = np.zeros((1, N), dtype=complex)
    D = 1.0
    for i in range(N):
        A[i, i] = a
        for j in range(i):
            # input of cell i is the accumulated output of cells < i
            A[i, j] = b * c * d ** (i - 1 - j)
        B[i, 0] = b * d**i
        C[0, i] = c * d ** (N - 1 - i)
        D *= d
    M = h * np.eye(N, dtype=complex)
    sys = DiscreteSystem(A=A, B=B, C=C, D=np.array([[D]]), M=M,
                         meta={"scheme": "allpass-cascade", "N": N, "h": h})
    sys.certificate = classify_discrete(sys)
    return sys


def unobservable_skew_system():
    """Impedance-preserving system whose u = -y loop is not asymptotically stable.

    The third state is decoupled from both input and output, so the closed
    loop keeps an eigenvalue at zero; the explicit-solution stability
    hypothesis fails and must be reported, not patched.
    """
    A = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]], dtype=complex)
    B = np.array([[1.0], [0.0], [0.0]], dtype=complex)
    C = np.array([[1.0, 0.0, 0.0]], dtype=complex)
    D = np.zeros((1, 1), dtype=complex)
    sys = DiscreteSystem(A=A, B=B, C=C, D=D, M=np.eye(3, dtype=complex),
                         meta={"scheme": "unobservable-skew"})
    sys.certificate = classify_discrete(sys)
    return sys


def scalar_passive_system():
    """The scalar benchmark a=-1, b=c=1, d=0, M=1 (cost operator sqrt(2)-1)."""
    sys = DiscreteSystem(A=[[-1.0]], B=[[1.0]], C=[[1.0]], D=[[0.0]], M=[[1.0]],
                         meta={"scheme": "scalar-benchmark"})
    sys.certificate = classify_discrete(sys)
    return sys
