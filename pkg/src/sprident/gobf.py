"""Orthonormal rational basis filters with prescribed poles.

Laguerre atoms place one real pole, Kautz atoms one complex pair. A basis
is generated by cycling through the atoms and cascading each atom's
all-pass section, which keeps the family orthonormal under the unit-circle
inner product for any mix of atoms. An optional constant filter (direct
feedthrough) can be prepended; it is orthogonal to every strictly proper
filter so orthonormality is preserved.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .lti import RationalTf, eval_freq, is_schur

MAX_FUNCS = 16  # polynomial degrees stay benign below this


@dataclass(frozen=True)
class LaguerreAtom:
    a: float

    def __post_init__(self):
        if not abs(self.a) < 1:
            raise ValueError(f"Laguerre parameter must satisfy |a| < 1, got {self.a}")

    # front sections (numerator, denominator) and the all-pass section
    def fronts(self):
        gain = np.sqrt(1.0 - self.a ** 2)
        return [(np.array([gain]), np.array([1.0, -self.a]))]

    def allpass(self):
        return np.array([-self.a, 1.0]), np.array([1.0, -self.a])


@dataclass(frozen=True)
class KautzAtom:
    b: float
    c: float

    def __post_init__(self):
        if not (abs(self.b) < 1 and abs(self.c) < 1):
            raise ValueError(f"Kautz parameters must satisfy |b| < 1 and |c| < 1, got b={self.b}, c={self.c}")

    def denominator(self):
        return np.array([1.0, self.b * (self.c - 1.0), -self.c])

    def fronts(self):
        den = self.denominator()
        g_odd = np.sqrt(1.0 - self.c ** 2)
        g_even = np.sqrt((1.0 - self.c ** 2) * (1.0 - self.b ** 2))
        return [
            (g_odd * np.array([1.0, -self.b]), den),
            (np.array([g_even]), den),
        ]

    def allpass(self):
        return np.array([-self.c, self.b * (self.c - 1.0), 1.0]), self.denominator()


@dataclass(frozen=True)
class BasisSpec:
    """Atoms plus length of the generated basis."""

    atoms: tuple
    n_funcs: int
    include_feedthrough: bool = True

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("at least one atom required")
        if not 1 <= self.n_funcs <= MAX_FUNCS:
            raise ValueError(f"n_funcs must be in [1, {MAX_FUNCS}]")
        object.__setattr__(self, "atoms", tuple(self.atoms))


@dataclass(frozen=True)
class GobfBasis:
    """Ordered list of rational basis filters; the constant filter comes first if present."""

    filters: tuple
    spec: BasisSpec
    ts: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))
        for f in self.filters:
            ok, _ = is_schur(f)
            if not ok:
                raise ValueError("basis filter is not Schur")

    def __len__(self):
        return len(self.filters)


def _generate(spec, ts):
    filters = []
    if spec.include_feedthrough:
        filters.append(RationalTf([1.0], [1.0], ts))
    pre_num, pre_den = np.array([1.0]), np.array([1.0])
    proper = 0
    while proper < spec.n_funcs:
        for atom in spec.atoms:
            for f_num, f_den in atom.fronts():
                if proper >= spec.n_funcs:
                    break
                num = np.polymul(f_num, pre_num)
                den = np.polymul(f_den, pre_den)
                filters.append(RationalTf(num, den, ts))
                proper += 1
            ap_num, ap_den = atom.allpass()
            pre_num = np.polymul(pre_num, ap_num)
            pre_den = np.polymul(pre_den, ap_den)
    return filters


def build_basis(spec, ts=1.0):
    """Generate the first n_funcs filters of the cascade defined by the atoms."""
    return GobfBasis(_generate(spec, ts), spec, ts)


def laguerre_basis(a, n_funcs, ts=1.0, include_feedthrough=True):
    """Basis with a single real pole at ``a`` repeated through the cascade."""
    spec = BasisSpec((LaguerreAtom(a),), n_funcs, include_feedthrough)
    return build_basis(spec, ts)


def kautz_basis(b, c, n_funcs, ts=1.0, include_feedthrough=True):
    """Two-parameter basis for a complex pole pair; filters come in parity pairs
    sharing the denominator (q^2 + b(c-1) q - c)^k."""
    spec = BasisSpec((KautzAtom(b, c),), n_funcs, include_feedthrough)
    return build_basis(spec, ts)


def basis_from_poles(poles, n_funcs, ts=1.0, include_feedthrough=True):
    """Map a pole list to atoms: real poles to Laguerre, conjugate pairs to Kautz.

    A complex pair with monic quadratic q^2 + alpha q + beta maps to
    c = -beta, b = alpha / (c - 1). Atoms are ordered by pole modulus,
    largest first.
    """
    poles = np.asarray(poles, dtype=complex)
    atoms = []
    used = np.zeros(poles.size, dtype=bool)
    for i, p in enumerate(poles):
        if used[i]:
            continue
        if abs(p.imag) < 1e-8:
            atoms.append((abs(p), LaguerreAtom(float(p.real))))
            used[i] = True
        else:
            mates = [j for j in range(poles.size)
                     if not used[j] and j != i and abs(poles[j] - np.conj(p)) < 1e-6]
            if not mates:
                raise ValueError(f"complex pole {p} has no conjugate mate")
            used[i] = used[mates[0]] = True
            alpha = float(-2.0 * p.real)
            beta = float(abs(p) ** 2)
            c = -beta
            b = alpha / (c - 1.0)
            atoms.append((abs(p), KautzAtom(b, c)))
    atoms.sort(key=lambda t: -t[0])
    spec = BasisSpec(tuple(a for _, a in atoms), n_funcs, include_feedthrough)
    return build_basis(spec, ts)


def eval_basis(basis, omegas):
    """Matrix of filter responses, shape (n_filters, n_freqs)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    width = max(f.den.size for f in basis.filters)
    nums = np.zeros((len(basis.filters), width), dtype=complex)
    dens = np.zeros_like(nums)
    for i, f in enumerate(basis.filters):
        nums[i, width - f.num.size:] = f.num
        dens[i, width - f.den.size:] = f.den
    z = np.exp(1j * omegas * basis.ts)
    num_vals = _kernels.polyval_batch(nums, z)
    den_vals = _kernels.polyval_batch(dens, z)
    return num_vals / den_vals


def gram_matrix(basis, n_quad=4096):
    """Numerical inner-product matrix of the basis filters.

    The inner product is (ts/2pi) * integral of f_l(e^{j w ts}) f_m(e^{-j w ts})
    over w in [-pi/ts, pi/ts]; conjugate symmetry reduces it to the real part
    on [0, pi/ts]. Composite trapezoid on the uniform grid converges
    spectrally for these smooth periodic integrands.
    """
    theta = np.linspace(0.0, np.pi, n_quad)
    F = eval_basis(basis, theta / basis.ts)
    w = np.full(n_quad, theta[1] - theta[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return np.real((F * w) @ F.conj().T) / np.pi


def _exact_polydiv(num, den):
    q, r = np.polydiv(num, den)
    if np.max(np.abs(r)) > 1e-8 * max(1.0, np.max(np.abs(num))):
        raise ValueError("denominators do not nest; cannot form common denominator")
    return np.atleast_1d(q)


def combine(theta, basis):
    """Recombine coefficients into one rational function over the common denominator.

    The cascade construction nests denominators, so the last strictly
    proper filter carries the least common denominator.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.size != len(basis.filters):
        raise ValueError(f"theta has {theta.size} entries for {len(basis.filters)} filters")
    lcd = max((f.den for f in basis.filters), key=lambda d: d.size)
    num = np.zeros(lcd.size)
    for coef, f in zip(theta, basis.filters):
        term = np.polymul(f.num, _exact_polydiv(lcd, f.den))
        num = np.polyadd(num, coef * term)
    return RationalTf(num, lcd, basis.ts)
