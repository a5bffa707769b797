"""Broadcast-channel matrix generation and fixture I/O.

The channel matrix H is N x M complex with row n holding the channel of
user n. All generators are deterministic: the same arguments (and seed,
where one applies) produce a bit-identical matrix.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError, FixtureFormatError, ParameterError

SPEED_OF_LIGHT = 299_792_458.0

SOURCE_FIXTURE = "fixture"
SOURCE_IID = "iid-gaussian"
SOURCE_KRONECKER = "kronecker-rayleigh"
SOURCE_FDMIMO = "fdmimo-los"


@dataclass(frozen=True)
class ChannelMatrix:
    """N x M complex channel with provenance tag."""

    entries: np.ndarray
    source: str = SOURCE_FIXTURE

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.ndim != 2:
            raise DimensionError("channel matrix must be 2-D, got shape %s"
                                 % (entries.shape,))
        n, m = entries.shape
        if n < 1 or m < 1:
            raise DimensionError("channel matrix must be non-empty")
        if n > m:
            raise DimensionError(
                "need at least as many antennas as users (N=%d > M=%d)" % (n, m))
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n_users(self):
        return self.entries.shape[0]

    @property
    def n_antennas(self):
        return self.entries.shape[1]


@dataclass(frozen=True)
class CorrelationSpec:
    """Exponential correlation factors at transmit and receive sides."""

    beta_t: float = 0.0
    beta_r: float = 0.0

    def __post_init__(self):
        for name in ("beta_t", "beta_r"):
            beta = getattr(self, name)
            if not 0.0 <= beta < 1.0:
                raise ParameterError(
                    "%s must lie in [0, 1), got %r (1 gives a singular "
                    "correlation matrix)" % (name, beta))


@dataclass(frozen=True)
class FdMimoGeometry:
    """Planar array broadcasting to users lined up perpendicular to it.

    Defaults follow the 8x8 half-wavelength array at 2.4 GHz, mounted
    20 m up, with 8 users starting 20 m away and spaced 10 m apart.
    """

    array_rows: int = 8
    array_cols: int = 8
    element_spacing: float = 0.5  # in carrier wavelengths
    carrier_hz: float = 2.4e9
    bs_height_m: float = 20.0
    first_user_distance_m: float = 20.0
    user_spacing_m: float = 10.0
    n_users: int = 8

    def __post_init__(self):
        if self.array_rows < 1 or self.array_cols < 1:
            raise ParameterError("array dimensions must be positive")
        for name in ("element_spacing", "carrier_hz", "bs_height_m",
                     "first_user_distance_m", "user_spacing_m"):
            if getattr(self, name) <= 0:
                raise ParameterError("%s must be strictly positive" % name)
        if self.n_users < 1:
            raise ParameterError("n_users must be positive")
        if self.n_users > self.array_rows * self.array_cols:
            raise ParameterError(
                "cannot serve %d users with a %dx%d array"
                % (self.n_users, self.array_rows, self.array_cols))

    @property
    def wavelength_m(self):
        return SPEED_OF_LIGHT / self.carrier_hz


def load_channel_fixture(path):
    """Read a channel fixture: header line "N M", then N rows of M "re im" pairs.

    '#' starts a comment. Entries are taken verbatim, no normalization.
    """
    with open(path, "r", encoding="ascii") as fh:
        raw_lines = fh.readlines()

    tokens_per_line = []
    for lineno, line in enumerate(raw_lines, start=1):
        body = line.split("#", 1)[0].strip()
        if body:
            tokens_per_line.append((lineno, body.split()))

    if not tokens_per_line:
        raise FixtureFormatError("%s: empty fixture, expected a 'N M' header" % path)

    lineno, header = tokens_per_line[0]
    if len(header) != 2:
        raise FixtureFormatError(
            "%s:%d: header must be exactly 'N M', got %d token(s)"
            % (path, lineno, len(header)))
    try:
        n_users, n_antennas = int(header[0]), int(header[1])
    except ValueError:
        raise FixtureFormatError(
            "%s:%d: header 'N M' must be two integers, got %r"
            % (path, lineno, " ".join(header))) from None
    if n_users < 1 or n_antennas < 1:
        raise FixtureFormatError(
            "%s:%d: header dimensions must be positive, got %d %d"
            % (path, lineno, n_users, n_antennas))

    body_lines = tokens_per_line[1:]
    if len(body_lines) != n_users:
        raise FixtureFormatError(
            "%s: header declares %d rows but body has %d"
            % (path, n_users, len(body_lines)))

    entries = np.empty((n_users, n_antennas), dtype=np.complex128)
    for row, (lineno, tokens) in enumerate(body_lines):
        if len(tokens) != 2 * n_antennas:
            raise FixtureFormatError(
                "%s:%d: expected %d numbers (re/im pairs for %d entries), got %d"
                % (path, lineno, 2 * n_antennas, n_antennas, len(tokens)))
        for col in range(n_antennas):
            try:
                re = float(tokens[2 * col])
                im = float(tokens[2 * col + 1])
            except ValueError:
                raise FixtureFormatError(
                    "%s:%d: entry %d is not a pair of decimal numbers: %r %r"
                    % (path, lineno, col + 1,
                       tokens[2 * col], tokens[2 * col + 1])) from None
            entries[row, col] = complex(re, im)

    return ChannelMatrix(entries=entries, source=SOURCE_FIXTURE)


def save_channel_fixture(channel, path):
    """Write a fixture readable by :func:`load_channel_fixture` (17 sig digits)."""
    entries = channel.entries if isinstance(channel, ChannelMatrix) else np.asarray(channel)
    n, m = entries.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%d %d\n" % (n, m))
        for row in range(n):
            parts = []
            for col in range(m):
                z = entries[row, col]
                parts.append("%.17g %.17g" % (z.real, z.imag))
            fh.write("  ".join(parts) + "\n")


def gen_iid_gaussian(n_users, n_antennas, seed):
    """IID circularly-symmetric complex Gaussian channel, unit entry variance.

    Real and imaginary parts are each N(0, 1/2) so that E|h|^2 = 1.
    """
    if n_users < 1:
        raise ParameterError("n_users must be positive")
    if n_users > n_antennas:
        raise DimensionError(
            "need at least as many antennas as users (N=%d > M=%d)"
            % (n_users, n_antennas))
    rng = np.random.default_rng(seed)
    real = rng.standard_normal((n_users, n_antennas))
    imag = rng.standard_normal((n_users, n_antennas))
    entries = (real + 1j * imag) / math.sqrt(2.0)
    return ChannelMatrix(entries=entries, source=SOURCE_IID)


def exponential_correlation(size, beta):
    """Correlation matrix with entries beta^|i-j| (Hermitian, unit diagonal)."""
    if not 0.0 <= beta < 1.0:
        raise ParameterError("beta must lie in [0, 1), got %r" % beta)
    idx = np.arange(size)
    return beta ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def _hermitian_sqrt(mat):
    # PSD square root via eigendecomposition, eigenvalues clamped at zero.
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def gen_kronecker_rayleigh(n_users, n_antennas, corr, seed):
    """Correlated Rayleigh channel R_r^(1/2) H_iid R_t^(1/2).

    With beta_t = beta_r = 0 this returns exactly the same matrix as
    :func:`gen_iid_gaussian` for the same seed.
    """
    if not isinstance(corr, CorrelationSpec):
        corr = CorrelationSpec(*corr)
    iid = gen_iid_gaussian(n_users, n_antennas, seed)
    entries = iid.entries
    if corr.beta_r != 0.0:
        root_r = _hermitian_sqrt(exponential_correlation(n_users, corr.beta_r))
        entries = root_r @ entries
    if corr.beta_t != 0.0:
        root_t = _hermitian_sqrt(exponential_correlation(n_antennas, corr.beta_t))
        entries = entries @ root_t
    return ChannelMatrix(entries=entries, source=SOURCE_KRONECKER)


def gen_fdmimo_los(geom=None):
    """Deterministic line-of-sight channel for a planar array.

    Antenna elements sit on a vertical plane centered at the mast top;
    users stand on the ground along the line perpendicular to that plane.
    Entry (n, m) is a * exp(-j 2 pi d / wavelength) with d the exact
    element-to-user distance and free-space amplitude a = wavelength/(4 pi d).
    Elements are enumerated row-major over the array.
    """
    if geom is None:
        geom = FdMimoGeometry()
    lam = geom.wavelength_m
    spacing = geom.element_spacing * lam

    rows = np.arange(geom.array_rows) - (geom.array_rows - 1) / 2.0
    cols = np.arange(geom.array_cols) - (geom.array_cols - 1) / 2.0
    # x: horizontal along the array, z: vertical, y: boresight toward users.
    xs = np.tile(cols * spacing, geom.array_rows)
    zs = geom.bs_height_m + np.repeat(rows[::-1] * spacing, geom.array_cols)

    user_y = geom.first_user_distance_m + geom.user_spacing_m * np.arange(geom.n_users)

    dx = xs[None, :]
    dy = user_y[:, None]
    dz = zs[None, :]
    dist = np.sqrt(dx ** 2 + dy ** 2 + dz ** 2)

    amp = lam / (4.0 * math.pi * dist)
    phase = -2.0 * math.pi * dist / lam
    entries = amp * np.exp(1j * phase)
    return ChannelMatrix(entries=entries, source=SOURCE_FDMIMO)
