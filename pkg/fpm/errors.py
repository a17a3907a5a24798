"""Exception hierarchy shared by every fpm module"""


class FpmError(Exception):
    """Base class for all fpm errors."""


class ParameterError(FpmError, ValueError):
    """Invalid parameters or a violated pre-condition."""


class UndefinedInterpolationError(ParameterError):
    """Two interpolation points share an x-coordinate but disagree on y."""


class OverConstrainedError(ParameterError):
    """A constrained sharing fixes as many shares as the threshold."""


class RingError(FpmError, ArithmeticError):
    """A ring element needed an inverse that does not exist."""


class DecodeError(FpmError, ValueError):
    """Malformed serialized data (ciphertext, share, frame payload)."""


class UsageError(FpmError):
    """API misuse, e.g. mixing ciphertexts under different keys."""


class TransportError(FpmError, ConnectionError):
    """The peer went away or the transport could not be established."""


class ProtocolError(FpmError):
    """Unexpected frame, oversize frame or handshake mismatch."""


class GeneratorError(FpmError):
    """A dataset generation request cannot be satisfied."""
