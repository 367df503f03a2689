"""Exception hierarchy shared across the package."""


class CcnError(Exception):
    """Base class for every error raised by ccnacct."""


class FieldError(CcnError, ValueError):
    """A message field violates its type invariants."""


class OversizeField(FieldError):
    """A field exceeds its encoding limit or allowed range."""


class MalformedMessage(CcnError, ValueError):
    """Bytes could not be decoded into a valid message."""


class NoRoute(CcnError):
    """No FIB entry matches a name."""


class MissingCrSD(CcnError):
    """Accountable content was requested without consumer-specific data."""


class UnknownKey(CcnError, KeyError):
    """The key registry holds no key for the requested role and owner."""


class DecryptFailure(CcnError):
    """Ciphertext did not decrypt under the supplied key."""


class ConfigError(CcnError, ValueError):
    """Invalid topology, scenario, or producer configuration."""
