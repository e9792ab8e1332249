"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and a process exit
status so the CLI can report failures without string matching.
"""


class CodecError(Exception):
    code = "CODEC_ERROR"
    exit_status = 10


# image-model
class MalformedPng(CodecError):
    code = "MALFORMED_PNG"
    exit_status = 11


class NotGrayscale8(CodecError):
    code = "NOT_GRAYSCALE8"
    exit_status = 12


class QuantizationViolation(CodecError):
    code = "QUANTIZATION_VIOLATION"
    exit_status = 13


class InvalidImage(CodecError):
    code = "INVALID_IMAGE"
    exit_status = 14


# transform
class RangeViolation(CodecError):
    code = "RANGE_VIOLATION"
    exit_status = 20


# symbolizer
class ValueOutOfRange(CodecError):
    code = "VALUE_OUT_OF_RANGE"
    exit_status = 30


class BlockMisalignment(CodecError):
    code = "BLOCK_MISALIGNMENT"
    exit_status = 31


class TruncatedStream(CodecError):
    code = "TRUNCATED_STREAM"
    exit_status = 32


class CountMismatch(CodecError):
    code = "COUNT_MISMATCH"
    exit_status = 33


class MalformedDigits(CodecError):
    code = "MALFORMED_DIGITS"
    exit_status = 34


class InvalidConfig(CodecError):
    code = "INVALID_CONFIG"
    exit_status = 35


# entropy
class SymbolOutOfAlphabet(CodecError):
    code = "SYMBOL_OUT_OF_ALPHABET"
    exit_status = 40


class CorruptStream(CodecError):
    code = "CORRUPT_STREAM"
    exit_status = 41


# container
class HeaderError(CodecError):
    code = "BAD_HEADER"
    exit_status = 50


class BadMagic(HeaderError):
    code = "BAD_MAGIC"
    exit_status = 51


class UnsupportedVersion(HeaderError):
    code = "UNSUPPORTED_VERSION"
    exit_status = 52


# bench
class VerificationFailure(CodecError):
    code = "VERIFICATION_FAILURE"
    exit_status = 60
