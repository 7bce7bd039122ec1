"""Domain error types shared across the package.

Every error carries a stable ``code`` string (the machine-parsable name the
CLI prints on exit 1). By default the code is the class name; classes whose
natural name would shadow a builtin override it explicitly.
"""


class RainbenchError(Exception):
    code = "Error"

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if "code" not in cls.__dict__:
            cls.code = cls.__name__


# imaging
class MalformedStream(RainbenchError):
    pass


class UnsupportedFormat(RainbenchError):
    pass


class DimensionMismatch(RainbenchError):
    pass


class ChannelMismatch(RainbenchError):
    pass


class OddWidth(RainbenchError):
    pass


class ImageTooSmall(RainbenchError):
    pass


# dataset
class InputSyntaxError(RainbenchError):
    code = "SyntaxError"

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class SchemaError(RainbenchError):
    pass


class SampleTooLarge(RainbenchError):
    pass


class CountMismatch(RainbenchError):
    pass


class VersionError(RainbenchError):
    pass


# benchmark
class MissingOutput(RainbenchError):
    def __init__(self, model_name, pair_ids):
        super().__init__(f"model {model_name!r} has no output for pair ids: {', '.join(pair_ids)}")
        self.model_name = model_name
        self.pair_ids = list(pair_ids)


class EmptyInput(RainbenchError):
    pass


# survey
class PoolTooSmall(RainbenchError):
    def __init__(self, which, needed, have):
        super().__init__(f"{which} pool too small: need {needed}, have {have}")
        self.which = which
        self.needed = needed
        self.have = have


class UnknownItem(RainbenchError):
    pass


class AlreadyAnswered(RainbenchError):
    pass


class SessionComplete(RainbenchError):
    pass


class NoCompleteSessions(RainbenchError):
    pass


class EmptyMatrix(RainbenchError):
    pass


# cli
class BindFailed(RainbenchError):
    pass
