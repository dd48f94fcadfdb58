"""Exception types shared across the package."""


class DataError(Exception):
    """Input data cannot be used: bad file structure, empty dataset, etc."""


class ModelFormatError(DataError):
    """A model file is missing, malformed, or fails validation."""


class DivergenceError(Exception):
    """Training produced non-finite parameters; message names the epoch."""
