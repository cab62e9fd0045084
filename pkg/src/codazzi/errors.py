"""Exception types raised across the package."""


class CodazziError(Exception):
    """Base class for errors reported by this package."""


class SingularMetricError(CodazziError, ValueError):
    pass


class DimensionError(CodazziError, ValueError):
    pass


class UnknownFieldError(CodazziError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown field"


class FieldKindError(CodazziError, TypeError):
    pass


class ClusterAmbiguityError(CodazziError, ValueError):
    pass


class ManifestError(CodazziError, ValueError):
    def __init__(self, message: str, key_path: str = ""):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


class CatalogNotFoundError(CodazziError, LookupError):
    pass
