from . import importer

__all__ = ["importer"]
