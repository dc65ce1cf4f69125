import importlib_metadata

try:
    VERSION = importlib_metadata.version("fncomp")
except importlib_metadata.PackageNotFoundError:
    VERSION = "0.0.0+unknown"
