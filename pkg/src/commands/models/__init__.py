from .error_response import ErrorResponse
from .manifest import MANIFEST_NAME, RunManifest, write_manifest

__all__ = ["ErrorResponse", "MANIFEST_NAME", "RunManifest", "write_manifest"]
