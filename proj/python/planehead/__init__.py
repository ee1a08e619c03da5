"""Sculptor's-planes stylization of triangle meshes."""

import json

from ._planehead import (
    Error,
    InvalidArgument,
    ParseError,
    decode_frame,
    encode_frame,
    eye_socket_measures,
    face_fixture,
    load_mesh,
    rotation_between,
    save_mesh,
    vsa_segment,
)
from ._planehead import _Session

__all__ = [
    "Error",
    "InvalidArgument",
    "ParseError",
    "Session",
    "decode_frame",
    "encode_frame",
    "eye_socket_measures",
    "face_fixture",
    "load_mesh",
    "rotation_between",
    "save_mesh",
    "vsa_segment",
]


class Session:
    """Abstracted mesh, skinning pyramid and Lanteri constraints for one labeled mesh.

    labels holds one region id per face (0 = fixed); landmarks maps names to vertex indices.
    """

    def __init__(self, vertices, faces, labels, landmarks=None):
        self._s = _Session(vertices, faces, list(labels), dict(landmarks or {}))

    def stylize(self, lanteri=True, **params):
        """Optimize with the given style parameters (lambda_d, mu, ...) and return new vertices."""
        return self._s.stylize(json.dumps(params), lanteri)

    @property
    def anchor_count(self):
        return self._s.anchor_count

    @property
    def region_count(self):
        return self._s.region_count

    @property
    def constraint_count(self):
        return self._s.constraint_count

    def last_report(self):
        return self._s.last_report()
