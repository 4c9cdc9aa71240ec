"""Translators between VMT-LIB and other model-checking formats."""
from .btor import btor_to_vmt, vmt_to_btor
from .horn import vmt_to_horn
from .smv import vmt_to_nuxmv

__all__ = ["btor_to_vmt", "vmt_to_btor", "vmt_to_horn", "vmt_to_nuxmv"]
