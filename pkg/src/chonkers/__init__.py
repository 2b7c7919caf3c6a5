"""Chonkers content-defined chunking, chonker trees and the Yarn string type."""

from .chunkcore import Caterpillar, Leaf, Merge, Node, Store, WeightClass, classify, is_heckin
from .errors import (ChonkersError, ConfigurationError, EmptyInputError, InvariantError, UndefinedDiffbitError,
                     UnsupportedSizeError)
from .pipeline import (BYTE8, CHAR32, ChunkerConfig, LayerSchedule, build_tree, byte_config, char_config,
                       chunk_layer, chunks_at_layer, default_schedule)
from .rebuild import TreeZipper, concat, edit_ops, slice_tree, splice
from .yarn import (Yarn, empty, fibonacci_word, yarn_compare, yarn_concat, yarn_delete, yarn_equal,
                   yarn_from_text, yarn_insert, yarn_replace, yarn_reverse, yarn_slice)

__all__ = [
    "BYTE8", "CHAR32", "Caterpillar", "ChonkersError", "ChunkerConfig", "ConfigurationError", "EmptyInputError",
    "InvariantError", "LayerSchedule", "Leaf", "Merge", "Node", "Store", "TreeZipper", "UndefinedDiffbitError",
    "UnsupportedSizeError", "WeightClass", "Yarn", "build_tree", "byte_config", "char_config", "chunk_layer",
    "chunks_at_layer", "classify", "concat", "default_schedule", "edit_ops", "empty", "fibonacci_word",
    "is_heckin", "slice_tree", "splice", "yarn_compare", "yarn_concat", "yarn_delete", "yarn_equal",
    "yarn_from_text", "yarn_insert", "yarn_replace", "yarn_reverse", "yarn_slice",
]
