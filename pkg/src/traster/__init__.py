"""Compressed storage for time-evolving integer grids.

Build a :class:`TK2Raster` from a series of equally sized integer rasters,
then answer single-cell and windowed value-range queries straight off the
compressed form, or decompress any frame back to a dense array.
"""
from .bitvector import RankBitVector, build_bitvector
from .dataio import (BadMagicError, DimensionError, FormatError,
                     TruncatedError, VersionError, deserialize,
                     gen_interpolated, gen_random_smooth, read_container,
                     read_csv_frame, read_grid, serialize, write_container,
                     write_grid)
from .intcodes import DacSequence, zigzag_decode, zigzag_encode
from .k2raster import K2Raster
from .oracle import DenseSeries
from .tk2raster import K2RasterDelta, TK2Raster

__version__ = "0.1.0"

__all__ = [
    "BadMagicError",
    "DacSequence",
    "DenseSeries",
    "DimensionError",
    "FormatError",
    "K2Raster",
    "K2RasterDelta",
    "RankBitVector",
    "TK2Raster",
    "TruncatedError",
    "VersionError",
    "build_bitvector",
    "deserialize",
    "gen_interpolated",
    "gen_random_smooth",
    "read_container",
    "read_csv_frame",
    "read_grid",
    "serialize",
    "write_container",
    "write_grid",
    "zigzag_decode",
    "zigzag_encode",
]
